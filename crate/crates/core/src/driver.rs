//! Adaptive loops on the dual space (ZZ estimator) and on the primal space
//! (weighted-residual estimator), the capacity functional and rate fits.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::estimator::{dorfler_mark, residual_indicators, zz_indicators, zz_values, IndicatorField};
use crate::io;
use crate::mesh::{build_bary, build_dual, generate_geometry, refine_nvb_with_parents, DualMesh, GeometryKind, Triangulation};
use crate::operators::{
    assemble_p1_disc, build_capacity_system, check_dense_cap, dot, p1_embedding, BoundaryData,
    CapacitySystem, Density, Space,
};
use crate::solver::{condition_number, solve_capacity, solve_primal, Precond, PrimalSolver, MAX_ITER};
use crate::INV_FOUR_PI;

/// `(1/4π) ⟨Φ, 1⟩` for dual-P0 or primal-P0 densities.
pub fn capacity_value(phi: &Density, mesh: &Triangulation, dual: &DualMesh) -> Result<f64> {
    let areas: Vec<f64> = match phi.space {
        Space::DualP0 => dual.areas().to_vec(),
        Space::PrimalP0 => (0..mesh.num_triangles()).map(|t| mesh.area(t)).collect(),
        other => {
            return Err(Error::SpaceMismatch {
                expected: Space::DualP0,
                got: other,
            })
        }
    };
    if areas.len() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: areas.len(),
            got: phi.len(),
        });
    }
    Ok(INV_FOUR_PI * dot(&phi.coeffs, &areas))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    Builtin(GeometryKind),
    Off(PathBuf),
    Mesh(Triangulation),
}

impl GeometrySource {
    pub fn load(&self) -> Result<Triangulation> {
        match self {
            GeometrySource::Builtin(kind) => generate_geometry(*kind),
            GeometrySource::Off(path) => {
                let m = io::load_off(path)?;
                Triangulation::with_initial_reference_edges(m.vertices().to_vec(), m.triangles().to_vec())
            }
            GeometrySource::Mesh(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Dual-space Galerkin solve marked by the ZZ-type estimator.
    Zz,
    /// Primal-space Galerkin solve marked by the weighted-residual estimator.
    Residual,
}

/// Source of the `err` column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    Value(f64),
    /// The capacity of the last level.
    Finest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometrySource,
    pub theta: f64,
    pub estimator: EstimatorKind,
    pub precond: Precond,
    pub lambda: f64,
    pub max_elements: usize,
    pub order: usize,
    pub reference: Reference,
    /// Dense condition numbers per level (configured and unpreconditioned).
    pub cond: bool,
    /// Levels with more unknowns skip the condition-number diagnostic.
    pub cond_max_dofs: usize,
    /// Largest number of dense matrix rows (6 per triangle in dual mode, 3 in
    /// residual mode) allowed during the run.
    pub dense_cap: usize,
    pub max_iter: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySource::Builtin(GeometryKind::Cube),
            theta: 0.5,
            estimator: EstimatorKind::Zz,
            precond: Precond::Operator,
            lambda: 1e-3,
            max_elements: 1000,
            order: 4,
            reference: Reference::None,
            cond: false,
            cond_max_dofs: 1500,
            dense_cap: 24_000,
            max_iter: MAX_ITER,
        }
    }
}

impl RunConfig {
    fn validate(&self, initial: &Triangulation) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.order == 0 {
            return Err(Error::InvalidOrder);
        }
        if self.max_elements < initial.num_triangles() {
            return Err(Error::InvalidConfig(format!(
                "max_elements {} is below the initial mesh size {}",
                self.max_elements,
                initial.num_triangles()
            )));
        }
        Ok(())
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRecord {
    pub level: usize,
    pub num_elements: usize,
    pub num_dofs: usize,
    pub capacity: f64,
    /// `η_ℓ²` (ZZ) or `μ_ℓ²` (residual).
    pub estimator_sq: f64,
    pub iterations: usize,
    /// Condition number of the configured solver operator.
    pub cond: Option<f64>,
    /// Condition number of the unpreconditioned Galerkin matrix.
    pub cond_plain: Option<f64>,
    pub err: Option<f64>,
    /// Residual mode: `⦀Φ_ℓ - Φ_{ℓ-1}⦀²` with the previous solution embedded
    /// into the current mesh.
    pub increment_sq: Option<f64>,
}

/// State of one level, handed to the observer of [`run_adaptive_with`].
pub struct LevelView<'a> {
    pub level: usize,
    pub mesh: &'a Triangulation,
    pub density: &'a Density,
    pub indicators: &'a IndicatorField,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub records: Vec<AdaptiveRecord>,
    pub mesh: Triangulation,
    pub density: Density,
    pub indicators: IndicatorField,
    /// True when the loop ended on a vanishing estimator.
    pub converged: bool,
}

/// A failed run with the levels completed before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error} (after {} completed levels)", records.len())]
pub struct RunError {
    #[source]
    pub error: Error,
    pub records: Vec<AdaptiveRecord>,
}

pub fn run_adaptive(config: &RunConfig) -> std::result::Result<AdaptiveRun, RunError> {
    run_adaptive_with(config, |_| {})
}

struct LevelResult {
    density: Density,
    indicators: IndicatorField,
    record: AdaptiveRecord,
}

/// Runs the adaptive loop, calling `observe` after every solved level.
pub fn run_adaptive_with(
    config: &RunConfig,
    mut observe: impl FnMut(&LevelView),
) -> std::result::Result<AdaptiveRun, RunError> {
    let mut records: Vec<AdaptiveRecord> = Vec::new();
    let fail = |error: Error, records: Vec<AdaptiveRecord>| RunError { error, records };

    let mut mesh = match config.geometry.load().and_then(|m| config.validate(&m).map(|_| m)) {
        Ok(m) => m,
        Err(e) => return Err(fail(e, records)),
    };
    // Residual mode: previous solution pulled back onto the current mesh.
    let mut embedded_previous: Option<Vec<f64>> = None;
    let mut level = 0;
    loop {
        let result = match config.estimator {
            EstimatorKind::Zz => solve_zz_level(config, &mesh, level),
            EstimatorKind::Residual => solve_residual_level(config, &mesh, level, embedded_previous.as_deref()),
        };
        let LevelResult {
            density,
            indicators,
            record,
        } = match result {
            Ok(r) => r,
            Err(e) => return Err(fail(e, records)),
        };
        observe(&LevelView {
            level,
            mesh: &mesh,
            density: &density,
            indicators: &indicators,
        });
        records.push(record);

        let converged = indicators.total() <= 0.0;
        if converged || mesh.num_triangles() > config.max_elements {
            fill_errors(&mut records, config.reference);
            return Ok(AdaptiveRun {
                records,
                mesh,
                density,
                indicators,
                converged,
            });
        }
        let marked = if config.theta >= 1.0 {
            (0..mesh.num_triangles()).collect()
        } else {
            match dorfler_mark(&indicators, config.theta) {
                Ok(m) => m,
                Err(e) => return Err(fail(e, records)),
            }
        };
        let (next, parents) = refine_nvb_with_parents(&mesh, &marked);
        if config.estimator == EstimatorKind::Residual {
            embedded_previous = Some(parents.iter().map(|&p| density.coeffs[p]).collect());
        }
        mesh = next;
        level += 1;
    }
}

fn fill_errors(records: &mut [AdaptiveRecord], reference: Reference) {
    let value = match reference {
        Reference::None => return,
        Reference::Value(v) => v,
        Reference::Finest => match records.last() {
            Some(r) => r.capacity,
            None => return,
        },
    };
    for r in records {
        r.err = Some((r.capacity - value).abs());
    }
}

fn solve_zz_level(config: &RunConfig, mesh: &Triangulation, level: usize) -> Result<LevelResult> {
    check_dense_cap(6 * mesh.num_triangles(), config.dense_cap)?;
    let bary = build_bary(mesh);
    let dual = build_dual(mesh, &bary);
    let system = build_capacity_system(mesh, &bary, &dual, config.order, &BoundaryData::Constant(1.0))?;
    let (density, report) = solve_capacity(
        &system,
        config.precond,
        config.lambda,
        |x| zz_values(x, mesh, &bary).iter().sum::<f64>().sqrt(),
        config.max_iter,
    )?;
    let indicators = zz_indicators(&density, mesh, &bary)?;
    let capacity = capacity_value(&density, mesh, &dual)?;
    let (cond, cond_plain) = if config.cond && system.dim() <= config.cond_max_dofs {
        (
            Some(preconditioned_condition(&system, config.precond)?),
            Some(condition_number(|x| system.apply_vdual(x), system.dim())?),
        )
    } else {
        (None, None)
    };
    Ok(LevelResult {
        record: AdaptiveRecord {
            level,
            num_elements: mesh.num_triangles(),
            num_dofs: system.dim(),
            capacity,
            estimator_sq: indicators.total(),
            iterations: report.iterations,
            cond,
            cond_plain,
            err: None,
            increment_sq: None,
        },
        density,
        indicators,
    })
}

/// Condition number of the operator GMRES works with.
pub fn preconditioned_condition(system: &CapacitySystem, precond: Precond) -> Result<f64> {
    let n = system.dim();
    match precond {
        Precond::Operator => condition_number(|x| system.apply_preconditioned(x), n),
        Precond::None => condition_number(|x| system.apply_vdual(x), n),
        Precond::Diagonal => {
            let diag: Vec<f64> = (0..n).map(|i| system.vdual().get(i, i)).collect();
            condition_number(
                |x| {
                    let mut y = system.apply_vdual(x);
                    y.iter_mut().zip(&diag).for_each(|(v, d)| *v /= d);
                    y
                },
                n,
            )
        }
    }
}

fn solve_residual_level(
    config: &RunConfig,
    mesh: &Triangulation,
    level: usize,
    previous: Option<&[f64]>,
) -> Result<LevelResult> {
    let n = mesh.num_triangles();
    check_dense_cap(3 * n, config.dense_cap)?;
    let v_p1 = assemble_p1_disc(mesh, config.order)?;
    let e = p1_embedding(mesh);
    let v_p0 = v_p1.congruence(&e);
    let areas: Vec<f64> = (0..n).map(|t| mesh.area(t)).collect();
    let solver = match config.precond {
        Precond::Operator => PrimalSolver::auto(n),
        p => PrimalSolver::Gmres(p),
    };
    let (density, report) = solve_primal(&v_p0, &areas, solver)?;
    let f_p1: Vec<f64> = (0..3 * n).map(|i| areas[i / 3] / 3.0).collect();
    let indicators = residual_indicators(&density, mesh, &v_p1, &e, &f_p1)?;
    let capacity = INV_FOUR_PI * dot(&density.coeffs, &areas);
    let increment_sq = previous.map(|prev| {
        let diff: Vec<f64> = density.coeffs.iter().zip(prev).map(|(a, b)| a - b).collect();
        v_p0.quad_form(&diff)
    });
    let (cond, cond_plain) = if config.cond && n <= config.cond_max_dofs {
        let c = condition_number(|x| v_p0.matvec(x), n)?;
        (Some(c), Some(c))
    } else {
        (None, None)
    };
    Ok(LevelResult {
        record: AdaptiveRecord {
            level,
            num_elements: n,
            num_dofs: n,
            capacity,
            estimator_sq: indicators.total(),
            iterations: report.iterations,
            cond,
            cond_plain,
            err: None,
            increment_sq,
        },
        density,
        indicators,
    })
}

/// Quantity whose decay [`rate_fit`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateField {
    Estimator,
    Error,
}

/// Least-squares slope of `log(field)` against `log(#T)` over the last decade
/// of element counts, or over the last five records if the history spans
/// less than a decade.
pub fn rate_fit(records: &[AdaptiveRecord], field: RateField) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::InsufficientRecords {
            needed: 3,
            got: records.len(),
        });
    }
    let last = records[records.len() - 1].num_elements as f64;
    let spans_decade = records[0].num_elements as f64 <= last / 10.0;
    let chosen: Vec<&AdaptiveRecord> = if spans_decade {
        records
            .iter()
            .filter(|r| r.num_elements as f64 >= last / 10.0)
            .collect()
    } else {
        records[records.len().saturating_sub(5)..].iter().collect()
    };
    let mut pts = Vec::with_capacity(chosen.len());
    for r in chosen {
        let y = match field {
            RateField::Estimator => r.estimator_sq,
            RateField::Error => r.err.ok_or_else(|| {
                Error::InvalidConfig("error rate requested without a reference capacity".into())
            })?,
        };
        pts.push(((r.num_elements as f64).ln(), y.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<AdaptiveRecord> {
        (0..12)
            .map(|l| {
                let n = (12.0 * 1.6f64.powi(l)).round();
                AdaptiveRecord {
                    level: l as usize,
                    num_elements: n as usize,
                    num_dofs: 0,
                    capacity: 1.0,
                    estimator_sq: f(n),
                    iterations: 1,
                    cond: None,
                    cond_plain: None,
                    err: Some(2.0 * f(n)),
                    increment_sq: None,
                }
            })
            .collect()
    }

    #[test]
    fn synthetic_rates() {
        let r = synthetic(|n| 100.0 / n);
        assert!((rate_fit(&r, RateField::Estimator).unwrap() + 1.0).abs() < 1e-12);
        let r = synthetic(|n| 3.0 * n.powf(-2.0 / 3.0));
        assert!((rate_fit(&r, RateField::Error).unwrap() + 2.0 / 3.0).abs() < 1e-6);
        assert!(matches!(rate_fit(&r[..2], RateField::Estimator), Err(Error::InsufficientRecords { .. })));
    }

    #[test]
    fn rate_fit_uses_last_decade_of_uniform_history() {
        let mut r: Vec<AdaptiveRecord> = synthetic(|n| n.powf(-2.0 / 3.0))
            .into_iter()
            .take(5)
            .enumerate()
            .map(|(l, mut rec)| {
                rec.num_elements = 12 << (2 * l);
                rec.estimator_sq = (rec.num_elements as f64).powf(-2.0 / 3.0);
                rec
            })
            .collect();
        r[0].estimator_sq = 1e-3;
        assert!((rate_fit(&r, RateField::Estimator).unwrap() + 2.0 / 3.0).abs() < 1e-12);
        assert!(rate_fit(&r[1..4], RateField::Estimator).unwrap() < -0.6);
    }

    #[test]
    fn capacity_functional() {
        let m = generate_geometry(GeometryKind::Cube).unwrap();
        let b = build_bary(&m);
        let d = build_dual(&m, &b);
        let zero = Density::zeros(Space::DualP0, 8);
        assert_eq!(capacity_value(&zero, &m, &d).unwrap(), 0.0);
        let phi = Density::new(Space::DualP0, (0..8).map(|i| 1.0 + i as f64).collect());
        let two = Density::new(Space::DualP0, phi.coeffs.iter().map(|v| 2.0 * v).collect());
        let c = capacity_value(&phi, &m, &d).unwrap();
        assert!((capacity_value(&two, &m, &d).unwrap() - 2.0 * c).abs() < 1e-15);
        let ones = Density::new(Space::PrimalP0, vec![1.0; 12]);
        assert!((capacity_value(&ones, &m, &d).unwrap() - 6.0 * INV_FOUR_PI).abs() < 1e-15);
        assert!(capacity_value(&Density::zeros(Space::S1, 8), &m, &d).is_err());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            RunConfig { theta: 0.0, ..Default::default() },
            RunConfig { theta: 1.2, ..Default::default() },
            RunConfig { max_elements: 5, ..Default::default() },
            RunConfig { lambda: -1.0, ..Default::default() },
        ] {
            let err = run_adaptive(&cfg).unwrap_err();
            assert!(err.records.is_empty());
        }
    }
}
