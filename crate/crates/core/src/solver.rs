//! GMRES with a caller-supplied stopping rule, the capacity and primal
//! solves built on it, energy norms and dense condition-number diagnostics.

use faer::linalg::solvers::Solve;

use crate::error::{Error, Result};
use crate::operators::{dot, CapacitySystem, Density, DenseSymMatrix, Space};

/// Relative residual at which GMRES stops regardless of the callback.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Iteration limit of the capacity solve.
pub const MAX_ITER: usize = 500;
/// Largest dimension for dense direct primal solves.
pub const DIRECT_LIMIT: usize = 2000;
/// Largest dimension accepted by [`condition_number`].
pub const COND_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EstimatorRule,
    ResidualTol,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Relative residual of the (possibly preconditioned) system.
    pub final_residual: f64,
    /// `⦀Φ_{k-1} - Φ_k⦀` per iteration, with `Φ_0 = 0`.
    pub energy_increments: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precond {
    Operator,
    Diagonal,
    None,
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Non-restarted GMRES from a zero initial guess with modified Gram-Schmidt
/// and Givens rotations.
///
/// After every iteration the current iterate is handed to `stop`; the
/// iteration also ends once the relative residual drops below `tol` or after
/// `max_iter` steps.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    mut stop: impl FnMut(usize, &[f64]) -> bool,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, SolveReport) {
    let n = b.len();
    let beta = norm(b);
    let mut report = SolveReport {
        iterations: 1,
        stop_reason: StopReason::ResidualTol,
        final_residual: 0.0,
        energy_increments: Vec::new(),
    };
    if beta == 0.0 {
        return (vec![0.0; n], report);
    }
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    // Column j of the Hessenberg matrix, already rotated.
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut rot: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut x = vec![0.0; n];

    for k in 0..max_iter.max(1) {
        let mut w = apply(&basis[k]);
        let mut col = vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(&w, v);
            col[i] = hij;
            w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
        }
        let hnext = norm(&w);
        col[k + 1] = hnext;
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, bb) = (col[i], col[i + 1]);
            col[i] = c * a + s * bb;
            col[i + 1] = -s * a + c * bb;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        col[k] = r;
        col[k + 1] = 0.0;
        rot.push((c, s));
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        h.push(col);

        // Back substitution for the current iterate.
        let m = k + 1;
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for j in i + 1..m {
                acc -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for (yj, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yj * vi);
        }

        report.iterations = m;
        report.final_residual = g[m].abs() / beta;
        if stop(m, &x) {
            report.stop_reason = StopReason::EstimatorRule;
            return (x, report);
        }
        if report.final_residual < tol || hnext <= 1e-14 * beta {
            report.stop_reason = StopReason::ResidualTol;
            return (x, report);
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }
    report.stop_reason = StopReason::MaxIter;
    (x, report)
}

/// Solves the dual-space capacity system.
///
/// `estimator` maps dual-P0 coefficients to the estimator `η` (not squared).
/// The iteration stops once `⦀Φ_{k-1} - Φ_k⦀ <= λ η(Φ_k)`, or at the residual
/// tolerance.
pub fn solve_capacity(
    system: &CapacitySystem,
    precond: Precond,
    lambda: f64,
    mut estimator: impl FnMut(&[f64]) -> f64,
    max_iter: usize,
) -> Result<(Density, SolveReport)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let n = system.dim();
    let mut previous = vec![0.0; n];
    let mut increments = Vec::new();
    let diag: Vec<f64> = (0..n).map(|i| system.vdual().get(i, i)).collect();

    let recover = |z: &[f64]| -> Vec<f64> {
        match precond {
            Precond::Operator => system.recover(z),
            Precond::Diagonal | Precond::None => z.to_vec(),
        }
    };
    let mut rule = |_: usize, z: &[f64]| -> bool {
        let phi = recover(z);
        let diff: Vec<f64> = phi.iter().zip(&previous).map(|(a, b)| a - b).collect();
        let inc = system.energy_sq(&diff).max(0.0).sqrt();
        increments.push(inc);
        previous = phi;
        inc <= lambda * estimator(&previous)
    };

    let (z, mut report) = match precond {
        Precond::Operator => gmres(
            |x| system.apply_preconditioned(x),
            &system.preconditioned_rhs(),
            &mut rule,
            max_iter,
            RESIDUAL_TOL,
        ),
        Precond::Diagonal => {
            let b: Vec<f64> = system.rhs().iter().zip(&diag).map(|(f, d)| f / d).collect();
            gmres(
                |x| {
                    let mut y = system.apply_vdual(x);
                    y.iter_mut().zip(&diag).for_each(|(v, d)| *v /= d);
                    y
                },
                &b,
                &mut rule,
                max_iter,
                RESIDUAL_TOL,
            )
        }
        Precond::None => gmres(
            |x| system.apply_vdual(x),
            system.rhs(),
            &mut rule,
            max_iter,
            RESIDUAL_TOL,
        ),
    };
    report.energy_increments = increments;
    if report.stop_reason == StopReason::MaxIter {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    Ok((Density::new(Space::DualP0, recover(&z)), report))
}

/// How to solve a primal-space Galerkin system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalSolver {
    /// Dense Cholesky factorization.
    Direct,
    /// GMRES to relative residual `1e-10`, optionally Jacobi-scaled.
    Gmres(Precond),
}

impl PrimalSolver {
    /// Direct up to [`DIRECT_LIMIT`] unknowns, unpreconditioned GMRES above.
    pub fn auto(n: usize) -> Self {
        if n <= DIRECT_LIMIT {
            PrimalSolver::Direct
        } else {
            PrimalSolver::Gmres(Precond::Diagonal)
        }
    }
}

/// Solves `V x = f` for primal-P0 coefficients.
pub fn solve_primal(
    v: &DenseSymMatrix,
    f: &[f64],
    solver: PrimalSolver,
) -> Result<(Density, SolveReport)> {
    let n = v.dim();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    match solver {
        PrimalSolver::Direct => {
            let llt = v
                .to_faer()
                .llt(faer::Side::Lower)
                .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
            let mut x = faer::Mat::from_fn(n, 1, |i, _| f[i]);
            llt.solve_in_place(x.as_mut());
            let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
            let r = v.matvec(&x);
            let fnorm = norm(f);
            let res = norm(&r.iter().zip(f).map(|(a, b)| a - b).collect::<Vec<_>>());
            let report = SolveReport {
                iterations: 1,
                stop_reason: StopReason::ResidualTol,
                final_residual: if fnorm > 0.0 { res / fnorm } else { 0.0 },
                energy_increments: Vec::new(),
            };
            Ok((Density::new(Space::PrimalP0, x), report))
        }
        PrimalSolver::Gmres(precond) => {
            let diag: Vec<f64> = (0..n)
                .map(|i| if precond == Precond::Diagonal { v.get(i, i) } else { 1.0 })
                .collect();
            let b: Vec<f64> = f.iter().zip(&diag).map(|(a, d)| a / d).collect();
            let (x, report) = gmres(
                |x| {
                    let mut y = v.matvec(x);
                    y.iter_mut().zip(&diag).for_each(|(a, d)| *a /= d);
                    y
                },
                &b,
                |_, _| false,
                n.max(1),
                RESIDUAL_TOL,
            );
            if report.stop_reason == StopReason::MaxIter {
                return Err(Error::NoConvergence {
                    iterations: report.iterations,
                    residual: report.final_residual,
                });
            }
            Ok((Density::new(Space::PrimalP0, x), report))
        }
    }
}

/// `⟨V ψ, ψ⟩^{1/2}` for a dual-P0 density.
pub fn energy_norm(system: &CapacitySystem, psi: &Density) -> Result<f64> {
    let x = psi.expect(Space::DualP0)?;
    if x.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x.len(),
        });
    }
    let q = system.energy_sq(x);
    let scale = system.vdual().get(0, 0) * dot(x, x);
    if q < -1e-12 * scale {
        return Err(Error::NegativeEnergy(q));
    }
    Ok(q.max(0.0).sqrt())
}

/// Ratio of extreme singular values of the `n x n` matrix of `apply`,
/// materialized column by column.
pub fn condition_number(apply: impl Fn(&[f64]) -> Vec<f64>, n: usize) -> Result<f64> {
    if n > COND_LIMIT {
        return Err(Error::TooLargeForDense {
            dim: n,
            limit: COND_LIMIT,
        });
    }
    let mut a = faer::Mat::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = apply(&e);
        e[j] = 0.0;
        for (i, v) in col.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let s = a
        .singular_values()
        .map_err(|e| Error::NotPositiveDefinite(format!("singular values failed: {e:?}")))?;
    let max = s.iter().cloned().fold(0.0f64, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max / min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DenseSymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = DenseSymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                a.set(i, j, s + if i == j { n as f64 } else { 0.0 });
            }
        }
        a
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 3.0];
        let (x, r) = gmres(|x| x.to_vec(), &b, |_, _| false, 10, 1e-10);
        assert_eq!(r.iterations, 1);
        for (a, c) in x.iter().zip(&b) {
            assert!((a - c).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_system() {
        let (x, _) = gmres(|x| vec![2.0 * x[0], x[1]], &[2.0, 1.0], |_, _| false, 10, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let (x, r) = gmres(|x| x.to_vec(), &[0.0, 0.0], |_, _| false, 10, 1e-10);
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn random_spd_matches_direct() {
        let a = random_spd(50, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rep) = gmres(|x| a.matvec(x), &b, |_, _| false, 200, 1e-10);
        assert_eq!(rep.stop_reason, StopReason::ResidualTol);
        let (d, _) = solve_primal(&a, &b, PrimalSolver::Direct).unwrap();
        let res_direct = norm(&a.matvec(&d.coeffs).iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>());
        let res_gmres = norm(&a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>());
        assert!((res_gmres - res_direct).abs() < 1e-9 * norm(&b));
        assert!((rep.final_residual * norm(&b) - res_gmres).abs() < 1e-9 * norm(&b));
    }

    #[test]
    fn stop_callback_ends_iteration() {
        let a = random_spd(30, 5);
        let b = vec![1.0; 30];
        let (_, rep) = gmres(|x| a.matvec(x), &b, |k, _| k == 3, 100, 1e-14);
        assert_eq!(rep.iterations, 3);
        assert_eq!(rep.stop_reason, StopReason::EstimatorRule);
    }

    #[test]
    fn primal_direct_vs_iterative() {
        let a = random_spd(40, 9);
        let f: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let (x1, _) = solve_primal(&a, &f, PrimalSolver::Direct).unwrap();
        let (x2, _) = solve_primal(&a, &f, PrimalSolver::Gmres(Precond::Diagonal)).unwrap();
        let (x3, _) = solve_primal(&a, &f, PrimalSolver::Gmres(Precond::None)).unwrap();
        for i in 0..40 {
            assert!((x1.coeffs[i] - x2.coeffs[i]).abs() < 1e-8);
            assert!((x1.coeffs[i] - x3.coeffs[i]).abs() < 1e-8);
        }
        let (z, _) = solve_primal(&a, &[0.0; 40], PrimalSolver::Direct).unwrap();
        assert!(z.coeffs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn condition_numbers() {
        assert!((condition_number(|x| x.to_vec(), 5).unwrap() - 1.0).abs() < 1e-12);
        let c = condition_number(|x| vec![4.0 * x[0], x[1]], 2).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
        assert!(matches!(
            condition_number(|x| x.to_vec(), COND_LIMIT + 1),
            Err(Error::TooLargeForDense { .. })
        ));
    }
}
