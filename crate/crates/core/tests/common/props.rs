//! Seeded property checks shared by the property suite and the acceptance
//! report.

use capbem::estimator::{dorfler_mark, zz_indicators, IndicatorField};
use capbem::mesh::{build_bary, build_dual, generate_geometry, refine_nvb, GeometryKind, Triangulation};
use capbem::operators::{assemble_projected, curl_maps, Density, DenseSymMatrix, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `rounds` random markings of up to `max_marks` elements each.
pub fn random_mesh(kind: GeometryKind, seed: u64, rounds: usize, max_marks: usize) -> Triangulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = generate_geometry(kind).unwrap();
    for _ in 0..rounds {
        let n = m.num_triangles();
        let k = rng.gen_range(1..=max_marks.min(n));
        let marked: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        m = refine_nvb(&m, &marked);
    }
    m
}

pub fn mesh_conformity(kind: GeometryKind, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = generate_geometry(kind).unwrap();
    let area = m.surface_area();
    for round in 0..50 {
        let n = m.num_triangles();
        let k = rng.gen_range(1..=3.min(n));
        let mut marked: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let r = refine_nvb(&m, &marked);
        marked.sort_unstable();
        marked.dedup();
        r.validate().map_err(|e| format!("round {round}: {e}"))?;
        ensure(r.num_triangles() >= n + marked.len(), || {
            format!("round {round}: {} -> {} with {} marked", n, r.num_triangles(), marked.len())
        })?;
        ensure((r.surface_area() - area).abs() <= 1e-12 * area, || {
            format!("round {round}: surface area changed")
        })?;
        m = r;
    }
    Ok(())
}

pub fn zz_vanishes_on_constants(kind: GeometryKind, seed: u64) -> Check {
    let mesh = random_mesh(kind, seed, 6, 4);
    let bary = build_bary(&mesh);
    let c = 0.5 + (seed % 7) as f64;
    let phi = Density::new(Space::DualP0, vec![c; mesh.num_vertices()]);
    let eta = zz_indicators(&phi, &mesh, &bary).map_err(|e| e.to_string())?;
    let worst = eta.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(worst <= 1e-24 * c * c, || format!("max indicator {worst:e} for constant {c}"))
}

pub fn dorfler_minimality(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..60);
    let values: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let theta = rng.gen_range(0.05..=1.0);
    let field = IndicatorField::new(values.clone());
    let total = field.total();
    let marked = dorfler_mark(&field, theta).map_err(|e| e.to_string())?;
    let sum = |idx: &[usize]| idx.iter().map(|&i| values[i]).sum::<f64>();
    ensure(sum(&marked) >= theta * total * (1.0 - 1e-12), || "bulk criterion violated".into())?;
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let shorter: f64 = sorted.iter().take(marked.len().saturating_sub(1)).sum();
    ensure(marked.is_empty() || shorter < theta * total, || {
        format!("{} marked but {} suffice", marked.len(), marked.len() - 1)
    })
}

fn cholesky_ok(m: &DenseSymMatrix) -> bool {
    m.symmetry_error() == 0.0 && m.to_faer().llt(faer::Side::Lower).is_ok()
}

pub fn single_layer_spd(kind: GeometryKind, seed: u64) -> Check {
    let mesh = random_mesh(kind, seed, 3, 4);
    let bary = build_bary(&mesh);
    let ops = assemble_projected(&mesh, &bary, 3).map_err(|e| e.to_string())?;
    ensure(cholesky_ok(&ops.vdual), || "V^dual not SPD".into())?;
    ensure(cholesky_ok(&ops.vp0), || "V^P0 not SPD".into())
}

pub fn curls_annihilate_constants(kind: GeometryKind, seed: u64) -> Check {
    let mesh = random_mesh(kind, seed, 8, 4);
    let bary = build_bary(&mesh);
    let ones = vec![1.0; mesh.num_vertices()];
    for (m, q) in curl_maps(&mesh, &bary).iter().enumerate() {
        let worst = q.apply(&ones).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        ensure(worst <= 1e-10, || format!("component {m}: |Q 1| = {worst:e}"))?;
    }
    Ok(())
}

pub fn dual_area_partition(kind: GeometryKind, seed: u64) -> Check {
    let mesh = random_mesh(kind, seed, 8, 4);
    let bary = build_bary(&mesh);
    let dual = build_dual(&mesh, &bary);
    let total = mesh.surface_area();
    let sum: f64 = dual.areas().iter().sum();
    ensure((sum - total).abs() <= 1e-12 * total, || format!("dual areas {sum} vs {total}"))?;
    let mut third = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            third[v] += mesh.area(t) / 3.0;
        }
    }
    for (v, (&a, &b)) in dual.areas().iter().zip(&third).enumerate() {
        ensure((a - b).abs() <= 1e-12 * b, || format!("cell {v}: {a} vs {b}"))?;
    }
    Ok(())
}
