//! Newest-vertex bisection with conforming closure.

use std::collections::HashMap;

use super::Triangulation;

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Refines `mesh` so that every triangle in `marked` is bisected at least once
/// through its reference edge, then closes the refinement to the coarsest
/// conforming mesh. Each refined triangle yields 2, 3 or 4 sons.
///
/// When every triangle is marked, all edges are bisected (uniform refinement,
/// four sons per triangle).
///
/// # Panics
///
/// If a marked index is out of range.
pub fn refine_nvb(mesh: &Triangulation, marked: &[usize]) -> Triangulation {
    refine_nvb_with_parents(mesh, marked).0
}

/// [`refine_nvb`] that also returns, for every new triangle, the index of
/// the triangle of `mesh` containing it.
pub fn refine_nvb_with_parents(mesh: &Triangulation, marked: &[usize]) -> (Triangulation, Vec<usize>) {
    if marked.is_empty() {
        return (mesh.clone(), (0..mesh.num_triangles()).collect());
    }
    let tris = mesh.triangles();
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            edge_tris
                .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                .or_default()
                .push(t);
        }
    }

    // Closure: a triangle with any marked edge must have its reference edge
    // marked too. Worklist until fixed point.
    let mut is_marked: HashMap<(usize, usize), bool> =
        edge_tris.keys().map(|&e| (e, false)).collect();
    let mut work: Vec<usize> = Vec::new();
    for &t in marked {
        assert!(t < tris.len(), "marked triangle {t} out of range");
        work.push(t);
    }
    let mut seeded: Vec<bool> = vec![false; tris.len()];
    for &t in marked {
        seeded[t] = true;
    }
    if seeded.iter().all(|&s| s) {
        is_marked.values_mut().for_each(|m| *m = true);
        work.clear();
    }
    while let Some(t) = work.pop() {
        let tri = tris[t];
        let reference = edge_key(tri[0], tri[1]);
        let needs = seeded[t]
            || (0..3).any(|k| is_marked[&edge_key(tri[k], tri[(k + 1) % 3])]);
        if needs && !is_marked[&reference] {
            is_marked.insert(reference, true);
            for &s in &edge_tris[&reference] {
                if s != t {
                    work.push(s);
                }
            }
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in tris {
        for k in 0..3 {
            let e = edge_key(tri[k], tri[(k + 1) % 3]);
            if is_marked[&e] && !midpoint.contains_key(&e) {
                midpoint.insert(e, vertices.len());
                vertices.push(0.5 * (vertices[e.0] + vertices[e.1]));
            }
        }
    }

    let mut out = Vec::with_capacity(tris.len() + 3 * midpoint.len());
    let mut parents = Vec::with_capacity(out.capacity());
    for (t, &tri) in tris.iter().enumerate() {
        bisect(tri, &midpoint, &mut out);
        parents.resize(out.len(), t);
    }
    let refined = Triangulation::new_unchecked(vertices, out).with_generation(mesh.generation() + 1);
    (refined, parents)
}

/// Bisects `[a, b, c]` through its reference edge `(a, b)` if that edge has a
/// midpoint, recursing into the sons whose reference edges are refined too.
fn bisect(tri: [usize; 3], midpoint: &HashMap<(usize, usize), usize>, out: &mut Vec<[usize; 3]>) {
    let [a, b, c] = tri;
    match midpoint.get(&edge_key(a, b)) {
        Some(&m) => {
            bisect([c, a, m], midpoint, out);
            bisect([b, c, m], midpoint, out);
        }
        None => out.push(tri),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_geometry, GeometryKind, StarParams};
    use proptest::prelude::*;

    fn cube() -> Triangulation {
        generate_geometry(GeometryKind::Cube).unwrap()
    }

    #[test]
    fn uniform_refinement_quadruples() {
        let m = cube();
        let all: Vec<usize> = (0..m.num_triangles()).collect();
        let r = refine_nvb(&m, &all);
        assert_eq!(r.num_triangles(), 48);
        r.validate().unwrap();
        assert!((r.surface_area() - 6.0).abs() < 1e-13);
        assert_eq!(r.generation(), 1);
    }

    #[test]
    fn parents_contain_sons() {
        let m = cube();
        let (r, parents) = refine_nvb_with_parents(&m, &[2, 9]);
        assert_eq!(parents.len(), r.num_triangles());
        let mut area = vec![0.0; m.num_triangles()];
        for (s, &p) in parents.iter().enumerate() {
            area[p] += r.area(s);
            let c = crate::geometry::centroid(&r.corners(s)[0], &r.corners(s)[1], &r.corners(s)[2]);
            let n = m.normal(p);
            assert!((c - m.corners(p)[0]).dot(&n).abs() < 1e-14);
        }
        for (t, a) in area.iter().enumerate() {
            assert!((a - m.area(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = cube();
        assert_eq!(refine_nvb(&m, &[]), m);
    }

    #[test]
    fn single_mark_closure() {
        let m = cube();
        let r = refine_nvb(&m, &[0]);
        r.validate().unwrap();
        assert!((13..=16).contains(&r.num_triangles()), "{}", r.num_triangles());
    }

    #[test]
    fn sons_reference_edge_is_opposite_newest_vertex() {
        let m = cube();
        let r = refine_nvb(&m, &[3, 7]);
        let first_new = m.num_vertices();
        let mut sons = 0;
        for tri in r.triangles() {
            if tri.iter().any(|&v| v >= first_new) {
                // Newest vertex stored last, so the reference edge (0, 1) is opposite it.
                assert!(tri[2] >= first_new, "{tri:?}");
                sons += 1;
            }
        }
        assert!(sons >= 4);
    }

    /// Similarity class signature: sorted angles rounded to 1e-9.
    fn shape_classes(m: &Triangulation) -> std::collections::BTreeSet<[i64; 3]> {
        (0..m.num_triangles())
            .map(|t| {
                let [a, b, c] = m.corners(t);
                let mut ang = crate::geometry::triangle_angles(&a, &b, &c);
                ang.sort_by(f64::total_cmp);
                ang.map(|x| (x * 1e9).round() as i64)
            })
            .collect()
    }

    #[test]
    fn similarity_classes_stabilise() {
        for kind in [
            GeometryKind::Cube,
            GeometryKind::Fichera,
            GeometryKind::Star(StarParams::default()),
        ] {
            let mut m = generate_geometry(kind).unwrap();
            let mut history = vec![shape_classes(&m)];
            for _ in 0..5 {
                let all: Vec<usize> = (0..m.num_triangles()).collect();
                m = refine_nvb(&m, &all);
                history.push(shape_classes(&m));
            }
            // After two sweeps no new shapes appear.
            let union_after_two: std::collections::BTreeSet<_> =
                history[..3].iter().flatten().copied().collect();
            for h in &history[3..] {
                assert!(h.is_subset(&union_after_two), "{kind:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn random_marking_keeps_mesh_conforming(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut m = cube();
            for _ in 0..50 {
                let n = m.num_triangles();
                let k = rng.gen_range(1..=3.min(n));
                let marked: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
                let mut distinct = marked.clone();
                distinct.sort_unstable();
                distinct.dedup();
                let r = refine_nvb(&m, &marked);
                prop_assert!(r.validate().is_ok());
                prop_assert!(r.num_triangles() >= n + distinct.len());
                prop_assert!((r.surface_area() - 6.0).abs() < 1e-10);
                m = r;
            }
        }
    }
}
