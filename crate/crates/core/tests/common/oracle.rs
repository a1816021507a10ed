//! Brute-force reference for the single-layer pair integral: uniform
//! subdivision of both triangles, two distinct symmetric point rules (so no
//! sample pair ever coincides) and Richardson extrapolation in h = 2^-k.

use capbem::geometry::Point3;
use capbem::INV_FOUR_PI;

const RULE_A: [([f64; 3], f64); 6] = {
    let (a, wa) = (0.445948490915965, 0.223381589678011);
    let (b, wb) = (0.091576213509771, 0.109951743655322);
    [
        ([a, a, 1.0 - 2.0 * a], wa),
        ([a, 1.0 - 2.0 * a, a], wa),
        ([1.0 - 2.0 * a, a, a], wa),
        ([b, b, 1.0 - 2.0 * b], wb),
        ([b, 1.0 - 2.0 * b, b], wb),
        ([1.0 - 2.0 * b, b, b], wb),
    ]
};

const RULE_B: [([f64; 3], f64); 7] = {
    let c = 1.0 / 3.0;
    let (a1, b1, w1) = (0.059715871789770, 0.470142064105115, 0.132394152788506);
    let (a2, b2, w2) = (0.797426985353087, 0.101286507323456, 0.125939180544827);
    [
        ([c, c, c], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
};

fn subdivide(t: [Point3; 3], levels: usize) -> Vec<[Point3; 3]> {
    let mut tris = vec![t];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(4 * tris.len());
        for [a, b, c] in tris {
            let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
        }
        tris = next;
    }
    tris
}

fn cloud(t: [Point3; 3], levels: usize, rule: &[([f64; 3], f64)]) -> Vec<(Point3, f64)> {
    let mut out = Vec::new();
    for s in subdivide(t, levels) {
        let area = 0.5 * (s[1] - s[0]).cross(&(s[2] - s[0])).norm();
        for (l, w) in rule {
            out.push((s[0] * l[0] + s[1] * l[1] + s[2] * l[2], w * area));
        }
    }
    out
}

/// Sample sum at subdivision level `k`.
pub fn level_sum(a: [Point3; 3], b: [Point3; 3], k: usize) -> f64 {
    let xs = cloud(a, k, &RULE_A);
    let ys = cloud(b, k, &RULE_B);
    let mut total = 0.0;
    for (x, wx) in &xs {
        let mut row = 0.0;
        for (y, wy) in &ys {
            row += wy / (x - y).norm();
        }
        total += wx * row;
    }
    INV_FOUR_PI * total
}

/// Richardson table over levels `first..=last`; returns the most extrapolated
/// value and the difference to the previous diagonal entry.
pub fn extrapolate(a: [Point3; 3], b: [Point3; 3], first: usize, last: usize) -> (f64, f64) {
    let mut table: Vec<Vec<f64>> = Vec::new();
    for k in first..=last {
        let mut row = vec![level_sum(a, b, k)];
        if let Some(prev) = table.last() {
            for j in 1..=prev.len() {
                let f = 2f64.powi(j as i32);
                row.push((f * row[j - 1] - prev[j - 1]) / (f - 1.0));
            }
        }
        table.push(row);
    }
    let n = table.len();
    let best = *table[n - 1].last().unwrap();
    let prev = *table[n - 2].last().unwrap();
    (best, (best - prev).abs())
}

pub fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

/// Unit-scale fixtures for the four pair classes, as (name, vertex ids, corners).
pub fn fixtures() -> Vec<(&'static str, [usize; 3], [usize; 3], [Point3; 3], [Point3; 3])> {
    let a = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.3, 0.9, 0.0)];
    vec![
        ("identical", [0, 1, 2], [0, 1, 2], a, a),
        ("common edge", [0, 1, 2], [1, 0, 3], a, [a[1], a[0], p(0.5, -0.2, 0.8)]),
        ("common vertex", [0, 1, 2], [0, 3, 4], a, [a[0], p(-0.7, 0.2, 0.3), p(-0.2, -0.9, 0.4)]),
        ("disjoint", [0, 1, 2], [3, 4, 5], a, [p(0.2, 0.1, 1.0), p(1.1, 0.2, 1.1), p(0.4, 0.8, 1.4)]),
    ]
}
