//! Regularising coordinate transforms for weakly singular pair integrals.
//!
//! Both triangles are parametrised over `τ = {0 <= x2 <= x1 <= 1}` by
//! `χ(x) = P0 + x1 (P1 - P0) + x2 (P2 - P1)`, so that a shared vertex sits at
//! `(0,0)` and a shared edge is `x2 = 0` in both parametrisations. Each
//! function returns samples `(x, y, w)` for `∫_τ ∫_τ F(x, y) dy dx ≈ Σ w F`.

use super::gauss::gauss_legendre;

pub(crate) type RefSample = ([f64; 2], [f64; 2], f64);

fn tensor4(order: usize, mut visit: impl FnMut([f64; 4], f64)) {
    let (x, w) = gauss_legendre(order);
    for (a, wa) in x.iter().zip(&w) {
        for (b, wb) in x.iter().zip(&w) {
            for (c, wc) in x.iter().zip(&w) {
                for (d, wd) in x.iter().zip(&w) {
                    visit([*a, *b, *c, *d], wa * wb * wc * wd);
                }
            }
        }
    }
}

pub(crate) fn identical(order: usize) -> Vec<RefSample> {
    let mut out = Vec::with_capacity(6 * order.pow(4));
    tensor4(order, |[xi, e1, e2, e3], w| {
        let jac = w * xi.powi(3) * e1 * e1 * e2;
        let pairs = [
            (
                [xi, xi * (1.0 - e1 + e1 * e2)],
                [xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1)],
            ),
            (
                [xi, xi * e1 * (1.0 - e2 + e2 * e3)],
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
            ),
            (
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                [xi, xi * e1 * (1.0 - e2)],
            ),
        ];
        for (x, y) in pairs {
            out.push((x, y, jac));
            out.push((y, x, jac));
        }
    });
    out
}

pub(crate) fn common_edge(order: usize) -> Vec<RefSample> {
    let mut out = Vec::with_capacity(10 * order.pow(4));
    tensor4(order, |[xi, e1, e2, e3], w| {
        // Halved: every sample is also used with x and y exchanged.
        let base = 0.5 * w * xi.powi(3) * e1 * e1;
        let jac = base * e2;
        let parts = [
            (
                [xi, xi * e1 * e3],
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                base,
            ),
            (
                [xi, xi * e1],
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                jac,
            ),
            (
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                [xi, xi * e1 * e2 * e3],
                jac,
            ),
            (
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                [xi, xi * e1],
                jac,
            ),
            (
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                [xi, xi * e1 * e2],
                jac,
            ),
        ];
        for (x, y, w) in parts {
            out.push((x, y, w));
            out.push((y, x, w));
        }
    });
    out
}

pub(crate) fn common_vertex(order: usize) -> Vec<RefSample> {
    let mut out = Vec::with_capacity(2 * order.pow(4));
    tensor4(order, |[xi, e1, e2, e3], w| {
        let jac = w * xi.powi(3) * e2;
        let x = [xi, xi * e1];
        let y = [xi * e2, xi * e2 * e3];
        out.push((x, y, jac));
        out.push((y, x, jac));
    });
    out
}
