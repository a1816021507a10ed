use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::singular::{self, RefSample};
use super::triangle::{triangle_gauss_rule, TriangleRule};
use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::INV_FOUR_PI;

/// How two triangles of one mesh touch.
///
/// For the singular classes, `a` and `b` list local vertex positions of each
/// triangle such that shared vertices come first, in ascending global index
/// order, followed by the remaining vertices in stored order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Disjoint,
    CommonVertex { a: [usize; 3], b: [usize; 3] },
    CommonEdge { a: [usize; 3], b: [usize; 3] },
    Identical { a: [usize; 3], b: [usize; 3] },
}

impl PairClass {
    /// Number of shared vertices.
    pub fn shared(&self) -> usize {
        match self {
            PairClass::Disjoint => 0,
            PairClass::CommonVertex { .. } => 1,
            PairClass::CommonEdge { .. } => 2,
            PairClass::Identical { .. } => 3,
        }
    }

    /// The same classification with the roles of the triangles exchanged.
    pub fn swapped(&self) -> PairClass {
        match *self {
            PairClass::Disjoint => PairClass::Disjoint,
            PairClass::CommonVertex { a, b } => PairClass::CommonVertex { a: b, b: a },
            PairClass::CommonEdge { a, b } => PairClass::CommonEdge { a: b, b: a },
            PairClass::Identical { a, b } => PairClass::Identical { a: b, b: a },
        }
    }
}

pub fn classify_pair(tri_a: [usize; 3], tri_b: [usize; 3]) -> PairClass {
    let mut shared: Vec<usize> = tri_a.iter().copied().filter(|v| tri_b.contains(v)).collect();
    shared.sort_unstable();
    let order = |tri: [usize; 3]| -> [usize; 3] {
        let mut perm = [0usize; 3];
        let mut k = 0;
        for s in &shared {
            perm[k] = tri.iter().position(|v| v == s).unwrap();
            k += 1;
        }
        for (i, v) in tri.iter().enumerate() {
            if !shared.contains(v) {
                perm[k] = i;
                k += 1;
            }
        }
        perm
    };
    match shared.len() {
        0 => PairClass::Disjoint,
        1 => PairClass::CommonVertex {
            a: order(tri_a),
            b: order(tri_b),
        },
        2 => PairClass::CommonEdge {
            a: order(tri_a),
            b: order(tri_b),
        },
        _ => PairClass::Identical {
            a: order(tri_a),
            b: order(tri_b),
        },
    }
}

/// Ratio of a lower bound on the distance between two triangles (gap between
/// centroid-centred bounding balls) to the larger diameter.
pub fn separation_ratio(a: &[Point3; 3], b: &[Point3; 3]) -> f64 {
    let ca = geometry::centroid(&a[0], &a[1], &a[2]);
    let cb = geometry::centroid(&b[0], &b[1], &b[2]);
    let gap = (ca - cb).norm()
        - geometry::bounding_radius(&a[0], &a[1], &a[2])
        - geometry::bounding_radius(&b[0], &b[1], &b[2]);
    let diam = geometry::triangle_diameter(&a[0], &a[1], &a[2])
        .max(geometry::triangle_diameter(&b[0], &b[1], &b[2]));
    gap.max(0.0) / diam
}

/// Triangle-rule degree for a disjoint pair with the given separation ratio.
pub fn far_field_degree(ratio: f64) -> usize {
    if ratio > 4.0 {
        3
    } else {
        6
    }
}

/// One sample of a pair rule: barycentric coordinates on each triangle (in
/// reference vertex order) and a weight. Weights of a rule sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRule {
    pub samples: Vec<PairSample>,
}

impl PairRule {
    fn from_reference(samples: Vec<RefSample>) -> Self {
        let bary = |x: [f64; 2]| [1.0 - x[0], x[0] - x[1], x[1]];
        PairRule {
            samples: samples
                .into_iter()
                .map(|(x, y, w)| PairSample {
                    a: bary(x),
                    b: bary(y),
                    // τ × τ has measure 1/4.
                    w: 4.0 * w,
                })
                .collect(),
        }
    }

    fn tensor(rule: &TriangleRule) -> Self {
        let mut samples = Vec::with_capacity(rule.len() * rule.len());
        for i in 0..rule.len() {
            for j in 0..rule.len() {
                samples.push(PairSample {
                    a: rule.barycentric(i),
                    b: rule.barycentric(j),
                    w: rule.weights[i] * rule.weights[j],
                });
            }
        }
        PairRule { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Pair rules for one singular order, built once and shared.
#[derive(Debug)]
pub struct PairQuadrature {
    order: usize,
    identical: PairRule,
    edge: PairRule,
    vertex: PairRule,
    near: TriangleRule,
    far: TriangleRule,
    near_tensor: PairRule,
    far_tensor: PairRule,
}

impl PairQuadrature {
    /// Rules with `order` Gauss points per dimension for singular pairs and
    /// the default degree 6 / degree 3 tensor rules for disjoint pairs.
    pub fn new(order: usize) -> Result<Self> {
        Self::with_far_field(order, 6, 3)
    }

    /// Rules with explicit triangle-rule degrees for near (`ratio <= 4`) and
    /// far disjoint pairs.
    pub fn with_far_field(order: usize, near_degree: usize, far_degree: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        let near = triangle_gauss_rule(near_degree)?;
        let far = triangle_gauss_rule(far_degree)?;
        Ok(Self {
            order,
            identical: PairRule::from_reference(singular::identical(order)),
            edge: PairRule::from_reference(singular::common_edge(order)),
            vertex: PairRule::from_reference(singular::common_vertex(order)),
            near_tensor: PairRule::tensor(&near),
            far_tensor: PairRule::tensor(&far),
            near,
            far,
        })
    }

    /// Shared default-configured rules for `order`.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PairQuadrature>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(q) = guard.get(&order) {
            return Ok(q.clone());
        }
        let q = Arc::new(Self::new(order)?);
        guard.insert(order, q.clone());
        Ok(q)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn near_rule(&self) -> &TriangleRule {
        &self.near
    }

    pub fn far_rule(&self) -> &TriangleRule {
        &self.far
    }

    /// Rule used for a pair of the given class; disjoint pairs pick the
    /// tensor rule from the separation ratio.
    pub fn rule(&self, class: &PairClass, ratio: f64) -> &PairRule {
        match class {
            PairClass::Disjoint => {
                if far_field_degree(ratio) == 3 {
                    &self.far_tensor
                } else {
                    &self.near_tensor
                }
            }
            PairClass::CommonVertex { .. } => &self.vertex,
            PairClass::CommonEdge { .. } => &self.edge,
            PairClass::Identical { .. } => &self.identical,
        }
    }

    /// Visits every sample of the pair rule with barycentric coordinates in
    /// the triangles' own vertex order and the weight `|A| |B| w G(x, y)`.
    pub fn for_each_sample(
        &self,
        a: &[Point3; 3],
        b: &[Point3; 3],
        class: &PairClass,
        mut visit: impl FnMut(&[f64; 3], &[f64; 3], f64),
    ) {
        let (perm_a, perm_b) = permutations(class);
        let pa = perm_a.map(|k| a[k]);
        let pb = perm_b.map(|k| b[k]);
        let scale = INV_FOUR_PI
            * geometry::triangle_area(&a[0], &a[1], &a[2])
            * geometry::triangle_area(&b[0], &b[1], &b[2]);
        let ratio = if matches!(class, PairClass::Disjoint) {
            separation_ratio(a, b)
        } else {
            0.0
        };
        let mut la = [0.0; 3];
        let mut lb = [0.0; 3];
        for s in &self.rule(class, ratio).samples {
            let x = pa[0] * s.a[0] + pa[1] * s.a[1] + pa[2] * s.a[2];
            let y = pb[0] * s.b[0] + pb[1] * s.b[1] + pb[2] * s.b[2];
            for k in 0..3 {
                la[perm_a[k]] = s.a[k];
                lb[perm_b[k]] = s.b[k];
            }
            visit(&la, &lb, scale * s.w / (x - y).norm());
        }
    }

    /// `(1/4π) ∫_A ∫_B |x - y|^-1 dy dx` for piecewise-constant densities.
    pub fn p0(&self, a: &[Point3; 3], b: &[Point3; 3], class: &PairClass) -> f64 {
        let (perm_a, perm_b) = permutations(class);
        let pa = perm_a.map(|k| a[k]);
        let pb = perm_b.map(|k| b[k]);
        let ratio = if matches!(class, PairClass::Disjoint) {
            separation_ratio(a, b)
        } else {
            0.0
        };
        let mut sum = 0.0;
        for s in &self.rule(class, ratio).samples {
            let x = pa[0] * s.a[0] + pa[1] * s.a[1] + pa[2] * s.a[2];
            let y = pb[0] * s.b[0] + pb[1] * s.b[1] + pb[2] * s.b[2];
            sum += s.w / (x - y).norm();
        }
        INV_FOUR_PI
            * geometry::triangle_area(&a[0], &a[1], &a[2])
            * geometry::triangle_area(&b[0], &b[1], &b[2])
            * sum
    }
}

fn permutations(class: &PairClass) -> ([usize; 3], [usize; 3]) {
    match *class {
        PairClass::Disjoint => ([0, 1, 2], [0, 1, 2]),
        PairClass::CommonVertex { a, b }
        | PairClass::CommonEdge { a, b }
        | PairClass::Identical { a, b } => (a, b),
    }
}

/// `(1/4π) ∫_A ∫_B |x - y|^-1 dy dx` with the cached rules of `order`.
pub fn pair_integral(
    tri_a: &[Point3; 3],
    tri_b: &[Point3; 3],
    class: &PairClass,
    order: usize,
) -> Result<f64> {
    for (index, t) in [tri_a, tri_b].into_iter().enumerate() {
        let area = geometry::triangle_area(&t[0], &t[1], &t[2]);
        let d = geometry::triangle_diameter(&t[0], &t[1], &t[2]);
        if !(area > 1e-14 * d * d) {
            return Err(Error::DegenerateTriangle { index, area });
        }
    }
    Ok(PairQuadrature::cached(order)?.p0(tri_a, tri_b, class))
}
