//! Small helpers for flat triangles in 3D.

use nalgebra::Vector3;

pub type Point3 = Vector3<f64>;

/// Area of the triangle spanned by three points.
pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Unnormalised normal `(b - a) × (c - a)`, of length twice the area.
pub fn area_normal(a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    (b - a).cross(&(c - a))
}

/// Longest edge length.
pub fn triangle_diameter(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    (b - a).norm().max((c - b).norm()).max((a - c).norm())
}

pub fn centroid(a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    (a + b + c) / 3.0
}

/// Interior angles at `a`, `b`, `c`.
pub fn triangle_angles(a: &Point3, b: &Point3, c: &Point3) -> [f64; 3] {
    let angle = |p: &Point3, q: &Point3, r: &Point3| {
        let u = q - p;
        let v = r - p;
        u.cross(&v).norm().atan2(u.dot(&v))
    };
    [angle(a, b, c), angle(b, c, a), angle(c, a, b)]
}

/// Radius of the smallest centroid-centred ball containing the triangle.
pub fn bounding_radius(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let m = centroid(a, b, c);
    (a - m).norm().max((b - m).norm()).max((c - m).norm())
}

/// Surface gradients of the three barycentric coordinates of a flat triangle.
pub fn barycentric_gradients(a: &Point3, b: &Point3, c: &Point3) -> [Point3; 3] {
    let n = area_normal(a, b, c);
    let n2 = n.norm_squared();
    // grad λ_a = n × (c - b) / |n|^2, cyclically.
    [
        n.cross(&(c - b)) / n2,
        n.cross(&(a - c)) / n2,
        n.cross(&(b - a)) / n2,
    ]
}
