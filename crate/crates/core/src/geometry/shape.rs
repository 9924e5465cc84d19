//! Bilinear shape functions on the reference square [-1, 1]².

use nalgebra::{Matrix2, Vector2};

/// Reference coordinates of the four corners, counter-clockwise.
pub const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// 2×2 Gauss points, counter-clockwise starting near corner 1. All weights are 1.
pub const GAUSS_2X2: [(f64, f64); 4] = [(-G, -G), (G, -G), (G, G), (-G, G)];

/// Two-point Gauss abscissae on [-1, 1] (unit weights).
pub const GAUSS_2: [f64; 2] = [-G, G];

pub fn values(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, &(xa, ya)) in CORNERS.iter().enumerate() {
        n[a] = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
    }
    n
}

/// Derivatives with respect to (ξ, η), one pair per node.
pub fn reference_gradients(xi: f64, eta: f64) -> [Vector2<f64>; 4] {
    let mut d = [Vector2::zeros(); 4];
    for (a, &(xa, ya)) in CORNERS.iter().enumerate() {
        d[a] = Vector2::new(0.25 * xa * (1.0 + ya * eta), 0.25 * ya * (1.0 + xa * xi));
    }
    d
}

/// Jacobian of the bilinear map defined by `coords`, laid out as
/// `[[∂x/∂ξ, ∂x/∂η], [∂y/∂ξ, ∂y/∂η]]`.
pub fn jacobian(coords: &[Vector2<f64>; 4], xi: f64, eta: f64) -> Matrix2<f64> {
    let d = reference_gradients(xi, eta);
    let mut j = Matrix2::zeros();
    for a in 0..4 {
        j += coords[a] * d[a].transpose();
    }
    j
}

pub fn interpolate(coords: &[Vector2<f64>; 4], xi: f64, eta: f64) -> Vector2<f64> {
    let n = values(xi, eta);
    (0..4).fold(Vector2::zeros(), |acc, a| acc + coords[a] * n[a])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for &(x, y) in &[(0.3, -0.7), (1.0, 1.0), (-0.2, 0.9)] {
            let s: f64 = values(x, y).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            let g = reference_gradients(x, y).iter().fold(Vector2::zeros(), |a, b| a + b);
            assert!(g.norm() < 1e-15);
        }
    }

    #[test]
    fn nodal_interpolation() {
        for (a, &(x, y)) in CORNERS.iter().enumerate() {
            let n = values(x, y);
            for (b, v) in n.iter().enumerate() {
                assert_eq!(*v, if a == b { 1.0 } else { 0.0 });
            }
        }
    }
}
