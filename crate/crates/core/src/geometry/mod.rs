//! Per-element geometric pre-processing.
//!
//! A (possibly warped) surface quadrilateral is replaced by a plane element
//! `K` in a local Cartesian frame. The middle-surface curvature enters only
//! through the coefficients `b_αβ ≈ -i_α · ∂n_h/∂x_β` of the bilinearly
//! interpolated nodal normal `n_h`.

pub mod shape;

use nalgebra::{Matrix2, Matrix5, Vector2};

use crate::{Error, Result, Vec3};

/// Origin plus an orthonormal right-handed triad `i₁, i₂, i₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec3,
    pub axes: [Vec3; 3],
}

impl LocalFrame {
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.axes[0]), d.dot(&self.axes[1]), d.dot(&self.axes[2]))
    }

    pub fn to_global(&self, local: &Vec3) -> Vec3 {
        self.origin + self.axes[0] * local.x + self.axes[1] * local.y + self.axes[2] * local.z
    }

    /// Components of a free vector along the frame axes.
    pub fn components(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.dot(&self.axes[0]), v.dot(&self.axes[1]), v.dot(&self.axes[2]))
    }
}

/// Straightened plane element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub frame: LocalFrame,
    /// Corner coordinates in the element plane, counter-clockwise about `i₃`.
    pub planar: [Vector2<f64>; 4],
    /// Warp: the corners sit at `+d, -d, +d, -d` along `i₃`.
    pub warp: f64,
    /// Element diameter (longest diagonal).
    pub size: f64,
    /// Jacobian at the element midpoint, `J̄ = J(0, 0)`.
    pub center_jacobian: Matrix2<f64>,
}

/// Shape function data at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct PointShape {
    pub values: [f64; 4],
    /// `(∂N/∂x, ∂N/∂y)` per node.
    pub gradients: [Vector2<f64>; 4],
    pub jacobian: Matrix2<f64>,
    pub det: f64,
}

impl ElementGeometry {
    pub fn jacobian(&self, xi: f64, eta: f64) -> Matrix2<f64> {
        shape::jacobian(&self.planar, xi, eta)
    }

    /// Shape values, physical gradients and Jacobian at `(ξ, η)`.
    pub fn shape_at(&self, xi: f64, eta: f64) -> Result<PointShape> {
        let jacobian = self.jacobian(xi, eta);
        let det = jacobian.determinant();
        if det <= 0.0 {
            return Err(Error::geometry(format!(
                "non-positive Jacobian determinant {det:e} at ({xi}, {eta})"
            )));
        }
        let inv_t = jacobian
            .try_inverse()
            .ok_or_else(|| Error::geometry("singular Jacobian"))?
            .transpose();
        let reference = shape::reference_gradients(xi, eta);
        let mut gradients = [Vector2::zeros(); 4];
        for a in 0..4 {
            gradients[a] = inv_t * reference[a];
        }
        Ok(PointShape { values: shape::values(xi, eta), gradients, jacobian, det })
    }

    /// Original (warped) corner positions.
    pub fn corner_positions(&self) -> [Vec3; 4] {
        let sign = [1.0, -1.0, 1.0, -1.0];
        std::array::from_fn(|a| {
            self.frame.to_global(&Vec3::new(self.planar[a].x, self.planar[a].y, sign[a] * self.warp))
        })
    }

    /// Determinants of the Jacobian at the four corners; all positive iff
    /// the plane element is strictly convex.
    pub fn corner_jacobian_dets(&self) -> [f64; 4] {
        std::array::from_fn(|a| {
            let (x, y) = shape::CORNERS[a];
            self.jacobian(x, y).determinant()
        })
    }

    pub fn area(&self) -> f64 {
        shape::GAUSS_2X2.iter().map(|&(x, y)| self.jacobian(x, y).determinant()).sum()
    }

    /// Planar length of the edge from corner `a` to corner `a + 1`.
    pub fn edge_length(&self, a: usize) -> f64 {
        (self.planar[(a + 1) % 4] - self.planar[a]).norm()
    }
}

/// Replaces four surface points by a plane quadrilateral.
///
/// The plane passes through the centroid with normal along the cross product
/// of the diagonals, so both diagonals are parallel to it and the four
/// out-of-plane offsets are `+d, -d, +d, -d`. `i₁` is the projection of the
/// first edge onto the plane.
pub fn straighten_element(positions: &[Vec3; 4]) -> Result<ElementGeometry> {
    let [p1, p2, p3, p4] = positions;
    let centroid = (p1 + p2 + p3 + p4) / 4.0;
    let d13 = p3 - p1;
    let d24 = p4 - p2;
    let cross = d13.cross(&d24);
    let scale = d13.norm() * d24.norm();
    if !(cross.norm() > 1e-12 * scale) || scale == 0.0 {
        return Err(Error::geometry("degenerate quadrilateral: diagonals are parallel"));
    }
    let i3 = cross.normalize();
    let edge = p2 - p1;
    let in_plane = edge - i3 * edge.dot(&i3);
    if !(in_plane.norm() > 1e-12 * edge.norm().max(f64::MIN_POSITIVE)) {
        return Err(Error::geometry("degenerate quadrilateral: first edge is normal to the plane"));
    }
    let i1 = in_plane.normalize();
    let i2 = i3.cross(&i1);
    let frame = LocalFrame { origin: centroid, axes: [i1, i2, i3] };

    let planar: [Vector2<f64>; 4] = std::array::from_fn(|a| {
        let l = frame.to_local(&positions[a]);
        Vector2::new(l.x, l.y)
    });
    let warp = frame.to_local(p1).z;
    let size = d13.norm().max(d24.norm());
    let center_jacobian = shape::jacobian(&planar, 0.0, 0.0);
    let geom = ElementGeometry { frame, planar, warp, size, center_jacobian };

    for &(x, y) in &shape::GAUSS_2X2 {
        let det = geom.jacobian(x, y).determinant();
        if det <= 0.0 {
            return Err(Error::geometry(format!(
                "non-positive Jacobian determinant {det:e} at a Gauss point"
            )));
        }
    }
    Ok(geom)
}

/// Symmetric curvature coefficients `b₁₁, b₁₂, b₂₂` in the element frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureField {
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
}

impl CurvatureField {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.b11, self.b12, self.b12, self.b22)
    }
}

/// `b_αβ ≈ -i_α · n_h,β` with `n_h` the bilinear interpolant of the nodal
/// normals, evaluated at `(ξ, η)` and symmetrized.
pub fn curvature_coefficients(
    geom: &ElementGeometry,
    normals: &[Vec3; 4],
    xi: f64,
    eta: f64,
) -> Result<CurvatureField> {
    let shape = geom.shape_at(xi, eta)?;
    Ok(curvature_from_shape(geom, normals, &shape))
}

pub(crate) fn curvature_from_shape(
    geom: &ElementGeometry,
    normals: &[Vec3; 4],
    shape: &PointShape,
) -> CurvatureField {
    let mut dn_dx = Vec3::zeros();
    let mut dn_dy = Vec3::zeros();
    for a in 0..4 {
        dn_dx += normals[a] * shape.gradients[a].x;
        dn_dy += normals[a] * shape.gradients[a].y;
    }
    let [i1, i2, _] = geom.frame.axes;
    let b11 = -i1.dot(&dn_dx);
    let b12 = -i1.dot(&dn_dy);
    let b21 = -i2.dot(&dn_dx);
    let b22 = -i2.dot(&dn_dy);
    CurvatureField { b11, b12: 0.5 * (b12 + b21), b22 }
}

/// Orthonormal tangent pair `g₁, g₂` and unit normal `n` at a node, with
/// `g₁ × g₂ = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalFrame {
    pub g1: Vec3,
    pub g2: Vec3,
    pub n: Vec3,
}

impl NodalFrame {
    /// Frame whose `g₁` is the tangential projection of `hint`.
    pub fn with_tangent(normal: &Vec3, hint: &Vec3) -> Result<Self> {
        let n = normal.normalize();
        let t = hint - n * hint.dot(&n);
        if !(t.norm() > 1e-10 * hint.norm()) {
            return Err(Error::geometry("tangent hint is parallel to the normal"));
        }
        let g1 = t.normalize();
        let g2 = n.cross(&g1);
        Ok(NodalFrame { g1, g2, n })
    }

    /// Default frame: `g₁` from the global x axis, or the y axis when the
    /// normal is close to x.
    pub fn from_normal(normal: &Vec3) -> Self {
        let n = normal.normalize();
        let hint = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        Self::with_tangent(&n, &hint).expect("hint chosen away from the normal")
    }

    /// Rotates the tangent pair by `angle` about the normal.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        NodalFrame { g1: self.g1 * c + self.g2 * s, g2: self.g2 * c - self.g1 * s, n: self.n }
    }

    /// Physical vector from tangential components.
    pub fn tangent_vector(&self, c1: f64, c2: f64) -> Vec3 {
        self.g1 * c1 + self.g2 * c2
    }
}

/// Map from nodal dofs `(ũ₁, ũ₂, w̃, θ̃₁, θ̃₂)` in the `g` frame to element dofs
/// `(u₁, u₂, w, θ₁, θ₂)` in the element frame: `u_α = ũ_λ g_λ · i_α`,
/// `w = w̃`, `θ_α = θ̃_λ g_λ · i_α`.
pub fn nodal_dof_transform(frame: &LocalFrame, nodal: &NodalFrame) -> Matrix5<f64> {
    let g = [nodal.g1, nodal.g2];
    let mut t = Matrix5::zeros();
    for alpha in 0..2 {
        for lambda in 0..2 {
            let c = g[lambda].dot(&frame.axes[alpha]);
            t[(alpha, lambda)] = c;
            t[(3 + alpha, 3 + lambda)] = c;
        }
    }
    t[(2, 2)] = 1.0;
    t
}
