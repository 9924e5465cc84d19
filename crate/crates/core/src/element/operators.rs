//! Pointwise strain-displacement operators.
//!
//! Degrees of freedom are ordered per node as `(u₁, u₂, w, θ₁, θ₂)`, nodes in
//! element order. Membrane and bending rows use engineering shear:
//! `(ε₁₁, ε₂₂, 2ε₁₂)` and `(κ₁₁, κ₂₂, 2κ₁₂)`.

use nalgebra::SMatrix;

use crate::geometry::{curvature_from_shape, CurvatureField, ElementGeometry, PointShape};
use crate::{Result, Vec3};

pub const DOFS: usize = 20;

pub type MembraneOperator<const C: usize = DOFS> = SMatrix<f64, 3, C>;
pub type ShearOperator<const C: usize = DOFS> = SMatrix<f64, 2, C>;
pub type BendingOperator = SMatrix<f64, 3, DOFS>;

#[derive(Debug, Clone, PartialEq)]
pub struct StrainOperators {
    pub membrane: MembraneOperator,
    pub bending: BendingOperator,
    pub shear: ShearOperator,
}

/// Operators at `(ξ, η)` for a given curvature.
pub fn strain_operators(
    geom: &ElementGeometry,
    curvature: &CurvatureField,
    xi: f64,
    eta: f64,
) -> Result<StrainOperators> {
    let shape = geom.shape_at(xi, eta)?;
    Ok(operators_from_shape(&shape, curvature))
}

pub(crate) fn operators_from_shape(shape: &PointShape, b: &CurvatureField) -> StrainOperators {
    let mut membrane = MembraneOperator::zeros();
    let mut bending = BendingOperator::zeros();
    let mut shear = ShearOperator::zeros();
    let (b11, b12, b22) = (b.b11, b.b12, b.b22);
    for a in 0..4 {
        let n = shape.values[a];
        let (dx, dy) = (shape.gradients[a].x, shape.gradients[a].y);
        let (u1, u2, w, t1, t2) = (5 * a, 5 * a + 1, 5 * a + 2, 5 * a + 3, 5 * a + 4);

        membrane[(0, u1)] = dx;
        membrane[(0, w)] = -b11 * n;
        membrane[(1, u2)] = dy;
        membrane[(1, w)] = -b22 * n;
        membrane[(2, u1)] = dy;
        membrane[(2, u2)] = dx;
        membrane[(2, w)] = -2.0 * b12 * n;

        shear[(0, t1)] = n;
        shear[(0, u1)] = b11 * n;
        shear[(0, u2)] = b12 * n;
        shear[(0, w)] = dx;
        shear[(1, t2)] = n;
        shear[(1, u1)] = b12 * n;
        shear[(1, u2)] = b22 * n;
        shear[(1, w)] = dy;

        // κ₁₁ = θ₁,₁ + b₁₂(b₁₂w − u₂,₁)
        bending[(0, t1)] = dx;
        bending[(0, w)] = b12 * b12 * n;
        bending[(0, u2)] = -b12 * dx;
        // κ₂₂ = θ₂,₂ + b₁₂(b₁₂w − u₁,₂)
        bending[(1, t2)] = dy;
        bending[(1, w)] = b12 * b12 * n;
        bending[(1, u1)] = -b12 * dy;
        // 2κ₁₂ = θ₁,₂ + θ₂,₁ + b₁₁(b₁₂w − u₁,₂) + b₂₂(b₁₂w − u₂,₁)
        bending[(2, t1)] = dy;
        bending[(2, t2)] = dx;
        bending[(2, w)] = (b11 + b22) * b12 * n;
        bending[(2, u1)] = -b11 * dy;
        bending[(2, u2)] = -b22 * dx;
    }
    StrainOperators { membrane, bending, shear }
}

/// Straightened element together with its nodal normals; the curvature at
/// any point comes from the interpolated normal.
#[derive(Debug, Clone, Copy)]
pub struct ElementFields<'a> {
    pub geom: &'a ElementGeometry,
    pub normals: &'a [Vec3; 4],
}

impl ElementFields<'_> {
    pub fn curvature_at(&self, xi: f64, eta: f64) -> Result<CurvatureField> {
        let shape = self.geom.shape_at(xi, eta)?;
        Ok(curvature_from_shape(self.geom, self.normals, &shape))
    }

    /// Unreduced operators at `(ξ, η)`.
    pub fn operators_at(&self, xi: f64, eta: f64) -> Result<StrainOperators> {
        let shape = self.geom.shape_at(xi, eta)?;
        let b = curvature_from_shape(self.geom, self.normals, &shape);
        Ok(operators_from_shape(&shape, &b))
    }
}
