//! Four-node shallow-shell element: stiffness and consistent loads.

mod operators;
mod reduction;

pub use operators::{
    strain_operators, BendingOperator, ElementFields, MembraneOperator, ShearOperator, StrainOperators, DOFS,
};
pub use reduction::{
    project_membrane, project_shear, reduced_membrane_at, reduced_shear_at, Disp4, Mitc4c, Mitc4s,
    ReductionRegistry, StrainReduction, MEMBRANE_EDGE_POINTS, SHEAR_TYING_POINTS,
};

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, SMatrix, SVector};

use crate::geometry::shape::{self, GAUSS_2, GAUSS_2X2};
use crate::geometry::ElementGeometry;
use crate::{Error, Result, Vec3};

pub type ElementMatrix = SMatrix<f64, DOFS, DOFS>;
pub type ElementVector = SVector<f64, DOFS>;

/// Isotropic linear elastic material and shell thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub thickness: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64, thickness: f64) -> Result<Self> {
        if !(young > 0.0) || !(0.0..0.5).contains(&poisson) || !(thickness > 0.0) {
            return Err(Error::invalid(format!(
                "material requires E > 0, 0 <= nu < 0.5, t > 0 (got {young}, {poisson}, {thickness})"
            )));
        }
        Ok(Material { young, poisson, thickness })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    fn plane_stress(&self, scale: f64) -> Matrix3<f64> {
        let nu = self.poisson;
        let c = scale / (1.0 - nu * nu);
        Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * 0.5 * (1.0 - nu))
    }

    /// Membrane stiffness acting on `(ε₁₁, ε₂₂, 2ε₁₂)`.
    pub fn membrane_matrix(&self) -> Matrix3<f64> {
        self.plane_stress(self.young * self.thickness)
    }

    /// Bending stiffness acting on `(κ₁₁, κ₂₂, 2κ₁₂)`.
    pub fn bending_matrix(&self) -> Matrix3<f64> {
        self.plane_stress(self.young * self.thickness.powi(3) / 12.0)
    }
}

/// `G_K = t² / (t² + α h²) · G`.
pub fn stabilized_shear_modulus(material: &Material, h: f64, alpha: f64) -> f64 {
    let t2 = material.thickness * material.thickness;
    t2 / (t2 + alpha * h * h) * material.shear_modulus()
}

/// A strain reduction plus optional shear stabilization.
#[derive(Clone)]
pub struct Formulation {
    pub reduction: Arc<dyn StrainReduction>,
    pub stabilization: Option<f64>,
}

impl fmt::Debug for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Formulation {
    pub fn new(reduction: Arc<dyn StrainReduction>, stabilization: Option<f64>) -> Result<Self> {
        if let Some(alpha) = stabilization {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::invalid(format!("stabilization parameter must be positive, got {alpha}")));
            }
        }
        Ok(Formulation { reduction, stabilization })
    }

    /// Looks the reduction up in the default registry.
    pub fn by_name(name: &str, stabilization: Option<f64>) -> Result<Self> {
        Self::new(ReductionRegistry::default().get(name)?, stabilization)
    }

    pub fn name(&self) -> &str {
        self.reduction.name()
    }

    /// `mitc4c`, or `stab-mitc4c` when stabilized.
    pub fn label(&self) -> String {
        match self.stabilization {
            Some(_) => format!("stab-{}", self.name()),
            None => self.name().to_string(),
        }
    }

    fn shear_modulus(&self, material: &Material, h: f64) -> f64 {
        match self.stabilization {
            Some(alpha) => stabilized_shear_modulus(material, h, alpha),
            None => material.shear_modulus(),
        }
    }
}

/// Gauss-point operators after the formulation's reduction, with the
/// Jacobian determinants.
pub fn gauss_operators(form: &Formulation, element: &ElementFields<'_>) -> Result<([StrainOperators; 4], [f64; 4])> {
    let mut dets = [0.0; 4];
    let mut ops = Vec::with_capacity(4);
    for (g, &(xi, eta)) in GAUSS_2X2.iter().enumerate() {
        let shape = element.geom.shape_at(xi, eta)?;
        dets[g] = shape.det;
        ops.push(element.operators_at(xi, eta)?);
    }
    let mut ops: [StrainOperators; 4] = ops.try_into().expect("four Gauss points");
    form.reduction.reduce(element, &mut ops)?;
    Ok((ops, dets))
}

/// `K_e = Σ_g det J_g (B_mᵀ D_m B_m + B_sᵀ D_s B_s + B_bᵀ D_b B_b)`.
pub fn element_stiffness(form: &Formulation, element: &ElementFields<'_>, material: &Material) -> Result<ElementMatrix> {
    let (ops, dets) = gauss_operators(form, element)?;
    let dm = material.membrane_matrix();
    let db = material.bending_matrix();
    let ds = form.shear_modulus(material, element.geom.size) * material.thickness;
    let mut k = ElementMatrix::zeros();
    for (op, det) in ops.iter().zip(dets) {
        k += op.membrane.transpose() * (dm * det) * op.membrane;
        k += op.bending.transpose() * (db * det) * op.bending;
        k += op.shear.transpose() * op.shear * (ds * det);
    }
    Ok((k + k.transpose()) * 0.5)
}

/// Distributed loads in the element frame: forces `(f₁, f₂, p)` and
/// couples `(τ₁, τ₂)` work-conjugate to `(u₁, u₂, w, θ₁, θ₂)`.
pub type GeneralizedLoad = [f64; 5];

/// Element-frame components of a global force vector.
pub fn frame_load(geom: &ElementGeometry, force: &Vec3) -> GeneralizedLoad {
    let c = geom.frame.components(force);
    [c.x, c.y, c.z, 0.0, 0.0]
}

/// Line load on the edge from corner `edge` to corner `edge + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLoad {
    pub edge: usize,
    pub density: GeneralizedLoad,
}

/// Consistent nodal loads for a uniform surface load per unit area and
/// uniform line loads per unit length along element edges.
pub fn element_load(geom: &ElementGeometry, surface: &GeneralizedLoad, edges: &[EdgeLoad]) -> Result<ElementVector> {
    let mut f = ElementVector::zeros();
    for &(xi, eta) in &GAUSS_2X2 {
        let s = geom.shape_at(xi, eta)?;
        for a in 0..4 {
            for k in 0..5 {
                f[5 * a + k] += s.values[a] * s.det * surface[k];
            }
        }
    }
    for load in edges {
        if load.edge > 3 {
            return Err(Error::invalid(format!("edge index {} out of range", load.edge)));
        }
        let (a, b) = (load.edge, (load.edge + 1) % 4);
        let half = 0.5 * geom.edge_length(a);
        for s in GAUSS_2 {
            let weights = [0.5 * (1.0 - s), 0.5 * (1.0 + s)];
            for (node, w) in [a, b].into_iter().zip(weights) {
                for k in 0..5 {
                    f[5 * node + k] += w * half * load.density[k];
                }
            }
        }
    }
    Ok(f)
}

/// Reference points on corner edges, for callers sampling along an edge.
pub fn edge_point(edge: usize, s: f64) -> (f64, f64) {
    let (x0, y0) = shape::CORNERS[edge];
    let (x1, y1) = shape::CORNERS[(edge + 1) % 4];
    (0.5 * ((1.0 - s) * x0 + (1.0 + s) * x1), 0.5 * ((1.0 - s) * y0 + (1.0 + s) * y1))
}
