//! Covariant strain reductions and the registry of reduction strategies.
//!
//! Transverse shear is projected onto the edge-element space
//! `ŝ = (a + bη, c + dξ)` of covariant components `ŝ = Jᵀγ`; membrane strains
//! onto `τ̂ = [[a + bη, c], [c, d + eξ]]` with `τ̂ = J̄ᵀεJ̄` and `J̄ = J(0, 0)`.
//! Both projections act on operator columns, so they are written for any
//! column count `C`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, SMatrix};

use super::operators::{ElementFields, StrainOperators};
use crate::geometry::shape::{GAUSS_2, GAUSS_2X2};
use crate::geometry::ElementGeometry;
use crate::{Error, Result};

/// Shear tying points: midpoints of the bottom, right, top and left edges.
pub const SHEAR_TYING_POINTS: [(f64, f64); 4] = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];

/// Two Gauss points on each of the bottom, right, top and left edges.
pub const MEMBRANE_EDGE_POINTS: [[(f64, f64); 2]; 4] = [
    [(GAUSS_2[0], -1.0), (GAUSS_2[1], -1.0)],
    [(1.0, GAUSS_2[0]), (1.0, GAUSS_2[1])],
    [(GAUSS_2[0], 1.0), (GAUSS_2[1], 1.0)],
    [(-1.0, GAUSS_2[0]), (-1.0, GAUSS_2[1])],
];

/// Reduced shear at `(ξ, η)` from physical shear rows sampled at
/// [`SHEAR_TYING_POINTS`].
pub fn reduced_shear_at<const C: usize>(
    geom: &ElementGeometry,
    tying: &[SMatrix<f64, 2, C>; 4],
    xi: f64,
    eta: f64,
) -> SMatrix<f64, 2, C> {
    let covariant: [SMatrix<f64, 2, C>; 4] = std::array::from_fn(|k| {
        let (x, y) = SHEAR_TYING_POINTS[k];
        geom.jacobian(x, y).transpose() * tying[k]
    });
    let s1 = covariant[0].row(0) * (0.5 * (1.0 - eta)) + covariant[2].row(0) * (0.5 * (1.0 + eta));
    let s2 = covariant[3].row(1) * (0.5 * (1.0 - xi)) + covariant[1].row(1) * (0.5 * (1.0 + xi));
    let inv_t = inverse_transpose(&geom.jacobian(xi, eta));
    let mut out = SMatrix::<f64, 2, C>::zeros();
    for c in 0..C {
        out[(0, c)] = inv_t[(0, 0)] * s1[c] + inv_t[(0, 1)] * s2[c];
        out[(1, c)] = inv_t[(1, 0)] * s1[c] + inv_t[(1, 1)] * s2[c];
    }
    out
}

/// Reduced shear at the 2×2 Gauss points.
pub fn project_shear<const C: usize>(
    geom: &ElementGeometry,
    tying: &[SMatrix<f64, 2, C>; 4],
) -> [SMatrix<f64, 2, C>; 4] {
    std::array::from_fn(|g| {
        let (xi, eta) = GAUSS_2X2[g];
        reduced_shear_at(geom, tying, xi, eta)
    })
}

/// Linear map from `(ε₁₁, ε₂₂, 2ε₁₂)` to `(τ̂₁₁, τ̂₂₂, τ̂₁₂)` with `τ̂ = J̄ᵀεJ̄`.
fn covariant_membrane_map(jbar: &Matrix2<f64>) -> Matrix3<f64> {
    let a = jbar.column(0);
    let c = jbar.column(1);
    Matrix3::new(
        a[0] * a[0],
        a[1] * a[1],
        a[0] * a[1],
        c[0] * c[0],
        c[1] * c[1],
        c[0] * c[1],
        a[0] * c[0],
        a[1] * c[1],
        0.5 * (a[0] * c[1] + a[1] * c[0]),
    )
}

/// Reduced membrane strains at `(ξ, η)` from physical membrane rows sampled
/// at [`MEMBRANE_EDGE_POINTS`] and at the 2×2 Gauss points.
pub fn reduced_membrane_at<const C: usize>(
    geom: &ElementGeometry,
    edge: &[[SMatrix<f64, 3, C>; 2]; 4],
    area: &[SMatrix<f64, 3, C>; 4],
    xi: f64,
    eta: f64,
) -> SMatrix<f64, 3, C> {
    let to_ref = covariant_membrane_map(&geom.center_jacobian);
    let from_ref = to_ref.try_inverse().expect("midpoint Jacobian of a valid element is invertible");
    let edge_mean = |side: usize, row: usize| (to_ref * (edge[side][0] + edge[side][1])).row(row) * 0.5;
    let t11 = edge_mean(0, 0) * (0.5 * (1.0 - eta)) + edge_mean(2, 0) * (0.5 * (1.0 + eta));
    let t22 = edge_mean(3, 1) * (0.5 * (1.0 - xi)) + edge_mean(1, 1) * (0.5 * (1.0 + xi));
    let t12 = (to_ref * (area[0] + area[1] + area[2] + area[3])).row(2) * 0.25;
    let mut reference = SMatrix::<f64, 3, C>::zeros();
    reference.set_row(0, &t11);
    reference.set_row(1, &t22);
    reference.set_row(2, &t12);
    from_ref * reference
}

/// Reduced membrane strains at the 2×2 Gauss points.
pub fn project_membrane<const C: usize>(
    geom: &ElementGeometry,
    edge: &[[SMatrix<f64, 3, C>; 2]; 4],
    area: &[SMatrix<f64, 3, C>; 4],
) -> [SMatrix<f64, 3, C>; 4] {
    std::array::from_fn(|g| {
        let (xi, eta) = GAUSS_2X2[g];
        reduced_membrane_at(geom, edge, area, xi, eta)
    })
}

fn inverse_transpose(j: &Matrix2<f64>) -> Matrix2<f64> {
    let det = j.determinant();
    Matrix2::new(j[(1, 1)], -j[(1, 0)], -j[(0, 1)], j[(0, 0)]) / det
}

/// A strain reduction strategy: rewrites the Gauss-point operators of one
/// element in place.
pub trait StrainReduction: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn reduce(&self, element: &ElementFields<'_>, gauss: &mut [StrainOperators; 4]) -> Result<()>;
}

/// Standard displacement method: operators are left as they are.
#[derive(Debug, Clone, Copy, Default)]
pub struct Disp4;

/// Covariant projection of the transverse shear strains.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mitc4c;

/// Covariant projection of the transverse shear and membrane strains.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mitc4s;

impl StrainReduction for Disp4 {
    fn name(&self) -> &str {
        "disp4"
    }

    fn reduce(&self, _: &ElementFields<'_>, _: &mut [StrainOperators; 4]) -> Result<()> {
        Ok(())
    }
}

fn reduce_shear(element: &ElementFields<'_>, gauss: &mut [StrainOperators; 4]) -> Result<()> {
    let mut tying = [SMatrix::<f64, 2, 20>::zeros(); 4];
    for (k, &(x, y)) in SHEAR_TYING_POINTS.iter().enumerate() {
        tying[k] = element.operators_at(x, y)?.shear;
    }
    for (g, reduced) in project_shear(element.geom, &tying).into_iter().enumerate() {
        gauss[g].shear = reduced;
    }
    Ok(())
}

impl StrainReduction for Mitc4c {
    fn name(&self) -> &str {
        "mitc4c"
    }

    fn reduce(&self, element: &ElementFields<'_>, gauss: &mut [StrainOperators; 4]) -> Result<()> {
        reduce_shear(element, gauss)
    }
}

impl StrainReduction for Mitc4s {
    fn name(&self) -> &str {
        "mitc4s"
    }

    fn reduce(&self, element: &ElementFields<'_>, gauss: &mut [StrainOperators; 4]) -> Result<()> {
        reduce_shear(element, gauss)?;
        let mut edge = [[SMatrix::<f64, 3, 20>::zeros(); 2]; 4];
        for (side, points) in MEMBRANE_EDGE_POINTS.iter().enumerate() {
            for (k, &(x, y)) in points.iter().enumerate() {
                edge[side][k] = element.operators_at(x, y)?.membrane;
            }
        }
        let area: [SMatrix<f64, 3, 20>; 4] = std::array::from_fn(|g| gauss[g].membrane);
        for (g, reduced) in project_membrane(element.geom, &edge, &area).into_iter().enumerate() {
            gauss[g].membrane = reduced;
        }
        Ok(())
    }
}

/// Reduction strategies selectable by name.
#[derive(Debug, Clone)]
pub struct ReductionRegistry {
    entries: BTreeMap<String, Arc<dyn StrainReduction>>,
}

impl Default for ReductionRegistry {
    /// Registry holding `disp4`, `mitc4c` and `mitc4s`.
    fn default() -> Self {
        let mut registry = ReductionRegistry::empty();
        registry.register(Arc::new(Disp4));
        registry.register(Arc::new(Mitc4c));
        registry.register(Arc::new(Mitc4s));
        registry
    }
}

impl ReductionRegistry {
    pub fn empty() -> Self {
        ReductionRegistry { entries: BTreeMap::new() }
    }

    /// Adds a strategy under its own name, replacing any previous entry.
    pub fn register(&mut self, reduction: Arc<dyn StrainReduction>) {
        self.entries.insert(reduction.name().to_ascii_lowercase(), reduction);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn StrainReduction>> {
        self.entries.get(&name.to_ascii_lowercase()).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "unknown formulation {name:?}; expected one of {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
