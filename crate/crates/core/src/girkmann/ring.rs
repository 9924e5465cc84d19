//! Foot ring as a rigid cross-section with hoop stiffness only.
//!
//! The section moves as `u_ρ = Λ + (z − z_J) Ψ`, so its strain energy per
//! unit junction length is `½ (E/ρ₀) ∬ u_ρ² / ρ dρ dz`. The junction
//! midpoint sits at `(ρ₀, z_J)` with `z_J = 0`.

use nalgebra::{Matrix2, Vector2};

use super::{ComplianceSet, GirkmannConstants};
use crate::{Error, Result};

/// Gauss-Legendre points per direction on each triangle of the fan.
pub const DEFAULT_ORDER: usize = 24;

pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct RingModel {
    /// Section vertices `(ρ, z)`, counter-clockwise.
    pub vertices: Vec<Point>,
    pub junction: Point,
    /// `K` in `K (Λ, Ψ) = (P_Λ, P_Ψ)` per unit junction length.
    pub stiffness: Matrix2<f64>,
    /// Generalized loads of the known forces (junction force and base
    /// pressure) on the ring.
    pub load: Vector2<f64>,
    pub base_pressure: f64,
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence (`n >= 1`).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∬ f dρ dz` over a convex polygon: fan triangulation from the first
/// vertex and a collapsed-square Gauss-Legendre rule on each triangle.
pub fn polygon_integral(vertices: &[Point], order: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let rule = gauss_legendre(order);
    let p0 = vertices[0];
    let mut total = 0.0;
    for k in 1..vertices.len() - 1 {
        let (p1, p2) = (vertices[k], vertices[k + 1]);
        let area2 = (p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1);
        for &(a, wa) in &rule {
            let s = 0.5 * (1.0 + a);
            for &(b, wb) in &rule {
                let t = 0.5 * (1.0 + b) * (1.0 - s);
                let x = p0.0 + s * (p1.0 - p0.0) + t * (p2.0 - p0.0);
                let y = p0.1 + s * (p1.1 - p0.1) + t * (p2.1 - p0.1);
                // dA = |area2| (1 - s) ds dt with ds dt = da db / 4
                total += wa * wb * 0.25 * (1.0 - s) * area2 * f(x, y);
            }
        }
    }
    total
}

/// Pentagonal section: vertical inner face, horizontal top and bottom,
/// vertical outer face, and a bevel of length `t` along the shell normal
/// centred on the junction midpoint.
pub fn ring_section(c: &GirkmannConstants) -> Vec<Point> {
    let (s, co) = c.opening_angle.sin_cos();
    let half = 0.5 * c.thickness;
    let rho0 = c.base_radius;
    let z_j = 0.0;
    let rho_in = rho0 - half * s;
    let z_top = z_j + half * co;
    let z_bottom = z_top - c.ring_height;
    vec![
        (rho_in, z_bottom),
        (rho_in + c.ring_width, z_bottom),
        (rho_in + c.ring_width, z_top),
        (rho0 + half * s, z_top),
        (rho_in, z_j - half * co),
    ]
}

fn check_convex(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::geometry("ring section needs at least three vertices"));
    }
    for k in 0..n {
        let (a, b, c) = (vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
        let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
        if !(cross > 0.0) {
            return Err(Error::geometry(format!("ring section is not strictly convex at vertex {}", (k + 1) % n)));
        }
    }
    if vertices.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::geometry("ring section must lie at positive radius"));
    }
    Ok(())
}

/// Ring compliances in the sign convention of the shell: reactions are
/// positive when acting on the shell, so the ring receives their negatives.
pub fn ring_compliance(c: &GirkmannConstants) -> Result<(ComplianceSet, RingModel)> {
    ring_compliance_with(c, &ring_section(c), DEFAULT_ORDER)
}

pub fn ring_compliance_with(
    c: &GirkmannConstants,
    vertices: &[Point],
    order: usize,
) -> Result<(ComplianceSet, RingModel)> {
    check_convex(vertices)?;
    let rho0 = c.base_radius;
    let z_j = 0.0;
    let e = c.young;
    let moment = |p: usize| polygon_integral(vertices, order, |rho, z| (z - z_j).powi(p as i32) / rho);
    let (i0, i1, i2) = (moment(0), moment(1), moment(2));
    let stiffness = Matrix2::new(i0, i1, i1, i2) * (e / rho0);
    let compliance = stiffness
        .try_inverse()
        .ok_or_else(|| Error::geometry("ring stiffness is singular"))?
        * e;

    // known loads: junction force −N t_m and an upward base pressure that
    // balances its vertical component
    let n0 = c.normal_force();
    let (s, co) = c.opening_angle.sin_cos();
    let z_bottom = vertices.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let base: Vec<f64> = vertices.iter().filter(|p| (p.1 - z_bottom).abs() < 1e-12).map(|p| p.0).collect();
    let rho_a = base.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_b = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(rho_b > rho_a) {
        return Err(Error::geometry("ring section has no horizontal base"));
    }
    let base_pressure = -n0 * s * rho0 / (0.5 * (rho_b * rho_b - rho_a * rho_a));
    // ∫ p (−(ρ − ρ₀)) ρ dρ / ρ₀ over the base annulus
    let base_moment = base_pressure / rho0
        * (-(rho_b.powi(3) - rho_a.powi(3)) / 3.0 + rho0 * 0.5 * (rho_b * rho_b - rho_a * rho_a));
    let load = Vector2::new(-n0 * co, base_moment);
    let free = compliance * load;

    let set = ComplianceSet {
        e_lambda0: free[0],
        k11: -compliance[(0, 0)],
        k12: compliance[(0, 1)],
        e_psi0: free[1],
        k21: -compliance[(1, 0)],
        k22: compliance[(1, 1)],
    };
    let model = RingModel { vertices: vertices.to_vec(), junction: (rho0, z_j), stiffness, load, base_pressure };
    Ok((set, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [1, 2, 5, 12] {
            let rule = gauss_legendre(n);
            for p in 0..2 * n {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(p as i32)).sum();
                assert!((approx - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn unit_square_moments() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!((polygon_integral(&sq, 4, |_, _| 1.0) - 1.0).abs() < 1e-15);
        assert!((polygon_integral(&sq, 4, |x, y| x * y * y) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn section_shape() {
        let c = GirkmannConstants::default();
        let v = ring_section(&c);
        assert!(check_convex(&v).is_ok());
        assert!((v[1].0 - v[0].0 - 0.6).abs() < 1e-15);
        assert!((v[2].1 - v[1].1 - 0.5).abs() < 1e-15);
        let bevel = ((v[3].0 - v[4].0).powi(2) + (v[3].1 - v[4].1).powi(2)).sqrt();
        assert!((bevel - c.thickness).abs() < 1e-15);
    }

    #[test]
    fn non_convex_section_rejected() {
        let c = GirkmannConstants::default();
        let mut v = ring_section(&c);
        v.swap(1, 2);
        assert!(matches!(ring_compliance_with(&c, &v, 8), Err(Error::Geometry(_))));
    }
}
