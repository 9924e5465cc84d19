//! Post-processing along the symmetry edges and the junction.

use crate::assembly::{element_geometry, meridian_direction, Solution};
use crate::element::{ElementFields, Material};
use crate::mesh::{colatitude, SurfaceMesh, JUNCTION, SYMMETRY_LEFT, SYMMETRY_RIGHT};
use crate::{Error, Result};

use super::GirkmannConstants;

/// Colatitude window of a moment profile (degrees, inclusive).
pub const PROFILE_RANGE_DEG: (f64, f64) = (20.0, 40.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileEdge {
    Left,
    Right,
}

impl ProfileEdge {
    pub fn tag(self) -> &'static str {
        match self {
            ProfileEdge::Left => SYMMETRY_LEFT,
            ProfileEdge::Right => SYMMETRY_RIGHT,
        }
    }
}

/// Meridional bending moment `(colatitude°, m)` at the midpoints of the
/// boundary edges along a symmetry tag, sorted by colatitude. The sign
/// follows the junction moment `M`: a positive value bends the shell the
/// way a positive `M` does.
pub fn moment_profile(
    solution: &Solution,
    mesh: &SurfaceMesh,
    edge: ProfileEdge,
    c: &GirkmannConstants,
) -> Result<Vec<(f64, f64)>> {
    let tag = edge.tag();
    let edges = mesh.tag_edges(tag);
    if edges.is_empty() {
        return Err(Error::invalid(format!("mesh has no edges tagged {tag:?}")));
    }
    let material = Material::new(c.young, c.poisson, c.thickness)?;
    let db = material.bending_matrix();
    let owners = mesh.boundary_edge_owner();
    let (lo, hi) = PROFILE_RANGE_DEG;
    let mut out = Vec::with_capacity(edges.len());
    for &[a, b] in edges {
        let &(e, k) = owners
            .get(&(a.min(b), a.max(b)))
            .ok_or_else(|| Error::invalid(format!("tagged edge ({a}, {b}) is not on the boundary")))?;
        let mid = (mesh.nodes[a].position + mesh.nodes[b].position) * 0.5;
        let deg = colatitude(&mid).to_degrees();
        if deg < lo - 1e-9 || deg > hi + 1e-9 {
            continue;
        }
        let geom = element_geometry(mesh, e)?;
        let normals = mesh.element_normals(e);
        let fields = ElementFields { geom: &geom, normals: &normals };
        let (xi, eta) = crate::element::edge_point(k, 0.0);
        let ops = fields.operators_at(xi, eta).map_err(|err| err.in_element(e))?;
        let nodes = mesh.elements[e].nodes;
        let kappa = ops.bending * solution.element_dofs(&nodes, &geom);
        let m = db * kappa;
        let normal = (mesh.nodes[a].normal + mesh.nodes[b].normal).normalize();
        let t = geom.frame.components(&meridian_direction(&mid, &normal));
        let (t1, t2) = (t.x, t.y);
        let mtt = m[0] * t1 * t1 + 2.0 * m[2] * t1 * t2 + m[1] * t2 * t2;
        out.push((deg, -mtt / (t1 * t1 + t2 * t2)));
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(out)
}

/// `max |‖u_i‖ − ū| / ū` over the junction nodes, `ū` the mean of `‖u_i‖`.
pub fn symmetry_deviation(solution: &Solution, mesh: &SurfaceMesh) -> Result<f64> {
    let nodes = mesh.tag_nodes(JUNCTION);
    if nodes.is_empty() {
        return Err(Error::invalid("mesh has no junction nodes"));
    }
    let mags: Vec<f64> = nodes.iter().map(|&i| solution.displacement(i).norm()).collect();
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    if !(mean > 0.0) {
        return Ok(0.0);
    }
    Ok(mags.iter().map(|m| (m - mean).abs()).fold(0.0, f64::max) / mean)
}

/// `Σ |m_{i+1} − m_i|`.
pub fn total_variation(profile: &[(f64, f64)]) -> f64 {
    profile.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
}

/// Sign changes of the discrete second difference among samples whose
/// colatitude lies strictly inside `(lo, hi)` degrees. Differences below
/// `1e-12` of the profile scale count as zero and are skipped.
pub fn second_difference_sign_changes(profile: &[(f64, f64)], lo: f64, hi: f64) -> usize {
    let pts: Vec<(f64, f64)> = profile.iter().copied().filter(|p| p.0 > lo && p.0 < hi).collect();
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let mut changes = 0;
    let mut last = 0.0f64;
    for w in pts.windows(3) {
        // divided differences handle non-uniform spacing
        let d1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        let dd = d2 - d1;
        if dd.abs() <= 1e-12 * scale {
            continue;
        }
        if last != 0.0 && dd.signum() != last.signum() {
            changes += 1;
        }
        last = dd;
    }
    changes
}
