//! Global degrees of freedom, symmetry constraints, sparse assembly and the
//! linear solve.
//!
//! Every node carries `(ũ₁, ũ₂, w̃, θ̃₁, θ̃₂)` in its own tangent frame
//! `(g₁, g₂, n)`: the physical displacement is `ũ_λ g_λ + w̃ n` and the
//! rotation vector of the director, `θ̃_λ g_λ`. A symmetry plane with normal
//! `p` removes the tangential components along `p` of both.

mod ordering;
mod solver;
mod sparse;

pub use ordering::nested_dissection;
pub use solver::{Cholesky, SolveStats, MAX_RESIDUAL, TARGET_RESIDUAL};
pub use sparse::SymmetricCsc;

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{Matrix5, SMatrix, SVector};
use rayon::prelude::*;

use crate::element::{element_stiffness, ElementFields, ElementMatrix, Formulation, Material, DOFS};
use crate::geometry::shape::{GAUSS_2, GAUSS_2X2};
use crate::geometry::{nodal_dof_transform, straighten_element, ElementGeometry, NodalFrame};
use crate::mesh::{SurfaceMesh, JUNCTION};
use crate::{Error, Result, Vec3};

/// Symmetry plane through the tagged boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryPlane {
    pub tag: String,
    pub normal: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub frames: Vec<NodalFrame>,
    /// Global equation number per nodal dof; `None` when eliminated.
    pub index: Vec<[Option<usize>; 5]>,
    pub n_dof: usize,
}

const IN_PLANE: [usize; 4] = [0, 1, 3, 4];

impl DofMap {
    pub fn constrained_count(&self) -> usize {
        self.index.iter().flatten().filter(|i| i.is_none()).count()
    }

    fn is_constrained(&self, node: usize) -> bool {
        self.index[node].iter().any(Option::is_none)
    }

    /// Rotates the tangent frames of unconstrained nodes by per-node angles.
    pub fn with_rotated_frames(&self, angles: &[f64]) -> DofMap {
        let mut out = self.clone();
        for (node, frame) in out.frames.iter_mut().enumerate() {
            if !self.is_constrained(node) {
                *frame = frame.rotated(angles[node % angles.len().max(1)]);
            }
        }
        out
    }

    /// Eliminates one more nodal dof and renumbers the equations.
    pub fn with_fixed(&self, node: usize, slot: usize) -> Result<DofMap> {
        if node >= self.index.len() || slot >= 5 {
            return Err(Error::invalid(format!("no dof {slot} at node {node}")));
        }
        let mut out = self.clone();
        out.index[node][slot] = None;
        let mut next = 0;
        for slots in &mut out.index {
            for s in slots.iter_mut().flatten() {
                *s = next;
                next += 1;
            }
        }
        out.n_dof = next;
        Ok(out)
    }

    /// Global equation numbers of an element's 20 dofs.
    pub fn element_indices(&self, nodes: &[usize; 4]) -> [Option<usize>; DOFS] {
        std::array::from_fn(|k| self.index[nodes[k / 5]][k % 5])
    }
}

/// Nodal frames and equation numbers. Nodes on one symmetry plane get
/// `g₂` along the tangential projection of the plane normal and lose
/// `ũ₂, θ̃₂`; nodes on two planes (the pole) lose all tangential dofs.
pub fn build_dof_map(mesh: &SurfaceMesh, planes: &[SymmetryPlane]) -> Result<DofMap> {
    let n = mesh.nodes.len();
    let mut node_planes: Vec<Vec<Vec3>> = vec![Vec::new(); n];
    for plane in planes {
        let edges = mesh.tag_edges(&plane.tag);
        if edges.is_empty() {
            return Err(Error::Constraint(format!("symmetry tag {:?} has no edges", plane.tag)));
        }
        if !(plane.normal.norm() > 0.0) {
            return Err(Error::Constraint(format!("symmetry plane {:?} has a zero normal", plane.tag)));
        }
        let p = plane.normal.normalize();
        for i in mesh.tag_nodes(&plane.tag) {
            if !node_planes[i].iter().any(|q| q.cross(&p).norm() < 1e-9) {
                node_planes[i].push(p);
            }
        }
    }

    let mut frames = Vec::with_capacity(n);
    let mut eliminated = Vec::with_capacity(n);
    for (i, node) in mesh.nodes.iter().enumerate() {
        let normal = node.normal;
        match node_planes[i].as_slice() {
            [] => {
                frames.push(NodalFrame::from_normal(&normal));
                eliminated.push(&[][..]);
            }
            [p] => {
                let t = p - normal * p.dot(&normal);
                if !(t.norm() > 1e-8) {
                    return Err(Error::Constraint(format!("node {i}: symmetry plane is tangent to the surface")));
                }
                let g2 = t.normalize();
                let g1 = g2.cross(&normal);
                frames.push(NodalFrame { g1, g2, n: normal });
                eliminated.push(&[1, 4][..]);
            }
            [p, q] => {
                let axis = p.cross(q).normalize();
                if axis.dot(&normal).abs() < 0.95 {
                    return Err(Error::Constraint(format!(
                        "node {i}: two symmetry planes whose intersection is not along the normal"
                    )));
                }
                frames.push(NodalFrame::from_normal(&normal));
                eliminated.push(&IN_PLANE[..]);
            }
            _ => return Err(Error::Constraint(format!("node {i} lies on more than two symmetry planes"))),
        }
    }

    let mut index = Vec::with_capacity(n);
    let mut next = 0;
    for removed in eliminated {
        let mut slots = [None; 5];
        for (k, slot) in slots.iter_mut().enumerate() {
            if !removed.contains(&k) {
                *slot = Some(next);
                next += 1;
            }
        }
        index.push(slots);
    }
    Ok(DofMap { frames, index, n_dof: next })
}

/// Line load density along a tagged edge set: force and director couple per
/// unit length as functions of position.
pub type LineDensity = Arc<dyn Fn(&Vec3) -> (Vec3, Vec3) + Send + Sync>;

#[derive(Clone)]
pub struct LineLoad {
    pub tag: String,
    pub density: LineDensity,
}

/// How global load vectors are split into dof components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LoadProjection {
    /// Components `(f₁, f₂, p)` along the element frame, integrated on the
    /// element and carried to the nodes like the stiffness. The normal
    /// component then acts along the nodal normal, which misplaces `O(h)` of
    /// any large tangential load into the transverse direction.
    Element,
    /// Nodal forces projected directly onto each node's `(g₁, g₂, n)`.
    #[default]
    Nodal,
}

/// One right-hand side: a uniform force per unit area (global components)
/// plus line loads.
#[derive(Clone, Default)]
pub struct LoadCase {
    pub surface_force: Vec3,
    pub line_loads: Vec<LineLoad>,
    pub projection: LoadProjection,
}

pub struct GlobalSystem {
    pub matrix: SymmetricCsc,
    pub rhs: Vec<Vec<f64>>,
    pub dofs: DofMap,
    /// Node elimination order for the factorization.
    pub node_order: Vec<usize>,
}

/// Element geometry with the check that element and nodal normals agree.
pub fn element_geometry(mesh: &SurfaceMesh, e: usize) -> Result<ElementGeometry> {
    let geom = straighten_element(&mesh.element_positions(e)).map_err(|err| err.in_element(e))?;
    for n in mesh.element_normals(e) {
        if !(geom.frame.axes[2].dot(&n) > 0.0) {
            return Err(Error::ElementGeometry {
                element: e,
                message: "element orientation disagrees with the nodal normals".into(),
            });
        }
    }
    Ok(geom)
}

/// Map from the element's nodal-frame dofs to its element-frame dofs.
pub fn element_transform(geom: &ElementGeometry, frames: [&NodalFrame; 4]) -> SMatrix<f64, DOFS, DOFS> {
    let mut t = SMatrix::<f64, DOFS, DOFS>::zeros();
    for (a, frame) in frames.into_iter().enumerate() {
        let block: Matrix5<f64> = nodal_dof_transform(&geom.frame, frame);
        t.fixed_view_mut::<5, 5>(5 * a, 5 * a).copy_from(&block);
    }
    t
}

/// Element stiffness in nodal-frame dofs.
pub fn nodal_element_stiffness(
    mesh: &SurfaceMesh,
    dofs: &DofMap,
    e: usize,
    form: &Formulation,
    material: &Material,
) -> Result<ElementMatrix> {
    let geom = element_geometry(mesh, e)?;
    let normals = mesh.element_normals(e);
    let fields = ElementFields { geom: &geom, normals: &normals };
    let k = element_stiffness(form, &fields, material).map_err(|err| err.in_element(e))?;
    let nodes = mesh.elements[e].nodes;
    let t = element_transform(&geom, std::array::from_fn(|a| &dofs.frames[nodes[a]]));
    Ok(t.transpose() * k * t)
}

fn node_adjacency(mesh: &SurfaceMesh) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); mesh.nodes.len()];
    for el in &mesh.elements {
        for &a in &el.nodes {
            for &b in &el.nodes {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn lower_pattern(dofs: &DofMap, adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); dofs.n_dof];
    for (a, neighbours) in adjacency.iter().enumerate() {
        let mut coupled: Vec<usize> = dofs.index[a].iter().flatten().copied().collect();
        for &b in neighbours {
            coupled.extend(dofs.index[b].iter().flatten());
        }
        for j in dofs.index[a].iter().flatten() {
            rows[*j] = coupled.iter().copied().filter(|&i| i >= *j).collect();
        }
    }
    rows
}

const CHUNK: usize = 4096;

/// Assembles the constrained stiffness matrix and one load vector per case.
pub fn assemble(
    mesh: &SurfaceMesh,
    dofs: &DofMap,
    form: &Formulation,
    material: &Material,
    cases: &[LoadCase],
) -> Result<GlobalSystem> {
    let adjacency = node_adjacency(mesh);
    let mut matrix = SymmetricCsc::from_pattern(dofs.n_dof, lower_pattern(dofs, &adjacency))?;
    let n_el = mesh.elements.len();
    for start in (0..n_el).step_by(CHUNK) {
        let end = (start + CHUNK).min(n_el);
        let blocks: Vec<ElementMatrix> = (start..end)
            .into_par_iter()
            .map(|e| nodal_element_stiffness(mesh, dofs, e, form, material))
            .collect::<Result<_>>()?;
        for (e, k) in (start..end).zip(blocks) {
            let idx = dofs.element_indices(&mesh.elements[e].nodes);
            for q in 0..DOFS {
                let Some(j) = idx[q] else { continue };
                for p in 0..DOFS {
                    if let Some(i) = idx[p] {
                        if i >= j {
                            matrix.add(i, j, k[(p, q)])?;
                        }
                    }
                }
            }
        }
    }
    let rhs = cases.iter().map(|case| load_vector(mesh, dofs, case)).collect::<Result<_>>()?;
    let positions: Vec<Vec3> = mesh.nodes.iter().map(|n| n.position).collect();
    let node_order = nested_dissection(&positions, &adjacency);
    Ok(GlobalSystem { matrix, rhs, dofs: dofs.clone(), node_order })
}

fn scatter_nodal(f: &mut [f64], dofs: &DofMap, node: usize, force: &Vec3, couple: &Vec3) {
    let frame = &dofs.frames[node];
    let values = [force.dot(&frame.g1), force.dot(&frame.g2), force.dot(&frame.n), couple.dot(&frame.g1), couple.dot(&frame.g2)];
    for (slot, v) in dofs.index[node].iter().zip(values) {
        if let Some(i) = slot {
            f[*i] += v;
        }
    }
}

/// Adds `w · (force, couple)` to `node`, decomposed in the element frame
/// and carried to nodal dofs by the transpose of the element transform.
fn scatter_element(
    f: &mut [f64],
    dofs: &DofMap,
    geom: &ElementGeometry,
    node: usize,
    force: &Vec3,
    couple: &Vec3,
) {
    let fc = geom.frame.components(force);
    let cc = geom.frame.components(couple);
    let local = SVector::<f64, 5>::new(fc.x, fc.y, fc.z, cc.x, cc.y);
    let t: Matrix5<f64> = nodal_dof_transform(&geom.frame, &dofs.frames[node]);
    let nodal = t.transpose() * local;
    for (slot, v) in dofs.index[node].iter().zip(nodal.iter()) {
        if let Some(i) = slot {
            f[*i] += v;
        }
    }
}

/// Consistent load vector from bilinear shape functions; see
/// [`LoadProjection`] for how vectors become dof components.
pub fn load_vector(mesh: &SurfaceMesh, dofs: &DofMap, case: &LoadCase) -> Result<Vec<f64>> {
    let mut f = vec![0.0; dofs.n_dof];
    let element_frame = case.projection == LoadProjection::Element;
    if case.surface_force != Vec3::zeros() {
        for e in 0..mesh.elements.len() {
            let geom = element_geometry(mesh, e)?;
            let nodes = mesh.elements[e].nodes;
            for &(xi, eta) in &GAUSS_2X2 {
                let s = geom.shape_at(xi, eta).map_err(|err| err.in_element(e))?;
                for a in 0..4 {
                    let force = case.surface_force * (s.values[a] * s.det);
                    if element_frame {
                        scatter_element(&mut f, dofs, &geom, nodes[a], &force, &Vec3::zeros());
                    } else {
                        scatter_nodal(&mut f, dofs, nodes[a], &force, &Vec3::zeros());
                    }
                }
            }
        }
    }
    let owners = if element_frame && !case.line_loads.is_empty() { Some(mesh.boundary_edge_owner()) } else { None };
    for load in &case.line_loads {
        let edges = mesh.tag_edges(&load.tag);
        if edges.is_empty() {
            return Err(Error::invalid(format!("line load on empty tag {:?}", load.tag)));
        }
        for &[a, b] in edges {
            let geom = match &owners {
                Some(owners) => {
                    let &(e, _) = owners
                        .get(&(a.min(b), a.max(b)))
                        .ok_or_else(|| Error::invalid(format!("loaded edge ({a}, {b}) is not on the boundary")))?;
                    Some(element_geometry(mesh, e)?)
                }
                None => None,
            };
            let (pa, pb) = (mesh.nodes[a].position, mesh.nodes[b].position);
            let half = 0.5 * (pb - pa).norm();
            for s in GAUSS_2 {
                let wa = 0.5 * (1.0 - s);
                let wb = 0.5 * (1.0 + s);
                let (force, couple) = (load.density)(&(pa * wa + pb * wb));
                for (node, w) in [(a, wa * half), (b, wb * half)] {
                    match &geom {
                        Some(g) => scatter_element(&mut f, dofs, g, node, &(force * w), &(couple * w)),
                        None => scatter_nodal(&mut f, dofs, node, &(force * w), &(couple * w)),
                    }
                }
            }
        }
    }
    Ok(f)
}

/// Nodal generalized displacements in the nodal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub nodal: Vec<[f64; 5]>,
    pub frames: Vec<NodalFrame>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn from_vector(dofs: &DofMap, x: &[f64], stats: SolveStats) -> Self {
        let nodal = dofs.index.iter().map(|slots| slots.map(|s| s.map_or(0.0, |i| x[i]))).collect();
        Solution { nodal, frames: dofs.frames.clone(), stats }
    }

    /// Physical displacement `ũ_λ g_λ + w̃ n`.
    pub fn displacement(&self, node: usize) -> Vec3 {
        let [u1, u2, w, _, _] = self.nodal[node];
        let f = &self.frames[node];
        f.g1 * u1 + f.g2 * u2 + f.n * w
    }

    /// Director rotation vector `θ̃_λ g_λ`.
    pub fn rotation(&self, node: usize) -> Vec3 {
        let [_, _, _, t1, t2] = self.nodal[node];
        let f = &self.frames[node];
        f.g1 * t1 + f.g2 * t2
    }

    /// Element-frame dofs `(u₁, u₂, w, θ₁, θ₂)` of an element.
    pub fn element_dofs(&self, nodes: &[usize; 4], geom: &ElementGeometry) -> SVector<f64, DOFS> {
        let t = element_transform(geom, std::array::from_fn(|a| &self.frames[nodes[a]]));
        let nodal = SVector::<f64, DOFS>::from_fn(|k, _| self.nodal[nodes[k / 5]][k % 5]);
        t * nodal
    }

    pub fn scaled(&self, factor: f64) -> Solution {
        let nodal = self.nodal.iter().map(|v| v.map(|x| x * factor)).collect();
        Solution { nodal, frames: self.frames.clone(), stats: self.stats }
    }

    /// `self + factor · other` (same frames).
    pub fn add_scaled(&self, other: &Solution, factor: f64) -> Solution {
        let nodal =
            self.nodal.iter().zip(&other.nodal).map(|(a, b)| std::array::from_fn(|k| a[k] + factor * b[k])).collect();
        Solution { nodal, frames: self.frames.clone(), stats: self.stats }
    }
}

/// Factorizes once and solves every right-hand side.
pub fn solve(system: &GlobalSystem) -> Result<Vec<Solution>> {
    let mut order = Vec::with_capacity(system.dofs.n_dof);
    for &node in &system.node_order {
        order.extend(system.dofs.index[node].iter().flatten());
    }
    let chol = Cholesky::factorize(&system.matrix, Some(&order))?;
    let solved = chol.solve(&system.matrix, &system.rhs)?;
    Ok(solved.into_iter().map(|(x, stats)| Solution::from_vector(&system.dofs, &x, stats)).collect())
}

/// Unit horizontal radial direction `ê_ρ` at a point off the axis.
pub fn radial_direction(p: &Vec3) -> Vec3 {
    Vec3::new(p.x, p.y, 0.0).normalize()
}

/// Horizontal circumferential direction `ê_c = ê_z × ê_ρ`.
pub fn circumferential_direction(p: &Vec3) -> Vec3 {
    Vec3::z().cross(&radial_direction(p))
}

/// Meridional tangent `ê_c × n`, pointing away from the pole.
pub fn meridian_direction(p: &Vec3, normal: &Vec3) -> Vec3 {
    circumferential_direction(p).cross(normal).normalize()
}

/// Mean horizontal displacement `Λ` and meridional rotation `Ψ` over the
/// junction nodes. `Ψ > 0` turns the shell edge so that its normal tips
/// down the meridian (clockwise in a view with `ρ` to the right, `z` up).
pub fn junction_averages(solution: &Solution, mesh: &SurfaceMesh) -> Result<(f64, f64)> {
    let nodes = mesh.tag_nodes(JUNCTION);
    if nodes.is_empty() {
        return Err(Error::invalid("mesh has no junction nodes"));
    }
    let (mut lambda, mut psi) = (0.0, 0.0);
    for &i in &nodes {
        let node = &mesh.nodes[i];
        lambda += solution.displacement(i).dot(&radial_direction(&node.position));
        psi += solution.rotation(i).dot(&meridian_direction(&node.position, &node.normal));
    }
    let count = nodes.len() as f64;
    Ok((lambda / count, psi / count))
}
