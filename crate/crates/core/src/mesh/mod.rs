//! Quadrilateral surface meshes of the quarter spherical cap.

mod generate;
pub mod msh;

pub use generate::{corner_centroid_fraction, generate_quarter_cap_regular, generate_quarter_cap_with_center};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::straighten_element;
use crate::{Error, Result, Vec3};

pub const JUNCTION: &str = "junction";
pub const SYMMETRY_LEFT: &str = "symmetry_left";
pub const SYMMETRY_RIGHT: &str = "symmetry_right";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Vec3,
    pub normal: Vec3,
}

/// Four node indices, counter-clockwise seen from the outward-normal side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadElement {
    pub nodes: [usize; 4],
}

impl QuadElement {
    /// Directed edges `(n_a, n_{a+1})` in element orientation.
    pub fn edges(&self) -> [[usize; 2]; 4] {
        std::array::from_fn(|a| [self.nodes[a], self.nodes[(a + 1) % 4]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Analytic,
    Imported,
    Perturbed { seed: u64, magnitude: f64 },
}

/// Spherical dome cut at colatitude `α`; the sphere is centered at the origin
/// with the pole on +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomeGeometry {
    /// Horizontal radius of the junction circle, `ρ₀` (m).
    pub base_radius: f64,
    /// Opening angle `α` (rad).
    pub opening_angle: f64,
    /// Shell thickness `t` (m).
    pub thickness: f64,
}

impl DomeGeometry {
    pub fn new(base_radius: f64, opening_angle: f64, thickness: f64) -> Result<Self> {
        if !(opening_angle > 0.0 && opening_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid(format!("opening angle {opening_angle} outside (0, π/2)")));
        }
        if !(base_radius > 0.0 && thickness > 0.0) {
            return Err(Error::invalid("radius and thickness must be positive"));
        }
        Ok(DomeGeometry { base_radius, opening_angle, thickness })
    }

    /// `r₀ = ρ₀ / sin α`.
    pub fn sphere_radius(&self) -> f64 {
        self.base_radius / self.opening_angle.sin()
    }

    pub fn point(&self, colatitude: f64, azimuth: f64) -> Vec3 {
        let r = self.sphere_radius();
        let (sp, cp) = colatitude.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Vec3::new(r * sp * ca, r * sp * sa, r * cp)
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        p * (self.sphere_radius() / p.norm())
    }

    /// Point on the junction circle in the horizontal direction of `p`.
    pub fn project_to_junction(&self, p: &Vec3) -> Vec3 {
        let h = (p.x * p.x + p.y * p.y).sqrt();
        let z = self.sphere_radius() * self.opening_angle.cos();
        Vec3::new(p.x / h * self.base_radius, p.y / h * self.base_radius, z)
    }
}

pub fn colatitude(p: &Vec3) -> f64 {
    (p.x * p.x + p.y * p.y).sqrt().atan2(p.z)
}

pub fn azimuth(p: &Vec3) -> f64 {
    p.y.atan2(p.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalMode {
    /// `n = p / |p|` on the sphere centered at the origin.
    Analytic,
    /// Normalized mean of the unit facet normals of the adjacent elements.
    Averaged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub nodes: Vec<Node>,
    pub elements: Vec<QuadElement>,
    /// Tagged boundary edges, stored in element orientation.
    pub tags: BTreeMap<String, Vec<[usize; 2]>>,
    pub provenance: Provenance,
    /// Analytic surface the nodes lie on, when known.
    pub surface: Option<DomeGeometry>,
}

impl SurfaceMesh {
    pub fn element_positions(&self, e: usize) -> [Vec3; 4] {
        let el = &self.elements[e];
        std::array::from_fn(|a| self.nodes[el.nodes[a]].position)
    }

    pub fn element_normals(&self, e: usize) -> [Vec3; 4] {
        let el = &self.elements[e];
        std::array::from_fn(|a| self.nodes[el.nodes[a]].normal)
    }

    pub fn tag_edges(&self, name: &str) -> &[[usize; 2]] {
        self.tags.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sorted distinct nodes of a tag.
    pub fn tag_nodes(&self, name: &str) -> Vec<usize> {
        let set: BTreeSet<usize> = self.tag_edges(name).iter().flatten().copied().collect();
        set.into_iter().collect()
    }

    /// Maps each undirected edge to the elements containing it.
    pub fn edge_elements(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for [a, b] in el.edges() {
                map.entry((a.min(b), a.max(b))).or_default().push(e);
            }
        }
        map
    }

    /// Element owning a boundary edge together with the local edge index.
    pub fn boundary_edge_owner(&self) -> HashMap<(usize, usize), (usize, usize)> {
        let mut map = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for (k, [a, b]) in el.edges().into_iter().enumerate() {
                map.insert((a.min(b), a.max(b)), (e, k));
            }
        }
        let counts = self.edge_elements();
        map.retain(|key, _| counts.get(key).map_or(false, |v| v.len() == 1));
        map
    }

    /// Structural checks: distinct element nodes, consistent orientation,
    /// tagged edges on the boundary, strictly convex straightened elements.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut directed = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            let distinct: BTreeSet<_> = el.nodes.iter().collect();
            if distinct.len() != 4 || el.nodes.iter().any(|&i| i >= n) {
                return Err(Error::geometry(format!("element {e} has invalid node list {:?}", el.nodes)));
            }
            for [a, b] in el.edges() {
                if let Some(other) = directed.insert((a, b), e) {
                    return Err(Error::geometry(format!(
                        "elements {other} and {e} traverse edge ({a}, {b}) in the same direction"
                    )));
                }
            }
        }
        let counts = self.edge_elements();
        for (name, edges) in &self.tags {
            for &[a, b] in edges {
                match counts.get(&(a.min(b), a.max(b))) {
                    Some(v) if v.len() == 1 => {}
                    _ => {
                        return Err(Error::geometry(format!(
                            "tag {name}: edge ({a}, {b}) is not a boundary edge"
                        )))
                    }
                }
            }
        }
        for e in 0..self.elements.len() {
            let geom = straighten_element(&self.element_positions(e)).map_err(|err| err.in_element(e))?;
            if geom.corner_jacobian_dets().iter().any(|&d| d <= 0.0) {
                return Err(Error::ElementGeometry { element: e, message: "element is not convex".into() });
            }
        }
        Ok(())
    }

    /// Splits every quad into four through edge midpoints and the centroid.
    ///
    /// New nodes are pulled back onto the analytic surface when one is
    /// known; midpoints of junction edges go onto the junction circle.
    pub fn refine(&self) -> Result<SurfaceMesh> {
        let junction: BTreeSet<(usize, usize)> =
            self.tag_edges(JUNCTION).iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
        let mut positions: Vec<Vec3> = self.nodes.iter().map(|n| n.position).collect();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(4 * self.elements.len());

        let mut mid = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let p = (positions[a] + positions[b]) * 0.5;
                let p = match &self.surface {
                    Some(s) if junction.contains(&key) => s.project_to_junction(&p),
                    Some(s) => s.project(&p),
                    None => p,
                };
                positions.push(p);
                positions.len() - 1
            })
        };

        for el in &self.elements {
            let [a, b, c, d] = el.nodes;
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let cd = mid(c, d, &mut positions);
            let da = mid(d, a, &mut positions);
            let centroid = (positions[a] + positions[b] + positions[c] + positions[d]) * 0.25;
            positions.push(match &self.surface {
                Some(s) => s.project(&centroid),
                None => centroid,
            });
            let m = positions.len() - 1;
            elements.push(QuadElement { nodes: [a, ab, m, da] });
            elements.push(QuadElement { nodes: [ab, b, bc, m] });
            elements.push(QuadElement { nodes: [m, bc, c, cd] });
            elements.push(QuadElement { nodes: [da, m, cd, d] });
        }

        let tags = self
            .tags
            .iter()
            .map(|(name, edges)| {
                let split = edges
                    .iter()
                    .flat_map(|&[a, b]| {
                        let m = midpoint[&(a.min(b), a.max(b))];
                        [[a, m], [m, b]]
                    })
                    .collect();
                (name.clone(), split)
            })
            .collect();

        let nodes = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| Node { id, position, normal: Vec3::zeros() })
            .collect();
        let mut refined =
            SurfaceMesh { nodes, elements, tags, provenance: self.provenance, surface: self.surface };
        let mode = if refined.surface.is_some() { NormalMode::Analytic } else { NormalMode::Averaged };
        refined = refined.compute_nodal_normals(mode)?;
        refined.validate()?;
        Ok(refined)
    }

    /// Moves every untagged interior node within its tangent plane by a
    /// seeded pseudo-random vector no longer than `magnitude` times the
    /// shortest incident edge, then returns it to the surface.
    pub fn perturb(&self, magnitude: f64, seed: u64) -> Result<SurfaceMesh> {
        if !(0.0..=0.4).contains(&magnitude) {
            return Err(Error::invalid(format!("perturbation magnitude {magnitude} outside [0, 0.4]")));
        }
        let mut fixed = vec![false; self.nodes.len()];
        for (a, b) in self.boundary_edge_owner().keys() {
            fixed[*a] = true;
            fixed[*b] = true;
        }
        for edges in self.tags.values() {
            for &[a, b] in edges {
                fixed[a] = true;
                fixed[b] = true;
            }
        }
        let mut shortest = vec![f64::INFINITY; self.nodes.len()];
        for el in &self.elements {
            for [a, b] in el.edges() {
                let l = (self.nodes[a].position - self.nodes[b].position).norm();
                shortest[a] = shortest[a].min(l);
                shortest[b] = shortest[b].min(l);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for (i, node) in self.nodes.iter().enumerate() {
            if fixed[i] {
                continue;
            }
            let angle: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let fraction: f64 = rng.random::<f64>();
            if magnitude == 0.0 {
                continue;
            }
            let normal = match &self.surface {
                Some(_) => node.position.normalize(),
                None => node.normal,
            };
            let frame = crate::geometry::NodalFrame::from_normal(&normal);
            let step = frame.tangent_vector(angle.cos(), angle.sin()) * (fraction * magnitude * shortest[i]);
            let moved = node.position + step;
            out.nodes[i].position = match &self.surface {
                Some(s) => s.project(&moved),
                None => moved,
            };
        }
        out.provenance = Provenance::Perturbed { seed, magnitude };
        let mode = if out.surface.is_some() { NormalMode::Analytic } else { NormalMode::Averaged };
        out = out.compute_nodal_normals(mode)?;
        out.validate()?;
        Ok(out)
    }

    pub fn compute_nodal_normals(&self, mode: NormalMode) -> Result<SurfaceMesh> {
        let mut out = self.clone();
        match mode {
            NormalMode::Analytic => {
                if self.surface.is_none() {
                    return Err(Error::invalid("analytic normals need an analytic surface"));
                }
                for node in &mut out.nodes {
                    node.normal = node.position.normalize();
                }
            }
            NormalMode::Averaged => {
                let mut sum = vec![Vec3::zeros(); self.nodes.len()];
                for (e, el) in self.elements.iter().enumerate() {
                    let p = self.element_positions(e);
                    let facet = (p[2] - p[0]).cross(&(p[3] - p[1]));
                    if facet.norm() == 0.0 {
                        return Err(Error::ElementGeometry { element: e, message: "zero facet normal".into() });
                    }
                    let facet = facet.normalize();
                    for &i in &el.nodes {
                        sum[i] += facet;
                    }
                }
                for (i, node) in out.nodes.iter_mut().enumerate() {
                    let s = sum[i];
                    if !(s.norm() > 1e-12) {
                        return Err(Error::geometry(format!("node {i}: degenerate normal fan")));
                    }
                    node.normal = s.normalize();
                }
            }
        }
        Ok(out)
    }

    /// Flips every element if the facet normals point toward `center`.
    pub fn orient_away_from(&self, center: &Vec3) -> SurfaceMesh {
        let mut score = 0.0;
        for e in 0..self.elements.len() {
            let p = self.element_positions(e);
            let facet = (p[2] - p[0]).cross(&(p[3] - p[1]));
            let c = (p[0] + p[1] + p[2] + p[3]) * 0.25;
            score += facet.dot(&(c - center)).signum();
        }
        if score >= 0.0 {
            return self.clone();
        }
        let mut out = self.clone();
        for el in &mut out.elements {
            let [a, b, c, d] = el.nodes;
            el.nodes = [a, d, c, b];
        }
        for edges in out.tags.values_mut() {
            for e in edges.iter_mut() {
                e.swap(0, 1);
            }
        }
        for node in &mut out.nodes {
            node.normal = -node.normal;
        }
        out
    }
}
