//! Regular three-patch meshes of the quarter cap.
//!
//! The 90° sector is a curvilinear triangle with corners at the pole and at
//! the two ends of the junction arc. It is split into three quadrilateral
//! patches through the edge midpoints and an interior point on the 45°
//! meridian. Patches are laid out in the azimuthal-equidistant plane
//! `(φ cos θ, φ sin θ)` (colatitude φ, azimuth θ) and mapped to the sphere.
//!
//! `N = 2^k · m` with `m` odd: the base mesh has `m × m` elements per patch
//! (transfinite interpolation of the patch boundary curves), followed by `k`
//! midpoint refinements. Hence `refine(generate(N)) == generate(2N)`.

use std::collections::{BTreeMap, HashMap};

use super::{DomeGeometry, Node, NormalMode, Provenance, QuadElement, SurfaceMesh};
use super::{JUNCTION, SYMMETRY_LEFT, SYMMETRY_RIGHT};
use crate::{Error, Result, Vec3};

/// Colatitude of the centroid of the three sector corners (pole and the two
/// junction ends) projected onto the sphere, as a fraction of the opening
/// angle. This is the interior point of the default layout.
pub fn corner_centroid_fraction(opening_angle: f64) -> f64 {
    let (s, c) = opening_angle.sin_cos();
    (std::f64::consts::SQRT_2 * s).atan2(1.0 + 2.0 * c) / opening_angle
}

type P2 = (f64, f64);

#[derive(Clone, Copy)]
enum Curve {
    Segment(P2, P2),
    Arc { radius: f64, from: f64, to: f64 },
}

impl Curve {
    fn eval(&self, s: f64) -> P2 {
        match *self {
            Curve::Segment(a, b) => ((1.0 - s) * a.0 + s * b.0, (1.0 - s) * a.1 + s * b.1),
            Curve::Arc { radius, from, to } => {
                let th = (1.0 - s) * from + s * to;
                (radius * th.cos(), radius * th.sin())
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Corner(usize),
    Edge(usize, usize),
    Interior(usize, usize, usize),
}

struct PatchEdge {
    curve: usize,
    reversed: bool,
}

struct Patch {
    corners: [usize; 4],
    // bottom (c0→c1), right (c1→c2), top (c3→c2), left (c0→c3)
    edges: [PatchEdge; 4],
}

pub fn generate_quarter_cap_regular(n: i64, geom: &DomeGeometry) -> Result<SurfaceMesh> {
    generate_quarter_cap_with_center(n, geom, corner_centroid_fraction(geom.opening_angle))
}

/// Like [`generate_quarter_cap_regular`] with an explicit radius (fraction of
/// the opening angle) for the interior patch corner.
pub fn generate_quarter_cap_with_center(n: i64, geom: &DomeGeometry, center: f64) -> Result<SurfaceMesh> {
    if n <= 0 {
        return Err(Error::invalid(format!("elements per edge must be positive, got {n}")));
    }
    if !(center > 0.2 && center < 0.9) {
        return Err(Error::invalid(format!("interior patch point fraction {center} outside (0.2, 0.9)")));
    }
    let n = n as usize;
    let k = n.trailing_zeros();
    let mut mesh = base_mesh(n >> k, geom, center)?;
    for _ in 0..k {
        mesh = mesh.refine()?;
    }
    Ok(mesh)
}

fn base_mesh(m: usize, geom: &DomeGeometry, center: f64) -> Result<SurfaceMesh> {
    let a = geom.opening_angle;
    let (s45, c45) = std::f64::consts::FRAC_PI_4.sin_cos();
    // corners: pole, A (θ=0), B (θ=90°), mid P-A, mid P-B, mid A-B, interior
    let pts: [P2; 7] = [
        (0.0, 0.0),
        (a, 0.0),
        (0.0, a),
        (0.5 * a, 0.0),
        (0.0, 0.5 * a),
        (a * c45, a * s45),
        (center * a * c45, center * a * s45),
    ];
    let (pole, ca, cb, mpa, mpb, mab, ctr) = (0, 1, 2, 3, 4, 5, 6);
    let half = std::f64::consts::FRAC_PI_4;
    let curves = [
        Curve::Segment(pts[pole], pts[mpa]),
        Curve::Segment(pts[mpa], pts[ca]),
        Curve::Arc { radius: a, from: 0.0, to: half },
        Curve::Arc { radius: a, from: half, to: 2.0 * half },
        Curve::Segment(pts[cb], pts[mpb]),
        Curve::Segment(pts[mpb], pts[pole]),
        Curve::Segment(pts[ctr], pts[mpa]),
        Curve::Segment(pts[ctr], pts[mab]),
        Curve::Segment(pts[ctr], pts[mpb]),
    ];
    let boundary_tag = |curve: usize| match curve {
        0 | 1 => Some(SYMMETRY_LEFT),
        2 | 3 => Some(JUNCTION),
        4 | 5 => Some(SYMMETRY_RIGHT),
        _ => None,
    };
    let pe = |curve, reversed| PatchEdge { curve, reversed };
    let patches = [
        Patch { corners: [pole, mpa, ctr, mpb], edges: [pe(0, false), pe(6, true), pe(8, true), pe(5, true)] },
        Patch { corners: [mpa, ca, mab, ctr], edges: [pe(1, false), pe(2, false), pe(7, false), pe(6, true)] },
        Patch { corners: [mpb, ctr, mab, cb], edges: [pe(8, true), pe(7, false), pe(3, true), pe(4, true)] },
    ];

    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut plane: Vec<P2> = Vec::new();
    let mut elements = Vec::new();
    let mut tags: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();

    for (pi, patch) in patches.iter().enumerate() {
        let corner_pts: [P2; 4] = std::array::from_fn(|c| pts[patch.corners[c]]);
        let edge_at = |side: usize, s: f64| -> P2 {
            let e = &patch.edges[side];
            curves[e.curve].eval(if e.reversed { 1.0 - s } else { s })
        };
        let mut grid = vec![vec![0usize; m + 1]; m + 1];
        for j in 0..=m {
            for i in 0..=m {
                let key = match (i, j) {
                    (0, 0) => Key::Corner(patch.corners[0]),
                    (i, 0) if i == m => Key::Corner(patch.corners[1]),
                    (i, j) if i == m && j == m => Key::Corner(patch.corners[2]),
                    (0, j) if j == m => Key::Corner(patch.corners[3]),
                    (i, 0) => edge_key(&patch.edges[0], i, m),
                    (i, j) if j == m => edge_key(&patch.edges[2], i, m),
                    (0, j) => edge_key(&patch.edges[3], j, m),
                    (i, j) if i == m => edge_key(&patch.edges[1], j, m),
                    (i, j) => Key::Interior(pi, i, j),
                };
                let id = *index.entry(key).or_insert_with(|| {
                    let p = match key {
                        Key::Corner(c) => pts[c],
                        Key::Edge(curve, k) => curves[curve].eval(k as f64 / m as f64),
                        Key::Interior(..) => {
                            let s = i as f64 / m as f64;
                            let t = j as f64 / m as f64;
                            coons(s, t, &corner_pts, &edge_at)
                        }
                    };
                    plane.push(p);
                    plane.len() - 1
                });
                grid[i][j] = id;
            }
        }
        for j in 0..m {
            for i in 0..m {
                let quad = [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]];
                elements.push(QuadElement { nodes: quad });
                let sides = [(0, j == 0), (1, i + 1 == m), (2, j + 1 == m), (3, i == 0)];
                for (side, on_patch_edge) in sides {
                    if !on_patch_edge {
                        continue;
                    }
                    if let Some(tag) = boundary_tag(patch.edges[side].curve) {
                        let edge = [quad[side], quad[(side + 1) % 4]];
                        tags.entry(tag.to_string()).or_default().push(edge);
                    }
                }
            }
        }
    }

    let nodes = plane
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| {
            let phi = x.hypot(y);
            let theta = if phi == 0.0 { 0.0 } else { y.atan2(x) };
            let mut position = geom.point(phi, theta);
            if x == 0.0 {
                position.x = 0.0;
            }
            Node { id, position, normal: Vec3::zeros() }
        })
        .collect();
    let mesh = SurfaceMesh { nodes, elements, tags, provenance: Provenance::Analytic, surface: Some(*geom) }
        .compute_nodal_normals(NormalMode::Analytic)?;
    mesh.validate()?;
    Ok(mesh)
}

fn edge_key(edge: &PatchEdge, local: usize, m: usize) -> Key {
    Key::Edge(edge.curve, if edge.reversed { m - local } else { local })
}

fn coons(s: f64, t: f64, c: &[P2; 4], edge_at: &dyn Fn(usize, f64) -> P2) -> P2 {
    let bottom = edge_at(0, s);
    let top = edge_at(2, s);
    let left = edge_at(3, t);
    let right = edge_at(1, t);
    let blend = |f: fn(P2) -> f64| {
        (1.0 - t) * f(bottom) + t * f(top) + (1.0 - s) * f(left) + s * f(right)
            - ((1.0 - s) * (1.0 - t) * f(c[0]) + s * (1.0 - t) * f(c[1]) + s * t * f(c[2]) + (1.0 - s) * t * f(c[3]))
    };
    (blend(|p| p.0), blend(|p| p.1))
}
