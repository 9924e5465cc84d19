//! Helpers shared by the integration suites and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{SMatrix, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shellfem::assembly::{assemble, build_dof_map, LoadCase, Solution};
use shellfem::element::{
    element_stiffness, project_membrane, project_shear, reduced_membrane_at, reduced_shear_at, ElementFields,
    ElementMatrix, Formulation, Material, MEMBRANE_EDGE_POINTS, SHEAR_TYING_POINTS,
};
use shellfem::geometry::shape::GAUSS_2X2;
use shellfem::geometry::{straighten_element, ElementGeometry};
use shellfem::girkmann::{run_benchmark, run_case, run_cases, Case, GirkmannConstants, QUANTITY_NAMES};
use shellfem::mesh::{Node, Provenance, QuadElement, SurfaceMesh};
use shellfem::Vec3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The five formulations of the convergence tables.
pub fn all_formulations() -> Vec<Formulation> {
    let mut out: Vec<Formulation> =
        ["disp4", "mitc4c", "mitc4s"].iter().map(|n| Formulation::by_name(n, None).unwrap()).collect();
    out.extend(["mitc4c", "mitc4s"].iter().map(|n| Formulation::by_name(n, Some(0.2)).unwrap()));
    out
}

pub fn material() -> Material {
    Material::new(2.0e11, 0.3, 0.05).unwrap()
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Strictly convex quadrilateral: corners of a square jittered by at most
/// `jitter` of the side, counter-clockwise.
pub fn random_convex_quad(rng: &mut ChaCha8Rng, jitter: f64) -> [Vector2<f64>; 4] {
    loop {
        let base = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        let scale = rng.random_range(0.3..3.0);
        let stretch = rng.random_range(0.5..2.0);
        let pts: [Vector2<f64>; 4] = std::array::from_fn(|a| {
            let (x, y) = base[a];
            Vector2::new(
                scale * stretch * (x + jitter * rng.random_range(-1.0..1.0)),
                scale * (y + jitter * rng.random_range(-1.0..1.0)),
            )
        });
        let convex = (0..4).all(|a| {
            let (p, q, r) = (pts[a], pts[(a + 1) % 4], pts[(a + 2) % 4]);
            let (u, v) = (q - p, r - q);
            u.x * v.y - u.y * v.x > 1e-3 * scale * scale
        });
        if convex {
            return pts;
        }
    }
}

pub fn flat_element(pts: &[Vector2<f64>; 4]) -> (ElementGeometry, [Vec3; 4]) {
    let positions = pts.map(|p| Vec3::new(p.x, p.y, 0.0));
    (straighten_element(&positions).unwrap(), [Vec3::z(); 4])
}

/// Element cut from a sphere of radius `r` around the pole, with analytic
/// normals; `pts` are tangent-plane coordinates.
pub fn spherical_element(pts: &[Vector2<f64>; 4], r: f64) -> (ElementGeometry, [Vec3; 4]) {
    let positions = pts.map(|p| {
        let d = Vec3::new(p.x, p.y, r);
        d * (r / d.norm())
    });
    let normals = positions.map(|p| p.normalize());
    (straighten_element(&positions).unwrap(), normals)
}

pub fn stiffness(form: &Formulation, geom: &ElementGeometry, normals: &[Vec3; 4], mat: &Material) -> ElementMatrix {
    element_stiffness(form, &ElementFields { geom, normals }, mat).unwrap()
}

pub fn symmetric_eigenvalues(k: &ElementMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(*k).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn numerical_rank(k: &ElementMatrix) -> usize {
    let ev = symmetric_eigenvalues(k);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ev.iter().filter(|v| v.abs() > 1e-9 * max).count()
}

/// `‖K − Kᵀ‖ / ‖K‖` of the unsymmetrized Gauss sum, worst over random
/// curved quads.
pub fn stiffness_symmetry_error(form: &Formulation, seed: u64, samples: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let pts = random_convex_quad(&mut rng, 0.3);
        let r = rng.random_range(5.0..50.0);
        let (geom, normals) = spherical_element(&pts, r);
        let k = stiffness(form, &geom, &normals, &material());
        // element_stiffness symmetrizes; check that the raw sum already is
        let raw = raw_stiffness(form, &geom, &normals, &material());
        worst = worst.max((raw - raw.transpose()).norm() / raw.norm());
        worst = worst.max((k - k.transpose()).norm() / k.norm());
    }
    worst
}

/// Gauss sum without the final symmetrization.
pub fn raw_stiffness(form: &Formulation, geom: &ElementGeometry, normals: &[Vec3; 4], mat: &Material) -> ElementMatrix {
    let fields = ElementFields { geom, normals };
    let (ops, dets) = shellfem::element::gauss_operators(form, &fields).unwrap();
    let dm = mat.membrane_matrix();
    let db = mat.bending_matrix();
    let g = match form.stabilization {
        Some(alpha) => shellfem::element::stabilized_shear_modulus(mat, geom.size, alpha),
        None => mat.shear_modulus(),
    };
    let mut k = ElementMatrix::zeros();
    for (op, det) in ops.iter().zip(dets) {
        k += op.membrane.transpose() * (dm * det) * op.membrane;
        k += op.bending.transpose() * (db * det) * op.bending;
        k += op.shear.transpose() * op.shear * (g * mat.thickness * det);
    }
    k
}

pub fn flat_rectangle_rank(form: &Formulation) -> usize {
    let pts = [Vector2::new(0.0, 0.0), Vector2::new(2.0, 0.0), Vector2::new(2.0, 1.0), Vector2::new(0.0, 1.0)];
    let (geom, normals) = flat_element(&pts);
    numerical_rank(&stiffness(form, &geom, &normals, &material()))
}

fn parallelogram(rng: &mut ChaCha8Rng) -> [Vector2<f64>; 4] {
    let a = Vector2::new(rng.random_range(0.5..2.0), rng.random_range(-0.3..0.3));
    let b = Vector2::new(rng.random_range(-0.6..0.6), rng.random_range(0.5..2.0));
    let o = Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    [o, o + a, o + a + b, o + b]
}

/// Worst `(idempotence, constant preservation)` deviations of the shear
/// projector on random convex quads and of the membrane projector on
/// parallelograms (idempotence) and random convex quads (constants).
pub struct ProjectorErrors {
    pub shear_idempotence: f64,
    pub shear_constant: f64,
    pub membrane_idempotence: f64,
    pub membrane_constant: f64,
}

pub fn projector_errors(seed: u64, samples: usize) -> ProjectorErrors {
    let mut rng = rng(seed);
    let mut out =
        ProjectorErrors { shear_idempotence: 0.0, shear_constant: 0.0, membrane_idempotence: 0.0, membrane_constant: 0.0 };
    for _ in 0..samples {
        let quad = random_convex_quad(&mut rng, 0.35);
        let (geom, _) = flat_element(&quad);

        let tying: [SMatrix<f64, 2, 1>; 4] =
            std::array::from_fn(|_| SMatrix::<f64, 2, 1>::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let once = project_shear(&geom, &tying);
        let resampled: [SMatrix<f64, 2, 1>; 4] = std::array::from_fn(|k| {
            let (x, y) = SHEAR_TYING_POINTS[k];
            reduced_shear_at(&geom, &tying, x, y)
        });
        let twice = project_shear(&geom, &resampled);
        let scale = once.iter().map(|m| m.norm()).fold(0.0, f64::max);
        for g in 0..4 {
            out.shear_idempotence = out.shear_idempotence.max((twice[g] - once[g]).norm() / scale);
        }
        let c = SMatrix::<f64, 2, 1>::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for g in project_shear(&geom, &[c; 4]) {
            out.shear_constant = out.shear_constant.max((g - c).norm() / c.norm());
        }

        let c = SMatrix::<f64, 3, 1>::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for g in project_membrane(&geom, &[[c; 2]; 4], &[c; 4]) {
            out.membrane_constant = out.membrane_constant.max((g - c).norm() / c.norm());
        }

        let (pgeom, _) = flat_element(&parallelogram(&mut rng));
        let random3 = |rng: &mut ChaCha8Rng| {
            SMatrix::<f64, 3, 1>::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        };
        let edge: [[SMatrix<f64, 3, 1>; 2]; 4] = std::array::from_fn(|_| [random3(&mut rng), random3(&mut rng)]);
        let area: [SMatrix<f64, 3, 1>; 4] = std::array::from_fn(|_| random3(&mut rng));
        let once = project_membrane(&pgeom, &edge, &area);
        let edge2: [[SMatrix<f64, 3, 1>; 2]; 4] = std::array::from_fn(|s| {
            std::array::from_fn(|k| {
                let (x, y) = MEMBRANE_EDGE_POINTS[s][k];
                reduced_membrane_at(&pgeom, &edge, &area, x, y)
            })
        });
        let area2: [SMatrix<f64, 3, 1>; 4] = std::array::from_fn(|g| {
            let (x, y) = GAUSS_2X2[g];
            reduced_membrane_at(&pgeom, &edge, &area, x, y)
        });
        let twice = project_membrane(&pgeom, &edge2, &area2);
        let scale = once.iter().map(|m| m.norm()).fold(0.0, f64::max);
        for g in 0..4 {
            out.membrane_idempotence = out.membrane_idempotence.max((twice[g] - once[g]).norm() / scale);
        }
    }
    out
}

/// Flat `nx × ny` mesh of `[0, lx] × [0, ly]` in the plane `z = 0` with the
/// interior nodes displaced by up to `distortion` of the spacing.
pub fn flat_mesh(nx: usize, ny: usize, lx: f64, ly: f64, distortion: f64, seed: u64) -> SurfaceMesh {
    let mut rng = rng(seed);
    let (hx, hy) = (lx / nx as f64, ly / ny as f64);
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let interior = i > 0 && i < nx && j > 0 && j < ny;
            let (dx, dy) = if interior {
                (distortion * hx * rng.random_range(-1.0..1.0), distortion * hy * rng.random_range(-1.0..1.0))
            } else {
                (0.0, 0.0)
            };
            let id = nodes.len();
            nodes.push(Node { id, position: Vec3::new(i as f64 * hx + dx, j as f64 * hy + dy, 0.0), normal: Vec3::z() });
        }
    }
    let at = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            elements.push(QuadElement { nodes: [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)] });
        }
    }
    SurfaceMesh { nodes, elements, tags: BTreeMap::new(), provenance: Provenance::Imported, surface: None }
}

/// Flat mesh of parallelograms: a graded tensor grid under a shear map.
pub fn parallelogram_mesh() -> SurfaceMesh {
    let xs = [0.0, 0.3, 0.5, 1.1, 1.4, 2.0];
    let ys = [0.0, 0.2, 0.7, 0.9, 1.5];
    let mut mesh = flat_mesh(xs.len() - 1, ys.len() - 1, 1.0, 1.0, 0.0, 0);
    for (k, node) in mesh.nodes.iter_mut().enumerate() {
        let (x, y) = (xs[k % xs.len()], ys[k / xs.len()]);
        node.position = Vec3::new(x + 0.4 * y, 0.2 * x + y, 0.0);
    }
    mesh
}

/// Membrane patch test: a linear in-plane displacement (constant strain,
/// no curvature or shear). Returns the largest residual `|(K d)_i|` over
/// interior nodes, relative to `max |K_ij| · max |d_k|`.
pub fn membrane_patch_residual(mesh: &SurfaceMesh, form: &Formulation) -> f64 {
    let dofs = build_dof_map(mesh, &[]).unwrap();
    let system = assemble(mesh, &dofs, form, &material(), &[LoadCase::default()]).unwrap();
    let mut d = vec![0.0; dofs.n_dof];
    for (i, node) in mesh.nodes.iter().enumerate() {
        let p = node.position;
        let u = Vec3::new(1e-3 * p.x + 4e-4 * p.y, -2e-4 * p.x + 7e-4 * p.y, 0.0);
        let f = &dofs.frames[i];
        let vals = [u.dot(&f.g1), u.dot(&f.g2), 0.0, 0.0, 0.0];
        for (slot, v) in dofs.index[i].iter().zip(vals) {
            if let Some(k) = slot {
                d[*k] = v;
            }
        }
    }
    let mut kd = vec![0.0; dofs.n_dof];
    system.matrix.mul_vec(&d, &mut kd);
    let kmax = system.matrix.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = boundary_nodes(mesh);
    let mut worst = 0.0f64;
    for (i, slots) in dofs.index.iter().enumerate() {
        if boundary.contains(&i) {
            continue;
        }
        for k in slots.iter().flatten() {
            worst = worst.max(kd[*k].abs() / (kmax * dmax));
        }
    }
    worst
}

/// Nodes on edges that belong to a single element.
pub fn boundary_nodes(mesh: &SurfaceMesh) -> std::collections::BTreeSet<usize> {
    mesh.edge_elements()
        .into_iter()
        .filter(|(_, els)| els.len() == 1)
        .flat_map(|((a, b), _)| [a, b])
        .collect()
}

fn max_abs_difference(a: &Solution, b: &Solution) -> (f64, f64) {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in a.nodal.iter().zip(&b.nodal) {
        for k in 0..5 {
            diff = diff.max((x[k] - y[k]).abs());
            scale = scale.max(x[k].abs()).max(y[k].abs());
        }
    }
    (diff, scale)
}

/// Case 4 solved directly against Case 1 + R·Case 2 + M·Case 3, relative
/// to the largest nodal value.
pub fn superposition_error(mesh: &SurfaceMesh, form: &Formulation, c: &GirkmannConstants) -> f64 {
    let result = run_benchmark(mesh, form, c).unwrap();
    let direct = run_case(mesh, form, c, Case::Combined(result.reactions)).unwrap();
    let sols = run_cases(mesh, form, c, &[Case::DeadLoad, Case::Force(1.0), Case::Moment(1.0)]).unwrap();
    let sum = sols[0].add_scaled(&sols[1], result.reactions.r).add_scaled(&sols[2], result.reactions.m);
    let (diff, scale) = max_abs_difference(&direct, &sum);
    diff / scale
}

/// Every reported scalar of the benchmark, by name.
pub fn reported_quantities(mesh: &SurfaceMesh, form: &Formulation, c: &GirkmannConstants) -> Vec<(String, f64)> {
    let r = run_benchmark(mesh, form, c).unwrap();
    let mut out = Vec::new();
    for (k, name) in QUANTITY_NAMES.iter().enumerate() {
        out.push((format!("shell_{name}"), r.shell.values()[k]));
        out.push((format!("ring_{name}"), r.ring.values()[k]));
    }
    out.push(("R".into(), r.reactions.r));
    out.push(("M".into(), r.reactions.m));
    out.push(("Q".into(), r.reactions.q));
    out
}

/// Largest relative change of any reported quantity when `E` is multiplied
/// by `factor`.
pub fn e_invariance_error(mesh: &SurfaceMesh, form: &Formulation, factor: f64) -> f64 {
    let c = GirkmannConstants::default();
    let scaled = GirkmannConstants { young: c.young * factor, ..c };
    let a = reported_quantities(mesh, form, &c);
    let b = reported_quantities(mesh, form, &scaled);
    a.iter().zip(&b).map(|((_, x), (_, y))| relative_difference(*x, *y)).fold(0.0, f64::max)
}
