//! The Girkmann dome: a spherical cap joined to a foot ring under dead load.
//!
//! The shell and the ring are analysed separately and glued through the
//! horizontal junction force `R` and moment `M` (positive when acting on the
//! shell). With `Λ` the horizontal junction displacement and `Ψ` the junction
//! rotation, each part satisfies
//!
//! ```text
//! EΛ = EΛ₀ + k₁₁ R + k₁₂ M
//! EΨ = EΨ₀ + k₂₁ R + k₂₂ M
//! ```
//!
//! and equating shell and ring values yields `R` and `M`.

mod profile;
mod ring;

pub use profile::{
    moment_profile, second_difference_sign_changes, symmetry_deviation, total_variation, ProfileEdge,
    PROFILE_RANGE_DEG,
};
pub use ring::{gauss_legendre, polygon_integral, ring_compliance, ring_compliance_with, ring_section, RingModel};

use std::sync::Arc;

use crate::assembly::{
    assemble, build_dof_map, junction_averages, DofMap, LoadProjection, radial_direction, solve, LineLoad, LoadCase, Solution, SymmetryPlane,
};
use crate::element::{Formulation, Material};
use crate::mesh::{
    azimuth, generate_quarter_cap_regular, DomeGeometry, SurfaceMesh, JUNCTION, SYMMETRY_LEFT, SYMMETRY_RIGHT,
};
use crate::{Error, Result, Vec3};

/// Problem data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirkmannConstants {
    /// `ρ₀` (m).
    pub base_radius: f64,
    /// `α` (rad).
    pub opening_angle: f64,
    /// `t` (m).
    pub thickness: f64,
    /// Weight density `F` (N/m³).
    pub weight_density: f64,
    /// `E` (Pa).
    pub young: f64,
    pub poisson: f64,
    /// Ring base width (m).
    pub ring_width: f64,
    /// Ring outer-face height (m).
    pub ring_height: f64,
}

impl Default for GirkmannConstants {
    fn default() -> Self {
        GirkmannConstants {
            base_radius: 15.0,
            opening_angle: 40f64.to_radians(),
            thickness: 0.06,
            weight_density: 32_690.0,
            young: 20.59e9,
            poisson: 0.0,
            ring_width: 0.60,
            ring_height: 0.50,
        }
    }
}

impl GirkmannConstants {
    pub fn sphere_radius(&self) -> f64 {
        self.base_radius / self.opening_angle.sin()
    }

    /// Vertical surface load density `g = F t` (N/m²).
    pub fn surface_load(&self) -> f64 {
        self.weight_density * self.thickness
    }

    /// Meridional membrane force at the junction from vertical equilibrium,
    /// `N₀ = −g r₀ / (1 + cos α)`.
    pub fn normal_force(&self) -> f64 {
        -self.surface_load() * self.sphere_radius() / (1.0 + self.opening_angle.cos())
    }

    pub fn dome(&self) -> Result<DomeGeometry> {
        DomeGeometry::new(self.base_radius, self.opening_angle, self.thickness)
    }

    pub fn material(&self) -> Result<Material> {
        Material::new(self.young, self.poisson, self.thickness)
    }

    /// Meridional tangent at the junction point above `p`, pointing away
    /// from the pole: `cos α ê_ρ − sin α ê_z`.
    pub fn junction_meridian(&self, p: &Vec3) -> Vec3 {
        let (s, c) = self.opening_angle.sin_cos();
        radial_direction(p) * c - Vec3::z() * s
    }
}

/// `N₀` for the given constants.
pub fn normal_force(c: &GirkmannConstants) -> f64 {
    c.normal_force()
}

/// The six compliance quantities of one part (shell or ring).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceSet {
    /// `EΛ₀` (N/m).
    pub e_lambda0: f64,
    pub k11: f64,
    /// 1/m.
    pub k12: f64,
    /// `EΨ₀` (N/m²).
    pub e_psi0: f64,
    /// 1/m.
    pub k21: f64,
    /// 1/m².
    pub k22: f64,
}

/// Shell compliances of the axisymmetric reference solution.
pub const REFERENCE_SHELL: ComplianceSet =
    ComplianceSet { e_lambda0: -2.300e6, k11: 8.345e3, k12: 1.477e4, e_psi0: -9.338e5, k21: -1.477e4, k22: -5.113e4 };

/// Published rigid-section ring compliances.
pub const REFERENCE_RING: ComplianceSet =
    ComplianceSet { e_lambda0: 1.363e7, k11: -2683.0, k12: 8418.0, e_psi0: -6.949e6, k21: -8418.0, k22: 3.696e4 };

pub const QUANTITY_NAMES: [&str; 6] = ["EL0", "k11", "k12", "EP0", "k21", "k22"];

impl ComplianceSet {
    /// Values in the order of [`QUANTITY_NAMES`].
    pub fn values(&self) -> [f64; 6] {
        [self.e_lambda0, self.k11, self.k12, self.e_psi0, self.k21, self.k22]
    }

    /// Entry-wise ratio to a reference set.
    pub fn normalized(&self, reference: &ComplianceSet) -> [f64; 6] {
        let (a, b) = (self.values(), reference.values());
        std::array::from_fn(|k| a[k] / b[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionResult {
    /// Horizontal junction force (N/m).
    pub r: f64,
    /// Junction moment (N·m/m).
    pub m: f64,
    /// `Q = R / sin α` (N/m).
    pub q: f64,
}

/// Solves the two compatibility equations for `R` and `M`.
pub fn solve_reactions(shell: &ComplianceSet, ring: &ComplianceSet, opening_angle: f64) -> Result<ReactionResult> {
    let a11 = shell.k11 - ring.k11;
    let a12 = shell.k12 - ring.k12;
    let a21 = shell.k21 - ring.k21;
    let a22 = shell.k22 - ring.k22;
    let b1 = ring.e_lambda0 - shell.e_lambda0;
    let b2 = ring.e_psi0 - shell.e_psi0;
    let det = a11 * a22 - a12 * a21;
    let scale = (a11 * a22).abs().max((a12 * a21).abs());
    if !(det.abs() > 1e-12 * scale) || !det.is_finite() {
        return Err(Error::Benchmark("compatibility system is singular".into()));
    }
    let r = (b1 * a22 - a12 * b2) / det;
    let m = (a11 * b2 - a21 * b1) / det;
    Ok(ReactionResult { r, m, q: r / opening_angle.sin() })
}

/// Load cases of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Case {
    /// Gravity plus the membrane force `N₀` at the junction.
    DeadLoad,
    /// Horizontal junction force `R` (N/m).
    Force(f64),
    /// Junction moment `M` (N·m/m), counter-clockwise on the shell in a
    /// view with `ρ` to the right and `z` up.
    Moment(f64),
    /// Dead load plus the given reactions.
    Combined(ReactionResult),
}

impl Case {
    /// Case number 1–3 with unit reactions, or 4 with the given reactions.
    pub fn numbered(number: u8, reactions: Option<ReactionResult>) -> Result<Case> {
        match (number, reactions) {
            (1, _) => Ok(Case::DeadLoad),
            (2, _) => Ok(Case::Force(1.0)),
            (3, _) => Ok(Case::Moment(1.0)),
            (4, Some(r)) => Ok(Case::Combined(r)),
            (4, None) => Err(Error::invalid("case 4 needs the junction reactions")),
            (n, _) => Err(Error::invalid(format!("load case {n} does not exist"))),
        }
    }
}

/// Global loads of a case.
pub fn load_case(c: &GirkmannConstants, case: Case) -> LoadCase {
    let c = *c;
    let (gravity, n0, r, m) = match case {
        Case::DeadLoad => (true, c.normal_force(), 0.0, 0.0),
        Case::Force(r) => (false, 0.0, r, 0.0),
        Case::Moment(m) => (false, 0.0, 0.0, m),
        Case::Combined(rr) => (true, c.normal_force(), rr.r, rr.m),
    };
    let density = Arc::new(move |p: &Vec3| {
        let t = c.junction_meridian(p);
        (t * n0 + radial_direction(p) * r, t * (-m))
    });
    LoadCase {
        surface_force: if gravity { Vec3::z() * -c.surface_load() } else { Vec3::zeros() },
        line_loads: vec![LineLoad { tag: JUNCTION.to_string(), density }],
        projection: LoadProjection::Nodal,
    }
}

/// Symmetry planes of a quarter model: each symmetry tag lies in a vertical
/// plane through the axis.
pub fn symmetry_planes(mesh: &SurfaceMesh) -> Result<Vec<SymmetryPlane>> {
    let mut planes = Vec::new();
    for tag in [SYMMETRY_LEFT, SYMMETRY_RIGHT] {
        let nodes = mesh.tag_nodes(tag);
        if nodes.is_empty() {
            continue;
        }
        let scale = mesh.nodes.iter().map(|n| n.position.norm()).fold(0.0, f64::max);
        let mut direction = Vec3::zeros();
        for &i in &nodes {
            let p = mesh.nodes[i].position;
            let h = Vec3::new(p.x, p.y, 0.0);
            if h.norm() > 1e-9 * scale {
                let h = h.normalize();
                // align all directions with the first one
                let sign = if direction.dot(&h) < 0.0 { -1.0 } else { 1.0 };
                direction += h * sign;
            }
        }
        if !(direction.norm() > 0.0) {
            return Err(Error::Constraint(format!("symmetry tag {tag:?} lies on the axis")));
        }
        let normal = Vec3::z().cross(&direction.normalize());
        for &i in &nodes {
            if normal.dot(&mesh.nodes[i].position).abs() > 1e-6 * scale {
                return Err(Error::Constraint(format!("symmetry tag {tag:?}: node {i} is off the plane")));
            }
        }
        planes.push(SymmetryPlane { tag: tag.to_string(), normal });
    }
    Ok(planes)
}

/// Node shared by both symmetry tags, if any.
pub fn pole_node(mesh: &SurfaceMesh) -> Option<usize> {
    let right = mesh.tag_nodes(SYMMETRY_RIGHT);
    mesh.tag_nodes(SYMMETRY_LEFT).into_iter().find(|i| right.binary_search(i).is_ok())
}

/// Symmetry constraints plus a vertical support at the pole. The free dome
/// has a rigid vertical translation; the discrete model only stiffens it at
/// `O(h²)`, so without the support the `O(h²)` imbalance of the discrete
/// dead load drives a large drift that pollutes the junction values.
pub fn dome_dofs(mesh: &SurfaceMesh) -> Result<DofMap> {
    let dofs = build_dof_map(mesh, &symmetry_planes(mesh)?)?;
    match pole_node(mesh) {
        Some(pole) => dofs.with_fixed(pole, 2),
        None => Ok(dofs),
    }
}

/// Solves several load cases with a single factorization.
pub fn run_cases(
    mesh: &SurfaceMesh,
    form: &Formulation,
    c: &GirkmannConstants,
    cases: &[Case],
) -> Result<Vec<Solution>> {
    let dofs = dome_dofs(mesh)?;
    let loads: Vec<LoadCase> = cases.iter().map(|&case| load_case(c, case)).collect();
    let system = assemble(mesh, &dofs, form, &c.material()?, &loads)?;
    solve(&system)
}

pub fn run_case(mesh: &SurfaceMesh, form: &Formulation, c: &GirkmannConstants, case: Case) -> Result<Solution> {
    Ok(run_cases(mesh, form, c, &[case])?.remove(0))
}

/// Junction `(EΛ, EΨ)` of a solution.
pub fn scaled_junction_values(solution: &Solution, mesh: &SurfaceMesh, young: f64) -> Result<(f64, f64)> {
    let (lambda, psi) = junction_averages(solution, mesh)?;
    Ok((young * lambda, young * psi))
}

/// Shell compliances from the dead-load, unit-force and unit-moment cases.
pub fn shell_compliance(
    mesh: &SurfaceMesh,
    form: &Formulation,
    c: &GirkmannConstants,
) -> Result<(ComplianceSet, [Solution; 3])> {
    let sols = run_cases(mesh, form, c, &[Case::DeadLoad, Case::Force(1.0), Case::Moment(1.0)])?;
    let (el0, ep0) = scaled_junction_values(&sols[0], mesh, c.young)?;
    let (k11, k21) = scaled_junction_values(&sols[1], mesh, c.young)?;
    let (k12, k22) = scaled_junction_values(&sols[2], mesh, c.young)?;
    let set = ComplianceSet { e_lambda0: el0, k11, k12, e_psi0: ep0, k21, k22 };
    let [a, b, d]: [Solution; 3] = sols.try_into().expect("three cases");
    Ok((set, [a, b, d]))
}

/// Full pipeline output.
#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub shell: ComplianceSet,
    pub ring: ComplianceSet,
    pub reactions: ReactionResult,
    /// Case 1–3 solutions and the combined case.
    pub solutions: [Solution; 4],
    pub profile: Vec<(f64, f64)>,
}

/// Shell compliances → ring compliances → reactions → combined case →
/// moment profile along the first symmetry edge.
pub fn run_benchmark(mesh: &SurfaceMesh, form: &Formulation, c: &GirkmannConstants) -> Result<BenchmarkResult> {
    let (shell, cases) = shell_compliance(mesh, form, c)?;
    let (ring, _) = ring_compliance(c)?;
    let reactions = solve_reactions(&shell, &ring, c.opening_angle)?;
    let [s1, s2, s3] = cases;
    // the system is linear: superpose instead of refactorizing
    let combined = s1.add_scaled(&s2, reactions.r).add_scaled(&s3, reactions.m);
    let profile = moment_profile(&combined, mesh, ProfileEdge::Left, c)?;
    Ok(BenchmarkResult { shell, ring, reactions, solutions: [s1, s2, s3, combined], profile })
}

/// Where the meshes of a convergence study come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSequence {
    Regular,
    Perturbed { magnitude: f64, seed: u64 },
}

impl MeshSequence {
    /// Mesh with `n` elements along each edge of the quarter domain. Every
    /// domain edge spans two patch edges, so `n` must be even and the
    /// generator receives `n / 2`.
    pub fn build(&self, n: i64, dome: &DomeGeometry) -> Result<SurfaceMesh> {
        if n <= 0 || n % 2 != 0 {
            return Err(Error::invalid(format!("elements per domain edge must be even and positive, got {n}")));
        }
        let mesh = generate_quarter_cap_regular(n / 2, dome)?;
        match *self {
            MeshSequence::Regular => Ok(mesh),
            MeshSequence::Perturbed { magnitude, seed } => mesh.perturb(magnitude, seed),
        }
    }
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub formulation: String,
    pub n: i64,
    pub quantity: &'static str,
    pub raw: f64,
    pub normalized: f64,
}

/// Shell compliances for every formulation and mesh size, normalized by the
/// reference shell values.
pub fn convergence_table(
    forms: &[Formulation],
    sequence: MeshSequence,
    ns: &[i64],
    c: &GirkmannConstants,
) -> Result<Vec<TableRow>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("mesh sizes must be strictly ascending"));
    }
    let dome = c.dome()?;
    let mut rows = Vec::new();
    for form in forms {
        for &n in ns {
            let mesh = sequence.build(n, &dome)?;
            let (set, _) = shell_compliance(&mesh, form, c)?;
            let normalized = set.normalized(&REFERENCE_SHELL);
            for (k, name) in QUANTITY_NAMES.iter().enumerate() {
                rows.push(TableRow {
                    formulation: form.label(),
                    n,
                    quantity: name,
                    raw: set.values()[k],
                    normalized: normalized[k],
                });
            }
        }
    }
    Ok(rows)
}

/// Azimuth of a point in degrees, for diagnostics.
pub fn azimuth_deg(p: &Vec3) -> f64 {
    azimuth(p).to_degrees()
}
