//! Configurable end-to-end pipeline and the preset experiments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_laplacian, assemble_stiffness_cg, assemble_to, coeff_a0, discretize, Method, Operators};
use crate::coherent::{
    extract_level_set, level_velocity, line_search_c, mean_curve_distance, CurveTopology, LevelRange,
    LevelSetCurve, LevelVelocityField, LineSearchOptions,
};
use crate::dynamics::{DynamicsModel, ModelSpec};
use crate::error::{Stage, StageExt};
use crate::export;
use crate::mesh::{gauss_rule, grid_mesh, BoundaryCondition, Domain, TriMesh};
use crate::response::{
    cluster, m_norm, predict, relative_error, solve_response_auto, track, validate_fd, FdRow, ResponsePair,
    CLUSTER_TOL,
};
use crate::sparse::SparseSymMatrix;
use crate::spectral::{canonicalize_cluster, check_gap, default_target, eigs_with, EigOptions, EigenPair, Spectrum};
use crate::{Error, Result};

/// Regular grid mesh; `nx × ny` cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
    /// Defaults to the model's natural domain.
    #[serde(default)]
    pub extents: Option<Domain>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    /// Number of eigenpairs to compute.
    pub k: usize,
    /// Index of the eigenpair to analyse; defaults to the first nontrivial one.
    pub target: Option<usize>,
    #[serde(flatten)]
    pub options: EigOptions,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            k: 6,
            target: None,
            options: EigOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearchConfig {
    pub enabled: bool,
    pub grid_size: usize,
    pub range: LevelRange,
    pub subdivisions: usize,
    pub topology: CurveTopology,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        let o = LineSearchOptions::default();
        LineSearchConfig {
            enabled: true,
            grid_size: o.grid_size,
            range: o.range,
            subdivisions: o.subdivisions,
            topology: CurveTopology::Contractible,
        }
    }
}

impl LineSearchConfig {
    pub fn options(&self) -> LineSearchOptions {
        LineSearchOptions {
            grid_size: self.grid_size,
            range: self.range,
            subdivisions: self.subdivisions,
            topology: self.topology,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_degree")]
    pub quadrature_degree: u32,
    #[serde(default)]
    pub boundary: BoundaryCondition,
    #[serde(default)]
    pub eigen: EigenConfig,
    /// Parameter offsets for the first-order prediction.
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Re-solve the eigenproblem at each `eps` to measure the prediction error.
    #[serde(default)]
    pub solve_true: bool,
    /// Offsets used by the finite-difference check.
    #[serde(default = "default_fd_eps")]
    pub fd_eps: Vec<f64>,
    #[serde(default)]
    pub line_search: LineSearchConfig,
    /// Gradient magnitude below which `v_level` is masked; defaults to `1e−3·max|∇u₀|`.
    #[serde(default)]
    pub grad_floor: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_degree() -> u32 {
    2
}

fn default_fd_eps() -> Vec<f64> {
    vec![1e-2, 1e-3]
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["standard-map", "double-gyre"];

/// Built-in configurations reproducing the two reference experiments.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "standard-map" => Ok(ExperimentConfig {
            model: ModelSpec::standard_map(0.98),
            mesh: MeshConfig {
                nx: 100,
                ny: 100,
                periodic: true,
                extents: None,
            },
            method: Method::Cg,
            quadrature_degree: 2,
            boundary: BoundaryCondition::Neumann,
            eigen: EigenConfig::default(),
            eps: vec![0.5],
            solve_true: true,
            fd_eps: default_fd_eps(),
            line_search: LineSearchConfig::default(),
            grad_floor: None,
            output: None,
        }),
        // 100 × 100 nodes on the unit square
        "double-gyre" => Ok(ExperimentConfig {
            model: ModelSpec::double_gyre(0.0, 0.6),
            mesh: MeshConfig {
                nx: 99,
                ny: 99,
                periodic: false,
                extents: None,
            },
            method: Method::To,
            quadrature_degree: 5,
            boundary: BoundaryCondition::Neumann,
            eigen: EigenConfig::default(),
            eps: vec![0.2],
            solve_true: true,
            fd_eps: default_fd_eps(),
            line_search: LineSearchConfig::default(),
            grad_floor: None,
            output: None,
        }),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The mesh domain: explicit extents or the model's natural domain.
    pub fn domain(&self) -> Result<Domain> {
        if let Some(d) = self.mesh.extents {
            return Ok(d);
        }
        match (&self.model, self.mesh.periodic) {
            (ModelSpec::StandardMap { .. }, _) => Ok(Domain::torus(std::f64::consts::TAU, std::f64::consts::TAU)),
            (ModelSpec::DoubleGyre { .. }, _) => Ok(Domain::rectangle([0.0, 0.0], [1.0, 1.0])),
            (ModelSpec::Identity, true) => Ok(Domain::torus(1.0, 1.0)),
            (ModelSpec::Identity, false) => Ok(Domain::rectangle([0.0, 0.0], [1.0, 1.0])),
        }
    }

    pub fn target(&self) -> usize {
        self.eigen.target.unwrap_or_else(|| default_target(self.boundary))
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let domain = self.domain()?;
        domain.validate()?;
        if self.mesh.periodic != domain.is_periodic() {
            return Err(Error::Config(
                "mesh.periodic must match the kind of mesh.extents".into(),
            ));
        }
        if self.mesh.periodic && self.boundary == BoundaryCondition::Dirichlet {
            return Err(Error::Config(
                "Dirichlet conditions are not available on a periodic mesh".into(),
            ));
        }
        if self.mesh.nx < 2 || self.mesh.ny < 2 {
            return Err(Error::Config("mesh needs at least 2 cells per direction".into()));
        }
        if matches!(self.model, ModelSpec::StandardMap { .. }) && !self.mesh.periodic {
            return Err(Error::Config("the standard map lives on the torus; set mesh.periodic".into()));
        }
        if matches!(self.model, ModelSpec::DoubleGyre { .. }) && self.mesh.periodic {
            return Err(Error::Config("the double gyre needs a non-periodic mesh".into()));
        }
        if self.method == Method::Cg {
            gauss_rule(self.quadrature_degree).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.eigen.k == 0 || self.target() >= self.eigen.k {
            return Err(Error::Config(format!(
                "eigen.k = {} must exceed the target index {}",
                self.eigen.k,
                self.target()
            )));
        }
        if self.eps.iter().chain(&self.fd_eps).any(|e| !e.is_finite()) {
            return Err(Error::Config("eps values must be finite".into()));
        }
        if self.fd_eps.iter().any(|&e| e <= 0.0) {
            return Err(Error::Config("fd_eps values must be positive".into()));
        }
        if let Some(f) = self.grad_floor {
            if !(f >= 0.0) {
                return Err(Error::Config("grad_floor must be non-negative".into()));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<TriMesh> {
        grid_mesh(self.mesh.nx, self.mesh.ny, self.domain()?, self.mesh.periodic)
    }
}

/// The discretized problem at `ε = 0` with its analysed eigenpair.
pub struct Solved {
    pub mesh: TriMesh,
    pub model: Box<dyn DynamicsModel>,
    pub ops: Operators,
    pub spectrum: Spectrum,
    pub target: usize,
    pub multiplicity: usize,
    pub response: ResponsePair,
}

impl Solved {
    pub fn pair(&self) -> &EigenPair {
        &self.spectrum.pairs[self.target]
    }

    /// A reduced vector expanded to all degrees of freedom.
    pub fn full(&self, v: &[f64]) -> Vec<f64> {
        self.ops.dofs.expand(v)
    }
}

struct Timer {
    times: BTreeMap<String, f64>,
}

impl Timer {
    fn time<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
        // no clock on wasm32-unknown-unknown; stages report zero there
        let start = (!cfg!(all(target_arch = "wasm32", target_os = "unknown"))).then(Instant::now);
        let out = f().stage(stage);
        *self.times.entry(stage.to_string()).or_insert(0.0) += start.map_or(0.0, |t| t.elapsed().as_secs_f64());
        out
    }
}

/// Eigenpairs at parameter offset `eps` on the reduced DOF set.
fn perturbed_pairs(config: &ExperimentConfig, mesh: &TriMesh, ops: &Operators, k: usize, eps: f64) -> Result<Vec<EigenPair>> {
    let model = config.model.build(eps);
    let stiffness = match config.method {
        Method::Cg => assemble_stiffness_cg(mesh, &coeff_a0(model.as_ref()), &gauss_rule(config.quadrature_degree)?)?,
        Method::To => assemble_to(mesh, model.as_ref())?.stiffness,
    };
    let stiffness = ops.dofs.restrict_matrix(&stiffness);
    Ok(eigs_with(&stiffness, &ops.mass, k, &config.eigen.options)?.pairs)
}

fn solve_with_timer(config: &ExperimentConfig, timer: &mut Timer) -> Result<Solved> {
    config.validate()?;
    let mesh = timer.time(Stage::Mesh, || config.build_mesh())?;
    let model = timer.time(Stage::Dynamics, || Ok(config.model.build(0.0)))?;
    let ops = timer.time(Stage::Assembly, || {
        let rule = gauss_rule(config.quadrature_degree)?;
        discretize(&mesh, model.as_ref(), config.method, &rule, config.boundary)
    })?;
    let target = config.target();
    let spectrum = timer.time(Stage::Eigensolve, || {
        let mut k = config.eigen.k.min(ops.mass.dim());
        loop {
            let spectrum = eigs_with(&ops.stiffness, &ops.mass, k, &config.eigen.options)?;
            let members = cluster(&spectrum.pairs, target, CLUSTER_TOL);
            // grow k until the cluster around the target is complete
            if members.last() == Some(&(k - 1)) && k < ops.mass.dim() {
                k = (k + 4).min(ops.mass.dim());
                continue;
            }
            return Ok(spectrum);
        }
    })?;
    let mut spectrum = spectrum;
    let members = cluster(&spectrum.pairs, target, CLUSTER_TOL);
    if members.len() == 1 {
        check_gap(&spectrum.pairs, target);
    }
    canonicalize_cluster(&mut spectrum.pairs, &members, target, &ops.mass);
    let response = timer.time(Stage::Response, || {
        solve_response_auto(&ops.stiffness, &ops.mass, &ops.response, &spectrum.pairs, target)
    })?;
    Ok(Solved {
        mesh,
        model,
        ops,
        multiplicity: members.len(),
        spectrum,
        target,
        response,
    })
}

/// Assembles and solves the unperturbed problem and its linear response.
pub fn solve(config: &ExperimentConfig) -> Result<Solved> {
    let mut timer = Timer { times: BTreeMap::new() };
    solve_with_timer(config, &mut timer)
}

/// Prediction quality at one parameter offset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub eps: f64,
    /// `λ₀ + ελ̇₀`.
    pub lambda_pred: f64,
    pub lambda_true: Option<f64>,
    /// `|λ_pred − λ_true| / |λ_true|`.
    pub lambda_rel_error: Option<f64>,
    /// `‖u_ε − (u₀ + εu̇₀)‖_M / ‖u₀‖_M` with `u_ε` tracked and sign-aligned.
    pub rel_l2_error: Option<f64>,
    /// Projection of `u₀` onto the tracked eigenspace at `ε`.
    pub overlap: Option<f64>,
    /// Mean distance from the predicted level set at `c*` to the true one.
    pub level_set_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetReport {
    pub c_star: f64,
    pub h_star: f64,
    pub length: f64,
    pub image_length: f64,
    pub areas: [f64; 2],
    pub segments: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub model: String,
    pub method: Method,
    pub boundary: BoundaryCondition,
    pub n_dofs: usize,
    pub n_elements: usize,
    pub mesh_width: f64,
    pub target: usize,
    pub multiplicity: usize,
    pub spectrum: Vec<f64>,
    pub eigen_residuals: Vec<f64>,
    pub lambda0: f64,
    pub lambda_dot: f64,
    /// `ũ₀ᵀLũ₀ / ũ₀ᵀMũ₀`.
    pub lambda_dot_rayleigh: f64,
    pub response_residual: f64,
    /// `ũ₀ᵀM u̇₀`.
    pub orthogonality: f64,
    pub u_dot_norm: f64,
    pub perturbations: Vec<PerturbationReport>,
    pub level_set: Option<LevelSetReport>,
    pub masked_nodes: usize,
    pub grad_floor: f64,
    /// Wall-clock seconds per pipeline stage.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn c_star(&self) -> Option<f64> {
        self.level_set.as_ref().map(|l| l.c_star)
    }

    pub fn h_star(&self) -> Option<f64> {
        self.level_set.as_ref().map(|l| l.h_star)
    }
}

/// Everything computed by [`run`], for callers that need the fields.
pub struct RunOutput {
    pub report: RunReport,
    pub solved: Solved,
    pub u0: Vec<f64>,
    pub u_dot: Vec<f64>,
    /// `(ε, u₀ + εu̇₀, u_ε)` in full DOF numbering.
    pub predictions: Vec<(f64, Vec<f64>, Option<Vec<f64>>)>,
    pub level_set: Option<LevelSetCurve>,
    pub velocity: LevelVelocityField,
}

/// Runs the full pipeline and writes all artifacts when `config.output` is set.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    Ok(run_full(config)?.report)
}

pub fn run_full(config: &ExperimentConfig) -> Result<RunOutput> {
    let mut timer = Timer { times: BTreeMap::new() };
    let solved = solve_with_timer(config, &mut timer)?;
    let pair = solved.pair().clone();
    let m = &solved.ops.mass;
    let u0 = solved.full(&pair.u);
    let u_dot = solved.full(&solved.response.u_dot);

    let mut perturbations = Vec::new();
    let mut predictions = Vec::new();
    for &eps in &config.eps {
        let (lambda_pred, u_pred) = predict(&pair, &solved.response, eps);
        let mut rep = PerturbationReport {
            eps,
            lambda_pred,
            lambda_true: None,
            lambda_rel_error: None,
            rel_l2_error: None,
            overlap: None,
            level_set_distance: None,
        };
        let mut u_true = None;
        if config.solve_true {
            let tracked = timer.time(Stage::Perturbed, || {
                let pairs = perturbed_pairs(config, &solved.mesh, &solved.ops, solved.spectrum.pairs.len(), eps)?;
                track(&pair.u, &pairs, m).map_err(|e| match e {
                    Error::Tracking { reason, .. } => Error::Tracking { eps, reason },
                    other => other,
                })
            })?;
            rep.lambda_true = Some(tracked.lambda);
            rep.lambda_rel_error = Some((lambda_pred - tracked.lambda).abs() / tracked.lambda.abs());
            rep.rel_l2_error = Some(relative_error(&tracked.u, &u_pred, &pair.u, m));
            rep.overlap = Some(tracked.overlap);
            u_true = Some(solved.full(&tracked.u));
        }
        perturbations.push(rep);
        predictions.push((eps, solved.full(&u_pred), u_true));
    }

    let line = if config.line_search.enabled {
        let ls = timer.time(Stage::LevelSet, || {
            line_search_c(&solved.mesh, &u0, solved.model.as_ref(), &config.line_search.options())
        })?;
        Some(ls)
    } else {
        None
    };
    if let Some(ls) = &line {
        for ((_, u_pred, u_true), rep) in predictions.iter().zip(perturbations.iter_mut()) {
            if let Some(u_true) = u_true {
                let d = timer.time(Stage::LevelSet, || {
                    let a = extract_level_set(&solved.mesh, u_pred, ls.c_star)?;
                    let b = extract_level_set(&solved.mesh, u_true, ls.c_star)?;
                    Ok(mean_curve_distance(&a, &b, solved.mesh.domain()))
                })?;
                rep.level_set_distance = Some(d);
            }
        }
    }
    let velocity = timer.time(Stage::LevelSet, || level_velocity(&solved.mesh, &u0, &u_dot, config.grad_floor))?;

    let report = RunReport {
        model: config.model.name().to_owned(),
        method: config.method,
        boundary: config.boundary,
        n_dofs: solved.mesh.n_dofs(),
        n_elements: solved.mesh.triangles().len(),
        mesh_width: solved.mesh.max_edge_length(),
        target: solved.target,
        multiplicity: solved.multiplicity,
        spectrum: solved.spectrum.pairs.iter().map(|p| p.lambda).collect(),
        eigen_residuals: solved.spectrum.residuals.clone(),
        lambda0: pair.lambda,
        lambda_dot: solved.response.lambda_dot,
        lambda_dot_rayleigh: solved.ops.response.bilinear(&pair.u, &pair.u) / m.bilinear(&pair.u, &pair.u),
        response_residual: solved.response.residual,
        orthogonality: m.bilinear(&pair.u, &solved.response.u_dot),
        u_dot_norm: m_norm(&solved.response.u_dot, m),
        perturbations,
        level_set: line.as_ref().map(|ls| LevelSetReport {
            c_star: ls.c_star,
            h_star: ls.h_star,
            length: ls.curve.length,
            image_length: ls.curve.image_length,
            areas: ls.curve.areas,
            segments: ls.curve.segments.len(),
        }),
        masked_nodes: velocity.masked.iter().filter(|&&b| b).count(),
        grad_floor: velocity.grad_floor,
        timings: BTreeMap::new(),
    };
    let mut out = RunOutput {
        report,
        solved,
        u0,
        u_dot,
        predictions,
        level_set: line.map(|l| l.curve),
        velocity,
    };
    if let Some(dir) = &config.output {
        timer.time(Stage::Export, || write_outputs(dir, config, &out))?;
    }
    out.report.timings = timer.times;
    if let Some(dir) = &config.output {
        export::write_json(&dir.join("report.json"), &out.report).stage(Stage::Export)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct Scalars {
    lambda0: f64,
    lambda_dot: f64,
    eps: Option<f64>,
    lambda_pred: Option<f64>,
    lambda_true: Option<f64>,
    rel_l2_error: Option<f64>,
}

fn write_outputs(dir: &Path, config: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    let mesh = &out.solved.mesh;
    let pairs = &out.solved.spectrum.pairs;
    export::write_json(&dir.join("config.json"), config)?;
    export::write_file(dir, "spectrum.csv", |w| export::write_spectrum_csv(w, pairs))?;
    export::write_file(dir, "u0.csv", |w| export::write_field_csv(w, mesh, &[("u", &out.u0)]))?;
    for (i, p) in pairs.iter().enumerate() {
        let u = out.solved.full(&p.u);
        export::write_file(&dir.join("eigenvectors"), &format!("u{i}.csv"), |w| {
            export::write_field_csv(w, mesh, &[("u", &u)])
        })?;
    }
    let mut columns: Vec<(&str, &[f64])> = vec![("u0", &out.u0), ("u_dot", &out.u_dot)];
    if let Some((_, u_pred, u_true)) = out.predictions.first() {
        columns.push(("u_pred", u_pred));
        if let Some(t) = u_true {
            columns.push(("u_eps", t));
        }
    }
    export::write_file(dir, "response.csv", |w| export::write_field_csv(w, mesh, &columns))?;
    let first = out.report.perturbations.first();
    export::write_json(
        &dir.join("scalars.json"),
        &Scalars {
            lambda0: out.report.lambda0,
            lambda_dot: out.report.lambda_dot,
            eps: first.map(|p| p.eps),
            lambda_pred: first.map(|p| p.lambda_pred),
            lambda_true: first.and_then(|p| p.lambda_true),
            rel_l2_error: first.and_then(|p| p.rel_l2_error),
        },
    )?;
    if let Some(curve) = &out.level_set {
        export::write_file(dir, "levelset.csv", |w| export::write_levelset_csv(w, curve))?;
        for (k, (eps, u_pred, u_true)) in out.predictions.iter().enumerate() {
            let tag = if k == 0 { String::new() } else { format!("_{k}") };
            let pred = extract_level_set(mesh, u_pred, curve.c)?;
            export::write_file(dir, &format!("levelset_pred{tag}.csv"), |w| export::write_levelset_csv(w, &pred))?;
            if let Some(t) = u_true {
                let truth = extract_level_set(mesh, t, curve.c)?;
                export::write_file(dir, &format!("levelset_eps{tag}.csv"), |w| {
                    export::write_levelset_csv(w, &truth)
                })?;
            }
            log::debug!("level sets written for eps = {eps}");
        }
    }
    export::write_file(dir, "vlevel.csv", |w| export::write_vlevel_csv(w, mesh, &out.velocity))?;
    let mut scalars: Vec<(&str, &[f64])> = vec![("u0", &out.u0), ("u_dot", &out.u_dot)];
    if let Some((_, u_pred, u_true)) = out.predictions.first() {
        scalars.push(("u_pred", u_pred));
        if let Some(t) = u_true {
            scalars.push(("u_eps", t));
        }
    }
    export::write_file(dir, "mesh.vtk", |w| {
        export::write_vtk(w, mesh, &scalars, &[("v_level", &out.velocity.v)])
    })?;
    export::write_file(dir, "nodes.csv", |w| export::write_nodes_csv(w, mesh))?;
    export::write_file(dir, "tris.csv", |w| export::write_tris_csv(w, mesh))?;
    Ok(())
}

/// Cross-method comparison on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub lambda_cg: f64,
    pub lambda_to: f64,
    /// `|λ_cg − λ_to| / |λ_cg|`.
    pub lambda_rel_gap: f64,
    pub lambda_dot_cg: f64,
    pub lambda_dot_to: f64,
    /// `‖u_cg − u_to‖_M` after sign alignment.
    pub u0_distance: f64,
    /// `‖u̇_cg − u̇_to‖_M / ‖u̇_cg‖_M` with the same alignment.
    pub u_dot_rel_distance: f64,
    /// `‖K_cg − K_to‖_F / ‖K_cg‖_F`.
    pub stiffness_rel_distance: f64,
}

/// Runs the CG and TO discretizations of `config` on the same mesh.
pub fn compare_methods(config: &ExperimentConfig) -> Result<CompareReport> {
    let cg = solve(&ExperimentConfig {
        method: Method::Cg,
        ..config.clone()
    })?;
    let to = solve(&ExperimentConfig {
        method: Method::To,
        ..config.clone()
    })?;
    let m = &cg.ops.mass;
    let (pc, pt) = (cg.pair(), to.pair());
    let sign = if m.bilinear(&pc.u, &pt.u) < 0.0 { -1.0 } else { 1.0 };
    let du: Vec<f64> = pc.u.iter().zip(&pt.u).map(|(a, b)| a - sign * b).collect();
    let dd: Vec<f64> = cg
        .response
        .u_dot
        .iter()
        .zip(&to.response.u_dot)
        .map(|(a, b)| a - sign * b)
        .collect();
    let dk = SparseSymMatrix::linear_combination(&[(1.0, &cg.ops.stiffness), (-1.0, &to.ops.stiffness)])?;
    Ok(CompareReport {
        lambda_cg: pc.lambda,
        lambda_to: pt.lambda,
        lambda_rel_gap: (pc.lambda - pt.lambda).abs() / pc.lambda.abs(),
        lambda_dot_cg: cg.response.lambda_dot,
        lambda_dot_to: to.response.lambda_dot,
        u0_distance: m_norm(&du, m),
        u_dot_rel_distance: m_norm(&dd, m) / m_norm(&cg.response.u_dot, m),
        stiffness_rel_distance: dk.frobenius_norm() / cg.ops.stiffness.frobenius_norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdReport {
    pub lambda0: f64,
    pub lambda_dot: f64,
    pub rows: Vec<FdRow>,
}

/// Central-difference check of `(u̇₀, λ̇₀)` over `config.fd_eps`.
pub fn run_validate_fd(config: &ExperimentConfig) -> Result<FdReport> {
    let solved = solve(config)?;
    let k = solved.spectrum.pairs.len();
    let rows = validate_fd(solved.pair(), &solved.response, &solved.ops.mass, &config.fd_eps, |eps| {
        perturbed_pairs(config, &solved.mesh, &solved.ops, k, eps)
    })
    .stage(Stage::Perturbed)?;
    let report = FdReport {
        lambda0: solved.pair().lambda,
        lambda_dot: solved.response.lambda_dot,
        rows,
    };
    if let Some(dir) = &config.output {
        export::write_json(&dir.join("fd.json"), &report)?;
    }
    Ok(report)
}

/// Writes the mesh (and the TO image mesh when `method = to`) without solving.
pub fn mesh_dump(config: &ExperimentConfig, dir: &Path) -> Result<TriMesh> {
    config.validate()?;
    let mesh = config.build_mesh().stage(Stage::Mesh)?;
    export::write_file(dir, "mesh.vtk", |w| export::write_vtk(w, &mesh, &[], &[]))?;
    export::write_file(dir, "nodes.csv", |w| export::write_nodes_csv(w, &mesh))?;
    export::write_file(dir, "tris.csv", |w| export::write_tris_csv(w, &mesh))?;
    if config.method == Method::To {
        let model = config.model.build(0.0);
        let image = assemble_to(&mesh, model.as_ref()).stage(Stage::Assembly)?.image_mesh;
        export::write_file(dir, "image_mesh.vtk", |w| export::write_vtk(w, &image, &[], &[]))?;
    }
    Ok(mesh)
}

/// `‖K_cg − K_to‖_F / ‖K_cg‖_F` for identity dynamics would be zero; this
/// helper exposes the Laplace stiffness used by both routes.
pub fn laplace_stiffness(mesh: &TriMesh) -> Result<SparseSymMatrix> {
    Ok(assemble_laplacian(mesh)?.scaled(-1.0))
}
