//! Implicit-Euler time marching of the discrete problem.
//!
//! Each level solves one tridiagonal system assembled from the previous
//! level. For problems whose coefficients do not depend on t the level
//! matrix is assembled and factored once and reused; the reuse goes through
//! the same right-hand-side and elimination code as per-level assembly, so
//! the computed grid is bit-identical either way.

use crate::discretization::{hybrid_template, upwind_template, LevelTemplate, ThomasFactors};
use crate::error::{Error, Result};
use crate::mesh::{
    generalized_shishkin, standard_shishkin, uniform_mesh, LStrategy, SpatialMesh, TimeMesh,
};
use crate::problem::TurningPointProblem;

/// Space discretization paired with its mesh family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Hybrid central/midpoint-upwind rows on the generalized layer mesh.
    HybridGeneralizedShishkin,
    /// First-order upwind on an equispaced mesh.
    UpwindUniform,
    /// First-order upwind on the standard layer mesh.
    UpwindShishkin,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::HybridGeneralizedShishkin => "hybrid-gshishkin",
            Scheme::UpwindUniform => "upwind-uniform",
            Scheme::UpwindShishkin => "upwind-shishkin",
        }
    }
}

/// How the fine grid of a double-mesh comparison is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineMode {
    /// Split every coarse interval at its midpoint (node-nested; default).
    #[default]
    Bisect,
    /// Rebuild a 2N mesh with its own transition parameter and compare by
    /// piecewise-linear interpolation.
    Regenerate,
}

/// Mesh-construction knobs shared by the solver and the harness.
#[derive(Debug, Clone, Copy)]
pub struct MeshOptions {
    /// Transition factor for the generalized mesh; `None` means 2/alpha.
    pub tau0: Option<f64>,
    /// Transition factor for the standard mesh; `None` means 2/alpha.
    pub sigma: Option<f64>,
    pub l_strategy: LStrategy,
    pub refine: RefineMode,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            tau0: None,
            sigma: None,
            l_strategy: LStrategy::LogN,
            refine: RefineMode::Bisect,
        }
    }
}

impl MeshOptions {
    pub fn tau0_for(&self, problem: &TurningPointProblem) -> f64 {
        self.tau0.unwrap_or_else(|| problem.default_tau0())
    }

    pub fn sigma_for(&self, problem: &TurningPointProblem) -> f64 {
        self.sigma.unwrap_or_else(|| problem.default_tau0())
    }
}

/// Builds the spatial mesh a scheme runs on.
pub fn build_mesh(
    problem: &TurningPointProblem,
    scheme: Scheme,
    n: usize,
    eps: f64,
    options: &MeshOptions,
) -> Result<SpatialMesh> {
    match scheme {
        Scheme::HybridGeneralizedShishkin => {
            generalized_shishkin(n, eps, options.tau0_for(problem), problem, options.l_strategy)
        }
        Scheme::UpwindUniform => uniform_mesh(n, problem),
        Scheme::UpwindShishkin => standard_shishkin(n, eps, options.sigma_for(problem), problem),
    }
}

struct Frozen {
    template: LevelTemplate,
    factors: ThomasFactors,
}

/// Sequential implicit-Euler marcher; one instance per run. The harness
/// drives two of these in lockstep for double-mesh comparisons.
pub(crate) struct TimeMarch<'p> {
    problem: &'p TurningPointProblem,
    mesh: SpatialMesh,
    time: TimeMesh,
    eps: f64,
    hybrid: bool,
    level: usize,
    u: Vec<f64>,
    frozen: Option<Frozen>,
    max_abs: f64,
    rhs: Vec<f64>,
    work: Vec<f64>,
    interior: Vec<f64>,
}

impl<'p> TimeMarch<'p> {
    pub fn new(
        problem: &'p TurningPointProblem,
        mesh: SpatialMesh,
        m: usize,
        eps: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        let time = TimeMesh::new(m, problem.t_final)?;
        let n = mesh.n();
        if n < 2 {
            return Err(Error::InvalidParameter("mesh must have at least 2 intervals".into()));
        }
        let u: Vec<f64> = mesh.nodes().iter().map(|&x| (problem.g_init)(x)).collect();
        let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(TimeMarch {
            problem,
            mesh,
            time,
            eps,
            hybrid: scheme == Scheme::HybridGeneralizedShishkin,
            level: 0,
            u,
            frozen: None,
            max_abs,
            rhs: vec![0.0; n - 1],
            work: vec![0.0; n - 1],
            interior: vec![0.0; n - 1],
        })
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn time_mesh(&self) -> &TimeMesh {
        &self.time
    }

    pub fn level_values(&self) -> &[f64] {
        &self.u
    }

    /// Largest |U| seen over all levels marched so far, data included.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Advances one implicit-Euler level.
    pub fn step(&mut self) -> Result<()> {
        let n = self.level + 1;
        let t = self.time.time(n);
        let wrap = |e: Error| Error::TimeStep { level: n, t, source: Box::new(e) };
        let g_left = (self.problem.g_left)(t);
        let g_right = (self.problem.g_right)(t);

        if self.frozen.is_none() {
            let dt = self.time.dt();
            let template = if self.hybrid {
                hybrid_template(self.problem, &self.mesh, self.eps, dt, t)
            } else {
                upwind_template(self.problem, &self.mesh, self.eps, dt, t)
            }
            .map_err(wrap)?;
            let factors = ThomasFactors::factor(&template.lower, &template.diag, &template.upper)
                .map_err(wrap)?;
            template.rhs_into(&self.u, g_left, g_right, &mut self.rhs);
            factors.solve_into(&self.rhs, &mut self.work, &mut self.interior);
            if self.problem.time_invariant_coefficients {
                self.frozen = Some(Frozen { template, factors });
            }
        } else {
            let frozen = self.frozen.as_ref().unwrap();
            frozen.template.rhs_into(&self.u, g_left, g_right, &mut self.rhs);
            frozen.factors.solve_into(&self.rhs, &mut self.work, &mut self.interior);
        }

        self.u[0] = g_left;
        self.u[1..self.mesh.n()].copy_from_slice(&self.interior);
        *self.u.last_mut().unwrap() = g_right;
        for &v in &self.u {
            if !v.is_finite() {
                return Err(Error::NonFiniteSolution { level: n, t });
            }
            self.max_abs = self.max_abs.max(v.abs());
        }
        self.level = n;
        Ok(())
    }
}

/// How many time levels a grid keeps in full before switching to a strided
/// subsample (the final level is always kept).
const RETAIN_LIMIT: usize = 4096;

fn retention_stride(m: usize) -> usize {
    let mut stride = 1;
    while m.div_ceil(stride) > RETAIN_LIMIT {
        stride *= 2;
    }
    stride
}

/// The discrete space-time solution of one run.
///
/// For M <= 4096 every level is stored; beyond that levels are retained at
/// a power-of-two stride (plus the final level) together with the running
/// space-time maximum, so the largest convergence-table runs stay within
/// desk-scale memory.
#[derive(Debug, Clone)]
pub struct SolutionGrid {
    scheme: Scheme,
    eps: f64,
    space_mesh: SpatialMesh,
    time_mesh: TimeMesh,
    stride: usize,
    levels: Vec<(usize, Vec<f64>)>,
    max_abs: f64,
}

impl SolutionGrid {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn space_mesh(&self) -> &SpatialMesh {
        &self.space_mesh
    }

    pub fn time_mesh(&self) -> &TimeMesh {
        &self.time_mesh
    }

    pub fn n(&self) -> usize {
        self.space_mesh.n()
    }

    pub fn m(&self) -> usize {
        self.time_mesh.m()
    }

    /// Stride between retained levels (1 when everything is stored).
    pub fn retention_stride(&self) -> usize {
        self.stride
    }

    pub fn is_fully_retained(&self) -> bool {
        self.stride == 1
    }

    /// The values of time level `n`, if retained.
    pub fn level(&self, n: usize) -> Option<&[f64]> {
        self.levels
            .binary_search_by_key(&n, |(idx, _)| *idx)
            .ok()
            .map(|pos| self.levels[pos].1.as_slice())
    }

    /// U(x_i, t_n) for a retained level.
    pub fn values_at(&self, i: usize, n: usize) -> Option<f64> {
        self.level(n).map(|row| row[i])
    }

    /// Retained levels in increasing time order.
    pub fn retained_levels(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.levels.iter().map(|(n, row)| (*n, row.as_slice()))
    }

    /// Largest |U| over the whole march (all levels, not only retained).
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Dump `x,t,u` rows over at most `max_levels` retained levels, for
    /// external surface plots.
    pub fn surface_csv(&self, max_levels: usize) -> String {
        let mut out = String::from("x,t,u\n");
        let total = self.levels.len();
        let step = total.div_ceil(max_levels.max(1)).max(1);
        let mut chosen: Vec<usize> = (0..total).step_by(step).collect();
        if *chosen.last().unwrap() != total - 1 {
            chosen.push(total - 1);
        }
        for pos in chosen {
            let (n, row) = &self.levels[pos];
            let t = self.time_mesh.time(*n);
            for (x, u) in self.space_mesh.nodes().iter().zip(row.iter()) {
                out.push_str(&format!("{x},{t},{u}\n"));
            }
        }
        out
    }
}

fn check_scheme_n(scheme: Scheme, n: usize) -> Result<()> {
    match scheme {
        Scheme::UpwindUniform => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("N must be >= 2, got {n}")));
            }
        }
        _ => {
            if n == 0 || n % 4 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "layer-resolving schemes need N divisible by 4, got {n}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs `scheme` on an N×M grid for the given eps. Deterministic: identical
/// inputs give bit-identical grids.
pub fn solve(
    problem: &TurningPointProblem,
    scheme: Scheme,
    n: usize,
    m: usize,
    eps: f64,
    options: &MeshOptions,
) -> Result<SolutionGrid> {
    check_scheme_n(scheme, n)?;
    if m == 0 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let mesh = build_mesh(problem, scheme, n, eps, options)?;
    let mut march = TimeMarch::new(problem, mesh, m, eps, scheme)?;
    let stride = retention_stride(m);
    let mut levels = Vec::with_capacity(m.div_ceil(stride) + 2);
    levels.push((0, march.level_values().to_vec()));
    for n_level in 1..=m {
        march.step()?;
        if n_level % stride == 0 || n_level == m {
            levels.push((n_level, march.level_values().to_vec()));
        }
    }
    Ok(SolutionGrid {
        scheme,
        eps,
        space_mesh: march.mesh().clone(),
        time_mesh: march.time_mesh().clone(),
        stride,
        levels,
        max_abs: march.max_abs(),
    })
}

/// Samples a nested fine grid at the coarse nodes and times, by index
/// mapping only: coarse (i, n) reads fine (kx·i, kt·n). Returns one row per
/// coarse time level. The fine grid must contain every coarse node
/// bit-exactly and retain every sampled level.
pub fn restrict_to_coarse(
    fine: &SolutionGrid,
    coarse_mesh: &SpatialMesh,
    coarse_time: &TimeMesh,
) -> Result<Vec<Vec<f64>>> {
    let (nf, nc) = (fine.n(), coarse_mesh.n());
    let (mf, mc) = (fine.m(), coarse_time.m());
    if nf % nc != 0 || mf % mc != 0 {
        return Err(Error::NotNested(format!(
            "fine {nf}x{mf} is not an integer refinement of coarse {nc}x{mc}"
        )));
    }
    let kx = nf / nc;
    let kt = mf / mc;
    for i in 0..=nc {
        if fine.space_mesh().node(kx * i) != coarse_mesh.node(i) {
            return Err(Error::NotNested(format!(
                "coarse node {i} (x = {}) is not a fine node",
                coarse_mesh.node(i)
            )));
        }
    }
    let mut out = Vec::with_capacity(mc + 1);
    for n in 0..=mc {
        let row = fine
            .level(kt * n)
            .ok_or(Error::LevelNotRetained { level: kt * n })?;
        out.push((0..=nc).map(|i| row[kx * i]).collect());
    }
    Ok(out)
}
