//! The convergence-study harness.
//!
//! No closed-form solutions exist for the benchmark problems, so errors are
//! estimated by the double-mesh principle: a run on (N, M) is compared with
//! a run on the bisected mesh with 2M time steps at the nodes and times they
//! share,
//!
//! ```text
//! E = max_{i,n} |U^{N,M}(x_i, t_n) - U^{2N,2M}(x_i, t_n)|,
//! ```
//!
//! and orders are q = log2(E^{N}/E^{2N}). The eps-uniform error of a column
//! is the maximum over the eps list. Table cells are independent solves and
//! run in parallel; results are identical to sequential execution.

use crate::error::{Error, Result};
use crate::mesh::{bisect, SpatialMesh};
use crate::problem::TurningPointProblem;
use crate::solver::{build_mesh, MeshOptions, RefineMode, Scheme, TimeMarch};
use rayon::prelude::*;

/// How M is chosen from N in a table run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MPolicy {
    /// M = N.
    EqualN,
    /// M = N² (isolates the spatial order).
    NSquared,
    /// A fixed step count independent of N.
    Fixed(usize),
}

impl MPolicy {
    pub fn m_for(&self, n: usize) -> usize {
        match self {
            MPolicy::EqualN => n,
            MPolicy::NSquared => n * n,
            MPolicy::Fixed(m) => *m,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MPolicy::EqualN => "equal-n".into(),
            MPolicy::NSquared => "n-squared".into(),
            MPolicy::Fixed(m) => format!("fixed:{m}"),
        }
    }
}

/// log2 of the error ratio between consecutive grids.
pub fn order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0) || !(e_fine > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "order needs positive errors, got {e_coarse} and {e_fine}"
        )));
    }
    Ok((e_coarse / e_fine).log2())
}

/// One double-mesh comparison plus run diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct DoubleMeshRun {
    pub error: f64,
    pub coarse_max_abs: f64,
    pub fine_max_abs: f64,
}

/// Piecewise-linear sampling weights of one mesh's nodes in another mesh.
struct InterpWeights {
    /// (left fine index, weight of the right node) per coarse node.
    brackets: Vec<(usize, f64)>,
}

impl InterpWeights {
    fn new(fine: &SpatialMesh, coarse: &SpatialMesh) -> Self {
        let fx = fine.nodes();
        let brackets = coarse
            .nodes()
            .iter()
            .map(|&x| {
                let j = match fx.binary_search_by(|v| v.total_cmp(&x)) {
                    Ok(j) => return (j.min(fx.len() - 2), if j == fx.len() - 1 { 1.0 } else { 0.0 }),
                    Err(j) => j.clamp(1, fx.len() - 1) - 1,
                };
                let w = (x - fx[j]) / (fx[j + 1] - fx[j]);
                (j, w.clamp(0.0, 1.0))
            })
            .collect();
        InterpWeights { brackets }
    }

    fn max_abs_diff(&self, coarse_level: &[f64], fine_level: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (uc, &(j, w)) in coarse_level.iter().zip(&self.brackets) {
            let uf = fine_level[j] + w * (fine_level[j + 1] - fine_level[j]);
            worst = worst.max((uc - uf).abs());
        }
        worst
    }
}

fn max_abs_diff_nested(coarse_level: &[f64], fine_level: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, uc) in coarse_level.iter().enumerate() {
        worst = worst.max((uc - fine_level[2 * i]).abs());
    }
    worst
}

/// Double-mesh error estimate for one (scheme, N, M, eps) cell, with the
/// largest |U| of both runs. The two marches run in lockstep and are
/// compared at every shared time level, so nothing larger than two levels
/// is ever held in memory.
pub fn double_mesh_error_detailed(
    problem: &TurningPointProblem,
    scheme: Scheme,
    n: usize,
    m: usize,
    eps: f64,
    options: &MeshOptions,
) -> Result<DoubleMeshRun> {
    let coarse_mesh = build_mesh(problem, scheme, n, eps, options)?;
    let (fine_mesh, interp) = match options.refine {
        RefineMode::Bisect => (bisect(&coarse_mesh), None),
        RefineMode::Regenerate => {
            let fine = build_mesh(problem, scheme, 2 * n, eps, options)?;
            let weights = InterpWeights::new(&fine, &coarse_mesh);
            (fine, Some(weights))
        }
    };
    let mut coarse = TimeMarch::new(problem, coarse_mesh, m, eps, scheme)?;
    let mut fine = TimeMarch::new(problem, fine_mesh, 2 * m, eps, scheme)?;

    let compare = |c: &TimeMarch, f: &TimeMarch| match &interp {
        Some(w) => w.max_abs_diff(c.level_values(), f.level_values()),
        None => max_abs_diff_nested(c.level_values(), f.level_values()),
    };

    let mut error = compare(&coarse, &fine);
    for _ in 0..m {
        fine.step()?;
        fine.step()?;
        coarse.step()?;
        error = error.max(compare(&coarse, &fine));
    }
    Ok(DoubleMeshRun {
        error,
        coarse_max_abs: coarse.max_abs(),
        fine_max_abs: fine.max_abs(),
    })
}

/// Double-mesh error estimate; see `double_mesh_error_detailed`.
pub fn double_mesh_error(
    problem: &TurningPointProblem,
    scheme: Scheme,
    n: usize,
    m: usize,
    eps: f64,
    options: &MeshOptions,
) -> Result<f64> {
    double_mesh_error_detailed(problem, scheme, n, m, eps, options).map(|run| run.error)
}

/// One table cell: either a completed comparison or the error that stopped
/// it. A failing cell does not abort the rest of the table.
#[derive(Debug, Clone)]
pub struct Cell {
    pub run: Option<DoubleMeshRun>,
    pub failure: Option<String>,
}

/// Double-mesh errors E and orders q indexed by (eps, N), with the
/// eps-uniform row.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub scheme: Scheme,
    pub problem_label: String,
    pub m_policy: MPolicy,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    cells: Vec<Vec<Cell>>,
}

impl ConvergenceTable {
    pub fn cell(&self, eps_idx: usize, n_idx: usize) -> &Cell {
        &self.cells[eps_idx][n_idx]
    }

    pub fn e(&self, eps_idx: usize, n_idx: usize) -> Option<f64> {
        self.cells[eps_idx][n_idx].run.map(|r| r.error)
    }

    /// Order between the N and 2N columns, when 2N is in the list and both
    /// cells completed.
    pub fn q(&self, eps_idx: usize, n_idx: usize) -> Option<f64> {
        let n2 = 2 * self.n_list[n_idx];
        let next_idx = self.n_list.iter().position(|&n| n == n2)?;
        let (e1, e2) = (self.e(eps_idx, n_idx)?, self.e(eps_idx, next_idx)?);
        order(e1, e2).ok()
    }

    /// Maximum of E over the eps list at one N.
    pub fn e_uniform(&self, n_idx: usize) -> Option<f64> {
        let mut out: Option<f64> = None;
        for ei in 0..self.eps_list.len() {
            if let Some(e) = self.e(ei, n_idx) {
                out = Some(out.map_or(e, |cur| cur.max(e)));
            }
        }
        out
    }

    pub fn q_uniform(&self, n_idx: usize) -> Option<f64> {
        let n2 = 2 * self.n_list[n_idx];
        let next_idx = self.n_list.iter().position(|&n| n == n2)?;
        order(self.e_uniform(n_idx)?, self.e_uniform(next_idx)?).ok()
    }

    /// All failed cells as (eps index, N index, message).
    pub fn failures(&self) -> Vec<(usize, usize, &str)> {
        let mut out = Vec::new();
        for (ei, row) in self.cells.iter().enumerate() {
            for (ni, cell) in row.iter().enumerate() {
                if let Some(msg) = &cell.failure {
                    out.push((ei, ni, msg.as_str()));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().flatten().all(|c| c.run.is_some())
    }

    /// `eps,N,M,E,q` rows followed by `uniform` pseudo-eps rows; floats with
    /// six significant digits. Missing values render as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,N,M,E,q\n");
        let fmt = |v: Option<f64>| v.map(fmt_sig6).unwrap_or_default();
        for (ei, &eps) in self.eps_list.iter().enumerate() {
            for (ni, &n) in self.n_list.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_sig6(eps),
                    n,
                    self.m_policy.m_for(n),
                    fmt(self.e(ei, ni)),
                    fmt(self.q(ei, ni)),
                ));
            }
        }
        for (ni, &n) in self.n_list.iter().enumerate() {
            out.push_str(&format!(
                "uniform,{},{},{},{}\n",
                n,
                self.m_policy.m_for(n),
                fmt(self.e_uniform(ni)),
                fmt(self.q_uniform(ni)),
            ));
        }
        out
    }

    /// Markdown table mirroring the usual journal layout: per eps one error
    /// row and one order row, eps-uniform rows at the bottom.
    pub fn to_markdown(&self) -> String {
        let fmt = |v: Option<f64>| v.map(fmt_sig6).unwrap_or_else(|| "-".into());
        let mut out = format!(
            "## {} on {} ({})\n\n",
            self.scheme.label(),
            self.problem_label,
            self.m_policy.label()
        );
        out.push_str("| eps |");
        for &n in &self.n_list {
            out.push_str(&format!(" N={n} |"));
        }
        out.push('\n');
        out.push_str("|---|");
        out.push_str(&"---|".repeat(self.n_list.len()));
        out.push('\n');
        for (ei, &eps) in self.eps_list.iter().enumerate() {
            out.push_str(&format!("| {} |", fmt_sig6(eps)));
            for ni in 0..self.n_list.len() {
                out.push_str(&format!(" {} |", fmt(self.e(ei, ni))));
            }
            out.push('\n');
            out.push_str("| *q* |");
            for ni in 0..self.n_list.len() {
                out.push_str(&format!(" {} |", fmt(self.q(ei, ni))));
            }
            out.push('\n');
        }
        out.push_str("| **uniform** |");
        for ni in 0..self.n_list.len() {
            out.push_str(&format!(" **{}** |", fmt(self.e_uniform(ni))));
        }
        out.push('\n');
        out.push_str("| **q** |");
        for ni in 0..self.n_list.len() {
            out.push_str(&format!(" **{}** |", fmt(self.q_uniform(ni))));
        }
        out.push('\n');
        out
    }
}

/// Six significant digits, scientific.
pub fn fmt_sig6(v: f64) -> String {
    format!("{v:.5e}")
}

/// Runs the whole (eps × N) error study for one scheme. Cells are
/// independent and evaluated on the current rayon pool; a failing cell is
/// recorded and the rest of the table completes.
pub fn run_experiment(
    problem: &TurningPointProblem,
    problem_label: &str,
    scheme: Scheme,
    eps_list: &[f64],
    n_list: &[usize],
    m_policy: MPolicy,
    options: &MeshOptions,
) -> Result<ConvergenceTable> {
    if eps_list.is_empty() || n_list.is_empty() {
        return Err(Error::InvalidParameter("eps list and N list must be non-empty".into()));
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("N list must be strictly ascending".into()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n == 0 || n % 4 != 0) {
        return Err(Error::InvalidParameter(format!("N list entries must be divisible by 4, got {bad}")));
    }

    let jobs: Vec<(usize, usize)> = (0..eps_list.len())
        .flat_map(|ei| (0..n_list.len()).map(move |ni| (ei, ni)))
        .collect();
    let outcomes: Vec<Cell> = jobs
        .par_iter()
        .map(|&(ei, ni)| {
            let n = n_list[ni];
            let m = m_policy.m_for(n);
            match double_mesh_error_detailed(problem, scheme, n, m, eps_list[ei], options) {
                Ok(run) => Cell { run: Some(run), failure: None },
                Err(e) => Cell { run: None, failure: Some(e.to_string()) },
            }
        })
        .collect();

    let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(eps_list.len());
    let mut it = outcomes.into_iter();
    for _ in 0..eps_list.len() {
        cells.push(it.by_ref().take(n_list.len()).collect());
    }

    Ok(ConvergenceTable {
        scheme,
        problem_label: problem_label.to_string(),
        m_policy,
        eps_list: eps_list.to_vec(),
        n_list: n_list.to_vec(),
        cells,
    })
}
