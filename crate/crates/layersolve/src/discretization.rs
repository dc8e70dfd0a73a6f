//! Per-level spatial discretization and the tridiagonal solver.
//!
//! One implicit-Euler time level of the problem is a tridiagonal system in
//! the interior unknowns U_1..U_{N-1}. Each row is one of:
//!
//! * a central-difference row, used at nodes where the central convection
//!   stencil is monotone, i.e. |a_i|·h_i < 2·eps;
//! * a midpoint-upwind row otherwise, shifted toward x_{i+1/2} left of the
//!   domain midpoint and toward x_{i-1/2} right of it (reaction, time term
//!   and right side are averaged over the two nodes of the shifted stencil);
//! * for the baseline scheme, a first-order upwind row with the convection
//!   split a = max(a,0) + min(a,0) applied to forward/backward differences.
//!
//! Rows are written with a negative diagonal and (when monotone) positive
//! off-diagonals; `is_m_matrix` checks the sign pattern and strict diagonal
//! dominance of the negated matrix.

use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::problem::TurningPointProblem;
use std::fmt;

/// Which stencil produced a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeTag {
    Central,
    MidpointPlus,
    MidpointMinus,
    UpwindPlus,
    UpwindMinus,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeTag::Central => "central",
            SchemeTag::MidpointPlus => "midpoint+",
            SchemeTag::MidpointMinus => "midpoint-",
            SchemeTag::UpwindPlus => "upwind+",
            SchemeTag::UpwindMinus => "upwind-",
        };
        f.write_str(s)
    }
}

/// One assembled time level: three diagonals and right-hand side over the
/// interior unknowns i = 1..N-1. `lower[0]` and `upper[N-2]` are stored as
/// zero; the boundary values they would multiply are already folded into
/// the right-hand side.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    pub tags: Vec<SchemeTag>,
}

impl TridiagonalSystem {
    pub fn n_unknowns(&self) -> usize {
        self.diag.len()
    }

    /// Debug dump: `i,lower,diag,upper,rhs,tag`, i the interior node index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,lower,diag,upper,rhs,tag\n");
        for k in 0..self.n_unknowns() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                k + 1,
                self.lower[k],
                self.diag[k],
                self.upper[k],
                self.rhs[k],
                self.tags[k]
            ));
        }
        out
    }
}

/// Marks the interior nodes where the central stencil is monotone.
#[derive(Debug, Clone)]
pub struct NodeClassification {
    in_i: Vec<bool>,
}

impl NodeClassification {
    /// True iff |a(x_i, t)|·h_i < 2·eps (strict), for interior node i in
    /// 1..N-1.
    pub fn in_central_set(&self, i: usize) -> bool {
        self.in_i[i - 1]
    }

    pub fn count(&self) -> usize {
        self.in_i.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.in_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_i.is_empty()
    }
}

/// Classifies every interior node at time `t`; h_i = x_i - x_{i-1}.
pub fn classify_nodes(
    problem: &TurningPointProblem,
    mesh: &SpatialMesh,
    eps: f64,
    t: f64,
) -> NodeClassification {
    let nodes = mesh.nodes();
    let n = mesh.n();
    let in_i = (1..n)
        .map(|i| {
            let h_i = nodes[i] - nodes[i - 1];
            (problem.a)(nodes[i], t).abs() * h_i < 2.0 * eps
        })
        .collect();
    NodeClassification { in_i }
}

/// The time-invariant part of one level's system: matrix bands, scheme
/// tags, the dt·f contribution to the right side, and the coefficient the
/// previous level enters with. Building the right side for a given previous
/// level goes through `rhs_into` both for one-shot assembly and for the
/// marcher's reused-template path, so the two are bit-identical.
#[derive(Debug, Clone)]
pub(crate) struct LevelTemplate {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub tags: Vec<SchemeTag>,
    dtf: Vec<f64>,
    dcoef: Vec<f64>,
    r_left: f64,
    r_right: f64,
}

impl LevelTemplate {
    /// Fills `rhs` for previous level `u_prev` (length N+1, boundaries
    /// included) and boundary values at the current time.
    pub fn rhs_into(&self, u_prev: &[f64], g_left: f64, g_right: f64, rhs: &mut [f64]) {
        let m = self.dtf.len();
        debug_assert_eq!(u_prev.len(), m + 2);
        for k in 0..m {
            let i = k + 1;
            rhs[k] = match self.tags[k] {
                SchemeTag::MidpointPlus => {
                    let u_mid = 0.5 * (u_prev[i] + u_prev[i + 1]);
                    self.dtf[k] - self.dcoef[k] * u_mid
                }
                SchemeTag::MidpointMinus => {
                    let u_mid = 0.5 * (u_prev[i - 1] + u_prev[i]);
                    self.dtf[k] - self.dcoef[k] * u_mid
                }
                _ => self.dtf[k] - self.dcoef[k] * u_prev[i],
            };
        }
        rhs[0] -= self.r_left * g_left;
        rhs[m - 1] -= self.r_right * g_right;
    }

    pub fn into_system(self, u_prev: &[f64], g_left: f64, g_right: f64) -> TridiagonalSystem {
        let mut rhs = vec![0.0; self.dtf.len()];
        self.rhs_into(u_prev, g_left, g_right, &mut rhs);
        TridiagonalSystem {
            lower: self.lower,
            diag: self.diag,
            upper: self.upper,
            rhs,
            tags: self.tags,
        }
    }
}

fn check_row_finite(
    lower: f64,
    diag: f64,
    upper: f64,
    dtf: f64,
    dcoef: f64,
    i: usize,
    x: f64,
    t: f64,
) -> Result<()> {
    if lower.is_finite() && diag.is_finite() && upper.is_finite() && dtf.is_finite() && dcoef.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteCoefficient { index: i, x, t })
    }
}

/// Builds the hybrid template at time `t`: central rows on the monotone set,
/// midpoint-upwind rows elsewhere (x_{i+1/2}-shifted for i <= N/2,
/// x_{i-1/2}-shifted for i > N/2).
pub(crate) fn hybrid_template(
    problem: &TurningPointProblem,
    mesh: &SpatialMesh,
    eps: f64,
    dt: f64,
    t: f64,
) -> Result<LevelTemplate> {
    let nodes = mesh.nodes();
    let n = mesh.n();
    let m = n - 1;
    let half = n / 2;
    let (a, b, d, f) = (&problem.a, &problem.b, &problem.d, &problem.f);

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut tags = vec![SchemeTag::Central; m];
    let mut dtf = vec![0.0; m];
    let mut dcoef = vec![0.0; m];

    for i in 1..n {
        let k = i - 1;
        let x = nodes[i];
        let h_i = x - nodes[i - 1];
        let h_ip = nodes[i + 1] - x;
        let hhat = h_i + h_ip;
        let a_i = a(x, t);

        if a_i.abs() * h_i < 2.0 * eps {
            let b_i = b(x, t);
            let d_i = d(x, t);
            lower[k] = 2.0 * eps * dt / (hhat * h_i) - a_i * dt / hhat;
            upper[k] = 2.0 * eps * dt / (hhat * h_ip) + a_i * dt / hhat;
            diag[k] = -(2.0 * eps * dt / hhat) * (1.0 / h_i + 1.0 / h_ip) - b_i * dt - d_i;
            dtf[k] = dt * f(x, t);
            dcoef[k] = d_i;
            tags[k] = SchemeTag::Central;
        } else if i <= half {
            let xq = nodes[i + 1];
            let a_m = 0.5 * (a_i + a(xq, t));
            let b_m = 0.5 * (b(x, t) + b(xq, t));
            let d_m = 0.5 * (d(x, t) + d(xq, t));
            let f_m = 0.5 * (f(x, t) + f(xq, t));
            lower[k] = 2.0 * eps * dt / (hhat * h_i);
            upper[k] =
                2.0 * eps * dt / (hhat * h_ip) + a_m * dt / h_ip - 0.5 * d_m - 0.5 * b_m * dt;
            diag[k] = -(2.0 * eps * dt / hhat) * (1.0 / h_i + 1.0 / h_ip)
                - a_m * dt / h_ip
                - 0.5 * d_m
                - 0.5 * b_m * dt;
            dtf[k] = dt * f_m;
            dcoef[k] = d_m;
            tags[k] = SchemeTag::MidpointPlus;
        } else {
            let xq = nodes[i - 1];
            let a_m = 0.5 * (a_i + a(xq, t));
            let b_m = 0.5 * (b(x, t) + b(xq, t));
            let d_m = 0.5 * (d(x, t) + d(xq, t));
            let f_m = 0.5 * (f(x, t) + f(xq, t));
            lower[k] =
                2.0 * eps * dt / (hhat * h_i) - a_m * dt / h_i - 0.5 * d_m - 0.5 * b_m * dt;
            upper[k] = 2.0 * eps * dt / (hhat * h_ip);
            diag[k] = -(2.0 * eps * dt / hhat) * (1.0 / h_i + 1.0 / h_ip) + a_m * dt / h_i
                - 0.5 * d_m
                - 0.5 * b_m * dt;
            dtf[k] = dt * f_m;
            dcoef[k] = d_m;
            tags[k] = SchemeTag::MidpointMinus;
        }
        check_row_finite(lower[k], diag[k], upper[k], dtf[k], dcoef[k], i, x, t)?;
    }

    let r_left = lower[0];
    let r_right = upper[m - 1];
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    Ok(LevelTemplate { lower, diag, upper, tags, dtf, dcoef, r_left, r_right })
}

/// Builds the baseline upwind template: diffusion by the second difference,
/// convection by a+·forward / a-·backward differencing, reaction and time
/// term at the node.
pub(crate) fn upwind_template(
    problem: &TurningPointProblem,
    mesh: &SpatialMesh,
    eps: f64,
    dt: f64,
    t: f64,
) -> Result<LevelTemplate> {
    let nodes = mesh.nodes();
    let n = mesh.n();
    let m = n - 1;
    let (a, b, d, f) = (&problem.a, &problem.b, &problem.d, &problem.f);

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut tags = vec![SchemeTag::UpwindPlus; m];
    let mut dtf = vec![0.0; m];
    let mut dcoef = vec![0.0; m];

    for i in 1..n {
        let k = i - 1;
        let x = nodes[i];
        let h_i = x - nodes[i - 1];
        let h_ip = nodes[i + 1] - x;
        let hhat = h_i + h_ip;
        let a_i = a(x, t);
        let b_i = b(x, t);
        let d_i = d(x, t);
        let a_plus = a_i.max(0.0);
        let a_minus = a_i.min(0.0);

        lower[k] = 2.0 * eps * dt / (hhat * h_i) - a_minus * dt / h_i;
        upper[k] = 2.0 * eps * dt / (hhat * h_ip) + a_plus * dt / h_ip;
        diag[k] = -(2.0 * eps * dt / hhat) * (1.0 / h_i + 1.0 / h_ip) - a_plus * dt / h_ip
            + a_minus * dt / h_i
            - b_i * dt
            - d_i;
        dtf[k] = dt * f(x, t);
        dcoef[k] = d_i;
        tags[k] = if a_i >= 0.0 { SchemeTag::UpwindPlus } else { SchemeTag::UpwindMinus };
        check_row_finite(lower[k], diag[k], upper[k], dtf[k], dcoef[k], i, x, t)?;
    }

    let r_left = lower[0];
    let r_right = upper[m - 1];
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    Ok(LevelTemplate { lower, diag, upper, tags, dtf, dcoef, r_left, r_right })
}

/// Assembles one hybrid time level. `u_prev` is the full previous level,
/// boundaries included; Dirichlet values at time `t` are folded into the
/// right side of the first and last rows.
pub fn assemble_hybrid(
    problem: &TurningPointProblem,
    mesh: &SpatialMesh,
    eps: f64,
    dt: f64,
    u_prev: &[f64],
    t: f64,
) -> Result<TridiagonalSystem> {
    let tpl = hybrid_template(problem, mesh, eps, dt, t)?;
    Ok(tpl.into_system(u_prev, (problem.g_left)(t), (problem.g_right)(t)))
}

/// Assembles one baseline-upwind time level; same conventions as
/// `assemble_hybrid`.
pub fn assemble_upwind(
    problem: &TurningPointProblem,
    mesh: &SpatialMesh,
    eps: f64,
    dt: f64,
    u_prev: &[f64],
    t: f64,
) -> Result<TridiagonalSystem> {
    let tpl = upwind_template(problem, mesh, eps, dt, t)?;
    Ok(tpl.into_system(u_prev, (problem.g_left)(t), (problem.g_right)(t)))
}

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
/// Solving through the factors is operation-for-operation the elimination
/// `thomas_solve` performs. Pivot reciprocals are stored so the serial
/// forward sweep multiplies instead of dividing.
#[derive(Debug, Clone)]
pub(crate) struct ThomasFactors {
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
    lower: Vec<f64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

impl ThomasFactors {
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let m = diag.len();
        let mut c_prime = vec![0.0; m];
        let mut inv_denom = vec![0.0; m];
        let mut prev_c = 0.0;
        for k in 0..m {
            let den = if k == 0 { diag[0] } else { diag[k] - lower[k] * prev_c };
            if !den.is_finite() || den.abs() < PIVOT_FLOOR {
                return Err(Error::ZeroPivot { row: k, magnitude: den.abs() });
            }
            inv_denom[k] = 1.0 / den;
            if k + 1 < m {
                c_prime[k] = upper[k] / den;
            }
            prev_c = c_prime[k];
        }
        Ok(ThomasFactors { c_prime, inv_denom, lower: lower.to_vec() })
    }

    /// Forward substitution into `work`, back substitution into `out`.
    pub fn solve_into(&self, rhs: &[f64], work: &mut [f64], out: &mut [f64]) {
        let m = rhs.len();
        work[0] = rhs[0] * self.inv_denom[0];
        for k in 1..m {
            work[k] = (rhs[k] - self.lower[k] * work[k - 1]) * self.inv_denom[k];
        }
        out[m - 1] = work[m - 1];
        for k in (0..m - 1).rev() {
            out[k] = work[k] - self.c_prime[k] * out[k + 1];
        }
    }
}

/// Direct elimination for a tridiagonal system. The input is unmodified;
/// a pivot smaller than 1e-300 in magnitude is reported with its row.
pub fn thomas_solve(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    let m = system.n_unknowns();
    if m == 0 {
        return Err(Error::InvalidParameter("empty tridiagonal system".into()));
    }
    if system.lower.len() != m
        || system.upper.len() != m
        || system.rhs.len() != m
        || system.tags.len() != m
    {
        return Err(Error::InvalidParameter("inconsistent tridiagonal system dimensions".into()));
    }
    let factors = ThomasFactors::factor(&system.lower, &system.diag, &system.upper)?;
    let mut work = vec![0.0; m];
    let mut out = vec![0.0; m];
    factors.solve_into(&system.rhs, &mut work, &mut out);
    Ok(out)
}

/// Result of the monotonicity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMatrixReport {
    pub ok: bool,
    /// 0-based row of the first violation, if any.
    pub first_violation: Option<usize>,
}

/// Checks whether the negated system matrix is an M-matrix: positive
/// diagonal, nonpositive off-diagonals and strict row diagonal dominance.
/// Rows are stored with negative diagonal and (when monotone) positive
/// off-diagonals, so the test is `diag < 0`, `lower >= 0`, `upper >= 0`,
/// `|diag| > |lower| + |upper|`.
pub fn is_m_matrix(system: &TridiagonalSystem) -> MMatrixReport {
    for k in 0..system.n_unknowns() {
        let ok = -system.diag[k] > 0.0
            && system.lower[k] >= 0.0
            && system.upper[k] >= 0.0
            && system.diag[k].abs() > system.lower[k].abs() + system.upper[k].abs();
        if !ok {
            return MMatrixReport { ok: false, first_violation: Some(k) };
        }
    }
    MMatrixReport { ok: true, first_violation: None }
}
