//! The continuous problem class: a parabolic convection-diffusion equation
//!
//! ```text
//! eps·u_xx + a(x,t)·u_x - d(x,t)·u_t - b(x,t)·u = f(x,t)
//! ```
//!
//! on (x_lo, x_hi) × (0, T], whose convection coefficient vanishes at the
//! interval midpoint x_c with odd multiplicity p:
//!
//! ```text
//! a(x,t) = -a0(x,t)·(x - x_c)^p,   a0 >= alpha0 > 0,
//! b >= beta > 0,   d >= gamma >= 0.
//! ```
//!
//! Characteristics of the reduced problem point outward from x_c, so the
//! solution develops exponential boundary layers at both endpoints.

use std::fmt;
use std::sync::Arc;

/// Scalar coefficient of (x, t).
pub type Coefficient = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Initial data, a function of x.
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Boundary data, a function of t.
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An instance of the turning-point problem class.
///
/// Immutable after construction; clones share the coefficient closures and
/// may be used concurrently from multiple experiment runs.
#[derive(Clone)]
pub struct TurningPointProblem {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Final time T > 0.
    pub t_final: f64,
    /// Turning point; must be the interval midpoint.
    pub x_c: f64,
    /// Odd multiplicity of the turning point.
    pub p: u32,
    pub a: Coefficient,
    pub b: Coefficient,
    pub d: Coefficient,
    pub f: Coefficient,
    pub g_init: SpaceFn,
    pub g_left: TimeFn,
    pub g_right: TimeFn,
    /// Lower bound on a0 in a = -a0·(x - x_c)^p.
    pub alpha0: f64,
    /// Lower bound on the reaction coefficient b.
    pub beta: f64,
    /// Lower bound on the time coefficient d.
    pub gamma: f64,
    /// Layer decay constant in (0, alpha0], used for mesh sizing.
    pub alpha: f64,
    /// True when a, b, d and f ignore their t argument. Lets the time
    /// marcher assemble the level matrix once and reuse it; the marched
    /// values are bit-identical to per-level assembly.
    pub time_invariant_coefficients: bool,
}

impl fmt::Debug for TurningPointProblem {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("TurningPointProblem")
            .field("x_lo", &self.x_lo)
            .field("x_hi", &self.x_hi)
            .field("t_final", &self.t_final)
            .field("x_c", &self.x_c)
            .field("p", &self.p)
            .field("alpha0", &self.alpha0)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl TurningPointProblem {
    /// Domain width x_hi - x_lo.
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Default transition-parameter factor 2/alpha.
    pub fn default_tau0(&self) -> f64 {
        2.0 / self.alpha
    }

    /// Checks the class assumptions on a uniform `samples_x` × `samples_t`
    /// grid over the closed space-time domain. Violations are collected,
    /// never thrown; an empty report means "passes at sampled resolution",
    /// which is evidence, not proof.
    pub fn validate(&self, samples_x: usize, samples_t: usize) -> ValidationReport {
        let mut violations = Vec::new();
        if samples_x < 2 || samples_t < 2 {
            violations.push("sample counts must be at least 2".to_string());
            return ValidationReport { violations };
        }
        if !(self.x_lo < self.x_hi) {
            violations.push(format!(
                "domain is empty: x_lo = {} >= x_hi = {}",
                self.x_lo, self.x_hi
            ));
        }
        let mid = 0.5 * (self.x_lo + self.x_hi);
        if self.x_c != mid {
            violations.push(format!(
                "turning point x_c = {} is not the interval midpoint {}",
                self.x_c, mid
            ));
        }
        if self.p % 2 == 0 || self.p == 0 {
            violations.push(format!("multiplicity p = {} is not a positive odd integer", self.p));
        }
        if !(self.alpha > 0.0 && self.alpha <= self.alpha0) {
            violations.push(format!(
                "alpha = {} is outside (0, alpha0 = {}]",
                self.alpha, self.alpha0
            ));
        }

        let xs: Vec<f64> = (0..samples_x)
            .map(|i| self.x_lo + self.width() * i as f64 / (samples_x - 1) as f64)
            .collect();
        let ts: Vec<f64> = (0..samples_t)
            .map(|n| self.t_final * n as f64 / (samples_t - 1) as f64)
            .collect();

        for &t in &ts {
            let a_c = (self.a)(self.x_c, t);
            if a_c != 0.0 {
                violations.push(format!("a({}, {}) = {} at the turning point, expected 0", self.x_c, t, a_c));
            }
            for &x in &xs {
                let (a, b, d) = ((self.a)(x, t), (self.b)(x, t), (self.d)(x, t));
                if !a.is_finite() || !b.is_finite() || !d.is_finite() || !(self.f)(x, t).is_finite() {
                    violations.push(format!("non-finite coefficient value at (x, t) = ({x}, {t})"));
                    continue;
                }
                if x != self.x_c && a * (x - self.x_c) >= 0.0 {
                    violations.push(format!(
                        "sign condition a·(x - x_c) < 0 fails at (x, t) = ({x}, {t}): a = {a}"
                    ));
                }
                if b < self.beta {
                    violations.push(format!("b >= beta fails at (x, t) = ({x}, {t}): b = {b} < {}", self.beta));
                }
                if d < self.gamma {
                    violations.push(format!("d >= gamma fails at (x, t) = ({x}, {t}): d = {d} < {}", self.gamma));
                }
            }
        }
        ValidationReport { violations }
    }
}

/// Outcome of sampling-based assumption checking.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(fm, "all assumptions hold at sampled resolution")
        } else {
            writeln!(fm, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(fm, "  - {v}")?;
            }
            Ok(())
        }
    }
}

/// First benchmark problem:
///
/// ```text
/// eps·u_xx - 2(2x-1)·u_x - u_t - 4u = 0   on (0,1) × (0,1],
/// u(x,0) = 1,  u(0,t) = u(1,t) = 1,
/// ```
///
/// a simple turning point (p = 1) at x_c = 1/2 since
/// -2(2x-1) = -4·(x - 1/2).
pub fn builtin_problem_1() -> TurningPointProblem {
    TurningPointProblem {
        x_lo: 0.0,
        x_hi: 1.0,
        t_final: 1.0,
        x_c: 0.5,
        p: 1,
        a: Arc::new(|x, _| -2.0 * (2.0 * x - 1.0)),
        b: Arc::new(|_, _| 4.0),
        d: Arc::new(|_, _| 1.0),
        f: Arc::new(|_, _| 0.0),
        g_init: Arc::new(|_| 1.0),
        g_left: Arc::new(|_| 1.0),
        g_right: Arc::new(|_| 1.0),
        alpha0: 4.0,
        beta: 4.0,
        gamma: 1.0,
        alpha: 4.0,
        time_invariant_coefficients: true,
    }
}

/// Second benchmark problem, with configurable odd multiplicity `p`:
///
/// ```text
/// eps·u_xx - x^p·u_x - u_t - u = 1   on (-1,1) × (0,1],
/// u(x,0) = 1,  u(±1,t) = 1.
/// ```
pub fn builtin_problem_2(p: u32) -> crate::Result<TurningPointProblem> {
    if p == 0 || p % 2 == 0 {
        return Err(crate::Error::InvalidParameter(format!(
            "multiplicity p must be a positive odd integer, got {p}"
        )));
    }
    let pe = p as i32;
    Ok(TurningPointProblem {
        x_lo: -1.0,
        x_hi: 1.0,
        t_final: 1.0,
        x_c: 0.0,
        p,
        a: Arc::new(move |x, _| -x.powi(pe)),
        b: Arc::new(|_, _| 1.0),
        d: Arc::new(|_, _| 1.0),
        f: Arc::new(|_, _| 1.0),
        g_init: Arc::new(|_| 1.0),
        g_left: Arc::new(|_| 1.0),
        g_right: Arc::new(|_| 1.0),
        alpha0: 1.0,
        beta: 1.0,
        gamma: 1.0,
        alpha: 1.0,
        time_invariant_coefficients: true,
    })
}
