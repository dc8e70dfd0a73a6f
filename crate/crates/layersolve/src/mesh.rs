//! Spatial and temporal meshes.
//!
//! The layer-resolving meshes are piecewise uniform with a transition
//! parameter
//!
//! ```text
//! tau = min{ W/8, tau0·eps·L },    W = x_hi - x_lo,
//! ```
//!
//! N/4 fine intervals of width h = 4·tau/N on each of [x_lo, x_lo+tau] and
//! [x_hi-tau, x_hi], and N/2 coarse intervals of width H = (W - 2·tau)/(N/2)
//! in between. The logarithmic factor L satisfies e^(-L) <= L/N and
//! L <= ln N; the classic choice is L = ln N, the smallest admissible value
//! is the root of L·e^L = N.

use crate::error::{Error, Result};
use crate::problem::TurningPointProblem;
use std::fmt;

/// How the logarithmic factor L of the transition parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LStrategy {
    /// L = ln N.
    LogN,
    /// L solves L·e^L = N (the smallest admissible L), by bisection.
    LambertW,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    GeneralizedShishkin,
    StandardShishkin,
    Uniform,
}

/// Region of a mesh interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    LeftLayer,
    Interior,
    RightLayer,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::LeftLayer => "left-layer",
            Region::Interior => "interior",
            Region::RightLayer => "right-layer",
        };
        f.write_str(s)
    }
}

/// An ordered spatial mesh of N intervals.
#[derive(Debug, Clone)]
pub struct SpatialMesh {
    nodes: Vec<f64>,
    tau: f64,
    kind: MeshKind,
    l_value: f64,
}

impl SpatialMesh {
    /// Number of intervals N.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Transition parameter (0 for uniform meshes).
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Logarithmic factor used when sizing the layers (1 for uniform meshes).
    pub fn l_value(&self) -> f64 {
        self.l_value
    }

    /// Region of interval `i` (1-based, i in 1..=N). Layer intervals are the
    /// first and last quarter of a layer-resolving mesh; index-based, so
    /// tags survive bisection unchanged.
    pub fn region_of(&self, i: usize) -> Region {
        assert!(i >= 1 && i <= self.n(), "interval index {i} out of 1..={}", self.n());
        match self.kind {
            MeshKind::Uniform => Region::Interior,
            _ => {
                let n = self.n();
                if i <= n / 4 {
                    Region::LeftLayer
                } else if i > 3 * n / 4 {
                    Region::RightLayer
                } else {
                    Region::Interior
                }
            }
        }
    }

    /// Debug/plot dump: header `i,x,region`, one row per node. A node is
    /// tagged with the region of the interval to its left (node 0 with the
    /// first interval).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x,region\n");
        for (i, x) in self.nodes.iter().enumerate() {
            let region = self.region_of(i.max(1));
            out.push_str(&format!("{i},{x},{region}\n"));
        }
        out
    }
}

/// Uniform time mesh with M steps on [0, t_final].
#[derive(Debug, Clone)]
pub struct TimeMesh {
    m: usize,
    t_final: f64,
}

impl TimeMesh {
    pub fn new(m: usize, t_final: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("time mesh needs M >= 1".into()));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!("t_final must be positive, got {t_final}")));
        }
        Ok(TimeMesh { m, t_final })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.m as f64
    }

    /// t_n = t_final·n/M; endpoints are exact.
    pub fn time(&self, n: usize) -> f64 {
        self.t_final * n as f64 / self.m as f64
    }
}

/// The logarithmic mesh factor L for a given N.
///
/// Rejects N < 3: admissibility e^(-L) <= L/N together with L <= ln N
/// requires ln N >= 1.
pub fn compute_l(n: usize, strategy: LStrategy) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "no admissible logarithmic factor for N = {n}; need N >= 3"
        )));
    }
    let nf = n as f64;
    match strategy {
        LStrategy::LogN => Ok(nf.ln()),
        LStrategy::LambertW => {
            // Root of g(L) = L·e^L - N on (0, ln N]; g(0) < 0 < g(ln N).
            // Returns the upper bracket end so L·e^L >= N holds and with it
            // the admissibility inequality e^(-L) <= L/N.
            let mut lo = 0.0_f64;
            let mut hi = nf.ln();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid * mid.exp() < nf {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo) <= 1e-12 * hi {
                    break;
                }
            }
            Ok(hi)
        }
    }
}

fn check_shishkin_args(n: usize, eps: f64, tau0: f64, problem: &TurningPointProblem) -> Result<()> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "layer-resolving meshes need N divisible by 4, got {n}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if !(tau0 >= 1.0 / problem.alpha) {
        return Err(Error::InvalidParameter(format!(
            "tau0 = {tau0} below 1/alpha = {}",
            1.0 / problem.alpha
        )));
    }
    Ok(())
}

/// Piecewise-uniform nodes for a given transition parameter. The midpoint
/// node x_{N/2} is set to x_c exactly and the right half mirrors the left,
/// so the mesh is symmetric up to round-off.
fn layer_adapted_nodes(n: usize, tau: f64, problem: &TurningPointProblem) -> Vec<f64> {
    let w = problem.width();
    let h = 4.0 * tau / n as f64;
    let big_h = (w - 2.0 * tau) / (n as f64 / 2.0);
    let quarter = n / 4;
    let half = n / 2;
    let mut nodes = vec![0.0; n + 1];
    for (i, node) in nodes.iter_mut().enumerate().take(quarter + 1) {
        *node = problem.x_lo + i as f64 * h;
    }
    for i in quarter + 1..half {
        nodes[i] = problem.x_lo + tau + (i - quarter) as f64 * big_h;
    }
    nodes[half] = problem.x_c;
    let endpoint_sum = problem.x_lo + problem.x_hi;
    for i in half + 1..=n {
        nodes[i] = endpoint_sum - nodes[n - i];
    }
    nodes
}

/// Layer-resolving mesh with tau = min{W/8, tau0·eps·L}, L per `strategy`.
pub fn generalized_shishkin(
    n: usize,
    eps: f64,
    tau0: f64,
    problem: &TurningPointProblem,
    strategy: LStrategy,
) -> Result<SpatialMesh> {
    check_shishkin_args(n, eps, tau0, problem)?;
    let l = compute_l(n, strategy)?;
    let tau = (problem.width() / 8.0).min(tau0 * eps * l);
    Ok(SpatialMesh {
        nodes: layer_adapted_nodes(n, tau, problem),
        tau,
        kind: MeshKind::GeneralizedShishkin,
        l_value: l,
    })
}

/// Baseline layer-resolving mesh with tau = min{W/8, sigma·eps·ln N}.
pub fn standard_shishkin(
    n: usize,
    eps: f64,
    sigma: f64,
    problem: &TurningPointProblem,
) -> Result<SpatialMesh> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "layer-resolving meshes need N divisible by 4, got {n}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let l = (n as f64).ln();
    let tau = (problem.width() / 8.0).min(sigma * eps * l);
    Ok(SpatialMesh {
        nodes: layer_adapted_nodes(n, tau, problem),
        tau,
        kind: MeshKind::StandardShishkin,
        l_value: l,
    })
}

/// N+1 equally spaced nodes; every interval tagged interior.
pub fn uniform_mesh(n: usize, problem: &TurningPointProblem) -> Result<SpatialMesh> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("uniform mesh needs N >= 2, got {n}")));
    }
    let w = problem.width();
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| problem.x_lo + w * i as f64 / n as f64)
        .collect();
    nodes[n] = problem.x_hi;
    Ok(SpatialMesh {
        nodes,
        tau: 0.0,
        kind: MeshKind::Uniform,
        l_value: 1.0,
    })
}

/// Splits every interval at its arithmetic midpoint. Parent nodes are kept
/// bit-exactly; tau, kind and L are inherited, not recomputed, so the parent
/// grid is nested in the child and double-mesh comparisons need no
/// interpolation.
pub fn bisect(mesh: &SpatialMesh) -> SpatialMesh {
    let n = mesh.n();
    let mut nodes = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        let (l, r) = (mesh.nodes[i], mesh.nodes[i + 1]);
        nodes.push(l);
        nodes.push(0.5 * (l + r));
    }
    nodes.push(mesh.nodes[n]);
    SpatialMesh {
        nodes,
        tau: mesh.tau,
        kind: mesh.kind,
        l_value: mesh.l_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{builtin_problem_1, builtin_problem_2};
    use approx::assert_relative_eq;

    #[test]
    fn log_factor_values() {
        let l = compute_l(32, LStrategy::LogN).unwrap();
        assert_relative_eq!(l, 3.465735902799726, max_relative = 1e-14);
        // side condition e^{-L} <= L/N
        assert!((-l).exp() <= l / 32.0);

        let lw = compute_l(32, LStrategy::LambertW).unwrap();
        // defining identity of the smallest admissible L
        assert_relative_eq!(lw * lw.exp(), 32.0, max_relative = 1e-9);
        assert_relative_eq!(lw, 2.53535, max_relative = 1e-4);

        assert!(compute_l(2, LStrategy::LogN).is_err());
    }

    #[test]
    fn log_factor_admissible_over_range() {
        let mut n = 8usize;
        while n <= 1 << 16 {
            for strategy in [LStrategy::LogN, LStrategy::LambertW] {
                let l = compute_l(n, strategy).unwrap();
                assert!((-l).exp() <= l / n as f64, "e^-L <= L/N fails for N={n} {strategy:?}");
                assert!(l <= (n as f64).ln() * (1.0 + 1e-12), "L <= ln N fails for N={n}");
            }
            n *= 2;
        }
    }

    #[test]
    fn generalized_mesh_matches_hand_computation() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = generalized_shishkin(32, 2f64.powi(-10), 2.0, &p2, LStrategy::LogN).unwrap();
        assert_relative_eq!(mesh.tau(), 6.76901545e-3, max_relative = 1e-8);
        let h = mesh.node(1) - mesh.node(0);
        let big_h = mesh.node(9) - mesh.node(8);
        assert_relative_eq!(h, 8.46126931e-4, max_relative = 1e-8);
        assert_relative_eq!(big_h, 1.24153873e-1, max_relative = 1e-8);
        // nominal step identities
        assert_relative_eq!(h, 4.0 * mesh.tau() / 32.0, max_relative = 1e-13);
        assert_relative_eq!(big_h, (2.0 - 2.0 * mesh.tau()) / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn cap_engages_for_large_eps() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = generalized_shishkin(32, 1.0, 2.0, &p2, LStrategy::LogN).unwrap();
        assert_eq!(mesh.tau(), 0.25);

        let p1 = builtin_problem_1();
        let mesh = standard_shishkin(64, 1.0, 2.0, &p1).unwrap();
        assert_eq!(mesh.tau(), 0.125); // W/8 on a unit-width domain
    }

    #[test]
    fn problem_1_domain_mesh() {
        let p1 = builtin_problem_1();
        let mesh = generalized_shishkin(32, 2f64.powi(-10), 2.0, &p1, LStrategy::LogN).unwrap();
        assert_relative_eq!(mesh.tau(), 6.76901545e-3, max_relative = 1e-8);
        assert_eq!(mesh.node(16), 0.5); // midpoint exact
    }

    #[test]
    fn standard_mesh_formula() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = standard_shishkin(64, 2f64.powi(-10), 2.0, &p2).unwrap();
        // direct evaluation: 2·2^-10·ln 64
        assert_relative_eq!(mesh.tau(), 8.12281852e-3, max_relative = 1e-8);
        // with sigma = tau0 and L = ln N the generalized construction agrees
        let gen = generalized_shishkin(64, 2f64.powi(-10), 2.0, &p2, LStrategy::LogN).unwrap();
        assert_eq!(mesh.nodes(), gen.nodes());
    }

    #[test]
    fn uniform_mesh_nodes() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = uniform_mesh(4, &p2).unwrap();
        assert_eq!(mesh.nodes(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        for i in 1..=4 {
            assert_eq!(mesh.region_of(i), Region::Interior);
        }
        let p1 = builtin_problem_1();
        let fine = uniform_mesh(2048, &p1).unwrap();
        assert_eq!(fine.nodes().len(), 2049);
        assert_relative_eq!(fine.node(1) - fine.node(0), 1.0 / 2048.0, max_relative = 1e-15);
    }

    #[test]
    fn mesh_structure_invariants() {
        let p2 = builtin_problem_2(3).unwrap();
        for (n, eps) in [(32usize, 2f64.powi(-10)), (64, 2f64.powi(-6)), (256, 1e-8)] {
            let mesh = generalized_shishkin(n, eps, 2.0, &p2, LStrategy::LogN).unwrap();
            let nodes = mesh.nodes();
            assert_eq!(nodes[0], -1.0);
            assert_eq!(nodes[n], 1.0);
            assert!(nodes.windows(2).all(|w| w[0] < w[1]), "strictly increasing");
            assert_eq!(nodes[n / 2], 0.0);
            // symmetry about the midpoint
            for i in 0..=n {
                assert!((nodes[i] + nodes[n - i]).abs() <= 4.0 * f64::EPSILON);
            }
            // interval widths: h on the layers, H interior, h <= H
            let h = 4.0 * mesh.tau() / n as f64;
            let big_h = (2.0 - 2.0 * mesh.tau()) / (n as f64 / 2.0);
            assert!(h <= big_h);
            let mut width_sum = 0.0;
            for i in 1..=n {
                let w = nodes[i] - nodes[i - 1];
                width_sum += w;
                let expect = match mesh.region_of(i) {
                    Region::Interior => big_h,
                    _ => h,
                };
                // widths match the nominal steps up to node round-off,
                // which is absolute in the node magnitude (~1), not in h
                assert_relative_eq!(w, expect, max_relative = 1e-12, epsilon = 8.0 * f64::EPSILON);
            }
            assert_relative_eq!(width_sum, 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn region_tags() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = generalized_shishkin(32, 1e-6, 2.0, &p2, LStrategy::LogN).unwrap();
        assert_eq!(mesh.region_of(1), Region::LeftLayer);
        assert_eq!(mesh.region_of(8), Region::LeftLayer);
        assert_eq!(mesh.region_of(9), Region::Interior);
        assert_eq!(mesh.region_of(24), Region::Interior);
        assert_eq!(mesh.region_of(25), Region::RightLayer);
        assert_eq!(mesh.region_of(32), Region::RightLayer);
    }

    #[test]
    fn bisection_nests_and_inherits() {
        let p2 = builtin_problem_2(1).unwrap();
        let coarse = generalized_shishkin(32, 2f64.powi(-10), 2.0, &p2, LStrategy::LogN).unwrap();
        let fine = bisect(&coarse);
        assert_eq!(fine.n(), 64);
        assert_eq!(fine.tau(), coarse.tau());
        assert_eq!(fine.l_value(), coarse.l_value());
        for i in 0..=coarse.n() {
            assert_eq!(fine.node(2 * i), coarse.node(i), "parent node {i} must be kept bit-exactly");
        }
        let finer = bisect(&fine);
        assert_eq!(finer.n(), 128);
        for i in 0..=coarse.n() {
            assert_eq!(finer.node(4 * i), coarse.node(i));
        }
        // region tags inherited per half-interval
        for i in 1..=fine.n() {
            let parent = (i + 1) / 2;
            assert_eq!(fine.region_of(i), coarse.region_of(parent));
        }

        let uni = uniform_mesh(4, &builtin_problem_1());
        let uni = uni.unwrap();
        let fine = bisect(&uni);
        let expect: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        assert_eq!(fine.nodes(), &expect[..]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p2 = builtin_problem_2(1).unwrap();
        assert!(generalized_shishkin(30, 1e-3, 2.0, &p2, LStrategy::LogN).is_err());
        assert!(generalized_shishkin(32, 1e-3, 0.5, &p2, LStrategy::LogN).is_err()); // tau0 < 1/alpha
        assert!(generalized_shishkin(32, -1.0, 2.0, &p2, LStrategy::LogN).is_err());
        assert!(uniform_mesh(1, &p2).is_err());
        assert!(standard_shishkin(32, 1e-3, 0.0, &p2).is_err());
    }

    #[test]
    fn time_mesh_basics() {
        let tm = TimeMesh::new(8, 1.0).unwrap();
        assert_eq!(tm.time(0), 0.0);
        assert_eq!(tm.time(8), 1.0);
        assert_eq!(tm.dt(), 0.125);
        let tm = TimeMesh::new(1000, 0.7).unwrap();
        assert_eq!(tm.time(1000), 0.7);
        assert!(TimeMesh::new(0, 1.0).is_err());
    }

    #[test]
    fn mesh_csv_dump() {
        let p2 = builtin_problem_2(1).unwrap();
        let mesh = uniform_mesh(4, &p2).unwrap();
        let csv = mesh.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i,x,region"));
        assert_eq!(lines.next(), Some("0,-1,interior"));
        assert_eq!(csv.lines().count(), 6);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn layer_meshes_monotone_symmetric_nested(
                n_quarter in 2usize..64,
                eps_exp in -24i32..0,
                tau0 in 1.0f64..4.0,
            ) {
                let n = 4 * n_quarter;
                let p = builtin_problem_2(1).unwrap();
                let eps = 2f64.powi(eps_exp);
                let mesh = generalized_shishkin(n, eps, tau0, &p, LStrategy::LogN).unwrap();
                let nodes = mesh.nodes();
                prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(nodes[n / 2], 0.0);
                for i in 0..=n {
                    prop_assert!((nodes[i] + nodes[n - i]).abs() <= 4.0 * f64::EPSILON);
                }
                let fine = bisect(&mesh);
                for i in 0..=n {
                    prop_assert_eq!(fine.node(2 * i), nodes[i]);
                }
            }
        }
    }
}
