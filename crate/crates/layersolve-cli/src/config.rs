//! Run configuration: defaults, JSON config file, flag overrides.
//!
//! Precedence is flags over file over defaults. The fully resolved
//! configuration is echoed to the output directory as `config.json`;
//! re-running with `--config <that file>` reproduces the run bit-for-bit.

use anyhow::{anyhow, bail, Context, Result};
use layersolve::{LStrategy, MPolicy, RefineMode, Scheme};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    P1,
    P2,
}

impl FromStr for ProblemId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(ProblemId::P1),
            "p2" => Ok(ProblemId::P2),
            other => bail!("unknown problem '{other}' (expected p1 or p2)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "hybrid-gshishkin")]
    HybridGShishkin,
    #[serde(rename = "upwind-uniform")]
    UpwindUniform,
    #[serde(rename = "upwind-shishkin")]
    UpwindShishkin,
}

impl SchemeId {
    pub fn to_scheme(self) -> Scheme {
        match self {
            SchemeId::HybridGShishkin => Scheme::HybridGeneralizedShishkin,
            SchemeId::UpwindUniform => Scheme::UpwindUniform,
            SchemeId::UpwindShishkin => Scheme::UpwindShishkin,
        }
    }
}

impl FromStr for SchemeId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hybrid-gshishkin" => Ok(SchemeId::HybridGShishkin),
            "upwind-uniform" => Ok(SchemeId::UpwindUniform),
            "upwind-shishkin" => Ok(SchemeId::UpwindShishkin),
            other => bail!(
                "unknown scheme '{other}' (expected hybrid-gshishkin, upwind-uniform or upwind-shishkin)"
            ),
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_scheme().label())
    }
}

/// `equal-n`, `n-squared` or `fixed:<M>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MPolicyArg(pub MPolicy);

impl FromStr for MPolicyArg {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "equal-n" {
            Ok(MPolicyArg(MPolicy::EqualN))
        } else if lower == "n-squared" {
            Ok(MPolicyArg(MPolicy::NSquared))
        } else if let Some(m) = lower.strip_prefix("fixed:") {
            let m: usize = m.parse().context("fixed:<M> needs a positive integer")?;
            if m == 0 {
                bail!("fixed:<M> needs M >= 1");
            }
            Ok(MPolicyArg(MPolicy::Fixed(m)))
        } else {
            bail!("unknown m-policy '{s}' (expected equal-n, n-squared or fixed:<M>)")
        }
    }
}

impl fmt::Display for MPolicyArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label())
    }
}

impl Serialize for MPolicyArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.label())
    }
}

impl<'de> Deserialize<'de> for MPolicyArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LStrategyId {
    #[serde(rename = "logN")]
    LogN,
    #[serde(rename = "lambertW")]
    LambertW,
}

impl LStrategyId {
    pub fn to_strategy(self) -> LStrategy {
        match self {
            LStrategyId::LogN => LStrategy::LogN,
            LStrategyId::LambertW => LStrategy::LambertW,
        }
    }
}

impl FromStr for LStrategyId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logn" => Ok(LStrategyId::LogN),
            "lambertw" => Ok(LStrategyId::LambertW),
            other => bail!("unknown l-strategy '{other}' (expected logN or lambertW)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineId {
    Bisect,
    Regenerate,
}

impl RefineId {
    pub fn to_mode(self) -> RefineMode {
        match self {
            RefineId::Bisect => RefineMode::Bisect,
            RefineId::Regenerate => RefineMode::Regenerate,
        }
    }
}

impl FromStr for RefineId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bisect" => Ok(RefineId::Bisect),
            "regenerate" => Ok(RefineId::Regenerate),
            other => bail!("unknown refine mode '{other}' (expected bisect or regenerate)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitKind {
    Csv,
    Md,
    Svg,
    Surface,
}

impl FromStr for EmitKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(EmitKind::Csv),
            "md" => Ok(EmitKind::Md),
            "svg" => Ok(EmitKind::Svg),
            "surface" => Ok(EmitKind::Surface),
            other => bail!("unknown emit kind '{other}' (expected csv, md, svg or surface)"),
        }
    }
}

/// The fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub problem: ProblemId,
    pub p: u32,
    pub schemes: Vec<SchemeId>,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub m_policy: MPolicyArg,
    /// Transition factor of the generalized layer mesh; `None` = 2/alpha.
    pub tau0: Option<f64>,
    /// Transition factor of the standard layer mesh; `None` = 2/alpha.
    pub sigma: Option<f64>,
    pub l_strategy: LStrategyId,
    pub refine: RefineId,
    pub out_dir: PathBuf,
    pub emit: Vec<EmitKind>,
}

/// Config-file shape: every key optional, unknown keys rejected with the
/// offending name.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PartialConfig {
    pub problem: Option<ProblemId>,
    pub p: Option<u32>,
    pub schemes: Option<Vec<SchemeId>>,
    pub eps_list: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub m_policy: Option<MPolicyArg>,
    pub tau0: Option<f64>,
    pub sigma: Option<f64>,
    pub l_strategy: Option<LStrategyId>,
    pub refine: Option<RefineId>,
    pub out_dir: Option<PathBuf>,
    pub emit: Option<Vec<EmitKind>>,
}

pub fn default_eps_list() -> Vec<f64> {
    (3..=12).map(|k| 2f64.powi(-2 * k)).collect()
}

pub fn default_n_list() -> Vec<usize> {
    vec![32, 64, 128, 256, 512, 1024, 2048]
}

/// Parses an eps entry: a plain float or `<base>^<exp>` (e.g. `2^-24`).
pub fn parse_eps(s: &str) -> Result<f64> {
    let v = if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.trim().parse().map_err(|_| anyhow!("bad eps base in '{s}'"))?;
        let exp: i32 = exp.trim().parse().map_err(|_| anyhow!("bad eps exponent in '{s}'"))?;
        base.powi(exp)
    } else {
        s.trim().parse().map_err(|_| anyhow!("bad eps value '{s}'"))?
    };
    Ok(v)
}

/// Flag-level overrides, each `None` when the flag was not given.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub problem: Option<ProblemId>,
    pub p: Option<u32>,
    pub schemes: Option<Vec<SchemeId>>,
    pub eps_list: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub m_policy: Option<MPolicyArg>,
    pub tau0: Option<f64>,
    pub sigma: Option<f64>,
    pub l_strategy: Option<LStrategyId>,
    pub refine: Option<RefineId>,
    pub out_dir: Option<PathBuf>,
    pub emit: Option<Vec<EmitKind>>,
}

/// Resolves defaults <- config file <- flags and validates the result.
pub fn resolve_config(file: Option<&Path>, flags: &Overrides) -> Result<RunConfig> {
    let from_file: PartialConfig = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("cannot parse config file {}", path.display()))?
        }
        None => PartialConfig::default(),
    };

    let pick = |flag: Option<ProblemId>, file: Option<ProblemId>, dflt| flag.or(file).unwrap_or(dflt);
    let problem = pick(flags.problem, from_file.problem, ProblemId::P1);
    let p = flags.p.or(from_file.p).unwrap_or(1);
    let schemes = flags
        .schemes
        .clone()
        .or(from_file.schemes)
        .unwrap_or_else(|| {
            vec![SchemeId::HybridGShishkin, SchemeId::UpwindUniform, SchemeId::UpwindShishkin]
        });
    let m_policy = flags.m_policy.or(from_file.m_policy).unwrap_or(MPolicyArg(MPolicy::EqualN));
    let eps_list = flags.eps_list.clone().or(from_file.eps_list).unwrap_or_else(default_eps_list);
    let n_list = flags.n_list.clone().or(from_file.n_list).unwrap_or_else(|| {
        let mut ns = default_n_list();
        // the default sweep stops at 512 when every run takes N² steps
        if matches!(m_policy.0, MPolicy::NSquared) {
            ns.retain(|&n| n <= 512);
        }
        ns
    });
    let config = RunConfig {
        problem,
        p,
        schemes,
        eps_list,
        n_list,
        m_policy,
        tau0: flags.tau0.or(from_file.tau0),
        sigma: flags.sigma.or(from_file.sigma),
        l_strategy: flags.l_strategy.or(from_file.l_strategy).unwrap_or(LStrategyId::LogN),
        refine: flags.refine.or(from_file.refine).unwrap_or(RefineId::Bisect),
        out_dir: flags
            .out_dir
            .clone()
            .or(from_file.out_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        emit: flags
            .emit
            .clone()
            .or(from_file.emit)
            .unwrap_or_else(|| vec![EmitKind::Csv, EmitKind::Md, EmitKind::Svg]),
    };
    validate_config(&config)?;
    Ok(config)
}

pub fn validate_config(config: &RunConfig) -> Result<()> {
    if config.p == 0 || config.p % 2 == 0 {
        bail!("p must be a positive odd integer, got {}", config.p);
    }
    if config.schemes.is_empty() {
        bail!("at least one scheme must be selected");
    }
    if config.eps_list.is_empty() {
        bail!("eps list must be non-empty");
    }
    for &eps in &config.eps_list {
        if !(eps > 0.0 && eps <= 1.0) {
            bail!("eps entries must lie in (0, 1], got {eps}");
        }
    }
    if config.n_list.is_empty() {
        bail!("N list must be non-empty");
    }
    for &n in &config.n_list {
        if n == 0 || n % 4 != 0 {
            bail!("N list entries must be divisible by 4, got {n}");
        }
    }
    if !config.n_list.windows(2).all(|w| w[0] < w[1]) {
        bail!("N list must be strictly ascending");
    }
    if let Some(tau0) = config.tau0 {
        if !(tau0 > 0.0) {
            bail!("tau0 must be positive, got {tau0}");
        }
    }
    if let Some(sigma) = config.sigma {
        if !(sigma > 0.0) {
            bail!("sigma must be positive, got {sigma}");
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn to_problem(&self) -> Result<layersolve::TurningPointProblem> {
        match self.problem {
            ProblemId::P1 => Ok(layersolve::builtin_problem_1()),
            ProblemId::P2 => layersolve::builtin_problem_2(self.p).map_err(|e| anyhow!("{e}")),
        }
    }

    pub fn problem_label(&self) -> String {
        match self.problem {
            ProblemId::P1 => "p1".into(),
            ProblemId::P2 => format!("p2-p{}", self.p),
        }
    }

    pub fn mesh_options(&self) -> layersolve::MeshOptions {
        layersolve::MeshOptions {
            tau0: self.tau0,
            sigma: self.sigma,
            l_strategy: self.l_strategy.to_strategy(),
            refine: self.refine.to_mode(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = resolve_config(None, &Overrides::default()).unwrap();
        assert_eq!(cfg.problem, ProblemId::P1);
        assert_eq!(cfg.p, 1);
        assert_eq!(cfg.schemes.len(), 3);
        assert_eq!(cfg.eps_list.len(), 10);
        assert_eq!(cfg.eps_list[0], 2f64.powi(-6));
        assert_eq!(*cfg.eps_list.last().unwrap(), 2f64.powi(-24));
        assert_eq!(cfg.n_list, vec![32, 64, 128, 256, 512, 1024, 2048]);
        assert_eq!(cfg.m_policy.0, MPolicy::EqualN);
        assert_eq!(cfg.refine, RefineId::Bisect);
        assert_eq!(cfg.emit, vec![EmitKind::Csv, EmitKind::Md, EmitKind::Svg]);
    }

    #[test]
    fn n_squared_caps_default_n_list() {
        let flags = Overrides {
            m_policy: Some("n-squared".parse().unwrap()),
            ..Default::default()
        };
        let cfg = resolve_config(None, &flags).unwrap();
        assert_eq!(cfg.n_list, vec![32, 64, 128, 256, 512]);
        // but an explicit list wins over the cap
        let flags = Overrides {
            m_policy: Some("n-squared".parse().unwrap()),
            n_list: Some(vec![32, 64, 1024]),
            ..Default::default()
        };
        let cfg = resolve_config(None, &flags).unwrap();
        assert_eq!(cfg.n_list, vec![32, 64, 1024]);
    }

    #[test]
    fn table5_style_flags() {
        let flags = Overrides {
            problem: Some(ProblemId::P2),
            p: Some(3),
            schemes: Some(vec![SchemeId::HybridGShishkin]),
            m_policy: Some("n-squared".parse().unwrap()),
            ..Default::default()
        };
        let cfg = resolve_config(None, &flags).unwrap();
        assert_eq!(cfg.problem, ProblemId::P2);
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.schemes, vec![SchemeId::HybridGShishkin]);
        assert_eq!(cfg.m_policy.0, MPolicy::NSquared);
        assert_eq!(cfg.problem_label(), "p2-p3");
    }

    #[test]
    fn even_p_rejected() {
        let flags = Overrides { p: Some(2), ..Default::default() };
        let err = resolve_config(None, &flags).unwrap_err().to_string();
        assert!(err.contains("odd"), "{err}");
    }

    #[test]
    fn bad_values_rejected() {
        let mut flags = Overrides { eps_list: Some(vec![1.5]), ..Default::default() };
        assert!(resolve_config(None, &flags).is_err());
        flags = Overrides { n_list: Some(vec![30]), ..Default::default() };
        assert!(resolve_config(None, &flags).is_err());
        flags = Overrides { schemes: Some(vec![]), ..Default::default() };
        assert!(resolve_config(None, &flags).is_err());
    }

    #[test]
    fn file_then_flags_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"problem":"p2","p":3,"tau0":1.5}"#).unwrap();
        let cfg = resolve_config(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(cfg.problem, ProblemId::P2);
        assert_eq!(cfg.tau0, Some(1.5));
        let flags = Overrides { tau0: Some(2.25), ..Default::default() };
        let cfg = resolve_config(Some(&path), &flags).unwrap();
        assert_eq!(cfg.tau0, Some(2.25));
        assert_eq!(cfg.p, 3);
    }

    #[test]
    fn unknown_config_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"problme":"p2"}"#).unwrap();
        let err = format!("{:#}", resolve_config(Some(&path), &Overrides::default()).unwrap_err());
        assert!(err.contains("problme"), "{err}");
    }

    #[test]
    fn config_roundtrips_through_echo() {
        let flags = Overrides {
            problem: Some(ProblemId::P2),
            p: Some(3),
            eps_list: Some(vec![2f64.powi(-6), 2f64.powi(-24)]),
            tau0: Some(1.845),
            ..Default::default()
        };
        let cfg = resolve_config(None, &flags).unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("echo.json");
        std::fs::write(&path, &json).unwrap();
        let re = resolve_config(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(cfg, re);
    }

    #[test]
    fn eps_parser_accepts_powers() {
        assert_eq!(parse_eps("2^-24").unwrap(), 2f64.powi(-24));
        assert_eq!(parse_eps("0.25").unwrap(), 0.25);
        assert_eq!(parse_eps("1e-3").unwrap(), 1e-3);
        assert!(parse_eps("two^3").is_err());
    }
}
