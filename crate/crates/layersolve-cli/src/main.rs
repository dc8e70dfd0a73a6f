//! Command-line front end: convergence studies, mesh dumps and level dumps.

mod config;
mod svg;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{
    parse_eps, resolve_config,EmitKind, LStrategyId, MPolicyArg, Overrides, ProblemId, RunConfig,
    SchemeId,
};
use layersolve::{
    assemble_hybrid, assemble_upwind, build_mesh, run_experiment, solve, ConvergenceTable,
    MeshOptions, Scheme, TurningPointProblem,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "layersolve",
    about = "Layer-resolving finite-difference schemes for turning-point convection-diffusion problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a double-mesh convergence study and emit tables and plots.
    Run(RunArgs),
    /// Print a spatial mesh as CSV (`i,x,region`).
    MeshDump(MeshDumpArgs),
    /// Print one assembled time level as CSV (`i,lower,diag,upper,rhs,tag`).
    LevelDump(LevelDumpArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark problem: p1 or p2.
    #[arg(long)]
    problem: Option<String>,
    /// Turning-point multiplicity (p2 only, odd).
    #[arg(long)]
    p: Option<u32>,
    /// Scheme, repeatable or comma-separated: hybrid-gshishkin,
    /// upwind-uniform, upwind-shishkin.
    #[arg(long = "scheme", value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// eps values, comma-separated; accepts floats or `2^-24` notation.
    #[arg(long = "eps", value_delimiter = ',')]
    eps_list: Option<Vec<String>>,
    /// N values, comma-separated, each divisible by 4.
    #[arg(long = "n", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// equal-n, n-squared or fixed:<M>.
    #[arg(long)]
    m_policy: Option<String>,
    /// Transition factor for the generalized layer mesh (default 2/alpha).
    #[arg(long)]
    tau0: Option<f64>,
    /// Transition factor for the standard layer mesh (default 2/alpha).
    #[arg(long)]
    sigma: Option<f64>,
    /// logN or lambertW.
    #[arg(long)]
    l_strategy: Option<String>,
    /// bisect or regenerate.
    #[arg(long)]
    refine: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Outputs to write: csv, md, svg, surface (comma-separated).
    #[arg(long = "emit", value_delimiter = ',')]
    emit: Option<Vec<String>>,
}

#[derive(Args)]
struct MeshDumpArgs {
    #[arg(long, default_value = "p2")]
    problem: String,
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// gshishkin, shishkin or uniform.
    #[arg(long, default_value = "gshishkin")]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "2^-10")]
    eps: String,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value = "logN")]
    l_strategy: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LevelDumpArgs {
    #[arg(long, default_value = "p2")]
    problem: String,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long, default_value = "hybrid-gshishkin")]
    scheme: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "2^-10")]
    eps: String,
    /// Time level to assemble, 1..=M.
    #[arg(long)]
    level: usize,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value = "logN")]
    l_strategy: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("LAYERSOLVE_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::MeshDump(args) => cmd_mesh_dump(args),
        Command::LevelDump(args) => cmd_level_dump(args),
    }
}

fn overrides_from(args: &RunArgs) -> Result<Overrides> {
    let mut o = Overrides {
        p: args.p,
        tau0: args.tau0,
        sigma: args.sigma,
        out_dir: args.out_dir.clone(),
        n_list: args.n_list.clone(),
        ..Default::default()
    };
    if let Some(p) = &args.problem {
        o.problem = Some(ProblemId::from_str(p)?);
    }
    if let Some(s) = &args.schemes {
        o.schemes = Some(s.iter().map(|v| SchemeId::from_str(v)).collect::<Result<_>>()?);
    }
    if let Some(es) = &args.eps_list {
        o.eps_list = Some(es.iter().map(|v| parse_eps(v)).collect::<Result<_>>()?);
    }
    if let Some(mp) = &args.m_policy {
        o.m_policy = Some(MPolicyArg::from_str(mp)?);
    }
    if let Some(ls) = &args.l_strategy {
        o.l_strategy = Some(LStrategyId::from_str(ls)?);
    }
    if let Some(r) = &args.refine {
        o.refine = Some(config::RefineId::from_str(r)?);
    }
    if let Some(e) = &args.emit {
        o.emit = Some(e.iter().map(|v| EmitKind::from_str(v)).collect::<Result<_>>()?);
    }
    Ok(o)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let cfg = resolve_config(args.config.as_deref(), &overrides_from(&args)?)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.out_dir.display()))?;

    // reproducibility record first, so a crashed run can still be replayed
    let echo = serde_json::to_string_pretty(&cfg)?;
    let echo_path = cfg.out_dir.join("config.json");
    std::fs::write(&echo_path, echo).with_context(|| format!("cannot write {}", echo_path.display()))?;

    let problem = cfg.to_problem()?;
    let label = cfg.problem_label();
    let options = cfg.mesh_options();

    let mut tables: Vec<ConvergenceTable> = Vec::new();
    let mut cell_failures = 0usize;
    let mut io_failures = 0usize;
    for scheme_id in &cfg.schemes {
        let scheme = scheme_id.to_scheme();
        eprintln!("running {} on {label} ({})...", scheme.label(), cfg.m_policy.0.label());
        let table = run_experiment(
            &problem,
            &label,
            scheme,
            &cfg.eps_list,
            &cfg.n_list,
            cfg.m_policy.0,
            &options,
        )
        .map_err(|e| anyhow!("{e}"))?;
        for (ei, ni, msg) in table.failures() {
            cell_failures += 1;
            eprintln!(
                "  cell (eps = {}, N = {}) failed: {msg}",
                layersolve::fmt_sig6(table.eps_list[ei]),
                table.n_list[ni]
            );
        }
        tables.push(table);
    }

    let mut write_file = |path: PathBuf, contents: &str| {
        if let Err(e) = std::fs::write(&path, contents) {
            eprintln!("cannot write {}: {e}", path.display());
            io_failures += 1;
        } else {
            eprintln!("wrote {}", path.display());
        }
    };

    for table in &tables {
        let stem = format!("{}_{}", table.scheme.label(), label);
        if cfg.emit.contains(&EmitKind::Csv) {
            write_file(cfg.out_dir.join(format!("{stem}.csv")), &table.to_csv());
        }
        if cfg.emit.contains(&EmitKind::Md) {
            write_file(cfg.out_dir.join(format!("{stem}.md")), &table.to_markdown());
        }
    }
    if cfg.emit.contains(&EmitKind::Svg) && !tables.is_empty() {
        let refs: Vec<&ConvergenceTable> = tables.iter().collect();
        let title = svg::title_for(&refs, &label);
        write_file(
            cfg.out_dir.join(format!("convergence_{label}.svg")),
            &svg::convergence_svg(&refs, &title),
        );
    }
    if cfg.emit.contains(&EmitKind::Surface) {
        match surface_dumps(&cfg, &problem, &label) {
            Ok(files) => {
                for (path, contents) in files {
                    write_file(path, &contents);
                }
            }
            Err(e) => {
                eprintln!("surface dump failed: {e:#}");
                io_failures += 1;
            }
        }
    }

    if cell_failures > 0 || io_failures > 0 {
        eprintln!("{cell_failures} cell failure(s), {io_failures} output failure(s)");
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

/// Solution surfaces for external plotting: per scheme, the largest N not
/// above 256 (for file size) at the smallest eps of the run.
fn surface_dumps(
    cfg: &RunConfig,
    problem: &TurningPointProblem,
    label: &str,
) -> Result<Vec<(PathBuf, String)>> {
    let n = cfg
        .n_list
        .iter()
        .copied()
        .filter(|&n| n <= 256)
        .max()
        .unwrap_or_else(|| cfg.n_list[0]);
    let eps = cfg.eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let m = cfg.m_policy.0.m_for(n);
    let options = cfg.mesh_options();
    let mut out = Vec::new();
    for scheme_id in &cfg.schemes {
        let scheme = scheme_id.to_scheme();
        let grid = solve(problem, scheme, n, m, eps, &options).map_err(|e| anyhow!("{e}"))?;
        out.push((
            cfg.out_dir.join(format!("surface_{}_{label}.csv", scheme.label())),
            grid.surface_csv(129),
        ));
    }
    Ok(out)
}

fn problem_from(name: &str, p: u32) -> Result<TurningPointProblem> {
    match ProblemId::from_str(name)? {
        ProblemId::P1 => Ok(layersolve::builtin_problem_1()),
        ProblemId::P2 => layersolve::builtin_problem_2(p).map_err(|e| anyhow!("{e}")),
    }
}

fn emit_or_stdout(out: Option<&PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn cmd_mesh_dump(args: MeshDumpArgs) -> Result<ExitCode> {
    let problem = problem_from(&args.problem, args.p)?;
    let eps = parse_eps(&args.eps)?;
    let l_strategy = LStrategyId::from_str(&args.l_strategy)?.to_strategy();
    let mesh = match args.kind.to_ascii_lowercase().as_str() {
        "gshishkin" => layersolve::generalized_shishkin(
            args.n,
            eps,
            args.tau0.unwrap_or_else(|| problem.default_tau0()),
            &problem,
            l_strategy,
        ),
        "shishkin" => layersolve::standard_shishkin(
            args.n,
            eps,
            args.sigma.unwrap_or_else(|| problem.default_tau0()),
            &problem,
        ),
        "uniform" => layersolve::uniform_mesh(args.n, &problem),
        other => bail!("unknown mesh kind '{other}' (expected gshishkin, shishkin or uniform)"),
    }
    .map_err(|e| anyhow!("{e}"))?;
    emit_or_stdout(args.out.as_ref(), &mesh.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_level_dump(args: LevelDumpArgs) -> Result<ExitCode> {
    if args.level == 0 || args.level > args.m {
        bail!("level must lie in 1..=M");
    }
    let problem = problem_from(&args.problem, args.p)?;
    let eps = parse_eps(&args.eps)?;
    let scheme = SchemeId::from_str(&args.scheme)?.to_scheme();
    let options = MeshOptions {
        tau0: args.tau0,
        sigma: args.sigma,
        l_strategy: LStrategyId::from_str(&args.l_strategy)?.to_strategy(),
        refine: layersolve::RefineMode::Bisect,
    };
    let grid = solve(&problem, scheme, args.n, args.m, eps, &options).map_err(|e| anyhow!("{e}"))?;
    let u_prev = grid.level(args.level - 1).ok_or_else(|| {
        anyhow!(
            "level {} not retained (grid stride {}); choose a retained level or a smaller M",
            args.level - 1,
            grid.retention_stride()
        )
    })?;
    let mesh = build_mesh(&problem, scheme, args.n, eps, &options).map_err(|e| anyhow!("{e}"))?;
    let t = grid.time_mesh().time(args.level);
    let dt = grid.time_mesh().dt();
    let system = match scheme {
        Scheme::HybridGeneralizedShishkin => assemble_hybrid(&problem, &mesh, eps, dt, u_prev, t),
        _ => assemble_upwind(&problem, &mesh, eps, dt, u_prev, t),
    }
    .map_err(|e| anyhow!("{e}"))?;
    emit_or_stdout(args.out.as_ref(), &system.to_csv())?;
    Ok(ExitCode::SUCCESS)
}
