use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nurbs_sem::basis::PointStrategy;
use nurbs_sem::bench::{self, BcMode, ExperimentConfig, GeometryId, Levels, ProblemKind};

#[derive(Parser)]
#[command(name = "nurbs-sem", version, about = "Spectral element and isogeometric benchmarks on NURBS surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark experiment and write its CSV.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment number (1..6).
    #[arg(long)]
    experiment: u8,
    /// Comma separated methods, e.g. SG,LG.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, requires = "pmax", conflicts_with = "ksteps")]
    pmin: Option<usize>,
    #[arg(long, requires = "pmin", conflicts_with = "ksteps")]
    pmax: Option<usize>,
    /// Number of k-refinement steps (levels 0..=M).
    #[arg(long)]
    ksteps: Option<usize>,
    #[arg(long)]
    bc: Option<BcMode>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    points: Option<PointStrategy>,
    /// Built-in surface: annulus, annulus-one-span, oblique, c-surface.
    #[arg(long)]
    surface: Option<GeometryId>,
    /// Fixed-point tolerance for Allen-Cahn.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Directory for the plot script.
    #[arg(long)]
    plots: Option<PathBuf>,
    /// Geometry file replacing the built-in surface.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Record wall time per cell (output is no longer reproducible).
    #[arg(long)]
    wall_time: bool,
}

fn config(a: &RunArgs) -> nurbs_sem::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::table(a.experiment)?;
    if let Some(m) = &a.methods {
        cfg.methods = bench::parse_methods(m)?;
    }
    if let (Some(pmin), Some(pmax)) = (a.pmin, a.pmax) {
        cfg.levels = Levels::Degrees { pmin, pmax };
    }
    if let Some(max) = a.ksteps {
        cfg.levels = Levels::KSteps { max };
    }
    if let Some(b) = a.bc {
        cfg.bc = b;
    }
    if let Some(p) = a.problem {
        cfg.problem = p;
    }
    if let Some(p) = a.points {
        cfg.points = p;
    }
    if let Some(s) = a.surface {
        cfg.geometry = s;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if let Some(n) = a.max_iter {
        cfg.max_iter = n;
    }
    cfg.geometry_file = a.geometry.clone();
    cfg.wall_time = a.wall_time;
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: &RunArgs) -> ExitCode {
    let cfg = match config(a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match bench::run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = bench::emit_csv(&rows, &a.out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Some(dir) = &a.plots {
        match bench::emit_plot_script(cfg.id, &a.out, dir) {
            Ok(p) => eprintln!("plot script: {}", p.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    eprintln!("{} rows written to {}, {failed} failed", rows.len(), a.out.display());
    if failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Run(a) => run(a),
    }
}
