//! Command line front end: catalog browsing, field rasterization,
//! Monte Carlo correlation validation, exact-oracle comparisons, and
//! central-limit sums.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! validation run fails its calibration bounds.

mod output;
mod pairs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mosaic_fields::analytics::catalog::{self, CatalogParams, CorrelationModel};
use mosaic_fields::analytics::{self, LinearF};
use mosaic_fields::config;
use mosaic_fields::dist::CountDistribution;
use mosaic_fields::error::Error;
use mosaic_fields::estimate::{
    calibration, compare_report, estimate_correlation, fmt17, Calibration, PairDesign,
};
use mosaic_fields::field::{normalized_sum, raster, FieldModel, GridSpec, Submodel};
use mosaic_fields::rng::{Generator, StreamKey};

#[derive(Parser)]
#[command(
    name = "mosaic",
    version,
    about = "Mosaic random field simulator and validator"
)]
struct Cli {
    /// Worker threads for Monte Carlo loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the built-in catalog of correlation models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Rasterize one realization of a model onto a grid.
    Simulate(SimulateArgs),
    /// Estimate correlations by Monte Carlo and compare with closed forms.
    Correlate(CorrelateArgs),
    /// Compare closed-form conditional moments against exact enumeration.
    Oracle(OracleArgs),
    /// Normalized sums of independent realizations (central limit check).
    Sum(SumArgs),
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List all row identifiers with their formulas.
    List,
    /// Show one row: formula, generating model, correlation table.
    Show {
        /// Row id (`e1`..`e10`, `s1`..`s11`).
        id: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Number of correlation table points.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

/// Catalog row parameters (each row reads the subset it uses).
#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    cm: Option<f64>,
    #[arg(long)]
    poisson: Option<f64>,
}

impl ParamArgs {
    fn apply(&self) -> CatalogParams {
        let mut p = CatalogParams::default();
        macro_rules! set {
            ($($field:ident <- $arg:ident),*) => {
                $(if let Some(v) = self.$arg { p.$field = v; })*
            };
        }
        set!(alpha <- alpha, beta <- beta, c <- c, c2 <- c2, lambda1 <- lambda1,
             lambda2 <- lambda2, a <- a, a1 <- a1, a2 <- a2, r <- r, c_m <- cm,
             poisson <- poisson);
        if let Some(v) = self.n {
            p.n = v;
        }
        p
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum RasterFormat {
    Pgm,
    Csv,
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Grid size as WIDTHxHEIGHT.
    #[arg(long, default_value = "256x256")]
    grid: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RasterFormat::Pgm)]
    format: RasterFormat,
    /// Root seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Run configuration file (alternative to --row).
    #[arg(long, conflicts_with = "row")]
    config: Option<PathBuf>,
    /// Catalog row id (alternative to --config).
    #[arg(long)]
    row: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    /// Distances: `d1,d2,...` or `start:stop:count`.
    #[arg(long)]
    pairs: Option<String>,
    /// Independent replicates.
    #[arg(long, default_value_t = 10_000)]
    replicates: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Conditioning value of the set count.
    #[arg(long)]
    n: u64,
    /// Distances: `d1,d2,...` or `start:stop:count`.
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SumArgs {
    #[arg(long, conflicts_with = "row")]
    config: Option<PathBuf>,
    #[arg(long)]
    row: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    /// Copies per normalized sum.
    #[arg(long, default_value_t = 200)]
    m: u64,
    /// Number of independent sums.
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    /// Distances of the evaluation points from the anchor.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Catalog { action } => run_catalog(action),
        Command::Simulate(args) => run_simulate(args),
        Command::Correlate(args) => run_correlate(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Sum(args) => run_sum(args),
    }
}

/// Accept table-style aliases (`t1r4` -> `e4`, `t2r5` -> `s5`).
fn canonical_row_id(id: &str) -> String {
    if let Some(rest) = id.strip_prefix("t1r") {
        format!("e{rest}")
    } else if let Some(rest) = id.strip_prefix("t2r") {
        format!("s{rest}")
    } else {
        id.to_string()
    }
}

fn load_row(id: &str, params: &ParamArgs) -> Result<CorrelationModel, Error> {
    catalog::row(&canonical_row_id(id), &params.apply())
}

fn run_catalog(action: CatalogAction) -> Result<ExitCode, Error> {
    match action {
        CatalogAction::List => {
            let defaults = CatalogParams::default();
            println!("{:<5} {:<62} constraints", "id", "correlation");
            for id in catalog::list() {
                let entry = catalog::row(id, &defaults)?;
                println!(
                    "{:<5} {:<62} {}",
                    entry.id, entry.formula, entry.constraints
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        CatalogAction::Show { id, params, points } => {
            let entry = load_row(&id, &params)?;
            println!("row:         {}", entry.id);
            println!("correlation: {}", entry.formula);
            println!("constraints: {}", entry.constraints);
            println!("model:       {:?} field", entry.model.submodel);
            println!("  space:  {:?}", entry.model.space);
            println!("  sets:   {:?}", entry.model.sets);
            println!("  count:  {:?}", entry.model.count);
            println!("  value:  {:?}", entry.model.value);
            println!();
            println!("{:>12}  {:>24}", "d", "rho(d)");
            let diam = entry.model.space.diameter();
            for i in 0..points.max(1) {
                let d = diam * i as f64 / (points.max(2) - 1) as f64;
                println!("{:>12.6}  {:>24.16}", d, entry.rho(d));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &PathBuf) -> Result<config::RunConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    config::parse(&text)
}

fn parse_grid(text: &str) -> Result<GridSpec, Error> {
    let (w, h) = text
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("grid '{text}' is not WIDTHxHEIGHT")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("grid '{text}' is not WIDTHxHEIGHT")))
    };
    Ok(GridSpec {
        width: parse(w)?,
        height: parse(h)?,
    })
}

fn run_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config)?;
    let model = cfg.build_model()?;
    let seed = args.seed.or(cfg.seed).unwrap_or(42);
    let grid = parse_grid(&args.grid)?;
    let g = Generator::from_seed(seed);
    let matrix = raster(&model, &grid, &g)?;
    let text = match args.format {
        RasterFormat::Pgm => output::pgm(&matrix),
        RasterFormat::Csv => output::raster_csv(&matrix),
    };
    output::write_out(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn build_model_for(
    config: &Option<PathBuf>,
    row: &Option<String>,
    params: &ParamArgs,
    seed_flag: Option<u64>,
) -> Result<(FieldModel, u64), Error> {
    match (config, row) {
        (Some(path), None) => {
            let cfg = load_config(path)?;
            let seed = seed_flag.or(cfg.seed).unwrap_or(42);
            Ok((cfg.build_model()?, seed))
        }
        (None, Some(id)) => Ok((load_row(id, params)?.model, seed_flag.unwrap_or(42))),
        _ => Err(Error::Config(
            "exactly one of --config or --row is required".to_string(),
        )),
    }
}

fn run_correlate(args: CorrelateArgs) -> Result<ExitCode, Error> {
    let (model, seed) = build_model_for(&args.config, &args.row, &args.params, args.seed)?;
    let distances = match &args.pairs {
        Some(spec) => pairs::parse_distances(spec)?,
        None => pairs::default_distances(&model.space, &model.sets),
    };
    let design = PairDesign::along_axis(&model.space, &distances)?;
    let g = Generator::from_seed(seed);
    let rows = estimate_correlation(&model, &design, args.replicates, &g)?;
    output::write_out(args.out.as_deref(), &compare_report(&rows))?;
    match calibration(&rows) {
        Calibration::Pass => Ok(ExitCode::SUCCESS),
        Calibration::Flagged => {
            eprintln!("note: one design point exceeded |z| > 4 (allowed)");
            Ok(ExitCode::SUCCESS)
        }
        Calibration::Failed => {
            eprintln!("validation failed: two or more design points with |z| > 4");
            Ok(ExitCode::from(2))
        }
    }
}

fn run_oracle(args: OracleArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config)?;
    let model = cfg.build_model()?;
    let distances = match &args.pairs {
        Some(spec) => pairs::parse_distances(spec)?,
        None => pairs::default_distances(&model.space, &model.sets)[..5].to_vec(),
    };
    let design = PairDesign::along_axis(&model.space, &distances)?;
    let n = args.n;
    let conditioned = CountDistribution::deterministic(n);
    let profile = match &model.submodel {
        Submodel::GeneralLinear { a, b, c_min, g } => {
            (LinearF::new(*a, *b, (*c_min).max(n * b))?, *g)
        }
        other => analytics::submodel_profile(other).expect("built-in submodels have profiles"),
    };
    let px = model.sets.hit_prob_single(&design.anchor)?;
    let mut out = String::from("d,p_xy,closed_mean,oracle_mean,closed_mixed,oracle_mixed\n");
    let mut worst: f64 = 0.0;
    for (d, probe) in &design.probes {
        let py = model.sets.hit_prob_single(probe)?;
        let pxy = model.sets.hit_prob_pair(&design.anchor, probe)?;
        let closed = analytics::mixed_moment_general(
            &profile.0,
            profile.1,
            &conditioned,
            px,
            py,
            pxy,
            &model.value,
        )?;
        let oracle =
            analytics::enumerate_oracle(n, &profile.0, profile.1, px, py, pxy, &model.value)?;
        worst = worst
            .max((closed.mixed_moment - oracle.mixed_moment).abs())
            .max((closed.mean_x - oracle.mean_x).abs());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(*d),
            fmt17(pxy),
            fmt17(closed.mean_x),
            fmt17(oracle.mean_x),
            fmt17(closed.mixed_moment),
            fmt17(oracle.mixed_moment)
        ));
    }
    output::write_out(args.out.as_deref(), &out)?;
    if worst > 1e-11 {
        eprintln!("validation failed: closed forms deviate from the oracle by {worst:e}");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sum(args: SumArgs) -> Result<ExitCode, Error> {
    let (model, seed) = build_model_for(&args.config, &args.row, &args.params, args.seed)?;
    let distances = match &args.points {
        Some(spec) => pairs::parse_distances(spec)?,
        None => pairs::default_distances(&model.space, &model.sets)[..3].to_vec(),
    };
    let design = PairDesign::along_axis(&model.space, &distances)?;
    let mut points = vec![design.anchor.clone()];
    points.extend(design.probes.iter().map(|(_, p)| p.clone()));
    let g = Generator::from_seed(seed);
    let mut sums = vec![0.0f64; points.len()];
    let mut sq = vec![0.0f64; points.len()];
    for run in 0..args.runs {
        let rg = g.derive(&StreamKey::new(31).with_u64(run));
        let values = normalized_sum(&model, args.m, &points, &rg)?;
        for (j, v) in values.iter().enumerate() {
            sums[j] += v;
            sq[j] += v * v;
        }
    }
    let runs = args.runs as f64;
    let mut out = String::from("d,mean,variance\n");
    let mut ds = vec![0.0];
    ds.extend(distances.iter());
    for (j, d) in ds.iter().enumerate() {
        let mean = sums[j] / runs;
        let var = sq[j] / runs - mean * mean;
        out.push_str(&format!("{},{},{}\n", fmt17(*d), fmt17(mean), fmt17(var)));
    }
    output::write_out(args.out.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}
