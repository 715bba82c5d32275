//! Command-line driver: `gen-data`, `train`, `eval`, `sample`, `observables`
//! and `export-matrices`.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{GridConfig, RunConfig};

use crate::coeffnet::{save_checkpoint, Checkpoint, Model, Normalization, Trainer};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_fields, sample_from_density};
use crate::io::write_matrix_csv;
use crate::problems::{central_x_grid, reference_posterior, EvalGrid};
use crate::spectral_basis::{BasisOperators, BasisSpec, Measure};

/// Worker-count override for column-parallel evaluation.
pub const THREADS_ENV: &str = "BORN_DENSITY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "born-density", version, about = "Born-rule conditional density estimation")]
pub struct Cli {
    /// Worker threads (default: BORN_DENSITY_THREADS, else all processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw (x, t) pairs from a built-in forward problem.
    GenData(GenDataArgs),
    /// Train a coefficient network.
    Train(TrainArgs),
    /// Compare a trained model with the analytic reference posterior.
    Eval(EvalArgs),
    /// Draw samples from the model density at one input.
    Sample(SampleArgs),
    /// Moments, exceedances and energies at a list of inputs.
    Observables(ObservablesArgs),
    /// Write the basis matrices as CSV.
    ExportMatrices(ExportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    Analytic,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureArg {
    Mu,
    Y,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub problem: Option<String>,
    /// Dataset CSV written by gen-data; generated on the fly otherwise.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Dataset seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initialization and shuffling seed.
    #[arg(long)]
    pub train_seed: Option<u64>,
    /// Basis order K.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub lambda_kin: Option<f64>,
    #[arg(long)]
    pub lambda_pot: Option<f64>,
    /// Print one line per epoch.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, required_unless_present = "self_eval")]
    pub checkpoint: Option<PathBuf>,
    /// Compare the reference with itself.
    #[arg(long)]
    pub self_eval: bool,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub peel: Option<f64>,
    #[arg(long)]
    pub smooth: bool,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long)]
    pub rho_ref: Option<f64>,
    #[arg(long)]
    pub rho_model: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 1200)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows of the density column the samples are drawn from.
    #[arg(long, default_value_t = 2001)]
    pub ny: usize,
    #[arg(long, default_value = "samples")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ObservablesArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Vec<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Take basis and potential from a checkpoint.
    #[arg(long, conflicts_with = "k")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub problem: Option<String>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or names: exit 2.
    Usage(String),
    /// Anything that went wrong while running: exit 1.
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Observables(a) => cmd_observables(a),
        Command::ExportMatrices(a) => cmd_export_matrices(a),
    }
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a count")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env).filter(|&n| n > 0) {
        // a pool may already exist when run is called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn base_config(common: &CommonArgs) -> CliResult<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn finish_config(config: RunConfig) -> CliResult<RunConfig> {
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

pub fn cmd_gen_data(args: GenDataArgs) -> CliResult<()> {
    let mut config = base_config(&args.common)?;
    if let Some(p) = args.problem {
        config.problem = p;
    }
    if let Some(n) = args.n {
        config.n_samples = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.dataset = None;
    let config = finish_config(config)?;
    let problem = config.forward_problem()?;
    let data = config.dataset()?;
    data.save(&problem, &config.output_dir, "data")?;
    config.write_resolved(&config.output_dir)?;
    println!(
        "wrote {} pairs of {} to {}",
        data.len(),
        problem.name,
        config.output_dir.join("data.csv").display()
    );
    Ok(())
}

pub fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let mut config = base_config(&args.common)?;
    if let Some(p) = args.problem {
        config.problem = p;
    }
    if let Some(d) = args.data {
        config.dataset = Some(d);
    }
    if let Some(n) = args.n {
        config.n_samples = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let t = &mut config.train;
    if let Some(s) = args.train_seed {
        t.seed = s;
    }
    if let Some(k) = args.k {
        t.order = k;
    }
    if let Some(n) = args.normalization {
        t.normalization = match n {
            NormalizationArg::Analytic => Normalization::Analytic,
            NormalizationArg::Trapezoid => Normalization::Trapezoid,
        };
    }
    if let Some(e) = args.epochs {
        t.epochs = e;
    }
    if let Some(lr) = args.lr {
        t.learning_rate = lr;
    }
    if let Some(h) = args.hidden {
        t.hidden = h;
    }
    if let Some(v) = args.lambda_kin {
        t.lambda_kin = v;
    }
    if let Some(v) = args.lambda_pot {
        t.lambda_pot = v;
    }
    let config = finish_config(config)?;
    let dir = config.output_dir.clone();
    config.write_resolved(&dir)?;
    let data = config.dataset()?;
    if data.problem != config.problem {
        return Err(CliError::Usage(format!(
            "dataset was drawn from {} but the config names {}",
            data.problem, config.problem
        )));
    }

    let mut trainer = Trainer::new(&data, config.train.clone())?;
    let ckpt_path = dir.join("checkpoint.json");
    loop {
        match trainer.run_epoch() {
            Ok(Some(r)) => {
                if args.verbose {
                    eprintln!(
                        "epoch {:>4}  loss {:.6}  train nll {:.6}  val nll {:.6}",
                        r.epoch, r.train_loss, r.train_nll, r.val_nll
                    );
                }
            }
            Ok(None) => break,
            Err(e) => {
                let ckpt = trainer.checkpoint();
                save_outputs(&ckpt, &dir)?;
                eprintln!("training aborted; last good checkpoint kept at {}", ckpt_path.display());
                return Err(e.into());
            }
        }
    }
    let ckpt = trainer.checkpoint();
    save_outputs(&ckpt, &dir)?;
    match ckpt.best_val_nll() {
        Some(nll) => println!(
            "best epoch {} of {}: validation NLL {:.6}; checkpoint {}",
            ckpt.best_epoch,
            ckpt.history.len(),
            nll,
            ckpt_path.display()
        ),
        None => println!("no epoch completed"),
    }
    Ok(())
}

fn save_outputs(ckpt: &Checkpoint, dir: &Path) -> Result<()> {
    save_checkpoint(ckpt, &dir.join("checkpoint.json"))?;
    let mut out = std::io::BufWriter::new(fs::File::create(dir.join("history.csv"))?);
    ckpt.write_history_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let mut config = base_config(&args.common)?;
    let problem_given = args.problem.is_some() || args.common.config.is_some();
    if let Some(p) = args.problem {
        config.problem = p;
    }
    if let Some(d) = args.data {
        config.dataset = Some(d);
    }
    let e = &mut config.eval;
    if let Some(p) = args.peel {
        e.peel = p;
    }
    if args.smooth {
        e.smooth = true;
    }
    if let Some(g) = args.gamma {
        e.gammas = g;
    }
    if let Some(r) = args.rho_ref {
        e.rho_ref = r;
    }
    if let Some(r) = args.rho_model {
        e.rho_model = r;
    }
    if let Some(n) = args.nx {
        config.grid.n_x = n;
    }
    if let Some(n) = args.ny {
        config.grid.n_y = n;
    }
    if let Some(m) = args.measure {
        config.grid.measure = match m {
            MeasureArg::Mu => Measure::ChebyshevMu,
            MeasureArg::Y => Measure::LebesgueY,
        };
    }
    let model = match &args.checkpoint {
        Some(path) if !args.self_eval => {
            let model = Model::load(path)?;
            if !problem_given {
                config.problem = model.checkpoint.problem.clone();
            }
            Some(model)
        }
        _ => None,
    };
    let config = finish_config(config)?;
    let problem = config.forward_problem()?;
    if let Some(m) = &model {
        if m.checkpoint.problem != problem.name || m.spec().domain != problem.t_domain {
            return Err(CliError::Runtime(Error::Validation(format!(
                "checkpoint ({} on [{}, {}]) does not match problem {} on [{}, {}]",
                m.checkpoint.problem,
                m.spec().domain.lower(),
                m.spec().domain.upper(),
                problem.name,
                problem.t_domain.lower(),
                problem.t_domain.upper()
            ))));
        }
    }
    let dir = config.output_dir.clone();
    config.write_resolved(&dir)?;

    let data = config.dataset()?;
    let xs = central_x_grid(&data.x, config.grid.n_x, config.grid.central_fraction)?;
    let grid = EvalGrid::new(xs, config.grid.n_y, &problem.t_domain, config.grid.measure)?;
    let reference = reference_posterior(&problem, &grid)?;
    let field = match &model {
        Some(m) => m.density_field(&grid)?,
        None => reference.clone(),
    };
    let report = evaluate_fields(&reference, &field, &config.eval)?;
    report.save(&dir, &reference, &field)?;
    let a = &report.aggregates;
    println!(
        "{} valid columns: E_count {:.4}  E_loc {}  E_alloc {}  JS {}",
        a.valid_columns,
        a.e_count.mean.unwrap_or(f64::NAN),
        fmt_opt(a.e_loc.mean),
        fmt_opt(a.e_alloc.mean),
        fmt_opt(a.js.mean)
    );
    println!("report written to {}", dir.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn cmd_sample(args: SampleArgs) -> CliResult<()> {
    if args.n == 0 || args.ny < 2 {
        return Err(CliError::Usage("need n ≥ 1 and ny ≥ 2".into()));
    }
    let model = Model::load(&args.checkpoint)?;
    let (lo, hi) = model.checkpoint.input_range;
    if args.x < lo || args.x > hi {
        eprintln!("warning: x = {} lies outside the training inputs [{lo}, {hi}]", args.x);
    }
    let grid = EvalGrid::new(vec![args.x], args.ny, &model.spec().domain, Measure::LebesgueY)?;
    let column = model.density_field(&grid)?.column(0);
    let samples = sample_from_density(&column, args.n, args.seed)?;

    fs::create_dir_all(&args.out)?;
    let mut out = std::io::BufWriter::new(fs::File::create(args.out.join("samples.csv"))?);
    writeln!(out, "sample")?;
    for s in &samples {
        writeln!(out, "{s:.16e}")?;
    }
    out.flush()?;
    let mut out = std::io::BufWriter::new(fs::File::create(args.out.join("density.csv"))?);
    column.write_csv(&mut out)?;
    out.flush()?;
    println!("wrote {} samples at x = {} to {}", samples.len(), args.x, args.out.display());
    Ok(())
}

pub fn cmd_observables(args: ObservablesArgs) -> CliResult<()> {
    let model = Model::load(&args.checkpoint)?;
    let domain = model.spec().domain;
    if let Some(t) = args.thresholds.iter().find(|t| !domain.contains(**t)) {
        return Err(CliError::Usage(format!(
            "threshold {t} lies outside [{}, {}]",
            domain.lower(),
            domain.upper()
        )));
    }
    let mut text = String::from("x,mean,variance");
    for t in &args.thresholds {
        text.push_str(&format!(",exceed:{t}"));
    }
    text.push_str(",kinetic,potential,delta_y,delta_p,uncertainty_product,boundary_mass,boundary_flag\n");
    for &x in &args.x {
        let row = model.observables(x, &args.thresholds)?;
        let u = row.uncertainty;
        let mut fields = vec![
            format!("{:.16e}", row.x),
            format!("{:.16e}", row.mean),
            format!("{:.16e}", row.variance),
        ];
        fields.extend(row.exceedance.iter().map(|(_, p)| format!("{p:.16e}")));
        fields.extend(
            [row.kinetic, row.potential, u.delta_y, u.delta_p, u.product, u.boundary_mass]
                .iter()
                .map(|v| format!("{v:.16e}")),
        );
        fields.push(u.boundary_flag.to_string());
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_export_matrices(args: ExportArgs) -> CliResult<()> {
    let mut config = base_config(&args.common)?;
    if let Some(p) = args.problem {
        config.problem = p;
    }
    if let Some(k) = args.k {
        config.train.order = k;
    }
    let config = finish_config(config)?;
    let (spec, potential) = match &args.checkpoint {
        Some(path) => {
            let ckpt = crate::coeffnet::load_checkpoint(path)?;
            (ckpt.basis, ckpt.config.potential)
        }
        None => (
            BasisSpec::new(config.train.order, config.forward_problem()?.t_domain),
            config.train.potential,
        ),
    };
    let ops = BasisOperators::new(spec, potential)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    for (name, m) in ops.named_matrices() {
        let mut out = std::io::BufWriter::new(fs::File::create(dir.join(format!("{name}.csv")))?);
        write_matrix_csv(&mut out, m)?;
        out.flush()?;
    }
    println!("wrote {} matrices of order {} to {}", ops.named_matrices().len(), spec.order, dir.display());
    Ok(())
}
