use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dcglearn::coherence::find_counterexample_exponent;
use dcglearn::sim::{run_experiment, summarize, write_csv, ExperimentConfig};
use dcglearn::{
    apply_power_transform, check_coherence, rank_one_factorize, DiscountVector, GainVector, GradeScale, LabeledSet,
    UtilityVector, WeightMatrix,
};

mod plot;

const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "dcglearn", version, about = "Learn DCG gains and discounts from ranking preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation sweep and write one CSV row per cell.
    Simulate(Box<SimulateArgs>),
    /// Check whether two gain vectors order all rankings of a labeled set alike.
    Coherence(CoherenceArgs),
    /// Split a fitted weight matrix into gain and discount estimates.
    Factorize(FactorizeArgs),
    /// Draw median metric curves from a simulation CSV as SVG.
    Plot(plot::PlotArgs),
}

/// Every config key can also be given as a flag; flags win over the file.
#[derive(Args)]
struct SimulateArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "linear|exponential")]
    gain_profile: Option<String>,
    #[arg(long)]
    positions: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    log_base: Option<String>,
    #[arg(long, value_name = "LIST")]
    base_list: Option<String>,
    #[arg(long, value_name = "LIST")]
    train_pairs: Option<String>,
    #[arg(long)]
    test_pairs: Option<String>,
    #[arg(long)]
    validation_pairs: Option<String>,
    #[arg(long, value_name = "LIST")]
    pair_flips: Option<String>,
    #[arg(long, value_name = "LIST")]
    grade_flips: Option<String>,
    #[arg(long)]
    pair_mode: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "LIST|A..B")]
    seeds: Option<String>,
    #[arg(long, value_name = "LIST")]
    c_grid: Option<String>,
    #[arg(long)]
    default_c: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    max_iterations: Option<String>,
}

impl SimulateArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 17] {
        [
            ("gain_profile", &self.gain_profile),
            ("positions", &self.positions),
            ("levels", &self.levels),
            ("log_base", &self.log_base),
            ("base_list", &self.base_list),
            ("train_pairs", &self.train_pairs),
            ("test_pairs", &self.test_pairs),
            ("validation_pairs", &self.validation_pairs),
            ("pair_flips", &self.pair_flips),
            ("grade_flips", &self.grade_flips),
            ("pair_mode", &self.pair_mode),
            ("model", &self.model),
            ("seeds", &self.seeds),
            ("c_grid", &self.c_grid),
            ("default_c", &self.default_c),
            ("tolerance", &self.tolerance),
            ("max_iterations", &self.max_iterations),
        ]
    }
}

#[derive(Args)]
struct CoherenceArgs {
    /// Grades of the labeled set, e.g. `2,3,1` (1 is worst).
    #[arg(long, value_delimiter = ',', required = true)]
    grades: Vec<usize>,
    /// Gains of ranker A indexed by grade, worst first.
    #[arg(long, value_delimiter = ',', required = true)]
    gains: Vec<f64>,
    /// Gains of ranker B; defaults to A's gains raised to `--power`.
    #[arg(long, value_delimiter = ',', conflicts_with = "power")]
    gains_b: Option<Vec<f64>>,
    #[arg(long)]
    power: Option<f64>,
    /// Discounts by position, best first.
    #[arg(long, value_delimiter = ',', required = true)]
    discounts: Vec<f64>,
    /// Cutoff; defaults to the number of discounts.
    #[arg(short, long)]
    k: Option<usize>,
    /// Instead of comparing two rankers, search exponents up to this value for
    /// the smallest power transform of `--gains` that is incoherent.
    #[arg(long, conflicts_with_all = ["gains_b", "power"])]
    search_k_max: Option<f64>,
}

#[derive(Args)]
struct FactorizeArgs {
    /// Headerless CSV of weights: one row per position, best grade first.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    for (key, value) in args.overrides() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;

    let rows = run_experiment(&cfg)?;
    match &args.out {
        Some(path) => {
            write_csv(&rows, fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)?
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let mut err = io::stderr().lock();
    writeln!(err, "n_train_pairs noise_pairs noise_grades seeds median_precision median_similarity")?;
    for s in summarize(&rows) {
        writeln!(
            err,
            "{} {} {} {} {:.4} {:.4}",
            s.n_train_pairs, s.noise_pairs, s.noise_grades, s.seeds, s.median_precision, s.median_similarity
        )?;
    }
    Ok(())
}

fn coherence(args: &CoherenceArgs) -> anyhow::Result<()> {
    let levels = args.gains.len();
    let set = LabeledSet::new(args.grades.clone(), GradeScale::new(levels)?)?;
    let ga = GainVector::new(args.gains.clone())?;
    let c = DiscountVector::new(args.discounts.clone())?;
    let k = args.k.unwrap_or(c.len());

    if let Some(k_max) = args.search_k_max {
        match find_counterexample_exponent(&set, &ga, &c, k, k_max)? {
            Some(e) => println!("incoherent at exponent {e}"),
            None => println!("no incoherent exponent up to {k_max}"),
        }
        return Ok(());
    }

    let gb = match (&args.gains_b, args.power) {
        (Some(g), _) => GainVector::new(g.clone())?,
        (None, Some(p)) => apply_power_transform(&ga, p)?,
        (None, None) => bail!(dcglearn::Error::InvalidArgument("give --gains-b, --power or --search-k-max".into())),
    };
    let verdict = check_coherence(&set, &ga, &gb, &c, k)?;
    match verdict.witness {
        None => println!("coherent"),
        Some(w) => {
            println!("incoherent");
            println!("first  {:?}  A={}  B={}", w.first.to_one_based(), w.scores_a.0, w.scores_b.0);
            println!("second {:?}  A={}  B={}", w.second.to_one_based(), w.scores_a.1, w.scores_b.1);
        }
    }
    Ok(())
}

fn factorize(args: &FactorizeArgs) -> anyhow::Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut weights = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if *width.get_or_insert(record.len()) != record.len() {
            bail!(dcglearn::Error::InvalidArgument(format!("row {} has {} columns", i + 1, record.len())));
        }
        for field in &record {
            let x: f64 = field
                .parse()
                .map_err(|_| dcglearn::Error::InvalidArgument(format!("row {}: '{field}' is not a number", i + 1)))?;
            weights.push(x);
        }
    }
    let levels = width.ok_or_else(|| dcglearn::Error::InvalidArgument("empty weight file".into()))?;
    let w = UtilityVector::new(weights, levels)?;
    let f = rank_one_factorize(&WeightMatrix::from_utility(&w), args.tolerance)?;
    let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    println!("gains_best_first,{}", join(&f.gains_est));
    println!("discounts,{}", join(&f.discounts_est));
    println!("sigma1,{}", f.sigma1);
    println!("residual_ratio,{}", f.residual_ratio);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<dcglearn::Error>().map(dcglearn::Error::root) {
        Some(dcglearn::Error::Convergence { .. }) => EXIT_SOLVER,
        Some(_) => EXIT_INVALID,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Coherence(a) => coherence(a),
        Command::Factorize(a) => factorize(a),
        Command::Plot(a) => plot::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
