//! Benchmark harness CLI for loss-based uncertainty decomposition.
//!
//! Subcommands: `measure` decomposes ensembles from a JSON file; `selective`,
//! `ood`, and `active` run the downstream experiments on synthetic (or, for
//! `selective`, delimited tabular) data; `check` runs the oracle self-check
//! suites.
//!
//! Output conventions: JSON for structured reports, CSV for tables and
//! curves. Every emitted float is rounded to 6 decimals and a rerun with the
//! same arguments produces byte-identical files. Relative output paths land
//! in `$PUNC_OUT_DIR` when that variable is set. Files are written to a temp
//! file and renamed into place, so a failed run leaves no partial output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 self-check
//! failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use punc::harness::{
    DESK_INITIAL_LABELED, DESK_OOD_N, DESK_POOL_N, DESK_QUERY_BUDGET, DESK_ROUNDS, DESK_SHIFT,
    DESK_TEST_N, DESK_TRAIN_N, FIT_SALT,
};
use punc::{
    active_curves, decompose, default_spec, fit_bagged_trees, load_csv, mean_std, ood_matrix,
    rare_region_spec, rule_by_name, seed_predictions, selective_experiment, selective_matrix,
    split, Categorical, DecomposeMode, ForestConfig, MixtureSpec, RejectionCurve,
    SecondOrderEnsemble, Seed, SelectiveCell, Strategy, UncertaintyComponent,
    BUILTIN_RULE_NAMES,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Default directory for relative output paths.
const OUT_DIR_ENV: &str = "PUNC_OUT_DIR";

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Measure(args) => run_measure(args),
        Command::Selective(args) => run_selective(args),
        Command::Ood(args) => run_ood(args),
        Command::Active(args) => run_active(args),
        Command::Check => run_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

// --- error mapping -------------------------------------------------------

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CHECK: u8 = 4;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CHECK,
            message: message.into(),
        }
    }
}

impl From<punc::Error> for CliError {
    fn from(e: punc::Error) -> Self {
        use punc::Error::*;
        // Bad names/parameters are usage mistakes; malformed or inconsistent
        // inputs are data problems.
        let code = match e {
            UnknownRule(_) | InvalidArgument(_) | Unsupported { .. } => EXIT_CONFIG,
            InvalidDistribution(_) | DimensionMismatch(_) | LabelOutOfRange { .. } | Data(_) => {
                EXIT_DATA
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

// --- argument surface ----------------------------------------------------

#[derive(Parser)]
#[command(
    name = "punc",
    version,
    about = "Uncertainty decomposition measures and downstream-task benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose second-order ensembles from a JSON file into tu/au/eu.
    Measure(MeasureArgs),
    /// Loss-rejection AULC for every (task rule, uncertainty rule, component).
    Selective(SelectiveArgs),
    /// OoD-detection AUROC under covariate shift, per rule and component.
    Ood(OodArgs),
    /// Pool-based active-learning curves, one per strategy and seed.
    Active(ActiveArgs),
    /// Run the oracle self-check suites and report pass/fail per suite.
    Check,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SeedArgs {
    /// Comma-separated RNG seeds; the experiment repeats once per seed.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    seeds: Vec<u64>,
}

impl SeedArgs {
    fn validated(&self) -> Result<&[u64], CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::config("at least one seed is required"));
        }
        Ok(&self.seeds)
    }
}

#[derive(Args)]
struct ForestArgs {
    /// Trees in the bagged ensemble.
    #[arg(long, default_value_t = 20)]
    trees: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
}

impl ForestArgs {
    fn config(&self) -> ForestConfig {
        ForestConfig {
            trees: self.trees,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output file; relative paths land in $PUNC_OUT_DIR when it is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    /// JSON file: an array of ensembles, each either an array of
    /// probability vectors (uniform weights) or {"members": [...],
    /// "weights": [...]}.
    input: PathBuf,
    /// Scoring rule parameterizing the decomposition.
    #[arg(long, default_value = "log")]
    rule: String,
    #[command(flatten)]
    out: OutArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SelectiveArgs {
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Output format for the AULC table.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON mixture-spec file replacing the builtin synthetic task.
    #[arg(long, conflicts_with = "data")]
    spec: Option<PathBuf>,
    /// Delimited dataset file to use instead of synthetic data.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column name in --data.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Field delimiter in --data.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Train fraction of the --data split.
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Synthetic training instances per seed.
    #[arg(long, default_value_t = DESK_TRAIN_N)]
    train_n: usize,
    /// Synthetic test instances per seed.
    #[arg(long, default_value_t = DESK_TEST_N)]
    test_n: usize,
    /// Uncertainty components to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "tu,au,eu")]
    components: Vec<String>,
    /// Also write one loss-rejection curve (CSV rows alpha,loss plus an
    /// aulc summary row) for the first seed.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Task rule of the --curve-out curve.
    #[arg(long, default_value = "log")]
    curve_task: String,
    /// Uncertainty rule of the --curve-out curve.
    #[arg(long, default_value = "log")]
    curve_unc: String,
    /// Uncertainty component of the --curve-out curve.
    #[arg(long, default_value = "tu")]
    curve_component: String,
}

#[derive(Args)]
struct OodArgs {
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON mixture-spec file replacing the builtin rare-region task.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Training instances per seed.
    #[arg(long, default_value_t = DESK_TRAIN_N)]
    train_n: usize,
    /// In-distribution test instances per seed.
    #[arg(long, default_value_t = DESK_OOD_N)]
    id_n: usize,
    /// Out-of-distribution instances per seed.
    #[arg(long, default_value_t = DESK_OOD_N)]
    ood_n: usize,
    /// Covariate shift along the first axis, in mean per-class scales.
    #[arg(long, default_value_t = DESK_SHIFT)]
    shift: f64,
    /// Uncertainty components to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "tu,au,eu")]
    components: Vec<String>,
}

#[derive(Args)]
struct ActiveArgs {
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON mixture-spec file replacing the builtin rare-region task.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Unlabeled pool size per seed.
    #[arg(long, default_value_t = DESK_POOL_N)]
    pool_n: usize,
    /// Test instances per seed.
    #[arg(long, default_value_t = DESK_TEST_N)]
    test_n: usize,
    /// Labeled instances before the first round.
    #[arg(long, default_value_t = DESK_INITIAL_LABELED)]
    initial_labeled: usize,
    /// Instances labeled per round.
    #[arg(long, default_value_t = DESK_QUERY_BUDGET)]
    query_budget: usize,
    /// Query rounds after the initial fit.
    #[arg(long, default_value_t = DESK_ROUNDS)]
    rounds: usize,
    /// Query strategies to compare.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "eu_log,eu_brier,eu_zero_one,random"
    )]
    strategies: Vec<String>,
}

// --- measure -------------------------------------------------------------

/// One ensemble in the `measure` input file.
#[derive(Deserialize)]
#[serde(untagged)]
enum EnsembleInput {
    Uniform(Vec<Vec<f64>>),
    Weighted {
        members: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

impl EnsembleInput {
    fn into_ensemble(self) -> Result<SecondOrderEnsemble, CliError> {
        let (members, weights) = match self {
            EnsembleInput::Uniform(members) => (members, None),
            EnsembleInput::Weighted { members, weights } => (members, Some(weights)),
        };
        let members = members
            .into_iter()
            .map(Categorical::new)
            .collect::<punc::Result<Vec<_>>>()?;
        Ok(match weights {
            None => SecondOrderEnsemble::uniform(members)?,
            Some(w) => SecondOrderEnsemble::weighted(members, w)?,
        })
    }
}

#[derive(Serialize)]
struct MeasureRow {
    ensemble: usize,
    rule: String,
    tu: f64,
    au: f64,
    eu: f64,
}

fn run_measure(args: MeasureArgs) -> Result<(), CliError> {
    let rule = rule_by_name(&args.rule)?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", args.input.display())))?;
    let inputs: Vec<EnsembleInput> = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    if inputs.is_empty() {
        return Err(CliError::data(format!(
            "{}: no ensembles in input",
            args.input.display()
        )));
    }

    let mut rows = Vec::with_capacity(inputs.len());
    for (i, input) in inputs.into_iter().enumerate() {
        let q = input.into_ensemble()?;
        let triple = decompose(rule.as_ref(), &q, DecomposeMode::Auto)?;
        rows.push(MeasureRow {
            ensemble: i,
            rule: args.rule.clone(),
            tu: round6(triple.tu),
            au: round6(triple.au),
            eu: round6(triple.eu),
        });
    }

    let path = resolve_out(args.out.out, "measure.json");
    write_rows(&path, args.format, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

// --- selective -----------------------------------------------------------

#[derive(Serialize)]
struct SelectiveRow {
    task_rule: String,
    unc_rule: String,
    component: &'static str,
    seed: String,
    aulc: f64,
}

fn run_selective(args: SelectiveArgs) -> Result<(), CliError> {
    let seeds = args.seeds.validated()?;
    let forest = args.forest.config();
    let components = parse_components(&args.components)?;

    let source = match &args.data {
        Some(path) => DataSource::Table(load_table(path, &args)?),
        None => DataSource::Synthetic(match &args.spec {
            Some(path) => load_spec(path)?,
            None => default_spec(),
        }),
    };

    let cells = match &source {
        DataSource::Synthetic(spec) => selective_matrix(
            spec,
            args.train_n,
            args.test_n,
            &forest,
            &components,
            seeds,
        )?,
        DataSource::Table(data) => {
            selective_from_table(data, args.train_fraction, &forest, &components, seeds)?
        }
    };

    let mut rows: Vec<SelectiveRow> = cells
        .iter()
        .map(|c| SelectiveRow {
            task_rule: c.task_rule.clone(),
            unc_rule: c.unc_rule.clone(),
            component: c.component.as_str(),
            seed: c.seed.to_string(),
            aulc: round6(c.aulc),
        })
        .collect();

    // Summary block: mean and std per (task, unc, component) cell.
    for task in BUILTIN_RULE_NAMES {
        for unc in BUILTIN_RULE_NAMES {
            for &component in &components {
                let vals: Vec<f64> = cells
                    .iter()
                    .filter(|c| {
                        c.task_rule == task && c.unc_rule == unc && c.component == component
                    })
                    .map(|c| c.aulc)
                    .collect();
                let (mean, std) = mean_std(&vals);
                println!(
                    "selective task={task} unc={unc} component={} aulc {:.6} +/- {:.6}",
                    component.as_str(),
                    mean,
                    std
                );
                for (label, value) in [("mean", mean), ("std", std)] {
                    rows.push(SelectiveRow {
                        task_rule: task.to_string(),
                        unc_rule: unc.to_string(),
                        component: component.as_str(),
                        seed: label.to_string(),
                        aulc: round6(value),
                    });
                }
            }
        }
    }

    let path = resolve_out(args.out.out.clone(), "selective.csv");
    write_rows(&path, args.format, &rows)?;
    println!("wrote {}", path.display());

    if let Some(curve_path) = &args.curve_out {
        let curve = curve_for(&source, &args, seeds[0], &forest)?;
        let path = resolve_out(Some(curve_path.clone()), "curve.csv");
        write_curve(&path, &curve)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

enum DataSource {
    Synthetic(MixtureSpec),
    Table(punc::Dataset),
}

fn load_table(path: &Path, args: &SelectiveArgs) -> Result<punc::Dataset, CliError> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::config("delimiter must be a single ASCII char"));
    }
    Ok(load_csv(path, &args.label_column, args.delimiter as u8)?)
}

/// AULC cells on a fixed tabular dataset: per seed, a fresh split and fit,
/// mirroring the synthetic harness salts.
fn selective_from_table(
    data: &punc::Dataset,
    train_fraction: f64,
    forest: &ForestConfig,
    components: &[UncertaintyComponent],
    seeds: &[u64],
) -> Result<Vec<SelectiveCell>, CliError> {
    let mut cells = Vec::new();
    for &seed_value in seeds {
        let seed = Seed::new(seed_value);
        let (train, test) = split(data, train_fraction, seed)?;
        let model = fit_bagged_trees(&train, forest, seed.derive(FIT_SALT))?;
        let predictions = model.predict_dataset(&test)?;
        for task_name in BUILTIN_RULE_NAMES {
            let task = rule_by_name(task_name)?;
            for unc_name in BUILTIN_RULE_NAMES {
                let unc = rule_by_name(unc_name)?;
                for &component in components {
                    let curve = selective_experiment(
                        &predictions,
                        test.labels(),
                        unc.as_ref(),
                        component,
                        task.as_ref(),
                    )?;
                    cells.push(SelectiveCell {
                        task_rule: task_name.to_string(),
                        unc_rule: unc_name.to_string(),
                        component,
                        seed: seed_value,
                        aulc: curve.aulc,
                    });
                }
            }
        }
    }
    Ok(cells)
}

fn curve_for(
    source: &DataSource,
    args: &SelectiveArgs,
    seed_value: u64,
    forest: &ForestConfig,
) -> Result<RejectionCurve, CliError> {
    let task = rule_by_name(&args.curve_task)?;
    let unc = rule_by_name(&args.curve_unc)?;
    let component = UncertaintyComponent::parse(&args.curve_component)?;
    let (predictions, labels) = match source {
        DataSource::Synthetic(spec) => {
            seed_predictions(spec, args.train_n, args.test_n, forest, seed_value)?
        }
        DataSource::Table(data) => {
            let seed = Seed::new(seed_value);
            let (train, test) = split(data, args.train_fraction, seed)?;
            let model = fit_bagged_trees(&train, forest, seed.derive(FIT_SALT))?;
            (model.predict_dataset(&test)?, test.labels().to_vec())
        }
    };
    Ok(selective_experiment(
        &predictions,
        &labels,
        unc.as_ref(),
        component,
        task.as_ref(),
    )?)
}

// --- ood -----------------------------------------------------------------

#[derive(Serialize)]
struct OodRow {
    rule: String,
    component: &'static str,
    seed: String,
    auroc: f64,
}

fn run_ood(args: OodArgs) -> Result<(), CliError> {
    let seeds = args.seeds.validated()?;
    let forest = args.forest.config();
    let components = parse_components(&args.components)?;
    if !(args.shift >= 0.0) {
        return Err(CliError::config("shift must be >= 0"));
    }
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => rare_region_spec(),
    };

    let cells = ood_matrix(
        &spec,
        args.train_n,
        args.id_n,
        args.ood_n,
        args.shift,
        &forest,
        &components,
        seeds,
    )?;

    let mut rows: Vec<OodRow> = cells
        .iter()
        .map(|c| OodRow {
            rule: c.rule.clone(),
            component: c.component.as_str(),
            seed: c.seed.to_string(),
            auroc: round6(c.auroc),
        })
        .collect();

    for rule in BUILTIN_RULE_NAMES {
        for &component in &components {
            let vals: Vec<f64> = cells
                .iter()
                .filter(|c| c.rule == rule && c.component == component)
                .map(|c| c.auroc)
                .collect();
            let (mean, std) = mean_std(&vals);
            println!(
                "ood rule={rule} component={} auroc {:.6} +/- {:.6}",
                component.as_str(),
                mean,
                std
            );
            for (label, value) in [("mean", mean), ("std", std)] {
                rows.push(OodRow {
                    rule: rule.to_string(),
                    component: component.as_str(),
                    seed: label.to_string(),
                    auroc: round6(value),
                });
            }
        }
    }

    let path = resolve_out(args.out.out, "ood.csv");
    write_rows(&path, args.format, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

// --- active --------------------------------------------------------------

#[derive(Serialize)]
struct ActiveRow {
    round: usize,
    labeled_count: usize,
    zero_one_loss: f64,
    strategy: &'static str,
    seed: u64,
}

fn run_active(args: ActiveArgs) -> Result<(), CliError> {
    let seeds = args.seeds.validated()?;
    let forest = args.forest.config();
    let strategies = args
        .strategies
        .iter()
        .map(|s| Strategy::parse(s))
        .collect::<punc::Result<Vec<_>>>()?;
    if strategies.is_empty() {
        return Err(CliError::config("at least one strategy is required"));
    }
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => rare_region_spec(),
    };

    let cells = active_curves(
        &spec,
        args.pool_n,
        args.test_n,
        &forest,
        &strategies,
        args.initial_labeled,
        args.query_budget,
        args.rounds,
        seeds,
    )?;

    let mut rows = Vec::new();
    for cell in &cells {
        for (round, (&labeled, &loss)) in cell
            .curve
            .labeled_counts
            .iter()
            .zip(&cell.curve.task_losses)
            .enumerate()
        {
            rows.push(ActiveRow {
                round,
                labeled_count: labeled,
                zero_one_loss: round6(loss),
                strategy: cell.strategy.as_str(),
                seed: cell.seed,
            });
        }
    }

    for &strategy in &strategies {
        let finals: Vec<f64> = cells
            .iter()
            .filter(|c| c.strategy == strategy)
            .map(|c| c.curve.final_loss())
            .collect();
        let (mean, std) = mean_std(&finals);
        println!(
            "active strategy={strategy} final_loss {:.6} +/- {:.6}",
            mean, std
        );
    }

    let path = resolve_out(args.out.out, "active.csv");
    write_rows(&path, args.format, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

// --- check ---------------------------------------------------------------

fn run_check() -> Result<(), CliError> {
    let outcomes = punc::run_all_suites()?;
    let mut passed = 0;
    for outcome in &outcomes {
        let status = if outcome.passed() { "pass" } else { "FAIL" };
        println!(
            "{status} {}: {} cases, {} failures, max abs error {:.3e}",
            outcome.name, outcome.cases, outcome.failures, outcome.max_abs_error
        );
        if outcome.passed() {
            passed += 1;
        }
    }
    println!("{passed}/{} suites passed", outcomes.len());
    if passed < outcomes.len() {
        return Err(CliError::check("self-check suites failed"));
    }
    Ok(())
}

// --- shared helpers ------------------------------------------------------

fn parse_components(names: &[String]) -> Result<Vec<UncertaintyComponent>, CliError> {
    if names.is_empty() {
        return Err(CliError::config("at least one component is required"));
    }
    Ok(names
        .iter()
        .map(|n| UncertaintyComponent::parse(n))
        .collect::<punc::Result<Vec<_>>>()?)
}

/// Mixture spec as plain JSON; priors are validated on load.
#[derive(Deserialize)]
struct SpecFile {
    means: Vec<Vec<f64>>,
    scales: Vec<Vec<f64>>,
    class_priors: Vec<f64>,
    #[serde(default)]
    label_flip: f64,
}

fn load_spec(path: &Path) -> Result<MixtureSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let file: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let spec = MixtureSpec {
        means: file.means,
        scales: file.scales,
        class_priors: Categorical::new(file.class_priors)?,
        label_flip: file.label_flip,
    };
    spec.validate()?;
    Ok(spec)
}

/// Rounds to 6 decimals; +0.0 normalizes a negative zero.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6 + 0.0
}

fn resolve_out(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    let name = out.unwrap_or_else(|| PathBuf::from(default_name));
    if name.is_absolute() {
        return name;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Path::new(&dir).join(name),
        _ => name,
    }
}

fn write_rows<T: Serialize>(path: &Path, format: Format, rows: &[T]) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| CliError::data(format!("serializing output: {e}")))?;
            }
            writer
                .into_inner()
                .map_err(|e| CliError::data(format!("serializing output: {e}")))?
        }
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(rows)
                .map_err(|e| CliError::data(format!("serializing output: {e}")))?;
            bytes.push(b'\n');
            bytes
        }
    };
    write_atomic(path, &bytes)
}

fn write_curve(path: &Path, curve: &RejectionCurve) -> Result<(), CliError> {
    let mut out = String::from("alpha,loss\n");
    for (alpha, loss) in curve.alphas.iter().zip(&curve.losses) {
        out.push_str(&format!("{},{}\n", round6(*alpha), round6(*loss)));
    }
    out.push_str(&format!("aulc,{}\n", round6(curve.aulc)));
    write_atomic(path, out.as_bytes())
}

/// Writes via a temp file in the target directory plus an atomic rename, so
/// interrupted or failed runs leave no partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::data(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
