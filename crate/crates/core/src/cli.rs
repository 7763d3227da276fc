//! Command-line front end: ingestion → aggregation → backtest → reports.
//!
//! Exit codes: 0 success, 1 runtime/validation failure, 2 usage error or
//! missing input file. Every subcommand is reproducible — identical inputs,
//! flags, and seed yield identical output bytes (artifacts carry no
//! timestamps or absolute paths).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::aggregators::{
    feature_matrix, AggregateId, FeatureOptions, FeatureSet, Smoothing, TargetMode,
};
use crate::backtest::{
    baseline_lagged, run_backtest, BacktestConfig, KChoice, Learner, SelectionSpec,
};
use crate::error::Error;
use crate::mention_store::{
    bucket_periods, parse_counts_csv, parse_mentions, parse_polls_csv, write_mentions_csv,
    write_polls_csv, MentionFormat, ParseOptions, PeriodTable, PollSeries,
};
use crate::synth::{generate_scenario, ScenarioSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failed command: message for standard error plus the process exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

type CmdResult<T> = std::result::Result<T, Failure>;

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure { code: EXIT_RUNTIME, message: err.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

fn require_file(path: &Path, what: &str) -> CmdResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} file not found: {}", path.display())))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "sentipoll",
    version,
    about = "Sentiment aggregates over entity-mention streams and sliding-window poll nowcasting",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn mentions (or precomputed counts) plus polls into a feature-matrix CSV
    Aggregate(AggregateArgs),
    /// Run a sliding-window nowcasting backtest and write report artifacts
    Backtest(BacktestArgs),
    /// Score the lagged-self baseline over a poll series alone
    Baseline(BaselineArgs),
    /// Generate a deterministic synthetic scenario (mentions, polls, ground truth)
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["mentions", "counts"])))]
struct AggregateArgs {
    /// Mention stream: CSV (timestamp,entity,polarity) or JSON lines by extension
    #[arg(long)]
    mentions: Option<PathBuf>,
    /// Precomputed per-period counts CSV (period_start,entity,positives,negatives,neutrals)
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Poll series CSV (date,entity,share_pct); consecutive polls define periods
    #[arg(long)]
    polls: PathBuf,
    /// Output CSV file path
    #[arg(long)]
    out: PathBuf,
    /// Feature subset: all | buzz | sentiment
    #[arg(long, value_parser = parse_feature_set)]
    feature_set: Option<FeatureSet>,
    /// Target mode: absolute | delta
    #[arg(long, value_parser = parse_target)]
    target: Option<TargetMode>,
    /// Include the previous poll value as a feature column: on | off
    #[arg(long, value_parser = parse_switch)]
    lagged_self: Option<bool>,
    /// Count smoothing: none | laplace (+1 to every polarity count)
    #[arg(long, value_parser = parse_smoothing)]
    smoothing: Option<Smoothing>,
    /// Key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["mentions", "counts"])))]
struct BacktestArgs {
    /// Mention stream: CSV (timestamp,entity,polarity) or JSON lines by extension
    #[arg(long)]
    mentions: Option<PathBuf>,
    /// Precomputed per-period counts CSV (period_start,entity,positives,negatives,neutrals)
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Poll series CSV (date,entity,share_pct); consecutive polls define periods
    #[arg(long)]
    polls: PathBuf,
    /// Output directory for report.json, summary.csv, and importance.csv
    #[arg(long)]
    out: PathBuf,
    /// Training window length in periods
    #[arg(long)]
    window: Option<usize>,
    /// Learner: ols | rf
    #[arg(long, value_parser = parse_learner)]
    learner: Option<Learner>,
    /// Target mode: absolute | delta
    #[arg(long, value_parser = parse_target)]
    target: Option<TargetMode>,
    /// Feature subset: all | buzz | sentiment
    #[arg(long, value_parser = parse_feature_set)]
    feature_set: Option<FeatureSet>,
    /// Include the previous poll value as a feature column: on | off
    #[arg(long, value_parser = parse_switch)]
    lagged_self: Option<bool>,
    /// Per-period feature selection: none | univariate | rfe
    #[arg(long, value_parser = parse_selection)]
    selection: Option<SelectionKind>,
    /// Features kept by selection: a count, or "auto" for 10% of candidates
    #[arg(long, value_parser = KChoice::from_str)]
    k: Option<KChoice>,
    /// Random seed for the forest learner
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores); results are identical for any value
    #[arg(long)]
    threads: Option<usize>,
    /// Count smoothing: none | laplace (+1 to every polarity count)
    #[arg(long, value_parser = parse_smoothing)]
    smoothing: Option<Smoothing>,
    /// Fit one model per entity instead of pooling entities: on | off
    #[arg(long, value_parser = parse_switch)]
    per_entity: Option<bool>,
    /// Key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Poll series CSV (date,entity,share_pct)
    #[arg(long)]
    polls: PathBuf,
    /// Output JSON file path
    #[arg(long)]
    out: PathBuf,
    /// Target mode: absolute | delta
    #[arg(long, value_parser = parse_target)]
    target: Option<TargetMode>,
    /// Key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for mentions.csv, polls.csv, and truth.json
    #[arg(long)]
    out: PathBuf,
    /// Number of entities (1..=26), named party_a, party_b, …
    #[arg(long)]
    entities: Option<usize>,
    /// Number of mention periods (polls emitted: periods + 1)
    #[arg(long)]
    periods: Option<usize>,
    /// Mean mentions per entity per period
    #[arg(long)]
    mentions_mean: Option<usize>,
    /// Baseline probability of a positive mention
    #[arg(long)]
    positive_rate: Option<f64>,
    /// Baseline probability of a negative mention
    #[arg(long)]
    negative_rate: Option<f64>,
    /// AR(1) persistence of the latent sentiment state, in [0, 1)
    #[arg(long)]
    persistence: Option<f64>,
    /// Innovation scale of the latent sentiment state
    #[arg(long)]
    volatility: Option<f64>,
    /// Poll delta per unit of planted-aggregate delta
    #[arg(long)]
    coupling: Option<f64>,
    /// Poll noise standard deviation, percentage points
    #[arg(long)]
    noise_std: Option<f64>,
    /// Aggregate that drives the polls (any of the 25 feature names)
    #[arg(long, value_parser = parse_aggregate)]
    planted: Option<AggregateId>,
    /// Random seed; fully determines the scenario
    #[arg(long)]
    seed: Option<u64>,
    /// Key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SelectionKind {
    None,
    Univariate,
    Rfe,
}

// Parsers shared by clap flags and config-file values.

fn parse_learner(s: &str) -> std::result::Result<Learner, String> {
    match s.to_ascii_lowercase().as_str() {
        "ols" => Ok(Learner::Ols),
        "rf" => Ok(Learner::Rf),
        other => Err(format!("expected ols or rf, got {other:?}")),
    }
}

fn parse_target(s: &str) -> std::result::Result<TargetMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "absolute" => Ok(TargetMode::Absolute),
        "delta" => Ok(TargetMode::Delta),
        other => Err(format!("expected absolute or delta, got {other:?}")),
    }
}

fn parse_feature_set(s: &str) -> std::result::Result<FeatureSet, String> {
    match s.to_ascii_lowercase().as_str() {
        "all" => Ok(FeatureSet::All),
        "buzz" => Ok(FeatureSet::Buzz),
        "sentiment" => Ok(FeatureSet::Sentiment),
        other => Err(format!("expected all, buzz, or sentiment, got {other:?}")),
    }
}

fn parse_smoothing(s: &str) -> std::result::Result<Smoothing, String> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(Smoothing::None),
        "laplace" => Ok(Smoothing::Laplace),
        other => Err(format!("expected none or laplace, got {other:?}")),
    }
}

fn parse_switch(s: &str) -> std::result::Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn parse_selection(s: &str) -> std::result::Result<SelectionKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(SelectionKind::None),
        "univariate" => Ok(SelectionKind::Univariate),
        "rfe" => Ok(SelectionKind::Rfe),
        other => Err(format!("expected none, univariate, or rfe, got {other:?}")),
    }
}

fn parse_aggregate(s: &str) -> std::result::Result<AggregateId, String> {
    AggregateId::from_name(s).ok_or_else(|| {
        format!("unknown aggregate {s:?}; run `sentipoll aggregate --help` for the feature list")
    })
}

/// Key=value settings loaded from `--config`; flags take precedence, and
/// keys a subcommand does not understand are rejected.
struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    fn empty() -> Self {
        ConfigMap(BTreeMap::new())
    }

    fn load(path: Option<&Path>) -> CmdResult<Self> {
        let Some(path) = path else { return Ok(Self::empty()) };
        require_file(path, "config")?;
        let text = fs::read_to_string(path).map_err(Error::from)?;
        let mut map = BTreeMap::new();
        for (ix, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure {
                    code: EXIT_RUNTIME,
                    message: format!(
                        "config {}: line {} is not key=value: {raw:?}",
                        path.display(),
                        ix + 1
                    ),
                });
            };
            let key = key.trim().replace('_', "-");
            map.insert(key, value.trim().to_string());
        }
        Ok(ConfigMap(map))
    }

    /// Flag value if given, else the parsed config value, else `None`.
    fn pick<T>(
        &mut self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> CmdResult<Option<T>> {
        let from_config = self.0.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_config {
            Some(raw) => parse(&raw)
                .map(Some)
                .map_err(|e| Failure { code: EXIT_RUNTIME, message: format!("config {key}: {e}") }),
            None => Ok(None),
        }
    }

    /// Error out on settings no flag consumed (typos shouldn't pass silently).
    fn finish(self) -> CmdResult<()> {
        match self.0.into_keys().next() {
            None => Ok(()),
            Some(key) => Err(Failure {
                code: EXIT_RUNTIME,
                message: format!("config contains unknown setting {key:?}"),
            }),
        }
    }
}

fn parse_number<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn load_polls(path: &Path) -> CmdResult<PollSeries> {
    require_file(path, "polls")?;
    let file = File::open(path).map_err(Error::from)?;
    Ok(parse_polls_csv(BufReader::new(file))?)
}

fn load_table(
    mentions: Option<&Path>,
    counts: Option<&Path>,
    polls: &PollSeries,
) -> CmdResult<PeriodTable> {
    if let Some(path) = mentions {
        require_file(path, "mentions")?;
        let format = MentionFormat::from_path(path);
        let file = File::open(path).map_err(Error::from)?;
        let parsed = parse_mentions(BufReader::new(file), format, &ParseOptions::default())?;
        if !parsed.skipped.is_empty() {
            eprintln!("warning: skipped {} malformed mention rows", parsed.skipped.len());
        }
        if parsed.records.is_empty() {
            eprintln!("warning: mentions input contains no records; all counts will be zero");
        }
        let (table, stats) = bucket_periods(&parsed.records, polls);
        if stats.ignored() > 0 {
            eprintln!(
                "warning: ignored {} mentions ({} outside the poll range, {} for unknown entities)",
                stats.ignored(),
                stats.out_of_range,
                stats.unknown_entity
            );
        }
        Ok(table)
    } else {
        let path = counts.expect("clap guarantees one input source");
        require_file(path, "counts")?;
        let file = File::open(path).map_err(Error::from)?;
        let (table, stats) = parse_counts_csv(BufReader::new(file), polls)?;
        if stats.ignored() > 0 {
            eprintln!("warning: ignored {} count rows for unknown entities", stats.ignored());
        }
        Ok(table)
    }
}

fn run_aggregate(args: AggregateArgs) -> CmdResult<()> {
    let mut config = ConfigMap::load(args.config.as_deref())?;
    let opts = FeatureOptions {
        feature_set: config
            .pick(args.feature_set, "feature-set", parse_feature_set)?
            .unwrap_or_default(),
        target_mode: config.pick(args.target, "target", parse_target)?.unwrap_or_default(),
        include_lagged_self: config
            .pick(args.lagged_self, "lagged-self", parse_switch)?
            .unwrap_or(true),
        smoothing: config.pick(args.smoothing, "smoothing", parse_smoothing)?.unwrap_or_default(),
    };
    config.finish()?;

    let polls = load_polls(&args.polls)?;
    let table = load_table(args.mentions.as_deref(), args.counts.as_deref(), &polls)?;
    let matrix = feature_matrix(&table, &opts)?;
    if matrix.warnings.guarded_divisions > 0 {
        eprintln!(
            "warning: {} guarded divisions (x/0 evaluated as 0)",
            matrix.warnings.guarded_divisions
        );
    }
    let file = File::create(&args.out).map_err(Error::from)?;
    matrix.write_csv(file)?;
    println!(
        "wrote {} rows x {} feature columns to {}",
        matrix.rows.len(),
        matrix.columns.len(),
        args.out.display()
    );
    Ok(())
}

fn run_backtest_cmd(args: BacktestArgs) -> CmdResult<()> {
    let mut config = ConfigMap::load(args.config.as_deref())?;
    let defaults = BacktestConfig::default();
    let selection_kind = config
        .pick(args.selection, "selection", parse_selection)?
        .unwrap_or(SelectionKind::None);
    let k = config.pick(args.k, "k", KChoice::from_str)?.unwrap_or(KChoice::Fixed(3));
    let cfg = BacktestConfig {
        window: config.pick(args.window, "window", parse_number)?.unwrap_or(defaults.window),
        learner: config.pick(args.learner, "learner", parse_learner)?.unwrap_or(defaults.learner),
        target_mode: config
            .pick(args.target, "target", parse_target)?
            .unwrap_or(defaults.target_mode),
        feature_set: config
            .pick(args.feature_set, "feature-set", parse_feature_set)?
            .unwrap_or(defaults.feature_set),
        include_lagged_self: config
            .pick(args.lagged_self, "lagged-self", parse_switch)?
            .unwrap_or(defaults.include_lagged_self),
        selection: match selection_kind {
            SelectionKind::None => SelectionSpec::None,
            SelectionKind::Univariate => SelectionSpec::Univariate { k },
            SelectionKind::Rfe => SelectionSpec::Rfe { k },
        },
        smoothing: config
            .pick(args.smoothing, "smoothing", parse_smoothing)?
            .unwrap_or(defaults.smoothing),
        seed: config.pick(args.seed, "seed", parse_number)?.unwrap_or(defaults.seed),
        per_entity: config
            .pick(args.per_entity, "per-entity", parse_switch)?
            .unwrap_or(defaults.per_entity),
        forest: defaults.forest,
    };
    let threads = config.pick(args.threads, "threads", parse_number)?;
    config.finish()?;

    let polls = load_polls(&args.polls)?;
    let table = load_table(args.mentions.as_deref(), args.counts.as_deref(), &polls)?;
    let report = match threads {
        None => run_backtest(&table, &cfg)?,
        Some(0) => {
            return Err(Failure {
                code: EXIT_RUNTIME,
                message: "threads must be at least 1".into(),
            })
        }
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| {
                Failure { code: EXIT_RUNTIME, message: format!("thread pool: {e}") }
            })?;
            pool.install(|| run_backtest(&table, &cfg))?
        }
    };

    fs::create_dir_all(&args.out).map_err(Error::from)?;
    fs::write(args.out.join("report.json"), report.to_json_string()?).map_err(Error::from)?;
    let summary = File::create(args.out.join("summary.csv")).map_err(Error::from)?;
    report.write_summary_csv(summary)?;
    if let Some(importance) = &report.importance {
        let file = File::create(args.out.join("importance.csv")).map_err(Error::from)?;
        importance.write_csv(file)?;
    }
    for note in &report.warnings {
        eprintln!("warning: {note}");
    }
    println!("test periods: {}", report.n_test_periods);
    println!("global MAE: {:.6}", report.global_mae);
    println!("baseline MAE: {:.6}", report.baseline_global_mae);
    Ok(())
}

fn run_baseline(args: BaselineArgs) -> CmdResult<()> {
    let mut config = ConfigMap::load(args.config.as_deref())?;
    let target = config.pick(args.target, "target", parse_target)?.unwrap_or_default();
    config.finish()?;

    let polls = load_polls(&args.polls)?;
    let report = baseline_lagged(&polls, target)?;
    fs::write(&args.out, report.to_json_string()?).map_err(Error::from)?;
    println!("test periods: {}", report.n_test_periods);
    println!("baseline MAE: {:.6}", report.global_mae);
    Ok(())
}

fn run_synth(args: SynthArgs) -> CmdResult<()> {
    let mut config = ConfigMap::load(args.config.as_deref())?;
    let defaults = ScenarioSpec::default();
    let spec = ScenarioSpec {
        n_entities: config
            .pick(args.entities, "entities", parse_number)?
            .unwrap_or(defaults.n_entities),
        n_periods: config
            .pick(args.periods, "periods", parse_number)?
            .unwrap_or(defaults.n_periods),
        mentions_mean: config
            .pick(args.mentions_mean, "mentions-mean", parse_number)?
            .unwrap_or(defaults.mentions_mean),
        positive_rate: config
            .pick(args.positive_rate, "positive-rate", parse_number)?
            .unwrap_or(defaults.positive_rate),
        negative_rate: config
            .pick(args.negative_rate, "negative-rate", parse_number)?
            .unwrap_or(defaults.negative_rate),
        sentiment_persistence: config
            .pick(args.persistence, "persistence", parse_number)?
            .unwrap_or(defaults.sentiment_persistence),
        sentiment_volatility: config
            .pick(args.volatility, "volatility", parse_number)?
            .unwrap_or(defaults.sentiment_volatility),
        coupling: config
            .pick(args.coupling, "coupling", parse_number)?
            .unwrap_or(defaults.coupling),
        noise_std: config
            .pick(args.noise_std, "noise-std", parse_number)?
            .unwrap_or(defaults.noise_std),
        planted: config
            .pick(args.planted, "planted", parse_aggregate)?
            .unwrap_or(defaults.planted),
        seed: config.pick(args.seed, "seed", parse_number)?.unwrap_or(defaults.seed),
    };
    config.finish()?;

    let scenario = generate_scenario(&spec)?;
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let mentions = File::create(args.out.join("mentions.csv")).map_err(Error::from)?;
    write_mentions_csv(&scenario.mentions, mentions)?;
    let polls = File::create(args.out.join("polls.csv")).map_err(Error::from)?;
    write_polls_csv(&scenario.polls, polls)?;
    let truth = serde_json::to_string_pretty(&scenario.truth).map_err(Error::from)?;
    fs::write(args.out.join("truth.json"), truth + "\n").map_err(Error::from)?;
    println!(
        "generated {} mentions, {} polls, {} entities into {}",
        scenario.mentions.len(),
        scenario.polls.len(),
        scenario.truth.entities.len(),
        args.out.display()
    );
    Ok(())
}

/// Parse `args` (including the program name) and run the chosen subcommand;
/// returns the process exit code instead of exiting, so tests can call it.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders help/version on stdout (exit 0) and usage errors
            // on stderr (exit 2)
            let _ = err.print();
            return if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Aggregate(args) => run_aggregate(args),
        Command::Backtest(args) => run_backtest_cmd(args),
        Command::Baseline(args) => run_baseline(args),
        Command::Synth(args) => run_synth(args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_values_parse_both_spellings() {
        assert_eq!(parse_switch("on"), Ok(true));
        assert_eq!(parse_switch("OFF"), Ok(false));
        assert!(parse_switch("maybe").is_err());
    }

    #[test]
    fn selection_and_learner_names_parse() {
        assert_eq!(parse_selection("rfe"), Ok(SelectionKind::Rfe));
        assert_eq!(parse_learner("rf"), Ok(Learner::Rf));
        assert_eq!(parse_target("delta"), Ok(TargetMode::Delta));
        assert!(parse_learner("gbm").is_err());
    }

    #[test]
    fn aggregate_names_resolve_case_sensitively() {
        assert_eq!(parse_aggregate("bermingham"), Ok(AggregateId::Bermingham));
        assert!(parse_aggregate("no_such_feature").is_err());
    }

    #[test]
    fn flags_override_config_values() {
        let mut map = ConfigMap(BTreeMap::from([("window".to_string(), "8".to_string())]));
        let merged = map.pick(Some(4usize), "window", parse_number).unwrap();
        assert_eq!(merged, Some(4));

        let mut map = ConfigMap(BTreeMap::from([("window".to_string(), "8".to_string())]));
        let merged = map.pick(None::<usize>, "window", parse_number).unwrap();
        assert_eq!(merged, Some(8));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let map = ConfigMap(BTreeMap::from([("wimdow".to_string(), "8".to_string())]));
        let err = map.finish().unwrap_err();
        assert_eq!(err.code, EXIT_RUNTIME);
        assert!(err.message.contains("wimdow"));
    }

    #[test]
    fn missing_input_is_a_usage_failure() {
        let err = require_file(Path::new("/nonexistent/polls.csv"), "polls").unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
        assert!(err.message.contains("polls file not found"));
    }

    #[test]
    fn cli_parses_a_full_backtest_invocation() {
        let cli = Cli::try_parse_from([
            "sentipoll",
            "backtest",
            "--mentions",
            "m.csv",
            "--polls",
            "p.csv",
            "--out",
            "reports",
            "--window",
            "16",
            "--learner",
            "rf",
            "--target",
            "delta",
            "--feature-set",
            "sentiment",
            "--lagged-self",
            "off",
            "--selection",
            "rfe",
            "--k",
            "auto",
            "--seed",
            "7",
            "--threads",
            "2",
            "--smoothing",
            "laplace",
            "--per-entity",
            "on",
        ])
        .unwrap();
        let Command::Backtest(args) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(args.window, Some(16));
        assert_eq!(args.learner, Some(Learner::Rf));
        assert_eq!(args.k, Some(KChoice::Auto));
        assert_eq!(args.per_entity, Some(true));
    }

    #[test]
    fn aggregate_requires_exactly_one_source() {
        assert!(Cli::try_parse_from([
            "sentipoll",
            "aggregate",
            "--polls",
            "p.csv",
            "--out",
            "f.csv"
        ])
        .is_err());
        assert!(Cli::try_parse_from([
            "sentipoll",
            "aggregate",
            "--mentions",
            "m.csv",
            "--counts",
            "c.csv",
            "--polls",
            "p.csv",
            "--out",
            "f.csv"
        ])
        .is_err());
    }
}
