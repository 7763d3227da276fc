//! The full file-based pipeline, exactly as the CLI drives it: write a
//! scenario to CSV, parse it back, build the feature matrix, run a backtest,
//! and emit the JSON/CSV report artifacts.
//!
//! Run with: cargo run --example pipeline_files

use std::fs::{self, File};
use std::io::BufReader;

use sentipoll::aggregators::{feature_matrix, FeatureOptions, TargetMode};
use sentipoll::backtest::{run_backtest, BacktestConfig, Learner};
use sentipoll::mention_store::{
    bucket_periods, parse_mentions, parse_polls_csv, write_mentions_csv, write_polls_csv,
    MentionFormat, ParseOptions,
};
use sentipoll::synth::{generate_scenario, ScenarioSpec};

fn main() -> sentipoll::Result<()> {
    let dir = std::env::temp_dir().join("sentipoll_pipeline_example");
    fs::create_dir_all(&dir)?;

    // 1. scenario → CSV files (what `sentipoll synth` does)
    let scenario = generate_scenario(&ScenarioSpec { n_periods: 24, ..Default::default() })?;
    let mentions_path = dir.join("mentions.csv");
    let polls_path = dir.join("polls.csv");
    write_mentions_csv(&scenario.mentions, File::create(&mentions_path)?)?;
    write_polls_csv(&scenario.polls, File::create(&polls_path)?)?;
    println!("wrote {} and {}", mentions_path.display(), polls_path.display());

    // 2. CSV files → period table (what every consuming subcommand does)
    let parsed = parse_mentions(
        BufReader::new(File::open(&mentions_path)?),
        MentionFormat::Csv,
        &ParseOptions::default(),
    )?;
    let polls = parse_polls_csv(BufReader::new(File::open(&polls_path)?))?;
    let (table, stats) = bucket_periods(&parsed.records, &polls);
    println!(
        "parsed {} mentions into {} periods × {} entities ({} ignored)",
        parsed.records.len(),
        table.n_periods(),
        table.entities().len(),
        stats.ignored()
    );

    // 3. period table → feature matrix CSV (what `sentipoll aggregate` does)
    let matrix = feature_matrix(&table, &FeatureOptions::default())?;
    let features_path = dir.join("features.csv");
    matrix.write_csv(File::create(&features_path)?)?;
    println!(
        "wrote {} ({} rows × {} columns)",
        features_path.display(),
        matrix.rows.len(),
        matrix.columns.len()
    );

    // 4. backtest → report artifacts (what `sentipoll backtest` does)
    let config = BacktestConfig {
        learner: Learner::Rf,
        target_mode: TargetMode::Delta,
        ..Default::default()
    };
    let report = run_backtest(&table, &config)?;
    let report_path = dir.join("report.json");
    fs::write(&report_path, report.to_json_string()?)?;
    let summary_path = dir.join("summary.csv");
    report.write_summary_csv(File::create(&summary_path)?)?;
    if let Some(importance) = &report.importance {
        let importance_path = dir.join("importance.csv");
        importance.write_csv(File::create(&importance_path)?)?;
        println!("wrote {}", importance_path.display());
    }
    println!("wrote {} and {}", report_path.display(), summary_path.display());
    println!(
        "\nglobal MAE {:.4} pp vs lagged baseline {:.4} pp over {} test periods",
        report.global_mae, report.baseline_global_mae, report.n_test_periods
    );
    Ok(())
}
