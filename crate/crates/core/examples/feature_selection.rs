//! Univariate and recursive-elimination feature selection, standalone over a
//! feature matrix and refit per period inside a backtest.
//!
//! Run with: cargo run --example feature_selection

use sentipoll::aggregators::{feature_matrix, FeatureOptions, TargetMode};
use sentipoll::backtest::{run_backtest, BacktestConfig, KChoice, SelectionSpec};
use sentipoll::mention_store::bucket_periods;
use sentipoll::selection::{rfe_select, univariate_select};
use sentipoll::synth::{generate_scenario, ScenarioSpec};

fn main() -> sentipoll::Result<()> {
    let spec = ScenarioSpec::default();
    let scenario = generate_scenario(&spec)?;
    let (table, _) = bucket_periods(&scenario.mentions, &scenario.polls);

    // selection over the whole delta-mode matrix (no lag column)
    let opts = FeatureOptions {
        target_mode: TargetMode::Delta,
        include_lagged_self: false,
        ..Default::default()
    };
    let matrix = feature_matrix(&table, &opts)?;
    let names = matrix.column_names();

    println!("planted poll driver: {}\n", spec.planted.name());
    for (label, result) in [
        ("univariate", univariate_select(&matrix.data, &matrix.targets, 5)?),
        ("rfe", rfe_select(&matrix.data, &matrix.targets, 5)?),
    ] {
        let chosen: Vec<&str> = result.chosen.iter().map(|c| names[*c]).collect();
        println!("{label:>10} keeps: {}", chosen.join(", "));
    }

    // the backtest refits selection on each training window
    let config = BacktestConfig {
        target_mode: TargetMode::Delta,
        selection: SelectionSpec::Rfe { k: KChoice::Fixed(3) },
        ..Default::default()
    };
    let report = run_backtest(&table, &config)?;
    println!(
        "\nbacktest with per-period RFE (k=3): global MAE {:.4} pp (baseline {:.4} pp)",
        report.global_mae, report.baseline_global_mae
    );
    for period in &report.periods {
        let chosen = period.selected_features.as_deref().unwrap_or(&[]);
        println!("  period {:>2}: {}", period.period_index, chosen.join(", "));
    }
    Ok(())
}
