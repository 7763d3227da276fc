//! Sliding-window OLS backtest on a synthetic scenario, in both absolute
//! and delta target modes, against the lagged-self baseline.
//!
//! Run with: cargo run --example backtest_ols

use sentipoll::aggregators::TargetMode;
use sentipoll::backtest::{run_backtest, BacktestConfig};
use sentipoll::mention_store::bucket_periods;
use sentipoll::synth::{generate_scenario, ScenarioSpec};

fn main() -> sentipoll::Result<()> {
    let scenario = generate_scenario(&ScenarioSpec::default())?;
    let (table, stats) = bucket_periods(&scenario.mentions, &scenario.polls);
    println!(
        "scenario: {} mentions over {} periods, {} ignored\n",
        scenario.mentions.len(),
        table.n_periods(),
        stats.ignored()
    );

    for mode in [TargetMode::Absolute, TargetMode::Delta] {
        let config = BacktestConfig { target_mode: mode, ..Default::default() };
        let report = run_backtest(&table, &config)?;
        println!(
            "{mode:?} targets: {} test periods, global MAE {:.4} pp (baseline {:.4} pp)",
            report.n_test_periods, report.global_mae, report.baseline_global_mae
        );
        for period in &report.periods {
            println!(
                "  period {:>2} ({}): MAE {:.4} pp over {} entities",
                period.period_index,
                period.period_start,
                period.mae,
                period.entries.len()
            );
        }
        println!();
    }
    Ok(())
}
