//! The lagged-self baseline: predict each poll with the previous one (or
//! each delta with the previous delta). Every model run is scored against it.
//!
//! Run with: cargo run --example lagged_baseline

use std::collections::BTreeMap;

use sentipoll::aggregators::TargetMode;
use sentipoll::backtest::baseline_lagged;
use sentipoll::mention_store::{PollSeries, PollSnapshot};
use sentipoll::synth::{generate_scenario, ScenarioSpec};

fn main() -> sentipoll::Result<()> {
    // hand-built series climbing by exactly 0.5 pp per poll
    let snapshots = (0..6)
        .map(|k| {
            let date = format!("2012-{:02}-01", k + 1).parse().unwrap();
            let shares = BTreeMap::from([("incumbent".to_string(), 30.0 + 0.5 * k as f64)]);
            PollSnapshot::new(date, shares)
        })
        .collect::<sentipoll::Result<Vec<_>>>()?;
    let steady = PollSeries::new(snapshots)?;

    let absolute = baseline_lagged(&steady, TargetMode::Absolute)?;
    let delta = baseline_lagged(&steady, TargetMode::Delta)?;
    println!("constant +0.5 pp steps:");
    println!("  absolute-mode baseline MAE: {:.4} pp (the step size, exactly)", absolute.global_mae);
    println!("  delta-mode baseline MAE:    {:.4} pp (steps never change)\n", delta.global_mae);

    // on a noisy scenario the baseline is the number to beat
    let scenario = generate_scenario(&ScenarioSpec::default())?;
    let report = baseline_lagged(&scenario.polls, TargetMode::Absolute)?;
    println!(
        "synthetic scenario: lagged baseline MAE {:.4} pp over {} periods",
        report.global_mae, report.n_test_periods
    );
    for period in report.periods.iter().take(5) {
        println!(
            "  period {:>2} ({}): MAE {:.4} pp",
            period.period_index, period.period_start, period.mae
        );
    }
    println!("  …");
    Ok(())
}
