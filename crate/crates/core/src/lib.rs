//! Sentiment aggregates over polarity-labeled entity-mention streams, and
//! sliding-window backtests that nowcast poll results from them.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. **[`mention_store`]** — parse mention streams (CSV/JSON lines) and poll
//!    series, bucket mentions into the periods between consecutive polls, and
//!    pair each period with the poll that closes it.
//! 2. **[`aggregators`]** — turn per-period polarity counts into 25 aggregate
//!    features (counts, log-ratios, shares-of-voice, normalized rates) with
//!    guarded division and optional Laplace smoothing, as a feature matrix in
//!    absolute or delta form.
//! 3. **[`regression`] / [`selection`]** — ordinary least squares (minimum-norm,
//!    SVD-based) and a seeded random-forest regressor with impurity-based
//!    feature importances; univariate and recursive-elimination feature
//!    selection.
//! 4. **[`backtest`]** — slide a training window over the periods, refit
//!    selection and model each step, and score predictions against the
//!    lagged-self baseline (MAE in percentage points).
//!
//! [`synth`] generates deterministic scenarios with a planted
//! sentiment→poll coupling so end-to-end behavior can be verified against
//! known ground truth, and [`cli`] wires everything into the `sentipoll`
//! command-line tool.
//!
//! # Example
//!
//! ```
//! use sentipoll::backtest::{run_backtest, BacktestConfig};
//! use sentipoll::mention_store::bucket_periods;
//! use sentipoll::synth::{generate_scenario, ScenarioSpec};
//!
//! let scenario = generate_scenario(&ScenarioSpec::default())?;
//! let (table, _stats) = bucket_periods(&scenario.mentions, &scenario.polls);
//! let config = BacktestConfig { window: 16, ..Default::default() };
//! let report = run_backtest(&table, &config)?;
//! assert_eq!(report.n_test_periods, 12);
//! println!("MAE {:.3} vs baseline {:.3}", report.global_mae, report.baseline_global_mae);
//! # Ok::<(), sentipoll::Error>(())
//! ```
//!
//! The `examples/` directory holds one runnable program per capability
//! (`cargo run --example aggregate_features`, `--example backtest_forest`, …).

pub mod aggregators;
pub mod backtest;
pub mod cli;
pub mod error;
pub mod matrix;
pub mod mention_store;
pub mod regression;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
