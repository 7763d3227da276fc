//! Sliding-window nowcasting backtest.
//!
//! For each test period t, a model is trained on the pooled samples of the
//! W preceding periods (feature selection, when enabled, is refit on that
//! window alone), predicts every entity's poll value for period t, and the
//! window slides one period. Period MAEs average into a global MAE, always
//! accompanied by the lagged-self baseline over the same test periods.
//!
//! Nothing from period t or later enters training; a model for period t sees
//! only features of periods < t, their targets, and period-t features at
//! predict time.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregators::{
    feature_matrix, FeatureMatrix, FeatureOptions, FeatureSet, Smoothing, TargetMode,
};
use crate::error::{Error, Result};
use crate::mention_store::{bucket_periods, PeriodTable, PollSeries};
use crate::regression::{
    average_importances, forest_fit, forest_importance, ols_fit, ForestHyperparams,
    ImportanceReport,
};
use crate::selection::{rfe_select, univariate_select, SelectionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Learner {
    #[default]
    Ols,
    Rf,
}

/// Number of features to keep: a fixed count or the 10%-of-candidates rule
/// (ceiling, minimum 1). Serializes as a number or the string "auto".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Auto,
}

impl KChoice {
    pub fn resolve(&self, candidates: usize) -> usize {
        match self {
            KChoice::Fixed(k) => *k,
            KChoice::Auto => ((candidates as f64 * 0.1).ceil() as usize).max(1),
        }
    }
}

impl Serialize for KChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KChoice::Fixed(k) => s.serialize_u64(*k as u64),
            KChoice::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(KChoice::Fixed(k as usize)),
            Raw::Str(s) if s == "auto" => Ok(KChoice::Auto),
            Raw::Str(other) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", got {other:?}"
            ))),
        }
    }
}

impl std::str::FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        s.parse::<usize>()
            .map(KChoice::Fixed)
            .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

/// Feature-selection stage of the backtest, refit per test period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SelectionSpec {
    #[default]
    None,
    Univariate { k: KChoice },
    Rfe { k: KChoice },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Training window length W, in periods.
    pub window: usize,
    pub learner: Learner,
    pub target_mode: TargetMode,
    pub feature_set: FeatureSet,
    pub include_lagged_self: bool,
    pub selection: SelectionSpec,
    pub smoothing: Smoothing,
    pub seed: u64,
    /// Fit one model per entity instead of pooling entities.
    pub per_entity: bool,
    pub forest: ForestHyperparams,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            window: 16,
            learner: Learner::Ols,
            target_mode: TargetMode::Absolute,
            feature_set: FeatureSet::All,
            include_lagged_self: true,
            selection: SelectionSpec::None,
            smoothing: Smoothing::None,
            seed: 42,
            per_entity: false,
            forest: ForestHyperparams::default(),
        }
    }
}

/// What a report describes: a learner run or the lagged-self baseline alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Model,
    LaggedBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub entity: String,
    pub prediction: f64,
    pub actual: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub period_index: usize,
    pub period_start: NaiveDate,
    /// Entity order is sorted and identical across periods.
    pub entries: Vec<PredictionEntry>,
    pub mae: f64,
    /// Features kept by selection this period, best score first. Absent when
    /// selection is off or models are per-entity.
    pub selected_features: Option<Vec<String>>,
    /// All training feature columns were constant; the training-target mean
    /// served as the prediction.
    pub degenerate_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSummary {
    pub features: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n_models: usize,
}

impl ImportanceSummary {
    /// CSV: `feature,mean_importance,std`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "mean_importance", "std"])?;
        for i in 0..self.features.len() {
            w.write_record([
                self.features[i].clone(),
                self.mean[i].to_string(),
                self.std[i].to_string(),
            ])?;
        }
        w.flush().map_err(Error::Io)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub kind: ReportKind,
    pub config: BacktestConfig,
    /// Names of all model feature columns (before per-period selection).
    pub feature_columns: Vec<String>,
    pub n_test_periods: usize,
    pub periods: Vec<PeriodResult>,
    /// Arithmetic mean of the period MAEs.
    pub global_mae: f64,
    /// Lagged-self baseline over the same test periods.
    pub baseline_global_mae: f64,
    /// Importances averaged over the per-period forest models (rf only).
    pub importance: Option<ImportanceSummary>,
    pub warnings: Vec<String>,
}

impl BacktestReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV: `period,entity,prediction,actual,abs_error`, one row per entry.
    pub fn write_summary_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["period", "entity", "prediction", "actual", "abs_error"])?;
        for p in &self.periods {
            for e in &p.entries {
                w.write_record([
                    p.period_index.to_string(),
                    e.entity.clone(),
                    e.prediction.to_string(),
                    e.actual.to_string(),
                    e.abs_error.to_string(),
                ])?;
            }
        }
        w.flush().map_err(Error::Io)?;
        Ok(())
    }
}

/// Mean absolute error, in the units of the inputs (percentage points here).
pub fn mae(forecasts: &[f64], actuals: &[f64]) -> Result<f64> {
    if forecasts.len() != actuals.len() {
        return Err(Error::LengthMismatch {
            what: "forecasts vs actuals",
            expected: actuals.len(),
            got: forecasts.len(),
        });
    }
    if forecasts.is_empty() {
        return Err(Error::InvalidConfig("MAE of zero forecasts is undefined".into()));
    }
    let total: f64 = forecasts.iter().zip(actuals).map(|(f, y)| (f - y).abs()).sum();
    Ok(total / forecasts.len() as f64)
}

fn period_seed(seed: u64, period: usize) -> u64 {
    seed.wrapping_add((period as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Previous target value (absolute) or previous target change (delta) of
/// `entity` relative to period `t`. Callers guarantee `t` is large enough.
fn lagged_value(table: &PeriodTable, mode: TargetMode, t: usize, entity: &str) -> f64 {
    match mode {
        TargetMode::Absolute => {
            if t == 0 {
                table.initial_share(entity)
            } else {
                table.target(t - 1, entity)
            }
        }
        TargetMode::Delta => {
            if t == 1 {
                table.target(0, entity) - table.initial_share(entity)
            } else {
                table.target(t - 1, entity) - table.target(t - 2, entity)
            }
        }
    }
}

fn actual_value(table: &PeriodTable, mode: TargetMode, t: usize, entity: &str) -> f64 {
    match mode {
        TargetMode::Absolute => table.target(t, entity),
        TargetMode::Delta => table.target(t, entity) - table.target(t - 1, entity),
    }
}

/// Predict each test period's value with the previous one (absolute mode:
/// y_{t-1}; delta mode: the previous change). The reference every model run
/// is compared against.
pub fn baseline_lagged(polls: &PollSeries, target_mode: TargetMode) -> Result<BacktestReport> {
    let (table, _) = bucket_periods(&[], polls);
    let first_test = match target_mode {
        TargetMode::Absolute => 0,
        TargetMode::Delta => 1,
    };
    if table.n_periods() <= first_test {
        return Err(Error::TooFewPeriods(table.n_periods()));
    }

    let mut periods = Vec::new();
    for t in first_test..table.n_periods() {
        let mut predictions = Vec::new();
        let mut actuals = Vec::new();
        let entries: Vec<PredictionEntry> = table
            .entities()
            .iter()
            .map(|e| {
                let prediction = lagged_value(&table, target_mode, t, e);
                let actual = actual_value(&table, target_mode, t, e);
                predictions.push(prediction);
                actuals.push(actual);
                PredictionEntry {
                    entity: e.clone(),
                    prediction,
                    actual,
                    abs_error: (prediction - actual).abs(),
                }
            })
            .collect();
        periods.push(PeriodResult {
            period_index: t,
            period_start: table.periods()[t].start,
            entries,
            mae: mae(&predictions, &actuals)?,
            selected_features: None,
            degenerate_window: false,
        });
    }

    let global = periods.iter().map(|p| p.mae).sum::<f64>() / periods.len() as f64;
    Ok(BacktestReport {
        kind: ReportKind::LaggedBaseline,
        config: BacktestConfig { window: 1, target_mode, ..Default::default() },
        feature_columns: vec!["lagged_self".into()],
        n_test_periods: periods.len(),
        periods,
        global_mae: global,
        baseline_global_mae: global,
        importance: None,
        warnings: Vec::new(),
    })
}

/// One fitted-and-applied model slice: predictions for the test rows, plus
/// importance (rf) and whether the window was degenerate.
struct SliceOutcome {
    predictions: Vec<f64>,
    importance: Option<ImportanceReport>,
    degenerate: bool,
}

fn fit_predict_slice(
    fm: &FeatureMatrix,
    model_cols: &[usize],
    train_rows: &[usize],
    test_rows: &[usize],
    cfg: &BacktestConfig,
    seed: u64,
) -> Result<SliceOutcome> {
    let x_train = fm.data.select_rows(train_rows).select_columns(model_cols);
    let y_train: Vec<f64> = train_rows.iter().map(|&r| fm.targets[r]).collect();
    let x_test = fm.data.select_rows(test_rows).select_columns(model_cols);

    let (_, stds) = x_train.column_moments();
    if stds.iter().all(|s| *s == 0.0) {
        // nothing to learn from: constant-feature window, predict the mean
        let mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
        return Ok(SliceOutcome {
            predictions: vec![mean; test_rows.len()],
            importance: None,
            degenerate: true,
        });
    }

    match cfg.learner {
        Learner::Ols => {
            let model = ols_fit(&x_train, &y_train)?;
            Ok(SliceOutcome {
                predictions: model.predict(&x_test)?,
                importance: None,
                degenerate: false,
            })
        }
        Learner::Rf => {
            let model = forest_fit(&x_train, &y_train, &cfg.forest, seed)?;
            let local = forest_importance(&model);
            // re-embed importances into the full column space of the matrix
            let mut mean = vec![0.0; fm.columns.len()];
            for (pos, &col) in model_cols.iter().enumerate() {
                mean[col] = local.mean[pos];
            }
            let importance = ImportanceReport {
                mean,
                std: vec![0.0; fm.columns.len()],
                n_models: 1,
                degenerate: local.degenerate,
            };
            Ok(SliceOutcome {
                predictions: model.predict(&x_test)?,
                importance: Some(importance),
                degenerate: false,
            })
        }
    }
}

fn select_columns_for_window(
    fm: &FeatureMatrix,
    train_rows: &[usize],
    cfg: &BacktestConfig,
) -> Result<(Vec<usize>, Option<SelectionResult>)> {
    let candidates = fm.aggregate_column_indices();
    let selection = match cfg.selection {
        SelectionSpec::None => None,
        SelectionSpec::Univariate { k } | SelectionSpec::Rfe { k } => {
            let x = fm.data.select_rows(train_rows).select_columns(&candidates);
            let y: Vec<f64> = train_rows.iter().map(|&r| fm.targets[r]).collect();
            let resolved = k.resolve(candidates.len());
            let result = match cfg.selection {
                SelectionSpec::Univariate { .. } => univariate_select(&x, &y, resolved)?,
                _ => rfe_select(&x, &y, resolved)?,
            };
            Some(result)
        }
    };

    let mut model_cols: Vec<usize> = match &selection {
        None => candidates,
        Some(result) => {
            let mut cols: Vec<usize> = result.chosen.iter().map(|&pos| candidates[pos]).collect();
            cols.sort_unstable(); // canonical column order inside the model
            cols
        }
    };
    if let Some(lag) = fm.lagged_self_index() {
        model_cols.push(lag); // lagged self always rides along, never selected away
    }
    Ok((model_cols, selection))
}

struct PeriodComputation {
    result: PeriodResult,
    baseline_mae: f64,
    importances: Vec<ImportanceReport>,
    warnings: Vec<String>,
}

fn run_period(
    t: usize,
    fm: &FeatureMatrix,
    table: &PeriodTable,
    cfg: &BacktestConfig,
) -> Result<PeriodComputation> {
    let in_window = |p: usize| p + cfg.window >= t && p < t;
    let mut warnings = Vec::new();
    let mut importances = Vec::new();

    let mut entries = Vec::new();
    let mut selected_features = None;
    let mut degenerate_window = false;

    if cfg.per_entity {
        for entity in table.entities() {
            let train_rows: Vec<usize> = fm
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| in_window(r.period_index) && r.entity == *entity)
                .map(|(i, _)| i)
                .collect();
            let test_rows: Vec<usize> = fm
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.period_index == t && r.entity == *entity)
                .map(|(i, _)| i)
                .collect();
            let (model_cols, _) = select_columns_for_window(fm, &train_rows, cfg)?;
            let outcome = fit_predict_slice(fm, &model_cols, &train_rows, &test_rows, cfg, period_seed(cfg.seed, t))?;
            if outcome.degenerate {
                degenerate_window = true;
                warnings.push(format!(
                    "period {t}, entity {entity}: constant training features; training-mean fallback"
                ));
            }
            if let Some(imp) = outcome.importance {
                importances.push(imp);
            }
            for (pos, &row) in test_rows.iter().enumerate() {
                let actual = fm.targets[row];
                let prediction = outcome.predictions[pos];
                entries.push(PredictionEntry {
                    entity: entity.clone(),
                    prediction,
                    actual,
                    abs_error: (prediction - actual).abs(),
                });
            }
        }
    } else {
        let train_rows: Vec<usize> = fm
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| in_window(r.period_index))
            .map(|(i, _)| i)
            .collect();
        let test_rows: Vec<usize> = fm.rows_of_period(t);
        let (model_cols, selection) = select_columns_for_window(fm, &train_rows, cfg)?;
        if let Some(result) = &selection {
            let names: Vec<String> = result
                .chosen
                .iter()
                .map(|&pos| fm.columns[fm.aggregate_column_indices()[pos]].name().to_owned())
                .collect();
            selected_features = Some(names);
        }
        let outcome = fit_predict_slice(fm, &model_cols, &train_rows, &test_rows, cfg, period_seed(cfg.seed, t))?;
        if outcome.degenerate {
            degenerate_window = true;
            warnings.push(format!(
                "period {t}: constant training features; training-mean fallback"
            ));
        }
        if let Some(imp) = outcome.importance {
            importances.push(imp);
        }
        for (pos, &row) in test_rows.iter().enumerate() {
            let key = &fm.rows[row];
            let actual = fm.targets[row];
            let prediction = outcome.predictions[pos];
            entries.push(PredictionEntry {
                entity: key.entity.clone(),
                prediction,
                actual,
                abs_error: (prediction - actual).abs(),
            });
        }
    }

    let predictions: Vec<f64> = entries.iter().map(|e| e.prediction).collect();
    let actuals: Vec<f64> = entries.iter().map(|e| e.actual).collect();
    let period_mae = mae(&predictions, &actuals)?;

    let baseline_preds: Vec<f64> = table
        .entities()
        .iter()
        .map(|e| lagged_value(table, cfg.target_mode, t, e))
        .collect();
    let baseline_actuals: Vec<f64> = table
        .entities()
        .iter()
        .map(|e| actual_value(table, cfg.target_mode, t, e))
        .collect();
    let baseline_mae = mae(&baseline_preds, &baseline_actuals)?;

    Ok(PeriodComputation {
        result: PeriodResult {
            period_index: t,
            period_start: table.periods()[t].start,
            entries,
            mae: period_mae,
            selected_features,
            degenerate_window,
        },
        baseline_mae,
        importances,
        warnings,
    })
}

/// Run the full sliding-window backtest described by `cfg` over `table`.
pub fn run_backtest(table: &PeriodTable, cfg: &BacktestConfig) -> Result<BacktestReport> {
    if cfg.window == 0 {
        return Err(Error::InvalidConfig("window must be at least 1 period".into()));
    }
    if table.targets_are_deltas() {
        return Err(Error::InvalidConfig(
            "run_backtest needs absolute targets; set target_mode=delta for differencing".into(),
        ));
    }
    let n = table.n_periods();
    let first_test = match cfg.target_mode {
        TargetMode::Absolute => cfg.window,
        // differencing consumes one leading period
        TargetMode::Delta => cfg.window + 1,
    };
    if n <= first_test {
        return Err(Error::InsufficientPeriods { required: first_test + 1, available: n });
    }

    let fm = feature_matrix(
        table,
        &FeatureOptions {
            feature_set: cfg.feature_set,
            target_mode: cfg.target_mode,
            include_lagged_self: cfg.include_lagged_self,
            smoothing: cfg.smoothing,
        },
    )?;

    let computations: Vec<PeriodComputation> = (first_test..n)
        .into_par_iter()
        .map(|t| run_period(t, &fm, table, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    if fm.warnings.guarded_divisions > 0 {
        warnings.push(format!(
            "{} guarded division(s): zero denominators evaluated to 0 during aggregation",
            fm.warnings.guarded_divisions
        ));
    }

    let mut periods = Vec::new();
    let mut importances = Vec::new();
    let mut baseline_maes = Vec::new();
    for c in computations {
        periods.push(c.result);
        importances.extend(c.importances);
        baseline_maes.extend([c.baseline_mae]);
        warnings.extend(c.warnings);
    }

    let global_mae = periods.iter().map(|p| p.mae).sum::<f64>() / periods.len() as f64;
    let baseline_global_mae = baseline_maes.iter().sum::<f64>() / baseline_maes.len() as f64;

    let importance = if importances.is_empty() {
        None
    } else {
        let avg = average_importances(&importances)?;
        Some(ImportanceSummary {
            features: fm.column_names().iter().map(|s| s.to_string()).collect(),
            mean: avg.mean,
            std: avg.std,
            n_models: avg.n_models,
        })
    };

    Ok(BacktestReport {
        kind: ReportKind::Model,
        config: *cfg,
        feature_columns: fm.column_names().iter().map(|s| s.to_string()).collect(),
        n_test_periods: periods.len(),
        periods,
        global_mae,
        baseline_global_mae,
        importance,
        warnings,
    })
}
