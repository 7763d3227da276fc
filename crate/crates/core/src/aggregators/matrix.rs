//! Assembling per-period aggregates into a regression-ready matrix.
//!
//! One sample = one (period, entity) pair; samples from all entities are
//! pooled. In delta mode both feature columns and targets are first
//! differences per entity, so a matrix row reads "change in this aggregate
//! over the last period" against "change in the poll".

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{aggregate_row, AggregateId, FeatureSet, PeriodTotals, Smoothing, Warnings};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::mention_store::PeriodTable;

/// Whether targets (and features) are poll levels or poll changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    #[default]
    Absolute,
    Delta,
}

/// One column of a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnId {
    Aggregate(AggregateId),
    /// The target's own previous value (previous share, or previous delta).
    LaggedSelf,
}

impl ColumnId {
    pub fn name(&self) -> &'static str {
        match self {
            ColumnId::Aggregate(id) => id.name(),
            ColumnId::LaggedSelf => "lagged_self",
        }
    }
}

/// Identity of one matrix row. `period_index` always refers to the absolute
/// period numbering of the source table, also in delta mode (where the row
/// describes the change from period `period_index - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowKey {
    pub period_index: usize,
    pub period_start: NaiveDate,
    pub entity: String,
}

/// Assembly options for [`feature_matrix`].
#[derive(Debug, Clone, Copy)]
pub struct FeatureOptions {
    pub feature_set: FeatureSet,
    pub target_mode: TargetMode,
    pub include_lagged_self: bool,
    pub smoothing: Smoothing,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            feature_set: FeatureSet::default(),
            target_mode: TargetMode::default(),
            include_lagged_self: true,
            smoothing: Smoothing::default(),
        }
    }
}

/// A dense, finite feature matrix with aligned targets and row/column
/// identities.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub columns: Vec<ColumnId>,
    pub rows: Vec<RowKey>,
    pub data: DenseMatrix,
    pub targets: Vec<f64>,
    pub warnings: Warnings,
}

impl FeatureMatrix {
    pub fn column_names(&self) -> Vec<&'static str> {
        self.columns.iter().map(ColumnId::name).collect()
    }

    /// Indices of aggregate columns (the candidates for feature selection).
    pub fn aggregate_column_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, ColumnId::Aggregate(_)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn lagged_self_index(&self) -> Option<usize> {
        self.columns.iter().position(|c| *c == ColumnId::LaggedSelf)
    }

    /// Row indices belonging to one absolute period index.
    pub fn rows_of_period(&self, period_index: usize) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.period_index == period_index)
            .map(|(i, _)| i)
            .collect()
    }

    /// Export as CSV: `period_start,entity,<feature columns...>,target`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["period_start", "entity"];
        header.extend(self.column_names());
        header.push("target");
        w.write_record(&header).map_err(Error::from)?;
        for (i, key) in self.rows.iter().enumerate() {
            let mut record = vec![key.period_start.to_string(), key.entity.clone()];
            record.extend(self.data.row(i).iter().map(|x| x.to_string()));
            record.push(self.targets[i].to_string());
            w.write_record(&record).map_err(Error::from)?;
        }
        w.flush().map_err(Error::Io)?;
        Ok(())
    }
}

/// Build the pooled feature matrix for a period table.
///
/// The table must carry absolute targets; delta differencing happens here,
/// on both features and targets, and consumes one leading period. Rows are
/// ordered period-major, entities sorted within a period. The lagged-self
/// column, when enabled, is always last.
pub fn feature_matrix(table: &PeriodTable, opts: &FeatureOptions) -> Result<FeatureMatrix> {
    if table.targets_are_deltas() {
        return Err(Error::InvalidConfig(
            "feature_matrix needs absolute targets; differencing is applied internally in delta mode"
                .into(),
        ));
    }
    let n = table.n_periods();
    if n == 0 {
        return Err(Error::TooFewPeriods(0));
    }
    if opts.target_mode == TargetMode::Delta && n < 2 {
        return Err(Error::TooFewPeriods(n));
    }

    let mut warnings = Warnings::default();
    let entities = table.entities();

    // full 25-wide aggregate rows per (period, entity), period-major
    let mut full: Vec<Vec<[f64; 25]>> = Vec::with_capacity(n);
    for k in 0..n {
        let counts = table.period_counts(k);
        let totals = PeriodTotals::from_counts(&counts, opts.smoothing, &mut warnings);
        let rows = entities
            .iter()
            .map(|e| aggregate_row(&counts[e], &totals, &mut warnings))
            .collect();
        full.push(rows);
    }

    let selected: Vec<usize> = opts
        .feature_set
        .members()
        .iter()
        .map(|id| AggregateId::ALL.iter().position(|a| a == id).unwrap())
        .collect();
    let mut columns: Vec<ColumnId> = opts
        .feature_set
        .members()
        .into_iter()
        .map(ColumnId::Aggregate)
        .collect();
    if opts.include_lagged_self {
        columns.push(ColumnId::LaggedSelf);
    }

    let first_period = match opts.target_mode {
        TargetMode::Absolute => 0,
        TargetMode::Delta => 1,
    };
    let n_rows = (n - first_period) * entities.len();
    let mut data = Vec::with_capacity(n_rows * columns.len());
    let mut rows = Vec::with_capacity(n_rows);
    let mut targets = Vec::with_capacity(n_rows);

    for k in first_period..n {
        let period = table.periods()[k];
        for (e_ix, entity) in entities.iter().enumerate() {
            let current = &full[k][e_ix];
            match opts.target_mode {
                TargetMode::Absolute => {
                    for &agg_ix in &selected {
                        data.push(current[agg_ix]);
                    }
                    if opts.include_lagged_self {
                        data.push(if k == 0 {
                            table.initial_share(entity)
                        } else {
                            table.target(k - 1, entity)
                        });
                    }
                    targets.push(table.target(k, entity));
                }
                TargetMode::Delta => {
                    let previous = &full[k - 1][e_ix];
                    for &agg_ix in &selected {
                        data.push(current[agg_ix] - previous[agg_ix]);
                    }
                    if opts.include_lagged_self {
                        data.push(if k == 1 {
                            table.target(0, entity) - table.initial_share(entity)
                        } else {
                            table.target(k - 1, entity) - table.target(k - 2, entity)
                        });
                    }
                    targets.push(table.target(k, entity) - table.target(k - 1, entity));
                }
            }
            rows.push(RowKey {
                period_index: k,
                period_start: period.start,
                entity: entity.clone(),
            });
        }
    }

    Ok(FeatureMatrix {
        data: DenseMatrix::from_rows(rows.len(), columns.len(), data),
        columns,
        rows,
        targets,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mention_store::{bucket_periods, PollSeries, PollSnapshot};
    use std::collections::BTreeMap;

    fn polls(dates_shares: &[(&str, Vec<(&str, f64)>)]) -> PollSeries {
        let snapshots = dates_shares
            .iter()
            .map(|(d, shares)| {
                let map: BTreeMap<String, f64> =
                    shares.iter().map(|(e, s)| (e.to_string(), *s)).collect();
                PollSnapshot::new(d.parse().unwrap(), map).unwrap()
            })
            .collect();
        PollSeries::new(snapshots).unwrap()
    }

    fn three_poll_table() -> PeriodTable {
        let series = polls(&[
            ("2012-01-01", vec![("a", 30.0), ("b", 20.0)]),
            ("2012-02-01", vec![("a", 31.0), ("b", 19.0)]),
            ("2012-03-01", vec![("a", 33.5), ("b", 18.0)]),
        ]);
        bucket_periods(&[], &series).0
    }

    #[test]
    fn absolute_matrix_shape_and_order() {
        let table = three_poll_table();
        let opts = FeatureOptions { include_lagged_self: true, ..Default::default() };
        let m = feature_matrix(&table, &opts).unwrap();
        assert_eq!(m.columns.len(), 26);
        assert_eq!(*m.columns.last().unwrap(), ColumnId::LaggedSelf);
        assert_eq!(m.rows.len(), 4); // 2 periods x 2 entities
        assert_eq!(m.rows[0].entity, "a");
        assert_eq!(m.rows[1].entity, "b");
        assert_eq!(m.rows[2].period_index, 1);
        assert_eq!(m.targets, vec![31.0, 19.0, 33.5, 18.0]);
    }

    #[test]
    fn lagged_self_uses_initial_share_for_period_zero() {
        let table = three_poll_table();
        let opts = FeatureOptions { include_lagged_self: true, ..Default::default() };
        let m = feature_matrix(&table, &opts).unwrap();
        let lag = m.lagged_self_index().unwrap();
        assert_eq!(m.data.get(0, lag), 30.0); // entity a, period 0: first poll
        assert_eq!(m.data.get(2, lag), 31.0); // entity a, period 1: previous target
    }

    #[test]
    fn delta_matrix_differences_features_and_targets() {
        let table = three_poll_table();
        let opts = FeatureOptions {
            target_mode: TargetMode::Delta,
            include_lagged_self: true,
            ..Default::default()
        };
        let m = feature_matrix(&table, &opts).unwrap();
        assert_eq!(m.rows.len(), 2); // one differenced period x 2 entities
        assert_eq!(m.rows[0].period_index, 1);
        assert!((m.targets[0] - 2.5).abs() < 1e-12);
        assert!((m.targets[1] - (-1.0)).abs() < 1e-12);
        let lag = m.lagged_self_index().unwrap();
        // previous delta of entity a is 31 - 30
        assert_eq!(m.data.get(0, lag), 1.0);
        // zero mention stream means every aggregate delta is zero
        for row in 0..2 {
            for col in 0..25 {
                assert_eq!(m.data.get(row, col), 0.0);
            }
        }
    }

    #[test]
    fn buzz_set_gives_two_columns() {
        let table = three_poll_table();
        let opts = FeatureOptions {
            feature_set: FeatureSet::Buzz,
            include_lagged_self: false,
            ..Default::default()
        };
        let m = feature_matrix(&table, &opts).unwrap();
        assert_eq!(m.column_names(), vec!["entity_buzz", "share"]);
        assert!(m.lagged_self_index().is_none());
        assert_eq!(m.aggregate_column_indices(), vec![0, 1]);
    }

    #[test]
    fn delta_mode_needs_two_periods() {
        let series = polls(&[
            ("2012-01-01", vec![("a", 30.0)]),
            ("2012-02-01", vec![("a", 31.0)]),
        ]);
        let table = bucket_periods(&[], &series).0;
        let opts = FeatureOptions { target_mode: TargetMode::Delta, ..Default::default() };
        assert!(matches!(feature_matrix(&table, &opts), Err(Error::TooFewPeriods(1))));
    }

    #[test]
    fn delta_tables_are_rejected() {
        let table = three_poll_table();
        let deltas = crate::mention_store::to_deltas(&table).unwrap();
        let err = feature_matrix(&deltas, &FeatureOptions::default());
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn csv_export_has_header_and_all_rows() {
        let table = three_poll_table();
        let opts = FeatureOptions { include_lagged_self: true, ..Default::default() };
        let m = feature_matrix(&table, &opts).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("period_start,entity,entity_buzz,"));
        assert!(header.ends_with("lagged_self,target"));
        assert_eq!(lines.count(), 4);
    }
}
