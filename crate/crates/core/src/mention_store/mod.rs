//! Ingestion of polarity-labeled mention streams and poll snapshots, and
//! their alignment into inter-poll periods.
//!
//! The stream atom is a [`MentionRecord`]: one mention of one entity at one
//! instant, labeled positive, negative, or neutral. [`bucket_periods`] folds
//! a stream into a [`PeriodTable`]: per-entity polarity counts for every
//! period between consecutive polls, aligned with the poll value that closes
//! each period as the prediction target.

mod parse;

pub use parse::{
    parse_counts_csv, parse_mentions, parse_polls_csv, write_mentions_csv, write_polls_csv,
    MentionFormat, ParseOptions, ParsedMentions,
};

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polarity label of a mention with respect to the mentioned entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    /// Case-insensitive parse; surrounding whitespace is trimmed.
    pub fn parse(label: &str) -> Option<Polarity> {
        match label.trim().to_ascii_lowercase().as_str() {
            "positive" => Some(Polarity::Positive),
            "negative" => Some(Polarity::Negative),
            "neutral" => Some(Polarity::Neutral),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

/// One polarity-labeled mention of an entity at a timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub timestamp: DateTime<Utc>,
    pub entity: String,
    pub polarity: Polarity,
}

/// One poll snapshot: publication date and per-entity vote intention in
/// percentage points (0-100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollSnapshot {
    pub date: NaiveDate,
    pub shares: BTreeMap<String, f64>,
}

impl PollSnapshot {
    pub fn new(date: NaiveDate, shares: BTreeMap<String, f64>) -> Result<Self> {
        for (entity, share) in &shares {
            if !share.is_finite() || *share < 0.0 || *share > 100.0 {
                return Err(Error::InvalidPolls(format!(
                    "share {share} for {entity} on {date} outside [0, 100]"
                )));
            }
        }
        Ok(Self { date, shares })
    }
}

/// Strictly date-ascending poll snapshots covering one fixed entity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollSeries {
    snapshots: Vec<PollSnapshot>,
}

impl PollSeries {
    /// Validates: at least 2 snapshots, strictly increasing dates, identical
    /// entity set in every snapshot.
    pub fn new(snapshots: Vec<PollSnapshot>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::InvalidPolls(format!(
                "need at least 2 poll snapshots to form a period, got {}",
                snapshots.len()
            )));
        }
        for pair in snapshots.windows(2) {
            if pair[0].date >= pair[1].date {
                return Err(Error::InvalidPolls(format!(
                    "poll dates not strictly increasing: {} then {}",
                    pair[0].date, pair[1].date
                )));
            }
        }
        let entities: BTreeSet<&String> = snapshots[0].shares.keys().collect();
        if entities.is_empty() {
            return Err(Error::InvalidPolls("polls cover no entities".into()));
        }
        for s in &snapshots[1..] {
            let other: BTreeSet<&String> = s.shares.keys().collect();
            if other != entities {
                return Err(Error::InvalidPolls(format!(
                    "poll on {} covers a different entity set than the first poll",
                    s.date
                )));
            }
        }
        Ok(Self { snapshots })
    }

    pub fn snapshots(&self) -> &[PollSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Entities covered by the series, in sorted order.
    pub fn entities(&self) -> Vec<String> {
        self.snapshots[0].shares.keys().cloned().collect()
    }
}

/// Per-entity, per-period polarity totals. `buzz` is always the sum of the
/// three polarity counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityCounts {
    positives: u64,
    negatives: u64,
    neutrals: u64,
}

impl PolarityCounts {
    pub fn new(positives: u64, negatives: u64, neutrals: u64) -> Self {
        Self { positives, negatives, neutrals }
    }

    pub fn positives(&self) -> u64 {
        self.positives
    }

    pub fn negatives(&self) -> u64 {
        self.negatives
    }

    pub fn neutrals(&self) -> u64 {
        self.neutrals
    }

    pub fn buzz(&self) -> u64 {
        self.positives + self.negatives + self.neutrals
    }

    pub fn record(&mut self, polarity: Polarity) {
        match polarity {
            Polarity::Positive => self.positives += 1,
            Polarity::Negative => self.negatives += 1,
            Polarity::Neutral => self.neutrals += 1,
        }
    }
}

/// One inter-poll period: half-open date interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// Aligned per-period counts and targets for one poll series.
///
/// Period `k` spans `[poll_k, poll_{k+1})`; its target is the share at the
/// poll closing the period (`poll_{k+1}`). `initial_shares` keeps the shares
/// of the first poll so the lagged-self feature exists for period 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTable {
    periods: Vec<Period>,
    entities: Vec<String>,
    counts: BTreeMap<(usize, String), PolarityCounts>,
    targets: BTreeMap<(usize, String), f64>,
    initial_shares: BTreeMap<String, f64>,
    targets_are_deltas: bool,
}

/// Mentions dropped by [`bucket_periods`], by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketStats {
    /// Timestamp before the first poll or on/after the last poll.
    pub out_of_range: usize,
    /// Entity not covered by the poll series.
    pub unknown_entity: usize,
}

impl BucketStats {
    pub fn ignored(&self) -> usize {
        self.out_of_range + self.unknown_entity
    }
}

impl PeriodTable {
    /// Assemble a table from explicit parts. Intended for tests and for the
    /// pre-aggregated counts input path; `bucket_periods` is the usual
    /// constructor. Missing (period, entity) cells are filled with zeros.
    pub fn from_parts(
        polls: &PollSeries,
        mut counts: BTreeMap<(usize, String), PolarityCounts>,
    ) -> Self {
        let periods = periods_of(polls);
        let entities = polls.entities();
        for p in &periods {
            for e in &entities {
                counts.entry((p.index, e.clone())).or_default();
            }
        }
        let mut targets = BTreeMap::new();
        for p in &periods {
            for (e, share) in &polls.snapshots()[p.index + 1].shares {
                targets.insert((p.index, e.clone()), *share);
            }
        }
        Self {
            periods,
            entities,
            counts,
            targets,
            initial_shares: polls.snapshots()[0].shares.clone(),
            targets_are_deltas: false,
        }
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn count(&self, period: usize, entity: &str) -> PolarityCounts {
        self.counts
            .get(&(period, entity.to_owned()))
            .copied()
            .unwrap_or_default()
    }

    /// All counts of one period, keyed by entity.
    pub fn period_counts(&self, period: usize) -> BTreeMap<String, PolarityCounts> {
        self.entities
            .iter()
            .map(|e| (e.clone(), self.count(period, e)))
            .collect()
    }

    pub fn target(&self, period: usize, entity: &str) -> f64 {
        self.targets[&(period, entity.to_owned())]
    }

    pub fn initial_share(&self, entity: &str) -> f64 {
        self.initial_shares[entity]
    }

    pub fn targets_are_deltas(&self) -> bool {
        self.targets_are_deltas
    }
}

fn periods_of(polls: &PollSeries) -> Vec<Period> {
    polls
        .snapshots()
        .windows(2)
        .enumerate()
        .map(|(index, pair)| Period { index, start: pair[0].date, end: pair[1].date })
        .collect()
}

/// Bucket a mention stream into the inter-poll periods of `polls`.
///
/// Every (period, entity-in-polls) cell gets a count (zero allowed). Mentions
/// outside the overall poll date range, or naming entities the polls do not
/// cover, are discarded and tallied in [`BucketStats`]. An empty stream is
/// not an error.
pub fn bucket_periods(mentions: &[MentionRecord], polls: &PollSeries) -> (PeriodTable, BucketStats) {
    let periods = periods_of(polls);
    let entities = polls.entities();
    let entity_set: BTreeSet<&str> = entities.iter().map(String::as_str).collect();

    let mut counts: BTreeMap<(usize, String), PolarityCounts> = BTreeMap::new();
    for p in &periods {
        for e in &entities {
            counts.insert((p.index, e.clone()), PolarityCounts::default());
        }
    }

    let mut stats = BucketStats::default();
    for m in mentions {
        if !entity_set.contains(m.entity.as_str()) {
            stats.unknown_entity += 1;
            continue;
        }
        let date = m.timestamp.date_naive();
        // period k is [poll_k, poll_{k+1}); partition_point finds the first
        // period whose start is after the mention date
        let k = periods.partition_point(|p| p.start <= date);
        if k == 0 {
            stats.out_of_range += 1;
            continue;
        }
        let p = &periods[k - 1];
        if date >= p.end {
            stats.out_of_range += 1;
            continue;
        }
        counts
            .get_mut(&(p.index, m.entity.clone()))
            .expect("cell pre-filled")
            .record(m.polarity);
    }

    let mut targets = BTreeMap::new();
    for p in &periods {
        for (e, share) in &polls.snapshots()[p.index + 1].shares {
            targets.insert((p.index, e.clone()), *share);
        }
    }

    let table = PeriodTable {
        periods,
        entities,
        counts,
        targets,
        initial_shares: polls.snapshots()[0].shares.clone(),
        targets_are_deltas: false,
    };
    (table, stats)
}

/// Replace targets with their first differences per entity and drop the
/// first period. Counts are carried over unchanged; feature differencing is
/// a matrix-assembly concern, not a count concern.
pub fn to_deltas(table: &PeriodTable) -> Result<PeriodTable> {
    if table.n_periods() < 2 {
        return Err(Error::TooFewPeriods(table.n_periods()));
    }
    let mut periods = Vec::with_capacity(table.n_periods() - 1);
    let mut counts = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for p in &table.periods[1..] {
        let new_index = p.index - 1;
        periods.push(Period { index: new_index, start: p.start, end: p.end });
        for e in &table.entities {
            counts.insert((new_index, e.clone()), table.count(p.index, e));
            targets.insert(
                (new_index, e.clone()),
                table.target(p.index, e) - table.target(p.index - 1, e),
            );
        }
    }
    // the absolute target that closed the dropped period seeds any
    // reconstruction of the original series
    let initial_shares = table
        .entities
        .iter()
        .map(|e| (e.clone(), table.target(0, e)))
        .collect();
    Ok(PeriodTable {
        periods,
        entities: table.entities.clone(),
        counts,
        targets,
        initial_shares,
        targets_are_deltas: true,
    })
}
