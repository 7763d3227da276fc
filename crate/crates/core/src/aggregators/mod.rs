//! The 25 sentiment aggregate functions and their period-level inputs.
//!
//! Aggregates come in three families:
//! - counts: raw per-entity tallies (buzz, positives, neutrals, negatives);
//! - ratios: functions of one entity's counts only (log ratios, rates);
//! - shares: functions that normalize one entity against all entities in the
//!   same period (share of voice, share of distribution).
//!
//! Every division is guarded: `x / 0` evaluates to 0 and increments a
//! data-quality counter instead of producing NaN/inf, so feature matrices
//! stay dense and finite.

mod matrix;

pub use matrix::{feature_matrix, ColumnId, FeatureMatrix, FeatureOptions, RowKey, TargetMode};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::mention_store::PolarityCounts;

/// Identifier of one aggregate function. The serialized names are the
/// column names used in every exported file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AggregateId {
    #[serde(rename = "entity_buzz")]
    EntityBuzz,
    #[serde(rename = "entity_positives")]
    EntityPositives,
    #[serde(rename = "entity_neutrals")]
    EntityNeutrals,
    #[serde(rename = "entity_negatives")]
    EntityNegatives,
    #[serde(rename = "bermingham")]
    Bermingham,
    #[serde(rename = "berminghamsovn")]
    BerminghamSovN,
    #[serde(rename = "berminghamsovp")]
    BerminghamSovP,
    #[serde(rename = "connor")]
    Connor,
    #[serde(rename = "gayo")]
    Gayo,
    #[serde(rename = "polarity")]
    Polarity,
    #[serde(rename = "polarityONeutral")]
    PolarityONeutral,
    #[serde(rename = "polarityOTotal")]
    PolarityOTotal,
    #[serde(rename = "subjOTotal")]
    SubjOTotal,
    #[serde(rename = "subjNeuv")]
    SubjNeuv,
    #[serde(rename = "subjSoV")]
    SubjSoV,
    #[serde(rename = "subjVol")]
    SubjVol,
    #[serde(rename = "share")]
    Share,
    #[serde(rename = "shareOfNegDistribution")]
    ShareOfNegDistribution,
    #[serde(rename = "normalized_positive")]
    NormalizedPositive,
    #[serde(rename = "normalized_negative")]
    NormalizedNegative,
    #[serde(rename = "normalized_neutral")]
    NormalizedNeutral,
    #[serde(rename = "normalized_bermingham")]
    NormalizedBermingham,
    #[serde(rename = "normalized_connor")]
    NormalizedConnor,
    #[serde(rename = "normalized_gayo")]
    NormalizedGayo,
    #[serde(rename = "normalized_polarity")]
    NormalizedPolarity,
}

impl AggregateId {
    /// Every aggregate, in canonical column order.
    pub const ALL: [AggregateId; 25] = [
        AggregateId::EntityBuzz,
        AggregateId::EntityPositives,
        AggregateId::EntityNeutrals,
        AggregateId::EntityNegatives,
        AggregateId::Bermingham,
        AggregateId::BerminghamSovN,
        AggregateId::BerminghamSovP,
        AggregateId::Connor,
        AggregateId::Gayo,
        AggregateId::Polarity,
        AggregateId::PolarityONeutral,
        AggregateId::PolarityOTotal,
        AggregateId::SubjOTotal,
        AggregateId::SubjNeuv,
        AggregateId::SubjSoV,
        AggregateId::SubjVol,
        AggregateId::Share,
        AggregateId::ShareOfNegDistribution,
        AggregateId::NormalizedPositive,
        AggregateId::NormalizedNegative,
        AggregateId::NormalizedNeutral,
        AggregateId::NormalizedBermingham,
        AggregateId::NormalizedConnor,
        AggregateId::NormalizedGayo,
        AggregateId::NormalizedPolarity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AggregateId::EntityBuzz => "entity_buzz",
            AggregateId::EntityPositives => "entity_positives",
            AggregateId::EntityNeutrals => "entity_neutrals",
            AggregateId::EntityNegatives => "entity_negatives",
            AggregateId::Bermingham => "bermingham",
            AggregateId::BerminghamSovN => "berminghamsovn",
            AggregateId::BerminghamSovP => "berminghamsovp",
            AggregateId::Connor => "connor",
            AggregateId::Gayo => "gayo",
            AggregateId::Polarity => "polarity",
            AggregateId::PolarityONeutral => "polarityONeutral",
            AggregateId::PolarityOTotal => "polarityOTotal",
            AggregateId::SubjOTotal => "subjOTotal",
            AggregateId::SubjNeuv => "subjNeuv",
            AggregateId::SubjSoV => "subjSoV",
            AggregateId::SubjVol => "subjVol",
            AggregateId::Share => "share",
            AggregateId::ShareOfNegDistribution => "shareOfNegDistribution",
            AggregateId::NormalizedPositive => "normalized_positive",
            AggregateId::NormalizedNegative => "normalized_negative",
            AggregateId::NormalizedNeutral => "normalized_neutral",
            AggregateId::NormalizedBermingham => "normalized_bermingham",
            AggregateId::NormalizedConnor => "normalized_connor",
            AggregateId::NormalizedGayo => "normalized_gayo",
            AggregateId::NormalizedPolarity => "normalized_polarity",
        }
    }

    pub fn from_name(name: &str) -> Option<AggregateId> {
        AggregateId::ALL.iter().copied().find(|id| id.name() == name)
    }

    /// Buzz aggregates measure volume only; everything else reads polarity.
    pub fn is_buzz(&self) -> bool {
        matches!(self, AggregateId::EntityBuzz | AggregateId::Share)
    }

    /// True for the four raw count aggregates.
    pub fn is_count(&self) -> bool {
        matches!(
            self,
            AggregateId::EntityBuzz
                | AggregateId::EntityPositives
                | AggregateId::EntityNeutrals
                | AggregateId::EntityNegatives
        )
    }

    /// True for aggregates that need period totals over all entities.
    pub fn needs_totals(&self) -> bool {
        matches!(
            self,
            AggregateId::Share
                | AggregateId::BerminghamSovN
                | AggregateId::BerminghamSovP
                | AggregateId::SubjSoV
                | AggregateId::Gayo
                | AggregateId::ShareOfNegDistribution
                | AggregateId::NormalizedGayo
        )
    }
}

impl std::fmt::Display for AggregateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which aggregate columns enter a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    /// All 25 aggregates.
    #[default]
    All,
    /// Volume only: entity_buzz and share.
    Buzz,
    /// The 23 polarity-reading aggregates.
    Sentiment,
}

impl FeatureSet {
    pub fn members(&self) -> Vec<AggregateId> {
        match self {
            FeatureSet::All => AggregateId::ALL.to_vec(),
            FeatureSet::Buzz => AggregateId::ALL.iter().copied().filter(|a| a.is_buzz()).collect(),
            FeatureSet::Sentiment => {
                AggregateId::ALL.iter().copied().filter(|a| !a.is_buzz()).collect()
            }
        }
    }
}

/// Count smoothing applied before aggregation. `Laplace` adds one to each of
/// the four counts (positives, negatives, neutrals, buzz), keeping log
/// ratios and rates finite on sparse streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    #[default]
    None,
    Laplace,
}

/// Data-quality tallies produced while aggregating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warnings {
    /// Number of divisions whose denominator was zero (result forced to 0).
    pub guarded_divisions: usize,
}

impl Warnings {
    fn guarded(&mut self) {
        self.guarded_divisions += 1;
    }
}

/// Real-valued view of one entity's counts, after optional smoothing.
#[derive(Debug, Clone, Copy)]
struct CountView {
    pos: f64,
    neg: f64,
    neu: f64,
    buzz: f64,
}

impl CountView {
    fn of(c: &PolarityCounts, smoothing: Smoothing) -> Self {
        let shift = match smoothing {
            Smoothing::None => 0.0,
            Smoothing::Laplace => 1.0,
        };
        Self {
            pos: c.positives() as f64 + shift,
            neg: c.negatives() as f64 + shift,
            neu: c.neutrals() as f64 + shift,
            buzz: c.buzz() as f64 + shift,
        }
    }
}

/// Period-wide totals across all entities, the denominators of the share
/// family. The normalized sums back the rate-based share aggregates
/// (shareOfNegDistribution, normalized_gayo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodTotals {
    pub total_positives: f64,
    pub total_negatives: f64,
    pub total_neutrals: f64,
    pub total_buzz: f64,
    /// Σ over entities of pos_i / buzz_i.
    pub sum_norm_positive: f64,
    /// Σ over entities of neg_i / buzz_i.
    pub sum_norm_negative: f64,
    smoothing: Smoothing,
}

impl PeriodTotals {
    /// Sum one period's per-entity counts. Iteration follows the map's key
    /// order, so totals are bit-reproducible for a given entity set.
    pub fn from_counts(
        counts: &BTreeMap<String, PolarityCounts>,
        smoothing: Smoothing,
        warnings: &mut Warnings,
    ) -> Self {
        let mut t = PeriodTotals {
            total_positives: 0.0,
            total_negatives: 0.0,
            total_neutrals: 0.0,
            total_buzz: 0.0,
            sum_norm_positive: 0.0,
            sum_norm_negative: 0.0,
            smoothing,
        };
        for c in counts.values() {
            let v = CountView::of(c, smoothing);
            t.total_positives += v.pos;
            t.total_negatives += v.neg;
            t.total_neutrals += v.neu;
            t.total_buzz += v.buzz;
            t.sum_norm_positive += guarded(v.pos, v.buzz, warnings);
            t.sum_norm_negative += guarded(v.neg, v.buzz, warnings);
        }
        t
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }
}

fn guarded(num: f64, den: f64, warnings: &mut Warnings) -> f64 {
    if den == 0.0 {
        warnings.guarded();
        0.0
    } else {
        num / den
    }
}

/// Value of an aggregate that reads one entity's counts only; `None` for the
/// share family.
fn entity_value(id: AggregateId, v: CountView, w: &mut Warnings) -> Option<f64> {
    use AggregateId::*;
    let norm_pos = guarded(v.pos, v.buzz, w);
    let value = match id {
        EntityBuzz => v.buzz,
        EntityPositives => v.pos,
        EntityNeutrals => v.neu,
        EntityNegatives => v.neg,
        Bermingham => ((v.pos + 1.0) / (v.neg + 1.0)).log10(),
        Connor => guarded(v.pos, v.neg, w),
        Polarity => v.pos - v.neg,
        PolarityONeutral => guarded(v.pos - v.neg, v.neu, w),
        PolarityOTotal => guarded(v.pos - v.neg, v.buzz, w),
        SubjVol => v.pos + v.neg,
        SubjOTotal => guarded(v.pos + v.neg, v.buzz, w),
        SubjNeuv => guarded(v.pos + v.neg, v.neu, w),
        NormalizedPositive => norm_pos,
        NormalizedNegative => guarded(v.neg, v.buzz, w),
        NormalizedNeutral => guarded(v.neu, v.buzz, w),
        NormalizedBermingham => {
            let norm_neg = guarded(v.neg, v.buzz, w);
            ((norm_pos + 1.0) / (norm_neg + 1.0)).log10()
        }
        NormalizedConnor => {
            let norm_neg = guarded(v.neg, v.buzz, w);
            guarded(norm_pos, norm_neg, w)
        }
        NormalizedPolarity => {
            let norm_neg = guarded(v.neg, v.buzz, w);
            norm_pos - norm_neg
        }
        _ => return None,
    };
    Some(value)
}

/// Value of a share-family aggregate; `None` for entity-level ids.
fn share_value(id: AggregateId, v: CountView, t: &PeriodTotals, w: &mut Warnings) -> Option<f64> {
    use AggregateId::*;
    let value = match id {
        Share => guarded(v.buzz, t.total_buzz, w),
        BerminghamSovN => guarded(v.neg, t.total_negatives, w),
        BerminghamSovP => guarded(v.pos, t.total_positives, w),
        SubjSoV => guarded(v.pos + v.neg, t.total_positives + t.total_negatives, w),
        Gayo => guarded(
            v.pos + (t.total_negatives - v.neg),
            t.total_positives + t.total_negatives,
            w,
        ),
        ShareOfNegDistribution => {
            let rate = guarded(v.neg, v.buzz, w);
            guarded(rate, t.sum_norm_negative, w)
        }
        NormalizedGayo => {
            let norm_pos = guarded(v.pos, v.buzz, w);
            let norm_neg = guarded(v.neg, v.buzz, w);
            guarded(
                norm_pos + (t.sum_norm_negative - norm_neg),
                t.sum_norm_positive + t.sum_norm_negative,
                w,
            )
        }
        _ => return None,
    };
    Some(value)
}

/// The four raw count aggregates of one entity.
pub fn count_features(c: &PolarityCounts) -> Vec<(AggregateId, f64)> {
    use AggregateId::*;
    let v = CountView::of(c, Smoothing::None);
    [EntityBuzz, EntityPositives, EntityNeutrals, EntityNegatives]
        .into_iter()
        .map(|id| (id, entity_value(id, v, &mut Warnings::default()).unwrap()))
        .collect()
}

/// The 14 entity-local ratio aggregates of one entity (unsmoothed).
pub fn ratio_features(c: &PolarityCounts, warnings: &mut Warnings) -> Vec<(AggregateId, f64)> {
    let v = CountView::of(c, Smoothing::None);
    AggregateId::ALL
        .iter()
        .copied()
        .filter(|id| !id.needs_totals() && !id.is_count())
        .map(|id| (id, entity_value(id, v, warnings).unwrap()))
        .collect()
}

/// The 7 share-family aggregates of one entity against its period totals.
pub fn share_features(
    c: &PolarityCounts,
    t: &PeriodTotals,
    warnings: &mut Warnings,
) -> Vec<(AggregateId, f64)> {
    let v = CountView::of(c, t.smoothing);
    AggregateId::ALL
        .iter()
        .copied()
        .filter(AggregateId::needs_totals)
        .map(|id| (id, share_value(id, v, t, warnings).unwrap()))
        .collect()
}

/// All 25 aggregates of one entity, in canonical order. Smoothing follows
/// the totals: both sides of every share ratio see the same treatment.
pub fn aggregate_row(c: &PolarityCounts, t: &PeriodTotals, warnings: &mut Warnings) -> [f64; 25] {
    let v = CountView::of(c, t.smoothing);
    let mut row = [0.0; 25];
    for (slot, id) in row.iter_mut().zip(AggregateId::ALL) {
        *slot = entity_value(id, v, warnings)
            .or_else(|| share_value(id, v, t, warnings))
            .expect("every aggregate is entity-level or share-level");
    }
    row
}
