//! Deterministic synthetic scenarios: mention streams plus poll series with
//! a planted, known sentiment→poll relationship.
//!
//! Each entity carries a latent sentiment state following an AR(1) process.
//! Per period, the state tilts the polarity distribution of that entity's
//! mentions; the next poll moves by `coupling × (change in the planted
//! aggregate, computed on the realized counts)` plus Gaussian noise. With
//! zero noise the planted aggregate's delta is therefore an *exact* affine
//! predictor of the poll delta — the property end-to-end tests lean on.

use std::collections::BTreeMap;

use chrono::{Duration, Months, NaiveDate, Utc};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::aggregators::{aggregate_row, AggregateId, PeriodTotals, Smoothing, Warnings};
use crate::error::{Error, Result};
use crate::mention_store::{MentionRecord, Polarity, PolarityCounts, PollSeries, PollSnapshot};

/// Parameters of a synthetic scenario. `seed` fully determines the output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_entities: usize,
    pub n_periods: usize,
    /// Mean mentions per entity per period; realized counts are uniform in
    /// [mean/2, 3·mean/2].
    pub mentions_mean: usize,
    /// Baseline probability of a positive mention (at neutral sentiment).
    pub positive_rate: f64,
    /// Baseline probability of a negative mention. The remainder is neutral;
    /// defaults mimic the heavy negative skew of political streams.
    pub negative_rate: f64,
    /// AR(1) persistence φ of the latent sentiment state, in [0, 1).
    pub sentiment_persistence: f64,
    /// Innovation scale τ of the latent state (0 freezes sentiment).
    pub sentiment_volatility: f64,
    /// β: poll delta per unit of planted-aggregate delta.
    pub coupling: f64,
    /// σ: standard deviation of the poll noise, percentage points.
    pub noise_std: f64,
    /// Which aggregate drives the polls.
    pub planted: AggregateId,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            n_entities: 5,
            n_periods: 28,
            mentions_mean: 400,
            positive_rate: 0.05,
            negative_rate: 0.45,
            sentiment_persistence: 0.6,
            sentiment_volatility: 0.3,
            coupling: 2.0,
            noise_std: 0.1,
            planted: AggregateId::Bermingham,
            seed: 42,
        }
    }
}

impl ScenarioSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n_entities == 0 || self.n_entities > 26 {
            return bad(format!("n_entities must be in 1..=26, got {}", self.n_entities));
        }
        if self.n_periods == 0 {
            return bad("n_periods must be at least 1".into());
        }
        if self.mentions_mean == 0 {
            return bad("mentions_mean must be at least 1".into());
        }
        if !(self.positive_rate >= 0.0 && self.negative_rate >= 0.0) {
            return bad("polarity rates must be non-negative".into());
        }
        if self.positive_rate + self.negative_rate > 1.0 {
            return bad(format!(
                "positive_rate + negative_rate must not exceed 1, got {}",
                self.positive_rate + self.negative_rate
            ));
        }
        if !(0.0..1.0).contains(&self.sentiment_persistence) {
            return bad(format!(
                "sentiment_persistence must be in [0, 1), got {}",
                self.sentiment_persistence
            ));
        }
        if self.sentiment_volatility < 0.0 || !self.sentiment_volatility.is_finite() {
            return bad("sentiment_volatility must be finite and non-negative".into());
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return bad("noise_std must be finite and non-negative".into());
        }
        if !self.coupling.is_finite() {
            return bad("coupling must be finite".into());
        }
        Ok(())
    }
}

/// What the generator actually planted, for assertions against model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted: AggregateId,
    pub coupling: f64,
    pub noise_std: f64,
    pub entities: Vec<String>,
    pub base_shares: BTreeMap<String, f64>,
    /// Latent sentiment state per entity per period.
    pub latent: BTreeMap<String, Vec<f64>>,
    /// Planted aggregate value per entity per period (realized counts).
    pub planted_values: BTreeMap<String, Vec<f64>>,
}

/// A generated scenario in the same shapes the ingestion layer produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mentions: Vec<MentionRecord>,
    pub polls: PollSeries,
    pub truth: GroundTruth,
}

fn entity_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("party_{}", (b'a' + i as u8) as char)).collect()
}

const BASE_DATE: &str = "2012-01-01";

/// Generate mentions, polls (n_periods + 1 monthly snapshots), and ground
/// truth. Byte-identical output for identical specs.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let entities = entity_names(spec.n_entities);
    let base: NaiveDate = BASE_DATE.parse().expect("static date");
    let poll_dates: Vec<NaiveDate> = (0..=spec.n_periods)
        .map(|k| base.checked_add_months(Months::new(k as u32)).expect("date in range"))
        .collect();

    // evenly spread base shares around 100/n so entities are distinguishable
    // (a lone entity starts at 50 so noise has room in both directions)
    let spread = |i: usize| {
        let center = 100.0 / spec.n_entities as f64;
        let f = if spec.n_entities == 1 {
            0.5
        } else {
            0.7 + 0.6 * i as f64 / (spec.n_entities - 1) as f64
        };
        center * f
    };
    let base_shares: BTreeMap<String, f64> =
        entities.iter().enumerate().map(|(i, e)| (e.clone(), spread(i))).collect();

    // pass 1: latent states and mention stream, period-major, entity-sorted
    let mut latent: BTreeMap<String, Vec<f64>> =
        entities.iter().map(|e| (e.clone(), Vec::new())).collect();
    let mut counts: Vec<BTreeMap<String, PolarityCounts>> = Vec::with_capacity(spec.n_periods);
    let mut mentions = Vec::new();
    let mut state: BTreeMap<String, f64> = entities.iter().map(|e| (e.clone(), 0.0)).collect();
    let lo = spec.mentions_mean - spec.mentions_mean / 2;
    let hi = spec.mentions_mean + spec.mentions_mean / 2;

    for k in 0..spec.n_periods {
        let start = poll_dates[k];
        let end = poll_dates[k + 1];
        let span_seconds = (end - start).num_seconds();
        let mut period_counts = BTreeMap::new();
        for e in &entities {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let s = spec.sentiment_persistence * state[e] + spec.sentiment_volatility * eps;
            state.insert(e.clone(), s);
            latent.get_mut(e).unwrap().push(s);

            // sentiment tilts the polarity mix: positives grow with s,
            // negatives shrink, neutral absorbs the remainder
            let w_pos = spec.positive_rate * s.exp();
            let w_neg = spec.negative_rate * (-s).exp();
            let w_neu = 1.0 - spec.positive_rate - spec.negative_rate;
            let total = w_pos + w_neg + w_neu;
            let (q_pos, q_neg) = (w_pos / total, w_neg / total);

            let m = rng.gen_range(lo..=hi);
            let mut c = PolarityCounts::default();
            for _ in 0..m {
                let u: f64 = rng.gen();
                let polarity = if u < q_pos {
                    Polarity::Positive
                } else if u < q_pos + q_neg {
                    Polarity::Negative
                } else {
                    Polarity::Neutral
                };
                c.record(polarity);
                let offset = rng.gen_range(0..span_seconds);
                let timestamp = start
                    .and_hms_opt(0, 0, 0)
                    .expect("midnight exists")
                    .and_utc()
                    + Duration::seconds(offset);
                mentions.push(MentionRecord {
                    timestamp: timestamp.with_timezone(&Utc),
                    entity: e.clone(),
                    polarity,
                });
            }
            period_counts.insert(e.clone(), c);
        }
        counts.push(period_counts);
    }

    // pass 2: planted aggregate per (entity, period) from realized counts
    let mut planted_values: BTreeMap<String, Vec<f64>> =
        entities.iter().map(|e| (e.clone(), Vec::new())).collect();
    let planted_ix = AggregateId::ALL
        .iter()
        .position(|a| *a == spec.planted)
        .expect("planted id is one of the 25");
    let mut warnings = Warnings::default();
    for period_counts in &counts {
        let totals = PeriodTotals::from_counts(period_counts, Smoothing::None, &mut warnings);
        for e in &entities {
            let row = aggregate_row(&period_counts[e], &totals, &mut warnings);
            planted_values.get_mut(e).unwrap().push(row[planted_ix]);
        }
    }

    // pass 3: polls. The first step after the base poll carries noise only
    // (no previous aggregate delta exists); later steps add the coupling.
    let mut snapshots = Vec::with_capacity(spec.n_periods + 1);
    snapshots.push(PollSnapshot::new(poll_dates[0], base_shares.clone())?);
    let mut current = base_shares.clone();
    for j in 1..=spec.n_periods {
        for e in &entities {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let drift = if j >= 2 {
                let vals = &planted_values[e];
                spec.coupling * (vals[j - 1] - vals[j - 2])
            } else {
                0.0
            };
            let share = current[e] + drift + spec.noise_std * eps;
            if !(0.5..=99.5).contains(&share) {
                return Err(Error::InvalidScenario(format!(
                    "share of {e} left [0.5, 99.5] at poll {j} ({share:.2}); \
                     reduce coupling, noise, or period count"
                )));
            }
            current.insert(e.clone(), share);
        }
        snapshots.push(PollSnapshot::new(poll_dates[j], current.clone())?);
    }

    Ok(Scenario {
        mentions,
        polls: PollSeries::new(snapshots)?,
        truth: GroundTruth {
            planted: spec.planted,
            coupling: spec.coupling,
            noise_std: spec.noise_std,
            entities,
            base_shares,
            latent,
            planted_values,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::baseline_lagged;
    use crate::mention_store::bucket_periods;

    #[test]
    fn same_seed_reproduces_everything() {
        let spec = ScenarioSpec { n_periods: 6, mentions_mean: 60, ..Default::default() };
        let a = generate_scenario(&spec).unwrap();
        let b = generate_scenario(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let spec = ScenarioSpec { n_periods: 4, mentions_mean: 40, ..Default::default() };
        let a = generate_scenario(&spec).unwrap();
        let b = generate_scenario(&ScenarioSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.mentions, b.mentions);
    }

    #[test]
    fn decoupled_noiseless_polls_are_constant() {
        let spec = ScenarioSpec {
            n_periods: 8,
            mentions_mean: 50,
            coupling: 0.0,
            noise_std: 0.0,
            ..Default::default()
        };
        let scenario = generate_scenario(&spec).unwrap();
        let first = &scenario.polls.snapshots()[0].shares;
        for s in scenario.polls.snapshots() {
            assert_eq!(&s.shares, first);
        }
        let baseline = baseline_lagged(&scenario.polls, crate::aggregators::TargetMode::Absolute)
            .unwrap();
        assert_eq!(baseline.global_mae, 0.0);
    }

    #[test]
    fn noiseless_coupling_makes_planted_delta_exact() {
        let spec = ScenarioSpec { n_periods: 10, noise_std: 0.0, ..Default::default() };
        let scenario = generate_scenario(&spec).unwrap();
        let snaps = scenario.polls.snapshots();
        for e in &scenario.truth.entities {
            let vals = &scenario.truth.planted_values[e];
            for j in 2..snaps.len() {
                let poll_delta = snaps[j].shares[e] - snaps[j - 1].shares[e];
                let agg_delta = vals[j - 1] - vals[j - 2];
                assert!(
                    (poll_delta - spec.coupling * agg_delta).abs() < 1e-12,
                    "entity {e}, poll {j}"
                );
            }
        }
    }

    #[test]
    fn rebucketing_the_stream_reproduces_planted_values() {
        let spec = ScenarioSpec { n_periods: 5, mentions_mean: 80, ..Default::default() };
        let scenario = generate_scenario(&spec).unwrap();
        let (table, stats) = bucket_periods(&scenario.mentions, &scenario.polls);
        assert_eq!(stats.ignored(), 0);
        let mut warnings = Warnings::default();
        let planted_ix =
            AggregateId::ALL.iter().position(|a| *a == spec.planted).unwrap();
        for k in 0..table.n_periods() {
            let counts = table.period_counts(k);
            let totals = PeriodTotals::from_counts(&counts, Smoothing::None, &mut warnings);
            for e in table.entities() {
                let row = aggregate_row(&counts[e], &totals, &mut warnings);
                let expected = scenario.truth.planted_values[e][k];
                assert_eq!(row[planted_ix], expected, "period {k}, entity {e}");
            }
        }
    }

    #[test]
    fn heavy_negative_skew_matches_multinomial_expectation() {
        // PSD-like rates: positives are rare, negatives dominate
        let (p_pos, p_neg) = (121.0 / 106977.0, 69723.0 / 106977.0);
        let spec = ScenarioSpec {
            n_entities: 1,
            n_periods: 12,
            mentions_mean: 9000,
            positive_rate: p_pos,
            negative_rate: p_neg,
            sentiment_volatility: 0.0, // freeze sentiment so rates are exact
            coupling: 0.0,
            noise_std: 0.0,
            ..Default::default()
        };
        let scenario = generate_scenario(&spec).unwrap();
        let m = scenario.mentions.len() as f64;
        let pos = scenario
            .mentions
            .iter()
            .filter(|r| r.polarity == Polarity::Positive)
            .count() as f64;
        let neg = scenario
            .mentions
            .iter()
            .filter(|r| r.polarity == Polarity::Negative)
            .count() as f64;
        for (observed, rate) in [(pos, p_pos), (neg, p_neg)] {
            let sigma = (m * rate * (1.0 - rate)).sqrt();
            assert!(
                (observed - m * rate).abs() <= 3.0 * sigma,
                "observed {observed}, expected {} ± {}",
                m * rate,
                3.0 * sigma
            );
        }
    }

    #[test]
    fn runaway_coupling_is_rejected_with_context() {
        let spec = ScenarioSpec { coupling: 500.0, ..Default::default() };
        match generate_scenario(&spec) {
            Err(Error::InvalidScenario(msg)) => assert!(msg.contains("coupling")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = ScenarioSpec::default();
        for spec in [
            ScenarioSpec { n_entities: 0, ..base },
            ScenarioSpec { n_entities: 27, ..base },
            ScenarioSpec { n_periods: 0, ..base },
            ScenarioSpec { mentions_mean: 0, ..base },
            ScenarioSpec { positive_rate: 0.7, negative_rate: 0.7, ..base },
            ScenarioSpec { sentiment_persistence: 1.0, ..base },
            ScenarioSpec { sentiment_volatility: -0.1, ..base },
            ScenarioSpec { noise_std: f64::NAN, ..base },
        ] {
            assert!(generate_scenario(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn poll_snapshots_cover_n_periods_plus_one_months() {
        let spec = ScenarioSpec { n_periods: 3, mentions_mean: 10, ..Default::default() };
        let scenario = generate_scenario(&spec).unwrap();
        let dates: Vec<String> =
            scenario.polls.snapshots().iter().map(|s| s.date.to_string()).collect();
        assert_eq!(dates, vec!["2012-01-01", "2012-02-01", "2012-03-01", "2012-04-01"]);
    }
}
