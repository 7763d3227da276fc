//! Shared fixtures for the integration tests: the five-party count table
//! used throughout the docs and a small poll-series builder.

// each test target uses a different subset of these helpers
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use sentipoll::mention_store::{PolarityCounts, PollSeries, PollSnapshot};

/// Five parties' (positives, negatives, neutrals) for one period; buzz is
/// the row sum. Grand total: 232 979 mentions.
pub const PARTY_COUNTS: [(&str, u64, u64, u64); 5] = [
    ("PSD", 121, 69_723, 37_133),
    ("PS", 225, 28_660, 15_326),
    ("CDS", 51, 41_935, 17_554),
    ("CDU", 79, 2_445, 5_604),
    ("BE", 306, 9_603, 4_214),
];

pub fn party_counts() -> BTreeMap<String, PolarityCounts> {
    PARTY_COUNTS
        .iter()
        .map(|(name, pos, neg, neu)| (name.to_string(), PolarityCounts::new(*pos, *neg, *neu)))
        .collect()
}

pub fn date(s: &str) -> NaiveDate {
    s.parse().expect("valid test date")
}

/// Build a poll series from `(date, [(entity, share)])` snapshots.
pub fn poll_series(snapshots: &[(&str, &[(&str, f64)])]) -> PollSeries {
    let snaps = snapshots
        .iter()
        .map(|(d, shares)| {
            let map = shares.iter().map(|(e, v)| (e.to_string(), *v)).collect();
            PollSnapshot::new(date(d), map).expect("valid test snapshot")
        })
        .collect();
    PollSeries::new(snaps).expect("valid test poll series")
}

/// Equal shares for the five parties on the given dates, so tests can bucket
/// the one-period count table without caring about targets.
pub fn party_polls(dates: &[&str]) -> PollSeries {
    let shares: Vec<(&str, f64)> =
        PARTY_COUNTS.iter().map(|(name, ..)| (*name, 20.0)).collect();
    let snaps: Vec<(&str, &[(&str, f64)])> =
        dates.iter().map(|d| (*d, shares.as_slice())).collect();
    poll_series(&snaps)
}
