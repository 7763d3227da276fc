//! Compute the 25 per-period aggregate features for a hand-built count
//! table — the five-party reference numbers used across the test suite.
//!
//! Run with: cargo run --example aggregate_features

use std::collections::BTreeMap;

use sentipoll::aggregators::{aggregate_row, AggregateId, PeriodTotals, Smoothing, Warnings};
use sentipoll::mention_store::PolarityCounts;

fn main() {
    let counts: BTreeMap<String, PolarityCounts> = [
        ("PSD", PolarityCounts::new(121, 69_723, 37_133)),
        ("PS", PolarityCounts::new(225, 28_660, 15_326)),
        ("CDS", PolarityCounts::new(51, 41_935, 17_554)),
        ("CDU", PolarityCounts::new(79, 2_445, 5_604)),
        ("BE", PolarityCounts::new(306, 9_603, 4_214)),
    ]
    .into_iter()
    .map(|(e, c)| (e.to_string(), c))
    .collect();

    let mut warnings = Warnings::default();
    let totals = PeriodTotals::from_counts(&counts, Smoothing::None, &mut warnings);
    println!(
        "period totals: {} positive, {} negative, {} neutral, {} mentions\n",
        totals.total_positives, totals.total_negatives, totals.total_neutrals, totals.total_buzz
    );

    // a few headline features per entity
    let shown = [
        AggregateId::EntityBuzz,
        AggregateId::Share,
        AggregateId::Bermingham,
        AggregateId::Connor,
        AggregateId::Gayo,
        AggregateId::NormalizedNegative,
    ];
    let col = |id: AggregateId| AggregateId::ALL.iter().position(|a| *a == id).unwrap();

    print!("{:>6}", "entity");
    for id in shown {
        print!("  {:>22}", id.name());
    }
    println!();
    for (entity, c) in &counts {
        let row = aggregate_row(c, &totals, &mut warnings);
        print!("{entity:>6}");
        for id in shown {
            print!("  {:>22.12}", row[col(id)]);
        }
        println!();
    }

    println!("\nall 25 features for PSD, in canonical column order:");
    let psd = aggregate_row(&counts["PSD"], &totals, &mut warnings);
    for (id, value) in AggregateId::ALL.iter().zip(psd.iter()) {
        println!("  {:>24} = {value:.12}", id.name());
    }
    println!("\nguarded divisions (x/0 evaluated as 0): {}", warnings.guarded_divisions);
}
