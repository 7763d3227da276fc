//! File parsing for mention streams, poll series, and pre-aggregated counts.
//!
//! Mention rows are validated individually: a malformed row becomes a
//! [`RowError`] carrying its line number instead of aborting the whole read.
//! The caller picks a tolerated error rate; the strict default of zero turns
//! any bad row into a hard failure.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::Deserialize;

use super::{
    bucket_periods, BucketStats, MentionRecord, PeriodTable, Polarity, PollSeries, PollSnapshot,
    PolarityCounts,
};
use crate::error::{Error, Result, RowError};

/// On-disk encodings of a mention stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MentionFormat {
    /// Header `timestamp,entity,polarity`.
    Csv,
    /// One JSON object per line with keys `timestamp`, `entity`, `polarity`.
    JsonLines,
}

impl MentionFormat {
    /// Pick a format from the file extension; `.jsonl`/`.ndjson`/`.json` mean
    /// JSON lines, everything else CSV.
    pub fn from_path(path: &Path) -> MentionFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") | Some("json") => MentionFormat::JsonLines,
            _ => MentionFormat::Csv,
        }
    }
}

/// Parsing knobs. `max_error_rate` is the tolerated fraction of malformed
/// rows in (0, 1]; the default 0.0 fails on the first bad row.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub max_error_rate: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { max_error_rate: 0.0 }
    }
}

/// Successfully parsed records plus the rows that were skipped (within the
/// tolerated error rate).
#[derive(Debug)]
pub struct ParsedMentions {
    pub records: Vec<MentionRecord>,
    pub skipped: Vec<RowError>,
}

fn parse_timestamp(raw: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(raw.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {raw:?}: {e}"))
}

fn validated_record(
    timestamp: &str,
    entity: &str,
    polarity: &str,
) -> std::result::Result<MentionRecord, String> {
    let timestamp = parse_timestamp(timestamp)?;
    let entity = entity.trim();
    if entity.is_empty() {
        return Err("empty entity".into());
    }
    let polarity =
        Polarity::parse(polarity).ok_or_else(|| format!("unknown polarity {polarity:?}"))?;
    Ok(MentionRecord { timestamp, entity: entity.to_owned(), polarity })
}

/// Parse a mention stream, keeping records in input order.
///
/// Returns all well-formed records and the per-line reasons for skipped
/// rows. If bad rows exceed `opts.max_error_rate` of the total, the whole
/// read fails with [`Error::MalformedRows`].
pub fn parse_mentions(
    reader: impl Read,
    format: MentionFormat,
    opts: &ParseOptions,
) -> Result<ParsedMentions> {
    let (records, skipped, total) = match format {
        MentionFormat::Csv => parse_mentions_csv(reader)?,
        MentionFormat::JsonLines => parse_mentions_jsonl(reader)?,
    };
    let tolerated = opts.max_error_rate * total as f64;
    if !skipped.is_empty() && skipped.len() as f64 > tolerated {
        return Err(Error::MalformedRows { errors: skipped, total });
    }
    Ok(ParsedMentions { records, skipped })
}

fn parse_mentions_csv(reader: impl Read) -> Result<(Vec<MentionRecord>, Vec<RowError>, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(Error::from)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (ts_col, entity_col, pol_col) = match (col("timestamp"), col("entity"), col("polarity")) {
        (Some(t), Some(e), Some(p)) => (t, e, p),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "mentions CSV must have columns timestamp,entity,polarity; got {:?}",
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut total = 0usize;
    for result in rdr.records() {
        total += 1;
        match result {
            Ok(record) => {
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                let fields = (
                    record.get(ts_col),
                    record.get(entity_col),
                    record.get(pol_col),
                );
                match fields {
                    (Some(ts), Some(entity), Some(pol)) => {
                        match validated_record(ts, entity, pol) {
                            Ok(m) => records.push(m),
                            Err(message) => skipped.push(RowError { line, message }),
                        }
                    }
                    _ => skipped.push(RowError { line, message: "missing field".into() }),
                }
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                skipped.push(RowError { line, message: e.to_string() });
            }
        }
    }
    Ok((records, skipped, total))
}

#[derive(Deserialize)]
struct RawJsonMention<'a> {
    timestamp: &'a str,
    entity: &'a str,
    polarity: &'a str,
}

fn parse_mentions_jsonl(reader: impl Read) -> Result<(Vec<MentionRecord>, Vec<RowError>, usize)> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut total = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = (i + 1) as u64;
        let text = line.map_err(Error::Io)?;
        if text.trim().is_empty() {
            continue;
        }
        total += 1;
        let parsed = serde_json::from_str::<RawJsonMention>(&text)
            .map_err(|e| e.to_string())
            .and_then(|raw| validated_record(raw.timestamp, raw.entity, raw.polarity));
        match parsed {
            Ok(m) => records.push(m),
            Err(message) => skipped.push(RowError { line: line_no, message }),
        }
    }
    Ok((records, skipped, total))
}

/// Parse a poll series from long-format CSV with header
/// `date,entity,share_pct`, one row per (poll, entity).
pub fn parse_polls_csv(reader: impl Read) -> Result<PollSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(Error::from)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (date_col, entity_col, share_col) = match (col("date"), col("entity"), col("share_pct")) {
        (Some(d), Some(e), Some(s)) => (d, e, s),
        _ => {
            return Err(Error::InvalidPolls(format!(
                "polls CSV must have columns date,entity,share_pct; got {:?}",
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };

    let mut by_date: BTreeMap<NaiveDate, BTreeMap<String, f64>> = BTreeMap::new();
    for result in rdr.records() {
        let record = result.map_err(Error::from)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| Error::InvalidPolls(format!("line {line}: {msg}"));
        let date_raw = record.get(date_col).unwrap_or("");
        let date = date_raw
            .parse::<NaiveDate>()
            .map_err(|e| bad(format!("bad date {date_raw:?}: {e}")))?;
        let entity = record.get(entity_col).unwrap_or("").trim().to_owned();
        if entity.is_empty() {
            return Err(bad("empty entity".into()));
        }
        let share_raw = record.get(share_col).unwrap_or("");
        let share = share_raw
            .parse::<f64>()
            .map_err(|e| bad(format!("bad share {share_raw:?}: {e}")))?;
        if by_date.entry(date).or_default().insert(entity.clone(), share).is_some() {
            return Err(bad(format!("duplicate entry for {entity} on {date}")));
        }
    }

    let snapshots = by_date
        .into_iter()
        .map(|(date, shares)| PollSnapshot::new(date, shares))
        .collect::<Result<Vec<_>>>()?;
    PollSeries::new(snapshots)
}

/// Build a [`PeriodTable`] from pre-aggregated per-period counts instead of
/// raw mentions. CSV header: `period_start,entity,positives,negatives,neutrals`.
///
/// Each `period_start` must equal the opening poll date of a period in
/// `polls`. Rows for entities outside the poll set are skipped and tallied;
/// duplicate (period, entity) rows accumulate.
pub fn parse_counts_csv(reader: impl Read, polls: &PollSeries) -> Result<(PeriodTable, BucketStats)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(Error::from)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let cols = (
        col("period_start"),
        col("entity"),
        col("positives"),
        col("negatives"),
        col("neutrals"),
    );
    let (start_col, entity_col, pos_col, neg_col, neu_col) = match cols {
        (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "counts CSV must have columns period_start,entity,positives,negatives,neutrals; got {:?}",
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };

    let empty = bucket_periods(&[], polls).0;
    let period_by_start: BTreeMap<NaiveDate, usize> =
        empty.periods().iter().map(|p| (p.start, p.index)).collect();
    let entities = polls.entities();

    let mut counts: BTreeMap<(usize, String), PolarityCounts> = BTreeMap::new();
    let mut stats = BucketStats::default();
    for result in rdr.records() {
        let record = result.map_err(Error::from)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| Error::InvalidConfig(format!("counts line {line}: {msg}"));
        let start_raw = record.get(start_col).unwrap_or("");
        let start = start_raw
            .parse::<NaiveDate>()
            .map_err(|e| bad(format!("bad period_start {start_raw:?}: {e}")))?;
        let Some(&period) = period_by_start.get(&start) else {
            return Err(bad(format!("{start} does not open any period of the poll series")));
        };
        let entity = record.get(entity_col).unwrap_or("").trim().to_owned();
        if !entities.contains(&entity) {
            stats.unknown_entity += 1;
            continue;
        }
        let field = |idx: usize, name: &str| -> Result<u64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<u64>().map_err(|e| bad(format!("bad {name} {raw:?}: {e}")))
        };
        let row = PolarityCounts::new(
            field(pos_col, "positives")?,
            field(neg_col, "negatives")?,
            field(neu_col, "neutrals")?,
        );
        let cell = counts.entry((period, entity)).or_default();
        *cell = PolarityCounts::new(
            cell.positives() + row.positives(),
            cell.negatives() + row.negatives(),
            cell.neutrals() + row.neutrals(),
        );
    }
    Ok((PeriodTable::from_parts(polls, counts), stats))
}

/// Write mentions as CSV with header `timestamp,entity,polarity`; timestamps
/// in RFC 3339 UTC. Round-trips through [`parse_mentions`].
pub fn write_mentions_csv(records: &[MentionRecord], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "entity", "polarity"]).map_err(Error::from)?;
    for m in records {
        w.write_record([
            m.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            m.entity.clone(),
            m.polarity.as_str().to_owned(),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

/// Write a poll series as long-format CSV with header `date,entity,share_pct`.
/// Round-trips through [`parse_polls_csv`].
pub fn write_polls_csv(polls: &PollSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "entity", "share_pct"]).map_err(Error::from)?;
    for snapshot in polls.snapshots() {
        for (entity, share) in &snapshot.shares {
            w.write_record([snapshot.date.to_string(), entity.clone(), share.to_string()])
                .map_err(Error::from)?;
        }
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD_CSV: &str = "timestamp,entity,polarity\n\
        2012-01-03T09:15:00Z,PSD,negative\n\
        2012-01-04T18:00:00+01:00,PS,Positive\n\
        2012-01-05T00:00:00Z,CDS,neutral\n";

    #[test]
    fn csv_rows_parse_in_input_order() {
        let parsed =
            parse_mentions(GOOD_CSV.as_bytes(), MentionFormat::Csv, &ParseOptions::default())
                .unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert!(parsed.skipped.is_empty());
        assert_eq!(parsed.records[0].entity, "PSD");
        assert_eq!(parsed.records[1].polarity, Polarity::Positive);
        // +01:00 offset folds into UTC
        assert_eq!(parsed.records[1].timestamp.to_rfc3339(), "2012-01-04T17:00:00+00:00");
    }

    #[test]
    fn bad_polarity_fails_strict_parse_with_line_number() {
        let text = "timestamp,entity,polarity\n\
            2012-01-03T09:15:00Z,PSD,negative\n\
            2012-01-04T09:15:00Z,PSD,meh\n";
        let err = parse_mentions(text.as_bytes(), MentionFormat::Csv, &ParseOptions::default())
            .unwrap_err();
        match err {
            Error::MalformedRows { errors, total } => {
                assert_eq!(total, 2);
                assert_eq!(errors.len(), 1);
                assert_eq!(errors[0].line, 3);
                assert!(errors[0].message.contains("polarity"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn error_rate_tolerance_skips_bad_rows() {
        let text = "timestamp,entity,polarity\n\
            2012-01-03T09:15:00Z,PSD,negative\n\
            not-a-time,PSD,negative\n\
            2012-01-05T09:15:00Z,PS,neutral\n\
            2012-01-06T09:15:00Z,,positive\n";
        let opts = ParseOptions { max_error_rate: 0.5 };
        let parsed = parse_mentions(text.as_bytes(), MentionFormat::Csv, &opts).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.skipped.len(), 2);
        assert_eq!(parsed.skipped[0].line, 3);
        assert_eq!(parsed.skipped[1].line, 5);
    }

    #[test]
    fn jsonl_parses_and_reports_lines() {
        let text = "{\"timestamp\":\"2012-01-03T09:15:00Z\",\"entity\":\"PSD\",\"polarity\":\"negative\"}\n\
            \n\
            {\"timestamp\":\"2012-01-04T09:15:00Z\",\"entity\":\"PS\",\"polarity\":\"positive\"}\n";
        let parsed =
            parse_mentions(text.as_bytes(), MentionFormat::JsonLines, &ParseOptions::default())
                .unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.records[1].entity, "PS");
    }

    #[test]
    fn jsonl_bad_line_is_located() {
        let text = "{\"timestamp\":\"2012-01-03T09:15:00Z\",\"entity\":\"PSD\",\"polarity\":\"negative\"}\n\
            {\"timestamp\":\"2012-01-04T09:15:00Z\"}\n";
        let err =
            parse_mentions(text.as_bytes(), MentionFormat::JsonLines, &ParseOptions::default())
                .unwrap_err();
        match err {
            Error::MalformedRows { errors, .. } => assert_eq!(errors[0].line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn format_detection_by_extension() {
        assert_eq!(MentionFormat::from_path(Path::new("a/b/stream.jsonl")), MentionFormat::JsonLines);
        assert_eq!(MentionFormat::from_path(Path::new("stream.csv")), MentionFormat::Csv);
        assert_eq!(MentionFormat::from_path(Path::new("stream")), MentionFormat::Csv);
    }

    #[test]
    fn polls_round_trip_and_grouping() {
        let text = "date,entity,share_pct\n\
            2012-01-01,PSD,38.2\n\
            2012-01-01,PS,27.3\n\
            2012-02-01,PSD,37.9\n\
            2012-02-01,PS,28.0\n";
        let polls = parse_polls_csv(text.as_bytes()).unwrap();
        assert_eq!(polls.len(), 2);
        assert_eq!(polls.entities(), vec!["PS".to_string(), "PSD".to_string()]);

        let mut buf = Vec::new();
        write_polls_csv(&polls, &mut buf).unwrap();
        let again = parse_polls_csv(buf.as_slice()).unwrap();
        assert_eq!(polls, again);
    }

    #[test]
    fn polls_duplicate_cell_rejected() {
        let text = "date,entity,share_pct\n\
            2012-01-01,PSD,38.2\n\
            2012-01-01,PSD,12.0\n";
        assert!(parse_polls_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn mentions_round_trip_csv() {
        let parsed =
            parse_mentions(GOOD_CSV.as_bytes(), MentionFormat::Csv, &ParseOptions::default())
                .unwrap();
        let mut buf = Vec::new();
        write_mentions_csv(&parsed.records, &mut buf).unwrap();
        let again = parse_mentions(buf.as_slice(), MentionFormat::Csv, &ParseOptions::default())
            .unwrap();
        assert_eq!(parsed.records, again.records);
    }

    #[test]
    fn counts_csv_builds_table() {
        let polls_text = "date,entity,share_pct\n\
            2012-01-01,PSD,38.2\n\
            2012-02-01,PSD,37.9\n\
            2012-03-01,PSD,37.0\n";
        let polls = parse_polls_csv(polls_text.as_bytes()).unwrap();
        let counts_text = "period_start,entity,positives,negatives,neutrals\n\
            2012-01-01,PSD,5,10,20\n\
            2012-02-01,PSD,1,2,3\n\
            2012-02-01,OTHER,9,9,9\n";
        let (table, stats) = parse_counts_csv(counts_text.as_bytes(), &polls).unwrap();
        assert_eq!(stats.unknown_entity, 1);
        assert_eq!(table.count(0, "PSD").buzz(), 35);
        assert_eq!(table.count(1, "PSD").negatives(), 2);
        assert_eq!(table.target(1, "PSD"), 37.0);
    }

    #[test]
    fn counts_csv_rejects_unaligned_period_start() {
        let polls_text = "date,entity,share_pct\n\
            2012-01-01,PSD,38.2\n\
            2012-02-01,PSD,37.9\n";
        let polls = parse_polls_csv(polls_text.as_bytes()).unwrap();
        let counts_text = "period_start,entity,positives,negatives,neutrals\n\
            2012-01-15,PSD,5,10,20\n";
        assert!(parse_counts_csv(counts_text.as_bytes(), &polls).is_err());
    }
}
