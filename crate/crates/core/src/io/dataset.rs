use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};

/// Layout of an input CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Schema {
    /// `date,cases[,removals]`, one row per day.
    #[default]
    DailyCounts,
    /// `onset[,removal]`, one row per case; the removal date may be blank.
    LineList,
}

/// Contiguous daily counts starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceDataset {
    pub start: NaiveDate,
    pub cases: Vec<u32>,
    pub removals: Option<Vec<u32>>,
    pub population: Option<u32>,
    /// Parse report: gaps filled, rows merged, and similar.
    pub notes: Vec<String>,
}

impl IncidenceDataset {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn total_cases(&self) -> u64 {
        self.cases.iter().map(|&c| c as u64).sum()
    }

    pub fn total_removals(&self) -> Option<u64> {
        self.removals.as_ref().map(|r| r.iter().map(|&c| c as u64).sum())
    }

    pub fn date(&self, d: usize) -> NaiveDate {
        self.start + chrono::Days::new(d as u64)
    }

    /// Keeps the first `days` days.
    pub fn truncate(&mut self, days: usize) {
        self.cases.truncate(days);
        if let Some(r) = self.removals.as_mut() {
            r.truncate(days);
        }
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| EpiError::Parse {
        line,
        message: format!("bad date `{s}`: {e}"),
    })
}

fn parse_count(s: &str, line: usize, what: &str) -> Result<u32> {
    s.trim().parse().map_err(|_| EpiError::Parse {
        line,
        message: format!("{what} `{s}` is not a nonnegative integer"),
    })
}

/// Checks the header is `required` optionally followed by `optional`;
/// returns whether the optional column is present.
fn expect_header(headers: &csv::StringRecord, required: &[&str], optional: &str) -> Result<bool> {
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let head_ok = cols.len() >= required.len() && cols.iter().zip(required).all(|(c, r)| c == r);
    match cols.len() - required.len().min(cols.len()) {
        0 if head_ok => Ok(false),
        1 if head_ok && cols[required.len()] == optional => Ok(true),
        _ => Err(EpiError::Parse {
            line: 1,
            message: format!("expected header `{}[,{optional}]`, found `{}`", required.join(","), cols.join(",")),
        }),
    }
}

/// Row number of a record as shown in an editor (header is line 1).
fn line_of(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

fn contiguous(
    by_day: BTreeMap<NaiveDate, (u32, u32)>,
    with_removals: bool,
    notes: &mut Vec<String>,
) -> Result<IncidenceDataset> {
    let (Some((&start, _)), Some((&end, _))) = (by_day.first_key_value(), by_day.last_key_value()) else {
        return Err(EpiError::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    };
    let days = (end - start).num_days() as usize + 1;
    let mut cases = vec![0; days];
    let mut removals = vec![0; days];
    for (date, (c, r)) in &by_day {
        let d = (*date - start).num_days() as usize;
        cases[d] = *c;
        removals[d] = *r;
    }
    let missing = days - by_day.len();
    if missing > 0 {
        let msg = format!("{missing} missing day(s) between {start} and {end} filled with zeros");
        log::warn!("{msg}");
        notes.push(msg);
    }
    Ok(IncidenceDataset {
        start,
        cases,
        removals: with_removals.then_some(removals),
        population: None,
        notes: std::mem::take(notes),
    })
}

fn read_daily<R: Read>(reader: R) -> Result<IncidenceDataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let with_removals = expect_header(rdr.headers()?, &["date", "cases"], "removals")?;
    let expected = if with_removals { 2 } else { 1 } + 1;
    let mut by_day = BTreeMap::new();
    let mut notes = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, k + 2);
        if rec.len() != expected {
            return Err(EpiError::Parse {
                line,
                message: format!("expected {expected} fields, found {}", rec.len()),
            });
        }
        let date = parse_date(&rec[0], line)?;
        let cases = parse_count(&rec[1], line, "cases")?;
        let removals = if with_removals {
            parse_count(&rec[2], line, "removals")?
        } else {
            0
        };
        if by_day.insert(date, (cases, removals)).is_some() {
            return Err(EpiError::Parse {
                line,
                message: format!("duplicate date {date}"),
            });
        }
    }
    contiguous(by_day, with_removals, &mut notes)
}

fn read_line_list<R: Read>(reader: R) -> Result<IncidenceDataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let with_removals = expect_header(rdr.headers()?, &["onset"], "removal")?;
    let mut by_day: BTreeMap<NaiveDate, (u32, u32)> = BTreeMap::new();
    let mut notes = Vec::new();
    let mut unknown_removal = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, k + 2);
        if rec.is_empty() || rec.len() > 2 {
            return Err(EpiError::Parse {
                line,
                message: format!("expected 1 or 2 fields, found {}", rec.len()),
            });
        }
        let onset = parse_date(&rec[0], line)?;
        by_day.entry(onset).or_default().0 += 1;
        match rec.get(1).filter(|s| !s.is_empty()) {
            Some(s) if with_removals => {
                let removal = parse_date(s, line)?;
                if removal < onset {
                    return Err(EpiError::Parse {
                        line,
                        message: format!("removal {removal} precedes onset {onset}"),
                    });
                }
                by_day.entry(removal).or_default().1 += 1;
            }
            _ => unknown_removal += 1,
        }
    }
    if with_removals && unknown_removal > 0 {
        notes.push(format!("{unknown_removal} case(s) without a removal date"));
    }
    contiguous(by_day, with_removals, &mut notes)
}

pub fn parse_csv<R: Read>(reader: R, schema: Schema) -> Result<IncidenceDataset> {
    match schema {
        Schema::DailyCounts => read_daily(reader),
        Schema::LineList => read_line_list(reader),
    }
}

pub fn ingest_csv(path: &Path, schema: Schema) -> Result<IncidenceDataset> {
    let file = std::fs::File::open(path)?;
    let data = parse_csv(file, schema)?;
    log::info!(
        "{}: {} days from {}, {} cases{}",
        path.display(),
        data.len(),
        data.start,
        data.total_cases(),
        data.total_removals().map(|r| format!(", {r} removals")).unwrap_or_default()
    );
    Ok(data)
}

/// Trailing `window`-day mean (shorter near the start), rounded to the
/// nearest integer with ties to even.
pub fn smooth_counts(series: &[u32], window: usize) -> Vec<u32> {
    let mut sum = 0u64;
    (0..series.len())
        .map(|d| {
            sum += series[d] as u64;
            if d >= window {
                sum -= series[d - window] as u64;
            }
            let take = window.min(d + 1);
            (sum as f64 / take as f64).round_ties_even() as u32
        })
        .collect()
}

pub fn presmooth(data: &IncidenceDataset, window: usize) -> Result<IncidenceDataset> {
    if window == 0 {
        return Err(EpiError::Domain("pre-smoothing window must be at least 1".into()));
    }
    let mut out = data.clone();
    out.cases = smooth_counts(&data.cases, window);
    out.removals = data.removals.as_ref().map(|r| smooth_counts(r, window));
    out.notes.push(format!("pre-smoothed with a trailing {window}-day mean"));
    Ok(out)
}

/// Writes `date,cases[,removals]`.
pub fn write_daily_csv(path: &Path, data: &IncidenceDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match &data.removals {
        Some(_) => w.write_record(["date", "cases", "removals"])?,
        None => w.write_record(["date", "cases"])?,
    }
    for d in 0..data.len() {
        let mut row = vec![data.date(d).to_string(), data.cases[d].to_string()];
        if let Some(r) = &data.removals {
            row.push(r[d].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
