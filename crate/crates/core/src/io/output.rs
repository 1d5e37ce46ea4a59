use std::path::Path;

use crate::diagnostics::{ForecastEnsemble, Summary};
use crate::epidemic::State;
use crate::error::{EpiError, Result};
use crate::inference::{ChainSamples, PosteriorSamples};

const END_COLUMNS: [&str; 4] = ["end_s", "end_e", "end_i", "end_r"];

fn num(v: f64) -> String {
    // Rust's shortest round-trip formatting, so reloads are exact.
    format!("{v}")
}

/// One row per retained draw: `chain,draw,<parameters>,end_s,end_e,end_i,end_r`.
pub fn write_samples(path: &Path, samples: &PosteriorSamples) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["chain".to_string(), "draw".to_string()];
    header.extend(samples.names.iter().cloned());
    header.extend(END_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (c, chain) in samples.chains.iter().enumerate() {
        for (j, (row, end)) in chain.draws.iter().zip(&chain.end_state).enumerate() {
            let mut rec = vec![c.to_string(), j.to_string()];
            rec.extend(row.iter().map(|&v| num(v)));
            rec.extend([end.s, end.e, end.i, end.r].iter().map(u32::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| EpiError::Parse {
        line,
        message: format!("cannot parse `{s}`"),
    })
}

/// Reloads draws and end states written by [`write_samples`]. Per-draw
/// log-likelihoods are read separately with [`read_loglik`].
pub fn read_samples(path: &Path, model: &str) -> Result<PosteriorSamples> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let p = header.len().checked_sub(2 + END_COLUMNS.len()).ok_or_else(|| EpiError::Parse {
        line: 1,
        message: "too few columns for a samples file".into(),
    })?;
    if header[..2] != ["chain", "draw"] || header[2 + p..] != END_COLUMNS {
        return Err(EpiError::Parse {
            line: 1,
            message: "not a samples file".into(),
        });
    }
    let mut chains: Vec<ChainSamples> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let c: usize = parse_field(&rec[0], line)?;
        if c > chains.len() {
            return Err(EpiError::Parse {
                line,
                message: format!("chain {c} appears before chain {}", chains.len()),
            });
        }
        if c == chains.len() {
            chains.push(empty_chain());
        }
        let row = (0..p).map(|j| parse_field(&rec[2 + j], line)).collect::<Result<Vec<f64>>>()?;
        let e: Vec<u32> = (0..4).map(|j| parse_field(&rec[2 + p + j], line)).collect::<Result<_>>()?;
        chains[c].draws.push(row);
        chains[c].end_state.push(State { s: e[0], e: e[1], i: e[2], r: e[3] });
    }
    Ok(PosteriorSamples {
        model: model.to_string(),
        names: header[2..2 + p].to_vec(),
        chains,
    })
}

fn empty_chain() -> ChainSamples {
    ChainSamples {
        draws: Vec::new(),
        day_loglik: Vec::new(),
        log_lik: Vec::new(),
        log_prior: Vec::new(),
        end_state: Vec::new(),
        susceptible: Vec::new(),
        acceptance: Vec::new(),
    }
}

/// Per-draw, per-day log-likelihood: `chain,draw,day_1..day_tau`.
pub fn write_loglik(path: &Path, samples: &PosteriorSamples) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let tau = samples
        .chains
        .iter()
        .find_map(|c| c.day_loglik.first())
        .map_or(0, Vec::len);
    let mut header = vec!["chain".to_string(), "draw".to_string()];
    header.extend((1..=tau).map(|d| format!("day_{d}")));
    w.write_record(&header)?;
    for (c, chain) in samples.chains.iter().enumerate() {
        for (j, ll) in chain.day_loglik.iter().enumerate() {
            let mut rec = vec![c.to_string(), j.to_string()];
            rec.extend(ll.iter().map(|&v| num(v)));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fills `day_loglik` of matching chains from a [`write_loglik`] file.
pub fn read_loglik(path: &Path, samples: &mut PosteriorSamples) -> Result<()> {
    let mut rdr = csv::Reader::from_path(path)?;
    for chain in &mut samples.chains {
        chain.day_loglik.clear();
    }
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let c: usize = parse_field(&rec[0], line)?;
        let chain = samples.chains.get_mut(c).ok_or_else(|| EpiError::Parse {
            line,
            message: format!("chain {c} not in samples"),
        })?;
        let ll = (2..rec.len()).map(|j| parse_field(&rec[j], line)).collect::<Result<Vec<f64>>>()?;
        chain.day_loglik.push(ll);
    }
    if samples.chains.iter().any(|c| c.day_loglik.len() != c.draws.len()) {
        return Err(EpiError::LengthMismatch("log-likelihood rows do not match draws".into()));
    }
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["parameter", "mean", "sd", "median", "lower", "upper"])?;
    for s in rows {
        w.write_record([s.name.clone(), num(s.mean), num(s.sd), num(s.median), num(s.lower), num(s.upper)])?;
    }
    w.flush()?;
    Ok(())
}

/// `<key>,mean,lower,upper` rows.
pub fn write_band(path: &Path, key: &str, keys: &[String], band: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([key, "mean", "lower", "upper"])?;
    for (k, (m, l, u)) in keys.iter().zip(band) {
        w.write_record([k.clone(), num(*m), num(*l), num(*u)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_forecast(path: &Path, f: &ForecastEnsemble) -> Result<()> {
    let days: Vec<String> = (0..f.mean.len()).map(|d| (f.first_day + d).to_string()).collect();
    let band: Vec<_> = (0..f.mean.len()).map(|d| (f.mean[d], f.lower[d], f.upper[d])).collect();
    write_band(path, "day", &days, &band)
}
