//! Wide CSV formats for load profiles and weather.
//!
//! Profiles: header `household_id,day,period_min,t0,t1,...`, one row per
//! household-day. Weather: header `day,period_min,channel,v0,v1,...`, one row
//! per day and channel.
//!
//! Row numbers in errors are 1-based file lines, so the header is line 1.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::path::Path;

use crate::data::downsample::block_mean;
use crate::data::{LoadProfile, WeatherTrack, WeatherVar, MINUTES_PER_DAY};
use crate::error::{Error, Result};

fn csv_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn from_csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    csv_err(path, row, e.to_string())
}

/// Checks that the value columns are named `{prefix}0, {prefix}1, ...` in order.
fn value_columns(path: &Path, headers: &csv::StringRecord, fixed: &[&str], prefix: char) -> Result<usize> {
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*name) {
            return Err(csv_err(path, 1, format!("missing column `{name}` at position {i}")));
        }
    }
    let n = headers.len() - fixed.len();
    for k in 0..n {
        let h = headers[fixed.len() + k].trim();
        let idx = h
            .strip_prefix(prefix)
            .and_then(|s| s.parse::<usize>().ok());
        if idx != Some(k) {
            return Err(csv_err(
                path,
                1,
                format!("non-monotonic time columns: expected `{prefix}{k}`, found `{h}`"),
            ));
        }
    }
    if n == 0 {
        return Err(csv_err(path, 1, "no value columns"));
    }
    Ok(n)
}

fn parse_values(path: &Path, line: usize, record: &csv::StringRecord, skip: usize, prefix: char) -> Result<Vec<f64>> {
    record
        .iter()
        .skip(skip)
        .enumerate()
        .map(|(k, field)| {
            let field = field.trim();
            if field.is_empty() {
                return Err(csv_err(path, line, format!("gap: missing value at `{prefix}{k}`")));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| csv_err(path, line, format!("`{field}` at `{prefix}{k}` is not a number")))?;
            if !v.is_finite() {
                return Err(csv_err(path, line, format!("gap: non-finite value at `{prefix}{k}`")));
            }
            Ok(v)
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, record: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    record
        .get(i)
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| csv_err(path, line, format!("invalid `{name}`")))
}

/// Reads day-bounded profiles, rejecting gaps, ragged rows and days that go
/// backwards within a household.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<LoadProfile>> {
    load_csv_impl(path.as_ref(), None)
}

/// Like [`load_csv`], block-averaging each row to `target_period_min` on ingest.
pub fn load_csv_resampled(path: impl AsRef<Path>, target_period_min: u32) -> Result<Vec<LoadProfile>> {
    load_csv_impl(path.as_ref(), Some(target_period_min))
}

fn load_csv_impl(path: &Path, target: Option<u32>) -> Result<Vec<LoadProfile>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| from_csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| from_csv_error(path, e))?.clone();
    let n = value_columns(path, &headers, &["household_id", "day", "period_min"], 't')?;
    let mut last_day: HashMap<String, i64> = HashMap::new();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| from_csv_error(path, e))?;
        if record.len() != n + 3 {
            return Err(csv_err(
                path,
                line,
                format!("gap: row has {} values, header declares {n}", record.len().saturating_sub(3)),
            ));
        }
        let household = record[0].trim().to_string();
        let day: i64 = parse_field(path, line, &record, 1, "day")?;
        let period: u32 = parse_field(path, line, &record, 2, "period_min")?;
        if period == 0 || n as u64 * u64::from(period) != u64::from(MINUTES_PER_DAY) {
            return Err(csv_err(
                path,
                line,
                format!("{n} samples at {period} min do not cover one day"),
            ));
        }
        if let Some(prev) = last_day.get(&household) {
            if day <= *prev {
                return Err(csv_err(
                    path,
                    line,
                    format!("non-monotonic day {day} after {prev} for household `{household}`"),
                ));
            }
        }
        last_day.insert(household.clone(), day);
        let mut values = parse_values(path, line, &record, 3, 't')?;
        let mut period_out = period;
        if let Some(target) = target {
            if target != period {
                if target < period || target % period != 0 {
                    return Err(csv_err(
                        path,
                        line,
                        format!("cannot resample {period}-min data to {target} min"),
                    ));
                }
                values = block_mean(&values, (target / period) as usize)?;
                period_out = target;
            }
        }
        let profile = LoadProfile::new(household, day, period_out, values)
            .map_err(|e| csv_err(path, line, e.to_string()))?;
        out.push(profile);
    }
    Ok(out)
}

/// Writes profiles; all rows must share one length. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn save_csv(profiles: &[LoadProfile], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = profiles.first().map_or(0, LoadProfile::len);
    let mut w = csv::Writer::from_path(path).map_err(|e| from_csv_error(path, e))?;
    let mut header = vec!["household_id".to_string(), "day".into(), "period_min".into()];
    header.extend((0..n).map(|k| format!("t{k}")));
    w.write_record(&header).map_err(|e| from_csv_error(path, e))?;
    for (i, p) in profiles.iter().enumerate() {
        if p.len() != n {
            return Err(csv_err(path, i + 2, format!("profile length {} differs from {n}", p.len())));
        }
        let mut row = vec![p.household_id.clone(), p.day.to_string(), p.period_min.to_string()];
        row.extend(p.values().iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| from_csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads weather rows grouped by day, in file order of first appearance.
pub fn load_weather_csv(path: impl AsRef<Path>) -> Result<Vec<(i64, WeatherTrack)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| from_csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| from_csv_error(path, e))?.clone();
    let n = value_columns(path, &headers, &["day", "period_min", "channel"], 'v')?;
    let mut days: Vec<i64> = Vec::new();
    let mut grouped: BTreeMap<i64, (u32, Vec<(WeatherVar, Vec<f64>)>, usize)> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| from_csv_error(path, e))?;
        if record.len() != n + 3 {
            return Err(csv_err(path, line, "gap: ragged weather row"));
        }
        let day: i64 = parse_field(path, line, &record, 0, "day")?;
        let period: u32 = parse_field(path, line, &record, 1, "period_min")?;
        let var: WeatherVar = record[2]
            .trim()
            .parse()
            .map_err(|e: Error| csv_err(path, line, e.to_string()))?;
        let values = parse_values(path, line, &record, 3, 'v')?;
        let entry = grouped.entry(day).or_insert_with(|| {
            days.push(day);
            (period, Vec::new(), line)
        });
        if entry.0 != period {
            return Err(csv_err(path, line, "weather channels of one day disagree on period"));
        }
        entry.1.push((var, values));
    }
    days.into_iter()
        .map(|d| {
            let (period, channels, line) = grouped.remove(&d).expect("grouped above");
            WeatherTrack::new(period, channels)
                .map(|w| (d, w))
                .map_err(|e| csv_err(path, line, e.to_string()))
        })
        .collect()
}

pub fn save_weather_csv(tracks: &[(i64, WeatherTrack)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = tracks.first().map_or(0, |t| t.1.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| from_csv_error(path, e))?;
    let mut header = vec!["day".to_string(), "period_min".into(), "channel".into()];
    header.extend((0..n).map(|k| format!("v{k}")));
    w.write_record(&header).map_err(|e| from_csv_error(path, e))?;
    for (day, track) in tracks {
        if track.len() != n {
            return Err(Error::LengthMismatch {
                op: "save_weather_csv",
                left: n,
                right: track.len(),
            });
        }
        for (var, values) in track.channels() {
            let mut row = vec![day.to_string(), track.period_min.to_string(), var.to_string()];
            row.extend(values.iter().map(f64::to_string));
            w.write_record(&row).map_err(|e| from_csv_error(path, e))?;
        }
    }
    w.flush()?;
    Ok(())
}
