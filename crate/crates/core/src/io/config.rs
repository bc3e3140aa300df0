//! Flat `key = value` sweep configuration.
//!
//! ```text
//! # figure 2
//! distances_km       = 0:300:1
//! n_th_values        = 0, 0.001, 0.01, 0.05, 0.1
//! sigma_theta_values = 0,0.1,0.2,0.3
//! alpha_db_per_km    = 0.2
//! f                  = 1
//! arm_split          = symmetric
//! ```
//!
//! List values are comma separated; each item is a number or an inclusive
//! range `start:stop:step`. Keys left out take the [`SweepConfig`] defaults.
//! Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{ArmSplit, SweepConfig};

pub const KEYS: [&str; 6] = [
    "distances_km",
    "n_th_values",
    "sigma_theta_values",
    "alpha_db_per_km",
    "f",
    "arm_split",
];

/// Range items are rounded to this many decimals to drop accumulation noise.
const RANGE_DECIMALS: i32 = 12;

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut config = SweepConfig::default();
    let mut seen = HashSet::new();
    let mut distances_given = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::config(key, "key given more than once"));
        }
        match key {
            "distances_km" => {
                config.distances_km = parse_list(key, value)?;
                distances_given = true;
            }
            "n_th_values" => config.n_th_values = parse_list(key, value)?,
            "sigma_theta_values" => config.sigma_theta_values = parse_list(key, value)?,
            "alpha_db_per_km" => config.alpha_db_per_km = parse_number(key, value)?,
            "f" => config.f = parse_number(key, value)?,
            "arm_split" => config.arm_split = value.parse::<ArmSplit>()?,
            _ => unreachable!(),
        }
    }
    if let ArmSplit::Explicit { a_km, b_km } = config.arm_split {
        if !distances_given {
            config.distances_km = vec![a_km + b_km];
        }
    }
    config.validate()?;
    Ok(config)
}

fn parse_number(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let v: f64 = s
        .parse()
        .map_err(|_| Error::config(key, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::config(key, format!("`{s}` is not finite")));
    }
    Ok(v)
}

/// Parses `a,b,c` and `start:stop:step` items into one list.
pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for item in s.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::config(key, "empty list item"));
        }
        if item.contains(':') {
            out.extend(parse_range(key, item)?);
        } else {
            out.push(parse_number(key, item)?);
        }
    }
    Ok(out)
}

fn parse_range(key: &str, item: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = item.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::config(
            key,
            format!("range `{item}` must be start:stop:step"),
        ));
    };
    let (start, stop, step) = (
        parse_number(key, start)?,
        parse_number(key, stop)?,
        parse_number(key, step)?,
    );
    if step <= 0.0 {
        return Err(Error::config(key, format!("range step {step} must be > 0")));
    }
    if stop < start {
        return Err(Error::config(
            key,
            format!("range stop {stop} is below start {start}"),
        ));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let scale = 10f64.powi(RANGE_DECIMALS);
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * scale).round() / scale)
        .collect())
}
