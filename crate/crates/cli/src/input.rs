//! Series ingestion and transforms.

use std::path::Path;

use anyhow::{bail, Context, Result};
use evospec_core::TimeSeries;

/// Reads one value per line, or `index,value` pairs with an optional single
/// header line.
pub fn load_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_series(&text, &path.display().to_string())
}

pub fn parse_series(text: &str, source: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let cell = match fields.len() {
            1 => fields[0],
            2 => fields[1],
            n => bail!("{source}: line {line_no} has {n} columns, expected 1 or 2"),
        };
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => bail!("{source}: line {line_no} holds non-finite value {v}"),
            Err(_) if values.is_empty() && fields.len() == 2 && line_no == first_content_line(text) => {
                // single header line in the two-column form
            }
            Err(_) => bail!("{source}: line {line_no}: `{cell}` is not a number"),
        }
    }
    if values.is_empty() {
        bail!("{source}: no values");
    }
    Ok(TimeSeries::new(values, 0, source)?)
}

fn first_content_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).map_or(0, |i| i + 1)
}

/// `d_t = ln X_t − ln X_{t−1}`; every value must be positive.
pub fn log_diff(x: &TimeSeries) -> Result<TimeSeries> {
    let v = x.values();
    if v.len() < 2 {
        bail!("log difference needs at least 2 values, got {}", v.len());
    }
    if let Some(i) = v.iter().position(|&y| y <= 0.0) {
        bail!("log difference needs positive values, got {} at index {i}", v[i]);
    }
    let out = v.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    Ok(TimeSeries::new(out, x.origin() + 1, format!("logdiff({})", x.meta()))?)
}
