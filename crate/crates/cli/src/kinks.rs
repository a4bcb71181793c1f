//! Critical-time detection on uniformly sampled curves.

use crate::error::{CliError, CliResult};

/// Relative floor on the threshold so rounding noise on smooth curves is ignored.
const NOISE_FLOOR: f64 = 1e-9;

/// Times where `|v[k−1] − 2v[k] + v[k+1]|` exceeds `factor` times the median
/// of that quantity over the whole series.
///
/// Runs of consecutive flagged samples count as one kink, reported at the
/// sample with the largest second difference. Non-finite samples are skipped.
pub fn detect_kinks(times: &[f64], values: &[f64], factor: f64) -> CliResult<Vec<f64>> {
    if values.len() < 5 {
        return Err(CliError::Config(format!("kink detection needs at least 5 samples, got {}", values.len())));
    }
    if times.len() != values.len() {
        return Err(CliError::Config(format!("{} times for {} values", times.len(), values.len())));
    }
    let d2: Vec<Option<f64>> = values
        .windows(3)
        .map(|w| {
            let x = (w[0] - 2.0 * w[1] + w[2]).abs();
            x.is_finite().then_some(x)
        })
        .collect();
    let mut finite: Vec<f64> = d2.iter().flatten().copied().collect();
    if finite.is_empty() {
        return Ok(Vec::new());
    }
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2];
    let scale = values.iter().filter(|v| v.is_finite()).fold(1.0f64, |m, v| m.max(v.abs()));
    let threshold = (factor * median).max(NOISE_FLOOR * scale);

    let mut kinks = Vec::new();
    let mut run: Option<(usize, f64)> = None;
    for (k, x) in d2.iter().enumerate() {
        match (x.filter(|x| *x > threshold), run) {
            (Some(x), Some((_, best))) if x > best => run = Some((k, x)),
            (Some(_), Some(_)) => {}
            (Some(x), None) => run = Some((k, x)),
            (None, Some((at, _))) => {
                kinks.push(times[at + 1]);
                run = None;
            }
            (None, None) => {}
        }
    }
    if let Some((at, _)) = run {
        kinks.push(times[at + 1]);
    }
    Ok(kinks)
}
