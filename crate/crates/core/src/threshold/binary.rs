use super::{label_measure, ThresholdVector};
use crate::error::{Error, Result};
use crate::metrics::Measure;

/// Grid settings for the binary threshold search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinarySearch {
    /// Number of equally spaced segments, each searched from its own start.
    pub n_starts: usize,
    /// Grid points in (0, 1), shared across segments.
    pub n_steps: usize,
}

impl Default for BinarySearch {
    fn default() -> Self {
        BinarySearch {
            n_starts: 5,
            n_steps: 100,
        }
    }
}

/// Multi-start linesearch over the positive-class cutoff.
///
/// The grid `j/(n_steps+1)` is split into `n_starts` equal segments; the best
/// point of each segment is refined once at ten times the grid resolution.
/// The default cutoff 0.5 is always evaluated and only replaced by a strictly
/// better one.
pub fn optimize_binary(
    prob_positive: &[f64],
    truth: &[usize],
    measure: Measure,
    search: BinarySearch,
) -> Result<(ThresholdVector, f64)> {
    if prob_positive.len() != truth.len() || truth.is_empty() {
        return Err(Error::invalid("probabilities and labels must be non-empty and equal length"));
    }
    if truth.iter().any(|&y| y > 1) {
        return Err(Error::invalid("binary threshold search got a label outside {0, 1}"));
    }
    if search.n_starts == 0 || search.n_steps == 0 {
        return Err(Error::invalid("n_starts and n_steps must be positive"));
    }
    let mut labels = vec![0usize; truth.len()];
    let mut eval = |t: f64| -> Result<f64> {
        for (l, &p) in labels.iter_mut().zip(prob_positive) {
            *l = usize::from(p >= t);
        }
        label_measure(measure, &labels, truth)
    };

    let mut best = (0.5, eval(0.5)?);
    let step = 1.0 / (search.n_steps + 1) as f64;
    let starts = search.n_starts.min(search.n_steps);
    let mut local_bests = Vec::with_capacity(starts);
    for s in 0..starts {
        let lo = 1 + s * search.n_steps / starts;
        let hi = (s + 1) * search.n_steps / starts;
        let mut local = (f64::NAN, f64::INFINITY);
        for j in lo..=hi {
            let t = j as f64 * step;
            let v = eval(t)?;
            if v < local.1 {
                local = (t, v);
            }
        }
        local_bests.push(local);
    }
    for &(center, value) in &local_bests {
        if value < best.1 {
            best = (center, value);
        }
        for k in -10i32..=10 {
            let t = center + f64::from(k) * step / 10.0;
            if k == 0 || t <= 0.0 || t >= 1.0 {
                continue;
            }
            let v = eval(t)?;
            if v < best.1 {
                best = (t, v);
            }
        }
    }
    Ok((ThresholdVector::binary(best.0)?, best.1))
}
