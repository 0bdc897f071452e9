//! First Wasserstein distance between 1-D empirical distributions.

use crate::error::{invalid, Result};

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(invalid("empty sample set"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite sample"));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `W1` between the empirical distributions of `a` and `b`.
///
/// Equal sizes reduce to the mean absolute difference of order statistics.
/// Unequal sizes integrate `|F_a^{-1}(u) - F_b^{-1}(u)|` exactly over the
/// merged quantile breakpoints.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    let sa = sorted(a)?;
    let sb = sorted(b)?;
    if sa.len() == sb.len() {
        let n = sa.len() as f64;
        return Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n);
    }
    let (na, nb) = (sa.len(), sb.len());
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < na && j < nb {
        // breakpoints at (i+1)/na and (j+1)/nb, compared in integers
        let next_a = (i + 1) * nb;
        let next_b = (j + 1) * na;
        let next = next_a.min(next_b) as f64 / (na * nb) as f64;
        total += (next - u) * (sa[i] - sb[j]).abs();
        u = next;
        if next_a <= next_b {
            i += 1;
        }
        if next_b <= next_a {
            j += 1;
        }
    }
    Ok(total)
}

/// Per-axis `W1` between two sets of feature vectors of equal dimension.
pub fn wasserstein_per_axis(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = a
        .first()
        .or(b.first())
        .map(Vec::len)
        .ok_or_else(|| invalid("empty sample set"))?;
    if a.iter().chain(b).any(|v| v.len() != dim) {
        return Err(invalid("feature vectors differ in dimension"));
    }
    (0..dim)
        .map(|k| {
            let xa: Vec<f64> = a.iter().map(|v| v[k]).collect();
            let xb: Vec<f64> = b.iter().map(|v| v[k]).collect();
            wasserstein_1d(&xa, &xb)
        })
        .collect()
}
