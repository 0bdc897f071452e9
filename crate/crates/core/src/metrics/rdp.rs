//! Ramer–Douglas–Peucker simplification of a sampled profile, with points
//! `(index, value)`.

use crate::error::{invalid, Result};

/// Points retained by simplification; indices strictly increase and always
/// include both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(usize, f64)>,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.0).collect()
    }

    /// Linear re-interpolation at every original index.
    pub fn interpolate(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        for w in self.points.windows(2) {
            let ((i0, y0), (i1, y1)) = (w[0], w[1]);
            for i in i0..i1 {
                let t = (i - i0) as f64 / (i1 - i0) as f64;
                out.push(y0 + t * (y1 - y0));
            }
        }
        if let Some(&(_, y)) = self.points.last() {
            out.push(y);
        }
        out
    }
}

/// Perpendicular distance from `(x, y)` to the line through two points.
pub fn perpendicular_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let norm = dx.hypot(dy);
    if norm == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    (dy * (p.0 - a.0) - dx * (p.1 - a.1)).abs() / norm
}

pub fn rdp_simplify(values: &[f64], epsilon: f64) -> Result<Polyline> {
    if values.len() < 2 {
        return Err(invalid(format!("simplification needs >= 2 points, got {}", values.len())));
    }
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("tolerance {epsilon} must be >= 0")));
    }
    let n = values.len();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let a = (lo as f64, values[lo]);
        let b = (hi as f64, values[hi]);
        let mut best = (lo, -1.0);
        for i in lo + 1..hi {
            let d = perpendicular_distance((i as f64, values[i]), a, b);
            if d > best.1 {
                best = (i, d);
            }
        }
        if best.1 > epsilon {
            keep[best.0] = true;
            stack.push((lo, best.0));
            stack.push((best.0, hi));
        }
    }
    Ok(Polyline {
        points: keep
            .iter()
            .enumerate()
            .filter(|(_, k)| **k)
            .map(|(i, _)| (i, values[i]))
            .collect(),
    })
}
