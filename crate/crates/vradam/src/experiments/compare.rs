use crate::{Error, Result};

/// A value observed at a point on a (wall-clock or model-cost) time axis.
pub type TimedValue = (f64, f64);

fn interpolate(series: &[TimedValue], t: f64) -> f64 {
    let i = series.partition_point(|&(s, _)| s < t);
    if i < series.len() && series[i].0 == t {
        return series[i].1;
    }
    let ((t0, y0), (t1, y1)) = (series[i - 1], series[i]);
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// `(a - b)/|b|` on the union of both sample times inside their overlap,
/// each series interpolated linearly in time. `0/0` counts as 0.
pub fn relative_difference(a: &[TimedValue], b: &[TimedValue]) -> Result<Vec<TimedValue>> {
    for s in [a, b] {
        if s.is_empty() {
            return Err(Error::Range("empty series".into()));
        }
        if s.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Range("time stamps must be strictly increasing".into()));
        }
    }
    let lo = a[0].0.max(b[0].0);
    let hi = a[a.len() - 1].0.min(b[b.len() - 1].0);
    if lo > hi {
        return Err(Error::Range(format!("time ranges do not overlap ({lo} > {hi})")));
    }
    let mut axis: Vec<f64> = a.iter().chain(b).map(|&(t, _)| t).filter(|&t| t >= lo && t <= hi).collect();
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    Ok(axis
        .into_iter()
        .map(|t| {
            let (ya, yb) = (interpolate(a, t), interpolate(b, t));
            let r = if ya == yb { 0.0 } else { (ya - yb) / yb.abs() };
            (t, r)
        })
        .collect())
}
