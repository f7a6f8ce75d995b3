use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Points left after dropping non-positive errors.
    pub used: usize,
    pub dropped: usize,
}

/// Slope of `log(error)` against `log(h)` after a centred moving average over
/// `window` points in log-log space.
///
/// Non-positive or non-finite errors are dropped, not clamped.
pub fn fit_rate(h: &[f64], errors: &[f64], window: usize) -> Result<RateFit> {
    if h.len() != errors.len() {
        return Err(domain("fit_rate needs one error per step size"));
    }
    let mut pts: Vec<(f64, f64)> = h
        .iter()
        .zip(errors)
        .filter(|(hh, e)| **hh > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(hh, e)| (hh.ln(), e.ln()))
        .collect();
    let dropped = h.len() - pts.len();
    if dropped > 0 {
        log::info!("fit_rate: dropped {dropped} non-positive errors");
    }
    if pts.len() < 2 {
        return Err(domain(format!("fit_rate needs 2 usable points, got {}", pts.len())));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let w = window.max(1).min(pts.len());
    let smoothed: Vec<(f64, f64)> = if w > 1 && pts.len() - w + 1 >= 2 {
        pts.windows(w)
            .map(|s| {
                let k = s.len() as f64;
                (s.iter().map(|p| p.0).sum::<f64>() / k, s.iter().map(|p| p.1).sum::<f64>() / k)
            })
            .collect()
    } else {
        pts.clone()
    };
    let n = smoothed.len() as f64;
    let mx = smoothed.iter().map(|p| p.0).sum::<f64>() / n;
    let my = smoothed.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = smoothed.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = smoothed.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(domain("fit_rate needs at least two distinct step sizes"));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        used: pts.len(),
        dropped,
    })
}
