use crate::error::{domain, Result};
use crate::scalar::pairwise_sum;

/// Sample mean and `std / sqrt(n)` (unbiased std; zero for a single sample).
pub fn mc_stats(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n == 0 {
        return Err(domain("mc_stats needs at least one sample"));
    }
    let mean = pairwise_sum(samples) / n as f64;
    if n == 1 {
        return Ok((mean, 0.0));
    }
    let var = sample_variance_about(samples, mean);
    Ok((mean, (var / n as f64).sqrt()))
}

fn sample_variance_about(samples: &[f64], mean: f64) -> f64 {
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&dev) / (samples.len() as f64 - 1.0)
}

pub fn sample_variance(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(domain("sample variance needs at least two samples"));
    }
    let mean = pairwise_sum(samples) / samples.len() as f64;
    Ok(sample_variance_about(samples, mean))
}

/// Jackknife standard error of the unbiased sample variance.
pub fn jackknife_variance_stderr(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(domain("jackknife needs at least three samples"));
    }
    let mean = pairwise_sum(samples) / n as f64;
    let c: Vec<f64> = samples.iter().map(|x| x - mean).collect();
    let s1 = pairwise_sum(&c);
    let sq: Vec<f64> = c.iter().map(|x| x * x).collect();
    let s2 = pairwise_sum(&sq);
    let m = (n - 1) as f64;
    let loo: Vec<f64> = c
        .iter()
        .map(|&x| {
            let a = s1 - x;
            (s2 - x * x - a * a / m) / (m - 1.0)
        })
        .collect();
    let bar = pairwise_sum(&loo) / n as f64;
    let dev: Vec<f64> = loo.iter().map(|v| (v - bar) * (v - bar)).collect();
    Ok((m / n as f64 * pairwise_sum(&dev)).sqrt())
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("KS test needs two non-empty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    Ok((d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Average ranks, ties sharing the mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(domain("spearman needs two equal-length samples of size >= 2"));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(domain("spearman is undefined for a constant sample"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
