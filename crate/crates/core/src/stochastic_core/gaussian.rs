use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Below this variance the density is evaluated as `exp(log density)`.
pub const LOG_SPACE_VARIANCE: f64 = 1e-6;

/// Density of the centred Gaussian with variance `lam` at `x`.
pub fn gaussian_pdf<T: Real>(x: T, lam: T) -> Result<T> {
    if !(lam > T::zero()) {
        return Err(domain(format!("gaussian_pdf needs lam > 0, got {lam}")));
    }
    if lam < T::of(LOG_SPACE_VARIANCE) {
        return Ok(log_gaussian_pdf_unchecked(x, lam).exp());
    }
    let two_pi_lam = T::TAU() * lam;
    Ok((-(x * x) / (lam + lam)).exp() / two_pi_lam.sqrt())
}

pub fn log_gaussian_pdf<T: Real>(x: T, lam: T) -> Result<T> {
    if !(lam > T::zero()) {
        return Err(domain(format!("log_gaussian_pdf needs lam > 0, got {lam}")));
    }
    Ok(log_gaussian_pdf_unchecked(x, lam))
}

#[inline]
pub(crate) fn log_gaussian_pdf_unchecked<T: Real>(x: T, lam: T) -> T {
    -(x * x) / (lam + lam) - T::of(0.5) * (T::TAU() * lam).ln()
}

/// `sqrt(1 - rho^2)`, rejecting full correlation.
pub fn rho_bar<T: Real>(rho: T) -> Result<T> {
    if !(rho.abs() < T::one()) {
        return Err(Error::Assumption(format!(
            "B and W must not be fully correlated, got rho = {rho}"
        )));
    }
    Ok((T::one() - rho * rho).sqrt())
}

/// `rho dB + sqrt(1 - rho^2) dBbar`.
pub fn correlate<T: Real>(d_b: T, d_bbar: T, rho: T) -> Result<T> {
    Ok(rho * d_b + rho_bar(rho)? * d_bbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic_core::rng::{standard_normal, NoiseLabel};

    #[test]
    fn standard_density_at_zero() {
        let v = gaussian_pdf(0.0f64, 1.0).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn scaling_identity() {
        for &lam in &[1e-8, 1e-5, 0.3, 2.0, 17.0] {
            for &x in &[-3.0, -0.01, 0.0, 1e-4, 0.7] {
                let lhs: f64 = gaussian_pdf(x, lam).unwrap();
                let rhs = gaussian_pdf(x / lam.sqrt(), 1.0).unwrap() / lam.sqrt();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300), "{x} {lam}");
            }
        }
    }

    #[test]
    fn narrow_density_matches_extended_precision_value() {
        // 100 / sqrt(2 pi) * exp(-2), evaluated to 30 digits offline
        let v = gaussian_pdf(0.02f64, 1e-4).unwrap();
        let expect = 5.399_096_651_318_805_133_590_44_f64;
        assert!((v - expect).abs() / expect < 1e-14);
    }

    #[test]
    fn log_space_branch_avoids_underflow() {
        let lam = 1e-7f64;
        for &x in &[0.0, 1e-4, 1e-3, 0.0118] {
            let v = gaussian_pdf(x, lam).unwrap();
            let logv = log_gaussian_pdf(x, lam).unwrap();
            assert!(v > 0.0 && v.is_finite());
            assert!((v.ln() - logv).abs() < 1e-9 * logv.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_nonpositive_variance() {
        assert!(gaussian_pdf(0.0, 0.0f64).is_err());
        assert!(gaussian_pdf(0.0, -1.0f64).is_err());
        assert!(gaussian_pdf(0.0, f64::NAN).is_err());
    }

    #[test]
    fn correlate_limits() {
        assert_eq!(correlate(0.3, -1.2, 0.0f64).unwrap(), -1.2);
        let near = correlate(0.3, -1.2, 1.0 - 1e-9f64).unwrap();
        assert!((near - 0.3).abs() < 1e-4);
        assert!(correlate(0.3, 0.1, 1.0f64).is_err());
        assert!(correlate(0.3, 0.1, -1.5f64).is_err());
    }

    #[test]
    fn correlate_preserves_variance() {
        let h = 0.01f64;
        let n = 100_000u64;
        let mut s2 = 0.0;
        let mut s1 = 0.0;
        for i in 0..n {
            let db = h.sqrt() * standard_normal(3, i, NoiseLabel::B, 0);
            let dbb = h.sqrt() * standard_normal(3, i, NoiseLabel::Bbar, 0);
            let w = correlate(db, dbb, -0.7).unwrap();
            s1 += w;
            s2 += w * w;
        }
        let nf = n as f64;
        let var = (s2 - s1 * s1 / nf) / (nf - 1.0);
        let se = h * 2f64.sqrt() / nf.sqrt();
        assert!((var - h).abs() < 5.0 * se, "{var}");
    }

    #[test]
    fn works_in_single_precision() {
        let v = gaussian_pdf(0.5f32, 0.25).unwrap();
        assert!((v - 0.483_941_45).abs() < 1e-6);
    }
}
