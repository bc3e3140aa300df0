//! Per-arm channel quantities: fiber transmissivity, thermal-loss
//! depolarization, single-photon success probability and the phase-noise
//! coherence factor.
//!
//! The wrapped normal density and its mean resultant live here as well so
//! the closed-form coherence factor can be checked by quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

/// Standard single-mode fiber loss at 1550 nm.
pub const DEFAULT_ALPHA_DB_PER_KM: f64 = 0.2;

/// Wrapped-normal series terms smaller than this are dropped.
pub const WRAPPED_NORMAL_TERM_CUTOFF: f64 = 1e-15;

/// Smallest transmissivity a sweep may reach.
pub const MIN_TRANSMISSIVITY: f64 = 1e-12;

/// Physical parameters of one fiber arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Mean thermal photon number of the environment.
    pub n_th: f64,
    /// Phase-noise standard deviation in radians.
    pub sigma_theta: f64,
    pub length_km: f64,
    pub alpha_db_per_km: f64,
}

impl ChannelParams {
    pub fn new(n_th: f64, sigma_theta: f64, length_km: f64) -> Result<Self> {
        Self::with_alpha(n_th, sigma_theta, length_km, DEFAULT_ALPHA_DB_PER_KM)
    }

    pub fn with_alpha(
        n_th: f64,
        sigma_theta: f64,
        length_km: f64,
        alpha_db_per_km: f64,
    ) -> Result<Self> {
        let params = Self {
            n_th,
            sigma_theta,
            length_km,
            alpha_db_per_km,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("n_th", self.n_th)?;
        non_negative("sigma_theta", self.sigma_theta)?;
        non_negative("length_km", self.length_km)?;
        non_negative("alpha_db_per_km", self.alpha_db_per_km)?;
        Ok(())
    }
}

/// Derived per-arm figures consumed by the key-rate formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFigures {
    pub eta: f64,
    pub lambda: f64,
    pub p_s: f64,
    /// Coherence factor r̄² = exp(-σ²).
    pub r2: f64,
}

impl NoiseFigures {
    /// The noiseless, lossless arm.
    pub const IDEAL: NoiseFigures = NoiseFigures {
        eta: 1.0,
        lambda: 0.0,
        p_s: 1.0,
        r2: 1.0,
    };
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "a finite value >= 0"))
    }
}

fn check_eta(eta: f64) -> Result<f64> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(eta)
    } else {
        Err(Error::domain("eta", eta, "0 < eta <= 1"))
    }
}

/// Fiber transmissivity `10^(-αL/10)`.
pub fn transmissivity(length_km: f64, alpha_db_per_km: f64) -> Result<f64> {
    non_negative("length_km", length_km)?;
    non_negative("alpha_db_per_km", alpha_db_per_km)?;
    Ok(10f64.powf(-alpha_db_per_km * length_km / 10.0))
}

/// `N(1+N)(1-η)²`, the thermal admixture weight of the unnormalized output.
pub(crate) fn thermal_weight(n_th: f64, eta: f64) -> f64 {
    let loss = 1.0 - eta;
    n_th * (1.0 + n_th) * loss * loss
}

/// `γ = 1 + N - Nη`, written as `1 + N(1-η)` so that it is exactly one on a
/// lossless arm.
pub(crate) fn thermal_gamma(n_th: f64, eta: f64) -> f64 {
    1.0 + n_th * (1.0 - eta)
}

/// Depolarization parameter `λ = 2N(1+N)(1-η)² / (η + 2N(1+N)(1-η)²)`.
pub fn depolarizing_lambda(n_th: f64, eta: f64) -> Result<f64> {
    non_negative("n_th", n_th)?;
    check_eta(eta)?;
    let noise = 2.0 * thermal_weight(n_th, eta);
    Ok(noise / (eta + noise))
}

/// Single-photon success probability `(η + 2N(1+N)(1-η)²) / γ⁴`.
pub fn success_probability(n_th: f64, eta: f64) -> Result<f64> {
    non_negative("n_th", n_th)?;
    check_eta(eta)?;
    let gamma = thermal_gamma(n_th, eta);
    Ok((eta + 2.0 * thermal_weight(n_th, eta)) / gamma.powi(4))
}

/// Coherence factor `r̄² = exp(-σ²)`.
pub fn dephasing_r2(sigma_theta: f64) -> Result<f64> {
    non_negative("sigma_theta", sigma_theta)?;
    Ok((-sigma_theta * sigma_theta).exp())
}

/// Density of the wrapped normal distribution on `[-π, π]`.
///
/// The image sum over `k` is extended symmetrically until both the `+k` and
/// `-k` terms fall below [`WRAPPED_NORMAL_TERM_CUTOFF`]. A zero standard
/// deviation is a point mass with no density and is rejected.
pub fn wrapped_normal_pdf(theta: f64, sigma_theta: f64) -> Result<f64> {
    if !(sigma_theta.is_finite() && sigma_theta > 0.0) {
        return Err(Error::domain(
            "sigma_theta",
            sigma_theta,
            "a finite value > 0",
        ));
    }
    if !(theta.is_finite() && (-PI..=PI).contains(&theta)) {
        return Err(Error::domain("theta", theta, "-pi <= theta <= pi"));
    }
    Ok(wrapped_normal_unchecked(theta, sigma_theta))
}

pub(crate) fn wrapped_normal_unchecked(theta: f64, sigma_theta: f64) -> f64 {
    let norm = 1.0 / (sigma_theta * (2.0 * PI).sqrt());
    let two_var = 2.0 * sigma_theta * sigma_theta;
    let term = |k: i64| {
        let x = theta + 2.0 * PI * k as f64;
        norm * (-x * x / two_var).exp()
    };
    let mut sum = term(0);
    let mut k = 1;
    loop {
        let up = term(k);
        let down = term(-k);
        sum += up + down;
        if up.max(down) < WRAPPED_NORMAL_TERM_CUTOFF {
            break;
        }
        k += 1;
    }
    sum
}

/// Mean resultant `∫ f_WN(θ) e^{iθ} dθ` over `[-π, π]` evaluated by
/// composite Gauss-Legendre quadrature. Its modulus is `r̄`; a zero standard deviation
/// returns exactly one.
pub fn mean_resultant(sigma_theta: f64) -> Result<Complex64> {
    non_negative("sigma_theta", sigma_theta)?;
    if sigma_theta == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sum = quadrature::phase_points_for(sigma_theta)
        .into_iter()
        .map(|(theta, w)| w * wrapped_normal_unchecked(theta, sigma_theta) * Complex64::cis(theta))
        .sum();
    Ok(sum)
}

/// Bundles the per-arm figures.
pub fn noise_figures(params: &ChannelParams) -> Result<NoiseFigures> {
    params.validate()?;
    let eta = transmissivity(params.length_km, params.alpha_db_per_km)?;
    if eta <= 0.0 {
        return Err(Error::domain(
            "length_km",
            params.length_km,
            "a length with non-zero transmissivity",
        ));
    }
    Ok(NoiseFigures {
        eta,
        lambda: depolarizing_lambda(params.n_th, eta)?,
        p_s: success_probability(params.n_th, eta)?,
        r2: dephasing_r2(params.sigma_theta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transmissivity_examples() {
        assert_eq!(transmissivity(0.0, 0.2).unwrap(), 1.0);
        assert_relative_eq!(
            transmissivity(50.0, 0.2).unwrap(),
            0.1,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            transmissivity(100.0, 0.2).unwrap(),
            0.01,
            max_relative = 1e-15
        );
        assert!(transmissivity(-1.0, 0.2).is_err());
        assert!(transmissivity(1.0, -0.2).is_err());
        assert!(transmissivity(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn lambda_limits() {
        assert_eq!(depolarizing_lambda(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(depolarizing_lambda(0.1, 1.0).unwrap(), 0.0);
        assert!(depolarizing_lambda(0.0, 0.0).is_err());
        assert!(depolarizing_lambda(0.1, 1.5).is_err());
        assert!(depolarizing_lambda(-0.1, 0.5).is_err());
    }

    #[test]
    fn lambda_value() {
        // 0.055 / 0.555
        assert_relative_eq!(
            depolarizing_lambda(0.1, 0.5).unwrap(),
            0.099_099_099_099_099_1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn success_probability_limits() {
        for eta in [1e-12, 0.01, 0.3, 0.77, 1.0] {
            assert_eq!(success_probability(0.0, eta).unwrap(), eta);
        }
        assert_eq!(success_probability(0.1, 1.0).unwrap(), 1.0);
        assert!(success_probability(0.1, 0.0).is_err());
    }

    #[test]
    fn success_probability_value() {
        assert_relative_eq!(
            success_probability(0.1, 0.5).unwrap(),
            0.456_599_873_509_494_5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn r2_examples() {
        assert_eq!(dephasing_r2(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            dephasing_r2(0.3).unwrap(),
            0.913_931_185_271_228_2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            dephasing_r2(1.0).unwrap(),
            0.367_879_441_171_442_3,
            max_relative = 1e-15
        );
        assert!(dephasing_r2(-0.1).is_err());
    }

    #[test]
    fn wrapped_normal_rejects_point_mass() {
        assert!(wrapped_normal_pdf(0.0, 0.0).is_err());
        assert!(wrapped_normal_pdf(4.0, 0.3).is_err());
    }

    #[test]
    fn wrapped_normal_is_symmetric() {
        let a = wrapped_normal_pdf(1.0, 0.5).unwrap();
        let b = wrapped_normal_pdf(-1.0, 0.5).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
    }

    #[test]
    fn wrapped_normal_is_periodic_at_the_boundary() {
        let a = wrapped_normal_pdf(PI, 1.5).unwrap();
        let b = wrapped_normal_pdf(-PI, 1.5).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn wrapped_normal_normalization() {
        for i in 1..=40 {
            let sigma = 0.05 * i as f64;
            let total = quadrature::phase_points()
                .into_iter()
                .map(|(t, w)| w * wrapped_normal_pdf(t, sigma).unwrap())
                .sum::<f64>();
            assert!((total - 1.0).abs() < 1e-10, "sigma = {sigma}: {total}");
        }
    }

    #[test]
    fn mean_resultant_matches_closed_form() {
        let z = mean_resultant(0.3).unwrap();
        assert!((z.re - (-0.045f64).exp()).abs() < 1e-9);
        assert!(z.im.abs() < 1e-12);
        assert_relative_eq!(z.re, 0.955_997_481_833_099_9, max_relative = 1e-12);
        assert_eq!(mean_resultant(0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn r2_from_quadrature() {
        for sigma in [0.3, 1.0] {
            let r = mean_resultant(sigma).unwrap().re;
            assert!((r * r - dephasing_r2(sigma).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_figures_ideal_and_pure_loss() {
        let ideal = noise_figures(&ChannelParams::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(ideal, NoiseFigures::IDEAL);

        let loss = noise_figures(&ChannelParams::new(0.0, 0.0, 50.0).unwrap()).unwrap();
        assert_relative_eq!(loss.eta, 0.1, max_relative = 1e-15);
        assert_eq!(loss.lambda, 0.0);
        assert_eq!(loss.p_s, loss.eta);
        assert_eq!(loss.r2, 1.0);
    }

    #[test]
    fn noise_figures_compose_components() {
        let p = ChannelParams::new(0.01, 0.1, 100.0).unwrap();
        let f = noise_figures(&p).unwrap();
        assert_relative_eq!(f.eta, 0.01, max_relative = 1e-15);
        // Direct substitution: T = 0.01 * 1.01 * 0.99^2, γ = 1.0099.
        let t = 0.01 * 1.01 * 0.99 * 0.99;
        assert_relative_eq!(f.lambda, 2.0 * t / (0.01 + 2.0 * t), max_relative = 1e-13);
        assert_relative_eq!(
            f.p_s,
            (0.01 + 2.0 * t) / 1.0099f64.powi(4),
            max_relative = 1e-13
        );
        let r = mean_resultant(0.1).unwrap().re;
        assert!((f.r2 - r * r).abs() < 1e-9);
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(-0.1, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(ChannelParams::new(0.0, 0.0, -5.0).is_err());
        assert!(ChannelParams::with_alpha(0.0, 0.0, 5.0, -0.2).is_err());
        assert_eq!(
            ChannelParams::new(0.0, 0.0, 5.0).unwrap().alpha_db_per_km,
            DEFAULT_ALPHA_DB_PER_KM
        );
    }
}
