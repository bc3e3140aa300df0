//! Closed-form projection probabilities, gains, error rates and the
//! Devetak-Winter key rate.
//!
//! The aggregate quantities come in two flavours. The `q_z`, `q_z_11` and
//! `e_z` functions are the compact expressions that drive the key rate; the
//! `*_from_projections` companions evaluate the defining sums over the
//! projection table. The two do not agree in general and both are reported.

use crate::channel::NoiseFigures;
use crate::error::{Error, Result};
use crate::quantum::{BellState, InputPair, ProjectionTable};

/// `λ_A + λ_B - λ_Aλ_B`
fn flip_weight(lambda_a: f64, lambda_b: f64) -> f64 {
    lambda_a + lambda_b - lambda_a * lambda_b
}

/// `2 - λ_A - λ_B + λ_Aλ_B`
fn keep_weight(lambda_a: f64, lambda_b: f64) -> f64 {
    2.0 - lambda_a - lambda_b + lambda_a * lambda_b
}

/// `(1-λ_A)(1-λ_B)·r̄⁴`, where `r4` is the product of the two arms' `r̄²`.
fn visibility(lambda_a: f64, lambda_b: f64, r4: f64) -> f64 {
    (1.0 - lambda_a) * (1.0 - lambda_b) * r4
}

/// Tabulated projection probability for one input pair and Bell state.
pub fn closed_form_projection(
    pair: InputPair,
    bell: BellState,
    lambda_a: f64,
    lambda_b: f64,
    r2: f64,
) -> f64 {
    projection_with_r4(pair, bell, lambda_a, lambda_b, r2 * r2)
}

fn projection_with_r4(
    pair: InputPair,
    bell: BellState,
    lambda_a: f64,
    lambda_b: f64,
    r4: f64,
) -> f64 {
    use BellState::*;
    use InputPair::*;
    let c = visibility(lambda_a, lambda_b, r4);
    match (pair, bell) {
        (HH | VV, _) => flip_weight(lambda_a, lambda_b) / 4.0,
        (HV | VH, _) => keep_weight(lambda_a, lambda_b) / 4.0,
        (DD | AA, PsiPlus) | (DA | AD, PsiMinus) => (1.0 + c) / 4.0,
        (DD | AA, PsiMinus) | (DA | AD, PsiPlus) => (1.0 - c) / 4.0,
    }
}

/// The full closed-form table with a shared coherence factor.
pub fn closed_form_table(lambda_a: f64, lambda_b: f64, r2: f64) -> ProjectionTable {
    ProjectionTable::from_fn(|p, b| Ok(closed_form_projection(p, b, lambda_a, lambda_b, r2)))
        .expect("closed forms are infallible")
}

fn z_denominator_sum(t: &ProjectionTable) -> f64 {
    use BellState::*;
    use InputPair::*;
    t.get(HH, PsiPlus)
        + t.get(VV, PsiPlus)
        + t.get(HV, PsiPlus)
        + t.get(HV, PsiMinus)
        + t.get(VH, PsiPlus)
        + t.get(VH, PsiMinus)
}

fn z_table(lambda_a: f64, lambda_b: f64) -> ProjectionTable {
    // Z-basis entries do not depend on the coherence factor.
    closed_form_table(lambda_a, lambda_b, 1.0)
}

/// Total Z-basis gain `(1 + λ_Aλ_B)·P_S^A·P_S^B`.
pub fn q_z(lambda_a: f64, lambda_b: f64, p_s_a: f64, p_s_b: f64) -> f64 {
    (1.0 + lambda_a * lambda_b) * p_s_a * p_s_b
}

/// Total Z-basis gain from its defining sum:
/// `½·P_S^A·P_S^B·(P₊^HH + P₊^VV + P₊^HV + P₋^HV + P₊^VH + P₋^VH)`.
pub fn q_z_from_projections(lambda_a: f64, lambda_b: f64, p_s_a: f64, p_s_b: f64) -> f64 {
    0.5 * p_s_a * p_s_b * z_denominator_sum(&z_table(lambda_a, lambda_b))
}

/// Effective key gain `(2 - λ_A - λ_B + λ_Aλ_B)·P_S^A·P_S^B`.
pub fn q_z_11(lambda_a: f64, lambda_b: f64, p_s_a: f64, p_s_b: f64) -> f64 {
    keep_weight(lambda_a, lambda_b) * p_s_a * p_s_b
}

/// `½·(P₊^HV + P₋^HV + P₊^VH + P₋^VH)·P_S^A·P_S^B`.
pub fn q_z_11_from_projections(lambda_a: f64, lambda_b: f64, p_s_a: f64, p_s_b: f64) -> f64 {
    use BellState::*;
    use InputPair::*;
    let t = z_table(lambda_a, lambda_b);
    let sum = t.get(HV, PsiPlus) + t.get(HV, PsiMinus) + t.get(VH, PsiPlus) + t.get(VH, PsiMinus);
    0.5 * sum * p_s_a * p_s_b
}

/// Z-basis error rate `(λ_A + λ_B - λ_Aλ_B) / (2(1 + λ_Aλ_B))`.
pub fn e_z(lambda_a: f64, lambda_b: f64) -> f64 {
    flip_weight(lambda_a, lambda_b) / (2.0 * (1.0 + lambda_a * lambda_b))
}

/// Z-basis error rate as the ratio of the identical-input ψ⁺ projections to
/// the full Z-basis detection sum.
pub fn e_z_from_projections(lambda_a: f64, lambda_b: f64) -> f64 {
    use BellState::*;
    use InputPair::*;
    let t = z_table(lambda_a, lambda_b);
    (t.get(HH, PsiPlus) + t.get(VV, PsiPlus)) / z_denominator_sum(&t)
}

/// X-basis error rate `(1 - (1-λ_A)(1-λ_B)·r̄⁴) / 2` with `r̄⁴ = (r̄²)²`.
pub fn e_x_11(lambda_a: f64, lambda_b: f64, r2: f64) -> f64 {
    e_x_11_with_r4(lambda_a, lambda_b, r2 * r2)
}

fn e_x_11_with_r4(lambda_a: f64, lambda_b: f64, r4: f64) -> f64 {
    (1.0 - visibility(lambda_a, lambda_b, r4)) / 2.0
}

/// X-basis error rate from its defining ratio
/// `(P₋^DD + P₊^DA) / (P₊^DD + P₋^DD + P₊^DA + P₋^DA)`.
pub fn e_x_11_from_projections(lambda_a: f64, lambda_b: f64, r2: f64) -> f64 {
    use BellState::*;
    use InputPair::*;
    let t = closed_form_table(lambda_a, lambda_b, r2);
    let errors = t.get(DD, PsiMinus) + t.get(DA, PsiPlus);
    errors / (t.get(DD, PsiPlus) + t.get(DD, PsiMinus) + t.get(DA, PsiPlus) + t.get(DA, PsiMinus))
}

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
        return Err(Error::domain("x", x, "0 <= x <= 1"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Error-correction efficiency; `f = 1` is the Shannon limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCorrectionConfig {
    f: f64,
}

impl ErrorCorrectionConfig {
    pub fn new(f: f64) -> Result<Self> {
        if f.is_finite() && f >= 1.0 {
            Ok(Self { f })
        } else {
            Err(Error::domain("f", f, "a finite value >= 1"))
        }
    }

    pub fn f(&self) -> f64 {
        self.f
    }
}

impl Default for ErrorCorrectionConfig {
    fn default() -> Self {
        Self { f: 1.0 }
    }
}

/// All metrics for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub q_z: f64,
    pub q_z_11: f64,
    pub e_z: f64,
    pub e_x_11: f64,
    /// Key rate in bits per pulse pair; negative below the secure threshold.
    pub skr: f64,
    pub skr_clamped: f64,
    pub q_z_xcheck: f64,
    pub q_z_11_xcheck: f64,
    pub e_z_xcheck: f64,
}

fn check_figures(names: [&'static str; 3], fig: &NoiseFigures) -> Result<()> {
    for (name, v) in names.into_iter().zip([fig.lambda, fig.p_s, fig.r2]) {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::domain(name, v, "0 <= value <= 1"));
        }
    }
    Ok(())
}

/// Key rate
/// `R = P_S^A P_S^B [(2-λ_A-λ_B+λ_Aλ_B)(1 - H(e_X)) - (1+λ_Aλ_B)·f·H(E_Z)]`
/// together with every intermediate quantity.
pub fn secret_key_rate(
    a: &NoiseFigures,
    b: &NoiseFigures,
    ec: &ErrorCorrectionConfig,
) -> Result<MetricsRecord> {
    check_figures(["lambda_a", "p_s_a", "r2_a"], a)?;
    check_figures(["lambda_b", "p_s_b", "r2_b"], b)?;
    let (la, lb) = (a.lambda, b.lambda);
    let r4 = a.r2 * b.r2;
    let e_x = e_x_11_with_r4(la, lb, r4);
    let e_zv = e_z(la, lb);
    let skr = a.p_s
        * b.p_s
        * (keep_weight(la, lb) * (1.0 - binary_entropy(e_x)?)
            - (1.0 + la * lb) * ec.f * binary_entropy(e_zv)?);
    Ok(MetricsRecord {
        q_z: q_z(la, lb, a.p_s, b.p_s),
        q_z_11: q_z_11(la, lb, a.p_s, b.p_s),
        e_z: e_zv,
        e_x_11: e_x,
        skr,
        skr_clamped: skr.max(0.0),
        q_z_xcheck: q_z_from_projections(la, lb, a.p_s, b.p_s),
        q_z_11_xcheck: q_z_11_from_projections(la, lb, a.p_s, b.p_s),
        e_z_xcheck: e_z_from_projections(la, lb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn figures(lambda: f64, p_s: f64, r2: f64) -> NoiseFigures {
        NoiseFigures {
            eta: p_s,
            lambda,
            p_s,
            r2,
        }
    }

    #[test]
    fn projection_examples() {
        use BellState::*;
        use InputPair::*;
        assert_eq!(closed_form_projection(HH, PsiPlus, 0.0, 0.0, 1.0), 0.0);
        assert_eq!(closed_form_projection(HV, PsiPlus, 0.0, 0.0, 1.0), 0.5);
        assert_relative_eq!(
            closed_form_projection(HH, PsiMinus, 0.2, 0.1, 1.0),
            0.07,
            max_relative = 1e-14
        );
        let r2 = (-0.09f64).exp();
        let expected = (1.0 + 0.8 * 0.9 * r2 * r2) / 4.0;
        assert_eq!(closed_form_projection(DD, PsiPlus, 0.2, 0.1, r2), expected);
        assert_eq!(closed_form_projection(AD, PsiMinus, 0.2, 0.1, r2), expected);
    }

    #[test]
    fn q_z_examples() {
        assert_eq!(q_z(0.0, 0.0, 1.0, 1.0), 1.0);
        assert_relative_eq!(q_z(0.0, 0.0, 0.1, 0.1), 0.01, max_relative = 1e-15);
        assert_eq!(q_z(1.0, 1.0, 1.0, 1.0), 2.0);
    }

    #[test]
    fn q_z_definitional_examples() {
        assert_eq!(q_z_from_projections(0.0, 0.0, 1.0, 1.0), 1.0);
        assert_eq!(q_z_from_projections(1.0, 1.0, 1.0, 1.0), 0.75);
        assert_relative_eq!(
            q_z_from_projections(0.2, 0.1, 1.0, 1.0),
            0.93,
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_z_11_examples() {
        assert_eq!(q_z_11(0.0, 0.0, 1.0, 1.0), 2.0);
        assert_eq!(q_z_11(1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(q_z_11_from_projections(0.0, 0.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn e_z_examples() {
        assert_eq!(e_z(0.0, 0.0), 0.0);
        assert_eq!(e_z(1.0, 1.0), 0.25);
        assert_relative_eq!(
            e_z_from_projections(1.0, 1.0),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_eq!(e_z_from_projections(0.0, 0.0), 0.0);
    }

    #[test]
    fn e_x_examples() {
        assert_eq!(e_x_11(0.0, 0.0, 1.0), 0.0);
        for (lb, r2) in [(0.0, 1.0), (0.4, 0.3), (1.0, 0.0)] {
            assert_eq!(e_x_11(1.0, lb, r2), 0.5);
        }
        // r̄⁴ = exp(-0.18) at σ = 0.3
        assert_relative_eq!(
            e_x_11(0.0, 0.0, (-0.09f64).exp()),
            0.082_364_894_294_363_99,
            max_relative = 1e-13
        );
        assert!((e_x_11_from_projections(0.2, 0.1, 0.8) - e_x_11(0.2, 0.1, 0.8)).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            0.499_915_958_164_528,
            max_relative = 1e-14
        );
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn error_correction_config() {
        assert_eq!(ErrorCorrectionConfig::default().f(), 1.0);
        assert!(ErrorCorrectionConfig::new(0.9).is_err());
        assert_eq!(ErrorCorrectionConfig::new(1.16).unwrap().f(), 1.16);
    }

    #[test]
    fn key_rate_forced_values() {
        let ideal = NoiseFigures::IDEAL;
        let rec = secret_key_rate(&ideal, &ideal, &ErrorCorrectionConfig::default()).unwrap();
        assert_eq!(rec.skr, 2.0);
        assert_eq!(rec.skr_clamped, 2.0);
        assert_eq!(rec.e_z, 0.0);
        assert_eq!(rec.e_x_11, 0.0);
        assert_eq!(rec.e_z_xcheck, 0.0);

        let lossy = figures(0.0, 0.1, 1.0);
        let rec = secret_key_rate(&lossy, &lossy, &ErrorCorrectionConfig::default()).unwrap();
        assert_relative_eq!(rec.skr, 0.02, max_relative = 1e-15);
    }

    #[test]
    fn key_rate_can_go_negative() {
        let noisy = figures(0.6, 0.5, 0.9);
        let rec = secret_key_rate(&noisy, &noisy, &ErrorCorrectionConfig::default()).unwrap();
        assert!(rec.skr < 0.0);
        assert_eq!(rec.skr_clamped, 0.0);
    }

    #[test]
    fn key_rate_rejects_bad_figures() {
        let bad = figures(1.2, 0.5, 0.9);
        let err = secret_key_rate(
            &NoiseFigures::IDEAL,
            &bad,
            &ErrorCorrectionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Domain {
                name: "lambda_b",
                ..
            }
        ));
    }
}
