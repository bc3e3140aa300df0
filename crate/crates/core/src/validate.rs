//! Consistency suites run by `mdiqkd validate`.
//!
//! Asserted suites compare each closed form with an independent evaluation
//! and fail above their tolerance. The compact gain and Z-error expressions
//! are not reducible from their defining sums; those gaps are measured and
//! reported, never asserted.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel;
use crate::error::Result;
use crate::metrics;
use crate::quantum::{self, CMatrix, DensityMatrix, Polarization};

pub const TABLE_TOL: f64 = 1e-12;
pub const COHERENCE_TOL: f64 = 1e-9;
pub const COHERENCE_IMAG_TOL: f64 = 1e-12;
pub const THERMAL_CHAIN_TOL: f64 = 1e-12;
pub const CHANNEL_PATH_TOL: f64 = 1e-9;
pub const E_X_TOL: f64 = 1e-12;

pub const CHANNEL_PATH_SAMPLES: usize = 1000;
pub const CHANNEL_PATH_SEED: u64 = 0x6d64_6971_6b64;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            max_deviation: 0.0,
            tolerance,
            first_failure: None,
        }
    }

    fn record(&mut self, deviation: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN compares false, so fold it in explicitly.
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
        if self.first_failure.is_none() && (deviation.is_nan() || deviation > self.tolerance) {
            self.first_failure = Some(format!("{} (deviation {deviation:e})", case()));
        }
    }

    pub fn passed(&self) -> bool {
        self.first_failure.is_none() && self.cases > 0
    }
}

/// A compact expression next to the value of its defining sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub quantity: &'static str,
    pub point: &'static str,
    pub compact: f64,
    pub definitional: f64,
}

impl GapReport {
    pub fn gap(&self) -> f64 {
        self.compact - self.definitional
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
    pub gaps: Vec<GapReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &str)> {
        self.suites
            .iter()
            .find_map(|s| s.first_failure.as_deref().map(|f| (s.name, f)))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "asserted suites:")?;
        for s in &self.suites {
            writeln!(
                f,
                "  [{}] {:<44} cases={:<6} max_dev={:.3e} tol={:.0e}",
                if s.passed() { "PASS" } else { "FAIL" },
                s.name,
                s.cases,
                s.max_deviation,
                s.tolerance
            )?;
            if let Some(fail) = &s.first_failure {
                writeln!(f, "         first failure: {fail}")?;
            }
        }
        writeln!(
            f,
            "reported gaps (compact form vs defining sum, not asserted):"
        )?;
        for g in &self.gaps {
            writeln!(
                f,
                "  {:<8} at {:<36} compact={} definitional={} gap={}",
                g.quantity,
                g.point,
                g.compact,
                g.definitional,
                g.gap()
            )?;
        }
        Ok(())
    }
}

fn unit_grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

/// Closed-form projection table against prepare → channel → tensor → project
/// on a 10×10×10 grid of `(λ_A, λ_B, σ) ∈ [0, 1]³`.
pub fn projection_table_suite() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("projection table vs density-matrix oracle", TABLE_TOL);
    for la in unit_grid(10) {
        for lb in unit_grid(10) {
            for sigma in unit_grid(10) {
                let r2 = channel::dephasing_r2(sigma)?;
                let oracle = quantum::projection_table_oracle(la, lb, r2)?;
                let closed = metrics::closed_form_table(la, lb, r2);
                for (pair, bell, v) in oracle.iter() {
                    suite.record((v - closed.get(pair, bell)).abs(), || {
                        format!("{pair}/{bell} at lambda_a={la}, lambda_b={lb}, sigma={sigma}")
                    });
                }
            }
        }
    }
    Ok(suite)
}

/// Quadrature of the wrapped-normal mean resultant against `exp(-σ²/2)`.
pub fn coherence_suite() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("coherence factor by quadrature", COHERENCE_TOL);
    for i in 1..=20 {
        let sigma = 0.05 * i as f64;
        let z = channel::mean_resultant(sigma)?;
        let expected = (-sigma * sigma / 2.0).exp();
        let imag_excess = (z.im.abs() - COHERENCE_IMAG_TOL).max(0.0);
        // An imaginary part above its own bound is pushed past the tolerance.
        let deviation = if imag_excess > 0.0 {
            f64::INFINITY
        } else {
            (z.re - expected).abs()
        };
        suite.record(deviation, || format!("sigma={sigma}: got {z}"));
    }
    Ok(suite)
}

/// Probe states for the thermal-loss chain: the four encoding states, a
/// circularly polarized state and a mixed state with complex coherence.
pub fn probe_states() -> Result<Vec<DensityMatrix>> {
    let mut states: Vec<DensityMatrix> = Polarization::ALL
        .into_iter()
        .map(quantum::prepare)
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let circ = [Complex64::new(s, 0.0), Complex64::new(0.0, s)];
    states.push(DensityMatrix::new(CMatrix::from_fn(2, 2, |i, j| {
        circ[i] * circ[j].conj()
    }))?);
    states.push(DensityMatrix::new(CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.7, 0.0),
            Complex64::new(0.1, -0.2),
            Complex64::new(0.1, 0.2),
            Complex64::new(0.3, 0.0),
        ],
    ))?);
    Ok(states)
}

/// Normalizes the unnormalized beamsplitter output and compares it with the
/// depolarized form, and its trace with the success probability, on a
/// 100×100 grid of `N ∈ [0, 1]`, `η ∈ [0.01, 1]`.
pub fn thermal_chain_suite() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("thermal-loss normalization chain", THERMAL_CHAIN_TOL);
    let states = probe_states()?;
    for i in 0..100 {
        let n_th = i as f64 / 99.0;
        for j in 0..100 {
            let eta = (j + 1) as f64 / 100.0;
            let lambda = channel::depolarizing_lambda(n_th, eta)?;
            let p_s = channel::success_probability(n_th, eta)?;
            for rho in &states {
                let raw = quantum::thermal_loss_unnormalized(rho, n_th, eta)?;
                let trace = raw.trace();
                let normalized = &raw / trace;
                let expected = rho.matrix() * Complex64::new(1.0 - lambda, 0.0)
                    + CMatrix::identity(2, 2) * Complex64::new(lambda / 2.0, 0.0);
                let dev = quantum::max_abs_diff(&normalized, &expected).max((trace - p_s).norm());
                suite.record(dev, || format!("n_th={n_th}, eta={eta}"));
            }
        }
    }
    Ok(suite)
}

/// Uniformly distributed qubit state (Bloch ball), with pure states mixed in.
pub fn random_qubit_state<R: Rng>(rng: &mut R) -> Result<DensityMatrix> {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let radius: f64 = if rng.gen_bool(0.25) {
        1.0
    } else {
        rng.gen::<f64>().cbrt()
    };
    let rho_xy = (1.0 - z * z).sqrt();
    let (x, y, z) = (
        radius * rho_xy * phi.cos(),
        radius * rho_xy * phi.sin(),
        radius * z,
    );
    DensityMatrix::new(CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        ],
    ))
}

/// Pauli-mixture/quadrature channel path against the direct map on random
/// states and parameters.
pub fn channel_path_suite() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new(
        "Kraus/quadrature path vs direct channel map",
        CHANNEL_PATH_TOL,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(CHANNEL_PATH_SEED);
    for k in 0..CHANNEL_PATH_SAMPLES {
        let rho = random_qubit_state(&mut rng)?;
        let lambda: f64 = rng.gen_range(0.0..=1.0);
        let sigma: f64 = if k % 50 == 0 {
            0.0
        } else {
            rng.gen_range(0.0..1.5)
        };
        let direct = quantum::apply_combined_channel(&rho, lambda, channel::dephasing_r2(sigma)?)?;
        let kraus = quantum::apply_channel_kraus_path(&rho, lambda, sigma)?;
        suite.record(direct.max_deviation(&kraus), || {
            format!("sample {k}: lambda={lambda}, sigma={sigma}")
        });
    }
    Ok(suite)
}

/// X-basis error rate against its defining ratio on the 10×10×10 grid.
pub fn e_x_suite() -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("X-basis error rate vs defining ratio", E_X_TOL);
    for la in unit_grid(10) {
        for lb in unit_grid(10) {
            for sigma in unit_grid(10) {
                let r2 = channel::dephasing_r2(sigma)?;
                let dev = (metrics::e_x_11(la, lb, r2)
                    - metrics::e_x_11_from_projections(la, lb, r2))
                .abs();
                suite.record(dev, || {
                    format!("lambda_a={la}, lambda_b={lb}, sigma={sigma}")
                });
            }
        }
    }
    Ok(suite)
}

/// Compact gain and Z-error expressions next to their defining sums.
pub fn definitional_gaps() -> Vec<GapReport> {
    vec![
        GapReport {
            quantity: "q_z",
            point: "lambda_a=lambda_b=1, p_s=1",
            compact: metrics::q_z(1.0, 1.0, 1.0, 1.0),
            definitional: metrics::q_z_from_projections(1.0, 1.0, 1.0, 1.0),
        },
        GapReport {
            quantity: "q_z",
            point: "lambda_a=0.2, lambda_b=0.1, p_s=1",
            compact: metrics::q_z(0.2, 0.1, 1.0, 1.0),
            definitional: metrics::q_z_from_projections(0.2, 0.1, 1.0, 1.0),
        },
        GapReport {
            quantity: "q_z_11",
            point: "lambda_a=lambda_b=0, p_s=1",
            compact: metrics::q_z_11(0.0, 0.0, 1.0, 1.0),
            definitional: metrics::q_z_11_from_projections(0.0, 0.0, 1.0, 1.0),
        },
        GapReport {
            quantity: "q_z_11",
            point: "lambda_a=lambda_b=1, p_s=1",
            compact: metrics::q_z_11(1.0, 1.0, 1.0, 1.0),
            definitional: metrics::q_z_11_from_projections(1.0, 1.0, 1.0, 1.0),
        },
        GapReport {
            quantity: "e_z",
            point: "lambda_a=lambda_b=1",
            compact: metrics::e_z(1.0, 1.0),
            definitional: metrics::e_z_from_projections(1.0, 1.0),
        },
        GapReport {
            quantity: "e_z",
            point: "lambda_a=0.2, lambda_b=0.1",
            compact: metrics::e_z(0.2, 0.1),
            definitional: metrics::e_z_from_projections(0.2, 0.1),
        },
    ]
}

pub fn run_validation() -> Result<ValidationReport> {
    Ok(ValidationReport {
        suites: vec![
            projection_table_suite()?,
            coherence_suite()?,
            thermal_chain_suite()?,
            channel_path_suite()?,
            e_x_suite()?,
        ],
        gaps: definitional_gaps(),
    })
}
