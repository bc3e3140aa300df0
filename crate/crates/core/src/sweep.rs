//! Grid evaluation over distance, thermal noise and phase noise, plus the
//! secure-distance cutoff search.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{
    self, ChannelParams, NoiseFigures, DEFAULT_ALPHA_DB_PER_KM, MIN_TRANSMISSIVITY,
};
use crate::error::{Error, Result};
use crate::metrics::{self, ErrorCorrectionConfig, MetricsRecord};

pub const CUTOFF_TOLERANCE_KM: f64 = 0.01;
pub const CUTOFF_MAX_ITERATIONS: usize = 60;

/// How the total Alice-to-Bob distance is divided between the two arms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ArmSplit {
    /// Each arm is half of the total distance.
    #[default]
    Symmetric,
    /// Fixed arm lengths; the total distance is their sum.
    Explicit { a_km: f64, b_km: f64 },
}

impl ArmSplit {
    /// Arm lengths `(a, b)` for a total distance. Explicit splits ignore it.
    pub fn arm_lengths(&self, total_km: f64) -> (f64, f64) {
        match *self {
            ArmSplit::Symmetric => (total_km / 2.0, total_km / 2.0),
            ArmSplit::Explicit { a_km, b_km } => (a_km, b_km),
        }
    }

    pub fn convention(&self) -> &'static str {
        match self {
            ArmSplit::Symmetric => "symmetric: each arm carries L/2",
            ArmSplit::Explicit { .. } => "explicit: fixed per-arm lengths, L = a + b",
        }
    }
}

impl fmt::Display for ArmSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmSplit::Symmetric => f.write_str("symmetric"),
            ArmSplit::Explicit { a_km, b_km } => write!(f, "a={a_km},b={b_km}"),
        }
    }
}

impl FromStr for ArmSplit {
    type Err = Error;

    /// Accepts `symmetric` or `a=KM,b=KM`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "symmetric" {
            return Ok(ArmSplit::Symmetric);
        }
        let bad = || {
            Error::config(
                "arm_split",
                format!("expected `symmetric` or `a=KM,b=KM`, got `{s}`"),
            )
        };
        let (mut a, mut b) = (None, None);
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    "arm_split",
                    format!("arm length {v} must be finite and >= 0"),
                ));
            }
            match k.trim() {
                "a" if a.is_none() => a = Some(v),
                "b" if b.is_none() => b = Some(v),
                _ => return Err(bad()),
            }
        }
        match (a, b) {
            (Some(a_km), Some(b_km)) => Ok(ArmSplit::Explicit { a_km, b_km }),
            _ => Err(bad()),
        }
    }
}

/// Grid specification for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub distances_km: Vec<f64>,
    pub n_th_values: Vec<f64>,
    pub sigma_theta_values: Vec<f64>,
    pub alpha_db_per_km: f64,
    pub f: f64,
    pub arm_split: ArmSplit,
}

impl Default for SweepConfig {
    /// 0-300 km in 1 km steps over the thermal and phase noise levels of the
    /// reference figures. The original plotting grid is not published; this
    /// one covers the captioned ranges.
    fn default() -> Self {
        Self {
            distances_km: (0..=300).map(f64::from).collect(),
            n_th_values: vec![0.0, 0.001, 0.01, 0.05, 0.1],
            sigma_theta_values: vec![0.0, 0.1, 0.2, 0.3],
            alpha_db_per_km: DEFAULT_ALPHA_DB_PER_KM,
            f: 1.0,
            arm_split: ArmSplit::Symmetric,
        }
    }
}

fn check_list(key: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::config(
            key,
            format!("{v} is not a finite value >= 0"),
        ));
    }
    Ok(())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_list("distances_km", &self.distances_km)?;
        check_list("n_th_values", &self.n_th_values)?;
        check_list("sigma_theta_values", &self.sigma_theta_values)?;
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km >= 0.0) {
            return Err(Error::config("alpha_db_per_km", "must be finite and >= 0"));
        }
        ErrorCorrectionConfig::new(self.f).map_err(|e| Error::config("f", e.to_string()))?;
        if let ArmSplit::Explicit { a_km, b_km } = self.arm_split {
            let total = a_km + b_km;
            if self.distances_km.iter().any(|&l| (l - total).abs() > 1e-9) {
                return Err(Error::config(
                    "distances_km",
                    format!("with an explicit arm split the only distance is a + b = {total}"),
                ));
            }
        }
        for &l in &self.distances_km {
            let (a, b) = self.arm_split.arm_lengths(l);
            let eta = channel::transmissivity(a.max(b), self.alpha_db_per_km)?;
            if eta < MIN_TRANSMISSIVITY {
                return Err(Error::config(
                    "distances_km",
                    format!("{l} km drives arm transmissivity below {MIN_TRANSMISSIVITY:e}"),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.distances_km.len() * self.n_th_values.len() * self.sigma_theta_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row order: distance outermost, then thermal noise,
    /// then phase noise, each in input order.
    pub fn grid(&self) -> Vec<(f64, f64, f64)> {
        let mut points = Vec::with_capacity(self.len());
        for &l in &self.distances_km {
            for &n in &self.n_th_values {
                for &s in &self.sigma_theta_values {
                    points.push((l, n, s));
                }
            }
        }
        points
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub l_km: f64,
    pub n_th: f64,
    pub sigma_theta: f64,
    pub arm_a: NoiseFigures,
    pub arm_b: NoiseFigures,
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    pub config: SweepConfig,
    pub arm_split_convention: &'static str,
    pub version: &'static str,
    pub grid_note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// Evaluates a single operating point with a shared phase-noise level.
pub fn evaluate_point(
    l_km: f64,
    n_th: f64,
    sigma_theta: f64,
    alpha_db_per_km: f64,
    f: f64,
    arm_split: ArmSplit,
) -> Result<SweepRow> {
    let (len_a, len_b) = arm_split.arm_lengths(l_km);
    let total = match arm_split {
        ArmSplit::Symmetric => l_km,
        ArmSplit::Explicit { a_km, b_km } => a_km + b_km,
    };
    let arm_a = channel::noise_figures(&ChannelParams::with_alpha(
        n_th,
        sigma_theta,
        len_a,
        alpha_db_per_km,
    )?)?;
    let arm_b = channel::noise_figures(&ChannelParams::with_alpha(
        n_th,
        sigma_theta,
        len_b,
        alpha_db_per_km,
    )?)?;
    let ec = ErrorCorrectionConfig::new(f)?;
    Ok(SweepRow {
        l_km: total,
        n_th,
        sigma_theta,
        arm_a,
        arm_b,
        metrics: metrics::secret_key_rate(&arm_a, &arm_b, &ec)?,
    })
}

fn metadata(config: &SweepConfig) -> SweepMetadata {
    SweepMetadata {
        config: config.clone(),
        arm_split_convention: config.arm_split.convention(),
        version: env!("CARGO_PKG_VERSION"),
        grid_note: "default grid is a reconstruction; the reference plotting grid is unpublished",
    }
}

/// Evaluates every grid point on the global rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let rows = config
        .grid()
        .into_par_iter()
        .map(|(l, n, s)| {
            evaluate_point(l, n, s, config.alpha_db_per_km, config.f, config.arm_split)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        metadata: metadata(config),
    })
}

/// [`run_sweep`] on a dedicated pool with a fixed worker count.
pub fn run_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| run_sweep(config))
}

/// Serial reference evaluation, used to check schedule independence.
pub fn run_sweep_serial(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let rows = config
        .grid()
        .into_iter()
        .map(|(l, n, s)| {
            evaluate_point(l, n, s, config.alpha_db_per_km, config.f, config.arm_split)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        metadata: metadata(config),
    })
}

/// Total distance at which the (unclamped) key rate changes sign, for
/// symmetric arms.
///
/// Returns `Some(0.0)` when the rate is already non-positive at zero
/// distance and `None` when it stays positive up to `l_max_km`.
pub fn find_cutoff_distance(
    n_th: f64,
    sigma_theta: f64,
    alpha_db_per_km: f64,
    f: f64,
    l_max_km: f64,
) -> Result<Option<f64>> {
    if !(l_max_km.is_finite() && l_max_km > 0.0) {
        return Err(Error::domain("l_max_km", l_max_km, "a finite value > 0"));
    }
    let eta_far = channel::transmissivity(l_max_km / 2.0, alpha_db_per_km)?;
    if eta_far < MIN_TRANSMISSIVITY {
        return Err(Error::domain(
            "l_max_km",
            l_max_km,
            "a distance keeping arm transmissivity >= 1e-12",
        ));
    }
    let rate = |l: f64| {
        evaluate_point(
            l,
            n_th,
            sigma_theta,
            alpha_db_per_km,
            f,
            ArmSplit::Symmetric,
        )
        .map(|r| r.metrics.skr)
    };
    if rate(0.0)? <= 0.0 {
        return Ok(Some(0.0));
    }
    if rate(l_max_km)? > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, l_max_km);
    for _ in 0..CUTOFF_MAX_ITERATIONS {
        if hi - lo <= CUTOFF_TOLERANCE_KM {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
