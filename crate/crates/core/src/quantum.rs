//! Explicit density-matrix evaluation of the two-arm measurement.
//!
//! Everything here works on concrete 2×2 and 4×4 complex matrices. It is the
//! reference path the closed-form projection table in [`crate::metrics`] is
//! validated against.
//!
//! Basis ordering: single qubit `{|H⟩, |V⟩}`; two qubits
//! `{|HH⟩, |HV⟩, |VH⟩, |VV⟩}` with Alice's qubit as the left tensor factor.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::channel::{thermal_gamma, thermal_weight, wrapped_normal_unchecked};
use crate::error::{Error, Result};
use crate::quadrature;

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A validated density matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension {
                expected: if dim < 3 { 2 } else { 4 },
                actual: dim,
            });
        }
        if m.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: m.ncols(),
            });
        }
        if let Some(v) = m.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState(format!("non-finite entry {v}")));
        }
        let herm = hermitian_deviation(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |ρ_ij - conj ρ_ji| = {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let rho = Self { m };
        let min_eig = rho.min_eigenvalue();
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (minimum eigenvalue {min_eig:e})"
            )));
        }
        Ok(rho)
    }

    /// Rank-one projector onto a normalized state vector.
    fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim) * real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // The eigen solver reads one triangle only; feed it the exact Hermitian part.
        let h = (&self.m + self.m.adjoint()) * real(0.5);
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise modulus difference to another matrix of equal shape.
    pub fn max_deviation(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Polarization states sent by Alice or Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
    /// Diagonal, `(|H⟩ + |V⟩)/√2`.
    D,
    /// Anti-diagonal, `(|H⟩ - |V⟩)/√2`.
    A,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [Self::H, Self::V, Self::D, Self::A];

    pub fn vector(self) -> [Complex64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Self::H => [ONE, ZERO],
            Self::V => [ZERO, ONE],
            Self::D => [real(s), real(s)],
            Self::A => [real(s), real(-s)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 2] = [Self::PsiPlus, Self::PsiMinus];

    /// `(|HV⟩ ± |VH⟩)/√2` in the `{HH, HV, VH, VV}` basis.
    pub fn vector(self) -> [Complex64; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sign = match self {
            Self::PsiPlus => 1.0,
            Self::PsiMinus => -1.0,
        };
        [ZERO, real(s), real(sign * s), ZERO]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PsiPlus => "psi+",
            Self::PsiMinus => "psi-",
        })
    }
}

/// Input combinations covered by the projection table. The first letter is
/// Alice's state, the second Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputPair {
    HH,
    VV,
    HV,
    VH,
    DD,
    AA,
    DA,
    AD,
}

impl InputPair {
    pub const ALL: [InputPair; 8] = [
        Self::HH,
        Self::VV,
        Self::HV,
        Self::VH,
        Self::DD,
        Self::AA,
        Self::DA,
        Self::AD,
    ];

    pub fn alice(self) -> Polarization {
        self.split().0
    }

    pub fn bob(self) -> Polarization {
        self.split().1
    }

    fn split(self) -> (Polarization, Polarization) {
        use Polarization::*;
        match self {
            Self::HH => (H, H),
            Self::VV => (V, V),
            Self::HV => (H, V),
            Self::VH => (V, H),
            Self::DD => (D, D),
            Self::AA => (A, A),
            Self::DA => (D, A),
            Self::AD => (A, D),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::HH => "HH",
            Self::VV => "VV",
            Self::HV => "HV",
            Self::VH => "VH",
            Self::DD => "DD",
            Self::AA => "AA",
            Self::DA => "DA",
            Self::AD => "AD",
        }
    }
}

impl fmt::Display for InputPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InputPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPair(s.to_string()))
    }
}

/// Projection probabilities for every tabulated input pair and Bell state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionTable {
    values: [[f64; 2]; 8],
}

impl ProjectionTable {
    pub fn from_fn<F>(mut f: F) -> Result<Self>
    where
        F: FnMut(InputPair, BellState) -> Result<f64>,
    {
        let mut values = [[0.0; 2]; 8];
        for pair in InputPair::ALL {
            for bell in BellState::ALL {
                values[pair.index()][bell.index()] = f(pair, bell)?;
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, pair: InputPair, bell: BellState) -> f64 {
        self.values[pair.index()][bell.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (InputPair, BellState, f64)> + '_ {
        InputPair::ALL
            .into_iter()
            .flat_map(|p| BellState::ALL.into_iter().map(move |b| (p, b)))
            .map(|(p, b)| (p, b, self.get(p, b)))
    }

    pub fn max_deviation(&self, other: &ProjectionTable) -> f64 {
        self.iter()
            .map(|(p, b, v)| (v - other.get(p, b)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_fraction(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "0 <= value <= 1"))
    }
}

fn require_dim(rho: &DensityMatrix, dim: usize) -> Result<()> {
    if rho.dim() == dim {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: dim,
            actual: rho.dim(),
        })
    }
}

pub fn prepare(input: Polarization) -> DensityMatrix {
    DensityMatrix::projector(&input.vector())
}

/// Combined thermal-loss and phase-noise map on one arm:
/// `(1-λ)·D(ρ) + (λ/2)·I`, where `D` scales the off-diagonal entries by `r̄²`.
pub fn apply_combined_channel(rho: &DensityMatrix, lambda: f64, r2: f64) -> Result<DensityMatrix> {
    require_dim(rho, 2)?;
    check_fraction("lambda", lambda)?;
    check_fraction("r2", r2)?;
    let m = CMatrix::from_fn(2, 2, |i, j| {
        let coherent = if i == j {
            rho.m[(i, j)]
        } else {
            rho.m[(i, j)] * r2
        };
        let mixed = if i == j { real(lambda / 2.0) } else { ZERO };
        coherent * (1.0 - lambda) + mixed
    });
    DensityMatrix::new(m)
}

/// Same channel evaluated independently: depolarization as a Pauli-operator
/// mixture, dephasing as a quadrature over random phase rotations.
///
/// Each polarization mode picks up its own wrapped-normal phase, so the
/// relative phase coherence is `r̄·r̄ = r̄²`. A zero `sigma_theta` applies no
/// rotation.
pub fn apply_channel_kraus_path(
    rho: &DensityMatrix,
    lambda: f64,
    sigma_theta: f64,
) -> Result<DensityMatrix> {
    require_dim(rho, 2)?;
    check_fraction("lambda", lambda)?;
    if !(sigma_theta.is_finite() && sigma_theta >= 0.0) {
        return Err(Error::domain(
            "sigma_theta",
            sigma_theta,
            "a finite value >= 0",
        ));
    }
    let mut m = rho.m.clone();
    if sigma_theta > 0.0 {
        let kicks: Vec<(f64, f64)> = quadrature::phase_points_for(sigma_theta)
            .into_iter()
            .map(|(theta, w)| (theta, w * wrapped_normal_unchecked(theta, sigma_theta)))
            .collect();
        for mode in 0..2 {
            m = random_mode_rotation(&m, mode, &kicks);
        }
    }
    m = depolarize_pauli(&m, lambda);
    DensityMatrix::new(m)
}

/// `Σ w·U ρ U†` with `U` a phase `θ` on one mode, over `(θ, w)` pairs.
fn random_mode_rotation(rho: &CMatrix, mode: usize, kicks: &[(f64, f64)]) -> CMatrix {
    let rho = Matrix2::from_fn(|i, j| rho[(i, j)]);
    let mut acc = Matrix2::<Complex64>::zeros();
    for &(theta, weight) in kicks {
        let mut u = Matrix2::<Complex64>::identity();
        u[(mode, mode)] = Complex64::cis(theta);
        acc += (u * rho * u.adjoint()) * real(weight);
    }
    CMatrix::from_fn(2, 2, |i, j| acc[(i, j)])
}

fn pauli_set() -> [CMatrix; 3] {
    let i = Complex64::i();
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// `(1 - 3λ/4)·ρ + (λ/4)·(XρX + YρY + ZρZ)`.
fn depolarize_pauli(rho: &CMatrix, lambda: f64) -> CMatrix {
    let mut out = rho * real(1.0 - 0.75 * lambda);
    for p in pauli_set() {
        out += (&p * rho * p.adjoint()) * real(0.25 * lambda);
    }
    out
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    require_dim(a, 2)?;
    require_dim(b, 2)?;
    DensityMatrix::new(a.m.kronecker(&b.m))
}

/// `Tr(ρ |ψ⟩⟨ψ|)` for a two-qubit state.
pub fn project_bell(rho: &DensityMatrix, bell: BellState) -> Result<f64> {
    require_dim(rho, 4)?;
    let v = bell.vector();
    let mut acc = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            acc += v[i].conj() * rho.m[(i, j)] * v[j];
        }
    }
    if acc.im.abs() > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!(
            "projection has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Joint state arriving at the relay for one input pair.
pub fn joint_state(
    pair: InputPair,
    lambda_a: f64,
    lambda_b: f64,
    r2_a: f64,
    r2_b: f64,
) -> Result<DensityMatrix> {
    let a = apply_combined_channel(&prepare(pair.alice()), lambda_a, r2_a)?;
    let b = apply_combined_channel(&prepare(pair.bob()), lambda_b, r2_b)?;
    tensor(&a, &b)
}

/// Every tabulated projection probability, computed by
/// prepare → channel → tensor → project with a shared coherence factor.
pub fn projection_table_oracle(lambda_a: f64, lambda_b: f64, r2: f64) -> Result<ProjectionTable> {
    ProjectionTable::from_fn(|pair, bell| {
        let rho = joint_state(pair, lambda_a, lambda_b, r2, r2)?;
        project_bell(&rho, bell)
    })
}

/// Unnormalized single-photon output of the thermal-loss beamsplitter:
/// `(η/γ⁴)·ρ + (N(1+N)(1-η)²/γ⁴)·I`. Its trace is the success probability.
pub fn thermal_loss_unnormalized(rho: &DensityMatrix, n_th: f64, eta: f64) -> Result<CMatrix> {
    require_dim(rho, 2)?;
    if !(n_th.is_finite() && n_th >= 0.0) {
        return Err(Error::domain("n_th", n_th, "a finite value >= 0"));
    }
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain("eta", eta, "0 < eta <= 1"));
    }
    let g4 = thermal_gamma(n_th, eta).powi(4);
    let identity = CMatrix::identity(2, 2) * real(thermal_weight(n_th, eta) / g4);
    Ok(&rho.m * real(eta / g4) + identity)
}
