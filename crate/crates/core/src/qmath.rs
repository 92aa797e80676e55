//! Exact density-matrix machinery and the closed-form fidelity curves.
//!
//! The matrix path (`dephase` -> `werner_state` -> `teleport_channel` ->
//! `fidelity_to_pure`) is the ground truth; every closed form in this module
//! is tested against it. Memories are modeled as dephasing channels that
//! multiply density-matrix off-diagonals by `exp(-gamma * t)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for Hermiticity / trace / normalization checks.
pub const STATE_TOL: f64 = 1e-12;
/// Eigenvalues of a valid density matrix may dip this far below zero.
pub const PSD_TOL: f64 = 1e-10;

/// A normalized single-qubit pure state `alpha |0> + beta |1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl PureQubit {
    /// Builds a qubit, requiring `|alpha|^2 + |beta|^2 = 1` within 1e-12.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { alpha, beta })
    }

    /// `|0>`.
    pub fn zero() -> Self {
        Self { alpha: Complex64::ONE, beta: Complex64::ZERO }
    }

    /// `|1>`.
    pub fn one() -> Self {
        Self { alpha: Complex64::ZERO, beta: Complex64::ONE }
    }

    /// `|+> = (|0> + |1>)/sqrt(2)`, the worked example throughout.
    pub fn plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: h }
    }

    /// Haar-random qubit; used by randomized cross-checks.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let g = |rng: &mut R| {
                // Box-Muller pair.
                let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.random();
                let r = (-2.0 * u1.ln()).sqrt();
                (r * (2.0 * std::f64::consts::PI * u2).cos(), r * (2.0 * std::f64::consts::PI * u2).sin())
            };
            let (a_re, a_im) = g(rng);
            let (b_re, b_im) = g(rng);
            let alpha = Complex64::new(a_re, a_im);
            let beta = Complex64::new(b_re, b_im);
            let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
            if norm > 1e-6 {
                return Self { alpha: alpha / norm, beta: beta / norm };
            }
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `2 |alpha|^2 |beta|^2`: the decaying weight of the request curve.
    pub fn coherence_weight(&self) -> f64 {
        2.0 * self.alpha.norm_sqr() * self.beta.norm_sqr()
    }

    /// `|alpha|^4 + |beta|^4`: the long-time floor of the request curve.
    pub fn fidelity_floor(&self) -> f64 {
        1.0 - self.coherence_weight()
    }

    /// Projector `|q><q|` as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let a = self.alpha;
        let b = self.beta;
        let data = DMatrix::from_row_slice(
            2,
            2,
            &[a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()],
        );
        DensityMatrix { data }
    }

    /// Underlying state vector, for fidelity computations.
    pub fn state(&self) -> PureState {
        PureState { amp: DVector::from_vec(vec![self.alpha, self.beta]) }
    }
}

/// A normalized pure state of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amp: DVector<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amp: DVector::from_vec(amplitudes) })
    }

    /// `|Phi+> = (|00> + |11>)/sqrt(2)`.
    pub fn bell_phi_plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amp: DVector::from_vec(vec![h, Complex64::ZERO, Complex64::ZERO, h]) }
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amp
    }
}

/// Dephasing rate of a memory platform (1/time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    gamma: f64,
}

impl DephasingParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dephasing rate must be finite and >= 0, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// A 2x2 or 4x4 density matrix: Hermitian, trace one, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates the invariants and wraps the matrix.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let dim = data.nrows();
        if data.ncols() != dim || (dim != 2 && dim != 4) {
            return Err(Error::DimensionMismatch { expected: 2, got: data.ncols().max(dim) });
        }
        let mut dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                dev = dev.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace: Complex64 = (0..dim).map(|i| data[(i, i)]).sum();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        let min_ev = data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min_ev < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_ev });
        }
        Ok(Self { data })
    }

    /// Maximally mixed state `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
        let data = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Real eigenvalue spectrum (ascending order not guaranteed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.data.clone().symmetric_eigenvalues().iter().copied().collect()
    }
}

/// Applies dephasing for time `t`: off-diagonals decay by `exp(-gamma t)`,
/// diagonals are untouched.
pub fn dephase(rho: &DensityMatrix, params: &DephasingParams, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    let damp = Complex64::new((-params.gamma() * t).exp(), 0.0);
    let mut data = rho.data.clone();
    data[(0, 1)] *= damp;
    data[(1, 0)] *= damp;
    DensityMatrix::new(data)
}

/// Overlap `tr(|psi><psi| rho) = <psi| rho |psi>`.
pub fn fidelity_to_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: rho.dim() });
    }
    let v = psi.amplitudes();
    let mut acc = Complex64::ZERO;
    for i in 0..psi.dim() {
        for j in 0..psi.dim() {
            acc += v[i].conj() * rho.data[(i, j)] * v[j];
        }
    }
    Ok(acc.re)
}

/// Fidelity of a qubit after `t` in a dephasing memory:
/// `|a|^4 + 2 exp(-gamma t) |a|^2 |b|^2 + |b|^4`.
pub fn single_qubit_fidelity(q: &PureQubit, params: &DephasingParams, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(q.fidelity_floor() + q.coherence_weight() * (-params.gamma() * t).exp())
}

/// Time at which the single-qubit fidelity decays to `f`.
///
/// Only defined for qubits with coherence (`alpha, beta != 0`), a strictly
/// positive rate, and `f` in the attainable range `(|a|^4 + |b|^4, 1]`.
pub fn inverse_fidelity_time(q: &PureQubit, params: &DephasingParams, f: f64) -> Result<f64> {
    let floor = q.fidelity_floor();
    let weight = q.coherence_weight();
    if weight <= STATE_TOL {
        return Err(Error::InvalidParameter(
            "degenerate qubit: a basis state never loses fidelity".into(),
        ));
    }
    if params.gamma() <= 0.0 {
        return Err(Error::InvalidParameter("no finite inverse for gamma = 0".into()));
    }
    // The open lower bound is widened by the state tolerance: closer to the
    // floor the inverse is not resolvable at double precision.
    if f <= floor + STATE_TOL || f > 1.0 {
        return Err(Error::OutOfRange { value: f, lo: floor, hi: 1.0 });
    }
    Ok((weight / (f - floor)).ln() / params.gamma())
}

/// Fidelity of a Bell pair after one half dephases for `t`:
/// `(1 + exp(-2 gamma t)) / 2`.
pub fn bell_fidelity(params: &DephasingParams, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(0.5 * (1.0 + (-2.0 * params.gamma() * t).exp()))
}

/// Werner state with fidelity `f` to `|Phi+>`:
/// `(1-f)/3 * I + (4f-1)/3 * |Phi+><Phi+|`, valid for `f` in `[1/4, 1]`.
pub fn werner_state(f: f64) -> Result<DensityMatrix> {
    if !(0.25..=1.0).contains(&f) {
        return Err(Error::OutOfRange { value: f, lo: 0.25, hi: 1.0 });
    }
    let id_coef = Complex64::new((1.0 - f) / 3.0, 0.0);
    let bell_coef = Complex64::new((4.0 * f - 1.0) / 3.0, 0.0);
    let bell = PureState::bell_phi_plus();
    let v = bell.amplitudes();
    let mut data = DMatrix::from_diagonal_element(4, 4, id_coef);
    for i in 0..4 {
        for j in 0..4 {
            data[(i, j)] += bell_coef * v[i] * v[j].conj();
        }
    }
    DensityMatrix::new(data)
}

fn pauli_x() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[
        Complex64::ZERO, Complex64::ONE,
        Complex64::ONE, Complex64::ZERO,
    ])
}

fn pauli_y_times_i() -> DMatrix<Complex64> {
    // i * sigma_y = [[0, 1], [-1, 0]]
    DMatrix::from_row_slice(2, 2, &[
        Complex64::ZERO, Complex64::ONE,
        -Complex64::ONE, Complex64::ZERO,
    ])
}

fn pauli_z() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[
        Complex64::ONE, Complex64::ZERO,
        Complex64::ZERO, -Complex64::ONE,
    ])
}

/// The four Bell states in the `U_ij` correction order:
/// `Phi+ (I), Psi+ (X), Phi- (Z), Psi- (iY)`.
fn bell_basis() -> [DVector<Complex64>; 4] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::ZERO;
    [
        DVector::from_vec(vec![h, z, z, h]),   // Phi+
        DVector::from_vec(vec![z, h, h, z]),   // Psi+
        DVector::from_vec(vec![h, z, z, -h]),  // Phi-
        DVector::from_vec(vec![z, h, -h, z]),  // Psi-
    ]
}

/// Teleportation through an arbitrary two-qubit resource state, as the linear
/// map `sum_ij <phi_ij| rho_w |phi_ij> U_ij rho U_ij^dagger` with
/// `U = {I, X, Z, iY}` matched to the Bell basis above.
pub fn teleport_channel(werner: &DensityMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if werner.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: werner.dim() });
    }
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    let corrections = [
        DMatrix::from_diagonal_element(2, 2, Complex64::ONE),
        pauli_x(),
        pauli_z(),
        pauli_y_times_i(),
    ];
    let mut out = DMatrix::from_element(2, 2, Complex64::ZERO);
    for (phi, u) in bell_basis().iter().zip(corrections.iter()) {
        // <phi| rho_w |phi>
        let mut w = Complex64::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                w += phi[i].conj() * werner.data[(i, j)] * phi[j];
            }
        }
        let term = u * &rho.data * u.adjoint();
        out += term * Complex64::new(w.re, 0.0);
    }
    DensityMatrix::new(out)
}

/// Closed-form fidelity of teleporting `q` when the request waited `t1` and
/// the EPR pair waited `t2`, both in dephasing memories with the same rate.
///
/// Equal (within 1e-12) to the matrix pipeline
/// `fidelity_to_pure(q, teleport_channel(werner_state(bell_fidelity(t2)), dephase(|q><q|, t1)))`.
pub fn teleported_fidelity(
    q: &PureQubit,
    t1: f64,
    t2: f64,
    params: &DephasingParams,
) -> Result<f64> {
    if !t1.is_finite() || t1 < 0.0 || !t2.is_finite() || t2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "times must be finite and >= 0, got t1 = {t1}, t2 = {t2}"
        )));
    }
    let w = q.coherence_weight();
    let e1 = (-params.gamma() * t1).exp();
    let bell = bell_fidelity(params, t2)?;
    // The cross terms (conj(a) b)^2 + (a conj(b))^2 from the X and iY
    // corrections cancel exactly, leaving only |a|^2 |b|^2 combinations.
    Ok(bell * (1.0 - w + w * e1) + (1.0 - bell) / 3.0 * (1.0 + w - w * e1))
}

/// Fidelity as a function of time in memory: `constant + amplitude * exp(-decay_rate t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityCurve {
    constant: f64,
    amplitude: f64,
    decay_rate: f64,
}

impl FidelityCurve {
    pub fn new(constant: f64, amplitude: f64, decay_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&constant) || amplitude < 0.0 || decay_rate < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "curve parameters out of range: ({constant}, {amplitude}, {decay_rate})"
            )));
        }
        let f0 = constant + amplitude;
        if f0 > 1.0 + STATE_TOL {
            return Err(Error::InvalidParameter(format!("F(0) = {f0} exceeds 1")));
        }
        Ok(Self { constant, amplitude, decay_rate })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    /// `F(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.constant + self.amplitude * (-self.decay_rate * t).exp()
    }

    /// `F(0)`.
    pub fn initial(&self) -> f64 {
        self.constant + self.amplitude
    }

    /// `lim_{t->inf} F(t)` (equals `constant` whenever the curve decays).
    pub fn floor(&self) -> f64 {
        if self.amplitude > 0.0 && self.decay_rate > 0.0 {
            self.constant
        } else {
            self.constant + self.amplitude
        }
    }

    /// Whether the curve actually decreases (needed for pdf transforms).
    pub fn strictly_decreasing(&self) -> bool {
        self.amplitude > 0.0 && self.decay_rate > 0.0
    }

    /// `F^{-1}(x)` for a strictly decreasing curve.
    pub fn inverse(&self, x: f64) -> Result<f64> {
        if !self.strictly_decreasing() {
            return Err(Error::InvalidParameter("curve is constant; no inverse".into()));
        }
        if x <= self.constant || x > self.initial() {
            return Err(Error::OutOfRange { value: x, lo: self.constant, hi: self.initial() });
        }
        Ok((self.amplitude / (x - self.constant)).ln() / self.decay_rate)
    }

    /// `|d F^{-1} / dx|` at `x`, the Jacobian of the change of variables.
    pub fn inverse_jacobian(&self, x: f64) -> Result<f64> {
        if !self.strictly_decreasing() {
            return Err(Error::InvalidParameter("curve is constant; no inverse".into()));
        }
        if x <= self.constant || x > self.initial() {
            return Err(Error::OutOfRange { value: x, lo: self.constant, hi: self.initial() });
        }
        Ok(1.0 / (self.decay_rate * (x - self.constant)))
    }
}

/// Curve for a request qubit that waits while EPR generation catches up:
/// `F1(t) = (|a|^4 + |b|^4) + 2|a|^2|b|^2 exp(-gamma t)`.
pub fn curve_request(q: &PureQubit, params: &DephasingParams) -> FidelityCurve {
    FidelityCurve {
        constant: q.fidelity_floor(),
        amplitude: q.coherence_weight(),
        decay_rate: params.gamma(),
    }
}

/// Curve for a teleportation whose EPR pair waited:
/// `F2(t) = 2/3 + 1/3 exp(-2 gamma t)`, independent of the input qubit.
pub fn curve_epr(_q: &PureQubit, params: &DephasingParams) -> FidelityCurve {
    FidelityCurve { constant: 2.0 / 3.0, amplitude: 1.0 / 3.0, decay_rate: 2.0 * params.gamma() }
}

/// Mean fidelity when the wait is random: `constant + amplitude * W*(decay_rate)`,
/// where `transform` evaluates the Laplace transform `E[exp(-s W)]`.
pub fn expected_fidelity<F: Fn(f64) -> f64>(curve: &FidelityCurve, transform: F) -> f64 {
    curve.constant() + curve.amplitude() * transform(curve.decay_rate())
}
