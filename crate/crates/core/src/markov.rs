//! Steady-state analysis of the double-queue birth-death chain.
//!
//! The node state is the signed occupancy `n`: `n > 0` counts buffered
//! requests, `n < 0` counts buffered EPR pairs (a surplus of EPR pairs is a
//! negative number of requests), and at most one side is ever nonempty.
//! Requests push `n` up at rate `lambda_r`, EPR pairs pull it down at rate
//! `lambda_e`, and the chain lives on `[-buf_e, buf_r]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative distance from 1 below which load is treated as exactly critical.
pub const CRITICAL_LOAD_TOL: f64 = 1e-9;

/// Buffer capacity of one memory platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BufferSize {
    Finite(usize),
    Unbounded,
}

impl BufferSize {
    pub fn finite(&self) -> Option<usize> {
        match self {
            BufferSize::Finite(b) => Some(*b),
            BufferSize::Unbounded => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, BufferSize::Unbounded)
    }
}

/// Arrival rates, buffer sizes, and memory dephasing rates of the node.
///
/// `gamma_r` is the dephasing rate of the request memory, `gamma_e` of the
/// EPR memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleQueueConfig {
    pub lambda_e: f64,
    pub lambda_r: f64,
    pub buf_e: BufferSize,
    pub buf_r: BufferSize,
    pub gamma_r: f64,
    pub gamma_e: f64,
}

impl DoubleQueueConfig {
    pub fn new(
        lambda_e: f64,
        lambda_r: f64,
        buf_e: BufferSize,
        buf_r: BufferSize,
        gamma_r: f64,
        gamma_e: f64,
    ) -> Result<Self> {
        for (name, v) in [("lambda_e", lambda_e), ("lambda_r", lambda_r)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if lambda_e + lambda_r <= 0.0 {
            return Err(Error::InvalidParameter("at least one arrival rate must be positive".into()));
        }
        for (name, v) in [("gamma_r", gamma_r), ("gamma_e", gamma_e)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if buf_e == BufferSize::Finite(0) && buf_r == BufferSize::Finite(0) {
            return Err(Error::InvalidParameter(
                "buf_e + buf_r must be >= 1; a zero-memory node stores nothing".into(),
            ));
        }
        Ok(Self { lambda_e, lambda_r, buf_e, buf_r, gamma_r, gamma_e })
    }

    /// Load `rho = lambda_r / lambda_e`.
    pub fn load(&self) -> f64 {
        self.lambda_r / self.lambda_e
    }

    /// Load checked to be positive and finite, as the analytic formulas need.
    pub fn finite_load(&self) -> Result<f64> {
        let rho = self.load();
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "analytic steady state needs 0 < lambda_r/lambda_e < inf, got {rho}"
            )));
        }
        Ok(rho)
    }

    fn finite_buffers(&self) -> Result<(usize, usize)> {
        match (self.buf_e.finite(), self.buf_r.finite()) {
            (Some(be), Some(br)) => Ok((be, br)),
            _ => Err(Error::InvalidParameter(
                "occupancy distribution needs finite buffers on both sides".into(),
            )),
        }
    }
}

/// Stationary probabilities indexed by signed occupancy `n` in
/// `[-buf_e, buf_r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyDistribution {
    buf_e: usize,
    probs: Vec<f64>,
}

impl OccupancyDistribution {
    fn new(buf_e: usize, probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical(format!(
                "occupancy distribution does not normalize: sum = {total}"
            )));
        }
        Ok(Self { buf_e, probs })
    }

    pub fn min_n(&self) -> i64 {
        -(self.buf_e as i64)
    }

    pub fn max_n(&self) -> i64 {
        self.min_n() + self.probs.len() as i64 - 1
    }

    /// `P[N = n]`; zero outside the support.
    pub fn prob(&self, n: i64) -> f64 {
        let idx = n + self.buf_e as i64;
        if idx < 0 || idx >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let lo = self.min_n();
        self.probs.iter().enumerate().map(move |(i, &p)| (lo + i as i64, p))
    }

    pub fn total_variation(&self, other: &OccupancyDistribution) -> f64 {
        let lo = self.min_n().min(other.min_n());
        let hi = self.max_n().max(other.max_n());
        0.5 * (lo..=hi).map(|n| (self.prob(n) - other.prob(n)).abs()).sum::<f64>()
    }
}

/// Unnormalized geometric weights `rho^0 .. rho^{k-1}` arranged so the
/// largest term is 1, keeping long sweeps free of overflow.
fn geometric_weights(rho: f64, len: usize) -> Vec<f64> {
    let mut w = vec![0.0; len];
    if rho <= 1.0 {
        let mut cur = 1.0;
        for slot in w.iter_mut() {
            *slot = cur;
            cur *= rho;
        }
    } else {
        let inv = 1.0 / rho;
        let mut cur = 1.0;
        for slot in w.iter_mut().rev() {
            *slot = cur;
            cur *= inv;
        }
    }
    w
}

/// Closed-form stationary distribution of the chain:
/// `pi_n` proportional to `rho^{n + buf_e}`, uniform in the critical-load
/// limit.
pub fn stationary_distribution(cfg: &DoubleQueueConfig) -> Result<OccupancyDistribution> {
    let rho = cfg.finite_load()?;
    let (buf_e, buf_r) = cfg.finite_buffers()?;
    let len = buf_e + buf_r + 1;
    let probs = if (rho - 1.0).abs() < CRITICAL_LOAD_TOL {
        vec![1.0 / len as f64; len]
    } else {
        let mut w = geometric_weights(rho, len);
        let total: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= total;
        }
        w
    };
    OccupancyDistribution::new(buf_e, probs)
}

/// Oracle route: solves `pi Q = 0`, `sum pi = 1` for the generator of the
/// birth-death chain directly. Exists to cross-check
/// [`stationary_distribution`]; prefer the closed form elsewhere.
pub fn numeric_stationary(cfg: &DoubleQueueConfig) -> Result<OccupancyDistribution> {
    let rho = cfg.finite_load()?;
    if !rho.is_finite() {
        return Err(Error::InvalidParameter("rates must both be positive".into()));
    }
    let (buf_e, buf_r) = cfg.finite_buffers()?;
    let len = buf_e + buf_r + 1;
    // Rows of `a` are equations; unknowns are pi_0 .. pi_{len-1}.
    // First len-1 equations: columns of Q (balance at each state), last
    // equation: normalization.
    let mut a = DMatrix::<f64>::zeros(len, len);
    for state in 0..len {
        // Outflow.
        let mut out = 0.0;
        if state + 1 < len {
            out += cfg.lambda_r;
        }
        if state > 0 {
            out += cfg.lambda_e;
        }
        if state < len - 1 {
            a[(state, state)] -= out;
            // Inflows into `state`.
            if state > 0 {
                a[(state, state - 1)] += cfg.lambda_r;
            }
            if state + 1 < len {
                a[(state, state + 1)] += cfg.lambda_e;
            }
        }
    }
    // Balance at the last state is redundant; use it for normalization.
    for col in 0..len {
        a[(len - 1, col)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(len);
    rhs[len - 1] = 1.0;
    let solved = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular generator system".into()))?;
    let probs: Vec<f64> = solved.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    OccupancyDistribution::new(buf_e, probs.into_iter().map(|p| p / total).collect())
}

/// Probability that an arriving EPR pair (`p_e`) or request (`p_r`) finds no
/// counterpart and is placed in its buffer. Both include the empty state, so
/// `p_e + p_r = 1 + pi_0`.
pub fn buffering_probabilities(cfg: &DoubleQueueConfig) -> Result<(f64, f64)> {
    let pi = stationary_distribution(cfg)?;
    let p_e: f64 = (pi.min_n()..=0).map(|n| pi.prob(n)).sum();
    let p_r: f64 = (0..=pi.max_n()).map(|n| pi.prob(n)).sum();
    Ok((p_e, p_r))
}

/// Probability that a buffered arrival is eventually served rather than
/// pushed out: `(1 - rho^B) / (1 - rho^{B+1})`, with the `B/(B+1)` limit at
/// critical load.
///
/// `load` is the ratio of the buffered stream's arrival rate to its service
/// rate, so the request side uses `lambda_r/lambda_e` and the EPR side the
/// reciprocal.
pub fn service_probability(load: f64, buf: usize) -> Result<f64> {
    if !load.is_finite() || load <= 0.0 {
        return Err(Error::InvalidParameter(format!("load must be positive, got {load}")));
    }
    if buf == 0 {
        return Err(Error::InvalidParameter("service probability needs buf >= 1".into()));
    }
    let b = buf as f64;
    if (load - 1.0).abs() < CRITICAL_LOAD_TOL {
        return Ok(b / (b + 1.0));
    }
    if load < 1.0 {
        // expm1 keeps the ratio accurate when load is close to 1.
        let l = load.ln();
        Ok((b * l).exp_m1() / ((b + 1.0) * l).exp_m1())
    } else {
        // Reparameterize with q = 1/load so exponents stay negative.
        let q = 1.0 / load;
        let l = q.ln();
        let q_b1 = ((b + 1.0) * l).exp();
        Ok((q - q_b1) / (1.0 - q_b1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn cfg(lambda_e: f64, lambda_r: f64, buf_e: usize, buf_r: usize) -> DoubleQueueConfig {
        DoubleQueueConfig::new(
            lambda_e,
            lambda_r,
            BufferSize::Finite(buf_e),
            BufferSize::Finite(buf_r),
            0.01,
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn zero_buffers_rejected() {
        assert!(DoubleQueueConfig::new(
            1.0,
            1.0,
            BufferSize::Finite(0),
            BufferSize::Finite(0),
            0.0,
            0.0
        )
        .is_err());
    }

    #[test]
    fn uniform_at_critical_load() {
        let pi = stationary_distribution(&cfg(2.0, 2.0, 1, 1)).unwrap();
        for n in -1..=1 {
            assert!((pi.prob(n) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_evaluation_small_case() {
        // load 0.5, buf_e = 0, buf_r = 1: pi_0 = 2/3, pi_1 = 1/3.
        let pi = stationary_distribution(&cfg(2.0, 1.0, 0, 1)).unwrap();
        assert!((pi.prob(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi.prob(1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn matches_numeric_generator_solve() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..100 {
            let lambda_e = 0.2 + 10.0 * rng.random::<f64>();
            let load = [0.1, 0.5, 0.99, 1.0, 1.01, 2.0, 10.0][rng.random_range(0..7)];
            let buf_e = rng.random_range(0..8usize);
            let buf_r = rng.random_range(if buf_e == 0 { 1 } else { 0 }..8usize);
            let c = cfg(lambda_e, lambda_e * load, buf_e, buf_r);
            let closed = stationary_distribution(&c).unwrap();
            let numeric = numeric_stationary(&c).unwrap();
            for n in closed.min_n()..=closed.max_n() {
                assert!(
                    (closed.prob(n) - numeric.prob(n)).abs() < 1e-10,
                    "mismatch at n={n} for load {load} buffers ({buf_e},{buf_r})"
                );
            }
        }
    }

    #[test]
    fn heavy_load_concentrates_at_request_cap() {
        let pi = stationary_distribution(&cfg(1.0, 10.0, 2, 2)).unwrap();
        assert!(pi.prob(2) > 0.89, "pi_Br = {}", pi.prob(2));
        let numeric = numeric_stationary(&cfg(1.0, 10.0, 2, 2)).unwrap();
        assert!((pi.prob(2) - numeric.prob(2)).abs() < 1e-10);
    }

    #[test]
    fn detailed_balance() {
        for load in [0.3, 0.99, 1.0, 1.5] {
            let c = cfg(3.0, 3.0 * load, 3, 4);
            let pi = stationary_distribution(&c).unwrap();
            for n in pi.min_n()..pi.max_n() {
                let lhs = pi.prob(n) * c.lambda_r;
                let rhs = pi.prob(n + 1) * c.lambda_e;
                assert!((lhs - rhs).abs() < 1e-12 * lhs.max(rhs).max(1.0));
            }
        }
    }

    #[test]
    fn buffering_probability_identities() {
        // Symmetric case: p_e = p_r = 2/3.
        let (p_e, p_r) = buffering_probabilities(&cfg(2.0, 2.0, 1, 1)).unwrap();
        assert!((p_e - 2.0 / 3.0).abs() < 1e-12);
        assert!((p_r - 2.0 / 3.0).abs() < 1e-12);
        // load 0.5, buf_e = 0, buf_r = 1.
        let (p_e, p_r) = buffering_probabilities(&cfg(2.0, 1.0, 0, 1)).unwrap();
        assert!((p_e - 2.0 / 3.0).abs() < 1e-12);
        assert!((p_r - 1.0).abs() < 1e-12);
        // p_e + p_r = 1 + pi_0 always.
        for load in [0.2, 0.8, 1.0, 3.0] {
            let c = cfg(2.0, 2.0 * load, 3, 5);
            let (p_e, p_r) = buffering_probabilities(&c).unwrap();
            let pi0 = stationary_distribution(&c).unwrap().prob(0);
            assert!((p_e + p_r - 1.0 - pi0).abs() < 1e-12);
        }
    }

    #[test]
    fn service_probability_values() {
        assert!((service_probability(1.0, 10).unwrap() - 10.0 / 11.0).abs() < 1e-12);
        let expect = (1.0 - 0.5f64.powi(10)) / (1.0 - 0.5f64.powi(11));
        assert!((service_probability(0.5, 10).unwrap() - expect).abs() < 1e-12);
        assert!(service_probability(0.5, 0).is_err());
        assert!(service_probability(0.0, 3).is_err());
    }

    #[test]
    fn service_probability_continuous_at_critical_load() {
        let buf = 7;
        let limit = service_probability(1.0, buf).unwrap();
        let mut eps = 1e-3;
        while eps > 2e-9 {
            let below = service_probability(1.0 - eps, buf).unwrap();
            let above = service_probability(1.0 + eps, buf).unwrap();
            assert!((below - limit).abs() < 10.0 * eps, "eps={eps} below={below} limit={limit}");
            assert!((above - limit).abs() < 10.0 * eps, "eps={eps} above={above} limit={limit}");
            eps /= 10.0;
        }
    }

    #[test]
    fn service_probability_extreme_loads_stay_finite() {
        // Overflow-prone corner: enormous buffer and loads far from 1.
        let p = service_probability(5.0, 2000).unwrap();
        assert!((p - 0.2).abs() < 1e-12);
        let p = service_probability(0.2, 2000).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_rejects_unbounded_or_degenerate() {
        let c = DoubleQueueConfig::new(
            1.0,
            0.5,
            BufferSize::Unbounded,
            BufferSize::Finite(3),
            0.0,
            0.0,
        )
        .unwrap();
        assert!(stationary_distribution(&c).is_err());
        let c = DoubleQueueConfig::new(
            1.0,
            0.0,
            BufferSize::Finite(3),
            BufferSize::Finite(3),
            0.0,
            0.0,
        )
        .unwrap();
        assert!(stationary_distribution(&c).is_err());
    }
}
