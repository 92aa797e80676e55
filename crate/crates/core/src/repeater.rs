//! A single repeater between nodes A and B, modeled as a double queue whose
//! two "streams" are the EPR halves generated toward each neighbor.
//!
//! The repeater swaps as soon as both sides hold a pair, always consuming the
//! freshest arrival as the swap resource (LIFO selection on the arriving
//! side), so the delivered fidelity is the Bell-pair decay of whichever half
//! waited: both phase curves are `1/2 + 1/2 exp(-2 gamma t)`.

use crate::error::{Error, Result};
use crate::laplace::{phase_conditioned_mean, phase_weights, DisciplineId};
use crate::markov::{BufferSize, DoubleQueueConfig};
use crate::qmath::FidelityCurve;

/// Symmetric repeater: equal generation rate `mu` toward both neighbors,
/// equal buffer `buf` per side, one discipline per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeaterConfig {
    pub mu: f64,
    pub gamma: f64,
    pub buf: usize,
    pub disc_a: DisciplineId,
    pub disc_b: DisciplineId,
}

impl RepeaterConfig {
    pub fn new(
        mu: f64,
        gamma: f64,
        buf: usize,
        disc_a: DisciplineId,
        disc_b: DisciplineId,
    ) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if buf == 0 {
            return Err(Error::InvalidParameter("repeater buffer must be >= 1".into()));
        }
        for d in [disc_a, disc_b] {
            if d.buffer() != Some(buf) {
                return Err(Error::InvalidParameter(format!(
                    "repeater disciplines must be finite with buffer {buf}, got {d:?}"
                )));
            }
        }
        Ok(Self { mu, gamma, buf, disc_a, disc_b })
    }

    /// The usual configuration: LIFO with pushout on both sides.
    pub fn lifo_po(mu: f64, gamma: f64, buf: usize) -> Result<Self> {
        Self::new(mu, gamma, buf, DisciplineId::LifoPo(buf), DisciplineId::LifoPo(buf))
    }
}

/// Maps the repeater onto the double queue: both rates `mu` (load exactly 1)
/// and the Bell-pair curve `(1/2, 1/2, 2 gamma)` on both phases.
pub fn to_double_queue(
    rc: &RepeaterConfig,
) -> Result<(DoubleQueueConfig, FidelityCurve, FidelityCurve)> {
    let cfg = DoubleQueueConfig::new(
        rc.mu,
        rc.mu,
        BufferSize::Finite(rc.buf),
        BufferSize::Finite(rc.buf),
        rc.gamma,
        rc.gamma,
    )?;
    let curve = FidelityCurve::new(0.5, 0.5, 2.0 * rc.gamma)?;
    Ok((cfg, curve, curve))
}

/// Average infidelity `1 - E[F]` of the swapped pairs; lies in `[0, 1/2]`.
pub fn mean_infidelity(rc: &RepeaterConfig) -> Result<f64> {
    let (cfg, curve_a, curve_b) = to_double_queue(rc)?;
    let mean = phase_conditioned_mean(&cfg, rc.disc_a, rc.disc_b, &curve_a, &curve_b)?;
    Ok(1.0 - mean)
}

/// Probability a buffered half is eventually swapped; `B/(B+1)` at the
/// repeater's unit load.
pub fn service_probability(rc: &RepeaterConfig) -> Result<f64> {
    let (cfg, _, _) = to_double_queue(rc)?;
    Ok(phase_weights(&cfg)?.ps_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_is_critical_load_with_bell_curves() {
        let rc = RepeaterConfig::lifo_po(3.0, 0.01, 5).unwrap();
        let (cfg, curve, _) = to_double_queue(&rc).unwrap();
        assert_eq!(cfg.load(), 1.0);
        assert!((curve.initial() - 1.0).abs() < 1e-15);
        assert!((curve.floor() - 0.5).abs() < 1e-15);
        assert!((curve.decay_rate() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn no_decoherence_means_no_infidelity() {
        let rc = RepeaterConfig::lifo_po(1.0, 0.0, 5).unwrap();
        let loss = mean_infidelity(&rc).unwrap();
        assert!(loss.abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn infidelity_bounded_by_half() {
        for mu in [1e-3, 0.1, 1.0, 100.0] {
            let rc = RepeaterConfig::lifo_po(mu, 0.05, 3).unwrap();
            let loss = mean_infidelity(&rc).unwrap();
            assert!((0.0..=0.5).contains(&loss), "mu={mu}: loss {loss}");
        }
    }

    #[test]
    fn infidelity_decreases_with_rate() {
        for buf in [2usize, 5, 10] {
            let mut prev = f64::INFINITY;
            for mu in [0.1, 1.0, 10.0, 100.0] {
                let rc = RepeaterConfig::lifo_po(mu, 0.01, buf).unwrap();
                let loss = mean_infidelity(&rc).unwrap();
                assert!(loss < prev, "buf={buf} mu={mu}: {loss} !< {prev}");
                prev = loss;
            }
        }
    }

    #[test]
    fn infidelity_grows_with_buffer() {
        for mu in [0.1, 1.0, 10.0] {
            let mut prev = 0.0;
            for buf in [2usize, 5, 10] {
                let rc = RepeaterConfig::lifo_po(mu, 0.01, buf).unwrap();
                let loss = mean_infidelity(&rc).unwrap();
                assert!(loss > prev, "mu={mu} buf={buf}: {loss} !> {prev}");
                prev = loss;
            }
        }
    }

    #[test]
    fn service_probability_is_critical_limit() {
        for buf in [2usize, 5, 10] {
            let rc = RepeaterConfig::lifo_po(1.0, 0.01, buf).unwrap();
            let p = service_probability(&rc).unwrap();
            assert!((p - buf as f64 / (buf as f64 + 1.0)).abs() < 1e-9);
        }
    }
}
