//! Phase-conditioned fidelity of the double queue.
//!
//! Served teleportations split into two phases: either the request waited
//! (EPR side was empty) or the EPR pair waited. Each phase is a single
//! queue whose wait transform and fidelity curve are known, and the overall
//! fidelity mixes the two with weights `lambda_i p_i P_{s,i}` — the rates of
//! served matches whose waiter was of type `i`.

use crate::error::{Error, Result};
use crate::markov::{
    buffering_probabilities, service_probability, BufferSize, DoubleQueueConfig,
};
use crate::qmath::{expected_fidelity, FidelityCurve};

use super::pdf::{conditioned_wait_pdf, fidelity_pdf_transform};
use super::{fifo_inf_laplace, fifo_po_laplace, lifo_inf_laplace, lifo_po_laplace, DisciplineId};

/// Buffering and service probabilities per phase, plus the resulting
/// mixture weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseWeights {
    /// Probability an arriving EPR pair is buffered.
    pub p_e: f64,
    /// Probability an arriving request is buffered.
    pub p_r: f64,
    /// Probability a buffered EPR pair is eventually used.
    pub ps_e: f64,
    /// Probability a buffered request is eventually teleported.
    pub ps_r: f64,
    /// `lambda_e * p_e * ps_e`: rate of served matches where the EPR waited.
    pub weight_e: f64,
    /// `lambda_r * p_r * ps_r`: rate of served matches where the request waited.
    pub weight_r: f64,
}

/// Computes [`PhaseWeights`] from the occupancy chain. Each side's service
/// probability uses that side's own load (arrival rate over serving rate)
/// with its own buffer size. One side may be unbounded when the load keeps
/// it stable; two unbounded buffers have no stationary regime.
pub fn phase_weights(cfg: &DoubleQueueConfig) -> Result<PhaseWeights> {
    let rho = cfg.finite_load()?;
    let (p_e, p_r, ps_e, ps_r) = match (cfg.buf_e, cfg.buf_r) {
        (BufferSize::Finite(be), BufferSize::Finite(br)) => {
            let (p_e, p_r) = buffering_probabilities(cfg)?;
            let ps_e = if be == 0 { 0.0 } else { service_probability(1.0 / rho, be)? };
            let ps_r = if br == 0 { 0.0 } else { service_probability(rho, br)? };
            (p_e, p_r, ps_e, ps_r)
        }
        (BufferSize::Finite(be), BufferSize::Unbounded) => {
            if rho >= 1.0 {
                return Err(Error::Unstable { load: rho });
            }
            // pi_n = (1 - rho) rho^{n + be} on [-be, inf).
            let p_e = 1.0 - rho.powi(be as i32 + 1);
            let p_r = rho.powi(be as i32);
            let ps_e = if be == 0 { 0.0 } else { service_probability(1.0 / rho, be)? };
            (p_e, p_r, ps_e, 1.0)
        }
        (BufferSize::Unbounded, BufferSize::Finite(br)) => {
            if rho <= 1.0 {
                return Err(Error::Unstable { load: rho });
            }
            let q = 1.0 / rho;
            let p_e = q.powi(br as i32);
            let p_r = 1.0 - q.powi(br as i32 + 1);
            let ps_r = if br == 0 { 0.0 } else { service_probability(rho, br)? };
            (p_e, p_r, 1.0, ps_r)
        }
        (BufferSize::Unbounded, BufferSize::Unbounded) => {
            return Err(Error::InvalidParameter(
                "two unbounded buffers have no stationary distribution".into(),
            ));
        }
    };
    Ok(PhaseWeights {
        p_e,
        p_r,
        ps_e,
        ps_r,
        weight_e: cfg.lambda_e * p_e * ps_e,
        weight_r: cfg.lambda_r * p_r * ps_r,
    })
}

fn check_side(
    side: &str,
    disc: DisciplineId,
    buf: BufferSize,
) -> Result<()> {
    match (disc, buf) {
        (DisciplineId::FifoInf | DisciplineId::LifoInf, BufferSize::Unbounded) => Ok(()),
        (DisciplineId::FifoPo(b) | DisciplineId::LifoPo(b), BufferSize::Finite(cb)) if b == cb => {
            Ok(())
        }
        _ => Err(Error::InvalidParameter(format!(
            "{side} discipline {disc:?} does not match its configured buffer {buf:?}"
        ))),
    }
}

/// Service-conditioned transform of one phase: arrival rate first, serving
/// rate second.
fn conditioned_transform(
    disc: DisciplineId,
    arrival: f64,
    service: f64,
) -> Result<super::WaitTransform> {
    match disc {
        DisciplineId::FifoInf => fifo_inf_laplace(arrival, service),
        DisciplineId::LifoInf => lifo_inf_laplace(arrival, service),
        DisciplineId::FifoPo(b) => Ok(fifo_po_laplace(b, arrival, service)?.conditioned),
        DisciplineId::LifoPo(b) => Ok(lifo_po_laplace(b, arrival, service)?.conditioned),
    }
}

/// Average fidelity of a served teleportation under the two-phase mixture:
/// `(w_e E[F_e] + w_r E[F_r]) / (w_e + w_r)` with `E[F_i]` from the
/// phase-conditioned transform and curve.
pub fn phase_conditioned_mean(
    cfg: &DoubleQueueConfig,
    disc_r: DisciplineId,
    disc_e: DisciplineId,
    curve_r: &FidelityCurve,
    curve_e: &FidelityCurve,
) -> Result<f64> {
    check_side("request", disc_r, cfg.buf_r)?;
    check_side("epr", disc_e, cfg.buf_e)?;
    let w = phase_weights(cfg)?;
    if w.weight_e + w.weight_r <= 0.0 {
        return Err(Error::Numerical("no served matches in either phase".into()));
    }
    let mean_r = if w.weight_r > 0.0 {
        let tr = conditioned_transform(disc_r, cfg.lambda_r, cfg.lambda_e)?;
        expected_fidelity(curve_r, |s| tr.eval(s))
    } else {
        0.0
    };
    let mean_e = if w.weight_e > 0.0 {
        let tr = conditioned_transform(disc_e, cfg.lambda_e, cfg.lambda_r)?;
        expected_fidelity(curve_e, |s| tr.eval(s))
    } else {
        0.0
    };
    Ok((w.weight_e * mean_e + w.weight_r * mean_r) / (w.weight_e + w.weight_r))
}

/// Density of the served-teleportation fidelity: the two phase densities
/// pushed through their curves and mixed with the same weights as
/// [`phase_conditioned_mean`]. Zero outside the attainable range.
pub fn phase_conditioned_pdf(
    cfg: &DoubleQueueConfig,
    disc_r: DisciplineId,
    disc_e: DisciplineId,
    curve_r: &FidelityCurve,
    curve_e: &FidelityCurve,
    x: f64,
) -> Result<f64> {
    check_side("request", disc_r, cfg.buf_r)?;
    check_side("epr", disc_e, cfg.buf_e)?;
    let w = phase_weights(cfg)?;
    let total = w.weight_e + w.weight_r;
    if total <= 0.0 {
        return Err(Error::Numerical("no served matches in either phase".into()));
    }
    let mut density = 0.0;
    if w.weight_r > 0.0 && x > curve_r.floor() && x < curve_r.initial() {
        if !curve_r.strictly_decreasing() {
            return Err(Error::InvalidParameter(
                "request curve is constant; fidelity has no density".into(),
            ));
        }
        let pdf = conditioned_wait_pdf(disc_r, cfg.lambda_r, cfg.lambda_e)?;
        density += w.weight_r
            * fidelity_pdf_transform(|t| pdf.eval(t).unwrap_or(0.0), curve_r, x)?;
    }
    if w.weight_e > 0.0 && x > curve_e.floor() && x < curve_e.initial() {
        if !curve_e.strictly_decreasing() {
            return Err(Error::InvalidParameter(
                "epr curve is constant; fidelity has no density".into(),
            ));
        }
        let pdf = conditioned_wait_pdf(disc_e, cfg.lambda_e, cfg.lambda_r)?;
        density += w.weight_e
            * fidelity_pdf_transform(|t| pdf.eval(t).unwrap_or(0.0), curve_e, x)?;
    }
    Ok(density / total)
}
