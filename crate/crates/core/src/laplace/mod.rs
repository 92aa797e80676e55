//! Wait-time distributions and Laplace transforms per service discipline,
//! the fidelity change of variables, and the phase-conditioned mixture for
//! the double queue.
//!
//! Throughout, `lambda_r` is the arrival rate of the stream being buffered
//! and `lambda_e` the rate of the stream that serves it; in the EPR phase of
//! the double queue the two swap roles.
//!
//! Two printed forms in circulation are corrected here, each backed by a
//! quadrature or linear-system witness (see the repository `ERRATA.md`):
//! the FIFO infinite-buffer transform denominator is `lambda_e - lambda_r + s`
//! (a `-s` form exceeds 1 and diverges at `s = lambda_e - lambda_r`), and the
//! pushout-LIFO closed form is re-derived from its recurrence since the
//! printed denominator vanishes at the buffer boundary.

mod pdf;
mod phases;
mod pushout;

pub use pdf::{conditioned_wait_pdf, fidelity_pdf_transform, PhaseTypePdf, WaitPdf};
pub use phases::{phase_conditioned_mean, phase_conditioned_pdf, phase_weights, PhaseWeights};
pub use pushout::{fifo_po_laplace, lifo_po_laplace, PushoutTransforms};

use crate::bessel;
use crate::error::{Error, Result};

/// Service discipline of one memory platform.
///
/// Finite variants carry the buffer size; `B >= 1` is required wherever a
/// transform is actually built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisciplineId {
    FifoInf,
    LifoInf,
    FifoPo(usize),
    LifoPo(usize),
}

impl DisciplineId {
    /// Buffer size for pushout variants, `None` for infinite ones.
    pub fn buffer(&self) -> Option<usize> {
        match self {
            DisciplineId::FifoInf | DisciplineId::LifoInf => None,
            DisciplineId::FifoPo(b) | DisciplineId::LifoPo(b) => Some(*b),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.buffer().is_some()
    }

    /// Short name used in CSV output and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            DisciplineId::FifoInf => "fifo",
            DisciplineId::LifoInf => "lifo",
            DisciplineId::FifoPo(_) => "fifo-po",
            DisciplineId::LifoPo(_) => "lifo-po",
        }
    }
}

impl std::fmt::Display for DisciplineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Laplace transform `W*(s)` of a wait-time distribution, tagged with its
/// discipline and whether it is conditioned on eventual service.
///
/// Conditioned transforms satisfy `W*(0) = 1`; joint (service and wait)
/// transforms satisfy `W*(0) = P_s`.
pub struct WaitTransform {
    discipline: DisciplineId,
    conditioned: bool,
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl WaitTransform {
    pub(crate) fn new(
        discipline: DisciplineId,
        conditioned: bool,
        eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        Self { discipline, conditioned, eval }
    }

    /// Evaluates `E[e^{-sW}]` (times `P_s` for joint transforms) at `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        assert!(s >= 0.0 && s.is_finite(), "transform argument must be a rate >= 0");
        (self.eval)(s)
    }

    pub fn discipline(&self) -> DisciplineId {
        self.discipline
    }

    pub fn is_conditioned(&self) -> bool {
        self.conditioned
    }
}

impl std::fmt::Debug for WaitTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaitTransform")
            .field("discipline", &self.discipline)
            .field("conditioned", &self.conditioned)
            .finish()
    }
}

fn require_stable(lambda_r: f64, lambda_e: f64) -> Result<()> {
    let rates_valid = lambda_r.is_finite() && lambda_e.is_finite() && lambda_r >= 0.0 && lambda_e > 0.0;
    if !rates_valid {
        return Err(Error::InvalidParameter(format!(
            "rates must be finite with lambda_e > 0, got lambda_r = {lambda_r}, lambda_e = {lambda_e}"
        )));
    }
    if lambda_r >= lambda_e {
        return Err(Error::Unstable { load: lambda_r / lambda_e });
    }
    Ok(())
}

/// Wait-time density of the infinite-buffer FIFO queue:
/// `(lambda_e - lambda_r) exp(-(lambda_e - lambda_r) t)`.
pub fn fifo_inf_wait_pdf(lambda_r: f64, lambda_e: f64, t: f64) -> Result<f64> {
    require_stable(lambda_r, lambda_e)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let rate = lambda_e - lambda_r;
    Ok(rate * (-rate * t).exp())
}

/// Laplace transform of [`fifo_inf_wait_pdf`]:
/// `(lambda_e - lambda_r) / (lambda_e - lambda_r + s)`.
pub fn fifo_inf_laplace(lambda_r: f64, lambda_e: f64) -> Result<WaitTransform> {
    require_stable(lambda_r, lambda_e)?;
    let rate = lambda_e - lambda_r;
    Ok(WaitTransform::new(
        DisciplineId::FifoInf,
        true,
        Box::new(move |s| rate / (rate + s)),
    ))
}

/// Wait-time density of the infinite-buffer LIFO stack, which equals the
/// M/M/1 busy-period density:
/// `1/(t sqrt(rho)) * exp(-(lambda_r + lambda_e) t) * I_1(2 t sqrt(lambda_r lambda_e))`.
///
/// The removable singularity at `t = 0` is filled with its limit `lambda_e`.
pub fn lifo_inf_busy_pdf(lambda_r: f64, lambda_e: f64, t: f64) -> Result<f64> {
    require_stable(lambda_r, lambda_e)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if lambda_r == 0.0 {
        // Stack never holds more than the tagged request; wait is Exp(lambda_e).
        return Ok(lambda_e * (-lambda_e * t).exp());
    }
    if t == 0.0 {
        return Ok(lambda_e);
    }
    let rho = lambda_r / lambda_e;
    let z = 2.0 * t * (lambda_r * lambda_e).sqrt();
    if z <= bessel::SERIES_CAP {
        Ok(bessel::i1(z) * (-(lambda_r + lambda_e) * t).exp() / (t * rho.sqrt()))
    } else {
        // exp(z - (lambda_r + lambda_e) t) = exp(-t (sqrt(lambda_r) - sqrt(lambda_e))^2) <= 1.
        let log_env = z - (lambda_r + lambda_e) * t;
        Ok(bessel::i1_scaled(z) * log_env.exp() / (t * rho.sqrt()))
    }
}

/// Laplace transform of the LIFO wait (busy period):
/// `(lambda_r + lambda_e + s - sqrt((lambda_r + lambda_e + s)^2 - 4 lambda_r lambda_e)) / (2 lambda_r)`.
pub fn lifo_inf_laplace(lambda_r: f64, lambda_e: f64) -> Result<WaitTransform> {
    require_stable(lambda_r, lambda_e)?;
    if lambda_r == 0.0 {
        return Ok(WaitTransform::new(
            DisciplineId::LifoInf,
            true,
            Box::new(move |s| lambda_e / (lambda_e + s)),
        ));
    }
    Ok(WaitTransform::new(
        DisciplineId::LifoInf,
        true,
        Box::new(move |s| {
            let d = lambda_r + lambda_e + s;
            let disc = (d * d - 4.0 * lambda_r * lambda_e).max(0.0);
            (d - disc.sqrt()) / (2.0 * lambda_r)
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn fifo_pdf_normalizes_and_has_right_mean() {
        let total = quad::integrate_to_inf(&|t| fifo_inf_wait_pdf(2.5, 5.0, t).unwrap(), 1e-10);
        assert!((total - 1.0).abs() < 1e-8);
        let mean = quad::integrate_to_inf(&|t| t * fifo_inf_wait_pdf(2.5, 5.0, t).unwrap(), 1e-10);
        assert!((mean - 0.4).abs() < 1e-7);
    }

    #[test]
    fn fifo_rejects_unstable_load() {
        assert!(matches!(fifo_inf_wait_pdf(5.0, 5.0, 1.0), Err(Error::Unstable { .. })));
        assert!(matches!(fifo_inf_laplace(6.0, 5.0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn fifo_laplace_values() {
        let w = fifo_inf_laplace(2.5, 5.0).unwrap();
        assert!((w.eval(0.0) - 1.0).abs() < 1e-12);
        assert!((w.eval(0.01) - 2.5 / 2.51).abs() < 1e-12);
    }

    #[test]
    fn fifo_laplace_matches_quadrature() {
        let w = fifo_inf_laplace(2.5, 5.0).unwrap();
        for s in [0.01, 0.1, 1.0, 5.0] {
            let numeric = quad::integrate_to_inf(
                &|t| (-s * t).exp() * fifo_inf_wait_pdf(2.5, 5.0, t).unwrap(),
                1e-12,
            );
            assert!(
                (w.eval(s) - numeric).abs() < 1e-10,
                "s = {s}: closed {} vs quadrature {numeric}",
                w.eval(s)
            );
        }
    }

    #[test]
    fn lifo_busy_pdf_normalizes() {
        let total = quad::integrate_to_inf(&|t| lifo_inf_busy_pdf(2.5, 5.0, t).unwrap(), 1e-8);
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn lifo_busy_pdf_limit_at_zero() {
        assert!((lifo_inf_busy_pdf(2.5, 5.0, 0.0).unwrap() - 5.0).abs() < 1e-12);
        // Continuity just above zero.
        assert!((lifo_inf_busy_pdf(2.5, 5.0, 1e-9).unwrap() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn lifo_laplace_value_at_zero() {
        let w = lifo_inf_laplace(2.5, 5.0).unwrap();
        assert!((w.eval(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lifo_laplace_matches_quadrature_of_busy_pdf() {
        let w = lifo_inf_laplace(2.5, 5.0).unwrap();
        for s in [0.01, 0.1, 1.0] {
            let numeric = quad::integrate_to_inf(
                &|t| (-s * t).exp() * lifo_inf_busy_pdf(2.5, 5.0, t).unwrap(),
                1e-9,
            );
            assert!(
                (w.eval(s) - numeric).abs() < 1e-6,
                "s = {s}: closed {} vs quadrature {numeric}",
                w.eval(s)
            );
        }
    }

    #[test]
    fn transforms_monotone_nonincreasing_in_s() {
        for w in [fifo_inf_laplace(2.5, 5.0).unwrap(), lifo_inf_laplace(2.5, 5.0).unwrap()] {
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let s = i as f64 * 0.2;
                let v = w.eval(s);
                assert!(v <= prev + 1e-14 && (0.0..=1.0).contains(&v));
                prev = v;
            }
        }
    }

    #[test]
    fn transforms_completely_monotone_spot_check() {
        // Finite differences of a completely monotone function alternate in
        // sign: delta^1 <= 0, delta^2 >= 0, delta^3 <= 0.
        let transforms = [
            fifo_inf_laplace(2.5, 5.0).unwrap(),
            lifo_inf_laplace(2.5, 5.0).unwrap(),
            super::lifo_po_laplace(8, 4.0, 5.0).unwrap().conditioned,
            super::fifo_po_laplace(8, 4.0, 5.0).unwrap().conditioned,
        ];
        let h = 0.25;
        for w in &transforms {
            for i in 0..40 {
                let s0 = 0.05 + i as f64 * h;
                let v: Vec<f64> = (0..4).map(|k| w.eval(s0 + k as f64 * h)).collect();
                let d1 = v[1] - v[0];
                let d2 = v[2] - 2.0 * v[1] + v[0];
                let d3 = v[3] - 3.0 * v[2] + 3.0 * v[1] - v[0];
                assert!(d1 <= 1e-12, "{:?}: delta1 {d1} at s={s0}", w.discipline());
                assert!(d2 >= -1e-12, "{:?}: delta2 {d2} at s={s0}", w.discipline());
                assert!(d3 <= 1e-12, "{:?}: delta3 {d3} at s={s0}", w.discipline());
            }
        }
    }
}
