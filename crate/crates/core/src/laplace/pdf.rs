//! Wait-time densities per discipline and the change of variables from wait
//! time to fidelity.
//!
//! The infinite disciplines have classical closed-form densities. For the
//! pushout disciplines the service-conditioned wait is a first-passage time
//! of a finite absorbing chain; its density is evaluated by uniformization
//! (a Poisson-weighted sum over the embedded jump chain), not by inverting
//! the transform.

use crate::error::{Error, Result};
use crate::markov::{service_probability, CRITICAL_LOAD_TOL};
use crate::qmath::FidelityCurve;

use super::{fifo_inf_wait_pdf, lifo_inf_busy_pdf, DisciplineId};

/// Service-conditioned wait-time density for one discipline.
#[derive(Debug)]
pub enum WaitPdf {
    FifoInf { lambda_r: f64, lambda_e: f64 },
    LifoInf { lambda_r: f64, lambda_e: f64 },
    PhaseType(PhaseTypePdf),
}

impl WaitPdf {
    /// Density at `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            WaitPdf::FifoInf { lambda_r, lambda_e } => fifo_inf_wait_pdf(*lambda_r, *lambda_e, t),
            WaitPdf::LifoInf { lambda_r, lambda_e } => lifo_inf_busy_pdf(*lambda_r, *lambda_e, t),
            WaitPdf::PhaseType(p) => p.eval(t),
        }
    }
}

/// Conditioned wait density of the [`PhaseType`](WaitPdf::PhaseType) kind:
/// `f(t) = sum_n Poisson(n; Lambda t) g_n / P_s` with `g_n = a' P^n c` over
/// the embedded jump chain of the tagged request.
#[derive(Debug)]
pub struct PhaseTypePdf {
    total_rate: f64,
    coeffs: Vec<f64>,
}

impl PhaseTypePdf {
    /// Builds the density from the jump matrix `p` (substochastic, row
    ///-major), entry distribution `a`, served-absorption rates `c`, and the
    /// normalization `ps`.
    fn build(p: &[Vec<f64>], a: &[f64], c: &[f64], total_rate: f64, ps: f64) -> Self {
        let n = a.len();
        let mut v = a.to_vec();
        let mut coeffs = Vec::with_capacity(256);
        for _ in 0..2_000_000 {
            let g: f64 = v.iter().zip(c).map(|(x, y)| x * y).sum();
            coeffs.push(g / ps);
            let mass: f64 = v.iter().sum();
            if mass < 1e-16 {
                break;
            }
            let mut next = vec![0.0; n];
            for (i, &vi) in v.iter().enumerate() {
                if vi == 0.0 {
                    continue;
                }
                for (j, &pij) in p[i].iter().enumerate() {
                    if pij != 0.0 {
                        next[j] += vi * pij;
                    }
                }
            }
            v = next;
        }
        Self { total_rate, coeffs }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
        }
        let mu = self.total_rate * t;
        if mu == 0.0 {
            return Ok(self.coeffs[0]);
        }
        // Poisson weights by upward recurrence from a stable anchor.
        let n_max = self.coeffs.len();
        let mut sum = 0.0;
        if mu < 600.0 {
            let mut w = (-mu).exp();
            for (n, &g) in self.coeffs.iter().enumerate() {
                sum += w * g;
                w *= mu / (n + 1) as f64;
            }
        } else {
            // Anchor at the mode to avoid underflow of exp(-mu).
            let mode = (mu.floor() as usize).min(n_max.saturating_sub(1));
            let log_w_mode = -mu + mode as f64 * mu.ln() - ln_factorial(mode);
            let w_mode = log_w_mode.exp();
            let mut w = w_mode;
            for n in mode..n_max {
                sum += w * self.coeffs[n];
                w *= mu / (n + 1) as f64;
                if w < 1e-320 {
                    break;
                }
            }
            w = w_mode;
            for n in (0..mode).rev() {
                w *= (n + 1) as f64 / mu;
                if w < 1e-320 {
                    break;
                }
                sum += w * self.coeffs[n];
            }
        }
        Ok(sum)
    }
}

fn ln_factorial(n: usize) -> f64 {
    const TABLE_LEN: usize = 32;
    if n < TABLE_LEN {
        let mut acc = 0.0;
        for k in 2..=n {
            acc += (k as f64).ln();
        }
        return acc;
    }
    // Stirling series.
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv * inv * (1.0 / 360.0 - inv * inv / 1260.0))
}

fn lifo_po_pdf(buf: usize, lambda_r: f64, lambda_e: f64) -> Result<PhaseTypePdf> {
    let total = lambda_r + lambda_e;
    // States k = 1..=buf (stack position from the top).
    let mut p = vec![vec![0.0; buf]; buf];
    for k in 1..=buf {
        if k >= 2 {
            p[k - 1][k - 2] = lambda_e / total;
        }
        if k < buf {
            p[k - 1][k] = lambda_r / total;
        }
        // k = buf: an arrival evicts the tagged bottom entry (absorbed lost).
    }
    let mut a = vec![0.0; buf];
    a[0] = 1.0; // a new arrival always lands on top of the stack
    let mut c = vec![0.0; buf];
    c[0] = lambda_e;
    let ps = service_probability(lambda_r / lambda_e, buf)?;
    Ok(PhaseTypePdf::build(&p, &a, &c, total, ps))
}

fn fifo_po_pdf(buf: usize, lambda_r: f64, lambda_e: f64) -> Result<PhaseTypePdf> {
    let total = lambda_r + lambda_e;
    // States (k, j): queue position k (1 = head), j admitted behind.
    let mut index = vec![vec![usize::MAX; buf + 1]; buf + 1];
    let mut states = Vec::new();
    for k in 1..=buf {
        for j in 0..=(buf - k) {
            index[k][j] = states.len();
            states.push((k, j));
        }
    }
    let n = states.len();
    let mut p = vec![vec![0.0; n]; n];
    let mut c = vec![0.0; n];
    for (i, &(k, j)) in states.iter().enumerate() {
        if k == 1 {
            c[i] = lambda_e;
        } else {
            p[i][index[k - 1][j]] = lambda_e / total;
        }
        if j + k < buf {
            p[i][index[k][j + 1]] = lambda_r / total;
        } else if k > 1 {
            p[i][index[k - 1][j + 1]] = lambda_r / total;
        }
        // k == 1 with a full buffer: the arrival evicts the tagged head.
    }
    // PASTA entry mixture over the seen occupancy, conditioned on buffering.
    let rho = lambda_r / lambda_e;
    let mut weight = vec![0.0; buf + 1];
    if (rho - 1.0).abs() < CRITICAL_LOAD_TOL {
        weight.fill(1.0);
    } else if rho < 1.0 {
        let mut cur = 1.0;
        for slot in weight.iter_mut() {
            *slot = cur;
            cur *= rho;
        }
    } else {
        let inv = 1.0 / rho;
        let mut cur = 1.0;
        for slot in weight.iter_mut().rev() {
            *slot = cur;
            cur *= inv;
        }
    }
    let total_w: f64 = weight.iter().sum();
    let mut a = vec![0.0; n];
    for (seen, &wt) in weight.iter().enumerate() {
        let k = (seen + 1).min(buf);
        a[index[k][0]] += wt / total_w;
    }
    let ps = service_probability(rho, buf)?;
    Ok(PhaseTypePdf::build(&p, &a, &c, total, ps))
}

/// Service-conditioned wait-time density for a discipline with arrival rate
/// `lambda_r` and serving rate `lambda_e`.
pub fn conditioned_wait_pdf(
    discipline: DisciplineId,
    lambda_r: f64,
    lambda_e: f64,
) -> Result<WaitPdf> {
    match discipline {
        DisciplineId::FifoInf => {
            fifo_inf_wait_pdf(lambda_r, lambda_e, 0.0)?;
            Ok(WaitPdf::FifoInf { lambda_r, lambda_e })
        }
        DisciplineId::LifoInf => {
            lifo_inf_busy_pdf(lambda_r, lambda_e, 0.0)?;
            Ok(WaitPdf::LifoInf { lambda_r, lambda_e })
        }
        DisciplineId::FifoPo(b) => {
            if b == 0 {
                return Err(Error::InvalidParameter("pushout pdf needs buf >= 1".into()));
            }
            Ok(WaitPdf::PhaseType(fifo_po_pdf(b, lambda_r, lambda_e)?))
        }
        DisciplineId::LifoPo(b) => {
            if b == 0 {
                return Err(Error::InvalidParameter("pushout pdf needs buf >= 1".into()));
            }
            Ok(WaitPdf::PhaseType(lifo_po_pdf(b, lambda_r, lambda_e)?))
        }
    }
}

/// Pushes a wait-time density through a strictly decreasing fidelity curve:
/// `f_F(x) = f_W(F^{-1}(x)) |dF^{-1}/dx|`, defined for
/// `x` in `(floor, F(0))`.
pub fn fidelity_pdf_transform<F: Fn(f64) -> f64>(
    wait_pdf: F,
    curve: &FidelityCurve,
    x: f64,
) -> Result<f64> {
    let t = curve.inverse(x)?;
    let jac = curve.inverse_jacobian(x)?;
    Ok(wait_pdf(t) * jac)
}
