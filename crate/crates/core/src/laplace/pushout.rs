//! Wait-time transforms for the finite pushout disciplines.
//!
//! Both are built from the absorbing jump chain of a tagged request. Under
//! pushout, an arrival to a full buffer always enters and the oldest
//! buffered item is evicted, so the tagged request's fate is governed by its
//! position and, for FIFO, the count behind it.

use crate::error::{Error, Result};
use crate::markov::{service_probability, CRITICAL_LOAD_TOL};

use super::{DisciplineId, WaitTransform};

/// Joint and service-conditioned transforms for one pushout discipline.
#[derive(Debug)]
pub struct PushoutTransforms {
    /// `E[e^{-sW}; served]`; equals `P_s` at `s = 0`.
    pub joint: WaitTransform,
    /// `E[e^{-sW} | served]`; equals 1 at `s = 0`.
    pub conditioned: WaitTransform,
}

fn check_po_args(buf: usize, lambda_r: f64, lambda_e: f64) -> Result<()> {
    if buf == 0 {
        return Err(Error::InvalidParameter("pushout transform needs buf >= 1".into()));
    }
    for (name, v) in [("lambda_r", lambda_r), ("lambda_e", lambda_e)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Position-resolved FIFO-PO transforms `W*(j, k, s)`: the tagged request
/// sits in queue position `k` (1 = head) with `j` admitted behind it.
///
/// Returned as `w[k][j]` for `0 <= k <= buf`, `0 <= j <= buf - k`; `k = 0`
/// means already served. Service advances the queue, an arrival to a full
/// buffer evicts the head (the oldest), shifting the tagged request forward
/// and appending the newcomer behind it.
pub(crate) fn fifo_po_positions(buf: usize, lambda_r: f64, lambda_e: f64, s: f64) -> Vec<Vec<f64>> {
    let d = lambda_r + lambda_e + s;
    let pr = lambda_r / d;
    let pe = lambda_e / d;
    let mut w: Vec<Vec<f64>> = (0..=buf).map(|k| vec![0.0; buf - k + 1]).collect();
    for slot in w[0].iter_mut() {
        *slot = 1.0;
    }
    for k in 1..=buf {
        let jmax = buf - k;
        w[k][jmax] = if k == 1 {
            // Full buffer, tagged at the head: the next request evicts it.
            pe
        } else {
            pr * w[k - 1][jmax + 1] + pe * w[k - 1][jmax]
        };
        for j in (0..jmax).rev() {
            w[k][j] = pr * w[k][j + 1] + pe * w[k - 1][j];
        }
    }
    w
}

/// Arrival-averaged joint transform for FIFO-PO: an admitted arrival that
/// sees `n` buffered enters position `n + 1` (position `buf` after an
/// eviction when the buffer was full), weighted by the stationary occupancy
/// conditioned on the request phase.
fn fifo_po_joint_value(buf: usize, lambda_r: f64, lambda_e: f64, s: f64) -> f64 {
    let w = fifo_po_positions(buf, lambda_r, lambda_e, s);
    let rho = lambda_r / lambda_e;
    // Weights proportional to rho^n for n = 0..=buf, largest term set to 1.
    let critical = (rho - 1.0).abs() < CRITICAL_LOAD_TOL;
    let mut weight = vec![0.0; buf + 1];
    if critical {
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
    let total: f64 = weight.iter().sum();
    let mut acc = 0.0;
    for (n, &wt) in weight.iter().enumerate() {
        let k = (n + 1).min(buf);
        acc += wt * w[k][0];
    }
    acc / total
}

/// FIFO with pushout: transforms assembled from the four-equation position
/// recursion.
pub fn fifo_po_laplace(buf: usize, lambda_r: f64, lambda_e: f64) -> Result<PushoutTransforms> {
    check_po_args(buf, lambda_r, lambda_e)?;
    let ps = service_probability(lambda_r / lambda_e, buf)?;
    let joint = WaitTransform::new(
        DisciplineId::FifoPo(buf),
        false,
        Box::new(move |s| fifo_po_joint_value(buf, lambda_r, lambda_e, s)),
    );
    let conditioned = WaitTransform::new(
        DisciplineId::FifoPo(buf),
        true,
        Box::new(move |s| fifo_po_joint_value(buf, lambda_r, lambda_e, s) / ps),
    );
    Ok(PushoutTransforms { joint, conditioned })
}

/// Characteristic roots of the LIFO-PO recurrence
/// `lambda_r x^2 - (lambda_r + lambda_e + s) x + lambda_e = 0`,
/// returned as `(r1, r2)` with `r1 <= r2`.
pub(crate) fn lifo_po_roots(lambda_r: f64, lambda_e: f64, s: f64) -> (f64, f64) {
    let d = lambda_r + lambda_e + s;
    let disc = (d * d - 4.0 * lambda_r * lambda_e).max(0.0).sqrt();
    ((d - disc) / (2.0 * lambda_r), (d + disc) / (2.0 * lambda_r))
}

/// Position-resolved LIFO-PO joint transform
/// `W*(k, s) = r1^k (1 - (r1/r2)^{B+1-k}) / (1 - (r1/r2)^{B+1})`,
/// the solution of the two-term recurrence with boundaries `W*(0) = 1`,
/// `W*(B+1) = 0`.
pub(crate) fn lifo_po_position(buf: usize, k: usize, lambda_r: f64, lambda_e: f64, s: f64) -> f64 {
    debug_assert!(k >= 1 && k <= buf);
    let (r1, r2) = lifo_po_roots(lambda_r, lambda_e, s);
    let ratio = r1 / r2;
    let kf = k as i32;
    if 1.0 - ratio < 1e-14 {
        // Repeated root (s = 0 at critical load): limit of the ratio of
        // vanishing terms.
        return r1.powi(kf) * (buf + 1 - k) as f64 / (buf + 1) as f64;
    }
    let l = ratio.ln();
    let num = -((buf + 1 - k) as f64 * l).exp_m1();
    let den = -((buf + 1) as f64 * l).exp_m1();
    r1.powi(kf) * num / den
}

/// LIFO with pushout: a new arrival always occupies position 1 of the stack,
/// so `W*(s) = W*(1, s)`.
pub fn lifo_po_laplace(buf: usize, lambda_r: f64, lambda_e: f64) -> Result<PushoutTransforms> {
    check_po_args(buf, lambda_r, lambda_e)?;
    let ps = service_probability(lambda_r / lambda_e, buf)?;
    let joint = WaitTransform::new(
        DisciplineId::LifoPo(buf),
        false,
        Box::new(move |s| lifo_po_position(buf, 1, lambda_r, lambda_e, s)),
    );
    let conditioned = WaitTransform::new(
        DisciplineId::LifoPo(buf),
        true,
        Box::new(move |s| lifo_po_position(buf, 1, lambda_r, lambda_e, s) / ps),
    );
    Ok(PushoutTransforms { joint, conditioned })
}
