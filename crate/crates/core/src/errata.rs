//! Numeric witnesses behind the two closed-form corrections this crate
//! ships (see `ERRATA.md` at the repository root).
//!
//! Each witness evaluates the corrected form, the printed form it replaces,
//! and an independent reference (quadrature of the density, or a dense
//! linear-system solve of the recurrence) at the same point, so the reader
//! can see which one the reference agrees with.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::laplace::{fifo_inf_laplace, fifo_inf_wait_pdf, lifo_po_laplace};
use crate::quad;

/// FIFO infinite-buffer transform: corrected `(le - lr)/(le - lr + s)`
/// versus the printed `-s` denominator, referenced against quadrature of
/// the wait density.
#[derive(Debug, Clone, Copy)]
pub struct FifoSignWitness {
    pub lambda_r: f64,
    pub lambda_e: f64,
    pub s: f64,
    pub corrected: f64,
    pub printed: f64,
    pub quadrature: f64,
}

impl FifoSignWitness {
    pub fn corrected_error(&self) -> f64 {
        (self.corrected - self.quadrature).abs()
    }

    pub fn printed_error(&self) -> f64 {
        (self.printed - self.quadrature).abs()
    }
}

pub fn fifo_sign_witnesses(lambda_r: f64, lambda_e: f64, s_grid: &[f64]) -> Result<Vec<FifoSignWitness>> {
    let transform = fifo_inf_laplace(lambda_r, lambda_e)?;
    let rate = lambda_e - lambda_r;
    s_grid
        .iter()
        .map(|&s| {
            let quadrature = quad::integrate_to_inf(
                &|t| (-s * t).exp() * fifo_inf_wait_pdf(lambda_r, lambda_e, t).unwrap(),
                1e-12,
            );
            Ok(FifoSignWitness {
                lambda_r,
                lambda_e,
                s,
                corrected: transform.eval(s),
                printed: rate / (rate - s),
                quadrature,
            })
        })
        .collect()
}

/// Pushout-LIFO position transform: the re-derived closed form versus the
/// printed one whose denominator depends on the position and vanishes at
/// the buffer boundary, referenced against a dense solve of the recurrence.
#[derive(Debug, Clone, Copy)]
pub struct LifoPoFormWitness {
    pub buf: usize,
    pub lambda_r: f64,
    pub lambda_e: f64,
    pub s: f64,
    pub rederived: f64,
    pub printed: f64,
    pub linear_solve: f64,
}

impl LifoPoFormWitness {
    pub fn rederived_error(&self) -> f64 {
        (self.rederived - self.linear_solve).abs()
    }

    pub fn printed_error(&self) -> f64 {
        (self.printed - self.linear_solve).abs()
    }
}

/// Dense solve of the position recurrence `W(k) = pr W(k+1) + pe W(k-1)`
/// with `W(0) = 1` and eviction at the bottom of a full stack.
fn lifo_po_dense_solve(buf: usize, lambda_r: f64, lambda_e: f64, s: f64) -> f64 {
    let d = lambda_r + lambda_e + s;
    let mut a = DMatrix::<f64>::zeros(buf, buf);
    let mut rhs = DVector::<f64>::zeros(buf);
    for k in 1..=buf {
        let row = k - 1;
        a[(row, row)] = d;
        if k < buf {
            a[(row, k)] = -lambda_r;
        }
        if k >= 2 {
            a[(row, k - 2)] = -lambda_e;
        } else {
            rhs[row] = lambda_e;
        }
    }
    a.lu().solve(&rhs).expect("tridiagonal system is nonsingular")[0]
}

pub fn lifo_po_form_witnesses(
    buf: usize,
    lambda_r: f64,
    lambda_e: f64,
    s_grid: &[f64],
) -> Result<Vec<LifoPoFormWitness>> {
    let transforms = lifo_po_laplace(buf, lambda_r, lambda_e)?;
    s_grid
        .iter()
        .map(|&s| {
            let d = lambda_r + lambda_e + s;
            let disc = (d * d - 4.0 * lambda_r * lambda_e).max(0.0).sqrt();
            let r1 = (d - disc) / (2.0 * lambda_r);
            let r2 = (d + disc) / (2.0 * lambda_r);
            let b = buf as i32;
            // Printed form at k = 1; its denominator r2^B - r2^k is already
            // degenerate for B = 1 and disagrees with the recurrence for all
            // B.
            let printed = (r1 * r2.powi(b) - r2 * r1.powi(b)) / (r2.powi(b) - r2);
            Ok(LifoPoFormWitness {
                buf,
                lambda_r,
                lambda_e,
                s,
                rederived: transforms.joint.eval(s),
                printed,
                linear_solve: lifo_po_dense_solve(buf, lambda_r, lambda_e, s),
            })
        })
        .collect()
}
