//! Weak supermajorization on extended wait vectors.
//!
//! Vectors live in `R+^{n-m} x {inf}^m`: finite entries are waits of served
//! requests, infinite entries mark requests removed without service. All
//! order comparisons run over ascending prefix sums of the finite entries
//! only, exactly `k = 1..n-m`.

use crate::error::{Error, Result};

/// Comparison slack absorbing float rounding in prefix sums.
pub const MAJORIZE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitEntry {
    Finite(f64),
    Infinite,
}

impl WaitEntry {
    pub fn finite(&self) -> Option<f64> {
        match self {
            WaitEntry::Finite(v) => Some(*v),
            WaitEntry::Infinite => None,
        }
    }
}

/// A wait vector with `n` entries of which `m` are infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedWaitVector {
    entries: Vec<WaitEntry>,
}

impl ExtendedWaitVector {
    pub fn new(entries: Vec<WaitEntry>) -> Result<Self> {
        for e in &entries {
            if let WaitEntry::Finite(v) = e {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "finite wait entries must be >= 0, got {v}"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds from raw floats, mapping `f64::INFINITY` to the removed marker.
    pub fn from_waits(waits: &[f64]) -> Result<Self> {
        Self::new(
            waits
                .iter()
                .map(|&w| if w.is_infinite() { WaitEntry::Infinite } else { WaitEntry::Finite(w) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, WaitEntry::Infinite)).count()
    }

    pub fn entries(&self) -> &[WaitEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> WaitEntry {
        self.entries[i]
    }

    /// Finite entries in ascending order (infinities sort behind them and
    /// never enter prefix sums).
    pub fn sorted_finite(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().filter_map(|e| e.finite()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Mean of `phi` over served (finite) entries; the empirical fidelity
    /// functional that the majorization order controls.
    pub fn mean_of<F: Fn(f64) -> f64>(&self, phi: F) -> Option<f64> {
        let finite = self.sorted_finite();
        if finite.is_empty() {
            return None;
        }
        Some(finite.iter().map(|&w| phi(w)).sum::<f64>() / finite.len() as f64)
    }
}

fn check_comparable(x: &ExtendedWaitVector, y: &ExtendedWaitVector) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Incomparable(format!("lengths {} vs {}", x.len(), y.len())));
    }
    if x.infinite_count() != y.infinite_count() {
        return Err(Error::Incomparable(format!(
            "removed counts {} vs {}",
            x.infinite_count(),
            y.infinite_count()
        )));
    }
    Ok(())
}

/// True iff `y` weakly supermajorizes `x` (written `x <w y`):
/// `sum_{i<=k} x_(i) >= sum_{i<=k} y_(i)` for every `k = 1..n-m`, with
/// entries in ascending order.
pub fn weak_supermajorizes(x: &ExtendedWaitVector, y: &ExtendedWaitVector) -> Result<bool> {
    check_comparable(x, y)?;
    let xs = x.sorted_finite();
    let ys = y.sorted_finite();
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (a, b) in xs.iter().zip(ys.iter()) {
        sx += a;
        sy += b;
        if sx < sy - MAJORIZE_EPS * (1.0 + sx.abs().max(sy.abs())) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// T-transform: entries `i` and `j` are replaced by the convex combinations
/// `lam x_i + (1-lam) x_j` and `(1-lam) x_i + lam x_j`. The result is weakly
/// supermajorized by `x` (`T(x) <w x`); `lam = 0` is the swap `Q_ij`.
pub fn t_transform(
    x: &ExtendedWaitVector,
    i: usize,
    j: usize,
    lam: f64,
) -> Result<ExtendedWaitVector> {
    if i >= x.len() || j >= x.len() || i == j {
        return Err(Error::InvalidParameter(format!(
            "indices ({i}, {j}) invalid for length {}",
            x.len()
        )));
    }
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::InvalidParameter(format!("lambda must be in [0, 1], got {lam}")));
    }
    let (xi, xj) = match (x.get(i).finite(), x.get(j).finite()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidParameter(
                "T-transform needs finite entries at both indices".into(),
            ))
        }
    };
    let mut entries = x.entries.clone();
    entries[i] = WaitEntry::Finite(lam * xi + (1.0 - lam) * xj);
    entries[j] = WaitEntry::Finite((1.0 - lam) * xi + lam * xj);
    ExtendedWaitVector::new(entries)
}

/// Scales entry `j` by `alpha` in `[0, 1]`. The original vector is weakly
/// supermajorized by the result (`x <w S_j(x)`): shrinking one wait can only
/// lower the prefix sums.
pub fn s_scale(x: &ExtendedWaitVector, j: usize, alpha: f64) -> Result<ExtendedWaitVector> {
    if j >= x.len() {
        return Err(Error::InvalidParameter(format!("index {j} invalid for length {}", x.len())));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let xj = x
        .get(j)
        .finite()
        .ok_or_else(|| Error::InvalidParameter("S-transform needs a finite entry".into()))?;
    let mut entries = x.entries.clone();
    entries[j] = WaitEntry::Finite(alpha * xj);
    ExtendedWaitVector::new(entries)
}

/// Checks the order-to-expectation implication for a supplied function:
/// returns `sum phi(x_(i)) <= sum phi(y_(i))` over the finite entries. For
/// decreasing convex `phi` this must hold whenever `x <w y`.
pub fn convex_order_check<F: Fn(f64) -> f64>(
    x: &ExtendedWaitVector,
    y: &ExtendedWaitVector,
    phi: F,
) -> Result<bool> {
    check_comparable(x, y)?;
    let sx: f64 = x.sorted_finite().iter().map(|&w| phi(w)).sum();
    let sy: f64 = y.sorted_finite().iter().map(|&w| phi(w)).sum();
    Ok(sx <= sy + MAJORIZE_EPS * (1.0 + sx.abs().max(sy.abs())))
}
