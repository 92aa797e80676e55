//! Shared helpers for the integration suites.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

use telequeue::quad;

/// Pearson chi-square goodness-of-fit p-value of `samples` against the
/// density `pdf` supported on `[lo, hi)` (`hi = None` for an unbounded right
/// tail).
///
/// Bins are empirical quantiles, so each holds about `n/K` observations no
/// matter how concentrated the density is; expected masses come from
/// quadrature of the model density over the same edges.
pub fn chi_square_p_value<F: Fn(f64) -> f64>(
    samples: &[f64],
    pdf: F,
    lo: f64,
    hi: Option<f64>,
) -> f64 {
    let n = samples.len();
    assert!(n >= 2000, "need a real sample for a chi-square test");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bins = 24usize;

    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(lo);
    for i in 1..bins {
        let q = sorted[(n * i) / bins];
        // Skip degenerate duplicates.
        if q > *edges.last().unwrap() {
            edges.push(q);
        }
    }
    let k = edges.len(); // number of cells
    assert!(k >= 8, "sample too degenerate for quantile binning");

    let mut observed = vec![0.0f64; k];
    for &s in &sorted {
        // Find the cell: last edge <= s.
        let idx = match edges.binary_search_by(|e| e.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        observed[idx.min(k - 1)] += 1.0;
    }

    let mut expected = vec![0.0f64; k];
    for i in 0..k {
        let a = edges[i];
        expected[i] = if i + 1 < k {
            quad::integrate(&|x| pdf(x), a, edges[i + 1], 1e-10)
        } else {
            match hi {
                Some(b) => quad::integrate(&|x| pdf(x), a, b, 1e-10),
                None => quad::integrate_to_inf(&|t| pdf(a + t), 1e-10),
            }
        }
        .max(0.0)
            * n as f64;
    }

    // Merge forward so each cell has expected mass >= 5.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..k {
        acc.0 += observed[i];
        acc.1 += expected[i];
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        if let Some(last) = merged.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            merged.push(acc);
        }
    }
    assert!(merged.len() >= 5, "too few usable bins");

    let stat: f64 = merged.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (merged.len() - 1) as f64;
    let dist = ChiSquared::new(dof).unwrap();
    1.0 - dist.cdf(stat)
}
