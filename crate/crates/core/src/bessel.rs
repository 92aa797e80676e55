//! Modified Bessel function of the first kind, order one.
//!
//! Ascending power series for moderate arguments, switching to the scaled
//! asymptotic expansion once `exp(x)` would overflow intermediate terms.

/// Arguments above this use the asymptotic form of [`i1_scaled`].
pub const SERIES_CAP: f64 = 700.0;

/// `I_1(x)` for `x >= 0` by the ascending series
/// `(x/2) * sum_k (x^2/4)^k / (k! (k+1)!)`, truncated when the term ratio
/// drops below 1e-16.
///
/// Overflows to `inf` for `x` far beyond [`SERIES_CAP`]; callers working near
/// the exponential envelope should use [`i1_scaled`].
pub fn i1(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "i1 defined here for nonnegative arguments");
    if x == 0.0 {
        return 0.0;
    }
    if x > SERIES_CAP {
        return i1_scaled(x) * x.exp();
    }
    let q = 0.25 * x * x;
    let mut term = 0.5 * x; // k = 0 term
    let mut sum = term;
    let mut k = 1.0f64;
    loop {
        term *= q / (k * (k + 1.0));
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `exp(-x) * I_1(x)` for large `x`, via the asymptotic expansion
/// `1/sqrt(2 pi x) * (1 - 3/(8x) - 15/(2!(8x)^2) - ...)`.
pub fn i1_scaled(x: f64) -> f64 {
    if x <= SERIES_CAP {
        return i1(x) * (-x).exp();
    }
    // term_k = term_{k-1} * ((2k-1)^2 - 4) / (8 k x), carrying the (-1)^k
    // alternation of the expansion.
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1u32..=8 {
        let j = (2 * k - 1) as f64;
        term *= (j * j - 4.0) / (k as f64 * 8.0 * x);
        sum += term;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
