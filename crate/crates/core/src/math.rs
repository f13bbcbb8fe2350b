//! Small numerical helpers on top of `libm` (the crate is `no_std`).
//!
//! Conventions: natural logarithms; `0 ln 0 = 0`; a KL divergence with
//! positive mass where the reference is zero is `+inf`.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * ln(x)
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlogx(x)).sum::<f64>()
}

/// `KL[p || q]` given `ln q`.
pub fn kl_log(p: &[f64], log_q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &lq) in p.iter().zip(log_q) {
        if pi > 0.0 {
            if lq == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            acc += pi * (ln(pi) - lq);
        }
    }
    acc
}

/// Expectation of `values` under `p`, skipping zero-mass entries.
pub fn expect(p: &[f64], values: &[f64]) -> f64 {
    p.iter()
        .zip(values)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &v)| pi * v)
        .sum()
}

/// `ln sum exp(x)` with max subtraction. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + ln(xs.iter().map(|&x| exp(x - m)).sum::<f64>())
}

/// Indices whose value lies within `tol` of the maximum.
pub fn argmax_set(values: &[f64], candidates: impl Iterator<Item = usize> + Clone, tol: f64) -> alloc::vec::Vec<usize> {
    let best = candidates
        .clone()
        .map(|i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    candidates.filter(|&i| values[i] >= best - tol).collect()
}
