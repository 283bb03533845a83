//! Floating-point helpers. Without the `std` feature everything goes through
//! `libm`; with it, `exp`, `ln` and `ln_1p` use the platform library, which is
//! noticeably faster in the bucket-tree inner loop.

use alloc::vec::Vec;

#[inline]
pub fn exp(x: f64) -> f64 {
    #[cfg(feature = "std")]
    return x.exp();
    #[cfg(not(feature = "std"))]
    return libm::exp(x);
}

#[inline]
pub fn ln(x: f64) -> f64 {
    #[cfg(feature = "std")]
    return x.ln();
    #[cfg(not(feature = "std"))]
    return libm::log(x);
}

/// `ln(1 + x)`.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    #[cfg(feature = "std")]
    return x.ln_1p();
    #[cfg(not(feature = "std"))]
    return libm::log1p(x);
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + ln_1p(exp(lo - hi))
}

/// `ln(sum(e^x))` with max subtraction; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ln(xs.iter().map(|&x| exp(x - max)).sum::<f64>())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `C(n, k)` as a float; exact while the result fits in 53 bits, from
/// log-gamma once the integer product would overflow.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return exp(ln_binomial(n, k)),
        }
    }
    acc as f64
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * libm::log2(p) + (1.0 - p) * libm::log2(1.0 - p))
}

/// Probability mass of `Binomial(n, p)` for every count `0..=n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if p <= 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            if p >= 1.0 {
                return if k == n { 1.0 } else { 0.0 };
            }
            exp(ln_binomial(n, k) + k as f64 * ln(p) + (n - k) as f64 * libm::log1p(-p))
        })
        .collect()
}

/// Two-sided exact binomial test of `k` successes in `n` trials with success
/// probability `p`: the total mass of outcomes no likelier than `k`.
pub fn binomial_test(k: usize, n: usize, p: f64) -> f64 {
    let pmf = binomial_pmf(n, p);
    let observed = pmf[k];
    let tol = observed * (1.0 + 1e-7);
    pmf.iter().filter(|&&q| q <= tol).sum::<f64>().min(1.0)
}

/// [`binomial_test`] against `p = 1/2`.
pub fn binomial_test_half(k: usize, n: usize) -> f64 {
    binomial_test(k, n, 0.5)
}

/// Smallest distance `d` from `1/2` such that a fraction `1/2 +- d` of `n`
/// Bernoulli outcomes is significant at `level` in the two-sided exact test.
pub fn significance_band(n: usize, level: f64) -> f64 {
    for k in (0..=n / 2).rev() {
        if binomial_test_half(k, n) < level {
            return 0.5 - k as f64 / n as f64;
        }
    }
    0.5
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// Minimises a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (sqrt(5.0) - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}
