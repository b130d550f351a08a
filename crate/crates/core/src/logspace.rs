//! Helpers for non-negative quantities stored as natural logarithms.
//!
//! Zero is represented by `f64::NEG_INFINITY`.

pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// `ln(e^a + e^b)`.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log-sum-exp of a slice.
pub fn ln_sum(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(LOG_ZERO, f64::max);
    if hi == LOG_ZERO {
        return LOG_ZERO;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    let s: f64 = xs.iter().map(|&x| (x - hi).exp()).sum();
    hi + s.ln()
}

/// Streaming log-sum-exp accumulator.
///
/// Keeps a running maximum and a linear sum scaled by it, rescaling only when
/// a larger term arrives.
#[derive(Debug, Clone, Copy)]
pub struct LnAcc {
    max: f64,
    sum: f64,
}

impl Default for LnAcc {
    fn default() -> Self {
        Self::new()
    }
}

impl LnAcc {
    pub fn new() -> Self {
        LnAcc { max: LOG_ZERO, sum: 0.0 }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == LOG_ZERO {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == LOG_ZERO {
            LOG_ZERO
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Converts a stored log value back to linear scale.
#[inline]
pub fn to_linear(x: f64) -> f64 {
    x.exp()
}

/// Relative error between two positive quantities given in log-space.
pub fn rel_err_ln(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO && b == LOG_ZERO {
        return 0.0;
    }
    (a - b).exp_m1().abs()
}
