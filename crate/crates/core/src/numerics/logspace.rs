use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Unnormalized log-weights (nats).
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightVector<T: Scalar = f64> {
    logw: Vec<T>,
}

impl<T: Scalar> LogWeightVector<T> {
    pub fn new(logw: Vec<T>) -> Self {
        Self { logw }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.logw
    }

    pub fn len(&self) -> usize {
        self.logw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logw.is_empty()
    }

    pub fn log_total(&self) -> Result<T> {
        log_sum_exp(&self.logw)
    }

    /// Shift so that `exp(logw)` sums to one.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.log_total()?;
        Ok(Self {
            logw: self.logw.iter().map(|&w| w - total).collect(),
        })
    }

    /// Normalized weights on the natural scale.
    pub fn probabilities(&self) -> Result<Vec<T>> {
        let total = self.log_total()?;
        Ok(self.logw.iter().map(|&w| (w - total).exp()).collect())
    }
}

impl<T: Scalar> From<Vec<T>> for LogWeightVector<T> {
    fn from(logw: Vec<T>) -> Self {
        Self::new(logw)
    }
}

/// `log Σ exp(xᵢ)`, shifted by the maximum so entries far below zero do not
/// underflow.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return domain("log_sum_exp of an empty vector");
    }
    let mut m = T::neg_infinity();
    for &x in xs {
        if x.is_nan() {
            return domain("log_sum_exp: NaN entry");
        }
        if x > m {
            m = x;
        }
    }
    if m == T::neg_infinity() {
        return domain("log_sum_exp: all entries are -inf");
    }
    if m == T::infinity() {
        return Ok(m);
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    Ok(m + s.ln())
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(a) - exp(b))` for `a >= b`; `-inf` when they are equal.
pub fn log_diff_exp<T: Scalar>(a: T, b: T) -> T {
    if b == T::neg_infinity() {
        return a;
    }
    let d = b - a;
    if d >= T::zero() {
        return T::neg_infinity();
    }
    // ln(1 - e^d): the two branches keep full precision on either side of -ln 2
    if d > -T::LN_2() {
        a + (-d.exp_m1()).ln()
    } else {
        a + (-d.exp()).ln_1p()
    }
}
