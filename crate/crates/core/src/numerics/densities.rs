use crate::scalar::Scalar;

/// `log N(x; mean, var)`.
pub fn normal_log_density<T: Scalar>(x: T, mean: T, var: T) -> T {
    let d = x - mean;
    -T::lit(0.5) * (d * d / var + (T::TAU() * var).ln())
}

/// Log density of the double-exponential with scale `1/√2` (unit variance).
pub fn laplace_log_density<T: Scalar>(x: T, mu: T) -> T {
    let sqrt2 = T::SQRT_2();
    -T::lit(0.5) * T::LN_2() - sqrt2 * (x - mu).abs()
}

/// `(log f₀(x|μ), log f₁(x|μ))`: unit-variance double-exponential and N(μ, 1).
pub fn standard_densities<T: Scalar>(x: T, mu: T) -> (T, T) {
    (laplace_log_density(x, mu), normal_log_density(x, mu, T::one()))
}
