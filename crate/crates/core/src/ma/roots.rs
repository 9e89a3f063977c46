use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Inverse roots `λ` of the lag polynomial `∏(1 − λᵢB)`: `r` real roots in
/// (−1, 1) and one representative per complex-conjugate pair in the open
/// unit disk.
///
/// Roots are kept canonical: reals ascending, complex representatives in the
/// upper half-plane ordered by argument.
#[derive(Debug, Clone, PartialEq)]
pub struct RootsParam<T: Scalar = f64> {
    real_roots: Vec<T>,
    complex_roots: Vec<Complex<T>>,
}

impl<T: Scalar> RootsParam<T> {
    pub fn new(real_roots: Vec<T>, complex_roots: Vec<Complex<T>>) -> Result<Self> {
        if real_roots.iter().any(|x| !(x.abs() < T::one())) {
            return domain("real roots must lie in (-1, 1)");
        }
        if complex_roots.iter().any(|z| !(z.norm_sqr() < T::one()) || z.im == T::zero() || z.im.is_nan()) {
            return domain("complex roots must lie in the open unit disk off the real axis");
        }
        Ok(Self::canonical(real_roots, complex_roots))
    }

    /// Canonical ordering without support checks; used for proposals that
    /// may leave the support.
    pub(crate) fn canonical(mut real_roots: Vec<T>, complex_roots: Vec<Complex<T>>) -> Self {
        real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut complex_roots: Vec<Complex<T>> =
            complex_roots.into_iter().map(|z| if z.im < T::zero() { z.conj() } else { z }).collect();
        complex_roots.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap_or(std::cmp::Ordering::Equal));
        Self { real_roots, complex_roots }
    }

    pub fn real_roots(&self) -> &[T] {
        &self.real_roots
    }

    pub fn complex_roots(&self) -> &[Complex<T>] {
        &self.complex_roots
    }

    /// Model order `p = r + 2c`.
    pub fn order(&self) -> usize {
        self.real_roots.len() + 2 * self.complex_roots.len()
    }

    /// Number of real roots `r`.
    pub fn real_count(&self) -> usize {
        self.real_roots.len()
    }

    pub fn complex_count(&self) -> usize {
        self.complex_roots.len()
    }

    pub(crate) fn in_support(&self) -> bool {
        self.real_roots.iter().all(|x| x.abs() < T::one())
            && self.complex_roots.iter().all(|z| z.norm_sqr() < T::one() && z.im != T::zero())
    }

    pub(crate) fn into_parts(self) -> (Vec<T>, Vec<Complex<T>>) {
        (self.real_roots, self.complex_roots)
    }
}

/// MA coefficients `ϑ₁..ϑ_p` with the series mean and innovation variance.
#[derive(Debug, Clone, PartialEq)]
pub struct MaCoefficients<T: Scalar = f64> {
    pub theta: Vec<T>,
    pub mu: T,
    pub sigma2: T,
}

impl<T: Scalar> MaCoefficients<T> {
    /// Zero-mean, unit-variance coefficients.
    pub fn standard(theta: Vec<T>) -> Self {
        Self { theta, mu: T::zero(), sigma2: T::one() }
    }

    pub fn order(&self) -> usize {
        self.theta.len()
    }
}

/// Complex coefficients of `∏(1 − λᵢB)` over every root and conjugate,
/// constant term first.
pub fn expand_roots<T: Scalar>(roots: &RootsParam<T>) -> Vec<Complex<T>> {
    let mut poly = vec![Complex::new(T::one(), T::zero())];
    let factors = roots
        .real_roots
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .chain(roots.complex_roots.iter().flat_map(|&z| [z, z.conj()]));
    for lambda in factors {
        let mut next = poly.clone();
        next.push(Complex::new(T::zero(), T::zero()));
        for (k, &c) in poly.iter().enumerate() {
            next[k + 1] = next[k + 1] - lambda * c;
        }
        poly = next;
    }
    poly
}

/// `ϑ` with `1 + Σϑₖ Bᵏ = ∏(1 − λᵢB)`.
pub fn roots_to_coeffs<T: Scalar>(roots: &RootsParam<T>) -> Vec<T> {
    expand_roots(roots).into_iter().skip(1).map(|c| c.re).collect()
}

/// Inverse roots of `1 + Σϑₖ Bᵏ`, i.e. the zeros of
/// `zᵖ + ϑ₁zᵖ⁻¹ + … + ϑ_p`, from companion-matrix eigenvalues polished by
/// Newton steps. Roots with `|Im| < imag_tol` are classified as real.
pub fn coeffs_to_roots(theta: &[f64], imag_tol: f64) -> Result<RootsParam<f64>> {
    let p = theta.len();
    if p == 0 {
        return Ok(RootsParam { real_roots: vec![], complex_roots: vec![] });
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        companion[(0, j)] = -theta[j];
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let eig = companion.complex_eigenvalues();
    let eval = |z: Complex<f64>| {
        // monic polynomial and its derivative by Horner
        let (mut f, mut df) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        for &c in theta {
            df = df * z + f;
            f = f * z + c;
        }
        (f, df)
    };
    let mut reals = Vec::new();
    let mut complex = Vec::new();
    for &z0 in eig.iter() {
        let mut z = z0;
        for _ in 0..8 {
            let (f, df) = eval(z);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            z -= step;
            if step.norm() < 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        if z.im.abs() < imag_tol {
            reals.push(z.re);
        } else if z.im > 0.0 {
            complex.push(z);
        }
    }
    if reals.len() + 2 * complex.len() != p {
        return Err(Error::InvariantViolation(format!(
            "factorization found {} real and {} complex roots for order {p}",
            reals.len(),
            complex.len()
        )));
    }
    Ok(RootsParam::canonical(reals, complex))
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Number of feasible configurations `⌊p/2⌋ + 1`.
pub(crate) fn configuration_count(p: usize) -> usize {
    p / 2 + 1
}

/// Log density of the root prior: a configuration uniform over the
/// `⌊p/2⌋ + 1` feasible real-root counts, then independent uniforms on
/// (−1, 1) and the unit disk. `−∞` outside the support.
pub fn log_root_prior(roots: &RootsParam<f64>) -> f64 {
    if !roots.in_support() {
        return f64::NEG_INFINITY;
    }
    -(configuration_count(roots.order()) as f64).ln()
        + roots.real_count() as f64 * 0.5f64.ln()
        - roots.complex_count() as f64 * std::f64::consts::PI.ln()
}

/// Prior density of the unordered root multiset (what the canonical
/// representation parameterizes): the labelled density times `r! c!`.
pub(crate) fn log_multiset_prior(roots: &RootsParam<f64>) -> f64 {
    log_root_prior(roots) + ln_factorial(roots.real_count()) + ln_factorial(roots.complex_count())
}

/// Uniform draw from the unit disk.
pub(crate) fn uniform_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    loop {
        let (x, y) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if x * x + y * y < 1.0 && y != 0.0 {
            return Complex::new(x, y);
        }
    }
}

/// Draws a configuration uniformly, then the roots from their uniform
/// priors.
pub fn sample_root_prior<R: Rng + ?Sized>(p: usize, rng: &mut R) -> RootsParam<f64> {
    let c = rng.random_range(0..configuration_count(p));
    let r = p - 2 * c;
    let reals = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
    let complex = (0..c).map(|_| uniform_disk(rng)).collect();
    RootsParam::canonical(reals, complex)
}
