use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use libm::{erf, erfc};
use statrs::function::erf::erfc_inv;

use crate::error::{domain, Result};
use crate::numerics::logspace::log_diff_exp;

/// `ln √(2π)`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Below this point log Φ switches to the asymptotic Mills-ratio series.
const ASYMPTOTIC_CUTOFF: f64 = -20.0;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// `log Φ(z)`, accurate far into the lower tail.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > 0.0 {
        (-normal_cdf(-z)).ln_1p()
    } else if z >= ASYMPTOTIC_CUTOFF {
        normal_cdf(z).ln()
    } else if z == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        // Φ(z) = φ(z)/|z| · Σ (-1)^k (2k-1)!! / z^{2k}
        let inv_z2 = 1.0 / (z * z);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=10 {
            term *= -((2 * k - 1) as f64) * inv_z2;
            series += term;
        }
        -0.5 * z * z - LN_SQRT_2PI - (-z).ln() + series.ln()
    }
}

/// Standard normal quantile function.
pub fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn log_std_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// `log(Φ(hi) − Φ(lo))` for `lo < hi` on the extended real line.
///
/// Intervals are reflected into the lower half so both tail probabilities are
/// taken from the nearer tail; narrow intervals are integrated directly to
/// avoid cancellation between two nearly equal CDF values.
pub fn log_phi_interval(lo: f64, hi: f64) -> Result<f64> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return domain(format!("log_phi_interval requires lo < hi, got ({lo}, {hi})"));
    }
    if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
        return Ok(0.0);
    }
    let (lo, hi) = if lo + hi > 0.0 { (-hi, -lo) } else { (lo, hi) };

    if lo.is_finite() && hi.is_finite() {
        let width = hi - lo;
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if width * scale <= 0.25 {
            return Ok(log_narrow_mass(lo, hi));
        }
    }

    if hi <= 0.0 {
        Ok(log_diff_exp(log_normal_cdf(hi), log_normal_cdf(lo)))
    } else {
        // straddles zero: both erf terms are positive, no cancellation
        Ok((0.5 * (erf(hi * FRAC_1_SQRT_2) + erf(-lo * FRAC_1_SQRT_2))).ln())
    }
}

// Gauss–Legendre on a short interval, factored around the midpoint density.
fn log_narrow_mass(lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let anchor = log_std_normal_pdf(mid);
    let mut acc = 0.0;
    for (&x, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        for z in [mid - half * x, mid + half * x] {
            acc += w * (log_std_normal_pdf(z) - anchor).exp();
        }
    }
    anchor + (half * acc).ln()
}
