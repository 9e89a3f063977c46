//! Descriptive statistics and goodness-of-fit tools used to validate the
//! samplers against their oracles.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

// Asymptotic Kolmogorov distribution quantile at 0.99.
const KS_C_1PCT: f64 = 1.627_62;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sd(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Linear-interpolation quantile of already sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% critical value of the one-sample KS statistic (asymptotic).
pub fn ks_critical_value_1pct(n: usize) -> f64 {
    KS_C_1PCT / (n as f64).sqrt()
}

/// 1% critical value of the two-sample KS statistic (asymptotic).
pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C_1PCT * ((n + m) / (n * m)).sqrt()
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p_value(stat: f64, dof: f64) -> f64 {
    ChiSquared::new(dof).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

/// Pearson goodness-of-fit of `xs` against the bin probabilities implied by
/// `cdf` on `edges`. Bins with expected count below 5 are merged with their
/// neighbour. Returns `(statistic, dof, p_value)`.
pub fn chi_square_gof(xs: &[f64], edges: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
    if edges.len() < 3 {
        return domain("chi-square GOF needs at least two bins");
    }
    let n = xs.len() as f64;
    let mut counts = vec![0.0; edges.len() - 1];
    let mut probs = Vec::with_capacity(counts.len());
    for w in edges.windows(2) {
        probs.push(cdf(w[1]) - cdf(w[0]));
    }
    // the outermost bins absorb everything beyond the edges
    let tail_lo = cdf(edges[0]);
    let tail_hi = 1.0 - cdf(*edges.last().unwrap());
    probs[0] += tail_lo;
    *probs.last_mut().unwrap() += tail_hi;
    for &x in xs {
        let k = edges.partition_point(|&e| e <= x).clamp(1, edges.len() - 1) - 1;
        counts[k] += 1.0;
    }
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (c, p) in counts.iter().zip(&probs) {
        acc.0 += c;
        acc.1 += p;
        if acc.1 * n >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return domain("chi-square GOF: fewer than two bins after merging");
    }
    let stat: f64 = merged.iter().map(|&(c, p)| (c - n * p).powi(2) / (n * p)).sum();
    let dof = (merged.len() - 1) as f64;
    Ok((stat, dof, chi_square_p_value(stat, dof)))
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..batches).map(|b| mean(&xs[b * size..(b + 1) * size])).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let s = sd(xs);
    let iqr = quantile(xs, 0.75) - quantile(xs, 0.25);
    let spread = if iqr > 0.0 { s.min(iqr / 1.34) } else { s };
    let spread = if spread > 0.0 { spread } else { 1.0 };
    0.9 * spread * (xs.len() as f64).powf(-0.2)
}

/// Gaussian kernel density estimate on `points` equally spaced grid values
/// spanning the data plus three bandwidths on either side.
///
/// Large inputs are linearly binned onto the output grid first.
pub fn kde(xs: &[f64], points: usize) -> Vec<(f64, f64)> {
    if xs.is_empty() || points == 0 {
        return Vec::new();
    }
    let h = silverman_bandwidth(xs);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    let grid: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let kernel = |d: f64| (-0.5 * (d / h).powi(2)).exp();

    if xs.len() * points <= 4_000_000 || points < 2 {
        return grid
            .iter()
            .map(|&g| (g, norm * xs.iter().map(|&x| kernel(g - x)).sum::<f64>()))
            .collect();
    }
    let mut bins = vec![0.0; points];
    for &x in xs {
        let pos = ((x - lo) / step).clamp(0.0, (points - 1) as f64);
        let k = (pos.floor() as usize).min(points - 2);
        let frac = pos - k as f64;
        bins[k] += 1.0 - frac;
        bins[k + 1] += frac;
    }
    let weights: Vec<f64> = (0..points).map(|d| kernel(d as f64 * step)).collect();
    grid.iter()
        .enumerate()
        .map(|(i, &g)| {
            let d: f64 = bins.iter().enumerate().map(|(j, &c)| c * weights[i.abs_diff(j)]).sum();
            (g, d * norm)
        })
        .collect()
}

/// Normalized histogram counts over `edges`; values outside are dropped.
pub fn histogram(xs: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; edges.len().saturating_sub(1)];
    for &x in xs {
        if x < edges[0] || x > *edges.last().unwrap() {
            continue;
        }
        let k = edges.partition_point(|&e| e <= x).clamp(1, edges.len() - 1) - 1;
        counts[k] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

/// Total-variation distance between two samples' histograms on common bins
/// spanning both samples.
pub fn histogram_tv(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    let ha = histogram(a, &edges);
    let hb = histogram(b, &edges);
    0.5 * ha.iter().zip(&hb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_small_vectors() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn two_sample_ks_of_identical_samples_is_zero() {
        let a = [0.1, 0.5, 0.2, 0.9];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
    }

    #[test]
    fn kde_integrates_to_about_one() {
        let xs: Vec<f64> = (0..200).map(|k| (k as f64 * 0.37).sin()).collect();
        let grid = kde(&xs, 512);
        let step = grid[1].0 - grid[0].0;
        let total: f64 = grid.iter().map(|g| g.1).sum::<f64>() * step;
        assert!((total - 1.0).abs() < 0.01);
    }

    #[test]
    fn chi_square_p_value_sanity() {
        assert!((chi_square_p_value(0.0, 3.0) - 1.0).abs() < 1e-12);
        // median of chi2(2) is 2 ln 2
        assert!((chi_square_p_value(2.0 * 2f64.ln(), 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binned_kde_tracks_direct_evaluation() {
        let xs: Vec<f64> = (0..20_000).map(|k| ((k as f64) * 0.618_033_988_75).fract() * 4.0 - 2.0).collect();
        let binned = kde(&xs, 512);
        let direct = kde(&xs[..7000], 512);
        let mass: f64 = binned.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        assert!((mass - 1.0).abs() < 1e-3);
        let mid = binned.iter().find(|(g, _)| g.abs() < 0.02).unwrap();
        let mid_direct = direct.iter().min_by(|a, b| a.0.abs().total_cmp(&b.0.abs())).unwrap();
        assert!((mid.1 - 0.25).abs() < 0.01 && (mid_direct.1 - 0.25).abs() < 0.02);
    }
}
