use std::sync::Arc;

use crate::error::{Error, Result};

/// A data reduction `S(x)` of fixed output dimension.
pub trait SummaryStatistic: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Sample autocorrelations at lags `1..=lags`, normalized by the lag-0
/// autocovariance.
pub fn acf_summary(series: &[f64], lags: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= lags + 1 {
        return Err(Error::DegenerateSummary(format!(
            "autocorrelations at {lags} lags need more than {} observations, got {n}",
            lags + 1
        )));
    }
    let m = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - m).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateSummary("constant series has no autocorrelation".into()));
    }
    Ok((1..=lags).map(|k| c[k..].iter().zip(&c[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0).collect())
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Median, averaging the two central order statistics for even `n`.
/// NaN for empty input.
pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    median_in_place(&mut x.to_vec())
}

/// `(median, mad)` with `mad = med(|xᵢ − med(x)|)`.
pub fn median_mad_summaries(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut buf = x.to_vec();
    let med = median_in_place(&mut buf);
    buf.iter_mut().zip(x).for_each(|(b, v)| *b = (v - med).abs());
    (med, median_in_place(&mut buf))
}

#[derive(Debug, Clone, Copy)]
pub struct AcfSummary {
    pub lags: usize,
}

impl SummaryStatistic for AcfSummary {
    fn name(&self) -> String {
        format!("acf{}", self.lags)
    }
    fn dim(&self) -> usize {
        self.lags
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        acf_summary(x, self.lags)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MedianSummary;

impl SummaryStatistic for MedianSummary {
    fn name(&self) -> String {
        "median".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![median(x)])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MadSummary;

impl SummaryStatistic for MadSummary {
    fn name(&self) -> String {
        "mad".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![median_mad_summaries(x).1])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MedianMadSummary;

impl SummaryStatistic for MedianMadSummary {
    fn name(&self) -> String {
        "median-mad".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (m, d) = median_mad_summaries(x);
        Ok(vec![m, d])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeanSummary;

impl SummaryStatistic for MeanSummary {
    fn name(&self) -> String {
        "mean".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Err(Error::DegenerateSummary("mean of an empty sample".into()));
        }
        Ok(vec![x.iter().sum::<f64>() / x.len() as f64])
    }
}

/// Several summaries stacked into one vector.
#[derive(Clone)]
pub struct ConcatSummary {
    parts: Vec<Arc<dyn SummaryStatistic>>,
}

impl ConcatSummary {
    pub fn new(parts: Vec<Arc<dyn SummaryStatistic>>) -> Self {
        Self { parts }
    }
}

impl SummaryStatistic for ConcatSummary {
    fn name(&self) -> String {
        self.parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
    }
    fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim()).sum()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim());
        for p in &self.parts {
            out.extend(p.eval(x)?);
        }
        Ok(out)
    }
}
