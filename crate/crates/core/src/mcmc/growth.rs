use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Deserialize;
use statrs::function::gamma::gamma_ur;

use super::trace::ChainTrace;
use crate::error::{domain, Error, Result};
use crate::numerics::{normal_cdf, RandomStream};

const DENTAL_CSV: &str = include_str!("../../data/dental.csv");

/// Repeated measurements `y[i][j]` of child `i` at age `t[j]`, with sex
/// labels `h[i] ∈ {1, 2}` (1 female, 2 male).
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthDataset {
    y: Vec<f64>,
    t: Vec<f64>,
    h: Vec<u8>,
    subjects: Vec<String>,
    n_k: [usize; 2],
}

#[derive(Debug, Deserialize)]
struct DentalRow {
    subject: String,
    sex: String,
    age: f64,
    measurement: f64,
}

impl GrowthDataset {
    /// Builds a dataset from an `n × r` row-major matrix.
    pub fn new(y: Vec<f64>, t: Vec<f64>, h: Vec<u8>) -> Result<Self> {
        let (n, r) = (h.len(), t.len());
        if r < 2 {
            return domain("growth data needs at least two ages");
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return domain("ages must be strictly increasing");
        }
        if y.len() != n * r {
            return domain(format!("expected {} measurements, got {}", n * r, y.len()));
        }
        if let Some(bad) = h.iter().find(|&&k| k != 1 && k != 2) {
            return domain(format!("sex labels must be 1 or 2, got {bad}"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return domain("measurements must be finite");
        }
        let n1 = h.iter().filter(|&&k| k == 1).count();
        let subjects = (1..=n).map(|i| format!("s{i}")).collect();
        Ok(Self { y, t, h, subjects, n_k: [n1, n - n1] })
    }

    /// The Potthoff–Roy dental measurements (11 girls, 16 boys, ages 8–14).
    pub fn dental() -> Self {
        Self::from_reader(DENTAL_CSV.as_bytes()).expect("bundled dental data parses")
    }

    /// Reads `subject,sex,age,measurement` long-format CSV with sex in
    /// `{F, M}`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut subjects: BTreeMap<String, (u8, BTreeMap<i64, f64>)> = BTreeMap::new();
        let mut order = Vec::new();
        for row in rdr.deserialize() {
            let row: DentalRow = row?;
            let sex = match row.sex.as_str() {
                "F" => 1,
                "M" => 2,
                other => return Err(Error::Data(format!("sex must be F or M, got `{other}`"))),
            };
            let entry = subjects.entry(row.subject.clone()).or_insert_with(|| {
                order.push(row.subject.clone());
                (sex, BTreeMap::new())
            });
            if entry.0 != sex {
                return Err(Error::Data(format!("subject {} has conflicting sex labels", row.subject)));
            }
            // ages are keyed in thousandths of a year
            if entry.1.insert((row.age * 1000.0).round() as i64, row.measurement).is_some() {
                return Err(Error::Data(format!("subject {} repeats age {}", row.subject, row.age)));
            }
        }
        let first = order.first().ok_or_else(|| Error::Data("no measurements".into()))?;
        let ages: Vec<i64> = subjects[first].1.keys().copied().collect();
        let (mut y, mut h) = (Vec::new(), Vec::new());
        for s in &order {
            let (sex, m) = &subjects[s];
            if m.keys().copied().ne(ages.iter().copied()) {
                return Err(Error::Data(format!("subject {s} is not measured at the common ages")));
            }
            y.extend(m.values());
            h.push(*sex);
        }
        let t = ages.iter().map(|&a| a as f64 / 1000.0).collect();
        let mut data = Self::new(y, t, h)?;
        data.subjects = order;
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn r(&self) -> usize {
        self.t.len()
    }

    pub fn ages(&self) -> &[f64] {
        &self.t
    }

    pub fn sexes(&self) -> &[u8] {
        &self.h
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    /// Number of children of sex `k ∈ {1, 2}`.
    pub fn n_k(&self, k: u8) -> usize {
        self.n_k[usize::from(k - 1)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.y[i * self.r()..(i + 1) * self.r()]
    }

    /// Same design, new measurements.
    pub fn with_measurements(&self, y: Vec<f64>) -> Result<Self> {
        let mut d = Self::new(y, self.t.clone(), self.h.clone())?;
        d.subjects = self.subjects.clone();
        Ok(d)
    }
}

/// Inverse-gamma hyperparameter `a` for all variance components and the
/// normal prior variances of the slopes and intercept means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthHyper {
    pub a: f64,
    pub sigma2_beta: f64,
    pub sigma2_mu: f64,
}

impl Default for GrowthHyper {
    fn default() -> Self {
        Self { a: 0.1, sigma2_beta: 100.0, sigma2_mu: 100.0 }
    }
}

impl GrowthHyper {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("sigma2_beta", self.sigma2_beta), ("sigma2_mu", self.sigma2_mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}

/// Full parameter vector of the growth model. Arrays indexed by sex hold
/// female at 0 and male at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthModelState {
    pub alpha: Vec<f64>,
    pub beta: [f64; 2],
    pub sigma2: [f64; 2],
    pub mu: [f64; 2],
    pub tau2: f64,
}

impl GrowthModelState {
    /// Least-squares start: per-child intercepts given per-sex slopes.
    pub fn initial(data: &GrowthDataset) -> Self {
        let r = data.r() as f64;
        let tbar = data.t.iter().sum::<f64>() / r;
        let stt: f64 = data.t.iter().map(|t| (t - tbar).powi(2)).sum();
        let mut beta = [0.0; 2];
        for (k, b) in beta.iter_mut().enumerate() {
            let (mut num, mut cnt) = (0.0, 0.0);
            for i in (0..data.n()).filter(|&i| usize::from(data.h[i] - 1) == k) {
                let row = data.row(i);
                let ybar = row.iter().sum::<f64>() / r;
                num += row.iter().zip(&data.t).map(|(y, t)| (y - ybar) * (t - tbar)).sum::<f64>() / stt;
                cnt += 1.0;
            }
            *b = if cnt > 0.0 { num / cnt } else { 0.0 };
        }
        let alpha: Vec<f64> = (0..data.n())
            .map(|i| {
                let k = usize::from(data.h[i] - 1);
                data.row(i).iter().zip(&data.t).map(|(y, t)| y - beta[k] * t).sum::<f64>() / r
            })
            .collect();
        let mut mu = [0.0; 2];
        for (k, m) in mu.iter_mut().enumerate() {
            let v: Vec<f64> = (0..data.n()).filter(|&i| usize::from(data.h[i] - 1) == k).map(|i| alpha[i]).collect();
            *m = if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        }
        Self { alpha, beta, sigma2: [1.0, 1.0], mu, tau2: 1.0 }
    }

    pub fn component_names(n: usize) -> Vec<String> {
        let mut names: Vec<String> =
            ["beta1", "beta2", "sigma2_1", "sigma2_2", "mu1", "mu2", "tau2"].iter().map(|s| s.to_string()).collect();
        names.extend((1..=n).map(|i| format!("alpha{i}")));
        names
    }

    pub fn to_row(&self) -> Vec<f64> {
        let mut row = vec![self.beta[0], self.beta[1], self.sigma2[0], self.sigma2[1], self.mu[0], self.mu[1], self.tau2];
        row.extend_from_slice(&self.alpha);
        row
    }

    fn check(&self) -> Result<()> {
        if self.sigma2.iter().chain(std::iter::once(&self.tau2)).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvariantViolation(format!(
                "non-positive variance draw: sigma2 = {:?}, tau2 = {}",
                self.sigma2, self.tau2
            )));
        }
        Ok(())
    }

    /// Draws every parameter from the prior.
    pub fn from_prior(n_sexes: &[u8], hyper: &GrowthHyper, rng: &mut RandomStream) -> Result<Self> {
        let ig = InverseGammaParams { shape: hyper.a, scale: hyper.a };
        let nb = NormalParams { mean: 0.0, var: hyper.sigma2_beta };
        let nm = NormalParams { mean: 0.0, var: hyper.sigma2_mu };
        let beta = [nb.sample(rng), nb.sample(rng)];
        let sigma2 = [ig.sample(rng)?, ig.sample(rng)?];
        let mu = [nm.sample(rng), nm.sample(rng)];
        let tau2 = ig.sample(rng)?;
        let alpha = n_sexes
            .iter()
            .map(|&k| NormalParams { mean: mu[usize::from(k - 1)], var: tau2 }.sample(rng))
            .collect();
        Ok(Self { alpha, beta, sigma2, mu, tau2 })
    }

    /// Draws measurements `y_ij = α_i + β_{h_i} t_j + σ_{h_i} ε_ij`.
    pub fn simulate(&self, design: &GrowthDataset, rng: &mut RandomStream) -> Result<GrowthDataset> {
        let mut y = Vec::with_capacity(design.n() * design.r());
        for i in 0..design.n() {
            let k = usize::from(design.h[i] - 1);
            let sd = self.sigma2[k].sqrt();
            for &t in &design.t {
                y.push(self.alpha[i] + self.beta[k] * t + sd * rng.sample::<f64, _>(StandardNormal));
            }
        }
        design.with_measurements(y)
    }
}

/// A normal full conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mean: f64,
    pub var: f64,
}

impl NormalParams {
    fn from_precision(weighted_sum: f64, precision: f64) -> Self {
        Self { mean: weighted_sum / precision, var: 1.0 / precision }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.mean + self.var.sqrt() * rng.sample::<f64, _>(StandardNormal)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.var.sqrt())
    }
}

/// An inverse-gamma full conditional `IG(shape, scale)`, density
/// `∝ x^{-shape-1} exp(-scale/x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl InverseGammaParams {
    pub fn sample(&self, rng: &mut RandomStream) -> Result<f64> {
        let g = Gamma::new(self.shape, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let v = self.scale / g.sample(rng);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvariantViolation(format!("inverse-gamma draw {v} from {self:?}")));
        }
        Ok(v)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 { 0.0 } else { gamma_ur(self.shape, self.scale / x) }
    }
}

fn members(data: &GrowthDataset, k: usize) -> impl Iterator<Item = usize> + '_ {
    (0..data.n()).filter(move |&i| usize::from(data.h[i] - 1) == k)
}

impl GrowthModelState {
    /// `β_k | rest`, `k ∈ {0, 1}`.
    pub fn beta_conditional(&self, data: &GrowthDataset, hyper: &GrowthHyper, k: usize) -> NormalParams {
        let stt: f64 = data.t.iter().map(|t| t * t).sum();
        let mut sty = 0.0;
        for i in members(data, k) {
            sty += data.row(i).iter().zip(&data.t).map(|(y, t)| t * (y - self.alpha[i])).sum::<f64>();
        }
        let nk = data.n_k[k] as f64;
        let s2 = self.sigma2[k];
        NormalParams::from_precision(sty / s2, nk * stt / s2 + 1.0 / hyper.sigma2_beta)
    }

    /// `σ_k² | rest`.
    pub fn sigma2_conditional(&self, data: &GrowthDataset, hyper: &GrowthHyper, k: usize) -> InverseGammaParams {
        let mut ssr = 0.0;
        for i in members(data, k) {
            ssr += data
                .row(i)
                .iter()
                .zip(&data.t)
                .map(|(y, t)| (y - self.alpha[i] - self.beta[k] * t).powi(2))
                .sum::<f64>();
        }
        InverseGammaParams {
            shape: hyper.a + (data.n_k[k] * data.r()) as f64 / 2.0,
            scale: hyper.a + ssr / 2.0,
        }
    }

    /// `μ_k | rest`.
    pub fn mu_conditional(&self, data: &GrowthDataset, hyper: &GrowthHyper, k: usize) -> NormalParams {
        let sum: f64 = members(data, k).map(|i| self.alpha[i]).sum();
        let nk = data.n_k[k] as f64;
        NormalParams::from_precision(sum / self.tau2, nk / self.tau2 + 1.0 / hyper.sigma2_mu)
    }

    /// `τ² | rest`.
    pub fn tau2_conditional(&self, data: &GrowthDataset, hyper: &GrowthHyper) -> InverseGammaParams {
        let ss: f64 = (0..data.n()).map(|i| (self.alpha[i] - self.mu[usize::from(data.h[i] - 1)]).powi(2)).sum();
        InverseGammaParams { shape: hyper.a + data.n() as f64 / 2.0, scale: hyper.a + ss / 2.0 }
    }

    /// `α_i | rest`.
    pub fn alpha_conditional(&self, data: &GrowthDataset, i: usize) -> NormalParams {
        let k = usize::from(data.h[i] - 1);
        let s2 = self.sigma2[k];
        let resid: f64 = data.row(i).iter().zip(&data.t).map(|(y, t)| y - self.beta[k] * t).sum();
        NormalParams::from_precision(
            resid / s2 + self.mu[k] / self.tau2,
            1.0 / self.tau2 + data.r() as f64 / s2,
        )
    }
}

/// One systematic scan β → σ² → μ → τ² → α.
pub fn gibbs_sweep(
    state: &mut GrowthModelState,
    data: &GrowthDataset,
    hyper: &GrowthHyper,
    rng: &mut RandomStream,
) -> Result<()> {
    for k in 0..2 {
        state.beta[k] = state.beta_conditional(data, hyper, k).sample(rng);
    }
    for k in 0..2 {
        state.sigma2[k] = state.sigma2_conditional(data, hyper, k).sample(rng)?;
    }
    for k in 0..2 {
        state.mu[k] = state.mu_conditional(data, hyper, k).sample(rng);
    }
    state.tau2 = state.tau2_conditional(data, hyper).sample(rng)?;
    for i in 0..data.n() {
        state.alpha[i] = state.alpha_conditional(data, i).sample(rng);
    }
    state.check()
}

/// Runs `iterations` Gibbs sweeps from the least-squares start and records
/// `(β₁, β₂, σ₁², σ₂², μ₁, μ₂, τ², α₁…α_n)` after each.
pub fn gibbs_growth_run(
    data: &GrowthDataset,
    hyper: &GrowthHyper,
    iterations: usize,
    rng: &mut RandomStream,
) -> Result<ChainTrace> {
    hyper.validate()?;
    if iterations == 0 {
        return domain("at least one iteration is required");
    }
    let mut state = GrowthModelState::initial(data);
    let mut trace = ChainTrace::with_capacity(GrowthModelState::component_names(data.n()), iterations);
    for _ in 0..iterations {
        gibbs_sweep(&mut state, data, hyper, rng)?;
        trace.push(&state.to_row(), true);
    }
    Ok(trace)
}
