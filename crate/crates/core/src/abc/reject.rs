use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::GenerativeModel;
use super::summary::{median, SummaryStatistic};
use crate::error::{domain, Error, Result};
use crate::numerics::RandomStream;

const CHUNK: usize = 1024;

/// How summary components are scaled before taking Euclidean distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceScaling {
    /// Divide each component by its median absolute deviation over the
    /// table (falling back to the standard deviation, then 1).
    #[default]
    Mad,
    /// Raw Euclidean distance, for summaries already on a common scale.
    None,
}

/// Sidecar metadata persisted next to a reference table CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub seed: u64,
    pub stream_id: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantile: f64,
    /// `None` encodes an infinite tolerance.
    pub epsilon: Option<f64>,
    pub summary: String,
    #[serde(default)]
    pub scaling: DistanceScaling,
    pub models: Vec<String>,
    pub param_dim: usize,
    pub summary_dim: usize,
    pub observed_summary: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Simulated `(model, θ, S(x))` records with their distances to the observed
/// summary and the acceptance tolerance.
///
/// Distances are Euclidean after dividing each summary component by its
/// median absolute deviation over the table. Parameters of models with fewer
/// coordinates than `param_dim` are padded with NaN.
#[derive(Debug, Clone)]
pub struct AbcReferenceTable {
    meta: TableMetadata,
    model: Vec<u32>,
    theta: Vec<f64>,
    summaries: Vec<f64>,
    distances: Vec<f64>,
    epsilon: f64,
}

/// Per-model posterior probability estimates from ABC model choice.
#[derive(Debug, Clone)]
pub struct ModelChoice {
    pub models: Vec<String>,
    pub probabilities: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub accepted: Vec<usize>,
    pub table: AbcReferenceTable,
}

fn check_quantile(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return domain(format!("quantile level must lie in (0, 1], got {q}"));
    }
    Ok(())
}

// ε is the (k+1)-th smallest distance with k = ⌈qN⌉, so that accepting
// d < ε keeps exactly k records when there are no ties.
fn tolerance(distances: &[f64], q: f64) -> f64 {
    let n = distances.len();
    let k = ((q * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if k >= n {
        return f64::INFINITY;
    }
    let mut d = distances.to_vec();
    *d.select_nth_unstable_by(k, f64::total_cmp).1
}

fn component_scales(summaries: &[f64], dim: usize) -> Vec<f64> {
    let n = summaries.len() / dim.max(1);
    (0..dim)
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|i| summaries[i * dim + j]).collect();
            let m = median(&col);
            let dev: Vec<f64> = col.iter().map(|v| (v - m).abs()).collect();
            let mad = median(&dev);
            if mad > 0.0 {
                return mad;
            }
            let sd = crate::stats::sd(&col);
            if sd > 0.0 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        })
        .collect()
}

fn scaled_distance(a: &[f64], b: &[f64], scale: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scale)
        .map(|((x, y), s)| ((x - y) / s).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) struct Simulations {
    pub model: Vec<u32>,
    pub theta: Vec<f64>,
    pub summaries: Vec<f64>,
    pub param_dim: usize,
    pub summary_dim: usize,
}

/// Draws `n` records `(m*, θ*, S(x*))`, record `i` from `rng.substream(i)`.
pub(crate) fn simulate_records(
    models: &[(&dyn GenerativeModel, f64)],
    s: &dyn SummaryStatistic,
    n: usize,
    rng: &RandomStream,
) -> Result<Simulations> {
    if models.is_empty() {
        return domain("at least one model is required");
    }
    if let Some((_, w)) = models.iter().find(|(_, w)| !(*w > 0.0 && w.is_finite())) {
        return domain(format!("model prior weights must be positive, got {w}"));
    }
    let total: f64 = models.iter().map(|(_, w)| w).sum();
    let cumulative: Vec<f64> = models
        .iter()
        .scan(0.0, |acc, (_, w)| {
            *acc += w / total;
            Some(*acc)
        })
        .collect();
    let pd = models.iter().map(|(m, _)| m.param_dim()).max().unwrap_or(0);
    let sd = s.dim();
    let mut model = vec![0u32; n];
    let mut theta = vec![f64::NAN; n * pd];
    let mut summaries = vec![0.0; n * sd];
    model
        .par_chunks_mut(CHUNK)
        .zip(theta.par_chunks_mut((CHUNK * pd).max(1)))
        .zip(summaries.par_chunks_mut((CHUNK * sd).max(1)))
        .enumerate()
        .try_for_each(|(c, ((mc, tc), sc))| -> Result<()> {
            for (k, m_out) in mc.iter_mut().enumerate() {
                let i = c * CHUNK + k;
                let mut sub = rng.substream(i as u64);
                let m = if models.len() == 1 {
                    0
                } else {
                    let u: f64 = sub.random();
                    cumulative.partition_point(|&c| c <= u).min(models.len() - 1)
                };
                let gen = models[m].0;
                let th = gen.sample_prior(&mut sub);
                let fail = |e: Error| match e {
                    e @ Error::Simulation { .. } => e,
                    e => Error::Simulation { theta: th.clone(), message: e.to_string() },
                };
                let x = gen.simulate(&th, &mut sub).map_err(fail)?;
                let sx = s.eval(&x).map_err(fail)?;
                if sx.len() != sd || sx.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Simulation {
                        theta: th,
                        message: format!("summary `{}` produced {:?}", s.name(), sx),
                    });
                }
                *m_out = m as u32;
                tc[k * pd..k * pd + th.len()].copy_from_slice(&th);
                sc[k * sd..(k + 1) * sd].copy_from_slice(&sx);
            }
            Ok(())
        })?;
    Ok(Simulations { model, theta, summaries, param_dim: pd, summary_dim: sd })
}

impl AbcReferenceTable {
    /// Assembles a table from simulated records, standardizing summaries and
    /// setting the tolerance at `quantile_level`.
    pub(crate) fn from_simulations(
        sims: Simulations,
        observed_summary: Vec<f64>,
        summary_name: String,
        models: Vec<String>,
        quantile_level: f64,
        rng: &RandomStream,
    ) -> Result<Self> {
        check_quantile(quantile_level)?;
        if observed_summary.len() != sims.summary_dim {
            return domain("observed summary has the wrong dimension");
        }
        let scale = component_scales(&sims.summaries, sims.summary_dim);
        let n = sims.model.len();
        let scaling = DistanceScaling::Mad;
        let mut table = Self {
            meta: TableMetadata {
                seed: rng.seed(),
                stream_id: rng.stream_id(),
                n,
                quantile: quantile_level,
                epsilon: None,
                summary: summary_name,
                scaling,
                models,
                param_dim: sims.param_dim,
                summary_dim: sims.summary_dim,
                observed_summary,
                scale,
            },
            model: sims.model,
            theta: sims.theta,
            summaries: sims.summaries,
            distances: Vec::new(),
            epsilon: f64::INFINITY,
        };
        table.distances = (0..n).map(|i| table.recompute_distance(i)).collect();
        table.set_quantile(quantile_level)?;
        Ok(table)
    }

    pub fn metadata(&self) -> &TableMetadata {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.model.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.meta.param_dim
    }

    pub fn summary_dim(&self) -> usize {
        self.meta.summary_dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn quantile_level(&self) -> f64 {
        self.meta.quantile
    }

    pub fn observed_summary(&self) -> &[f64] {
        &self.meta.observed_summary
    }

    pub fn scale(&self) -> &[f64] {
        &self.meta.scale
    }

    pub fn model_index(&self, i: usize) -> usize {
        self.model[i] as usize
    }

    pub fn theta(&self, i: usize) -> &[f64] {
        let p = self.meta.param_dim;
        &self.theta[i * p..(i + 1) * p]
    }

    pub fn summary(&self, i: usize) -> &[f64] {
        let d = self.meta.summary_dim;
        &self.summaries[i * d..(i + 1) * d]
    }

    pub fn distance(&self, i: usize) -> f64 {
        self.distances[i]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Standardized Euclidean distance between two summary vectors.
    pub fn distance_between(&self, a: &[f64], b: &[f64]) -> f64 {
        scaled_distance(a, b, &self.meta.scale)
    }

    /// Distance of record `i` recomputed from its stored summary.
    pub fn recompute_distance(&self, i: usize) -> f64 {
        self.distance_between(self.summary(i), &self.meta.observed_summary)
    }

    /// Resets the tolerance to the `q` quantile of the stored distances.
    pub fn set_quantile(&mut self, q: f64) -> Result<()> {
        check_quantile(q)?;
        self.epsilon = tolerance(&self.distances, q);
        self.meta.quantile = q;
        self.meta.epsilon = self.epsilon.is_finite().then_some(self.epsilon);
        Ok(())
    }

    pub fn scaling(&self) -> DistanceScaling {
        self.meta.scaling
    }

    /// The same records with distances recomputed under `scaling`, at the
    /// current quantile level.
    pub fn rescaled(&self, scaling: DistanceScaling) -> Result<Self> {
        let mut t = self.clone();
        t.meta.scaling = scaling;
        t.meta.scale = match scaling {
            DistanceScaling::Mad => component_scales(&t.summaries, t.meta.summary_dim),
            DistanceScaling::None => vec![1.0; t.meta.summary_dim],
        };
        t.distances = (0..t.len()).map(|i| t.recompute_distance(i)).collect();
        t.set_quantile(t.meta.quantile)?;
        Ok(t)
    }

    pub fn with_quantile(&self, q: f64) -> Result<Self> {
        let mut t = self.clone();
        t.set_quantile(q)?;
        Ok(t)
    }

    pub fn is_accepted(&self, i: usize) -> bool {
        self.distances[i] < self.epsilon
    }

    pub fn accepted_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_accepted(i)).collect()
    }

    pub fn accepted_count(&self) -> usize {
        self.distances.iter().filter(|&&d| d < self.epsilon).count()
    }

    /// Coordinate `j` of every accepted parameter.
    pub fn accepted_theta(&self, j: usize) -> Vec<f64> {
        self.accepted_indices().into_iter().map(|i| self.theta(i)[j]).collect()
    }

    /// Keeps only the summary components in `keep`, re-standardizing and
    /// recomputing distances at the current quantile level.
    pub fn project(&self, keep: &[usize]) -> Result<Self> {
        let d = self.meta.summary_dim;
        if keep.is_empty() || keep.iter().any(|&j| j >= d) {
            return domain(format!("summary components {keep:?} out of range for dimension {d}"));
        }
        let summaries: Vec<f64> = (0..self.len()).flat_map(|i| keep.iter().map(move |&j| (i, j))).map(|(i, j)| self.summaries[i * d + j]).collect();
        let sims = Simulations {
            model: self.model.clone(),
            theta: self.theta.clone(),
            summaries,
            param_dim: self.meta.param_dim,
            summary_dim: keep.len(),
        };
        let observed = keep.iter().map(|&j| self.meta.observed_summary[j]).collect();
        let t = Self::from_simulations(
            sims,
            observed,
            format!("{}[{}]", self.meta.summary, keep.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")),
            self.meta.models.clone(),
            self.meta.quantile,
            &RandomStream::new(self.meta.seed, self.meta.stream_id),
        )?;
        match self.meta.scaling {
            DistanceScaling::Mad => Ok(t),
            other => t.rescaled(other),
        }
    }

    /// Acceptance frequency of each model with binomial standard errors.
    /// The last probability is one minus the others so the estimates sum to
    /// one exactly.
    pub fn model_probabilities(&self) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
        let k = self.meta.models.len();
        let mut counts = vec![0usize; k];
        for i in 0..self.len() {
            if self.is_accepted(i) {
                counts[self.model[i] as usize] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::DegenerateTolerance);
        }
        let mut probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let head: f64 = probs[..k - 1].iter().sum();
        probs[k - 1] = 1.0 - head;
        let se = probs.iter().map(|p| (p * (1.0 - p) / total as f64).max(0.0).sqrt()).collect();
        Ok((probs, se, counts))
    }

    fn sidecar(path: &Path) -> PathBuf {
        path.with_extension("json")
    }

    /// Writes `model,theta1..,s1..,distance` to `path` and the metadata to the
    /// same path with a `.json` extension.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["model".to_string()];
        header.extend((1..=self.meta.param_dim).map(|j| format!("theta{j}")));
        header.extend((1..=self.meta.summary_dim).map(|j| format!("s{j}")));
        header.push("distance".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.meta.models[self.model[i] as usize].clone()];
            rec.extend(self.theta(i).iter().map(|v| format!("{v}")));
            rec.extend(self.summary(i).iter().map(|v| format!("{v}")));
            rec.push(format!("{}", self.distances[i]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        std::fs::write(Self::sidecar(path), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta: TableMetadata = serde_json::from_str(&std::fs::read_to_string(Self::sidecar(path))?)?;
        let (pd, sd) = (meta.param_dim, meta.summary_dim);
        let mut rdr = csv::Reader::from_path(path)?;
        if rdr.headers()?.len() != 2 + pd + sd {
            return Err(Error::Data(format!("expected {} columns", 2 + pd + sd)));
        }
        let parse = |s: &str, line: usize| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Data(format!("row {line}: `{s}` is not a number")))
        };
        let (mut model, mut theta, mut summaries, mut distances) = (vec![], vec![], vec![], vec![]);
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let m = meta
                .models
                .iter()
                .position(|name| name == &rec[0])
                .ok_or_else(|| Error::Data(format!("row {}: unknown model `{}`", line + 1, &rec[0])))?;
            model.push(m as u32);
            for j in 0..pd {
                theta.push(parse(&rec[1 + j], line + 1)?);
            }
            for j in 0..sd {
                summaries.push(parse(&rec[1 + pd + j], line + 1)?);
            }
            distances.push(parse(&rec[1 + pd + sd], line + 1)?);
        }
        if model.len() != meta.n {
            return Err(Error::Data(format!("metadata records N = {} but the table has {} rows", meta.n, model.len())));
        }
        let epsilon = meta.epsilon.unwrap_or(f64::INFINITY);
        Ok(Self { meta, model, theta, summaries, distances, epsilon })
    }
}

/// Rejection ABC: `n` prior-predictive simulations, tolerance at the
/// `quantile_level` quantile of their distances to `observed`.
pub fn abc_reject(
    model: &dyn GenerativeModel,
    observed: &[f64],
    s: &dyn SummaryStatistic,
    n: usize,
    quantile_level: f64,
    rng: &RandomStream,
) -> Result<AbcReferenceTable> {
    if n < 100 {
        return domain(format!("rejection ABC needs at least 100 simulations, got {n}"));
    }
    check_quantile(quantile_level)?;
    let observed_summary = s.eval(observed)?;
    let sims = simulate_records(&[(model, 1.0)], s, n, rng)?;
    AbcReferenceTable::from_simulations(sims, observed_summary, s.name(), vec![model.name()], quantile_level, rng)
}

/// ABC model choice: the model index is drawn from its prior weights, then
/// parameter and data; a shared tolerance is set on the pooled distances.
pub fn abc_model_choice(
    models: &[(&dyn GenerativeModel, f64)],
    observed: &[f64],
    s: &dyn SummaryStatistic,
    n: usize,
    quantile_level: f64,
    rng: &RandomStream,
) -> Result<ModelChoice> {
    if models.len() < 2 {
        return domain("model choice needs at least two models");
    }
    if n < 1000 {
        return domain(format!("ABC model choice needs at least 1000 simulations, got {n}"));
    }
    check_quantile(quantile_level)?;
    let observed_summary = s.eval(observed)?;
    let sims = simulate_records(models, s, n, rng)?;
    let mut names: Vec<String> = models.iter().map(|(m, _)| m.name()).collect();
    // identical names would make the CSV model column ambiguous
    for i in 0..names.len() {
        if names[..i].contains(&names[i]) {
            names[i] = format!("{}#{i}", names[i]);
        }
    }
    let table = AbcReferenceTable::from_simulations(sims, observed_summary, s.name(), names.clone(), quantile_level, rng)?;
    ModelChoice::from_table(table)
}

impl ModelChoice {
    pub fn from_table(table: AbcReferenceTable) -> Result<Self> {
        let (probabilities, std_errors, accepted) = table.model_probabilities()?;
        Ok(Self { models: table.meta.models.clone(), probabilities, std_errors, accepted, table })
    }
}
