use std::f64::consts::{LN_2, PI};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::likelihood::{conditional_log_likelihood, gibbs_past_innovations, InnovationState};
use super::roots::{configuration_count, log_multiset_prior, roots_to_coeffs, uniform_disk, MaCoefficients, RootsParam};
use crate::error::{domain, Result};
use crate::mcmc::ChainTrace;
use crate::numerics::RandomStream;
use crate::stats;

/// Tuning for [`rjmcmc_run_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct RjOptions {
    /// Replace the likelihood by a constant (prior-recovery diagnostic).
    pub flat_likelihood: bool,
    pub real_scale: f64,
    pub complex_scale: f64,
    /// Random-walk scale for past innovations, in units of σ.
    pub past_scale: f64,
    pub mu: f64,
    pub sigma2: f64,
    /// Starting roots; all real roots at zero when absent.
    pub init: Option<RootsParam<f64>>,
}

impl Default for RjOptions {
    fn default() -> Self {
        Self {
            flat_likelihood: false,
            real_scale: 0.1,
            complex_scale: 0.1,
            past_scale: 1.0,
            mu: 0.0,
            sigma2: 1.0,
            init: None,
        }
    }
}

/// Reversible-jump output. Trace columns are `r`, the real roots
/// (`real1..realp`), complex representatives (`re1, im1, …`), the implied
/// coefficients (`theta1..thetap`) and the past innovations
/// (`past0..past{p-1}`, `pastk = ε₋ₖ`); absent roots are NaN. The per-row
/// acceptance flag records the between-model move.
#[derive(Debug, Clone)]
pub struct RjTrace {
    pub trace: ChainTrace,
    pub p: usize,
    pub between_proposed: usize,
    pub between_accepted: usize,
}

impl RjTrace {
    /// Real-root count per iteration.
    pub fn real_counts(&self) -> Vec<usize> {
        self.trace.column(0).iter().map(|&r| r as usize).collect()
    }

    /// Fraction of iterations in each configuration, indexed by the number
    /// of complex pairs `0..=⌊p/2⌋`.
    pub fn configuration_frequencies(&self, burn_in: usize) -> Vec<f64> {
        let counts = self.real_counts();
        let kept = &counts[burn_in.min(counts.len())..];
        let mut f = vec![0.0; configuration_count(self.p)];
        for &r in kept {
            f[(self.p - r) / 2] += 1.0;
        }
        f.iter_mut().for_each(|v| *v /= kept.len().max(1) as f64);
        f
    }

    /// Batch-means standard errors of [`Self::configuration_frequencies`].
    pub fn configuration_standard_errors(&self, burn_in: usize, batches: usize) -> Vec<f64> {
        let counts = self.real_counts();
        let kept = &counts[burn_in.min(counts.len())..];
        (0..configuration_count(self.p))
            .map(|c| {
                let ind: Vec<f64> = kept.iter().map(|&r| if (self.p - r) / 2 == c { 1.0 } else { 0.0 }).collect();
                stats::batch_means_se(&ind, batches)
            })
            .collect()
    }

    pub fn theta_column(&self, j: usize) -> Vec<f64> {
        self.trace.column_by_name(&format!("theta{}", j + 1)).unwrap_or_default()
    }
}

fn column_names(p: usize) -> Vec<String> {
    let mut names = vec!["r".to_string()];
    names.extend((1..=p).map(|k| format!("real{k}")));
    for k in 1..=p / 2 {
        names.push(format!("re{k}"));
        names.push(format!("im{k}"));
    }
    names.extend((1..=p).map(|k| format!("theta{k}")));
    names.extend((0..p).map(|k| format!("past{k}")));
    names
}

fn trace_row(roots: &RootsParam<f64>, innov: &InnovationState<f64>, p: usize) -> Vec<f64> {
    let mut row = vec![roots.real_count() as f64];
    row.extend((0..p).map(|k| roots.real_roots().get(k).copied().unwrap_or(f64::NAN)));
    for k in 0..p / 2 {
        let z = roots.complex_roots().get(k);
        row.push(z.map_or(f64::NAN, |z| z.re));
        row.push(z.map_or(f64::NAN, |z| z.im));
    }
    row.extend(roots_to_coeffs(roots));
    row.extend_from_slice(&innov.past);
    row
}

fn ln_choose2(n: usize) -> f64 {
    ((n * (n - 1) / 2) as f64).ln()
}

// merge: choose one of C(r,2) real pairs, draw a complex root uniformly on the disk
fn log_merge_proposal(r: usize) -> f64 {
    -LN_2 - ln_choose2(r) - PI.ln()
}

// split: choose one of c complex roots, draw an unordered real pair on (−1,1)² (density 2·¼)
fn log_split_proposal(c: usize) -> f64 {
    -LN_2 - (c as f64).ln() - LN_2
}

/// Full Metropolis–Hastings–Green log acceptance ratio of a between-model
/// move `from → to` given both states' log-likelihoods: target ratio on
/// root multisets times the reverse/forward proposal ratio (unit Jacobian).
pub fn between_model_log_ratio(
    from: &RootsParam<f64>,
    to: &RootsParam<f64>,
    log_lik_from: f64,
    log_lik_to: f64,
) -> Result<f64> {
    let (rf, cf) = (from.real_count(), from.complex_count());
    let (rt, ct) = (to.real_count(), to.complex_count());
    let (forward, reverse) = if rf >= 2 && rt == rf - 2 && ct == cf + 1 {
        (log_merge_proposal(rf), log_split_proposal(ct))
    } else if cf >= 1 && rt == rf + 2 && ct == cf - 1 {
        (log_split_proposal(cf), log_merge_proposal(rt))
    } else {
        return domain(format!("({rf}, {cf}) -> ({rt}, {ct}) is not a merge or split"));
    };
    Ok(log_lik_to - log_lik_from + log_multiset_prior(to) - log_multiset_prior(from) + reverse - forward)
}

/// [`rjmcmc_run_with`] with default options.
pub fn rjmcmc_run(data: &[f64], p: usize, iterations: usize, rng: &mut RandomStream) -> Result<RjTrace> {
    rjmcmc_run_with(data, p, iterations, &RjOptions::default(), rng)
}

struct Sampler<'a> {
    data: &'a [f64],
    opts: &'a RjOptions,
    innov: InnovationState<f64>,
}

impl Sampler<'_> {
    fn log_lik(&mut self, roots: &RootsParam<f64>) -> f64 {
        if self.opts.flat_likelihood {
            return 0.0;
        }
        let coeffs = self.coeffs(roots);
        conditional_log_likelihood(self.data, &coeffs, &mut self.innov)
    }

    fn coeffs(&self, roots: &RootsParam<f64>) -> MaCoefficients<f64> {
        MaCoefficients { theta: roots_to_coeffs(roots), mu: self.opts.mu, sigma2: self.opts.sigma2 }
    }
}

/// Reversible-jump MCMC over MA(p) root configurations. Each iteration runs
/// a random-walk update of every root, one merge/split proposal (chosen with
/// probability ½ each; infeasible choices are no-ops), and a
/// Metropolis-within-Gibbs pass over the past innovations.
pub fn rjmcmc_run_with(
    data: &[f64],
    p: usize,
    iterations: usize,
    opts: &RjOptions,
    rng: &mut RandomStream,
) -> Result<RjTrace> {
    if p == 0 {
        return domain("MA order must be at least 1");
    }
    if iterations == 0 {
        return domain("at least one iteration is required");
    }
    if !(opts.sigma2 > 0.0) || !(opts.real_scale > 0.0) || !(opts.complex_scale > 0.0) || !(opts.past_scale > 0.0) {
        return domain("variance and proposal scales must be positive");
    }
    let mut roots = match &opts.init {
        Some(r) if r.order() == p => r.clone(),
        Some(r) => return domain(format!("initial roots have order {}, expected {p}", r.order())),
        None => RootsParam::new(vec![0.0; p], vec![])?,
    };
    let mut s = Sampler { data, opts, innov: InnovationState::zeros(p) };
    let mut ll = s.log_lik(&roots);
    let mut out = RjTrace { trace: ChainTrace::with_capacity(column_names(p), iterations), p, between_proposed: 0, between_accepted: 0 };

    for _ in 0..iterations {
        // within-model updates, one coordinate block per root
        for k in 0..roots.real_count() {
            let (mut reals, complex) = roots.clone().into_parts();
            reals[k] += opts.real_scale * rng.sample::<f64, _>(StandardNormal);
            let cand = RootsParam::canonical(reals, complex);
            if !cand.in_support() {
                continue;
            }
            let cand_ll = s.log_lik(&cand);
            if rng.random::<f64>().ln() < cand_ll - ll {
                roots = cand;
                ll = cand_ll;
            }
        }
        for k in 0..roots.complex_count() {
            let (reals, mut complex) = roots.clone().into_parts();
            complex[k] += Complex::new(
                opts.complex_scale * rng.sample::<f64, _>(StandardNormal),
                opts.complex_scale * rng.sample::<f64, _>(StandardNormal),
            );
            let cand = RootsParam::canonical(reals, complex);
            if !cand.in_support() {
                continue;
            }
            let cand_ll = s.log_lik(&cand);
            if rng.random::<f64>().ln() < cand_ll - ll {
                roots = cand;
                ll = cand_ll;
            }
        }

        // between-model move
        let mut jumped = false;
        if configuration_count(p) > 1 {
            let merge = rng.random::<bool>();
            let (r, c) = (roots.real_count(), roots.complex_count());
            let cand = if merge && r >= 2 {
                let i = rng.random_range(0..r);
                let mut j = rng.random_range(0..r - 1);
                if j >= i {
                    j += 1;
                }
                let (reals, mut complex) = roots.clone().into_parts();
                let reals = reals.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, &x)| x).collect();
                complex.push(uniform_disk(rng));
                Some(RootsParam::canonical(reals, complex))
            } else if !merge && c >= 1 {
                let k = rng.random_range(0..c);
                let (mut reals, mut complex) = roots.clone().into_parts();
                complex.remove(k);
                reals.push(rng.random_range(-1.0..1.0));
                reals.push(rng.random_range(-1.0..1.0));
                Some(RootsParam::canonical(reals, complex))
            } else {
                None
            };
            if let Some(cand) = cand {
                out.between_proposed += 1;
                let cand_ll = s.log_lik(&cand);
                let log_ratio = between_model_log_ratio(&roots, &cand, ll, cand_ll)?;
                if rng.random::<f64>().ln() < log_ratio {
                    roots = cand;
                    jumped = true;
                    out.between_accepted += 1;
                }
            }
        }

        let coeffs = s.coeffs(&roots);
        gibbs_past_innovations(data, &coeffs, &mut s.innov, opts.past_scale, opts.flat_likelihood, rng);
        ll = s.log_lik(&roots);
        out.trace.push(&trace_row(&roots, &s.innov, p), jumped);
    }
    Ok(out)
}
