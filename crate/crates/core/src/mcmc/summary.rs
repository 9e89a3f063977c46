use super::trace::ChainTrace;
use crate::error::{domain, Result};
use crate::stats;

const DENSITY_POINTS: usize = 512;

/// Post-burn-in summary of one chain component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
    /// Kernel density estimate on a 512-point grid; empty for a constant
    /// chain.
    pub density: Vec<(f64, f64)>,
}

pub fn summarize_chain(trace: &ChainTrace, burn_in: usize) -> Result<Vec<ComponentSummary>> {
    if burn_in >= trace.len() {
        return domain(format!("burn-in {burn_in} leaves no draws out of {}", trace.len()));
    }
    Ok(trace
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut xs: Vec<f64> = trace.rows().skip(burn_in).map(|r| r[j]).collect();
            let mean = stats::mean(&xs);
            let sd = if xs.len() > 1 { stats::sd(&xs) } else { 0.0 };
            let density = if sd > 0.0 { stats::kde(&xs, DENSITY_POINTS) } else { Vec::new() };
            xs.sort_by(f64::total_cmp);
            ComponentSummary {
                name: name.clone(),
                mean,
                sd,
                q025: stats::quantile_sorted(&xs, 0.025),
                q975: stats::quantile_sorted(&xs, 0.975),
                density,
            }
        })
        .collect())
}

/// Whether the 95% intervals of two components intersect.
pub fn intervals_overlap(a: &ComponentSummary, b: &ComponentSummary) -> bool {
    a.q025 <= b.q975 && b.q025 <= a.q975
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::{gibbs_growth_run, GrowthDataset, GrowthHyper};
    use crate::numerics::{normal_quantile, RandomStream};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn trace_of(xs: &[f64]) -> ChainTrace {
        let mut tr = ChainTrace::new(vec!["x".into()]);
        for &x in xs {
            tr.push(&[x], true);
        }
        tr
    }

    #[test]
    fn constant_chain() {
        let s = &summarize_chain(&trace_of(&[2.5; 100]), 10).unwrap()[0];
        assert_eq!((s.sd, s.q025, s.q975, s.mean), (0.0, 2.5, 2.5, 2.5));
    }

    #[test]
    fn iid_normal_quantiles() {
        let mut rng = RandomStream::new(15, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        let s = &summarize_chain(&trace_of(&xs), 0).unwrap()[0];
        let z = normal_quantile(0.975);
        assert!((s.q975 - z).abs() < 0.02 && (s.q025 + z).abs() < 0.02);
        assert_eq!(s.density.len(), 512);
    }

    #[test]
    fn burn_in_must_leave_draws() {
        assert!(summarize_chain(&trace_of(&[1.0, 2.0]), 2).is_err());
    }

    #[test]
    fn dental_slopes_match_least_squares() {
        let d = GrowthDataset::dental();
        let tr = gibbs_growth_run(&d, &GrowthHyper::default(), 60_000, &mut RandomStream::new(16, 0)).unwrap();
        let s = summarize_chain(&tr, 10_000).unwrap();
        let get = |n: &str| s.iter().find(|c| c.name == n).unwrap();
        // within-child least-squares slopes per sex
        let tbar = 11.0;
        let stt: f64 = d.ages().iter().map(|t| (t - tbar).powi(2)).sum();
        for (k, name) in [(1u8, "beta1"), (2, "beta2")] {
            let slopes: Vec<f64> = (0..d.n())
                .filter(|&i| d.sexes()[i] == k)
                .map(|i| {
                    let row = d.row(i);
                    let ybar = stats::mean(row);
                    row.iter().zip(d.ages()).map(|(y, t)| (y - ybar) * (t - tbar)).sum::<f64>() / stt
                })
                .collect();
            let c = get(name);
            assert!((c.mean - stats::mean(&slopes)).abs() < 0.03, "{name}: {} vs {}", c.mean, stats::mean(&slopes));
            assert!(c.q025 < c.mean && c.mean < c.q975);
        }
        assert!(intervals_overlap(get("mu1"), get("mu2")) == (get("mu1").q025 <= get("mu2").q975 && get("mu2").q025 <= get("mu1").q975));
    }
}
