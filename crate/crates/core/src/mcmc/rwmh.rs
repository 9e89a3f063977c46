use rand::Rng;
use rand_distr::StandardNormal;

use super::trace::ChainTrace;
use crate::error::{domain, Error, Result};
use crate::numerics::RandomStream;

/// Gaussian random-walk Metropolis–Hastings with isotropic proposal scale.
pub fn rwmh_run(
    log_target: impl Fn(&[f64]) -> f64,
    init: &[f64],
    scale: f64,
    iterations: usize,
    rng: &mut RandomStream,
) -> Result<ChainTrace> {
    if !(scale > 0.0 && scale.is_finite()) {
        return domain(format!("proposal scale must be positive, got {scale}"));
    }
    rwmh_run_with(
        log_target,
        init,
        |from, to, rng| {
            for (t, &f) in to.iter_mut().zip(from) {
                *t = f + scale * rng.sample::<f64, _>(StandardNormal);
            }
        },
        iterations,
        rng,
    )
}

/// Metropolis–Hastings with a caller-supplied symmetric proposal writing the
/// candidate into its second argument.
pub fn rwmh_run_with(
    log_target: impl Fn(&[f64]) -> f64,
    init: &[f64],
    mut propose: impl FnMut(&[f64], &mut [f64], &mut RandomStream),
    iterations: usize,
    rng: &mut RandomStream,
) -> Result<ChainTrace> {
    if iterations == 0 {
        return domain("at least one iteration is required");
    }
    let mut current = init.to_vec();
    let mut current_lp = log_target(&current);
    if !current_lp.is_finite() {
        return Err(Error::NonFiniteTarget { point: current });
    }
    let names = (0..init.len()).map(|j| format!("theta{}", j + 1)).collect();
    let mut trace = ChainTrace::with_capacity(names, iterations);
    let mut candidate = vec![0.0; init.len()];
    for _ in 0..iterations {
        propose(&current, &mut candidate, rng);
        let lp = log_target(&candidate);
        if lp.is_nan() {
            return Err(Error::NonFiniteTarget { point: candidate });
        }
        let u: f64 = rng.random();
        let accept = u.ln() < lp - current_lp;
        if accept {
            current.copy_from_slice(&candidate);
            current_lp = lp;
        }
        trace.push(&current, accept);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace_normal::{
        laplace_posterior, log_unnormalized_posterior_laplace, sample_laplace_posterior, LocationModel,
        PriorSpec,
    };
    use crate::stats;

    #[test]
    fn flat_target_accepts_everything() {
        let tr = rwmh_run(|_| 0.0, &[0.0, 1.0], 1.0, 5000, &mut RandomStream::new(1, 0)).unwrap();
        assert_eq!(tr.acceptance_rate(), 1.0);
        assert_eq!(tr.len(), 5000);
    }

    #[test]
    fn nan_target_reports_the_point() {
        let r = rwmh_run(|x| if x[0] > 0.5 { f64::NAN } else { 0.0 }, &[0.0], 3.0, 1000, &mut RandomStream::new(2, 0));
        match r {
            Err(Error::NonFiniteTarget { point }) => assert!(point[0] > 0.5),
            other => panic!("{other:?}"),
        }
        assert!(rwmh_run(|_| f64::NEG_INFINITY, &[0.0], 1.0, 10, &mut RandomStream::new(2, 0)).is_err());
        assert!(rwmh_run(|_| 0.0, &[0.0], 0.0, 10, &mut RandomStream::new(2, 0)).is_err());
    }

    #[test]
    fn rejections_copy_the_previous_row() {
        let tr = rwmh_run(|x| -0.5 * x[0] * x[0] * 100.0, &[0.0, 0.0], 2.0, 2000, &mut RandomStream::new(3, 0)).unwrap();
        for t in 1..tr.len() {
            if !tr.accepted()[t] {
                assert_eq!(tr.row(t).iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                           tr.row(t - 1).iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            }
        }
        let rate = tr.accepted().iter().filter(|&&a| a).count() as f64 / tr.len() as f64;
        assert_eq!(rate, tr.acceptance_rate());
    }

    #[test]
    fn standard_normal_target() {
        let tr = rwmh_run(|x| -0.5 * x[0] * x[0], &[0.0], 2.4, 100_000, &mut RandomStream::new(4, 0)).unwrap();
        let xs = tr.column(0);
        assert!(stats::mean(&xs).abs() < 0.05);
        assert!((stats::variance(&xs) - 1.0).abs() < 0.1);
    }

    #[test]
    fn detailed_balance_on_five_states() {
        let log_pi = [0.1f64, 0.3, 0.25, 0.05, 0.3].map(f64::ln);
        let target = |x: &[f64]| {
            let k = x[0];
            if (0.0..=4.0).contains(&k) { log_pi[k as usize] } else { f64::NEG_INFINITY }
        };
        let n = 1_000_000;
        let tr = rwmh_run_with(
            target,
            &[2.0],
            |from, to, rng| to[0] = (from[0] + 1.3 * rng.sample::<f64, _>(StandardNormal)).round(),
            n,
            &mut RandomStream::new(5, 0),
        )
        .unwrap();
        let states: Vec<usize> = tr.column(0).iter().map(|&v| v as usize).collect();
        let mut counts = [[0.0f64; 5]; 5];
        for w in states.windows(2) {
            counts[w[0]][w[1]] += 1.0;
        }
        // pair flows π_i P_ij and π_j P_ji are estimated by the joint counts N_ij/n
        let total = (n - 1) as f64;
        for i in 0..5 {
            for j in (i + 1)..5 {
                let (a, b) = (counts[i][j] / total, counts[j][i] / total);
                let se = ((a * (1.0 - a) + b * (1.0 - b)) / total).sqrt();
                assert!((a - b).abs() < 3.0 * se.max(1.0 / total), "{i}->{j}: {a} vs {b}");
            }
        }
        for (k, &lp) in log_pi.iter().enumerate() {
            let freq = states.iter().filter(|&&s| s == k).count() as f64 / n as f64;
            assert!((freq - lp.exp()).abs() < 0.01);
        }
    }

    #[test]
    fn laplace_posterior_chain_matches_exact_draws() {
        let mut rng = RandomStream::new(6, 0);
        let s = LocationModel::Laplace.simulate_sample(150, 0.0, &mut rng).unwrap();
        let p = PriorSpec::default();
        let tr = rwmh_run(|m| log_unnormalized_posterior_laplace(&s, &p, m[0]), &[s.mean()], 1.0, 100_000, &mut rng).unwrap();
        let rate = tr.acceptance_rate();
        assert!((0.02..=0.15).contains(&rate), "acceptance {rate}");
        let thinned: Vec<f64> = tr.column(0).into_iter().skip(1000).step_by(100).collect();
        let mix = laplace_posterior(&s, &p).unwrap();
        let exact = sample_laplace_posterior(&mix, &mut rng, 10_000).unwrap();
        let d = stats::ks_two_sample(&thinned, &exact);
        assert!(d < stats::ks_two_sample_critical_1pct(thinned.len(), exact.len()), "KS {d}");
    }

    #[test]
    fn trace_csv_is_long_format() {
        let tr = rwmh_run(|_| 0.0, &[0.0, 1.0], 1.0, 10, &mut RandomStream::new(7, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        assert_eq!(tr.write_csv(&p, 5).unwrap(), 4);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("iteration,component,value\n5,theta1,"));
        assert_eq!(text.lines().count(), 5);
    }
}
