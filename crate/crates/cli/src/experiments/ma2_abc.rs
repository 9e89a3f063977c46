use serde::{Deserialize, Serialize};

use bayesbench_core::abc::{abc_reject, AcfSummary, DistanceScaling, MaRootModel};
use bayesbench_core::ma::{simulate_series, MaCoefficients};
use bayesbench_core::numerics::RandomStream;
use bayesbench_core::stats;

use super::{check, check_at_least, density_rows, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::line_chart;
use crate::row;

/// Rejection ABC for an MA(p) series with autocorrelation summaries,
/// accepted samples reported at several distance quantiles of one table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ma2Abc {
    pub seed: u64,
    pub replicates: usize,
    pub theta: Vec<f64>,
    pub length: usize,
    pub simulations: usize,
    pub quantiles: Vec<f64>,
    pub lags: usize,
    pub distance_scaling: DistanceScaling,
    /// Also write the full reference table of the first replicate.
    pub write_table: bool,
}

impl Default for Ma2Abc {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 1,
            theta: vec![0.6, 0.2],
            length: 100,
            simulations: 1_000_000,
            quantiles: vec![0.1, 0.01, 0.001],
            lags: 2,
            distance_scaling: DistanceScaling::Mad,
            write_table: false,
        }
    }
}

impl Experiment for Ma2Abc {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check(!self.theta.is_empty(), || "`theta` must not be empty".into())?;
        check(self.theta.iter().all(|v| v.is_finite()), || "`theta` must be finite".into())?;
        check_at_least("lags", self.lags, 1)?;
        check(self.length > self.lags + 1, || "`length` must exceed `lags` + 1".into())?;
        check_at_least("simulations", self.simulations, 100)?;
        check(!self.quantiles.is_empty(), || "`quantiles` must not be empty".into())?;
        check(self.quantiles.iter().all(|&q| q > 0.0 && q <= 1.0), || "`quantiles` must lie in (0, 1]".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let p = self.theta.len();
        let model = MaRootModel { p, len: self.length };
        let summary = AcfSummary { lags: self.lags };
        let q_max = self.quantiles.iter().copied().fold(0.0, f64::max);
        let coeffs = MaCoefficients::standard(self.theta.clone());
        let write_table = self.write_table;
        let reps = for_replicates(self.replicates, |r| {
            let base = RandomStream::new(self.seed, r as u64);
            let (series, _) = simulate_series(&coeffs, self.length, &mut base.substream(0));
            let mut table = abc_reject(&model, &series, &summary, self.simulations, q_max, &base.substream(1))?;
            if self.distance_scaling != DistanceScaling::Mad {
                table = table.rescaled(self.distance_scaling)?;
            }
            let levels = self
                .quantiles
                .iter()
                .map(|&q| {
                    let t = table.with_quantile(q)?;
                    let acc: Vec<Vec<f64>> = (0..p).map(|j| t.accepted_theta(j)).collect();
                    Ok((q, t.epsilon(), acc))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((series, levels, (r == 0 && write_table).then_some(table)))
        })?;

        let mut acc_header = vec!["replicate".to_string(), "quantile".to_string()];
        acc_header.extend((1..=p).map(|j| format!("theta{j}")));
        let mut sum_header = vec!["replicate", "quantile", "epsilon", "accepted"].into_iter().map(String::from).collect::<Vec<_>>();
        sum_header.extend((1..=p).flat_map(|j| [format!("mean_theta{j}"), format!("sd_theta{j}")]));
        let mut acc_rows = Vec::new();
        let mut sum_rows = Vec::new();
        for (r, (_, levels, _)) in reps.iter().enumerate() {
            for (q, eps, acc) in levels {
                for i in 0..acc[0].len() {
                    let mut row = row![r, q];
                    row.extend(acc.iter().map(|c| c[i].to_string()));
                    acc_rows.push(row);
                }
                let mut row = row![r, q, eps, acc[0].len()];
                for c in acc {
                    row.push(stats::mean(c).to_string());
                    row.push(stats::sd(c).to_string());
                }
                sum_rows.push(row);
            }
        }
        let h: Vec<&str> = acc_header.iter().map(String::as_str).collect();
        out.csv("accepted.csv", &h, acc_rows)?;
        let h: Vec<&str> = sum_header.iter().map(String::as_str).collect();
        out.csv("summary.csv", &h, sum_rows)?;

        let (series, levels, table) = &reps[0];
        out.csv("series.csv", &["x"], series.iter().map(|x| row![x]))?;
        let mut dens = Vec::new();
        for j in 0..p {
            let mut curves = Vec::new();
            for (q, _, acc) in levels {
                let (rows, s) = density_rows(&format!("theta{} q={q}", j + 1), &acc[j]);
                dens.extend(rows);
                curves.push(s);
            }
            out.svg(
                &format!("density_theta{}.svg", j + 1),
                line_chart(&format!("ABC posterior of theta{} by distance quantile", j + 1), "theta", "density", &curves),
            )?;
        }
        out.csv("density.csv", &["group", "x", "density"], dens)?;
        if let Some(t) = table {
            t.write_csv(out.path("table.csv"))?;
            out.record("table.csv", Some(t.len()));
            out.record("table.json", None);
        }
        Ok(())
    }
}
