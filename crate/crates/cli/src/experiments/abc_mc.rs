use serde::{Deserialize, Serialize};

use bayesbench_core::abc::{abc_model_choice, GenerativeModel, LocationAbcModel, MedianMadSummary, ModelChoice};
use bayesbench_core::laplace_normal::{LocationModel, PriorSpec};
use bayesbench_core::numerics::RandomStream;

use super::{check, check_at_least, check_positive, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::box_chart;
use crate::row;

const GENERATORS: [LocationModel; 2] = [LocationModel::Normal, LocationModel::Laplace];

/// ABC model choice between the normal and double-exponential location
/// models, once with the sample median and once with the mad as summary.
/// Both summaries are evaluated on the same reference table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbcMcMedianMad {
    pub seed: u64,
    pub replicates: usize,
    pub sample_sizes: Vec<usize>,
    pub simulations: usize,
    pub quantile: f64,
    pub prior_sigma2: f64,
    pub mu: f64,
}

impl Default for AbcMcMedianMad {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 250,
            sample_sizes: vec![200],
            simulations: 100_000,
            quantile: 0.01,
            prior_sigma2: 1.0,
            mu: 0.0,
        }
    }
}

impl Experiment for AbcMcMedianMad {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check(!self.sample_sizes.is_empty(), || "`sample_sizes` must not be empty".into())?;
        check(self.sample_sizes.iter().all(|&n| n >= 2), || "`sample_sizes` entries must be at least 2".into())?;
        check_at_least("simulations", self.simulations, 1000)?;
        check(self.quantile > 0.0 && self.quantile <= 1.0, || "`quantile` must lie in (0, 1]".into())?;
        check_positive("prior_sigma2", self.prior_sigma2)?;
        check(self.mu.is_finite(), || "`mu` must be finite".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let prior = PriorSpec::new(self.prior_sigma2)?;
        // [n][generator] -> (P(normal) with median, P(normal) with mad)
        let reps = for_replicates(self.replicates, |r| {
            let base = RandomStream::new(self.seed, r as u64);
            let mut cells = Vec::with_capacity(2 * self.sample_sizes.len());
            for (i, &n) in self.sample_sizes.iter().enumerate() {
                let normal = LocationAbcModel { family: LocationModel::Normal, n, prior };
                let laplace = LocationAbcModel { family: LocationModel::Laplace, n, prior };
                let models: [(&dyn GenerativeModel, f64); 2] = [(&normal, 0.5), (&laplace, 0.5)];
                for (g, gen) in GENERATORS.iter().enumerate() {
                    let rng = base.substream((2 * i + g) as u64);
                    let obs = gen.simulate(n, self.mu, &mut rng.substream(0));
                    let both =
                        abc_model_choice(&models, &obs, &MedianMadSummary, self.simulations, self.quantile, &rng.substream(1))?;
                    let median = ModelChoice::from_table(both.table.project(&[0])?)?;
                    let mad = ModelChoice::from_table(both.table.project(&[1])?)?;
                    cells.push((median.probabilities[0], mad.probabilities[0]));
                }
            }
            Ok(cells)
        })?;

        for (which, file, title) in [(0, "median", "ABC-MC with the median"), (1, "mad", "ABC-MC with the mad")] {
            let mut rows = Vec::new();
            let mut groups = Vec::new();
            for (i, &n) in self.sample_sizes.iter().enumerate() {
                for (g, gen) in GENERATORS.iter().enumerate() {
                    let group = format!("{gen} n={n}");
                    let vals: Vec<f64> =
                        reps.iter().map(|cells| if which == 0 { cells[2 * i + g].0 } else { cells[2 * i + g].1 }).collect();
                    for (r, &p) in vals.iter().enumerate() {
                        let correct = if g == 0 { p } else { 1.0 - p };
                        rows.push(row![group, gen, n, r, p, correct]);
                    }
                    groups.push((group, vals));
                }
            }
            out.csv(&format!("{file}.csv"), &["group", "generator", "n", "replicate", "value", "p_correct"], rows)?;
            out.svg(&format!("{file}.svg"), box_chart(&format!("{title}: posterior probability of the normal model"), "P(normal | data)", &groups))?;
        }
        Ok(())
    }
}
