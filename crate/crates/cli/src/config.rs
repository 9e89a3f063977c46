//! Flat JSON experiment configuration with CLI overrides.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    #[value(name = "bf-consistency")]
    BfConsistency,
    #[value(name = "bf-mc-convergence")]
    BfMcConvergence,
    #[value(name = "bridge-vs-exact")]
    BridgeVsExact,
    #[value(name = "rwmh-vs-exact")]
    RwmhVsExact,
    #[value(name = "gibbs-growth")]
    GibbsGrowth,
    #[value(name = "ma2-abc")]
    Ma2Abc,
    #[value(name = "abc-mc-median-mad")]
    AbcMcMedianMad,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::BfConsistency,
        ExperimentName::BfMcConvergence,
        ExperimentName::BridgeVsExact,
        ExperimentName::RwmhVsExact,
        ExperimentName::GibbsGrowth,
        ExperimentName::Ma2Abc,
        ExperimentName::AbcMcMedianMad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::BfConsistency => "bf-consistency",
            ExperimentName::BfMcConvergence => "bf-mc-convergence",
            ExperimentName::BridgeVsExact => "bridge-vs-exact",
            ExperimentName::RwmhVsExact => "rwmh-vs-exact",
            ExperimentName::GibbsGrowth => "gibbs-growth",
            ExperimentName::Ma2Abc => "ma2-abc",
            ExperimentName::AbcMcMedianMad => "abc-mc-median-mad",
        }
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Values given on the command line, which take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

/// Reads the config object for `name`. A run manifest is accepted in place
/// of a config file, in which case its echoed config is used.
pub fn load_config_map(path: Option<&Path>, name: ExperimentName) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    if let (Some(Value::String(exp)), Some(Value::Object(_))) = (map.get("experiment"), map.get("config")) {
        if exp != name.as_str() {
            return Err(CliError::Config(format!("manifest is for `{exp}`, not `{name}`")));
        }
        let Some(Value::Object(cfg)) = map.remove("config") else { unreachable!() };
        return Ok(cfg);
    }
    Ok(map)
}

/// Applies overrides and deserializes, rejecting unknown keys.
pub fn resolve<T: DeserializeOwned>(mut map: Map<String, Value>, overrides: &Overrides) -> Result<T> {
    if let Some(seed) = overrides.seed {
        map.insert("seed".into(), seed.into());
    }
    if let Some(r) = overrides.replicates {
        map.insert("replicates".into(), r.into());
    }
    if !map.contains_key("seed") {
        return Err(CliError::Config("a seed is required: pass --seed or set `seed` in the config".into()));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::BfConsistency;
    use clap::ValueEnum;

    #[test]
    fn names_agree_between_clap_and_serde() {
        for name in ExperimentName::ALL {
            let from_clap = ExperimentName::from_str(name.as_str(), false).unwrap();
            assert_eq!(from_clap, name);
            assert_eq!(serde_json::to_value(name).unwrap(), Value::String(name.as_str().into()));
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let mut map = Map::new();
        map.insert("seed".into(), 1.into());
        map.insert("sample_size".into(), 3.into());
        let err = resolve::<BfConsistency>(map, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`sample_size`"), "{err}");
    }

    #[test]
    fn overrides_win_and_seed_is_required() {
        let mut map = Map::new();
        map.insert("seed".into(), 1.into());
        map.insert("replicates".into(), 4.into());
        let cfg: BfConsistency = resolve(map, &Overrides { seed: Some(9), replicates: Some(2) }).unwrap();
        assert_eq!((cfg.seed, cfg.replicates), (9, 2));
        assert!(resolve::<BfConsistency>(Map::new(), &Overrides::default()).is_err());
    }
}
