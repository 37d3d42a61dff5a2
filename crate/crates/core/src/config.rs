//! Run configuration: everything needed to reproduce a run, in one TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{
    default_fisher_count, generate_population, load_population, DistrictTable, Population,
};
use crate::ecology::{
    Alphas, CalibrationMode, CalibrationScope, DisturbanceSchedule, DEFAULT_COTS_DESTRUCTION,
};
use crate::engine::{RunOptions, DEFAULT_HORIZON_TICKS};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scenario::{RuntimeParams, ScenarioConfig, ScenarioName};
use crate::world::{generate_synthetic_island, load_world, IslandSpec, WorldGrid};

/// Where the map comes from: a bundle directory, or a synthetic island.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSource {
    pub bundle: Option<PathBuf>,
    pub seed: u64,
    pub island: IslandSpec,
}

impl Default for WorldSource {
    fn default() -> Self {
        WorldSource {
            bundle: None,
            seed: 1,
            island: IslandSpec::default(),
        }
    }
}

/// Where the fishers come from. `dir` holds a saved population; otherwise
/// one is generated from `districts` (a district table) or, failing that,
/// from a synthetic table of `fishers` fishers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSource {
    pub dir: Option<PathBuf>,
    pub districts: Option<PathBuf>,
    /// Defaults to the reference density scaled to the fishable area.
    pub fishers: Option<u32>,
    pub seed: u64,
}

impl Default for PopulationSource {
    fn default() -> Self {
        PopulationSource {
            dir: None,
            districts: None,
            fishers: None,
            seed: 1,
        }
    }
}

/// A preset name plus optional overrides; `file` loads a custom scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSource {
    pub name: ScenarioName,
    pub file: Option<PathBuf>,
    pub quota_kg_per_day: Option<f64>,
    /// Extra radius share under financial aid (0.5 = +50 %).
    pub financial_aid: Option<f64>,
    pub surveillance: Option<f64>,
    pub disturbance: DisturbanceSchedule,
}

impl Default for ScenarioSource {
    fn default() -> Self {
        ScenarioSource {
            name: ScenarioName::StatuQuo,
            file: None,
            quota_kg_per_day: None,
            financial_aid: None,
            surveillance: None,
            disturbance: DisturbanceSchedule::default(),
        }
    }
}

impl ScenarioSource {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut c = match &self.file {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::preset(self.name).with_disturbance(self.disturbance),
        };
        if let Some(q) = self.quota_kg_per_day {
            if c.quota_kg_per_day.is_some() || self.name == ScenarioName::Quota {
                c.quota_kg_per_day = Some(q);
            }
        }
        if let Some(aid) = self.financial_aid {
            if self.name == ScenarioName::FinancialAid {
                c.radius_multiplier = 1.0 + aid;
            }
        }
        if self.surveillance.is_some() {
            c.surveillance = self.surveillance;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub horizon_ticks: u64,
    pub calibration_mode: CalibrationMode,
    pub calibration_scope: CalibrationScope,
    pub cots_destruction: f64,
    pub output: Option<PathBuf>,
    pub progress_every: u64,
    pub log_trips: bool,
    pub world: WorldSource,
    pub population: PopulationSource,
    pub scenario: ScenarioSource,
    pub alphas: Alphas,
    pub params: RuntimeParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            horizon_ticks: DEFAULT_HORIZON_TICKS,
            calibration_mode: CalibrationMode::default(),
            calibration_scope: CalibrationScope::default(),
            cots_destruction: DEFAULT_COTS_DESTRUCTION,
            output: None,
            progress_every: 0,
            log_trips: false,
            world: WorldSource::default(),
            population: PopulationSource::default(),
            scenario: ScenarioSource::default(),
            alphas: Alphas::default(),
            params: RuntimeParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn from_toml(text: &str, source: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(source, 0, e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn load_world(&self) -> Result<WorldGrid> {
        match &self.world.bundle {
            Some(dir) => load_world(dir),
            None => generate_synthetic_island(&self.world.island, self.world.seed),
        }
    }

    pub fn load_population(&self, world: &WorldGrid) -> Result<Population> {
        let p = &self.population;
        if let Some(dir) = &p.dir {
            return load_population(dir, world);
        }
        let table = match &p.districts {
            Some(path) => DistrictTable::read_csv(path)?,
            None => {
                let n = p.fishers.unwrap_or_else(|| default_fisher_count(world));
                DistrictTable::synthetic(world, n, p.seed)
            }
        };
        generate_population(world, &table, p.seed)
    }

    pub fn run_options(&self, execution: Execution) -> RunOptions {
        RunOptions {
            seed: self.seed,
            horizon_ticks: self.horizon_ticks,
            params: self.params.clone(),
            alphas: self.alphas,
            calibration_mode: self.calibration_mode,
            calibration_scope: self.calibration_scope,
            cots_destruction: self.cots_destruction,
            lv_params: None,
            execution,
            log_trips: self.log_trips,
            trace: false,
            progress_every: self.progress_every,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig {
            seed: 42,
            ..RunConfig::default()
        };
        c.world.bundle = Some(PathBuf::from("demo"));
        c.scenario.name = ScenarioName::Quota;
        c.scenario.quota_kg_per_day = Some(3.0);
        c.params.quota_kg = Some(1.0);
        let text = c.to_toml();
        let back = RunConfig::from_toml(&text, Path::new("x.toml")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml(
            "seed = 7\n[scenario]\nname = \"night-ban\"\n",
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.horizon_ticks, DEFAULT_HORIZON_TICKS);
        assert!(c.scenario.resolve().unwrap().night_ban);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml("seeed = 7\n", Path::new("x")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn overrides_apply_to_their_scenario() {
        let mut s = ScenarioSource {
            name: ScenarioName::Quota,
            quota_kg_per_day: Some(2.5),
            ..Default::default()
        };
        assert_eq!(s.resolve().unwrap().quota_kg_per_day, Some(2.5));
        s.name = ScenarioName::StatuQuo;
        assert_eq!(s.resolve().unwrap().quota_kg_per_day, None);
        let aid = ScenarioSource {
            name: ScenarioName::FinancialAid,
            financial_aid: Some(1.0),
            ..Default::default()
        };
        assert_eq!(aid.resolve().unwrap().radius_multiplier, 2.0);
    }

    #[test]
    fn default_population_uses_reference_density() {
        let c = RunConfig::default();
        let w = c.load_world().unwrap();
        let pop = c.load_population(&w).unwrap();
        assert_eq!(pop.len() as u32, default_fisher_count(&w));
    }
}
