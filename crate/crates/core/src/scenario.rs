//! Management scenarios as parameter overrides applied before a run.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{ChoiceRule, Period, Population, DEFAULT_CAPTURE_RATE, DEFAULT_SURVEILLANCE};
use crate::ecology::{DisturbanceSchedule, FishingMortalityMode, DEFAULT_SPILLOVER_THRESHOLD};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    StatuQuo,
    NoFishing,
    NoPoaching,
    Quota,
    NightBan,
    FinancialAid,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::StatuQuo,
        ScenarioName::NoFishing,
        ScenarioName::NoPoaching,
        ScenarioName::Quota,
        ScenarioName::NightBan,
        ScenarioName::FinancialAid,
        ScenarioName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::StatuQuo => "statu-quo",
            ScenarioName::NoFishing => "no-fishing",
            ScenarioName::NoPoaching => "no-poaching",
            ScenarioName::Quota => "quota",
            ScenarioName::NightBan => "night-ban",
            ScenarioName::FinancialAid => "financial-aid",
            ScenarioName::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == key)
            .ok_or_else(|| Error::Scenario(format!("unknown scenario `{s}`")))
    }
}

pub const DEFAULT_QUOTA_KG: f64 = 5.0;
pub const DEFAULT_FINANCIAL_AID: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub quota_kg_per_day: Option<f64>,
    pub poaching_override: Option<f64>,
    pub radius_multiplier: f64,
    pub night_ban: bool,
    pub fisher_count_multiplier: f64,
    /// Replaces the runtime surveillance level when set.
    pub surveillance: Option<f64>,
    pub disturbance: DisturbanceSchedule,
}

impl ScenarioConfig {
    pub fn preset(name: ScenarioName) -> Self {
        let mut c = ScenarioConfig {
            name,
            quota_kg_per_day: None,
            poaching_override: None,
            radius_multiplier: 1.0,
            night_ban: false,
            fisher_count_multiplier: 1.0,
            surveillance: None,
            disturbance: DisturbanceSchedule::default(),
        };
        match name {
            ScenarioName::StatuQuo | ScenarioName::Custom => {}
            ScenarioName::NoFishing => c.fisher_count_multiplier = 0.0,
            ScenarioName::NoPoaching => c.poaching_override = Some(0.0),
            ScenarioName::Quota => c.quota_kg_per_day = Some(DEFAULT_QUOTA_KG),
            ScenarioName::NightBan => c.night_ban = true,
            ScenarioName::FinancialAid => c.radius_multiplier = 1.0 + DEFAULT_FINANCIAL_AID,
        }
        c
    }

    pub fn with_disturbance(mut self, disturbance: DisturbanceSchedule) -> Self {
        self.disturbance = disturbance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.quota_kg_per_day {
            if !(q >= 0.0) {
                return Err(Error::param("quota", format!("{q} must be >= 0")));
            }
        }
        if let Some(p) = self.poaching_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("poaching", format!("{p} must lie in [0, 1]")));
            }
        }
        if let Some(s) = self.surveillance {
            if !(s >= 0.0) {
                return Err(Error::param("surveillance", format!("{s} must be >= 0")));
            }
        }
        if !(self.radius_multiplier >= 0.0) {
            return Err(Error::param("radius_multiplier", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.fisher_count_multiplier) {
            return Err(Error::param(
                "fisher_count_multiplier",
                "must lie in [0, 1]",
            ));
        }
        self.disturbance.validate()
    }

    /// Reads a custom scenario: optional `base` preset name plus any field
    /// overrides, in TOML key/value form.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn from_toml(text: &str, source: &Path) -> Result<Self> {
        let file: CustomFile =
            toml::from_str(text).map_err(|e| Error::parse(source, 0, e.to_string()))?;
        let base = match &file.base {
            Some(b) => b.parse()?,
            None => ScenarioName::StatuQuo,
        };
        let mut c = ScenarioConfig::preset(base);
        c.name = ScenarioName::Custom;
        if let Some(q) = file.quota_kg_per_day {
            c.quota_kg_per_day = Some(q);
        }
        if let Some(p) = file.poaching_override {
            c.poaching_override = Some(p);
        }
        if let Some(m) = file.radius_multiplier {
            c.radius_multiplier = m;
        }
        if let Some(b) = file.night_ban {
            c.night_ban = b;
        }
        if let Some(m) = file.fisher_count_multiplier {
            c.fisher_count_multiplier = m;
        }
        if let Some(s) = file.surveillance {
            c.surveillance = Some(s);
        }
        if let Some(d) = file.disturbance {
            c.disturbance = d;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomFile {
    base: Option<String>,
    quota_kg_per_day: Option<f64>,
    poaching_override: Option<f64>,
    radius_multiplier: Option<f64>,
    night_ban: Option<bool>,
    fisher_count_multiplier: Option<f64>,
    surveillance: Option<f64>,
    disturbance: Option<DisturbanceSchedule>,
}

/// Knobs read by the engine during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuntimeParams {
    pub surveillance: f64,
    /// Capture rate per fishing hour on day ticks.
    pub capture_rate: f64,
    pub quota_kg: Option<f64>,
    /// Fixed poaching probability replacing the per-fisher formula.
    pub poaching_override: Option<f64>,
    pub tourism_threshold: f64,
    pub spillover_threshold: f64,
    pub choice_rule: ChoiceRule,
    pub fishing_mortality: FishingMortalityMode,
}

impl Default for RuntimeParams {
    fn default() -> Self {
        RuntimeParams {
            surveillance: DEFAULT_SURVEILLANCE,
            capture_rate: DEFAULT_CAPTURE_RATE,
            quota_kg: None,
            poaching_override: None,
            tourism_threshold: 0.0,
            spillover_threshold: DEFAULT_SPILLOVER_THRESHOLD,
            choice_rule: ChoiceRule::default(),
            fishing_mortality: FishingMortalityMode::default(),
        }
    }
}

impl RuntimeParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("surveillance", self.surveillance),
            ("capture_rate", self.capture_rate),
            ("tourism_threshold", self.tourism_threshold),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(
                    name,
                    format!("{v} must be a finite value >= 0"),
                ));
            }
        }
        if let Some(q) = self.quota_kg {
            if !(q >= 0.0) {
                return Err(Error::param("quota", format!("{q} must be >= 0")));
            }
        }
        if let Some(p) = self.poaching_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("poaching", format!("{p} must lie in [0, 1]")));
            }
        }
        if !(self.spillover_threshold > 0.0 && self.spillover_threshold <= 1.0) {
            return Err(Error::param("spillover_threshold", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Applies the scenario to a copy of the population and parameters.
///
/// Radii are recomputed from each fisher's base radius and removals keep
/// the first `round(m * N)` fishers of the generated table, so applying the
/// same config twice equals applying it once.
pub fn apply_scenario(
    config: &ScenarioConfig,
    population: &Population,
    params: &RuntimeParams,
) -> Result<(Population, RuntimeParams)> {
    config.validate()?;
    params.validate()?;
    let mut pop = population.clone();
    let mut p = params.clone();

    let reference = pop.districts.total_fishers().max(pop.fishers.len() as u32) as f64;
    let keep = (config.fisher_count_multiplier * reference).round() as usize;
    pop.fishers.retain(|f| f.id < keep);
    for f in &mut pop.fishers {
        f.fishing_radius_m = f.base_radius_m * config.radius_multiplier;
        if config.night_ban && f.period == Period::Night {
            f.period = Period::Day;
        }
    }
    if config.quota_kg_per_day.is_some() {
        p.quota_kg = config.quota_kg_per_day;
    }
    if config.poaching_override.is_some() {
        p.poaching_override = config.poaching_override;
    }
    if let Some(s) = config.surveillance {
        p.surveillance = s;
    }
    p.validate()?;
    Ok((pop, p))
}
