//! Lab configuration. Every field is required and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use mdlab_core::field::{FieldModel, Region, TimeGrid};
use mdlab_core::Tolerances;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub model: ModelConfig,
    pub thermal: ThermalConfig,
    pub region: RegionConfig,
    pub tolerances: ToleranceConfig,
    pub rng_seed: u64,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub mass: f64,
    pub time_grid: TimeGridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "T")]
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub base_center: f64,
    pub base_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub tol_rank: f64,
    pub tol_eq: f64,
}

/// Axes of a sweep. An empty axis keeps the base value; an empty `checks`
/// list means every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    pub halfwidth: Vec<f64>,
    pub checks: Vec<String>,
}

impl LabConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: LabConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Loads `path` and applies `key=value` overrides before validation.
    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        for spec in overrides {
            apply_override(&mut table, spec)?;
        }
        let config: LabConfig = table.try_into()?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(1..=3).contains(&m.d) {
            return Err(bad(format!("model.d must be 1, 2 or 3, got {}", m.d)));
        }
        if m.n < 2 || !m.n.is_power_of_two() {
            return Err(bad(format!("model.N must be a power of two, got {}", m.n)));
        }
        positive("model.L", m.length)?;
        positive("model.mass", m.mass)?;
        positive("model.time_grid.T", m.time_grid.extent)?;
        if m.time_grid.points < 3 {
            return Err(bad(format!("model.time_grid.M must be at least 3, got {}", m.time_grid.points)));
        }
        positive("thermal.beta", self.thermal.beta)?;
        check_halfwidth(self.region.base_halfwidth, m.length)?;
        if !self.region.base_center.is_finite() {
            return Err(bad("region.base_center must be finite".into()));
        }
        positive("tolerances.tol_rank", self.tolerances.tol_rank)?;
        positive("tolerances.tol_eq", self.tolerances.tol_eq)?;
        for &n in &self.sweep.n {
            if n < 2 || !n.is_power_of_two() {
                return Err(bad(format!("sweep.N entries must be powers of two, got {n}")));
            }
        }
        for &b in &self.sweep.beta {
            positive("sweep.beta", b)?;
        }
        for &h in &self.sweep.halfwidth {
            check_halfwidth(h, m.length)?;
        }
        for name in &self.sweep.checks {
            crate::checks::CheckName::parse(name)?;
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol_rank: self.tolerances.tol_rank,
            tol_eq: self.tolerances.tol_eq,
        }
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid {
            points: self.model.time_grid.points,
            extent: self.model.time_grid.extent,
        }
    }

    pub fn field_model(&self) -> Result<FieldModel> {
        let m = &self.model;
        Ok(FieldModel::new(m.d, m.n, m.length, m.mass, self.time_grid())?)
    }

    /// The base region, a cube of the given half-width around `base_center`
    /// on every axis.
    pub fn region(&self, model: &FieldModel) -> Result<Region> {
        Ok(Region::centered(model, self.region.base_center, self.region.base_halfwidth)?)
    }
}

fn bad(reason: String) -> LabError {
    LabError::Config(reason)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_halfwidth(h: f64, length: f64) -> Result<()> {
    if h > 0.0 && h <= 0.5 * length {
        Ok(())
    } else {
        Err(bad(format!("region half-width must lie in (0, L/2 = {}], got {h}", 0.5 * length)))
    }
}

/// Sets a dotted key (`model.N=64`, `sweep.beta=[0.5, 2.0]`) in a parsed
/// table. The key must already exist; the value is read as a TOML literal,
/// falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let fail = |reason: &str| LabError::Override {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (key, raw) = spec.split_once('=').ok_or_else(|| fail("expected key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let (last, parents) = path.split_last().ok_or_else(|| fail("empty key"))?;
    let mut cur = table;
    for p in parents {
        cur = cur
            .get_mut(*p)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| fail("no such key"))?;
    }
    let slot = cur.get_mut(*last).ok_or_else(|| fail("no such key"))?;
    // integers given where floats are expected
    let value = match (&*slot, value) {
        (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    *slot = value;
    Ok(())
}
