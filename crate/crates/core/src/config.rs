//! Run configuration, TOML (de)serialization and the figure presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::DetectionOptions;
use crate::correlations::{CorrelationOptions, MeasureSet};
use crate::dressing::SystemConfig;
use crate::rates::{RateMode, ReservoirSpec};
use crate::state_io::BlochVector;
use crate::{Error, Result};

/// One thermal reservoir. The temperature is given either directly
/// (`k_B = 1`, units of `omega_a`) or as the mean occupation `nbar` at the
/// bare frequency of the mode it damps. Omitting both means zero temperature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl ReservoirConfig {
    pub fn new(gamma: f64, nbar: f64) -> Self {
        ReservoirConfig {
            gamma,
            nbar: (nbar != 0.0).then_some(nbar),
            temperature: None,
        }
    }

    /// Resolve to a rate and temperature given the mode frequency.
    pub fn to_spec(&self, mode_frequency: f64) -> Result<ReservoirSpec> {
        let spec = match (self.nbar, self.temperature) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either nbar or temperature for a reservoir, not both".into(),
                ))
            }
            (Some(n), None) => {
                if !(n.is_finite() && n >= 0.0) {
                    return Err(Error::Config(format!("nbar must be non-negative, got {n}")));
                }
                ReservoirSpec::from_occupation(self.gamma, n, mode_frequency)
            }
            (None, Some(t)) => ReservoirSpec {
                gamma: self.gamma,
                temperature: t,
            },
            (None, None) => ReservoirSpec::zero_temperature(self.gamma),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reservoirs {
    pub cavity1: ReservoirConfig,
    pub cavity2: ReservoirConfig,
    pub fiber: ReservoirConfig,
}

impl Reservoirs {
    pub fn uniform(gamma: f64, nbar: [f64; 3]) -> Self {
        Reservoirs {
            cavity1: ReservoirConfig::new(gamma, nbar[0]),
            cavity2: ReservoirConfig::new(gamma, nbar[1]),
            fiber: ReservoirConfig::new(gamma, nbar[2]),
        }
    }

    pub fn as_array(&self) -> [ReservoirConfig; 3] {
        [self.cavity1, self.cavity2, self.fiber]
    }

    /// Largest damping rate, or 1 when every reservoir is lossless. Times in
    /// configurations and outputs are in units of its inverse.
    pub fn reference_rate(&self) -> f64 {
        let g = self.as_array().iter().map(|r| r.gamma).fold(0.0, f64::max);
        if g > 0.0 {
            g
        } else {
            1.0
        }
    }
}

/// Initial Bell-diagonal atomic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub c: [f64; 3],
    /// Replace an unphysical `c` by the nearest physical correlation vector
    /// instead of rejecting it.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub project_to_physical: bool,
}

impl InitialConfig {
    /// The correlation vector the run actually starts from.
    pub fn effective(&self) -> Result<BlochVector> {
        if self.project_to_physical {
            Ok(BlochVector::nearest_physical(self.c))
        } else {
            BlochVector::new(self.c[0], self.c[1], self.c[2])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// End of the window in units of `1 / gamma_ref`.
    pub t_max: f64,
    /// Number of uniformly spaced samples including `t = 0`.
    pub samples: usize,
}

/// Which integrator produces the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    #[default]
    Secular,
    RungeKutta,
}

impl std::fmt::Display for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Propagator::Secular => "secular",
            Propagator::RungeKutta => "rungekutta",
        })
    }
}

impl std::str::FromStr for Propagator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "secular" => Ok(Propagator::Secular),
            "rungekutta" | "rk" => Ok(Propagator::RungeKutta),
            other => Err(Error::Config(format!("unknown propagator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub mode: RateMode,
    pub propagator: Propagator,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

/// Everything needed for one end-to-end simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub system: SystemConfig,
    pub reservoir: Reservoirs,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub measures: MeasureSet,
    #[serde(default)]
    pub optimizer: CorrelationOptions,
    #[serde(default)]
    pub detection: DetectionOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize to TOML")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml(&text)
    }

    /// SHA-256 of the canonical TOML serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Check every section; does not run any numerics.
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.system.excitations < 2 {
            return Err(Error::Config(
                "the two-qubit readout needs an excitation cap of at least 2".into(),
            ));
        }
        self.reservoir_specs()?;
        self.initial.effective()?;
        if !(self.time.t_max.is_finite() && self.time.t_max > 0.0) {
            return Err(Error::Config(format!(
                "t_max must be positive, got {}",
                self.time.t_max
            )));
        }
        if self.time.samples < 2 {
            return Err(Error::Config("at least two time samples are required".into()));
        }
        self.detection.validate()
    }

    /// Reservoirs with temperatures resolved against their mode frequencies.
    pub fn reservoir_specs(&self) -> Result<[ReservoirSpec; 3]> {
        let s = &self.system;
        let r = &self.reservoir;
        Ok([
            r.cavity1.to_spec(s.omega_0)?,
            r.cavity2.to_spec(s.omega_0)?,
            r.fiber.to_spec(s.omega_f)?,
        ])
    }

    /// Sample times in units of `1 / gamma_ref`.
    pub fn scaled_times(&self) -> Vec<f64> {
        let n = self.time.samples;
        (0..n).map(|i| self.time.t_max * i as f64 / (n - 1) as f64).collect()
    }

    /// Sample times in units of `1 / omega_a`.
    pub fn physical_times(&self) -> Vec<f64> {
        let g = self.reservoir.reference_rate();
        self.scaled_times().into_iter().map(|t| t / g).collect()
    }

    /// Set a numeric field addressed by its dotted TOML path, such as
    /// `system.nu` or `reservoir.fiber.nbar`. Two shorthands cover the
    /// the symmetric parameter families: `system.g` sets both atom-cavity
    /// couplings and `reservoir.gamma` sets all three damping rates.
    pub fn set_key(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "system.g" => {
                self.set_key("system.g1", value)?;
                return self.set_key("system.g2", value);
            }
            "reservoir.gamma" => {
                for r in ["cavity1", "cavity2", "fiber"] {
                    self.set_key(&format!("reservoir.{r}.gamma"), value)?;
                }
                return Ok(());
            }
            _ => {}
        }
        let mut doc = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let parts: Vec<&str> = key.split('.').collect();
        let (leaf, path) = parts.split_last().ok_or_else(|| Error::Config("empty key".into()))?;
        let mut node = &mut doc;
        for p in path {
            node = node
                .get_mut(*p)
                .ok_or_else(|| Error::Config(format!("unknown configuration key `{key}`")))?;
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{key}` does not name a field")))?;
        let new = match table.get(*leaf) {
            Some(toml::Value::Integer(_)) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::Config(format!(
                        "`{key}` takes a non-negative integer, got {value}"
                    )));
                }
                toml::Value::Integer(value as i64)
            }
            Some(toml::Value::Float(_)) => toml::Value::Float(value),
            Some(_) => return Err(Error::Config(format!("`{key}` is not numeric"))),
            // Optional reservoir fields are absent when unset.
            None if path.first() == Some(&"reservoir") && matches!(*leaf, "nbar" | "temperature") => {
                toml::Value::Float(value)
            }
            None => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        };
        table.insert((*leaf).to_string(), new);
        *self = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 7] = [
    "fig1b",
    "fig2a-cold",
    "fig2a-hot",
    "fig2b-weak",
    "fig2b-strong",
    "fig3-cold",
    "fig3-hot",
];

fn base(name: &str, gamma: f64, g: f64, nu: f64, excitations: u32, nbar3: f64, c: [f64; 3]) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        system: SystemConfig {
            omega_a: 1.0,
            omega_0: 0.9,
            omega_f: 1.0,
            g1: g,
            g2: g,
            nu,
            excitations,
        },
        reservoir: Reservoirs::uniform(gamma, [0.0, 0.0, nbar3]),
        initial: InitialConfig {
            c,
            project_to_physical: false,
        },
        // Ten damping times resolve both the decay and the Rabi-like
        // exchange (at least 9 samples per period in every preset).
        time: TimeConfig {
            t_max: 10.0,
            samples: 2001,
        },
        run: RunSettings::default(),
        measures: MeasureSet::default(),
        optimizer: CorrelationOptions::default(),
        detection: DetectionOptions::default(),
        output: OutputConfig::default(),
    }
}

/// The parameter set behind one figure curve.
pub fn preset(name: &str) -> Result<RunConfig> {
    const FIG2_GAMMA: f64 = 0.008;
    const FIG2_C: [f64; 3] = [1.0, -0.95, 0.95];
    const FIG3_GAMMA: f64 = 0.1;
    const FIG3_C: [f64; 3] = [0.85, -0.6, 0.36];
    // Zero-temperature runs never leave the two-excitation sector of the
    // initial state; thermal runs use the largest cap the model is built for.
    const COLD_CAP: u32 = 2;
    const HOT_CAP: u32 = 6;
    let g2 = 10.0 * FIG2_GAMMA;
    let g3 = 5.0 * FIG3_GAMMA;
    let cfg = match name {
        "fig1b" | "fig2a-cold" => base(name, FIG2_GAMMA, g2, g2, COLD_CAP, 0.0, FIG2_C),
        "fig2a-hot" => base(name, FIG2_GAMMA, g2, g2, HOT_CAP, 4.0, FIG2_C),
        "fig2b-weak" => base(name, FIG2_GAMMA, g2, 10.0 * FIG2_GAMMA, HOT_CAP, 3.0, FIG2_C),
        "fig2b-strong" => base(name, FIG2_GAMMA, g2, 100.0 * FIG2_GAMMA, HOT_CAP, 3.0, FIG2_C),
        "fig3-cold" | "fig3-hot" => {
            let nbar3 = if name == "fig3-hot" { 4.0 } else { 0.0 };
            let cap = if nbar3 > 0.0 { HOT_CAP } else { COLD_CAP };
            let mut cfg = base(name, FIG3_GAMMA, g3, g3, cap, nbar3, FIG3_C);
            // This correlation vector lies just outside the physical tetrahedron.
            cfg.initial.project_to_physical = true;
            cfg
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
