//! JSON run-configuration schema and the embedded figure presets.
//!
//! A configuration is a single JSON document; individual fields can be
//! overridden with dotted paths (`scan.points=5001`) before validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MaterialParams, OscillatorParams, SystemParams};

pub const NM3_TO_M3: f64 = 1.0e-27;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinConfig {
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorConfig {
    pub omega: f64,
    pub gamma: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_spins: u64,
    pub volume_nm3: f64,
    pub g_factor: f64,
    pub omega_scale_rad_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub g_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

/// The full run configuration; see the embedded presets for examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// "single" or "double"; must match the resonator count.
    pub mode: String,
    pub spin: SpinConfig,
    pub resonators: Vec<ResonatorConfig>,
    pub ensemble: EnsembleConfig,
    pub drive: DriveConfig,
    pub scan: ScanConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Structural invariants that do not need the physics constructors.
    pub fn check(&self) -> Result<()> {
        let expected = match self.mode.as_str() {
            "single" => 1,
            "double" => 2,
            other => {
                return Err(Error::Config(format!(
                    "mode must be \"single\" or \"double\", got {other:?}"
                )))
            }
        };
        if self.resonators.len() != expected {
            return Err(Error::Config(format!(
                "mode {:?} requires {expected} resonator(s), got {}",
                self.mode,
                self.resonators.len()
            )));
        }
        if !(self.scan.omega_min < self.scan.omega_max) {
            return Err(Error::Config("scan requires omega_min < omega_max".into()));
        }
        if self.scan.points < 3 {
            return Err(Error::Config("scan requires points >= 3".into()));
        }
        Ok(())
    }

    /// Build the validated physics parameters (stability enforced).
    pub fn to_params(&self) -> Result<(SystemParams, MaterialParams)> {
        self.check()?;
        let sys = SystemParams::new(
            OscillatorParams { omega: self.spin.omega, gamma: self.spin.gamma },
            self.resonators
                .iter()
                .map(|r| OscillatorParams { omega: r.omega, gamma: r.gamma })
                .collect(),
            self.resonators.iter().map(|r| r.coupling).collect(),
            self.ensemble.n_spins,
            self.drive.g_p,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let mat = self.material()?;
        Ok((sys, mat))
    }

    /// Like [`RunConfig::to_params`] but allows unstable parameter sets, so
    /// mode analysis can report `stable = false` instead of failing.
    pub fn to_params_unchecked(&self) -> Result<(SystemParams, MaterialParams)> {
        self.check()?;
        let sys = SystemParams::new_unchecked(
            OscillatorParams { omega: self.spin.omega, gamma: self.spin.gamma },
            self.resonators
                .iter()
                .map(|r| OscillatorParams { omega: r.omega, gamma: r.gamma })
                .collect(),
            self.resonators.iter().map(|r| r.coupling).collect(),
            self.ensemble.n_spins,
            self.drive.g_p,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let mat = self.material()?;
        Ok((sys, mat))
    }

    fn material(&self) -> Result<MaterialParams> {
        MaterialParams::new(
            self.ensemble.volume_nm3 * NM3_TO_M3,
            self.ensemble.omega_scale_rad_s,
            self.ensemble.g_factor,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// Apply a `dotted.path=value` override in place. The value is parsed
    /// as JSON when possible and falls back to a string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not path=value")))?;
        let value: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let mut doc = serde_json::to_value(&*self)?;
        let mut node = &mut doc;
        for key in path.split('.') {
            node = match node {
                serde_json::Value::Object(map) => map
                    .get_mut(key)
                    .ok_or_else(|| Error::Config(format!("unknown config field {path:?}")))?,
                serde_json::Value::Array(items) => {
                    let idx: usize = key.parse().map_err(|_| {
                        Error::Config(format!("array index expected in {path:?}"))
                    })?;
                    items
                        .get_mut(idx)
                        .ok_or_else(|| Error::Config(format!("index {idx} out of range in {path:?}")))?
                }
                _ => return Err(Error::Config(format!("{path:?} does not address a field"))),
            };
        }
        *node = value;
        *self = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Canonical serialized form; also serves as the determinism digest.
    pub fn digest(&self) -> String {
        serde_json::to_string(self).expect("RunConfig serializes")
    }
}

const DEFAULT_ENSEMBLE: EnsembleConfig = EnsembleConfig {
    n_spins: 20,
    // (4 pi / 3) * 10^3 nm^3.
    volume_nm3: 4188.790204786391,
    g_factor: 2.0,
    omega_scale_rad_s: 1.0e6,
};

fn single_preset(coupling: f64) -> RunConfig {
    RunConfig {
        mode: "single".into(),
        spin: SpinConfig { omega: 1.0, gamma: 5.0e-2 },
        resonators: vec![ResonatorConfig { omega: 1.0, gamma: 1.0e-7, coupling }],
        ensemble: DEFAULT_ENSEMBLE,
        drive: DriveConfig { g_p: 1.0 },
        scan: ScanConfig { omega_min: 0.5, omega_max: 2.0, points: 3001 },
    }
}

fn double_preset(omegas: [f64; 2], couplings: [f64; 2], scan: ScanConfig) -> RunConfig {
    RunConfig {
        mode: "double".into(),
        spin: SpinConfig { omega: 1.0, gamma: 5.0e-2 },
        resonators: vec![
            ResonatorConfig { omega: omegas[0], gamma: 1.0e-7, coupling: couplings[0] },
            ResonatorConfig { omega: omegas[1], gamma: 1.0e-7, coupling: couplings[1] },
        ],
        ensemble: DEFAULT_ENSEMBLE,
        drive: DriveConfig { g_p: 1.0 },
        scan,
    }
}

pub const PRESET_NAMES: [&str; 9] =
    ["fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d", "fig6", "fig7a", "fig7b"];

/// The embedded figure presets: pure data, overridable with `--set`.
pub fn preset(name: &str) -> Result<RunConfig> {
    let wide = ScanConfig { omega_min: 0.5, omega_max: 2.0, points: 3001 };
    let cfg = match name {
        "fig4a" => single_preset(0.0),
        "fig4b" => single_preset(0.05),
        "fig5a" => double_preset([1.0, 1.5], [0.0, 0.0], wide),
        "fig5b" => double_preset([1.0, 1.5], [0.03, 0.05], wide),
        "fig5c" => double_preset([1.0, 1.5], [0.05, 0.05], wide),
        "fig5d" => double_preset([1.0, 1.5], [0.07, 0.05], wide),
        "fig6" => double_preset([1.0, 1.0], [0.03, 0.05], wide),
        // Group-velocity scans over the two transparency windows of fig5b:
        // bracketed by the absorption peaks around each window.
        "fig7a" => double_preset(
            [1.0, 1.5],
            [0.03, 0.05],
            ScanConfig { omega_min: 0.915, omega_max: 1.051, points: 2001 },
        ),
        "fig7b" => double_preset(
            [1.0, 1.5],
            [0.03, 0.05],
            ScanConfig { omega_min: 1.051, omega_max: 1.519, points: 2001 },
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}
