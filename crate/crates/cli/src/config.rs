//! Run configuration: JSON file, command-line overrides, validation and hashing.

use std::path::Path;

use elliptic_shooter_core::hypothesis::GridSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn default_dim() -> usize {
    3
}
fn default_d_tol() -> f64 {
    1e-12
}
fn default_ode_tol() -> f64 {
    1e-10
}
fn default_r_max_factor() -> f64 {
    1.0
}
fn default_mesh_n() -> usize {
    4000
}

/// Everything that determines a run's numerical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub model: Option<Value>,
    #[serde(default)]
    pub diffusion: Option<Value>,
    #[serde(default = "default_dim", rename = "N")]
    pub dim: usize,
    #[serde(default = "default_d_tol")]
    pub d_tol: f64,
    #[serde(default = "default_ode_tol")]
    pub ode_tol: f64,
    #[serde(default = "default_r_max_factor")]
    pub r_max_factor: f64,
    #[serde(default = "default_mesh_n")]
    pub mesh_n: usize,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub heights: Vec<f64>,
    #[serde(default)]
    pub spectrum: bool,
    #[serde(default)]
    pub parameter: Option<String>,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Map::new())).expect("defaults deserialize")
    }
}

fn family_knobs(family: &str) -> &'static [&'static str] {
    match family {
        "power" => &["lambda", "p"],
        "linear" => &["lambda"],
        "cubic_quintic_focusing" | "nagumo" | "quadratic_cubic" => &["c"],
        _ => &[],
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{what} out of range")))
            }
        };
        check((2..=20).contains(&self.dim), "N (2..=20)")?;
        check(self.d_tol > 0.0 && self.d_tol <= 1e-2, "d_tol (0, 1e-2]")?;
        check(
            (1e-14..=1e-4).contains(&self.ode_tol),
            "ode_tol [1e-14, 1e-4]",
        )?;
        check(
            (0.5..=10.0).contains(&self.r_max_factor),
            "r_max_factor [0.5, 10]",
        )?;
        check(
            (100..=200_000).contains(&self.mesh_n),
            "mesh_n [100, 200000]",
        )?;
        if let Some(g) = &self.grid {
            check(g.lo > 0.0 && g.hi > g.lo && g.per_decade >= 10, "grid")?;
        }
        check(
            self.heights.iter().all(|d| d.is_finite() && *d > 0.0),
            "heights (positive)",
        )?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_default()
    }

    /// Sets a numeric model knob, as used by sweeps.
    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        let params_of = |v: &Option<Value>, what: &str| -> Result<Map<String, Value>, CliError> {
            v.as_ref()
                .and_then(|m| m.get("params"))
                .map(|p| p.as_object().cloned().unwrap_or_default())
                .or_else(|| v.as_ref().map(|_| Map::new()))
                .ok_or_else(|| {
                    CliError::Usage(format!("sweep needs a {what} family with parameters"))
                })
        };
        match name {
            "N" => {
                if value.fract() != 0.0 {
                    return Err(CliError::Usage("N must be an integer".into()));
                }
                self.dim = value as usize;
            }
            "kappa" => {
                let mut p = params_of(&self.diffusion, "diffusion")?;
                if !p.contains_key("kappa") {
                    return Err(CliError::Usage("diffusion has no parameter 'kappa'".into()));
                }
                p.insert("kappa".into(), value.into());
                self.diffusion.as_mut().unwrap()["params"] = Value::Object(p);
            }
            "lambda" | "p" | "c" => {
                let model = self
                    .model
                    .get_or_insert_with(|| serde_json::json!({"family": "power", "params": {}}));
                let family = model.get("family").and_then(Value::as_str).unwrap_or("");
                if !family_knobs(family).contains(&name) {
                    return Err(CliError::Usage(format!(
                        "model family '{family}' has no parameter '{name}'"
                    )));
                }
                let mut p = params_of(&self.model, "model")?;
                p.insert(name.into(), value.into());
                self.model.as_mut().unwrap()["params"] = Value::Object(p);
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown sweep parameter '{other}'"
                )))
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"N": 3, "bogus": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.d_tol = 1e-10;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn ranges_validated() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.mesh_n = 10;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_parameters() {
        let mut c = RunConfig {
            model: Some(
                serde_json::json!({"family": "power", "params": {"lambda": 1.0, "p": 3.0}}),
            ),
            ..Default::default()
        };
        c.set_parameter("p", 2.5).unwrap();
        assert_eq!(c.model.as_ref().unwrap()["params"]["p"], 2.5);
        assert!(c.set_parameter("c", 1.0).is_err());
        assert!(c.set_parameter("kappa", 1.0).is_err());
        assert!(c.set_parameter("zeta", 1.0).is_err());
    }
}
