//! Run configuration: one JSON document holding everything a batch run needs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{LinkageDynamics, MassModel, SimOptions};
use crate::elastic::ElasticModel;
use crate::error::{Error, Result};
use crate::geometry::LinkageGeometry;

/// Drive-law selection. Rest length and cross-section come from the geometry block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElasticConfig {
    Linear {
        /// [N/m]
        k: f64,
    },
    Gaussian {
        #[serde(rename = "C0")]
        c0: f64,
        #[serde(rename = "T")]
        temperature: f64,
    },
    MooneyRivlin {
        #[serde(rename = "C1")]
        c1: f64,
        #[serde(rename = "C2")]
        c2: f64,
    },
}

impl ElasticConfig {
    pub fn to_model(&self, geometry: &LinkageGeometry) -> ElasticModel {
        let (rest_length, area) = (geometry.l0, geometry.area);
        match *self {
            ElasticConfig::Linear { k } => ElasticModel::Linear {
                stiffness: k,
                rest_length,
            },
            ElasticConfig::Gaussian { c0, temperature } => ElasticModel::Gaussian {
                c0,
                temperature,
                rest_length,
                area,
            },
            ElasticConfig::MooneyRivlin { c1, c2 } => ElasticModel::MooneyRivlin {
                c1,
                c2,
                rest_length,
                area,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: LinkageGeometry,
    pub masses: MassModel,
    pub elastic: ElasticConfig,
    #[serde(default)]
    pub options: SimOptions,
    /// Default output directory; the command line may override it.
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::demonstrator()
    }
}

impl RunConfig {
    /// Laboratory demonstrator with its identified joint friction.
    pub fn demonstrator() -> Self {
        Self {
            geometry: LinkageGeometry::demonstrator(),
            masses: MassModel::demonstrator(),
            elastic: ElasticConfig::MooneyRivlin {
                c1: 68.88e3,
                c2: 73.61e3,
            },
            options: SimOptions::default(),
            output_dir: default_output_dir(),
        }
    }

    pub fn model(&self) -> ElasticModel {
        self.elastic.to_model(&self.geometry)
    }

    pub fn dynamics(&self) -> LinkageDynamics {
        LinkageDynamics::new(self.geometry, self.model(), self.masses).with_convention(self.options.derivative)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.model().validate()?;
        self.masses.validate()?;
        self.options.validate()?;
        self.geometry.kinematics(self.options.theta0)?;
        Ok(())
    }

    /// Parses a JSON document, applies `key.path=value` overrides, then validates.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text, overrides)
    }

    /// Demonstrator defaults with overrides applied.
    pub fn demonstrator_with(overrides: &[String]) -> Result<Self> {
        let text = serde_json::to_string(&Self::demonstrator()).expect("config serialises");
        Self::from_json_str(&text, overrides)
    }
}

/// Sets an existing key addressed by a dotted path. The value is read as JSON when it parses,
/// otherwise as a string, so `elastic.model=gaussian` and `masses.g=1.62` both work.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Input(format!("override `{assignment}` is not of the form key=value")))?;
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (depth, key) in keys.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Input(format!("override `{path}`: `{}` is not an object", keys[..depth].join("."))))?;
        if depth + 1 == keys.len() {
            obj.insert((*key).to_string(), new);
            return Ok(());
        }
        node = obj
            .get_mut(*key)
            .ok_or_else(|| Error::Input(format!("override `{path}`: no key `{key}`")))?;
    }
    Err(Error::Input(format!("override `{assignment}` has an empty key")))
}
