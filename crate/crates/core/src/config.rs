//! TOML run configuration.
//!
//! Every section has defaults, so a config file only needs the keys it
//! changes. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::TubeParams;
use crate::features::BinningSpec;
use crate::kernel::KernelPair;
use crate::physics::{FidelitySwitches, FluidConstants};
use crate::trainer::TrainConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphConfig {
    /// Smoothing radius (m).
    pub h: f64,
    pub kernels: KernelPair,
}

impl Default for SphConfig {
    fn default() -> Self {
        Self {
            h: 0.05,
            kernels: KernelPair::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    pub path: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

/// Vessel geometry: exactly one of `tube` or `mesh`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VesselConfig {
    /// Wall sampling spacing (m); must not exceed h.
    pub spacing: f64,
    pub tube: Option<TubeParams>,
    pub mesh: Option<MeshSource>,
}

impl Default for VesselConfig {
    fn default() -> Self {
        Self {
            spacing: 0.025,
            tube: Some(TubeParams {
                axis: vec![[-0.4, 0.0, 0.0], [0.4, 0.0, 0.0]],
                radius: 0.32,
                cap_start: true,
                cap_end: true,
            }),
            mesh: None,
        }
    }
}

/// Initial blood column: a vertical cylinder filled on a cubic lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColumnConfig {
    /// Center of the column's base disk.
    pub base_center: [f64; 3],
    pub radius: f64,
    pub height: f64,
    /// Lattice spacing; `None` means h / 2.
    pub spacing: Option<f64>,
    /// Fill layers bottom-up and stop after this many particles.
    pub count: Option<usize>,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            base_center: [-0.1, 0.0, -0.23],
            radius: 0.2,
            height: 0.46,
            spacing: None,
            count: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub bins: usize,
    /// Upper end of the speed binning range; `None` means sound speed / 10.
    pub speed_cap: Option<f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            bins: 6,
            speed_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            hidden_width: 5,
        }
    }
}

impl NetworkConfig {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![crate::features::FEATURE_LEN];
        sizes.extend(std::iter::repeat(self.hidden_width).take(self.hidden_layers));
        sizes.push(3);
        sizes
    }
}

/// Dataset generation schedule: one captured sequence per column height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub column_heights: Vec<f64>,
    pub frames: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        // 0.5x to 1.44x the default vessel radius; the tallest column that
        // fits the default tube
        Self {
            column_heights: vec![0.16, 0.235, 0.31, 0.385, 0.46],
            frames: 800,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub threads: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { threads: 1, seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub sph: SphConfig,
    pub fluid: FluidConstants,
    pub fidelity: FidelitySwitches,
    pub vessel: VesselConfig,
    pub column: ColumnConfig,
    pub features: FeatureConfig,
    pub network: NetworkConfig,
    pub training: TrainConfig,
    pub dataset: DatasetConfig,
    pub run: RunConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.sph.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("sph.h must be positive, got {h}")));
        }
        self.fluid.validate()?;
        self.fidelity.validate()?;
        let s = self.vessel.spacing;
        if !(s > 0.0 && s <= h) {
            return Err(Error::Config(format!("vessel.spacing must lie in (0, h], got {s}")));
        }
        match (&self.vessel.tube, &self.vessel.mesh) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(Error::Config(
                    "vessel needs exactly one of [vessel.tube] or [vessel.mesh]".into(),
                ))
            }
        }
        let c = &self.column;
        if !(c.radius >= 0.0 && c.height >= 0.0 && c.base_center.iter().all(|v| v.is_finite())) {
            return Err(Error::Config("column radius and height must be >= 0".into()));
        }
        if let Some(d) = c.spacing {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("column.spacing must be positive, got {d}")));
            }
        }
        self.binning()?;
        if self.network.hidden_layers == 0 || self.network.hidden_width == 0 {
            return Err(Error::Config(
                "network needs at least one hidden layer of width >= 1".into(),
            ));
        }
        self.training.validate()?;
        if self.dataset.frames < 2 {
            return Err(Error::Config("dataset.frames must be >= 2".into()));
        }
        if self.run.threads == 0 {
            return Err(Error::Config("run.threads must be >= 1".into()));
        }
        Ok(())
    }

    pub fn lattice_spacing(&self) -> f64 {
        self.column.spacing.unwrap_or(0.5 * self.sph.h)
    }

    pub fn binning(&self) -> Result<BinningSpec> {
        let cap = self.features.speed_cap.unwrap_or(self.fluid.sound_speed / 10.0);
        BinningSpec::new(self.features.bins, self.sph.h, cap).map_err(|e| Error::Config(e.to_string()))
    }
}
