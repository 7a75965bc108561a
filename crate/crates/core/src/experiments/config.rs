use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::analog::AnalogParams;
use crate::bank::{Geometry, PolarityLayout};
use crate::bitserial::{Kernel, PerfModel, PerfScenario, SuccessTable};
use crate::engine::{Engine, SenseProfile, TimingParams};
use crate::primitives::InputPattern;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub geometry: Geometry,
    pub timing: TimingParams,
    pub analog: AnalogParams,
    pub engine: EngineConfig,
    pub verify: VerifyConfig,
    pub characterize: CharacterizeConfig,
    pub spatial: SpatialConfig,
    pub sensitivity: SensitivityConfig,
    pub destruct: DestructConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            geometry: Geometry {
                n_bitlines: 1024,
                ..Geometry::default()
            },
            timing: TimingParams::default(),
            analog: AnalogParams::default(),
            engine: EngineConfig::default(),
            verify: VerifyConfig::default(),
            characterize: CharacterizeConfig::default(),
            spatial: SpatialConfig::default(),
            sensitivity: SensitivityConfig::default(),
            destruct: DestructConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Sense a lone partially charged row against Vdd/2 with a polarity
    /// bias instead of rejecting it.
    pub biased_senseamps: bool,
    pub first_row_weight: f64,
    pub polarity: PolarityLayout,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            biased_senseamps: false,
            first_row_weight: 1.0,
            polarity: PolarityLayout::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyRegime {
    /// APA in the charge-sharing window, then WRITE.
    #[default]
    ChargeShare,
    /// Fully restored first ACT, quick second ACT, then WRITE.
    Mrc,
    /// Both ACTs honor tRAS and tRP.
    Nominal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub subarrays: Vec<u16>,
    /// Random anchor pairs per subarray and group size.
    pub pairs_per_n: usize,
    pub ns: Vec<usize>,
    pub regime: VerifyRegime,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            subarrays: vec![0],
            pairs_per_n: 25,
            ns: vec![2, 4, 8, 16, 32],
            regime: VerifyRegime::ChargeShare,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharacterizeConfig {
    pub subarrays: Vec<u16>,
    pub nrgs_per_n: usize,
    pub trials: u32,
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    pub patterns: Vec<InputPattern>,
    pub variation_sigma: f64,
}

impl Default for CharacterizeConfig {
    fn default() -> Self {
        Self {
            subarrays: vec![0],
            nrgs_per_n: 25,
            trials: 1000,
            ms: vec![3, 5, 7, 9],
            ns: vec![4, 8, 16, 32],
            patterns: vec![InputPattern::Random, InputPattern::OnesZeros],
            variation_sigma: 0.2,
        }
    }
}

/// Shape of cell variation across subarrays.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaProfile {
    #[default]
    Flat,
    /// Variation lowest a quarter of the way in from either edge, so success
    /// rates peak there and dip at the edges and the middle.
    MShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialConfig {
    pub n_subarrays: u16,
    pub nrgs_per_n: usize,
    pub trials: u32,
    pub m: usize,
    pub ns: Vec<usize>,
    pub variation_sigma: f64,
    pub profile: SigmaProfile,
    /// Largest relative increase of sigma over the base.
    pub amplitude: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            n_subarrays: 16,
            nrgs_per_n: 10,
            trials: 200,
            m: 3,
            ns: vec![4, 8],
            variation_sigma: 0.2,
            profile: SigmaProfile::MShape,
            amplitude: 1.0,
        }
    }
}

impl SpatialConfig {
    pub fn sigma(&self, subarray: u16) -> f64 {
        match self.profile {
            SigmaProfile::Flat => self.variation_sigma,
            SigmaProfile::MShape => {
                let x = (subarray as f64 + 0.5) / self.n_subarrays as f64;
                let m = (2.0 * std::f64::consts::PI * x).sin().abs();
                self.variation_sigma * (1.0 + self.amplitude * (1.0 - m))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub kernels: Vec<Kernel>,
    pub arities: Vec<usize>,
    pub ns: Vec<usize>,
    pub scenarios: Vec<PerfScenario>,
    pub success: SuccessTable,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            kernels: Kernel::ALL.to_vec(),
            arities: vec![3, 5, 7, 9],
            ns: vec![4, 8, 16, 32],
            scenarios: PerfScenario::ALL.to_vec(),
            success: SuccessTable::measured(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DestructConfig {
    pub max_n: Vec<usize>,
}

impl Default for DestructConfig {
    fn default() -> Self {
        Self {
            max_n: vec![2, 4, 8, 16, 32],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Full-scale sweeps: three subarrays and 10^4 trials.
    pub fn full(mut self) -> Self {
        self.characterize.subarrays = vec![0, 1, 2];
        self.characterize.trials = 10_000;
        self.characterize.nrgs_per_n = 100;
        self.verify.subarrays = vec![0, 1, 2];
        self.verify.pairs_per_n = 100;
        self.spatial.trials = 10_000;
        self.spatial.nrgs_per_n = 100;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        self.geometry
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.timing
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.analog
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        let subarray_size = crate::decoder::RowDecoder::default()
            .layout()
            .subarray_size();
        if self.geometry.subarray_size != subarray_size {
            return bad(format!("geometry.subarray_size must be {subarray_size}"));
        }
        let n_sub = self.geometry.n_subarrays;
        let subs = self
            .characterize
            .subarrays
            .iter()
            .chain(&self.verify.subarrays);
        if let Some(s) = subs.into_iter().find(|&&s| s as usize >= n_sub) {
            return bad(format!("subarray {s} out of range (bank has {n_sub})"));
        }
        if self.spatial.n_subarrays == 0 {
            return bad("spatial.n_subarrays must be positive".into());
        }
        for sigma in [
            self.characterize.variation_sigma,
            self.spatial.variation_sigma,
        ] {
            if !(0.0..1.0).contains(&sigma) {
                return bad("variation_sigma must be in [0, 1)".into());
            }
        }
        let max_sigma = (0..self.spatial.n_subarrays)
            .map(|s| self.spatial.sigma(s))
            .fold(0.0, f64::max);
        if max_sigma >= 1.0 {
            return bad("spatial profile reaches a sigma of 1 or more".into());
        }
        for &n in self
            .characterize
            .ns
            .iter()
            .chain(&self.spatial.ns)
            .chain(&self.verify.ns)
        {
            if !n.is_power_of_two() || !(2..=32).contains(&n) {
                return bad(format!("row count {n} is not a power of two in 2..=32"));
            }
        }
        for &m in self
            .characterize
            .ms
            .iter()
            .chain(&self.sensitivity.arities)
            .chain([&self.spatial.m])
        {
            if m < 3 || m % 2 == 0 || m > 31 {
                return bad(format!("arity {m} must be odd and in 3..=31"));
            }
        }
        for &n in &self.destruct.max_n {
            if !n.is_power_of_two() || !(2..=32).contains(&n) {
                return bad(format!(
                    "destruct max_n {n} is not a power of two in 2..=32"
                ));
            }
        }
        if !(self.engine.first_row_weight > 0.0) {
            return bad("engine.first_row_weight must be positive".into());
        }
        Ok(())
    }

    /// Engine at `sigma` cell variation; the rest of the analog parameters
    /// come from the config.
    pub fn engine(&self, sigma: f64) -> Engine {
        let profile = if self.engine.biased_senseamps {
            SenseProfile::Biased
        } else {
            SenseProfile::Strict
        };
        let mut e = Engine::nominal(self.geometry.n_bitlines)
            .with_profile(profile)
            .with_variation(self.analog.clone().with_variation(sigma), self.seed);
        e.timing = self.timing.clone();
        e.first_row_weight = self.engine.first_row_weight;
        e
    }

    pub fn perf_model(&self) -> PerfModel {
        PerfModel {
            success: self.sensitivity.success.clone(),
            ..PerfModel::from_timing(&self.timing)
        }
    }
}
