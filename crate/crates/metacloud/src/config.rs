//! Experiment configuration: a flat TOML file.
//!
//! Every key has a default, so an empty file is a valid config for the
//! standard set-up. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Homothetic heavy density, meta cloud onto `E(lambda, theta)`.
    Standard,
    /// Axis blocks deleted, meta cloud onto the diagonal cross.
    Thc2Cross,
    /// Mass moved onto the diagonal cubes, meta cloud onto the cross.
    Thc1Diagonal,
    /// Light mixture `w g(n_A) + (1 - w) meta`, onto `A` union the limit.
    Thmix,
    /// Disk, square and diamond light densities with weights 1/3.
    Mixture3,
    /// Block partition plot of the deleted model.
    Fig1Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeavyKind {
    Pareto,
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightKind {
    /// `psi(s) = s^theta`.
    Power,
    /// `psi(s) = (1 + s)^theta - 1`.
    ShiftedPower,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Cube,
    Ball,
    Diamond,
    LimitSet,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixGenerator {
    /// `e^{-psi_1}` with the lighter exponent `psi_1 = psi + b`.
    Lighter,
    /// `e^{-psi}` with the base exponent.
    Base,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// First seed; runs use `seed, seed + 1, ..`.
    pub seed: u64,
    pub seeds: u32,
    pub n: usize,
    /// Tail index of the heavy marginal (degrees of freedom for Student t).
    pub lambda: f64,
    pub heavy: HeavyKind,
    pub light: LightKind,
    pub theta: f64,
    /// Level set `D` of the heavy homothetic density.
    pub shape: ShapeKind,
    /// Exponent for `shape = "lp"`. `limit_set` uses `lambda` and `theta`.
    pub shape_p: f64,
    /// Rings of the block partitions.
    pub rings: u32,
    pub prs4_eps: f64,
    pub mix_shape: ShapeKind,
    /// Mass `kappa` of the added light component before compensation.
    pub mix_mass: f64,
    pub mix_generator: MixGenerator,
    /// Outside fractions and coverage are reported on this grid.
    pub eps: Vec<f64>,
    pub directions: usize,
    /// Gate: at `gate_eps` the outside fraction is at most `max_outside`
    /// and every grid point holds at least `min_coverage` points.
    pub gate_eps: f64,
    pub max_outside: f64,
    pub min_coverage: u64,
    /// Gauge radii of the intensity bins (last bin open).
    pub intensity_radii: Vec<f64>,
    pub intensity_sectors: usize,
    /// Gate on the intensity chi-square p-value.
    pub min_p_value: f64,
    /// High-risk threshold as an upper marginal tail probability.
    pub high_risk_tail: f64,
    pub high_risk_window: f64,
    pub svg: bool,
    pub dump_cloud: bool,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Standard,
            seed: 1,
            seeds: 1,
            n: 1_000_000,
            lambda: 1.0,
            heavy: HeavyKind::Pareto,
            light: LightKind::Power,
            theta: 1.0,
            shape: ShapeKind::LimitSet,
            shape_p: 1.0,
            rings: 400,
            prs4_eps: 0.5,
            mix_shape: ShapeKind::Cube,
            mix_mass: 0.1,
            mix_generator: MixGenerator::Lighter,
            eps: vec![0.05, 0.1, 0.15, 0.2, 0.3],
            directions: 64,
            gate_eps: 0.15,
            max_outside: 1e-3,
            min_coverage: 1,
            intensity_radii: vec![1.0, 1.5, 2.0, 3.0, 5.0, 10.0],
            intensity_sectors: 8,
            min_p_value: 1e-3,
            high_risk_tail: 1e-4,
            high_risk_window: 0.1,
            svg: true,
            dump_cloud: false,
            output_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config {
            path: path.into(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| Error::Config {
            path: path.into(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), String> {
        let positive = [
            ("lambda", self.lambda),
            ("theta", self.theta),
            ("shape_p", self.shape_p),
            ("prs4_eps", self.prs4_eps),
            ("mix_mass", self.mix_mass),
            ("high_risk_tail", self.high_risk_tail),
            ("high_risk_window", self.high_risk_window),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("key `{key}`: must be positive, got {v}"));
            }
        }
        if self.n < 2 {
            return Err(format!("key `n`: need at least 2 points, got {}", self.n));
        }
        if self.seeds == 0 {
            return Err("key `seeds`: must be at least 1".into());
        }
        if self.eps.is_empty() || !self.eps.windows(2).all(|w| w[1] > w[0]) || self.eps[0] < 0.0 {
            return Err("key `eps`: must be non-negative and increasing".into());
        }
        if !self.eps.iter().any(|&e| (e - self.gate_eps).abs() <= 1e-12) {
            return Err(format!("key `gate_eps`: {} is not in `eps`", self.gate_eps));
        }
        let r = &self.intensity_radii;
        if r.is_empty() || r[0] <= 0.0 || !r.windows(2).all(|w| w[1] > w[0]) {
            return Err("key `intensity_radii`: must be positive and increasing".into());
        }
        if self.directions == 0 || self.intensity_sectors == 0 || self.rings < 8 {
            return Err("keys `directions`, `intensity_sectors` must be positive and `rings` at least 8".into());
        }
        if !(self.high_risk_tail < 0.5) {
            return Err("key `high_risk_tail`: must be below 1/2".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::parse(&c.to_toml(), Path::new("x")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let e = ExperimentConfig::parse("n = 10\nbogus = 1\n", Path::new("x")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn bad_value_names_the_key() {
        let e = ExperimentConfig::parse("mix_mass = -1.0\n", Path::new("x")).unwrap_err();
        assert!(e.to_string().contains("mix_mass"));
    }
}
