use std::fmt;

use abcd_core::testbed::{catalog, describe, TestSet};
use abcd_core::{AbcdConfig, DirectConfig, StallRule};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Plain DIRECT on the full box.
    Direct,
    /// Block coordinate DIRECT with block size `m1`, no switch, no local optimizer.
    AbcdCoordinateOnly,
    /// Coordinate phase, one local optimizer run, then random blocks.
    AbcdFull,
    /// The local optimizer from the optimistic start.
    SqpOnly,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Direct => "direct",
            Algorithm::AbcdCoordinateOnly => "abcd_coordinate_only",
            Algorithm::AbcdFull => "abcd_full",
            Algorithm::SqpOnly => "sqp_only",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// One benchmark configuration, run `repetitions` times with seeds
/// `seed, seed + 1, ...`.
///
/// The top-level budget, target, seed and `eps` fields override the
/// corresponding fields of the nested solver configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub function: String,
    pub dim: usize,
    #[serde(default = "defaults::algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    #[serde(default = "defaults::max_evals")]
    pub max_evals: u64,
    /// Wall-clock cap per repetition; `null` disables it.
    #[serde(default = "defaults::max_wall_seconds")]
    pub max_wall_seconds: Option<f64>,
    #[serde(default = "defaults::target_accuracy")]
    pub target_accuracy: f64,
    /// Stop after `min(n, 6)` consecutive subproblems (DIRECT: iterations)
    /// improving by at most `stall_eps`.
    #[serde(default = "defaults::yes")]
    pub global_stall: bool,
    #[serde(default = "defaults::stall_eps")]
    pub stall_eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub abcd: AbcdConfig,
    #[serde(default)]
    pub direct: DirectConfig,
}

mod defaults {
    use super::Algorithm;

    pub fn algorithm() -> Algorithm {
        Algorithm::AbcdFull
    }
    pub fn eps() -> f64 {
        1e-4
    }
    pub fn max_evals() -> u64 {
        200_000
    }
    pub fn max_wall_seconds() -> Option<f64> {
        Some(20.0)
    }
    pub fn target_accuracy() -> f64 {
        1e-4
    }
    pub fn yes() -> bool {
        true
    }
    pub fn stall_eps() -> f64 {
        1e-6
    }
    pub fn repetitions() -> usize {
        5
    }
}

impl RunSpec {
    pub fn new(function: impl Into<String>, dim: usize, algorithm: Algorithm) -> Self {
        Self {
            function: function.into(),
            dim,
            algorithm,
            eps: defaults::eps(),
            max_evals: defaults::max_evals(),
            max_wall_seconds: defaults::max_wall_seconds(),
            target_accuracy: defaults::target_accuracy(),
            global_stall: true,
            stall_eps: defaults::stall_eps(),
            seed: 0,
            repetitions: defaults::repetitions(),
            abcd: AbcdConfig::default(),
            direct: DirectConfig::default(),
        }
    }

    /// Checks everything that can be checked without evaluating the objective.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.max_evals == 0 {
            return bad("max_evals must be at least 1".into());
        }
        if let Some(t) = self.max_wall_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("max_wall_seconds must be positive, got {t}"));
            }
        }
        if !(self.target_accuracy >= 0.0 && self.target_accuracy.is_finite()) {
            return bad(format!("target_accuracy must be non-negative, got {}", self.target_accuracy));
        }
        if !(self.stall_eps >= 0.0 && self.stall_eps.is_finite()) {
            return bad(format!("stall_eps must be non-negative, got {}", self.stall_eps));
        }
        describe(&self.function, self.dim)?;
        match self.algorithm {
            Algorithm::Direct => self.direct_config().validate()?,
            _ => self.abcd_config(0).validate(self.dim)?,
        }
        Ok(())
    }

    /// Effective DIRECT settings.
    pub fn direct_config(&self) -> DirectConfig {
        DirectConfig {
            eps: self.eps,
            max_evals: Some(self.max_evals),
            max_wall_seconds: self.max_wall_seconds,
            target_accuracy: Some(self.target_accuracy),
            stall: self.global_stall.then_some(StallRule {
                eps: self.stall_eps,
                patience: self.dim.min(6),
            }),
            ..self.direct.clone()
        }
    }

    /// Effective block coordinate settings for repetition `rep`.
    pub fn abcd_config(&self, rep: usize) -> AbcdConfig {
        let mut cfg = AbcdConfig {
            eps: self.eps,
            max_evals: Some(self.max_evals),
            max_wall_seconds: self.max_wall_seconds,
            target_accuracy: Some(self.target_accuracy),
            global_stall_eps: self.global_stall.then_some(self.stall_eps),
            seed: self.seed.wrapping_add(rep as u64),
            ..self.abcd.clone()
        };
        match self.algorithm {
            Algorithm::AbcdCoordinateOnly => {
                cfg.switch_enabled = false;
                cfg.local_enabled = false;
                cfg.sqp_first = false;
            }
            Algorithm::AbcdFull => {
                cfg.switch_enabled = true;
                cfg.local_enabled = true;
            }
            Algorithm::Direct | Algorithm::SqpOnly => {}
        }
        cfg
    }
}

/// A suite configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub specs: Vec<RunSpec>,
}

/// Every Hedar function at each of its suite dimensions, once per algorithm.
pub fn hedar_suite(algorithms: &[Algorithm]) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for f in catalog().into_iter().filter(|f| f.set == TestSet::Hedar) {
        for &n in &f.suite_dims {
            for &a in algorithms {
                specs.push(RunSpec::new(f.name, n, a));
            }
        }
    }
    specs
}

/// The nine Jones functions with a `10^5` evaluation budget and no stall rule.
pub fn jones_suite(algorithms: &[Algorithm]) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for f in catalog().into_iter().filter(|f| f.set == TestSet::Jones) {
        for &a in algorithms {
            let mut s = RunSpec::new(f.name, f.dim, a);
            s.max_evals = 100_000;
            s.max_wall_seconds = Some(10.0);
            s.global_stall = false;
            specs.push(s);
        }
    }
    specs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let s: RunSpec = serde_json::from_str(r#"{"function": "Sphere", "dim": 6}"#).unwrap();
        assert_eq!(s, RunSpec::new("Sphere", 6, Algorithm::AbcdFull));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunSpec>(r#"{"function": "Sphere", "dim": 6, "budget": 3}"#).is_err());
        assert!(serde_json::from_str::<RunSpec>(r#"{"function": "Sphere", "dim": 6, "abcd": {"m3": 1}}"#).is_err());
    }

    #[test]
    fn nested_settings_parse() {
        let s: RunSpec = serde_json::from_str(
            r#"{"function": "Levy", "dim": 12, "algorithm": "abcd_coordinate_only",
                "abcd": {"m1": 2, "phase1_mode": "random"}, "max_wall_seconds": null}"#,
        )
        .unwrap();
        assert_eq!(s.abcd.m1, 2);
        assert_eq!(s.max_wall_seconds, None);
        let cfg = s.abcd_config(3);
        assert_eq!(cfg.seed, 3);
        assert!(!cfg.switch_enabled && !cfg.local_enabled);
    }

    #[test]
    fn validation_catches_bad_specs() {
        let mut s = RunSpec::new("Sphere", 6, Algorithm::AbcdFull);
        s.validate().unwrap();
        s.repetitions = 0;
        assert!(s.validate().is_err());
        let s = RunSpec::new("Nope", 6, Algorithm::Direct);
        assert!(s.validate().is_err());
        let mut s = RunSpec::new("Sphere", 6, Algorithm::AbcdFull);
        s.abcd.m2 = 7;
        assert!(s.validate().is_err());
    }

    #[test]
    fn suites_cover_their_sets() {
        let h = hedar_suite(&[Algorithm::Direct]);
        assert_eq!(h.len(), 38);
        let j = jones_suite(&[Algorithm::Direct, Algorithm::AbcdCoordinateOnly]);
        assert_eq!(j.len(), 18);
        assert!(j.iter().all(|s| !s.global_stall && s.max_evals == 100_000));
    }
}
