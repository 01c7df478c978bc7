use serde::{Deserialize, Serialize};

use crate::graph::ModelParams;
use crate::scalar::PathExponent;

pub const DEFAULT_BURN_IN: u64 = 100_000;
pub const DEFAULT_THIN: u64 = 100;

fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}

fn default_thin() -> u64 {
    DEFAULT_THIN
}

fn default_chains() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must not be empty")]
    EmptyGrid(&'static str),
    #[error("steps ({steps}) must exceed burn-in ({burn_in}) by at least one thinning interval ({thin})")]
    TooFewSteps { steps: u64, burn_in: u64, thin: u64 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("invalid model parameters: {0}")]
    Params(String),
}

/// A sweep over `N` and `b` at fixed `γ` and `p`.
///
/// `steps` counts every Metropolis update of a chain, burn-in included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_grid: Vec<usize>,
    pub gamma: f64,
    pub b_grid: Vec<f64>,
    pub p: PathExponent<f64>,
    #[serde(default = "default_chains")]
    pub chains_per_cell: usize,
    pub steps: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    pub seed_base: u64,
}

/// One grid point; `index` orders cells for output and seeding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub params: ModelParams<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_grid.is_empty() {
            return Err(ConfigError::EmptyGrid("n_grid"));
        }
        if self.b_grid.is_empty() {
            return Err(ConfigError::EmptyGrid("b_grid"));
        }
        if self.chains_per_cell == 0 {
            return Err(ConfigError::NonPositive("chains_per_cell"));
        }
        if self.thin == 0 {
            return Err(ConfigError::NonPositive("thin"));
        }
        if self.steps < self.burn_in + self.thin {
            return Err(ConfigError::TooFewSteps { steps: self.steps, burn_in: self.burn_in, thin: self.thin });
        }
        for &n in &self.n_grid {
            for &b in &self.b_grid {
                ModelParams::new(n, self.gamma, b, self.p).map_err(|e| ConfigError::Params(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Cells in `b`-major order: all `N` for the first `b`, then the next.
    pub fn cells(&self) -> Result<Vec<SweepCell>, ConfigError> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.n_grid.len() * self.b_grid.len());
        for &b in &self.b_grid {
            for &n in &self.n_grid {
                let params = ModelParams::new(n, self.gamma, b, self.p).expect("validated");
                out.push(SweepCell { index: out.len(), params });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SweepConfig {
        SweepConfig {
            n_grid: vec![16, 32],
            gamma: 1.0,
            b_grid: vec![0.3, 0.7],
            p: PathExponent::Infinite,
            chains_per_cell: 2,
            steps: 2_000,
            burn_in: 1_000,
            thin: 10,
            seed_base: 1,
        }
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let c: SweepConfig = serde_json::from_str(
            r#"{"n_grid":[256],"gamma":1,"b_grid":[0.3],"p":"inf","steps":200000,"seed_base":5}"#,
        )
        .unwrap();
        assert_eq!(c.burn_in, DEFAULT_BURN_IN);
        assert_eq!(c.thin, DEFAULT_THIN);
        assert_eq!(c.chains_per_cell, 2);
        let back: SweepConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        assert_eq!(base().cells().unwrap().len(), 4);
        let mut c = base();
        c.b_grid.clear();
        assert_eq!(c.validate(), Err(ConfigError::EmptyGrid("b_grid")));
        let mut c = base();
        c.steps = 1_005;
        assert!(matches!(c.validate(), Err(ConfigError::TooFewSteps { .. })));
        let mut c = base();
        c.gamma = 0.0;
        assert!(matches!(c.validate(), Err(ConfigError::Params(_))));
    }
}
