//! Problem configuration: one JSON document with explicit units.

use crate::error::{Error, Result};
use crate::integrals::Nucleus;
use crate::orbitals::SpinOrbital;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub energy: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            length: "bohr".into(),
            energy: "hartree".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form integrals.
    #[default]
    Exact,
    /// Midpoint Riemann sums on grids chosen from the error bounds.
    Riemann,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Equal amplitudes on every determinant.
    #[default]
    Uniform,
    /// A single determinant, 1-based occupied labels in ascending order.
    Determinant(Vec<usize>),
    /// Explicit `[re, im]` amplitudes in basis order; renormalized.
    Amplitudes(Vec<[f64; 2]>),
}

/// Points per axis for each integral kind; each integral is then planned at
/// the `δ` its error bound assigns to that grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub s0: u64,
    pub s1: u64,
    pub s2: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub delta: Option<f64>,
    pub zeta: Option<f64>,
    pub grid_cap: Option<u64>,
    pub grids: Option<Grids>,
    pub alpha_decay: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub units: Units,
    pub nuclei: Vec<Nucleus>,
    pub orbitals: Vec<SpinOrbital>,
    /// Rescale each orbital to unit norm before use.
    #[serde(default = "yes")]
    pub normalize: bool,
    pub eta: usize,
    /// Evolution time in 1/hartree.
    pub time: f64,
    /// Total error target.
    pub epsilon: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub overrides: Overrides,
}

pub const DEFAULT_ALPHA_DECAY: f64 = 1.0;

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks counts, units and ranges; returns the orbitals ready for use.
    pub fn validate(&self) -> Result<Vec<SpinOrbital>> {
        if self.units.length != "bohr" || self.units.energy != "hartree" {
            return Err(Error::Config(format!(
                "units must be bohr/hartree, got {}/{}",
                self.units.length, self.units.energy
            )));
        }
        let n = self.orbitals.len();
        if self.eta < 1 || self.eta > n {
            return Err(Error::InvalidCounts { n, eta: self.eta });
        }
        if n > 128 {
            return Err(Error::BasisTooLarge(n));
        }
        if !(self.epsilon > crate::lcu::EPSILON_FLOOR && self.epsilon < 1.0) {
            return Err(Error::BudgetInfeasible(format!(
                "epsilon {:e} outside (1e-10, 1)",
                self.epsilon
            )));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::Config(format!("time {} must be finite and non-negative", self.time)));
        }
        for q in &self.nuclei {
            if !(q.charge >= 0.0) || q.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config(format!("bad nucleus {q:?}")));
            }
        }
        let o = &self.overrides;
        for (name, v) in [("delta", o.delta), ("zeta", o.zeta), ("alpha_decay", o.alpha_decay)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("override {name} must be positive, got {v}")));
                }
            }
        }
        if let Some(g) = o.grids {
            if o.delta.is_some() {
                return Err(Error::Config("overrides delta and grids are exclusive".into()));
            }
            if [g.s0, g.s1, g.s2].contains(&0) {
                return Err(Error::Config("grid sizes must be positive".into()));
            }
        }
        self.orbitals
            .iter()
            .map(|o| {
                let o = SpinOrbital::new(o.center, o.primitives.clone(), o.powers, o.spin)?;
                Ok(if self.normalize { o.normalized() } else { o })
            })
            .collect()
    }

    pub fn alpha_decay(&self) -> f64 {
        self.overrides.alpha_decay.unwrap_or(DEFAULT_ALPHA_DECAY)
    }

    pub fn grid_cap(&self) -> u64 {
        self.overrides.grid_cap.unwrap_or(crate::quadrature::GRID_CAP)
    }
}
