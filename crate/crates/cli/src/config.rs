//! Experiment configuration: one TOML file per run.

use decaylab::evolution::{Propagator, SourceData};
use decaylab::potential::ModelSpec;
use decaylab::timedomain::Boundary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    PotentialDump,
    ScatterSweep,
    Resonance,
    Evolve,
    Fdtd,
    WkbSweep,
    PriceLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Either explicit values or `count` points from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default = "linear")]
    pub spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => {
                if r.count == 1 {
                    return vec![r.start];
                }
                let step = |k: usize| k as f64 / (r.count - 1) as f64;
                match r.spacing {
                    Spacing::Linear => (0..r.count).map(|k| r.start + (r.stop - r.start) * step(k)).collect(),
                    Spacing::Log => {
                        let (a, b) = (r.start.ln(), r.stop.ln());
                        (0..r.count).map(|k| (a + (b - a) * step(k)).exp()).collect()
                    }
                }
            }
        }
    }

    fn check(&self, field: &str, positive: bool, errors: &mut Vec<String>) {
        if let Grid::Range(r) = self {
            if r.spacing == Spacing::Log && !(r.start > 0.0 && r.stop > 0.0) {
                errors.push(format!("{field}: log spacing needs positive endpoints"));
                return;
            }
        }
        let p = self.points();
        if p.is_empty() {
            errors.push(format!("{field}: grid is empty"));
        } else if p.iter().any(|v| !v.is_finite()) {
            errors.push(format!("{field}: grid has non-finite values"));
        } else if p.windows(2).any(|w| !(w[1] > w[0])) {
            errors.push(format!("{field}: grid must be strictly increasing"));
        } else if positive && p[0] <= 0.0 {
            errors.push(format!("{field}: values must be positive"));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "d_rtol")]
    pub ode_rtol: f64,
    #[serde(default = "d_budget")]
    pub evolve_budget: f64,
    #[serde(default = "d_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "d_resonance")]
    pub resonance_threshold: f64,
}

fn d_rtol() -> f64 {
    1e-12
}
fn d_budget() -> f64 {
    1e-5
}
fn d_bandwidth() -> f64 {
    1e-8
}
fn d_resonance() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode_rtol: d_rtol(), evolve_budget: d_budget(), bandwidth: d_bandwidth(), resonance_threshold: d_resonance() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSettings {
    pub h: f64,
    #[serde(default = "d_courant")]
    pub courant: f64,
    #[serde(default = "d_boundary")]
    pub boundary: Boundary,
    pub t_final: f64,
    /// Keep every n-th recorded step in the CSV.
    #[serde(default = "d_stride")]
    pub output_stride: usize,
}

fn d_courant() -> f64 {
    0.9
}
fn d_boundary() -> Boundary {
    Boundary::CausalTruncation
}
fn d_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    pub window: [f64; 2],
    #[serde(default = "d_min_t_lo")]
    pub min_t_lo: f64,
}

fn d_min_t_lo() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub pipeline: Pipeline,
    pub model: ModelSpec,
    #[serde(default = "d_propagator")]
    pub propagator: Propagator,
    #[serde(default = "d_data")]
    pub data: SourceData,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSettings>,
    #[serde(default = "d_output")]
    pub output_dir: String,
    /// Unused by the deterministic pipelines; recorded for provenance.
    #[serde(default)]
    pub seed: u64,
}

fn d_propagator() -> Propagator {
    Propagator::Sinc
}
fn d_data() -> SourceData {
    SourceData::gaussian(0.0, 1.0, 1.0)
}
fn d_output() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        let cfg: Self = toml::from_str(text).map_err(|e| vec![e.to_string()])?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// sha256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Every offending field, not just the first.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.name.trim().is_empty() {
            errors.push("name: must be non-empty".to_string());
        }
        let t = &self.tolerances;
        for (field, v) in [
            ("tolerances.ode_rtol", t.ode_rtol),
            ("tolerances.evolve_budget", t.evolve_budget),
            ("tolerances.bandwidth", t.bandwidth),
            ("tolerances.resonance_threshold", t.resonance_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("{field}: must be positive"));
            }
        }
        if let Err(e) = self.data.validate() {
            errors.push(format!("data: {e}"));
        }
        let g = &self.grids;
        let need = |grid: &Option<Grid>, field: &str, positive: bool, errors: &mut Vec<String>| match grid {
            Some(grid) => grid.check(field, positive, errors),
            None => errors.push(format!("{field}: required by the {:?} pipeline", self.pipeline)),
        };
        match self.pipeline {
            Pipeline::PotentialDump => need(&g.x, "grids.x", false, &mut errors),
            Pipeline::ScatterSweep => need(&g.lambda, "grids.lambda", true, &mut errors),
            Pipeline::Resonance => {
                if let Some(l) = &g.lambda {
                    l.check("grids.lambda", true, &mut errors);
                }
            }
            Pipeline::Evolve => {
                need(&g.t, "grids.t", false, &mut errors);
                need(&g.x, "grids.x", false, &mut errors);
                if g.t.as_ref().and_then(|t| t.points().first().copied()).is_some_and(|t| t < 0.0) {
                    errors.push("grids.t: times must be non-negative".to_string());
                }
            }
            Pipeline::Fdtd | Pipeline::PriceLaw => {
                need(&g.x, "grids.x", false, &mut errors);
                match &self.fd {
                    None => errors.push(format!("fd: required by the {:?} pipeline", self.pipeline)),
                    Some(fd) => {
                        if !(fd.h > 0.0 && fd.h.is_finite()) {
                            errors.push("fd.h: must be positive".to_string());
                        }
                        if !(fd.courant > 0.0 && fd.courant <= 1.0) {
                            errors.push("fd.courant: must lie in (0, 1]".to_string());
                        }
                        if !(fd.t_final > 0.0 && fd.t_final.is_finite()) {
                            errors.push("fd.t_final: must be positive".to_string());
                        }
                        if fd.output_stride == 0 {
                            errors.push("fd.output_stride: must be at least 1".to_string());
                        }
                    }
                }
                if self.pipeline == Pipeline::PriceLaw {
                    match &self.fit {
                        None => errors.push("fit: required by the price-law pipeline".to_string()),
                        Some(f) => {
                            if !(f.window[0] < f.window[1] && f.window[0] >= 0.0) {
                                errors.push("fit.window: must be [lo, hi] with 0 <= lo < hi".to_string());
                            }
                            if !(f.min_t_lo >= 0.0) {
                                errors.push("fit.min_t_lo: must be non-negative".to_string());
                            }
                            if let Some(fd) = &self.fd {
                                if f.window[1] > fd.t_final {
                                    errors.push("fit.window: ends after fd.t_final".to_string());
                                }
                            }
                        }
                    }
                }
            }
            Pipeline::WkbSweep => {
                need(&g.energy, "grids.energy", true, &mut errors);
                need(&g.hbar, "grids.hbar", true, &mut errors);
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRICE: &str = r#"
name = "price-l0"
pipeline = "price-law"

[model]
family = "regge_wheeler"
mass = 1.0
ell = 0
sigma = 1

[grids]
x = [10.0]

[fd]
h = 0.1
t_final = 400.0

[fit]
window = [100.0, 400.0]
"#;

    #[test]
    fn round_trip_is_identical() {
        let cfg = ExperimentConfig::parse(PRICE).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = PRICE.replace("[fd]", "[fd]\nsmoothing = 2");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err[0].contains("smoothing"), "{err:?}");
    }

    #[test]
    fn every_offending_field_is_listed() {
        let text = PRICE.replace("x = [10.0]", "x = []").replace("h = 0.1", "h = -0.1");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.iter().any(|e| e.starts_with("grids.x")));
        assert!(err.iter().any(|e| e.starts_with("fd.h")));
    }

    #[test]
    fn grids() {
        let g = Grid::Range(GridRange { start: 1.0, stop: 100.0, count: 3, spacing: Spacing::Log });
        let p = g.points();
        assert!((p[1] - 10.0).abs() < 1e-12);
        let mut errors = Vec::new();
        Grid::Values(vec![1.0, 1.0]).check("g", false, &mut errors);
        assert_eq!(errors.len(), 1);
    }
}
