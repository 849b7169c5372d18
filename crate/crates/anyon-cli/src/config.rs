//! The run configuration: one JSON document, every field optional.
//!
//! Defaults reproduce the doublon-topology setup: N=45, J=1, U=1.5, P=−0.75,
//! θ=0, no corner shift. Unknown keys are rejected at every level.

use crate::error::CliError;
use anyon::acsim::{frequency_grid, PeakOptions};
use anyon::circuit::{CircuitConfig, SynthesisMode};
use anyon::model::{validate_params, ModelParams, Site};
use anyon::spectra::{linspace, Thresholds};
use anyon::topology::{ZakOptions, ZakSetup};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    /// θ grid for `ipr-map`; required there, ignored elsewhere.
    pub sweep: Option<SweepSpec>,
    /// Circuit settings; required by `circuit`.
    pub circuit: Option<CircuitSpec>,
    pub outputs: Outputs,
    pub thresholds: ThresholdSpec,
    pub spectrum: SpectrumSpec,
    pub zak: ZakSpec,
    pub transition: TransitionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { start: 0.0, stop: PI, count: 91 }
    }
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencyGridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for FrequencyGridSpec {
    fn default() -> Self {
        Self { start: 8e3, stop: 16e3, step: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSpec {
    pub mode: SynthesisMode,
    /// Hz; physical mode only. Absent: centre of the doublon gap.
    pub f_ref: Option<f64>,
    pub c_j: f64,
    pub l: f64,
    /// Inductor quality factor; absent means lossless.
    pub q: Option<f64>,
    pub paper_replica: bool,
    pub f_grid: FrequencyGridSpec,
    /// Nodes whose spectra are written, as [m, n]. Empty: the two corners.
    pub probe_nodes: Vec<[usize; 2]>,
}

impl Default for CircuitSpec {
    fn default() -> Self {
        let c = CircuitConfig::default();
        Self {
            mode: c.mode,
            f_ref: c.f_ref,
            c_j: c.c_j,
            l: c.l,
            q: c.q,
            paper_replica: c.paper_replica,
            f_grid: FrequencyGridSpec::default(),
            probe_nodes: Vec::new(),
        }
    }
}

impl CircuitSpec {
    pub fn synthesis(&self) -> CircuitConfig {
        CircuitConfig {
            mode: self.mode,
            f_ref: self.f_ref,
            c_j: self.c_j,
            l: self.l,
            q: self.q,
            paper_replica: self.paper_replica,
        }
    }

    pub fn probes(&self, size: usize) -> Vec<Site> {
        if self.probe_nodes.is_empty() {
            vec![Site::new(1, 1), Site::new(size, size)]
        } else {
            self.probe_nodes.iter().map(|&[m, n]| Site::new(m, n)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
    pub spice: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), csv: true, json: true, svg: true, spice: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSpec {
    pub classification: Thresholds,
    pub peaks: PeakOptions,
    /// Minimum |⟨ψ|P̂ψ⟩| for a Zak parity.
    pub min_overlap: f64,
    /// Doublon gaps below this (units of J) count as closed.
    pub min_gap: f64,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        let z = ZakOptions::default();
        Self {
            classification: Thresholds::default(),
            peaks: PeakOptions::default(),
            min_overlap: z.min_overlap,
            min_gap: z.min_gap,
        }
    }
}

impl ThresholdSpec {
    pub fn zak(&self) -> ZakOptions {
        ZakOptions { min_overlap: self.min_overlap, min_gap: self.min_gap, thresholds: self.classification }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    /// Indices (ascending energy) of states drawn as |β|² maps. Absent: every
    /// edge state plus the most localized state of each other class.
    pub states: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZakSpec {
    /// Absent: N=16 below the predicted transition, N=18 above.
    pub setup: Option<ZakSetup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionSpec {
    pub bracket: [f64; 2],
    pub tol: f64,
}

impl Default for TransitionSpec {
    fn default() -> Self {
        Self { bracket: [0.5, 1.6], tol: 1e-3 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        validate_params(&self.model)?;
        let bad = |msg: String| Err(CliError::Validation(msg));
        if let Some(s) = &self.sweep {
            if s.count == 0 || !(0.0..=PI).contains(&s.start) || !(0.0..=PI).contains(&s.stop) {
                return bad(format!("sweep: need count ≥ 1 and start, stop in [0, π], got {s:?}"));
            }
            if s.count > 1 && s.start >= s.stop {
                return bad(format!("sweep: start {} must be below stop {}", s.start, s.stop));
            }
        }
        if let Some(c) = &self.circuit {
            frequency_grid(c.f_grid.start, c.f_grid.stop, c.f_grid.step)?;
            for &[m, n] in &c.probe_nodes {
                if !(1..=self.model.n_sites).contains(&m) || !(1..=self.model.n_sites).contains(&n) {
                    return bad(format!("circuit.probe_nodes: ({m},{n}) outside 1..{}", self.model.n_sites));
                }
            }
        }
        let [lo, hi] = self.transition.bracket;
        if !(0.0..=PI).contains(&lo) || !(0.0..=PI).contains(&hi) || lo >= hi || self.transition.tol <= 0.0 {
            return bad(format!("transition: bad bracket {:?} or tol {}", self.transition.bracket, self.transition.tol));
        }
        Ok(())
    }
}
