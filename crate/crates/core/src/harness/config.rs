use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::default_radii;
use crate::pqc::{AnsatzFamily, AnsatzSpec};
use crate::samples::{spectrum_entropy, SampleKind, SPECTRUM_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    VerifyBounds,
    Landscape,
    Distance,
    Improvement,
    NmeSweep,
    Expressivity,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::VerifyBounds => "verify_bounds",
            Experiment::Landscape => "landscape",
            Experiment::Distance => "distance",
            Experiment::Improvement => "improvement",
            Experiment::NmeSweep => "nme_sweep",
            Experiment::Expressivity => "expressivity",
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, Experiment::Distance | Experiment::Improvement | Experiment::NmeSweep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzEntry {
    pub family: AnsatzFamily,
    pub layers: Vec<usize>,
}

fn default_sample_kinds() -> Vec<SampleKind> {
    vec![SampleKind::Separable, SampleKind::MaxEntangled]
}

fn default_restarts() -> usize {
    3
}

fn default_max_iterations() -> usize {
    300
}

fn default_pairs() -> usize {
    5000
}

fn default_bins() -> usize {
    75
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ansatz: Vec<AnsatzEntry>,
    pub qubits: usize,
    #[serde(default = "default_sample_kinds")]
    pub sample_kinds: Vec<SampleKind>,
    /// Schmidt spectra for `nme_sweep`; generated from the qubit count when absent.
    #[serde(default)]
    pub nme_families: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_pairs")]
    pub expressivity_pairs: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl ExperimentConfig {
    /// n = 3, layers {1, 4, 8}, 24 repetitions, all four families.
    pub fn desk_scale(experiment: Experiment, master_seed: u64) -> Self {
        Self {
            experiment,
            ansatz: AnsatzFamily::ALL.iter().map(|&family| AnsatzEntry { family, layers: vec![1, 4, 8] }).collect(),
            qubits: 3,
            sample_kinds: default_sample_kinds(),
            nme_families: None,
            radii: default_radii(),
            repetitions: 24,
            master_seed,
            output: None,
            restarts: default_restarts(),
            max_iterations: default_max_iterations(),
            expressivity_pairs: default_pairs(),
            bins: default_bins(),
        }
    }

    /// n = 5, layers {1, 4, 8, 12, 16}.
    pub fn paper_scale(experiment: Experiment, master_seed: u64) -> Self {
        let mut c = Self::desk_scale(experiment, master_seed);
        c.qubits = 5;
        c.ansatz.iter_mut().for_each(|a| a.layers = vec![1, 4, 8, 12, 16]);
        c
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// `(family, layers)` pairs in config order.
    pub fn specs(&self) -> Result<Vec<AnsatzSpec>> {
        self.ansatz
            .iter()
            .flat_map(|a| a.layers.iter().map(move |&l| AnsatzSpec::new(a.family, self.qubits, l)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.qubits == 0 {
            return Err(Error::invalid("qubits must be at least 1"));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::invalid("restarts and max_iterations must be positive"));
        }
        if matches!(self.experiment, Experiment::VerifyBounds | Experiment::Landscape) {
            return Ok(());
        }
        if self.ansatz.is_empty() || self.ansatz.iter().any(|a| a.layers.is_empty()) {
            return Err(Error::invalid("ansatz list and every layers list must be nonempty"));
        }
        self.specs()?;
        if self.experiment == Experiment::Expressivity {
            if self.bins == 0 || self.expressivity_pairs < self.bins {
                return Err(Error::invalid("expressivity needs bins >= 1 and pairs >= bins"));
            }
            if self.qubits < 1 {
                return Err(Error::invalid("expressivity needs at least one qubit"));
            }
            return Ok(());
        }
        if self.radii.is_empty() {
            return Err(Error::invalid("radii must be nonempty for sweep experiments"));
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("radii must be positive and strictly increasing"));
        }
        match self.experiment {
            Experiment::NmeSweep => {
                for c in self.nme_families.iter().flatten() {
                    check_spectrum(c, self.dim())?;
                }
            }
            _ => {
                if self.sample_kinds.is_empty() {
                    return Err(Error::invalid("sample_kinds must be nonempty"));
                }
                if self.sample_kinds.contains(&SampleKind::Nme) {
                    return Err(Error::invalid("use the nme_sweep experiment for partially entangled samples"));
                }
            }
        }
        Ok(())
    }

    /// Spectra for `nme_sweep`, sorted by entanglement entropy.
    pub fn nme_spectra(&self) -> Vec<Vec<f64>> {
        let mut v = self.nme_families.clone().unwrap_or_else(|| crate::samples::nme_coefficient_families(self.dim()));
        v.sort_by(|a, b| spectrum_entropy(a).total_cmp(&spectrum_entropy(b)));
        v
    }
}

fn check_spectrum(c: &[f64], d: usize) -> Result<()> {
    if c.is_empty() || c.len() > d {
        return Err(Error::invalid(format!("spectrum length {} must be in 1..={d}", c.len())));
    }
    let s: f64 = c.iter().sum();
    if c.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > SPECTRUM_TOLERANCE {
        return Err(Error::invalid("spectrum must be nonnegative and sum to 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "experiment": "distance",
        "ansatz": [{"family": "crx_entanglement", "layers": [1, 4]}],
        "qubits": 3,
        "repetitions": 2,
        "master_seed": 7
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.radii.len(), 16);
        assert_eq!(c.sample_kinds, vec![SampleKind::Separable, SampleKind::MaxEntangled]);
        assert_eq!(c.specs().unwrap().len(), 2);
    }

    #[test]
    fn unknown_field_rejected() {
        let s = MINIMAL.replace("\"qubits\"", "\"qubit_count\": 1, \"qubits\"");
        assert!(ExperimentConfig::from_json_str(&s).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for (from, to) in [
            ("\"repetitions\": 2", "\"repetitions\": 0"),
            ("\"qubits\": 3", "\"qubits\": 0"),
            ("\"master_seed\": 7", "\"master_seed\": 7, \"radii\": []"),
            ("\"master_seed\": 7", "\"master_seed\": 7, \"radii\": [1.0, 0.5]"),
            ("\"master_seed\": 7", "\"master_seed\": 7, \"sample_kinds\": [\"nme\"]"),
        ] {
            let s = MINIMAL.replace(from, to);
            assert!(ExperimentConfig::from_json_str(&s).is_err(), "{to}");
        }
    }

    #[test]
    fn nme_spectra_sorted_and_checked() {
        let mut c = ExperimentConfig::desk_scale(Experiment::NmeSweep, 1);
        let s = c.nme_spectra();
        assert!(s.windows(2).all(|w| spectrum_entropy(&w[0]) <= spectrum_entropy(&w[1])));
        c.nme_families = Some(vec![vec![0.5, 0.4]]);
        assert!(c.validate().is_err());
        c.nme_families = Some(vec![vec![0.5; 9]]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn presets_validate() {
        ExperimentConfig::desk_scale(Experiment::Distance, 0).validate().unwrap();
        let p = ExperimentConfig::paper_scale(Experiment::Improvement, 0);
        p.validate().unwrap();
        assert_eq!(p.qubits, 5);
    }
}
