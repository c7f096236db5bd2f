use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sim::Circuit;
use crate::error::{Error, Result};
use crate::qcore::UnitaryMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    /// `RX` then `RZ` on every qubit; no two-qubit gates.
    NoEntanglement,
    /// `RX`/`RZ` on every qubit, then a nearest-neighbour `CRX` ladder whose
    /// gates share one angle per layer.
    CrxEntanglement,
    /// `H` on every qubit, a `CZ` chain, then `RX` on every qubit.
    CzEntanglement,
    /// `RY` on every qubit followed by a ring of `CX` gates.
    CircularEntanglement,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [
        AnsatzFamily::NoEntanglement,
        AnsatzFamily::CrxEntanglement,
        AnsatzFamily::CzEntanglement,
        AnsatzFamily::CircularEntanglement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AnsatzFamily::NoEntanglement => "no_entanglement",
            AnsatzFamily::CrxEntanglement => "crx_entanglement",
            AnsatzFamily::CzEntanglement => "cz_entanglement",
            AnsatzFamily::CircularEntanglement => "circular_entanglement",
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnsatzFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let fam = match key.as_str() {
            "no_entanglement" | "none" => AnsatzFamily::NoEntanglement,
            "crx_entanglement" | "crx" => AnsatzFamily::CrxEntanglement,
            "cz_entanglement" | "cz" => AnsatzFamily::CzEntanglement,
            "circular_entanglement" | "circular" => AnsatzFamily::CircularEntanglement,
            _ => return Err(Error::invalid(format!("unknown ansatz family '{s}'"))),
        };
        Ok(fam)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub qubits: usize,
    pub layers: usize,
}

/// One gate; `p` indexes into the parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Rx { q: usize, p: usize },
    Ry { q: usize, p: usize },
    Rz { q: usize, p: usize },
    H { q: usize },
    Cz { a: usize, b: usize },
    Cx { c: usize, t: usize },
    Crx { c: usize, t: usize, p: usize },
}

impl Gate {
    /// Parameter index, for rotation gates.
    pub fn param(&self) -> Option<usize> {
        match *self {
            Gate::Rx { p, .. } | Gate::Ry { p, .. } | Gate::Rz { p, .. } | Gate::Crx { p, .. } => Some(p),
            _ => None,
        }
    }
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, qubits: usize, layers: usize) -> Result<Self> {
        let spec = Self { family, qubits, layers };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 || self.layers == 0 {
            return Err(Error::invalid("ansatz needs at least one qubit and one layer"));
        }
        if self.qubits > 12 {
            return Err(Error::invalid("dense simulation is limited to 12 qubits"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// The gate sequence in application order (first gate acts first).
    pub fn gates(&self) -> Vec<Gate> {
        let n = self.qubits;
        let mut p = 0usize;
        let mut next = || {
            p += 1;
            p - 1
        };
        let mut out = Vec::new();
        for _ in 0..self.layers {
            match self.family {
                AnsatzFamily::NoEntanglement => {
                    (0..n).for_each(|q| out.push(Gate::Rx { q, p: next() }));
                    (0..n).for_each(|q| out.push(Gate::Rz { q, p: next() }));
                }
                AnsatzFamily::CrxEntanglement => {
                    (0..n).for_each(|q| out.push(Gate::Rx { q, p: next() }));
                    (0..n).for_each(|q| out.push(Gate::Rz { q, p: next() }));
                    if n > 1 {
                        // one angle shared by the whole ladder, bottom pair first
                        let p = next();
                        (0..n - 1).for_each(|k| out.push(Gate::Crx { c: n - 1 - k, t: n - 2 - k, p }));
                    }
                }
                AnsatzFamily::CzEntanglement => {
                    (0..n).for_each(|q| out.push(Gate::H { q }));
                    (0..n.saturating_sub(1)).for_each(|q| out.push(Gate::Cz { a: q, b: q + 1 }));
                    (0..n).for_each(|q| out.push(Gate::Rx { q, p: next() }));
                }
                AnsatzFamily::CircularEntanglement => {
                    (0..n).for_each(|q| out.push(Gate::Ry { q, p: next() }));
                    if n > 1 {
                        for q in (0..n).rev() {
                            out.push(Gate::Cx { c: q, t: (q + 1) % n });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn circuit(&self) -> Result<Circuit> {
        self.validate()?;
        Ok(Circuit::new(self.qubits, self.gates()))
    }
}

/// Number of rotation parameters of the ansatz.
pub fn param_count(spec: &AnsatzSpec) -> usize {
    let n = spec.qubits;
    let per_layer = match spec.family {
        AnsatzFamily::NoEntanglement => 2 * n,
        AnsatzFamily::CrxEntanglement => 2 * n + usize::from(n > 1),
        AnsatzFamily::CzEntanglement => n,
        AnsatzFamily::CircularEntanglement => n,
    };
    per_layer * spec.layers
}

/// Real parameter assignment, in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    /// Uniform draw from `[0, 2π)^p`.
    pub fn random<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Self {
        Self((0..p).map(|_| rng.gen_range(0.0..TAU)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &ParameterVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `V(θ) = Π_i V_i(θ)` as a dense `2^n × 2^n` unitary.
pub fn build_unitary(spec: &AnsatzSpec, theta: &ParameterVector) -> Result<UnitaryMatrix> {
    let circuit = spec.circuit()?;
    circuit.unitary(theta.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Complex64, ONE, ZERO};
    use crate::seed::rng_from_seed;

    #[test]
    fn gate_lists_agree_with_param_count() {
        for fam in AnsatzFamily::ALL {
            for n in 1..=5 {
                for l in [1, 2, 5] {
                    let spec = AnsatzSpec::new(fam, n, l).unwrap();
                    let mut ids: Vec<usize> = spec.gates().iter().filter_map(Gate::param).collect();
                    ids.dedup();
                    assert_eq!(ids, (0..ids.len()).collect::<Vec<_>>());
                    let used = ids.len();
                    assert_eq!(used, param_count(&spec), "{fam} n={n} l={l}");
                }
            }
        }
    }

    #[test]
    fn published_parameter_counts() {
        let c = |f, n, l| param_count(&AnsatzSpec::new(f, n, l).unwrap());
        assert_eq!(c(AnsatzFamily::CzEntanglement, 5, 1), 5);
        assert_eq!(c(AnsatzFamily::CrxEntanglement, 5, 16), 176);
        assert_eq!(c(AnsatzFamily::NoEntanglement, 5, 1), 10);
    }

    #[test]
    fn zero_parameters_on_rotation_only_ansatz_is_identity() {
        let spec = AnsatzSpec::new(AnsatzFamily::NoEntanglement, 3, 2).unwrap();
        let u = build_unitary(&spec, &ParameterVector::zeros(param_count(&spec))).unwrap();
        assert!(u.frobenius_distance(&UnitaryMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn any_parameters_give_unitary() {
        let mut rng = rng_from_seed(5);
        for fam in AnsatzFamily::ALL {
            let spec = AnsatzSpec::new(fam, 3, 3).unwrap();
            let theta = ParameterVector::random(param_count(&spec), &mut rng);
            assert!(build_unitary(&spec, &theta).unwrap().unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn single_qubit_rx_then_rz_matches_hand_product() {
        let (t1, t2) = (0.7_f64, -1.9_f64);
        let spec = AnsatzSpec::new(AnsatzFamily::NoEntanglement, 1, 1).unwrap();
        let u = build_unitary(&spec, &vec![t1, t2].into()).unwrap();
        let i = Complex64::i();
        let (c, s) = ((t1 / 2.0).cos(), (t1 / 2.0).sin());
        let rx = [[c * ONE, -i * s], [-i * s, c * ONE]];
        let rz = [[Complex64::from_polar(1.0, -t2 / 2.0), ZERO], [ZERO, Complex64::from_polar(1.0, t2 / 2.0)]];
        for r in 0..2 {
            for col in 0..2 {
                let want: Complex64 = (0..2).map(|k| rz[r][k] * rx[k][col]).sum();
                assert!((u.matrix()[(r, col)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let spec = AnsatzSpec::new(AnsatzFamily::CzEntanglement, 2, 1).unwrap();
        assert!(build_unitary(&spec, &ParameterVector::zeros(3)).is_err());
        assert!(AnsatzSpec::new(AnsatzFamily::CzEntanglement, 0, 1).is_err());
    }

    #[test]
    fn family_names_parse_and_serialize() {
        for fam in AnsatzFamily::ALL {
            assert_eq!(fam.as_str().parse::<AnsatzFamily>().unwrap(), fam);
        }
        let spec = AnsatzSpec::new(AnsatzFamily::CrxEntanglement, 5, 16).unwrap();
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(js, r#"{"family":"crx_entanglement","qubits":5,"layers":16}"#);
        assert!(serde_json::from_str::<AnsatzSpec>(r#"{"family":"cz_entanglement","qubits":5,"layers":1,"x":1}"#)
            .is_err());
    }
}
