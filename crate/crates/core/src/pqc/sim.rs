use crate::error::{check_dim, Error, Result};
use crate::losses::sample_loss;
use crate::optimize::Objective;
use crate::qcore::{Complex64, UnitaryMatrix, ZERO};
use crate::samples::TrainingSample;

use super::ansatz::{build_unitary, param_count, AnsatzSpec, Gate, ParameterVector};

/// Central-difference step for [`loss_gradient`].
pub const FD_STEP: f64 = 1e-6;

/// Gate list bound to a register size; simulates on column blocks.
#[derive(Clone, Debug)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

type Mat2 = [[Complex64; 2]; 2];

fn rotation(gate: &Gate, theta: f64) -> Option<Mat2> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match gate {
        Gate::Rx { .. } | Gate::Crx { .. } => Some([[re(c), im(-s)], [im(-s), re(c)]]),
        Gate::Ry { .. } => Some([[re(c), re(-s)], [re(s), re(c)]]),
        Gate::Rz { .. } => Some([[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]),
        _ => None,
    }
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Self {
        let n_params = gates.iter().filter_map(|g| g.param().map(|p| p + 1)).max().unwrap_or(0);
        Self { qubits, gates, n_params }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.qubits - 1 - q)
    }

    /// Apply a 2x2 matrix to qubit `q` of every column; with `control`,
    /// only on the half where the control bit is set.
    fn apply_1q(&self, buf: &mut [Complex64], q: usize, control: Option<usize>, m: &Mat2) {
        let d = self.dim();
        let tm = self.mask(q);
        let cm = control.map_or(0, |c| self.mask(c));
        for col in buf.chunks_exact_mut(d) {
            for i in 0..d {
                if i & tm != 0 || i & cm != cm {
                    continue;
                }
                let (a, b) = (col[i], col[i | tm]);
                col[i] = m[0][0] * a + m[0][1] * b;
                col[i | tm] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_gate(&self, buf: &mut [Complex64], gate: &Gate, theta: &[f64], inverse: bool) {
        let d = self.dim();
        let sign = if inverse { -1.0 } else { 1.0 };
        match *gate {
            Gate::Rx { q, p } | Gate::Ry { q, p } | Gate::Rz { q, p } => {
                let m = rotation(gate, sign * theta[p]).expect("rotation gate");
                self.apply_1q(buf, q, None, &m);
            }
            Gate::Crx { c, t, p } => {
                let m = rotation(gate, sign * theta[p]).expect("rotation gate");
                self.apply_1q(buf, t, Some(c), &m);
            }
            Gate::H { q } => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_1q(buf, q, None, &[[h, h], [h, -h]]);
            }
            Gate::Cz { a, b } => {
                let both = self.mask(a) | self.mask(b);
                for col in buf.chunks_exact_mut(d) {
                    for (i, z) in col.iter_mut().enumerate() {
                        if i & both == both {
                            *z = -*z;
                        }
                    }
                }
            }
            Gate::Cx { c, t } => {
                let (cm, tm) = (self.mask(c), self.mask(t));
                for col in buf.chunks_exact_mut(d) {
                    for i in 0..d {
                        if i & cm != 0 && i & tm == 0 {
                            col.swap(i, i | tm);
                        }
                    }
                }
            }
        }
    }

    /// `-i/2 · G` for the generator `G` of a parameterized gate.
    fn apply_generator(&self, buf: &mut [Complex64], gate: &Gate) {
        let h = Complex64::new(0.0, -0.5);
        let (q, control, m) = match *gate {
            Gate::Rx { q, .. } => (q, None, [[ZERO, h], [h, ZERO]]),
            Gate::Ry { q, .. } => (q, None, [[ZERO, -h * Complex64::i()], [h * Complex64::i(), ZERO]]),
            Gate::Rz { q, .. } => (q, None, [[h, ZERO], [ZERO, -h]]),
            Gate::Crx { c, t, .. } => (t, Some(c), [[ZERO, h], [h, ZERO]]),
            _ => unreachable!("generator of a fixed gate"),
        };
        if let Some(c) = control {
            // zero the control-off half so the projector is part of the generator
            let d = self.dim();
            let cm = self.mask(c);
            for col in buf.chunks_exact_mut(d) {
                for (i, z) in col.iter_mut().enumerate() {
                    if i & cm == 0 {
                        *z = ZERO;
                    }
                }
            }
        }
        self.apply_1q(buf, q, control, &m);
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(self.n_params, theta.len())
    }

    /// In-place `V(θ)` on a column-major block of `buf.len() / dim` columns.
    pub fn apply(&self, theta: &[f64], buf: &mut [Complex64]) -> Result<()> {
        self.check_params(theta)?;
        if buf.len() % self.dim() != 0 {
            return Err(Error::invalid("buffer length is not a multiple of the dimension"));
        }
        for g in &self.gates {
            self.apply_gate(buf, g, theta, false);
        }
        Ok(())
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<UnitaryMatrix> {
        let d = self.dim();
        let mut buf = vec![ZERO; d * d];
        for i in 0..d {
            buf[i * d + i] = Complex64::new(1.0, 0.0);
        }
        self.apply(theta, &mut buf)?;
        let m = crate::qcore::CMatrix::from_vec(d, d, buf);
        Ok(UnitaryMatrix::from_matrix_unchecked(m))
    }
}

/// Loss `1 - |<α|(U†V(θ) ⊗ I)|α>|²` for a fixed target and sample, written
/// as `1 - |<U B, V(θ) B>_F|²` with `B` the weighted Schmidt factor.
#[derive(Clone, Debug)]
pub struct CircuitLoss {
    circuit: Circuit,
    start: Vec<Complex64>,
    target: Vec<Complex64>,
}

impl CircuitLoss {
    pub fn new(spec: &AnsatzSpec, target: &UnitaryMatrix, sample: &TrainingSample) -> Result<Self> {
        let circuit = spec.circuit()?;
        check_dim(circuit.dim(), target.dim())?;
        check_dim(circuit.dim(), sample.dim_x())?;
        let b = sample.schmidt().weighted_x();
        let target_m = target.matrix() * &b;
        Ok(Self {
            circuit,
            start: b.as_slice().to_vec(),
            target: target_m.as_slice().to_vec(),
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn overlap(&self, theta: &[f64]) -> Result<(Complex64, Vec<Complex64>)> {
        let mut phi = self.start.clone();
        self.circuit.apply(theta, &mut phi)?;
        let z = crate::qcore::inner(&self.target, &phi);
        Ok((z, phi))
    }

    pub fn loss(&self, theta: &[f64]) -> Result<f64> {
        let (z, _) = self.overlap(theta)?;
        Ok((1.0 - z.norm_sqr()).max(0.0))
    }

    /// Loss and exact gradient from one forward and one reverse sweep.
    pub fn loss_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (z, mut phi) = self.overlap(theta)?;
        let mut lambda = self.target.clone();
        let mut dz = vec![ZERO; self.circuit.n_params()];
        let mut scratch = vec![ZERO; phi.len()];
        for g in self.circuit.gates.iter().rev() {
            if let Some(p) = g.param() {
                scratch.copy_from_slice(&phi);
                self.circuit.apply_generator(&mut scratch, g);
                dz[p] += crate::qcore::inner(&lambda, &scratch);
            }
            self.circuit.apply_gate(&mut phi, g, theta, true);
            self.circuit.apply_gate(&mut lambda, g, theta, true);
        }
        let grad = dz.iter().map(|w| -2.0 * (z.conj() * w).re).collect();
        Ok(((1.0 - z.norm_sqr()).max(0.0), grad))
    }
}

impl Objective for CircuitLoss {
    fn dim(&self) -> usize {
        self.circuit.n_params()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.loss(x)
    }

    /// Exact gradient; the finite-difference step is unused.
    fn value_and_gradient(&self, x: &[f64], _h: f64) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient(x)
    }
}

/// Central finite-difference gradient of the sample loss against `U`.
pub fn loss_gradient(
    spec: &AnsatzSpec,
    theta: &ParameterVector,
    u: &UnitaryMatrix,
    sample: &TrainingSample,
) -> Result<Vec<f64>> {
    check_dim(param_count(spec), theta.len())?;
    let f = |t: Vec<f64>| -> Result<f64> {
        let v = build_unitary(spec, &ParameterVector(t))?;
        Ok(sample_loss(u, &v, sample)?.loss)
    };
    (0..theta.len())
        .map(|k| {
            let mut up = theta.0.clone();
            let mut dn = theta.0.clone();
            up[k] += FD_STEP;
            dn[k] -= FD_STEP;
            Ok((f(up)? - f(dn)?) / (2.0 * FD_STEP))
        })
        .collect()
}
