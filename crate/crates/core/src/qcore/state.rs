use serde::{Deserialize, Serialize};

use super::{CMatrix, Complex64, UnitaryMatrix, ZERO};
use crate::error::{check_dim, Error, Result};

/// Allowed deviation of the 2-norm from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Unit-norm pure state on `H_X ⊗ H_R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    dim_x: usize,
    dim_r: usize,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, dim_x: usize, dim_r: usize) -> Result<Self> {
        if dim_x == 0 || dim_r == 0 {
            return Err(Error::invalid("subsystem dimensions must be positive"));
        }
        check_dim(dim_x * dim_r, amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, dim_x, dim_r })
    }

    /// A state on `H_X` alone (trivial one-dimensional reference).
    pub fn single(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, d, 1)
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(mut amplitudes: Vec<Complex64>, dim_x: usize, dim_r: usize) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes, dim_x, dim_r)
    }

    /// `|x⟩ ⊗ |r⟩` for normalized factors.
    pub fn product(x: &[Complex64], r: &[Complex64]) -> Result<Self> {
        for f in [x, r] {
            let n = l2_norm(f);
            if (n - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::NotNormalized(n));
            }
        }
        let amps = x.iter().flat_map(|&a| r.iter().map(move |&b| a * b)).collect();
        Self::new(amps, x.len(), r.len())
    }

    /// Computational basis state `|i⟩_X ⊗ |k⟩_R`.
    pub fn basis(dim_x: usize, dim_r: usize, i: usize, k: usize) -> Result<Self> {
        if i >= dim_x || k >= dim_r {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut amps = vec![ZERO; dim_x * dim_r];
        amps[i * dim_r + k] = Complex64::new(1.0, 0.0);
        Self::new(amps, dim_x, dim_r)
    }

    /// Builds the state from its `dim_x × dim_r` coefficient matrix.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let (dx, dr) = m.shape();
        let amps = (0..dx).flat_map(|i| (0..dr).map(move |k| m[(i, k)])).collect();
        Self::new(amps, dx, dr)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// Reshape into the `dim_x × dim_r` coefficient matrix.
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim_x, self.dim_r, |i, k| self.amplitudes[i * self.dim_r + k])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.len(), other.len())?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }
}

/// `(op ⊗ I_R)|state⟩`.
pub fn apply_to_subsystem(op: &UnitaryMatrix, state: &StateVector) -> Result<StateVector> {
    check_dim(state.dim_x, op.dim())?;
    let (dx, dr) = (state.dim_x, state.dim_r);
    let m = op.matrix();
    let src = &state.amplitudes;
    let mut out = vec![ZERO; dx * dr];
    for i in 0..dx {
        let row = &mut out[i * dr..(i + 1) * dr];
        for j in 0..dx {
            let u = m[(i, j)];
            if u == ZERO {
                continue;
            }
            for (o, s) in row.iter_mut().zip(&src[j * dr..(j + 1) * dr]) {
                *o += u * s;
            }
        }
    }
    // Unitary action preserves the norm up to rounding, so skip re-validation.
    Ok(StateVector { amplitudes: out, dim_x: dx, dim_r: dr })
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
