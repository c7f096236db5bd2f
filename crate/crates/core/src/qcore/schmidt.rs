use serde::{Deserialize, Serialize};

use super::{CMatrix, Complex64, StateVector, ZERO};
use crate::error::Result;

/// A Schmidt coefficient counts toward the rank iff it exceeds this value.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Schmidt decomposition `|α⟩ = Σ_j √c_j |x_j⟩ ⊗ |y_j⟩`.
///
/// `coefficients` holds the `√c_j` in descending order; column `j` of
/// `basis_x` / `basis_y` is `|x_j⟩` / `|y_j⟩`. Each pair is phase-canonical:
/// the first entry of `|x_j⟩` with modulus above 1e-12 is real and positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub rank: usize,
    #[serde(skip)]
    pub basis_x: CMatrix,
    #[serde(skip)]
    pub basis_y: CMatrix,
}

impl SchmidtData {
    /// The squared coefficients `c_j`.
    pub fn squared(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    /// `-Σ c_j ln c_j` in nats, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        let h: f64 = self
            .coefficients
            .iter()
            .map(|s| s * s)
            .filter(|&c| c > 0.0)
            .map(|c| -c * c.ln())
            .sum();
        h.max(0.0)
    }

    /// Rebuilds the amplitude vector `Σ √c_j |x_j⟩|y_j⟩`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (dx, dr) = (self.basis_x.nrows(), self.basis_y.nrows());
        let mut amps = vec![ZERO; dx * dr];
        for (j, &s) in self.coefficients.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..dx {
                let xi = self.basis_x[(i, j)] * s;
                for k in 0..dr {
                    amps[i * dr + k] += xi * self.basis_y[(k, j)];
                }
            }
        }
        amps
    }

    /// `X_r · diag(√c)`: the `dim_x × rank` factor that determines every
    /// fidelity of the form `⟨(A⊗I)α, (B⊗I)α⟩`.
    pub fn weighted_x(&self) -> CMatrix {
        let dx = self.basis_x.nrows();
        CMatrix::from_fn(dx, self.rank, |i, j| self.basis_x[(i, j)] * self.coefficients[j])
    }
}

/// Schmidt decomposition of the reshaped amplitude matrix `M`.
///
/// The system basis comes from the Hermitian eigendecomposition of `M M†`
/// and each `√c_j` is the norm of `x_j† M`. nalgebra's complex SVD can lose
/// about six digits on some rank-deficient inputs; this route does not.
pub fn schmidt_decompose(state: &StateVector) -> Result<SchmidtData> {
    let m = state.as_matrix();
    let (dx, dr) = (state.dim_x(), state.dim_r());
    let k = dx.min(dr);
    let eig = (&m * m.adjoint()).symmetric_eigen();
    let mut order: Vec<usize> = (0..dx).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut basis_x = CMatrix::zeros(dx, k);
    let mut basis_y = CMatrix::zeros(dr, k);
    let mut coefficients = Vec::with_capacity(k);
    for (col, &j) in order.iter().take(k).enumerate() {
        let x = eig.eigenvectors.column(j);
        let phase = x
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z / z.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        for i in 0..dx {
            basis_x[(i, col)] = x[i] * phase.conj();
        }
        let w = basis_x.column(col).adjoint() * &m;
        let s = w.norm();
        coefficients.push(s);
        if s > RANK_TOLERANCE {
            for kk in 0..dr {
                basis_y[(kk, col)] = w[kk] / s;
            }
        }
    }
    // Directions with no weight still need orthonormal partners.
    let mut cand = 0;
    for col in 0..k {
        if coefficients[col] > RANK_TOLERANCE {
            continue;
        }
        while cand < dr {
            let mut v = CMatrix::zeros(dr, 1);
            v[(cand, 0)] = Complex64::new(1.0, 0.0);
            cand += 1;
            for _ in 0..2 {
                for prev in 0..k {
                    if prev == col || (prev > col && coefficients[prev] <= RANK_TOLERANCE) {
                        continue;
                    }
                    let p = basis_y.column(prev).into_owned();
                    let ov = (p.adjoint() * &v)[(0, 0)];
                    v -= p * ov;
                }
            }
            let n = v.norm();
            if n > 1e-3 {
                basis_y.set_column(col, &(v / Complex64::new(n, 0.0)).column(0));
                break;
            }
        }
    }
    let rank = coefficients.iter().filter(|&&s| s > RANK_TOLERANCE).count();
    Ok(SchmidtData { coefficients, rank, basis_x, basis_y })
}
