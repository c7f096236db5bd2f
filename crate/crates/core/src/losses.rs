//! Fidelity loss, Bures angle, phase-invariant Frobenius distance, Monte
//! Carlo risk and the no-free-lunch lower bound.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::qcore::{apply_to_subsystem, haar_random_state, UnitaryMatrix};
use crate::samples::TrainingSample;

/// Loss, fidelity and Bures angle of one hypothesis on one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossValue {
    pub loss: f64,
    pub fidelity: f64,
    /// `arccos(√F)` in radians.
    pub bures_angle: f64,
}

impl LossValue {
    pub fn from_fidelity(fidelity: f64) -> Self {
        let f = fidelity.clamp(0.0, 1.0);
        Self { loss: 1.0 - f, fidelity: f, bures_angle: f.sqrt().acos() }
    }
}

/// `1 − |⟨α|(U†V ⊗ I)|α⟩|²`, evaluated by simulating both outputs.
pub fn sample_loss(u: &UnitaryMatrix, v: &UnitaryMatrix, sample: &TrainingSample) -> Result<LossValue> {
    check_dim(u.dim(), v.dim())?;
    check_dim(sample.dim_x(), u.dim())?;
    let expected = apply_to_subsystem(u, sample.state())?;
    let actual = apply_to_subsystem(v, sample.state())?;
    Ok(LossValue::from_fidelity(expected.fidelity(&actual)?))
}

/// `√(2d)·√(1 − |Tr(U†V)|/d)`, the Frobenius distance minimized over a global phase.
pub fn frobenius_phase_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let d = u.dim() as f64;
    let t = u.trace_inner(v)?.norm();
    Ok((2.0 * d).sqrt() * (1.0 - t / d).max(0.0).sqrt())
}

/// Loss on the maximally entangled sample via `F = |Tr(U†V)|² / d²`.
pub fn maxent_loss_from_trace(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<LossValue> {
    let d = u.dim() as f64;
    let t = u.trace_inner(v)?;
    Ok(LossValue::from_fidelity(t.norm_sqr() / (d * d)))
}

/// Monte Carlo risk estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Mean loss over `n` Haar-random inputs on `H_X`.
pub fn risk_estimate<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    n: usize,
    rng: &mut R,
) -> Result<RiskEstimate> {
    if n == 0 {
        return Err(Error::invalid("risk estimate needs at least one sample"));
    }
    check_dim(u.dim(), v.dim())?;
    // ⟨ψ|U†V|ψ⟩ only needs W = U†V once.
    let w = u.adjoint().compose(v)?;
    let d = u.dim();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let psi = haar_random_state(d, rng)?;
        let wpsi = w.apply(psi.amplitudes())?;
        let overlap: num_complex::Complex64 =
            psi.amplitudes().iter().zip(&wpsi).map(|(a, b)| a.conj() * b).sum();
        let loss = (1.0 - overlap.norm_sqr()).clamp(0.0, 1.0);
        sum += loss;
        sum_sq += loss * loss;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    Ok(RiskEstimate { mean, std_error: (var / nf).sqrt(), samples: n })
}

/// `1 − (r²t² + d + 1) / (d(d+1))`, unclamped.
pub fn qnfl_lower_bound(d: usize, r: usize, t: usize) -> Result<f64> {
    if d == 0 || r == 0 || t == 0 {
        return Err(Error::invalid("d, r and t must be positive"));
    }
    if r > d {
        return Err(Error::invalid(format!("Schmidt rank {r} exceeds dimension {d}")));
    }
    let (d, r, t) = (d as f64, r as f64, t as f64);
    Ok(1.0 - (r * r * t * t + d + 1.0) / (d * (d + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::haar_random_unitary;
    use crate::samples::{make_max_entangled, random_separable, zero_separable};
    use crate::seed::rng_from_seed;

    fn pauli_z() -> UnitaryMatrix {
        UnitaryMatrix::from_rows(2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]).unwrap()
    }

    fn pauli_x() -> UnitaryMatrix {
        UnitaryMatrix::from_rows(2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]).unwrap()
    }

    #[test]
    fn identical_operators_have_zero_loss() {
        let mut rng = rng_from_seed(1);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let s = random_separable(4, &mut rng).unwrap();
        assert!(sample_loss(&u, &u, &s).unwrap().loss < 1e-12);
        let m = make_max_entangled(4, None).unwrap();
        assert!(sample_loss(&u, &u, &m).unwrap().loss < 1e-12);
    }

    #[test]
    fn z_on_eigenstate_versus_bell_pair() {
        let i = UnitaryMatrix::identity(2);
        let z = pauli_z();
        let zero = zero_separable(2).unwrap();
        assert!(sample_loss(&i, &z, &zero).unwrap().loss.abs() < 1e-15);
        let bell = make_max_entangled(2, None).unwrap();
        assert!((sample_loss(&i, &z, &bell).unwrap().loss - 1.0).abs() < 1e-15);
        // trace route agrees: Tr(Z) = 0
        assert!((maxent_loss_from_trace(&i, &z).unwrap().loss - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_value_fields_consistent() {
        let mut rng = rng_from_seed(6);
        let u = haar_random_unitary(8, &mut rng).unwrap();
        let v = haar_random_unitary(8, &mut rng).unwrap();
        let s = random_separable(8, &mut rng).unwrap();
        let lv = sample_loss(&u, &v, &s).unwrap();
        assert!((lv.loss - (1.0 - lv.fidelity)).abs() < 1e-12);
        assert!((lv.fidelity - lv.bures_angle.cos().powi(2)).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&lv.loss));
    }

    #[test]
    fn global_phase_is_invisible() {
        let mut rng = rng_from_seed(7);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let v = haar_random_unitary(4, &mut rng).unwrap();
        let s = random_separable(4, &mut rng).unwrap();
        let rho: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a = sample_loss(&u, &v, &s).unwrap().loss;
        let b = sample_loss(&u, &v.scale_phase(rho), &s).unwrap().loss;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn frobenius_phase_distance_extremes() {
        let mut rng = rng_from_seed(3);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        assert!(frobenius_phase_distance(&u, &u.scale_phase(1.234)).unwrap() < 1e-7);
        let d = frobenius_phase_distance(&UnitaryMatrix::identity(2), &pauli_x()).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frobenius_phase_distance_matches_grid_minimum() {
        let mut rng = rng_from_seed(12);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let v = haar_random_unitary(4, &mut rng).unwrap();
        // Oracle: brute-force min over a 10^4-point phase grid.
        let grid_min = (0..10_000)
            .map(|k| {
                let rho = std::f64::consts::TAU * k as f64 / 10_000.0;
                u.frobenius_distance(&v.scale_phase(rho))
            })
            .fold(f64::INFINITY, f64::min);
        let d = frobenius_phase_distance(&u, &v).unwrap();
        assert!((d - grid_min).abs() < 1e-6, "{d} vs {grid_min}");
        assert!(d <= grid_min + 1e-12);
    }

    #[test]
    fn risk_of_exact_hypothesis_is_zero() {
        let mut rng = rng_from_seed(4);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let est = risk_estimate(&u, &u, 200, &mut rng).unwrap();
        assert!(est.mean < 1e-12 && est.std_error < 1e-12);
        assert!(risk_estimate(&u, &u, 0, &mut rng).is_err());
    }

    #[test]
    fn risk_standard_error_scales_inverse_sqrt() {
        let i = UnitaryMatrix::identity(2);
        let z = pauli_z();
        let a = risk_estimate(&i, &z, 20_000, &mut rng_from_seed(1)).unwrap();
        let b = risk_estimate(&i, &z, 40_000, &mut rng_from_seed(2)).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 2f64.sqrt()).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn risk_matches_bloch_sphere_quadrature() {
        // Oracle: 1 − ⟨ψ|Z|ψ⟩² = 1 − cos²ϑ averaged over the sphere with the
        // sin ϑ dϑ dφ / 4π measure, by midpoint quadrature in ϑ.
        let m = 20_000;
        let h = std::f64::consts::PI / m as f64;
        let quad: f64 = (0..m)
            .map(|k| {
                let t = (k as f64 + 0.5) * h;
                (1.0 - t.cos().powi(2)) * t.sin() * h / 2.0
            })
            .sum();
        let est = risk_estimate(&UnitaryMatrix::identity(2), &pauli_z(), 100_000, &mut rng_from_seed(42))
            .unwrap();
        assert!((est.mean - quad).abs() < 3.0 * est.std_error, "{} vs {quad}", est.mean);
    }

    #[test]
    fn qnfl_values() {
        assert!((qnfl_lower_bound(2, 1, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((qnfl_lower_bound(4, 1, 1).unwrap() - 0.7).abs() < 1e-15);
        assert!(qnfl_lower_bound(2, 3, 1).is_err());
        // vacuous regime stays negative
        assert!(qnfl_lower_bound(4, 4, 2).unwrap() < 0.0);
        for d in [2, 4, 8, 16] {
            for t in 1..4 {
                let vals: Vec<f64> = (1..=d).map(|r| qnfl_lower_bound(d, r, t).unwrap()).collect();
                assert!(vals.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = zero_separable(2).unwrap();
        let u4 = UnitaryMatrix::identity(4);
        assert!(sample_loss(&u4, &u4, &s).is_err());
        assert!(frobenius_phase_distance(&u4, &UnitaryMatrix::identity(2)).is_err());
    }
}
