use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    ball_max_fidelity_separable, construct_min_distance_operator, improvement_entangled_ub, improvement_ratio_bound,
    improvement_separable, min_distance_entangled_lb, min_distance_separable, sine_lower_envelope, sine_upper_envelope,
};
use crate::error::{Error, Result};
use crate::losses::{frobenius_phase_distance, maxent_loss_from_trace, sample_loss};
use crate::pqc::fidelity_kl;
use crate::qcore::{haar_random_state, haar_random_unitary, CMatrix, Complex64, UnitaryMatrix};
use crate::samples::{make_max_entangled, random_separable};
use crate::seed::{derive_seed, rng_from_seed, Rng64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub name: String,
    pub dimension: Option<usize>,
    pub trials: usize,
    pub tolerance: f64,
    /// Largest signed excess over the checked relation; `<= tolerance` passes.
    pub max_error: f64,
    pub failures: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub seed: u64,
    pub checks: Vec<BoundsCheck>,
}

impl BoundsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Tally {
    tol: f64,
    max_error: f64,
    failures: usize,
    trials: usize,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self { tol, max_error: f64::NEG_INFINITY, failures: 0, trials: 0 }
    }

    fn push(&mut self, err: f64) {
        self.trials += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= self.tol) {
            self.failures += 1;
        }
    }

    fn finish(self, name: &str, dimension: Option<usize>) -> BoundsCheck {
        BoundsCheck {
            name: name.to_string(),
            dimension,
            trials: self.trials,
            tolerance: self.tol,
            max_error: self.max_error,
            failures: self.failures,
            passed: self.failures == 0,
        }
    }
}

/// `W̃` hits the requested fidelity at exactly the closed-form distance.
pub fn check_min_distance_tightness(d: usize, trials: usize, rng: &mut Rng64) -> Result<BoundsCheck> {
    let mut t = Tally::new(1e-9);
    for _ in 0..trials {
        let u = haar_random_unitary(d, rng)?;
        let v = haar_random_unitary(d, rng)?;
        let psi = random_separable(d, rng)?;
        let f_w: f64 = rng.gen();
        let f_v = sample_loss(&u, &v, &psi)?.fidelity;
        let w = construct_min_distance_operator(&u, &v, &psi, f_w)?;
        let e1 = (sample_loss(&u, &w, &psi)?.fidelity - f_w).abs();
        let e2 = (frobenius_phase_distance(&v, &w)? - min_distance_separable(f_v, f_w)?).abs();
        t.push(e1.max(e2));
    }
    Ok(t.finish("min_distance_tightness", Some(d)))
}

/// Random operators never undercut the entangled distance lower bound.
pub fn check_entangled_distance_lb(d: usize, trials: usize, rng: &mut Rng64) -> Result<BoundsCheck> {
    let mut t = Tally::new(1e-8);
    let u = haar_random_unitary(d, rng)?;
    let v = haar_random_unitary(d, rng)?;
    let phi = make_max_entangled(d, None)?;
    let f_v = sample_loss(&u, &v, &phi)?.fidelity;
    for _ in 0..trials {
        let w = haar_random_unitary(d, rng)?;
        let f_w = sample_loss(&u, &w, &phi)?.fidelity;
        t.push(min_distance_entangled_lb(f_v, f_w, d)? - frobenius_phase_distance(&v, &w)?);
    }
    Ok(t.finish("entangled_distance_lower_bound", Some(d)))
}

/// Trace route equals state route, and `d_F'² = 2d(1 − √F)`.
pub fn check_trace_identity(d: usize, trials: usize, rng: &mut Rng64) -> Result<BoundsCheck> {
    let mut t = Tally::new(1e-10);
    let phi = make_max_entangled(d, None)?;
    for _ in 0..trials {
        let u = haar_random_unitary(d, rng)?;
        let v = haar_random_unitary(d, rng)?;
        let by_trace = maxent_loss_from_trace(&u, &v)?;
        let by_state = sample_loss(&u, &v, &phi)?;
        let dist = frobenius_phase_distance(&u, &v)?;
        let chain = (dist * dist / (2.0 * d as f64) - (1.0 - by_trace.fidelity.sqrt())).abs();
        t.push((by_trace.loss - by_state.loss).abs().max(chain));
    }
    Ok(t.finish("trace_identity", Some(d)))
}

fn random_hermitian(d: usize, rng: &mut Rng64) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let n = h.norm();
    h / Complex64::new(n, 0.0)
}

/// Cayley map `(I − iK)(I + iK)⁻¹`, unitary for Hermitian `K`.
fn cayley(k: &CMatrix) -> Result<UnitaryMatrix> {
    let d = k.nrows();
    let i = Complex64::i();
    let id = CMatrix::identity(d, d);
    let inv = (&id + k * i).try_inverse().ok_or_else(|| Error::invalid("singular Cayley denominator"))?;
    UnitaryMatrix::new((&id - k * i) * inv)
}

/// No sampled operator in a sub-threshold ball beats the closed-form
/// maximum, and the extremal construction attains it on the boundary.
pub fn check_ball_max_separable(d: usize, instances: usize, samples: usize, rng: &mut Rng64) -> Result<BoundsCheck> {
    let mut t = Tally::new(1e-9);
    for _ in 0..instances {
        let u = haar_random_unitary(d, rng)?;
        let v = haar_random_unitary(d, rng)?;
        let psi = random_separable(d, rng)?;
        let f_v = sample_loss(&u, &v, &psi)?.fidelity;
        let threshold = 2.0 * (1.0 - f_v.sqrt()).sqrt();
        let radius = threshold * rng.gen_range(0.05..0.95);
        let geom = ball_max_fidelity_separable(f_v, radius)?;
        let boundary = construct_min_distance_operator(&u, &v, &psi, geom.max_fidelity)?;
        t.push((sample_loss(&u, &boundary, &psi)?.fidelity - geom.max_fidelity).abs());
        t.push((frobenius_phase_distance(&v, &boundary)? - radius).abs());
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < samples && attempts < 20 * samples {
            attempts += 1;
            // alternate broad draws around V with tight draws around the maximizer
            let w = if attempts % 2 == 0 {
                cayley(&(random_hermitian(d, rng) * Complex64::new(radius * rng.gen::<f64>(), 0.0)))?.compose(&v)?
            } else {
                cayley(&(random_hermitian(d, rng) * Complex64::new(0.05 * radius * rng.gen::<f64>(), 0.0)))?
                    .compose(&boundary)?
            };
            if frobenius_phase_distance(&v, &w)? > radius {
                continue;
            }
            accepted += 1;
            t.push(sample_loss(&u, &w, &psi)?.fidelity - geom.max_fidelity);
        }
    }
    Ok(t.finish("ball_max_fidelity_separable", Some(d)))
}

/// Entangled-to-separable improvement ratio against `8/√(2^n)`, and its
/// monotonicity in `n`, on a grid of starting losses and radii.
pub fn check_ratio_bound(max_qubits: u32) -> Result<BoundsCheck> {
    let mut t = Tally::new(1e-12);
    for loss in [0.2, 0.5, 0.8] {
        let f_v: f64 = 1.0 - loss;
        let r_thr = 2.0 * (1.0 - f_v.sqrt()).sqrt();
        for k in 1..=8 {
            let radius = r_thr * k as f64 / 8.0;
            let sep = improvement_separable(f_v, radius)?.value;
            let mut prev = f64::INFINITY;
            for n in 1..=max_qubits {
                let ent = improvement_entangled_ub(f_v, radius, 1 << n)?.value;
                let ratio = ent / sep;
                t.push(ratio - improvement_ratio_bound(loss, radius, n)?);
                t.push(ratio - prev);
                prev = ratio;
            }
        }
    }
    Ok(t.finish("improvement_ratio_bound", None))
}

/// Parabolic upper and piecewise-linear lower envelopes of `sin` on `[0, π]`.
pub fn check_sine_envelopes(points: usize) -> BoundsCheck {
    let mut t = Tally::new(1e-12);
    for i in 0..points {
        let x = PI * i as f64 / (points - 1).max(1) as f64;
        t.push(x.sin() - sine_upper_envelope(x));
        t.push(sine_lower_envelope(x) - x.sin());
    }
    t.finish("sine_envelopes", None)
}

/// KL divergence of Haar state-pair fidelities from the analytic bin masses.
pub fn check_haar_kl(d: usize, pairs: usize, bins: usize, rng: &mut Rng64) -> Result<BoundsCheck> {
    let mut f = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let a = haar_random_state(d, rng)?;
        let b = haar_random_state(d, rng)?;
        f.push(a.fidelity(&b)?);
    }
    let (kl, _) = fidelity_kl(&f, bins, d)?;
    let mut t = Tally::new(0.01);
    t.push(kl);
    t.trials = pairs;
    Ok(t.finish("haar_fidelity_kl", Some(d)))
}

/// The full analytical suite. Each check draws from its own sub-seed.
pub fn verify_bounds(dims: &[usize], trials: usize, seed: u64) -> Result<BoundsReport> {
    if dims.is_empty() || trials == 0 {
        return Err(Error::invalid("need at least one dimension and one trial"));
    }
    let mut checks = Vec::new();
    let rng = |tag: u64, d: usize| rng_from_seed(derive_seed(seed, &[tag, d as u64]));
    for &d in dims {
        checks.push(check_min_distance_tightness(d, trials, &mut rng(1, d))?);
        checks.push(check_entangled_distance_lb(d, 10 * trials, &mut rng(2, d))?);
        checks.push(check_trace_identity(d, trials, &mut rng(3, d))?);
        checks.push(check_ball_max_separable(d, trials.min(20), 10_000, &mut rng(4, d))?);
    }
    checks.push(check_ratio_bound(10)?);
    checks.push(check_sine_envelopes(400));
    checks.push(check_haar_kl(32, 5000, 75, &mut rng(7, 32))?);
    Ok(BoundsReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = verify_bounds(&[2, 4], 5, 3).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(r.checks.len(), 2 * 4 + 3);
    }

    #[test]
    fn cayley_is_unitary() {
        let mut rng = rng_from_seed(1);
        let k = random_hermitian(4, &mut rng) * Complex64::new(3.0, 0.0);
        assert!(cayley(&k).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn tally_counts_failures() {
        let mut t = Tally::new(0.1);
        t.push(0.05);
        t.push(0.2);
        t.push(f64::NAN);
        let c = t.finish("x", None);
        assert_eq!((c.trials, c.failures, c.passed), (3, 2, false));
    }

    #[test]
    fn empty_request_rejected() {
        assert!(verify_bounds(&[], 5, 0).is_err());
        assert!(verify_bounds(&[2], 0, 0).is_err());
    }
}
