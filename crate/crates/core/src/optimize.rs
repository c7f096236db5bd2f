//! Minimization inside a 2-norm ball around a starting point, and sweeps of
//! that minimization over a grid of radii.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pqc::ParameterVector;
use crate::seed::{derive_seed, rng_from_seed};

/// Envelope threshold used for "reached a global minimum".
pub const MINIMUM_THRESHOLD: f64 = 1e-3;

/// Slack allowed on the ball constraint for returned points.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Scalar objective on `R^p`. Implementors with an analytic gradient should
/// override [`Objective::value_and_gradient`].
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Central differences with step `h` unless overridden.
    fn value_and_gradient(&self, x: &[f64], h: f64) -> Result<(f64, Vec<f64>)> {
        let f = self.value(x)?;
        let mut g = vec![0.0; x.len()];
        let mut y = x.to_vec();
        for k in 0..x.len() {
            y[k] = x[k] + h;
            let up = self.value(&y)?;
            y[k] = x[k] - h;
            let dn = self.value(&y)?;
            y[k] = x[k];
            g[k] = (up - dn) / (2.0 * h);
        }
        Ok((f, g))
    }
}

/// Closure-backed objective with a finite-difference gradient.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x);
        if v.is_nan() {
            return Err(Error::invalid("objective returned NaN"));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallConstraint {
    pub center: ParameterVector,
    pub radius: f64,
}

impl BallConstraint {
    pub fn new(center: ParameterVector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.center.0.iter().zip(x).map(|(c, v)| (v - c).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) <= self.radius + FEASIBILITY_TOLERANCE
    }

    /// Euclidean projection onto the ball.
    pub fn project(&self, x: &mut [f64]) {
        let r = self.distance(x);
        if r > self.radius {
            let s = if r > 0.0 { self.radius / r } else { 0.0 };
            for (v, c) in x.iter_mut().zip(&self.center.0) {
                *v = c + (*v - c) * s;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub fd_step: f64,
    pub seed: u64,
    /// Stop as soon as the objective drops to this value.
    #[serde(default)]
    pub value_target: Option<f64>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { max_iterations: 300, restarts: 3, tolerance: 1e-10, fd_step: 1e-6, seed: 0, value_target: None }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.restarts == 0 || !(self.tolerance > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::invalid("optimizer settings must be positive"));
        }
        Ok(())
    }

    fn done(&self, f: f64) -> bool {
        self.value_target.is_some_and(|t| f <= t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub theta: ParameterVector,
    pub loss: f64,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MEMORY: usize = 10;
const STEP_MIN: f64 = 1e-10;
const STEP_MAX: f64 = 1e10;

/// Spectral projected gradient with a nonmonotone Armijo search.
fn spg<O: Objective + ?Sized>(
    obj: &O,
    ball: &BallConstraint,
    x0: Vec<f64>,
    settings: &OptimizerSettings,
) -> Result<Minimum> {
    let h = settings.fd_step;
    let mut x = x0;
    let (mut f, mut g) = obj.value_and_gradient(&x, h)?;
    let mut evals = 1;
    let mut best = (f, x.clone());
    let mut history = vec![f];

    let projected_step = |x: &[f64], g: &[f64], a: f64| -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(g).map(|(v, d)| v - a * d).collect();
        ball.project(&mut y);
        y.iter().zip(x).map(|(p, v)| p - v).collect()
    };

    let pg = projected_step(&x, &g, 1.0);
    let pg_norm = pg.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut alpha = if pg_norm > 0.0 { (1.0 / pg_norm).clamp(STEP_MIN, STEP_MAX) } else { 1.0 };

    for _ in 0..settings.max_iterations {
        if settings.done(f) {
            break;
        }
        let d = projected_step(&x, &g, alpha);
        let d_norm = dot(&d, &d).sqrt();
        if d_norm < settings.tolerance {
            break;
        }
        let gd = dot(&g, &d);
        if gd >= 0.0 {
            break;
        }
        let f_ref = history.iter().rev().take(MEMORY).cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let accepted = loop {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(v, s)| v + lambda * s).collect();
            let (fnew, gnew) = obj.value_and_gradient(&xn, h)?;
            evals += 1;
            if fnew <= f_ref + 1e-4 * lambda * gd {
                break Some((xn, fnew, gnew));
            }
            // safeguarded quadratic interpolation
            let q = -0.5 * gd * lambda * lambda / (fnew - f - lambda * gd);
            lambda = if q.is_finite() && q >= 0.1 * lambda && q <= 0.5 * lambda { q } else { 0.5 * lambda };
            if lambda * d_norm < 1e-14 {
                break None;
            }
        };
        let Some((xn, fnew, gnew)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 { (dot(&s, &s) / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX.min(1e3) };
        x = xn;
        f = fnew;
        g = gnew;
        history.push(f);
        if f < best.0 {
            best = (f, x.clone());
        }
    }
    let (loss, theta) = best;
    Ok(Minimum { theta: ParameterVector(theta), loss, evaluations: evals })
}

fn random_direction<R: Rng>(p: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Minimize `objective` over `‖θ − θ0‖ ≤ R`. The first start is `θ0`; the
/// others are random feasible points. Never worse than `objective(θ0)`.
pub fn minimize_in_ball<O: Objective + ?Sized>(
    objective: &O,
    constraint: &BallConstraint,
    settings: &OptimizerSettings,
) -> Result<Minimum> {
    settings.validate()?;
    let p = objective.dim();
    crate::error::check_dim(p, constraint.center.len())?;
    let center = constraint.center.0.clone();
    let f0 = objective.value(&center)?;
    let mut best = Minimum { theta: constraint.center.clone(), loss: f0, evaluations: 1 };
    if constraint.radius == 0.0 || p == 0 {
        return Ok(best);
    }
    let mut evaluations = 1;
    for k in 0..settings.restarts {
        if settings.done(best.loss) {
            break;
        }
        let start = if k == 0 {
            center.clone()
        } else {
            let mut rng = rng_from_seed(derive_seed(settings.seed, &[k as u64]));
            let dir = random_direction(p, &mut rng);
            let scale = constraint.radius * rng.gen::<f64>();
            center.iter().zip(&dir).map(|(c, u)| c + scale * u).collect()
        };
        let run = spg(objective, constraint, start, settings)?;
        evaluations += run.evaluations;
        if run.loss < best.loss {
            best = run;
        }
    }
    // rounding in the projection can overshoot by an ulp
    constraint.project(&mut best.theta.0);
    best.evaluations = evaluations;
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub radius: f64,
    pub raw_min_loss: f64,
    pub envelope_min_loss: f64,
    pub best_theta: ParameterVector,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.radius).collect()
    }

    pub fn envelope(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.envelope_min_loss).collect()
    }

    /// Envelope loss at the largest swept radius not exceeding `r`.
    pub fn envelope_at(&self, r: f64) -> Option<f64> {
        self.points.iter().take_while(|p| p.radius <= r + 1e-12).last().map(|p| p.envelope_min_loss)
    }
}

/// Running minimum.
pub fn envelope(raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .scan(f64::INFINITY, |m, &v| {
            *m = m.min(v);
            Some(*m)
        })
        .collect()
}

/// `count` evenly spaced radii from `start` to `stop` inclusive.
pub fn radius_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !(start > 0.0) || (count > 1 && !(stop > start)) {
        return Err(Error::invalid(format!("bad radius grid {start}:{stop}:{count}")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

/// The default grid: 16 radii from 0.25 to 4.
pub fn default_radii() -> Vec<f64> {
    radius_grid(0.25, 4.0, 16).expect("static grid")
}

/// One independent ball-constrained run per radius. Radii run in parallel;
/// the result does not depend on scheduling.
pub fn radius_sweep<O: Objective + ?Sized>(
    objective: &O,
    theta0: &ParameterVector,
    radii: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepCurve> {
    if radii.is_empty() {
        return Err(Error::invalid("radius list is empty"));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be positive and strictly increasing"));
    }
    let runs: Vec<Minimum> = radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let s = OptimizerSettings { seed: derive_seed(settings.seed, &[i as u64]), ..settings.clone() };
            minimize_in_ball(objective, &BallConstraint::new(theta0.clone(), r)?, &s)
        })
        .collect::<Result<_>>()?;
    let env = envelope(&runs.iter().map(|m| m.loss).collect::<Vec<_>>());
    let points = radii
        .iter()
        .zip(runs)
        .zip(env)
        .map(|((&radius, m), e)| SweepPoint {
            radius,
            raw_min_loss: m.loss,
            envelope_min_loss: e,
            best_theta: m.theta,
            evaluations: m.evaluations,
        })
        .collect();
    Ok(SweepCurve { points })
}

/// Smallest swept radius whose envelope loss is at most `threshold`.
pub fn distance_to_minimum(curve: &SweepCurve, threshold: f64) -> Option<f64> {
    curve.points.iter().find(|p| p.envelope_min_loss <= threshold).map(|p| p.radius)
}

/// `loss_at_center` minus the envelope loss at the largest radius `<= r`.
pub fn improvement_from_curve(curve: &SweepCurve, loss_at_center: f64, r: f64) -> Result<f64> {
    let e = curve
        .envelope_at(r)
        .ok_or_else(|| Error::invalid(format!("radius {r} is below the swept range")))?;
    Ok((loss_at_center - e).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic(min: Vec<f64>) -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
        let p = min.len();
        FnObjective::new(p, move |x: &[f64]| x.iter().zip(&min).map(|(a, b)| (a - b).powi(2)).sum())
    }

    #[test]
    fn zero_radius_returns_center() {
        let obj = quadratic(vec![1.0, 2.0]);
        let ball = BallConstraint::new(vec![0.0, 0.0].into(), 0.0).unwrap();
        let m = minimize_in_ball(&obj, &ball, &OptimizerSettings::default()).unwrap();
        assert_eq!(m.theta.0, vec![0.0, 0.0]);
        assert_eq!(m.loss, 5.0);
    }

    #[test]
    fn interior_minimum_is_found() {
        let obj = quadratic(vec![0.3, -0.2, 0.1]);
        let ball = BallConstraint::new(vec![0.0; 3].into(), 1.0).unwrap();
        let m = minimize_in_ball(&obj, &ball, &OptimizerSettings::default()).unwrap();
        assert!(m.loss < 1e-8, "{}", m.loss);
    }

    #[test]
    fn exterior_minimum_projects_to_boundary() {
        let target = vec![3.0, 4.0];
        let obj = quadratic(target.clone());
        let ball = BallConstraint::new(vec![0.0, 0.0].into(), 2.0).unwrap();
        let m = minimize_in_ball(&obj, &ball, &OptimizerSettings::default()).unwrap();
        // oracle: center + R (t - c)/|t - c|
        assert_abs_diff_eq!(m.theta.0[0], 1.2, epsilon = 1e-6);
        assert_abs_diff_eq!(m.theta.0[1], 1.6, epsilon = 1e-6);
        assert!(ball.contains(&m.theta.0));
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(BallConstraint::new(vec![0.0].into(), -1.0).is_err());
    }

    #[test]
    fn constant_objective_sweep_is_flat() {
        let obj = FnObjective::new(2, |_: &[f64]| 0.7);
        let c = radius_sweep(&obj, &vec![0.0, 0.0].into(), &[0.5, 1.0, 2.0], &OptimizerSettings::default()).unwrap();
        assert!(c.points.iter().all(|p| p.raw_min_loss == 0.7 && p.envelope_min_loss == 0.7));
    }

    #[test]
    fn sweep_rejects_bad_radii() {
        let obj = FnObjective::new(1, |x: &[f64]| x[0]);
        let s = OptimizerSettings::default();
        assert!(radius_sweep(&obj, &vec![0.0].into(), &[], &s).is_err());
        assert!(radius_sweep(&obj, &vec![0.0].into(), &[1.0, 1.0], &s).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_monotone() {
        // multimodal surface so restarts matter
        let obj = FnObjective::new(3, |x: &[f64]| {
            x.iter().map(|v| 1.0 - (2.0 * v).cos() * 0.5 + 0.1 * v * v).sum::<f64>() / 3.0
        });
        let s = OptimizerSettings { seed: 42, ..Default::default() };
        let th = ParameterVector(vec![1.4, -1.1, 0.9]);
        let a = radius_sweep(&obj, &th, &default_radii(), &s).unwrap();
        let b = radius_sweep(&obj, &th, &default_radii(), &s).unwrap();
        assert_eq!(a, b);
        let e = a.envelope();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        let f0 = obj.value(&th.0).unwrap();
        for p in &a.points {
            assert!(p.raw_min_loss <= f0);
            assert!(BallConstraint::new(th.clone(), p.radius).unwrap().contains(&p.best_theta.0));
        }
    }

    #[test]
    fn envelope_and_distance_helpers() {
        assert_eq!(envelope(&[0.5, 0.3, 0.4, 0.1]), vec![0.5, 0.3, 0.3, 0.1]);
        let mk = |r: f64, l: f64| SweepPoint {
            radius: r,
            raw_min_loss: l,
            envelope_min_loss: l,
            best_theta: ParameterVector(vec![]),
            evaluations: 0,
        };
        let c = SweepCurve { points: vec![mk(1.0, 0.5), mk(2.3, 5e-4), mk(3.0, 1e-5)] };
        assert_eq!(distance_to_minimum(&c, 1e-3), Some(2.3));
        assert_eq!(distance_to_minimum(&c, 1e-6), None);
        assert_eq!(improvement_from_curve(&c, 0.5, 1.5).unwrap(), 0.0);
        assert_abs_diff_eq!(improvement_from_curve(&c, 0.6, 2.5).unwrap(), 0.6 - 5e-4);
        assert!(improvement_from_curve(&c, 0.6, 0.5).is_err());
        let g = default_radii();
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[15], 4.0);
    }
}
