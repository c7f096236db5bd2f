//! Closed-form landscape geometry around a hypothesis `V`.
//!
//! All distances are phase-invariant Frobenius distances on `PU(d)`. For a
//! fidelity `f`, the associated Bures angle is `γ = arccos(√f)`. A separable
//! sample sees a dimension-free geometry while the maximally entangled
//! sample couples fidelity to `|Tr(U†V)|` and therefore to `d`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::qcore::{CMatrix, Complex64, UnitaryMatrix, ONE, ZERO};
use crate::samples::TrainingSample;

/// Float-noise allowance when clamping into a closed interval.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Maximal reachable fidelity inside a Frobenius ball around `V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallGeometry {
    pub radius: f64,
    /// Bures-angle budget of the ball. Equals `γ_V` once the ball reaches a
    /// zero-loss operator.
    pub beta: f64,
    pub threshold_radius: f64,
    pub max_fidelity: f64,
    pub is_upper_bound: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementValue {
    pub value: f64,
    /// `true` when the value is attained, `false` for an upper bound.
    pub exact: bool,
}

fn clamp_unit(x: f64, what: &str) -> Result<f64> {
    if x.is_nan() || x < -CLAMP_TOLERANCE || x > 1.0 + CLAMP_TOLERANCE {
        return Err(Error::invalid(format!("{what} = {x} outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `arccos` that absorbs overshoot below [`CLAMP_TOLERANCE`] and rejects the rest.
pub fn clamped_acos(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + CLAMP_TOLERANCE {
        return Err(Error::invalid(format!("arccos argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Bures angle `arccos(√f)` on the principal branch.
pub fn bures_angle(f: f64) -> Result<f64> {
    Ok(clamp_unit(f, "fidelity")?.sqrt().acos())
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::invalid(format!("radius {r} must be nonnegative")));
    }
    Ok(())
}

fn check_dim_at_least_two(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("dimension {d} must be at least 2")));
    }
    Ok(())
}

/// `1 − √(f_V f_W) − √((1−f_V)(1−f_W))` = `1 − cos(γ_V − γ_W)`.
fn angular_gap(f_v: f64, f_w: f64) -> Result<f64> {
    let f_v = clamp_unit(f_v, "f_V")?;
    let f_w = clamp_unit(f_w, "f_W")?;
    Ok((1.0 - (f_v * f_w).sqrt() - ((1.0 - f_v) * (1.0 - f_w)).sqrt()).max(0.0))
}

/// Minimal distance from `V` to any operator of fidelity `f_W` on a separable sample.
pub fn min_distance_separable(f_v: f64, f_w: f64) -> Result<f64> {
    Ok((4.0 * angular_gap(f_v, f_w)?).sqrt())
}

/// Lower bound on the distance from `V` to any operator of fidelity `f_W`
/// on the maximally entangled sample.
pub fn min_distance_entangled_lb(f_v: f64, f_w: f64, d: usize) -> Result<f64> {
    check_dim_at_least_two(d)?;
    Ok((2.0 * d as f64 * angular_gap(f_v, f_w)?).sqrt())
}

/// The operator `W̃ = T·V` at fidelity `f_W` closest to `V` for a separable sample.
///
/// `T` rotates the plane spanned by `U|ψ⟩` and `U|γ⟩` (with `|γ⟩` the
/// normalized part of `U†V|ψ⟩` orthogonal to `|ψ⟩`) and is the identity on
/// its complement, so `Tr(V†W̃) = Tr(T) = 2cos(γ_V − γ_W) + d − 2`.
pub fn construct_min_distance_operator(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    psi: &TrainingSample,
    f_w: f64,
) -> Result<UnitaryMatrix> {
    let d = u.dim();
    check_dim(d, v.dim())?;
    check_dim(d, psi.dim_x())?;
    check_dim_at_least_two(d)?;
    let f_w = clamp_unit(f_w, "f_W")?;
    let x_factor = psi.system_factor()?;

    let udv = u.adjoint().compose(v)?;
    let phi = udv.apply(&x_factor)?;
    let overlap: Complex64 = x_factor.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    let mut perp: Vec<Complex64> = phi.iter().zip(&x_factor).map(|(p, s)| p - overlap * s).collect();
    let perp_norm = norm(&perp);
    if perp_norm < 1e-10 {
        perp = orthogonal_unit_vector(&x_factor);
    } else {
        perp.iter_mut().for_each(|z| *z /= perp_norm);
    }

    let f_v = overlap.norm_sqr().min(1.0);
    let gamma_v = f_v.sqrt().acos();
    let gamma_w = f_w.sqrt().acos();
    let (x, y) = ((gamma_v - gamma_w).cos(), (gamma_v - gamma_w).sin());
    let theta = if overlap.norm() == 0.0 { 0.0 } else { overlap.arg() };
    let e = Complex64::from_polar(1.0, theta);

    let b1 = u.apply(&x_factor)?;
    let b2 = u.apply(&perp)?;
    // T = I + (x−1)(|b1⟩⟨b1| + |b2⟩⟨b2|) + e^{iθ}y|b1⟩⟨b2| − e^{−iθ}y|b2⟩⟨b1|
    let xm1 = Complex64::new(x - 1.0, 0.0);
    let t = CMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        id + xm1 * (b1[i] * b1[j].conj() + b2[i] * b2[j].conj()) + e * y * b1[i] * b2[j].conj()
            - e.conj() * y * b2[i] * b1[j].conj()
    });
    UnitaryMatrix::new(t * v.matrix())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// First computational basis vector whose component orthogonal to `psi`
/// is substantial, Gram–Schmidt orthogonalized against `psi`.
fn orthogonal_unit_vector(psi: &[Complex64]) -> Vec<Complex64> {
    let d = psi.len();
    for k in 0..d {
        // e_k − ⟨ψ|e_k⟩ψ
        let c = psi[k].conj();
        let mut r: Vec<Complex64> = psi.iter().map(|p| -c * p).collect();
        r[k] += ONE;
        let n = norm(&r);
        if n > 0.5 {
            r.iter_mut().for_each(|z| *z /= n);
            return r;
        }
    }
    unreachable!("some basis vector has overlap at most 1/d with a unit vector")
}

fn ball_geometry(f_v: f64, radius: f64, scale: f64, is_upper_bound: bool) -> Result<BallGeometry> {
    check_radius(radius)?;
    let f_v = clamp_unit(f_v, "f_V")?;
    let gamma_v = f_v.sqrt().acos();
    let threshold_radius = scale.sqrt() * (1.0 - f_v.sqrt()).max(0.0).sqrt();
    if radius >= threshold_radius {
        return Ok(BallGeometry { radius, beta: gamma_v, threshold_radius, max_fidelity: 1.0, is_upper_bound });
    }
    let beta = clamped_acos(1.0 - radius * radius / scale)?;
    let max_fidelity = (gamma_v - beta).cos().powi(2);
    Ok(BallGeometry { radius, beta, threshold_radius, max_fidelity, is_upper_bound })
}

/// Exact maximal fidelity in the ball of radius `R` for a separable sample.
pub fn ball_max_fidelity_separable(f_v: f64, radius: f64) -> Result<BallGeometry> {
    ball_geometry(f_v, radius, 4.0, false)
}

/// Upper bound on the fidelity in the ball of radius `R` for the maximally
/// entangled sample in dimension `d`.
pub fn ball_max_fidelity_entangled_ub(f_v: f64, radius: f64, d: usize) -> Result<BallGeometry> {
    check_dim_at_least_two(d)?;
    ball_geometry(f_v, radius, 2.0 * d as f64, true)
}

fn improvement_from(f_v: f64, geom: &BallGeometry, exact: bool) -> ImprovementValue {
    let loss = 1.0 - f_v.clamp(0.0, 1.0);
    if geom.max_fidelity >= 1.0 {
        return ImprovementValue { value: loss, exact };
    }
    let gamma_v = f_v.clamp(0.0, 1.0).sqrt().acos();
    let value = ((2.0 * gamma_v - geom.beta).sin() * geom.beta.sin()).clamp(0.0, loss);
    ImprovementValue { value, exact }
}

/// Loss improvement attainable in the ball (separable sample, exact).
pub fn improvement_separable(f_v: f64, radius: f64) -> Result<ImprovementValue> {
    let g = ball_max_fidelity_separable(f_v, radius)?;
    Ok(improvement_from(f_v, &g, true))
}

/// Upper bound on the loss improvement in the ball (maximally entangled sample).
pub fn improvement_entangled_ub(f_v: f64, radius: f64, d: usize) -> Result<ImprovementValue> {
    let g = ball_max_fidelity_entangled_ub(f_v, radius, d)?;
    Ok(improvement_from(f_v, &g, false))
}

/// Upper bound `8/√(2^n)` on the entangled-to-separable improvement ratio
/// at matched starting loss `L`, valid for `0 < R ≤ √(4(1 − √(1−L)))`.
pub fn improvement_ratio_bound(loss: f64, radius: f64, qubits: u32) -> Result<f64> {
    if !(loss > 0.0 && loss <= 1.0) {
        return Err(Error::invalid(format!("loss {loss} must lie in (0, 1]")));
    }
    if qubits == 0 {
        return Err(Error::invalid("qubit count must be positive"));
    }
    let r_max = (4.0 * (1.0 - (1.0 - loss).sqrt())).sqrt();
    if !(radius > 0.0 && radius <= r_max + CLAMP_TOLERANCE) {
        return Err(Error::invalid(format!("radius {radius} outside (0, {r_max}]")));
    }
    Ok(8.0 / 2f64.powf(qubits as f64 / 2.0))
}

/// `(4x/π)(1 − x/π)`, an upper envelope of `sin x` on `[0, π]`.
pub fn sine_upper_envelope(x: f64) -> f64 {
    let p = std::f64::consts::PI;
    4.0 * x / p * (1.0 - x / p)
}

/// Two-piece linear lower envelope of `sin x` on `[0, π]`.
pub fn sine_lower_envelope(x: f64) -> f64 {
    let p = std::f64::consts::PI;
    if x <= p / 2.0 {
        2.0 / p * x
    } else {
        2.0 - 2.0 / p * x
    }
}
