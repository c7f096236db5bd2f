use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pqc::{AnsatzFamily, AnsatzSpec, CircuitLoss};
use crate::qcore::UnitaryMatrix;
use crate::samples::{make_max_entangled, zero_separable, SampleKind};

/// Losses of the single-qubit `RZ(θ2)·RX(θ1)` ansatz against `U = V(0, 0)`.
/// `losses[i][j]` is taken at `(angles[i], angles[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub sample_kind: SampleKind,
    pub angles: Vec<f64>,
    pub losses: Vec<Vec<f64>>,
}

impl LandscapeGrid {
    pub fn resolution(&self) -> usize {
        self.angles.len()
    }

    /// Grid indices with loss at most `tol`.
    pub fn zero_set(&self, tol: f64) -> Vec<(usize, usize)> {
        let n = self.resolution();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.losses[i][j] <= tol)
            .collect()
    }
}

/// Both endpoints of `[0, 2π]` are included so that wrap-around is visible.
pub fn landscape_grid(resolution: usize, sample_kind: SampleKind) -> Result<LandscapeGrid> {
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2"));
    }
    let sample = match sample_kind {
        SampleKind::Separable => zero_separable(2)?,
        SampleKind::MaxEntangled => make_max_entangled(2, None)?,
        SampleKind::Nme => return Err(Error::invalid("landscape grids are defined for separable and max_entangled")),
    };
    let spec = AnsatzSpec::new(AnsatzFamily::NoEntanglement, 1, 1)?;
    let obj = CircuitLoss::new(&spec, &UnitaryMatrix::identity(2), &sample)?;
    let step = TAU / (resolution - 1) as f64;
    let angles: Vec<f64> = (0..resolution).map(|i| if i + 1 == resolution { TAU } else { step * i as f64 }).collect();
    let losses = angles
        .iter()
        .map(|&t1| angles.iter().map(|&t2| obj.loss(&[t1, t2])).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok(LandscapeGrid { sample_kind, angles, losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::maxent_loss_from_trace;
    use crate::pqc::build_unitary;

    #[test]
    fn target_point_has_zero_loss() {
        for k in [SampleKind::Separable, SampleKind::MaxEntangled] {
            let g = landscape_grid(11, k).unwrap();
            assert!(g.losses[0][0].abs() < 1e-15);
        }
    }

    #[test]
    fn edges_wrap_around() {
        for k in [SampleKind::Separable, SampleKind::MaxEntangled] {
            let g = landscape_grid(21, k).unwrap();
            let n = g.resolution() - 1;
            for i in 0..=n {
                assert!((g.losses[i][0] - g.losses[i][n]).abs() < 1e-10);
                assert!((g.losses[0][i] - g.losses[n][i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn maxent_grid_matches_trace_formula() {
        let g = landscape_grid(15, SampleKind::MaxEntangled).unwrap();
        let spec = AnsatzSpec::new(AnsatzFamily::NoEntanglement, 1, 1).unwrap();
        let u = UnitaryMatrix::identity(2);
        for (i, &a) in g.angles.iter().enumerate() {
            for (j, &b) in g.angles.iter().enumerate() {
                let v = build_unitary(&spec, &vec![a, b].into()).unwrap();
                let want = 1.0 - u.trace_inner(&v).unwrap().norm_sqr() / 4.0;
                assert!((g.losses[i][j] - want).abs() < 1e-12);
                assert!((maxent_loss_from_trace(&u, &v).unwrap().loss - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nme_and_tiny_resolution_rejected() {
        assert!(landscape_grid(1, SampleKind::Separable).is_err());
        assert!(landscape_grid(5, SampleKind::Nme).is_err());
    }
}
