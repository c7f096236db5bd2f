use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CMatrix, Complex64, ONE, ZERO};
use crate::error::{check_dim, Error, Result};

/// Allowed Frobenius deviation of `U†U` from the identity.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// A `d × d` unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (r, c) = entries.shape();
        check_dim(r, c)?;
        if r == 0 {
            return Err(Error::invalid("unitary dimension must be positive"));
        }
        let dev = unitarity_deviation(&entries);
        if !(dev <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { entries })
    }

    /// Row-major construction.
    pub fn from_rows(d: usize, rows: &[Complex64]) -> Result<Self> {
        check_dim(d * d, rows.len())?;
        Self::new(CMatrix::from_row_slice(d, d, rows))
    }

    pub(crate) fn from_matrix_unchecked(entries: CMatrix) -> Self {
        debug_assert!(entries.is_square());
        Self { entries }
    }

    pub fn identity(d: usize) -> Self {
        Self { entries: CMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Self { entries: &self.entries * &rhs.entries })
    }

    pub fn scale_phase(&self, rho: f64) -> Self {
        Self { entries: &self.entries * Complex64::from_polar(1.0, rho) }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr(self† other)` without forming the product.
    pub fn trace_inner(&self, other: &UnitaryMatrix) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim(), v.len())?;
        let d = self.dim();
        Ok((0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &UnitaryMatrix) -> Self {
        Self { entries: self.entries.kronecker(&rhs.entries) }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.entries)
    }

    pub fn frobenius_distance(&self, other: &UnitaryMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }

    /// Row-major entries as `(re, im)` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<(f64, f64)>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| (self.entries[(i, j)].re, self.entries[(i, j)].im)).collect())
            .collect()
    }
}

pub(crate) fn unitarity_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let g = m.adjoint() * m;
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { ONE } else { ZERO };
            acc += (g[(i, j)] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<(f64, f64)>>::deserialize(d)?;
        let n = rows.len();
        let flat: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&(re, im)| Complex64::new(re, im)))
            .collect();
        UnitaryMatrix::from_rows(n, &flat).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unitary_and_non_square() {
        let m = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary(_))));
        let m = CMatrix::identity(2, 3);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn trace_inner_matches_product_trace() {
        let i = Complex64::i();
        let y = UnitaryMatrix::from_rows(2, &[ZERO, -i, i, ZERO]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = UnitaryMatrix::from_rows(2, &[h.into(), h.into(), h.into(), (-h).into()]).unwrap();
        let direct = (y.matrix().adjoint() * had.matrix()).trace();
        assert!((y.trace_inner(&had).unwrap() - direct).norm() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let i = Complex64::i();
        let y = UnitaryMatrix::from_rows(2, &[ZERO, -i, i, ZERO]).unwrap();
        let js = serde_json::to_string(&y).unwrap();
        let back: UnitaryMatrix = serde_json::from_str(&js).unwrap();
        assert_eq!(back, y);
    }
}
