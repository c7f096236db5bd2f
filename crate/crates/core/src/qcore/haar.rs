use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, Complex64, StateVector, UnitaryMatrix};
use crate::error::{Error, Result};

fn ginibre_entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// diagonal of `R` rotated onto the positive reals.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let z = CMatrix::from_fn(d, d, |_, _| ginibre_entry(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    UnitaryMatrix::new(q)
}

/// Haar-distributed pure state on `C^d` (trivial reference system).
pub fn haar_random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<StateVector> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let amps: Vec<Complex64> = (0..d).map(|_| ginibre_entry(rng)).collect();
    StateVector::normalized(amps, d, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn draws_are_unitary() {
        let mut rng = rng_from_seed(1);
        for d in [1, 2, 3, 8, 32] {
            let u = haar_random_unitary(d, &mut rng).unwrap();
            assert!(u.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn scalar_case_has_unit_modulus() {
        let mut rng = rng_from_seed(2);
        let u = haar_random_unitary(1, &mut rng).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = rng_from_seed(0);
        assert!(haar_random_unitary(0, &mut rng).is_err());
        assert!(haar_random_state(0, &mut rng).is_err());
    }

    #[test]
    fn states_are_normalized() {
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let s = haar_random_state(16, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn same_seed_same_draw() {
        let a = haar_random_unitary(4, &mut rng_from_seed(9)).unwrap();
        let b = haar_random_unitary(4, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }
}
