use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{param_count, AnsatzSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::qcore::{Complex64, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityReport {
    pub spec: AnsatzSpec,
    pub pairs: usize,
    pub bins: usize,
    pub kl_divergence: f64,
    pub histogram: Vec<f64>,
}

/// Haar probability that the fidelity of two random states in dimension
/// `d` falls in `[a, b]`.
pub fn haar_bin_probability(a: f64, b: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid("Haar fidelity distribution needs d >= 2"));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::invalid(format!("bad bin [{a}, {b}]")));
    }
    let e = (d - 1) as i32;
    Ok((1.0 - a).powi(e) - (1.0 - b).powi(e))
}

fn bin_index(f: f64, bins: usize) -> usize {
    // the last bin is closed on the right
    ((f.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

/// `KL(P̂ || P_Haar)` of a fidelity sample over `bins` equal bins on [0, 1].
/// Returns the divergence and the normalized histogram.
pub fn fidelity_kl(fidelities: &[f64], bins: usize, d: usize) -> Result<(f64, Vec<f64>)> {
    if bins == 0 || fidelities.is_empty() {
        return Err(Error::invalid("need at least one bin and one fidelity"));
    }
    let mut hist = vec![0.0; bins];
    for &f in fidelities {
        hist[bin_index(f, bins)] += 1.0;
    }
    let n = fidelities.len() as f64;
    hist.iter_mut().for_each(|h| *h /= n);
    let mut kl = 0.0;
    for (j, &p) in hist.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let q = haar_bin_probability(j as f64 / bins as f64, (j + 1) as f64 / bins as f64, d)?;
        if q <= 0.0 {
            return Ok((f64::INFINITY, hist));
        }
        kl += p * (p / q).ln();
    }
    Ok((kl, hist))
}

/// Sample `pairs` fidelities `|<0|V(θ)†V(ρ)|0>|²` with uniform angles and
/// compare their histogram with the Haar distribution.
pub fn expressivity<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    pairs: usize,
    bins: usize,
    rng: &mut R,
) -> Result<ExpressivityReport> {
    let circuit = spec.circuit()?;
    let d = circuit.dim();
    if pairs < bins {
        return Err(Error::invalid(format!("need at least as many pairs as bins ({pairs} < {bins})")));
    }
    let p = param_count(spec);
    let run = |theta: &ParameterVector| -> Result<Vec<Complex64>> {
        let mut v = vec![ZERO; d];
        v[0] = Complex64::new(1.0, 0.0);
        circuit.apply(theta.as_slice(), &mut v)?;
        Ok(v)
    };
    let mut fids = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let a = run(&ParameterVector::random(p, rng))?;
        let b = run(&ParameterVector::random(p, rng))?;
        fids.push(crate::qcore::inner(&a, &b).norm_sqr());
    }
    let (kl, histogram) = fidelity_kl(&fids, bins, d)?;
    Ok(ExpressivityReport { spec: *spec, pairs, bins, kl_divergence: kl, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::AnsatzFamily;
    use crate::qcore::haar_random_state;
    use crate::seed::rng_from_seed;

    #[test]
    fn bin_masses_sum_to_one() {
        for d in [2, 5, 32] {
            let s: f64 = (0..75).map(|j| haar_bin_probability(j as f64 / 75.0, (j + 1) as f64 / 75.0, d).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_mass_matches_density_quadrature() {
        // density (d-1)(1-F)^(d-2)
        let d = 6;
        let (a, b) = (0.1, 0.35);
        let m = 20_000;
        let h = (b - a) / m as f64;
        let quad: f64 = (0..m)
            .map(|k| {
                let f = a + (k as f64 + 0.5) * h;
                (d - 1) as f64 * (1.0 - f).powi(d as i32 - 2) * h
            })
            .sum();
        assert!((quad - haar_bin_probability(a, b, d).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(haar_bin_probability(0.0, 1.0, 1).is_err());
        assert!(haar_bin_probability(0.5, 0.2, 4).is_err());
        assert!(fidelity_kl(&[], 10, 4).is_err());
    }

    #[test]
    fn endpoint_one_lands_in_last_bin() {
        let (_, h) = fidelity_kl(&[1.0, 0.0], 4, 4).unwrap();
        assert_eq!(h, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn haar_states_have_small_divergence() {
        let mut rng = rng_from_seed(8);
        let d = 16;
        let f: Vec<f64> = (0..4000)
            .map(|_| {
                let a = haar_random_state(d, &mut rng).unwrap();
                let b = haar_random_state(d, &mut rng).unwrap();
                a.fidelity(&b).unwrap()
            })
            .collect();
        let (kl, _) = fidelity_kl(&f, 75, d).unwrap();
        assert!(kl < 0.05, "{kl}");
    }

    #[test]
    fn identity_like_circuit_is_inexpressive() {
        // a single RX per qubit reaches only a small corner of state space
        let mut rng = rng_from_seed(9);
        let spec = AnsatzSpec::new(AnsatzFamily::CzEntanglement, 1, 1).unwrap();
        let r = expressivity(&spec, 500, 20, &mut rng).unwrap();
        assert!(r.kl_divergence.is_finite());
        assert!((r.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
