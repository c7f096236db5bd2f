//! Training samples with prescribed Schmidt spectra.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::qcore::{
    haar_random_state, schmidt_decompose, CMatrix, Complex64, SchmidtData, StateVector, ONE, ZERO,
};

/// Tolerance on `Σ c_j = 1` and on uniformity of maximally entangled spectra.
pub const SPECTRUM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Separable,
    MaxEntangled,
    Nme,
}

impl SampleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleKind::Separable => "separable",
            SampleKind::MaxEntangled => "max_entangled",
            SampleKind::Nme => "nme",
        }
    }
}

impl std::fmt::Display for SampleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A training input `|α⟩ ∈ H_X ⊗ H_R` together with its Schmidt data.
#[derive(Clone, Debug)]
pub struct TrainingSample {
    state: StateVector,
    schmidt: SchmidtData,
    kind: SampleKind,
}

impl TrainingSample {
    /// Decomposes an arbitrary state and classifies it.
    pub fn from_state(state: StateVector) -> Result<Self> {
        let schmidt = schmidt_decompose(&state)?;
        let kind = classify(&schmidt, state.dim_x());
        Ok(Self { state, schmidt, kind })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn schmidt(&self) -> &SchmidtData {
        &self.schmidt
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn dim_x(&self) -> usize {
        self.state.dim_x()
    }

    pub fn dim_r(&self) -> usize {
        self.state.dim_r()
    }

    /// The `H_X` factor of a separable sample.
    pub fn system_factor(&self) -> Result<Vec<Complex64>> {
        if self.kind != SampleKind::Separable {
            return Err(Error::invalid("sample is not separable"));
        }
        Ok(self.schmidt.basis_x.column(0).iter().copied().collect())
    }

    pub fn to_record(&self) -> SampleRecord {
        SampleRecord {
            kind: self.kind,
            dim_x: self.dim_x(),
            dim_r: self.dim_r(),
            coefficients: self.schmidt.squared(),
            amplitudes: self.state.amplitudes().iter().map(|a| (a.re, a.im)).collect(),
        }
    }
}

fn classify(schmidt: &SchmidtData, dim_x: usize) -> SampleKind {
    if schmidt.rank == 1 {
        return SampleKind::Separable;
    }
    let uniform = 1.0 / dim_x as f64;
    if schmidt.rank == dim_x
        && schmidt.squared().iter().all(|c| (c - uniform).abs() <= SPECTRUM_TOLERANCE)
    {
        SampleKind::MaxEntangled
    } else {
        SampleKind::Nme
    }
}

/// Serialized form of a [`TrainingSample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub kind: SampleKind,
    pub dim_x: usize,
    pub dim_r: usize,
    /// Squared Schmidt coefficients `c_j`.
    pub coefficients: Vec<f64>,
    pub amplitudes: Vec<(f64, f64)>,
}

impl TryFrom<SampleRecord> for TrainingSample {
    type Error = Error;

    fn try_from(rec: SampleRecord) -> Result<Self> {
        let amps = rec.amplitudes.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let sample = TrainingSample::from_state(StateVector::new(amps, rec.dim_x, rec.dim_r)?)?;
        if sample.kind != rec.kind {
            return Err(Error::invalid(format!(
                "recorded kind {} disagrees with decomposed kind {}",
                rec.kind, sample.kind
            )));
        }
        Ok(sample)
    }
}

/// `|x⟩ ⊗ |r⟩` from explicit normalized factors.
pub fn make_separable(psi_x: &[Complex64], psi_r: &[Complex64]) -> Result<TrainingSample> {
    if psi_x.is_empty() || psi_r.is_empty() {
        return Err(Error::invalid("factors must be nonempty"));
    }
    TrainingSample::from_state(StateVector::product(psi_x, psi_r)?)
}

/// Product of two independent Haar-random factors on `C^d ⊗ C^d`.
pub fn random_separable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<TrainingSample> {
    let x = haar_random_state(d, rng)?;
    let r = haar_random_state(d, rng)?;
    make_separable(x.amplitudes(), r.amplitudes())
}

/// `|0⟩ ⊗ |0⟩` on `C^d ⊗ C^d`.
pub fn zero_separable(d: usize) -> Result<TrainingSample> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    TrainingSample::from_state(StateVector::basis(d, d, 0, 0)?)
}

/// `(1/√d) Σ_j |x_j⟩|y_j⟩`, computational bases unless `basis` is given.
pub fn make_max_entangled(d: usize, basis: Option<(&CMatrix, &CMatrix)>) -> Result<TrainingSample> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let c = vec![1.0 / d as f64; d];
    from_spectrum(&c, d, basis)
}

/// `Σ_j √c_j |j⟩|j⟩` for a probability vector with `|c| ≤ d`.
pub fn make_nme(c: &[f64], d: usize) -> Result<TrainingSample> {
    from_spectrum(c, d, None)
}

/// `Σ_j √c_j |x_j⟩|y_j⟩` with explicit orthonormal bases (columns).
pub fn make_nme_with_basis(c: &[f64], basis_x: &CMatrix, basis_y: &CMatrix) -> Result<TrainingSample> {
    let d = basis_x.nrows();
    from_spectrum(c, d, Some((basis_x, basis_y)))
}

fn validate_spectrum(c: &[f64], d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if c.is_empty() || c.len() > d {
        return Err(Error::invalid(format!("spectrum length {} must lie in 1..={d}", c.len())));
    }
    if let Some(bad) = c.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::invalid(format!("negative or non-finite coefficient {bad}")));
    }
    let sum: f64 = c.iter().sum();
    if (sum - 1.0).abs() > SPECTRUM_TOLERANCE {
        return Err(Error::invalid(format!("coefficients sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_orthonormal_columns(b: &CMatrix, needed: usize) -> Result<()> {
    if b.ncols() < needed {
        return Err(Error::invalid(format!("basis has {} columns, need {needed}", b.ncols())));
    }
    let cols = b.columns(0, needed);
    let g = cols.adjoint() * cols;
    let mut dev = 0.0;
    for i in 0..needed {
        for j in 0..needed {
            let t = if i == j { ONE } else { ZERO };
            dev += (g[(i, j)] - t).norm_sqr();
        }
    }
    let dev = dev.sqrt();
    if dev > 1e-10 {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(())
}

fn from_spectrum(c: &[f64], d: usize, basis: Option<(&CMatrix, &CMatrix)>) -> Result<TrainingSample> {
    validate_spectrum(c, d)?;
    let mut m = CMatrix::zeros(d, d);
    match basis {
        None => {
            for (j, &cj) in c.iter().enumerate() {
                m[(j, j)] = Complex64::new(cj.sqrt(), 0.0);
            }
        }
        Some((bx, by)) => {
            check_dim(d, bx.nrows())?;
            check_dim(d, by.nrows())?;
            check_orthonormal_columns(bx, c.len())?;
            check_orthonormal_columns(by, c.len())?;
            for (j, &cj) in c.iter().enumerate() {
                let s = cj.sqrt();
                for i in 0..d {
                    for k in 0..d {
                        m[(i, k)] += bx[(i, j)] * by[(k, j)] * s;
                    }
                }
            }
        }
    }
    TrainingSample::from_state(StateVector::from_matrix(&m)?)
}

/// Von Neumann entropy of the reduced state, in nats.
pub fn entanglement_entropy(sample: &TrainingSample) -> f64 {
    sample.schmidt.entropy()
}

/// Number of Schmidt coefficients above [`crate::qcore::RANK_TOLERANCE`].
pub fn schmidt_rank(sample: &TrainingSample) -> usize {
    sample.schmidt.rank
}

/// Interpolated spectra `λ·uniform(r) + (1−λ)·e_1` for every rank
/// `r ∈ 1..=d` and `λ ∈ {0.25, 0.5, 0.75, 1}`, deduplicated and ordered by
/// entropy (ties broken by rank, then λ).
pub fn nme_coefficient_families(d: usize) -> Vec<Vec<f64>> {
    const LAMBDAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in 1..=d {
        for &lam in &LAMBDAS {
            let mut c = vec![lam / r as f64; r];
            c[0] += 1.0 - lam;
            if !out.iter().any(|e| same_spectrum(e, &c)) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| spectrum_entropy(a).total_cmp(&spectrum_entropy(b)));
    out
}

fn same_spectrum(a: &[f64], b: &[f64]) -> bool {
    let n = a.len().max(b.len());
    (0..n).all(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs() < 1e-12)
}

/// `-Σ c ln c` evaluated directly on a spectrum.
pub fn spectrum_entropy(c: &[f64]) -> f64 {
    c.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>().max(0.0)
}
