use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::optimize::{distance_to_minimum, improvement_from_curve, radius_sweep, OptimizerSettings, SweepCurve, MINIMUM_THRESHOLD};
use crate::pqc::{build_unitary, expressivity, param_count, AnsatzFamily, AnsatzSpec, CircuitLoss, ParameterVector};
use crate::samples::{entanglement_entropy, make_max_entangled, make_nme, schmidt_rank, zero_separable, SampleKind, TrainingSample};
use crate::seed::{derive_seed, rng_from_seed};

/// Stop a constrained run once the loss is numerically zero.
const VALUE_TARGET: f64 = 1e-12;

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One radius sweep of one sample for one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub experiment: Experiment,
    pub ansatz: AnsatzFamily,
    pub layers: usize,
    pub qubits: usize,
    pub sample_kind: SampleKind,
    /// Squared Schmidt coefficients of the sample.
    pub coefficients: Vec<f64>,
    pub schmidt_rank: usize,
    #[serde(with = "nan_as_null")]
    pub entanglement_entropy: f64,
    pub seed: u64,
    #[serde(with = "nan_as_null")]
    pub start_loss: f64,
    /// Radius at which the improvement is read off.
    #[serde(with = "nan_as_null")]
    pub r_max: f64,
    pub distance_to_min: Option<f64>,
    #[serde(with = "nan_as_null")]
    pub improvement: f64,
    pub curve: SweepCurve,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityRecord {
    pub ansatz: AnsatzFamily,
    pub layers: usize,
    pub qubits: usize,
    pub pairs: usize,
    pub bins: usize,
    pub seed: u64,
    pub expressivity: f64,
}

fn family_index(f: AnsatzFamily) -> u64 {
    AnsatzFamily::ALL.iter().position(|&g| g == f).expect("listed family") as u64
}

fn job_seed(master: u64, spec: &AnsatzSpec, rep: usize) -> u64 {
    derive_seed(master, &[family_index(spec.family), spec.layers as u64, rep as u64])
}

struct Job {
    spec: AnsatzSpec,
    seed: u64,
}

struct SampleSet {
    samples: Vec<TrainingSample>,
    /// Emitted samples; a trailing reference sample may be hidden.
    emitted: usize,
    separable: usize,
}

fn sample_set(config: &ExperimentConfig) -> Result<SampleSet> {
    let d = config.dim();
    let mut samples = Vec::new();
    if config.experiment == Experiment::NmeSweep {
        for c in config.nme_spectra() {
            samples.push(make_nme(&c, d)?);
        }
    } else {
        for kind in &config.sample_kinds {
            samples.push(match kind {
                SampleKind::Separable => zero_separable(d)?,
                SampleKind::MaxEntangled => make_max_entangled(d, None)?,
                SampleKind::Nme => return Err(Error::invalid("nme samples belong to nme_sweep")),
            });
        }
    }
    let emitted = samples.len();
    let separable = match samples.iter().position(|s| s.kind() == SampleKind::Separable) {
        Some(i) => i,
        None => {
            samples.push(zero_separable(d)?);
            samples.len() - 1
        }
    };
    Ok(SampleSet { samples, emitted, separable })
}

struct Sweep {
    start_loss: f64,
    curve: SweepCurve,
}

fn run_job(config: &ExperimentConfig, set: &SampleSet, job: &Job) -> Result<Vec<Sweep>> {
    let mut rng = rng_from_seed(job.seed);
    let p = param_count(&job.spec);
    let theta_target = ParameterVector::random(p, &mut rng);
    let theta0 = ParameterVector::random(p, &mut rng);
    let u = build_unitary(&job.spec, &theta_target)?;
    set.samples
        .par_iter()
        .enumerate()
        .map(|(i, sample)| {
            let obj = CircuitLoss::new(&job.spec, &u, sample)?;
            let settings = OptimizerSettings {
                max_iterations: config.max_iterations,
                restarts: config.restarts,
                seed: derive_seed(job.seed, &[i as u64 + 1]),
                value_target: Some(VALUE_TARGET),
                ..OptimizerSettings::default()
            };
            let start_loss = obj.loss(theta0.as_slice())?;
            let curve = radius_sweep(&obj, &theta0, &config.radii, &settings)?;
            Ok(Sweep { start_loss, curve })
        })
        .collect()
}

fn records_for_job(config: &ExperimentConfig, set: &SampleSet, job: &Job) -> Vec<RunRecord> {
    let base = |sample: &TrainingSample| RunRecord {
        run_id: 0,
        experiment: config.experiment,
        ansatz: job.spec.family,
        layers: job.spec.layers,
        qubits: job.spec.qubits,
        sample_kind: sample.kind(),
        coefficients: sample.schmidt().squared(),
        schmidt_rank: schmidt_rank(sample),
        entanglement_entropy: entanglement_entropy(sample),
        seed: job.seed,
        start_loss: f64::NAN,
        r_max: f64::NAN,
        distance_to_min: None,
        improvement: f64::NAN,
        curve: SweepCurve { points: Vec::new() },
        error: None,
    };
    let emitted = &set.samples[..set.emitted];
    let sweeps = match run_job(config, set, job) {
        Ok(s) => s,
        Err(e) => {
            return emitted
                .iter()
                .map(|s| RunRecord { error: Some(e.to_string()), ..base(s) })
                .collect();
        }
    };
    let sep = &sweeps[set.separable].curve;
    let r_max = distance_to_minimum(sep, MINIMUM_THRESHOLD).unwrap_or(*config.radii.last().expect("nonempty radii"));
    emitted
        .iter()
        .zip(sweeps)
        .map(|(sample, sw)| {
            let improvement = improvement_from_curve(&sw.curve, sw.start_loss, r_max);
            let (improvement, error) = match improvement {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            RunRecord {
                start_loss: sw.start_loss,
                r_max,
                distance_to_min: distance_to_minimum(&sw.curve, MINIMUM_THRESHOLD),
                improvement,
                curve: sw.curve,
                error,
                ..base(sample)
            }
        })
        .collect()
}

/// Run a sweep experiment (`distance`, `improvement` or `nme_sweep`).
///
/// Per repetition a target `U = V(θ_target)` and a start `θ0` are drawn,
/// every sample is swept over the radii, and the improvement is read off at
/// the radius where the separable curve first reaches the threshold (or the
/// largest radius). `nme_sweep` output is ordered by entanglement entropy.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    if !config.experiment.is_sweep() {
        return Err(Error::invalid(format!("{} is not a sweep experiment", config.experiment.as_str())));
    }
    let set = sample_set(config)?;
    let jobs: Vec<Job> = config
        .specs()?
        .into_iter()
        .flat_map(|spec| (0..config.repetitions).map(move |rep| (spec, rep)))
        .map(|(spec, rep)| Job { spec, seed: job_seed(config.master_seed, &spec, rep) })
        .collect();
    let per_job: Vec<Vec<RunRecord>> = jobs.par_iter().map(|job| records_for_job(config, &set, job)).collect();

    // (sample index, job index) for nme sweeps, (job, sample) otherwise
    let mut keyed: Vec<((usize, usize), RunRecord)> = per_job
        .into_iter()
        .enumerate()
        .flat_map(|(j, recs)| recs.into_iter().enumerate().map(move |(s, r)| ((j, s), r)))
        .collect();
    if config.experiment == Experiment::NmeSweep {
        keyed.sort_by_key(|((j, s), _)| (*s, *j));
    }
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, r))| RunRecord { run_id: i as u64, ..r })
        .collect())
}

/// [`run_experiment`] on a single worker thread.
pub fn run_experiment_sequential(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| run_experiment(config))
}

/// Expressivity of every configured `(family, layers)`.
pub fn run_expressivity(config: &ExperimentConfig) -> Result<Vec<ExpressivityRecord>> {
    config.validate()?;
    config
        .specs()?
        .par_iter()
        .map(|spec| {
            let seed = derive_seed(config.master_seed, &[family_index(spec.family), spec.layers as u64]);
            let r = expressivity(spec, config.expressivity_pairs, config.bins, &mut rng_from_seed(seed))?;
            Ok(ExpressivityRecord {
                ansatz: spec.family,
                layers: spec.layers,
                qubits: spec.qubits,
                pairs: r.pairs,
                bins: r.bins,
                seed,
                expressivity: r.kl_divergence,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::AnsatzEntry;

    fn small(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            ansatz: vec![
                AnsatzEntry { family: AnsatzFamily::CzEntanglement, layers: vec![1, 2] },
                AnsatzEntry { family: AnsatzFamily::NoEntanglement, layers: vec![1, 2] },
            ],
            qubits: 2,
            repetitions: 3,
            radii: vec![0.5, 1.0, 2.0],
            max_iterations: 50,
            restarts: 2,
            ..ExperimentConfig::desk_scale(experiment, 11)
        }
    }

    #[test]
    fn cardinality_and_invariants() {
        let recs = run_experiment(&small(Experiment::Distance)).unwrap();
        // 2 families x 2 layer counts x 3 reps x 2 sample kinds
        assert_eq!(recs.len(), 24);
        for kind in [SampleKind::Separable, SampleKind::MaxEntangled] {
            assert_eq!(recs.iter().filter(|r| r.sample_kind == kind).count(), 12);
        }
        for r in &recs {
            assert!(r.error.is_none());
            assert!((0.0..=1.0).contains(&r.start_loss));
            assert!(r.improvement <= r.start_loss + 1e-9);
            let env = r.curve.envelope_at(r.r_max).unwrap();
            assert!((r.improvement - (r.start_loss - env)).abs() < 1e-9);
        }
        let ids: Vec<u64> = recs.iter().map(|r| r.run_id).collect();
        assert_eq!(ids, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let c = small(Experiment::Improvement);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment_sequential(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nme_sweep_is_ordered_by_entropy() {
        let c = ExperimentConfig { repetitions: 2, ..small(Experiment::NmeSweep) };
        let recs = run_experiment(&c).unwrap();
        assert!(recs.windows(2).all(|w| w[0].entanglement_entropy <= w[1].entanglement_entropy + 1e-12));
        let n_spectra = c.nme_spectra().len();
        assert_eq!(recs.len(), n_spectra * 2 * 2 * 2);
    }

    #[test]
    fn non_sweep_experiment_rejected() {
        assert!(run_experiment(&small(Experiment::Expressivity)).is_err());
    }

    #[test]
    fn expressivity_records_one_per_spec() {
        let c = ExperimentConfig { expressivity_pairs: 200, bins: 20, ..small(Experiment::Expressivity) };
        let r = run_expressivity(&c).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|x| x.expressivity.is_finite() && x.expressivity >= 0.0));
    }
}
