//! Chained self-training transfer and the seeded trial harness.
//!
//! A transfer step trains a classifier on one domain (the source, whose
//! labels may themselves be predictions) and labels another (the target).
//! Along a chain, each step's predicted labels become the training labels of
//! the next step, so damage labels travel from the bridge to the aeroplane
//! through the intermediate structures.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::self_align;
use crate::error::{domain, Error, Result};
use crate::kernel::{gfk_matrix, gram, linear_gram};
use crate::spectral_sim::{
    assemble_model, chain_parameters, natural_frequencies, sample_dataset, Condition, DamageSpec,
    ModalDataset, StiffnessSchedule, StructureParams, DEFAULT_ELEMENTS, DEFAULT_MODES,
};
use crate::subspace::{pca_basis, principal_decomposition, select_dimension};
use crate::svm::{predict, train};

/// Intermediate counts of the reference experiment.
pub const REFERENCE_INTERMEDIATES: [usize; 5] = [0, 1, 3, 13, 78];

/// Kernel used by the classifier in every transfer step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Gfk,
}

impl KernelKind {
    pub const ALL: [KernelKind; 2] = [KernelKind::Linear, KernelKind::Gfk];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Gfk => "gfk",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "gfk" => Ok(KernelKind::Gfk),
            other => Err(domain(format!(
                "unknown kernel '{other}', expected one of {{linear, gfk}}"
            ))),
        }
    }
}

/// Everything a transfer step needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSettings {
    pub kernel: KernelKind,
    pub svm_c: f64,
    pub variance_threshold: f64,
}

/// Full description of a chain experiment. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Structures in the chain, bridge and aeroplane included.
    pub n_structures: usize,
    pub n_elements: usize,
    pub n_modes: usize,
    /// Samples per condition per structure.
    pub n_reps: usize,
    pub noise_coeff: f64,
    pub damage: DamageSpec,
    pub stiffness_schedule: StiffnessSchedule,
    /// Fraction of each non-source structure's healthy samples whose label
    /// is visible.
    pub labeled_normal_fraction: f64,
    pub svm_c: f64,
    pub variance_threshold: f64,
    pub kernels: Vec<KernelKind>,
    pub intermediates: Vec<usize>,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_structures: 80,
            n_elements: DEFAULT_ELEMENTS,
            n_modes: DEFAULT_MODES,
            n_reps: 100,
            noise_coeff: 0.01,
            damage: DamageSpec::default(),
            stiffness_schedule: StiffnessSchedule::Logarithmic,
            labeled_normal_fraction: 0.5,
            svm_c: 1.0,
            variance_threshold: 0.95,
            kernels: KernelKind::ALL.to_vec(),
            intermediates: REFERENCE_INTERMEDIATES.to_vec(),
            n_trials: 100,
            base_seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_structures < 2 {
            return Err(domain("n_structures must be at least 2"));
        }
        if self.n_modes == 0 || self.n_modes > 2 * (self.n_elements + 1) {
            return Err(domain(format!("n_modes {} out of range", self.n_modes)));
        }
        if self.n_reps < 2 {
            return Err(domain("n_reps must be at least 2"));
        }
        if !(self.noise_coeff >= 0.0 && self.noise_coeff.is_finite()) {
            return Err(domain("noise_coeff must be non-negative"));
        }
        self.damage.validate()?;
        if !(self.labeled_normal_fraction > 0.0 && self.labeled_normal_fraction <= 1.0) {
            return Err(domain("labeled_normal_fraction must lie in (0, 1]"));
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return Err(domain("svm_c must be positive"));
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold < 1.0) {
            return Err(domain("variance_threshold must lie in (0, 1)"));
        }
        if self.kernels.is_empty() {
            return Err(domain("at least one kernel is required"));
        }
        for &k in &self.intermediates {
            if k + 2 > self.n_structures {
                return Err(domain(format!(
                    "{k} intermediates do not fit in a chain of {} structures",
                    self.n_structures
                )));
            }
        }
        Ok(())
    }

    pub fn settings(&self, kernel: KernelKind) -> TransferSettings {
        TransferSettings {
            kernel,
            svm_c: self.svm_c,
            variance_threshold: self.variance_threshold,
        }
    }
}

/// Noise-free healthy and damaged frequencies of every chain member.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureChain {
    pub params: Vec<StructureParams>,
    pub healthy: Vec<Vec<f64>>,
    pub damaged: Vec<Vec<f64>>,
}

impl StructureChain {
    /// Uniform morph from bridge to aeroplane as described by `config`.
    pub fn build(config: &ChainConfig) -> Result<Self> {
        let params = chain_parameters(config.n_structures, config.stiffness_schedule)?;
        Self::from_params(params, &config.damage, config.n_elements, config.n_modes)
    }

    pub fn from_params(
        params: Vec<StructureParams>,
        damage: &DamageSpec,
        n_elements: usize,
        n_modes: usize,
    ) -> Result<Self> {
        let solved: Vec<(Vec<f64>, Vec<f64>)> = params
            .par_iter()
            .map(|p| {
                let (m, k) = assemble_model(p, None, n_elements)?;
                let healthy = natural_frequencies(&m, &k, n_modes)?;
                let (m, k) = assemble_model(p, Some(damage), n_elements)?;
                let damaged = natural_frequencies(&m, &k, n_modes)?;
                Ok((healthy, damaged))
            })
            .collect::<Result<_>>()?;
        let (healthy, damaged) = solved.into_iter().unzip();
        Ok(Self {
            params,
            healthy,
            damaged,
        })
    }

    pub fn len(&self) -> usize {
        self.healthy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.healthy.is_empty()
    }

    /// Noisy dataset of member `index` for one trial. Member `index` draws
    /// from its own stream of the trial's generator, so datasets do not
    /// depend on which other members are sampled. The source (index 0) is
    /// fully labelled; every other member shows only a fraction of its
    /// normal labels.
    pub fn sample(&self, index: usize, seed: u64, config: &ChainConfig) -> Result<ModalDataset> {
        if index >= self.len() {
            return Err(domain(format!(
                "structure {index} outside chain of {}",
                self.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let ds = sample_dataset(
            &self.healthy[index],
            &self.damaged[index],
            config.n_reps,
            config.noise_coeff,
            index,
            &mut rng,
        )?;
        if index == 0 {
            Ok(ds)
        } else {
            ds.with_visible_normals(config.labeled_normal_fraction, &mut rng)
        }
    }
}

/// `k` chain indices, equally spaced and rounded, strictly inside
/// `(0, chain_size − 1)`.
pub fn select_intermediates(chain_size: usize, k: usize) -> Result<Vec<usize>> {
    if chain_size < 2 || k + 2 > chain_size {
        return Err(domain(format!(
            "cannot place {k} intermediates in a chain of {chain_size} structures"
        )));
    }
    let span = (chain_size - 1) as f64;
    Ok((1..=k)
        .map(|i| (i as f64 * span / (k + 1) as f64).round() as usize)
        .collect())
}

/// Result of one transfer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// One label per target sample.
    pub predictions: Vec<Condition>,
    /// The source labels held a single class, so no classifier was trained
    /// and every target sample received that class.
    pub collapsed: bool,
    /// Subspace dimension used by the geodesic flow kernel.
    pub subspace_dim: Option<usize>,
}

/// Labels `target` using a classifier trained on `source` with
/// `source_labels` (one per source row).
///
/// Both domains are aligned with their own normal-condition statistics.
/// With the geodesic flow kernel, PCA subspaces of the aligned domains
/// define the kernel matrix. Target rows with a visible normal label keep
/// that label.
pub fn transfer_step(
    source: &ModalDataset,
    source_labels: &[Condition],
    target: &ModalDataset,
    settings: &TransferSettings,
) -> Result<StepOutcome> {
    if source_labels.len() != source.n_samples() {
        return Err(crate::error::dimension(format!(
            "{} labels for {} source samples",
            source_labels.len(),
            source.n_samples()
        )));
    }
    if source.n_features() != target.n_features() {
        return Err(crate::error::dimension(format!(
            "source has {} features, target {}",
            source.n_features(),
            target.n_features()
        )));
    }
    let src = self_align(source)?;
    let tgt = self_align(target)?;

    let first = source_labels.first().copied().unwrap_or(Condition::Healthy);
    let single_class = source_labels.iter().all(|&c| c == first);

    let (mut predictions, subspace_dim) = if single_class {
        (vec![first; target.n_samples()], None)
    } else {
        let y: Vec<f64> = source_labels.iter().map(|c| c.sign()).collect();
        let (train_gram, cross_gram, dim) = match settings.kernel {
            KernelKind::Linear => (
                linear_gram(&src.features, &src.features)?,
                linear_gram(&tgt.features, &src.features)?,
                None,
            ),
            KernelKind::Gfk => {
                let (g, d) =
                    domain_kernel(&src.features, &tgt.features, settings.variance_threshold)?;
                (
                    gram(&g, &src.features, &src.features)?,
                    gram(&g, &tgt.features, &src.features)?,
                    Some(d),
                )
            }
        };
        let model = train(&train_gram, &y, settings.svm_c)?;
        let signs = predict(&model, &cross_gram)?;
        (signs.into_iter().map(Condition::from_sign).collect(), dim)
    };

    for (i, visible) in target.label_visible.iter().enumerate() {
        if *visible {
            predictions[i] = target.condition_labels[i];
        }
    }
    Ok(StepOutcome {
        predictions,
        collapsed: single_class,
        subspace_dim,
    })
}

/// Geodesic flow kernel between the PCA subspaces of two aligned domains,
/// with the subspace dimension that was used.
pub fn domain_kernel(
    source: &DMatrix<f64>,
    target: &DMatrix<f64>,
    variance_threshold: f64,
) -> Result<(crate::kernel::GfkMatrix, usize)> {
    let d = select_dimension(source, target, variance_threshold);
    let s1 = pca_basis(source, d)?;
    let s2 = pca_basis(target, d)?;
    let decomp = principal_decomposition(&s1, &s2)?;
    Ok((gfk_matrix(&decomp)?, d))
}

/// Outcome of propagating labels along a sequence of domains.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    /// Labels assigned to the last domain.
    pub predictions: Vec<Condition>,
    pub collapsed: bool,
    pub steps: usize,
}

/// Transfers labels from `path[0]` (whose true labels are used) through
/// every following domain in order.
pub fn run_path(path: &[&ModalDataset], settings: &TransferSettings) -> Result<PathOutcome> {
    if path.len() < 2 {
        return Err(domain("a transfer path needs at least 2 domains"));
    }
    let mut labels = path[0].condition_labels.clone();
    let mut collapsed = false;
    for pair in path.windows(2) {
        let step = transfer_step(pair[0], &labels, pair[1], settings)?;
        collapsed |= step.collapsed;
        labels = step.predictions;
    }
    Ok(PathOutcome {
        predictions: labels,
        collapsed,
        steps: path.len() - 1,
    })
}

/// Fraction of truly damaged samples labelled damaged.
pub fn damage_accuracy(dataset: &ModalDataset, predictions: &[Condition]) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for (truth, pred) in dataset.condition_labels.iter().zip(predictions) {
        if *truth == Condition::Damaged {
            total += 1;
            if *pred == Condition::Damaged {
                hits += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Direct and chained accuracy at the final structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRun {
    pub direct_accuracy: f64,
    pub chain_accuracy: f64,
    pub collapsed: bool,
}

/// Direct transfer from the first to the last dataset, and chained transfer
/// through `k` equally spaced intermediates.
pub fn run_chain(
    datasets: &[ModalDataset],
    k: usize,
    settings: &TransferSettings,
) -> Result<ChainRun> {
    if datasets.len() < 2 {
        return Err(domain("a chain needs at least 2 structures"));
    }
    let last = datasets.len() - 1;
    let direct = run_path(&[&datasets[0], &datasets[last]], settings)?;
    let mut path: Vec<&ModalDataset> = vec![&datasets[0]];
    path.extend(
        select_intermediates(datasets.len(), k)?
            .into_iter()
            .map(|i| &datasets[i]),
    );
    path.push(&datasets[last]);
    let chained = run_path(&path, settings)?;
    Ok(ChainRun {
        direct_accuracy: damage_accuracy(&datasets[last], &direct.predictions),
        chain_accuracy: damage_accuracy(&datasets[last], &chained.predictions),
        collapsed: direct.collapsed || chained.collapsed,
    })
}

/// One row of the experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub kernel: KernelKind,
    pub n_intermediates: usize,
    pub direct_accuracy: f64,
    pub chain_accuracy: f64,
    pub collapsed: bool,
    /// Error message of a failed trial; its accuracies are 0 and it is left
    /// out of the aggregates.
    pub failure: Option<String>,
}

/// Aggregates of one (kernel, intermediates) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub kernel: KernelKind,
    pub n_intermediates: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    pub mean_direct_accuracy: f64,
    pub mean_chain_accuracy: f64,
    /// Fraction of trials with chain accuracy strictly above direct.
    pub chain_beats_direct: f64,
    /// Fraction of trials with chain accuracy at least direct.
    pub chain_at_least_direct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainExperimentResult {
    pub config: ChainConfig,
    /// Sorted by (trial, kernel, n_intermediates).
    pub trials: Vec<TrialRecord>,
    /// Sorted by (kernel, n_intermediates).
    pub cells: Vec<CellSummary>,
}

impl ChainExperimentResult {
    pub fn cell(&self, kernel: KernelKind, n_intermediates: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.kernel == kernel && c.n_intermediates == n_intermediates)
    }

    /// Per-trial rows of one cell.
    pub fn rows(
        &self,
        kernel: KernelKind,
        n_intermediates: usize,
    ) -> impl Iterator<Item = &TrialRecord> {
        self.trials
            .iter()
            .filter(move |t| t.kernel == kernel && t.n_intermediates == n_intermediates)
    }
}

/// Recomputes cell aggregates from trial rows.
pub fn aggregate(trials: &[TrialRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(KernelKind, usize)> = trials
        .iter()
        .map(|t| (t.kernel, t.n_intermediates))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(kernel, k)| {
            let rows: Vec<&TrialRecord> = trials
                .iter()
                .filter(|t| t.kernel == kernel && t.n_intermediates == k)
                .collect();
            let ok: Vec<&&TrialRecord> = rows.iter().filter(|t| t.failure.is_none()).collect();
            let n = ok.len();
            let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
                if n == 0 {
                    0.0
                } else {
                    ok.iter().map(|t| f(t)).sum::<f64>() / n as f64
                }
            };
            CellSummary {
                kernel,
                n_intermediates: k,
                n_trials: n,
                n_failed: rows.len() - n,
                mean_direct_accuracy: mean(&|t| t.direct_accuracy),
                mean_chain_accuracy: mean(&|t| t.chain_accuracy),
                chain_beats_direct: mean(&|t| {
                    f64::from(u8::from(t.chain_accuracy > t.direct_accuracy))
                }),
                chain_at_least_direct: mean(&|t| {
                    f64::from(u8::from(t.chain_accuracy >= t.direct_accuracy))
                }),
            }
        })
        .collect()
}

/// Seed of trial `index`.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// All (kernel, intermediates) rows of one trial.
pub fn run_trial(chain: &StructureChain, config: &ChainConfig, trial: usize) -> Vec<TrialRecord> {
    let seed = trial_seed(config.base_seed, trial);
    let datasets: Result<Vec<ModalDataset>> = (0..chain.len())
        .map(|i| chain.sample(i, seed, config))
        .collect();
    let mut kernels = config.kernels.clone();
    kernels.sort();
    kernels.dedup();
    let mut ks = config.intermediates.clone();
    ks.sort();
    ks.dedup();
    let mut rows = Vec::with_capacity(kernels.len() * ks.len());
    for &kernel in &kernels {
        let settings = config.settings(kernel);
        for &k in &ks {
            let outcome = datasets
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|ds| run_chain(ds, k, &settings));
            let record = match outcome {
                Ok(run) => TrialRecord {
                    trial,
                    seed,
                    kernel,
                    n_intermediates: k,
                    direct_accuracy: run.direct_accuracy,
                    chain_accuracy: run.chain_accuracy,
                    collapsed: run.collapsed,
                    failure: None,
                },
                Err(e) => TrialRecord {
                    trial,
                    seed,
                    kernel,
                    n_intermediates: k,
                    direct_accuracy: 0.0,
                    chain_accuracy: 0.0,
                    collapsed: false,
                    failure: Some(e.to_string()),
                },
            };
            rows.push(record);
        }
    }
    rows
}

/// Runs `config.n_trials` independent trials on the current rayon pool.
///
/// Results do not depend on the number of threads: every trial owns its
/// random streams and rows are collected in trial order.
pub fn run_experiment(config: &ChainConfig) -> Result<ChainExperimentResult> {
    config.validate()?;
    let chain = StructureChain::build(config)?;
    run_experiment_on(&chain, config)
}

/// Same as [`run_experiment`] on a prebuilt chain.
pub fn run_experiment_on(
    chain: &StructureChain,
    config: &ChainConfig,
) -> Result<ChainExperimentResult> {
    config.validate()?;
    if chain.len() != config.n_structures {
        return Err(domain(format!(
            "chain has {} structures, config expects {}",
            chain.len(),
            config.n_structures
        )));
    }
    let per_trial: Vec<Vec<TrialRecord>> = (0..config.n_trials)
        .into_par_iter()
        .map(|t| run_trial(chain, config, t))
        .collect();
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let cells = aggregate(&trials);
    Ok(ChainExperimentResult {
        config: config.clone(),
        trials,
        cells,
    })
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &ChainConfig,
    threads: usize,
) -> Result<ChainExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}
