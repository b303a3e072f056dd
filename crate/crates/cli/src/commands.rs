use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gfk_core::chain::{
    run_experiment_on, trial_seed, ChainConfig, ChainExperimentResult, StructureChain,
};
use gfk_core::spectral_sim::Condition;

use crate::csvio::{parse_table, results_csv, summary_csv};
use crate::error::{CliError, CliResult};
use crate::format::sig6;
use crate::manifest::{ManifestCommand, RunManifest};
use crate::report::render_svg;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CHAIN_SUMMARY_FILE: &str = "chain_summary.csv";
pub const STRUCTURES_DIR: &str = "structures";
pub const REPORT_FILE: &str = "report.svg";

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Numeric(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn structure_stem(index: usize, count: usize) -> String {
    let width = (count.saturating_sub(1)).to_string().len().max(3);
    format!("structure_{index:0width$}")
}

/// Files `generate-chain` writes, relative to the output directory.
pub fn chain_outputs(config: &ChainConfig) -> Vec<String> {
    let mut out = vec![CHAIN_SUMMARY_FILE.to_string()];
    for i in 0..config.n_structures {
        let stem = structure_stem(i, config.n_structures);
        out.push(format!("{STRUCTURES_DIR}/{stem}_frequencies.csv"));
        out.push(format!("{STRUCTURES_DIR}/{stem}_samples.csv"));
    }
    out
}

/// Noise-free frequency tables and one sampled dataset per structure (the
/// draw of trial 0). Returns the printed chain summary.
pub fn generate_chain(
    config: &ChainConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> CliResult<String> {
    config.validate()?;
    let chain = with_threads(threads, || StructureChain::build(config))??;
    let seed = trial_seed(config.base_seed, 0);

    let mut summary = String::from("index,morph_t,first_hz,last_hz\n");
    for (i, (params, healthy)) in chain.params.iter().zip(&chain.healthy).enumerate() {
        let _ = writeln!(
            summary,
            "{i},{},{},{}",
            sig6(params.morph_parameter),
            sig6(healthy[0]),
            sig6(*healthy.last().expect("at least one mode"))
        );
    }
    write_file(&out_dir.join(CHAIN_SUMMARY_FILE), &summary)?;

    for i in 0..chain.len() {
        let stem = structure_stem(i, chain.len());
        let mut freqs = String::from("mode,healthy_hz,damaged_hz\n");
        for (m, (h, d)) in chain.healthy[i].iter().zip(&chain.damaged[i]).enumerate() {
            let _ = writeln!(freqs, "{},{},{}", m + 1, sig6(*h), sig6(*d));
        }
        write_file(
            &out_dir
                .join(STRUCTURES_DIR)
                .join(format!("{stem}_frequencies.csv")),
            &freqs,
        )?;

        let ds = chain.sample(i, seed, config)?;
        let mut samples = String::from("row,condition,label_visible");
        for m in 1..=ds.n_features() {
            let _ = write!(samples, ",f{m}");
        }
        samples.push('\n');
        for r in 0..ds.n_samples() {
            let condition = match ds.condition_labels[r] {
                Condition::Healthy => "healthy",
                Condition::Damaged => "damaged",
            };
            let _ = write!(samples, "{r},{condition},{}", ds.label_visible[r]);
            for v in ds.features.row(r).iter() {
                let _ = write!(samples, ",{}", sig6(*v));
            }
            samples.push('\n');
        }
        write_file(
            &out_dir
                .join(STRUCTURES_DIR)
                .join(format!("{stem}_samples.csv")),
            &samples,
        )?;
    }
    Ok(summary)
}

/// Runs all trials and writes the per-trial and per-cell tables.
pub fn run_experiment(
    config: &ChainConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> CliResult<ChainExperimentResult> {
    config.validate()?;
    let result = with_threads(threads, || {
        let chain = StructureChain::build(config)?;
        run_experiment_on(&chain, config)
    })??;
    let failed: Vec<_> = result
        .trials
        .iter()
        .filter(|t| t.failure.is_some())
        .collect();
    for t in &failed {
        log::warn!(
            "trial {} ({}, k={}) failed: {}",
            t.trial,
            t.kernel,
            t.n_intermediates,
            t.failure.as_deref().unwrap_or("")
        );
    }
    write_file(&out_dir.join(RESULTS_FILE), &results_csv(&result.trials))?;
    write_file(&out_dir.join(SUMMARY_FILE), &summary_csv(&result.cells))?;
    if !result.trials.is_empty() && failed.len() == result.trials.len() {
        return Err(CliError::Numeric(format!(
            "every trial failed; first error: {}",
            failed[0].failure.as_deref().unwrap_or("")
        )));
    }
    Ok(result)
}

/// Renders `input` (results or summary CSV) to an SVG chart at `svg`.
pub fn report(input: &Path, svg: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let table = parse_table(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", input.display())),
        other => other,
    })?;
    write_file(svg, &render_svg(&table.cells()))
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: ManifestCommand,
    pub config: ChainConfig,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

impl Invocation {
    pub fn outputs(&self) -> Vec<String> {
        match &self.command {
            ManifestCommand::GenerateChain => chain_outputs(&self.config),
            ManifestCommand::RunExperiment => vec![RESULTS_FILE.into(), SUMMARY_FILE.into()],
            ManifestCommand::Report { svg, .. } => vec![svg.display().to_string()],
        }
    }

    /// Writes the manifest, then the command's outputs. Returns text for
    /// standard output.
    pub fn execute(&self) -> CliResult<String> {
        self.config.validate()?;
        RunManifest::new(
            self.command.clone(),
            self.config.clone(),
            &self.out_dir,
            self.outputs(),
        )
        .write(&self.out_dir)?;
        match &self.command {
            ManifestCommand::GenerateChain => {
                generate_chain(&self.config, &self.out_dir, self.threads)
            }
            ManifestCommand::RunExperiment => {
                let result = run_experiment(&self.config, &self.out_dir, self.threads)?;
                Ok(summary_csv(&result.cells))
            }
            ManifestCommand::Report { input, svg } => {
                report(input, &self.out_dir.join(svg))?;
                Ok(format!("wrote {}\n", self.out_dir.join(svg).display()))
            }
        }
    }
}
