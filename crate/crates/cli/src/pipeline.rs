//! The experiment pipelines and their file artifacts.
//!
//! Every pipeline writes its data files plus `manifest.toml`, a replayable
//! record of the fully resolved configuration: loading the manifest as a
//! config file and rerunning the same experiment reproduces every artifact
//! byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use boolres_core::metrics::estimate_consistency;
use boolres_core::readout::{encode, error_curve, train, InputWord};
use boolres_core::sim::simulate;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::sweep::{run_sweep, CellOutcome, SweepResult};

/// What a pipeline run left on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    /// Files written, manifest included, in emission order.
    pub files: Vec<PathBuf>,
    /// One-line summary for the terminal.
    pub summary: String,
}

/// Runs the selected experiment end-to-end, writing artifacts into
/// `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    experiment: Experiment,
    out_dir: &Path,
) -> Result<RunArtifacts> {
    config.validate()?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut files = match experiment {
        Experiment::Transients => write_transients(config, out_dir)?,
        Experiment::Consistency => write_consistency(config, out_dir)?,
        Experiment::Dimensionality => write_dimensionality(config, out_dir)?,
        Experiment::Sweep => write_sweep(config, out_dir)?,
        Experiment::Train => write_train(config, out_dir)?,
        Experiment::Classify => write_classify(config, out_dir)?,
    };
    let summary = files.summary.clone();
    files.files.push(write_manifest(config, experiment, out_dir)?);
    Ok(RunArtifacts {
        files: files.files,
        summary,
    })
}

struct PipelineFiles {
    files: Vec<PathBuf>,
    summary: String,
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// The resolved config plus run provenance, loadable back as a config file.
fn write_manifest(
    config: &ExperimentConfig,
    experiment: Experiment,
    out_dir: &Path,
) -> Result<PathBuf> {
    let mut resolved = config.clone();
    resolved.experiment = Some(experiment);
    resolved.out = Some(out_dir.to_path_buf());
    let mut text = String::new();
    let _ = writeln!(text, "[run]");
    let _ = writeln!(text, "experiment = \"{}\"", experiment.name());
    let _ = writeln!(text, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text);
    let _ = writeln!(text, "[config]");
    let body = resolved.emit();
    text.push_str(&body);
    let path = out_dir.join("manifest.toml");
    write_file(&path, &text)?;
    Ok(path)
}

/// All 2^n words of the configured length.
fn all_words(config: &ExperimentConfig) -> Result<Vec<InputWord>> {
    (0..1usize << config.word_bits)
        .map(|i| Ok(InputWord::from_index(i, config.word_bits)?))
        .collect()
}

/// The word's data bits as transmitted, least-significant first.
fn word_label(word: &InputWord) -> String {
    word.bits()
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect()
}

fn write_transients(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    let reservoir = config.reservoir()?;
    let words = all_words(config)?;
    let mut files = Vec::new();
    for word in &words {
        let input = encode(word, config.record_len)?;
        let output = simulate(&reservoir, &input, config.record_len)?;
        let label = word_label(word);
        for (tag, wave) in [("input", &input), ("output", &output)] {
            let path = out_dir.join(format!("transient_{label}_{tag}.txt"));
            write_file(&path, &wave.to_dump())?;
            files.push(path);
        }
    }
    let summary = format!(
        "transients: {} words simulated over {} ns at N1={} N2={}",
        words.len(),
        config.record_len,
        config.n1,
        config.n2
    );
    Ok(PipelineFiles { files, summary })
}

fn write_consistency(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    let reservoir = config.reservoir()?;
    let words = all_words(config)?;
    let report = estimate_consistency(
        &reservoir,
        &words,
        config.trials,
        &config.consistency_options(),
    )?;
    let labels: Vec<String> = words.iter().map(word_label).collect();

    let mut csv = String::from("t_ns,pair_label,distance\n");
    for (row, start) in report.starts.iter().enumerate() {
        for (i, curve) in report.d_ii.iter().enumerate() {
            let _ = writeln!(csv, "{start},{0}|{0},{1}", labels[i], curve[row]);
        }
        for (pair, curve) in report.d_ij.iter().enumerate() {
            let (i, j) = report.d_ij_labels[pair];
            let _ = writeln!(csv, "{start},{}|{},{}", labels[i], labels[j], curve[row]);
        }
    }
    let path = out_dir.join("consistency.csv");
    write_file(&path, &csv)?;

    let summary = format!(
        "consistency: window L = {} ns over {} trials{}",
        report.window_l,
        config.trials,
        if report.degenerate {
            " (never converged; L is the record length)"
        } else {
            ""
        }
    );
    Ok(PipelineFiles {
        files: vec![path],
        summary,
    })
}

fn sweep_csv(sweep: &SweepResult) -> String {
    let mut csv = String::from("N1,N2,T1_ns,T2_ns,L_ns,K,Gamma,Delta,D_ns,status\n");
    for cell in &sweep.cells {
        let t1 = cell.t1.map(|v| v.to_string()).unwrap_or_default();
        let t2 = cell.t2.map(|v| v.to_string()).unwrap_or_default();
        match &cell.outcome {
            CellOutcome::Measured(r) => {
                let status = if r.degenerate { "degenerate" } else { "ok" };
                let _ = writeln!(
                    csv,
                    "{},{},{t1},{t2},{},{},{},{},{},{status}",
                    cell.n1, cell.n2, r.l, r.k, r.gamma, r.delta, r.d
                );
            }
            CellOutcome::Failed(_) => {
                let _ = writeln!(csv, "{},{},{t1},{t2},,,,,,failed", cell.n1, cell.n2);
            }
        }
    }
    csv
}

fn sweep_summary(sweep: &SweepResult) -> String {
    match sweep.best() {
        Some((cell, result)) => format!(
            "sweep: argmax N1={} N2={} with D = {} ns (L = {} ns, K = {:.4}, Gamma = {:.4})",
            cell.n1, cell.n2, result.d, result.l, result.k, result.gamma
        ),
        None => "sweep: no cell converged; no argmax".to_string(),
    }
}

fn write_dimensionality(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    // A 1×1 sweep: same measurement, same CSV shape, one row.
    let mut cell_config = config.clone();
    cell_config.n1_range = (config.n1, config.n1);
    cell_config.n2_range = (config.n2, config.n2);
    let sweep = run_sweep(&cell_config)?;
    let path = out_dir.join("dimensionality.csv");
    write_file(&path, &sweep_csv(&sweep))?;
    let summary = match &sweep.cells[0].outcome {
        CellOutcome::Measured(r) => format!(
            "dimensionality: N1={} N2={} L = {} ns, K = {:.4}, Gamma = {:.4}, D = {} ns{}",
            config.n1,
            config.n2,
            r.l,
            r.k,
            r.gamma,
            r.d,
            if r.degenerate {
                " (window never converged)"
            } else {
                ""
            }
        ),
        CellOutcome::Failed(reason) => {
            return Err(CliError::Domain(format!(
                "dimensionality cell failed: {reason}"
            )))
        }
    };
    Ok(PipelineFiles {
        files: vec![path],
        summary,
    })
}

fn write_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    let sweep = run_sweep(config)?;
    let path = out_dir.join("sweep.csv");
    write_file(&path, &sweep_csv(&sweep))?;
    Ok(PipelineFiles {
        files: vec![path],
        summary: sweep_summary(&sweep),
    })
}

fn write_train(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    let reservoir = config.reservoir()?;
    let set = train(
        &reservoir,
        config.word_bits,
        config.train_trials,
        config.series_samples,
        config.window,
        config.ridge,
    )?;
    let path = out_dir.join("classifier.txt");
    write_file(&path, &set.to_text())?;
    let summary = format!(
        "train: {} classifiers per word over {} start times{}",
        set.word_count(),
        set.start_count(),
        if set.used_min_norm_fallback() {
            " (minimum-norm fallback engaged)"
        } else {
            ""
        }
    );
    Ok(PipelineFiles {
        files: vec![path],
        summary,
    })
}

fn write_classify(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineFiles> {
    let reservoir = config.reservoir()?;
    let words = all_words(config)?;
    let report = estimate_consistency(
        &reservoir,
        &words,
        config.trials,
        &config.consistency_options(),
    )?;
    let set = train(
        &reservoir,
        config.word_bits,
        config.train_trials,
        config.series_samples,
        config.window,
        config.ridge,
    )?;
    let curve = error_curve(&reservoir, &set, config.test_trials, report.window_l)?;

    let classifier_path = out_dir.join("classifier.txt");
    write_file(&classifier_path, &set.to_text())?;

    let mut csv = String::from("t_ns,error_rate,region\n");
    for (i, t) in curve.start_times.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{t},{},{}",
            curve.error_rates[i],
            curve.region_of(*t).label()
        );
    }
    let curve_path = out_dir.join("error_curve.csv");
    write_file(&curve_path, &csv)?;

    let fmt = |v: Option<f64>| match v {
        Some(v) => format!("{v:.4}"),
        None => "n/a".to_string(),
    };
    let summary = format!(
        "classify: window L = {} ns; mean error A = {}, B = {}, C = {}",
        report.window_l,
        fmt(curve.mean_error(boolres_core::readout::Region::A)),
        fmt(curve.mean_error(boolres_core::readout::Region::B)),
        fmt(curve.mean_error(boolres_core::readout::Region::C)),
    );
    Ok(PipelineFiles {
        files: vec![classifier_path, curve_path],
        summary,
    })
}
