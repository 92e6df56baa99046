use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use dnfforge_core::dnfmodel::{extract_rules, DnfModel, GatherTable};
use dnfforge_core::graphgen::{generate_dataset, Dataset, SplitSizes};
use dnfforge_core::postprocess::{prune_threshold_pipeline, AuditEntry};
use dnfforge_core::rulelang::{format_ruleset, parse_ruleset, Grounder};
use dnfforge_core::trainer::{train_with, Metrics, TrainConfig};
use dnfforge_core::{Error, GroundExample};

use crate::manifest::{FileRecord, RunManifest};
use crate::{CliError, ExtractArgs, GenArgs, PruneArgs, TrainArgs, VerifyArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    Ok(Dataset::from_json(&read(path)?)?)
}

fn load_model(path: &Path) -> Result<DnfModel, CliError> {
    Ok(DnfModel::from_json(&read(path)?)?)
}

fn same_signature(m: &DnfModel, ds: &Dataset) -> Result<(), CliError> {
    if m.signature != ds.signature {
        return Err(Error::InvalidSignature("model and dataset signatures differ".into()).into());
    }
    Ok(())
}

fn records(paths: &[&Path]) -> Result<Vec<FileRecord>, CliError> {
    paths.iter().map(|p| FileRecord::of(p)).collect()
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let sizes = SplitSizes {
        train: a.train,
        validation: a.validation,
        test: a.test,
    };
    let ds = generate_dataset(a.difficulty, sizes, a.noise, a.seed)?;
    write(&a.out, &ds.to_json()?)?;
    RunManifest {
        command: "gen".into(),
        config: json!({
            "difficulty": a.difficulty,
            "noise": a.noise,
            "train": a.train,
            "validation": a.validation,
            "test": a.test,
        }),
        seed: Some(a.seed),
        inputs: vec![],
        outputs: records(&[&a.out])?,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)?;
    Ok(())
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => TrainConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = a.updates {
        cfg.total_batch_updates = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.eval_every {
        cfg.eval_every = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = train_config(a)?;
    let ds = load_dataset(&a.data)?;
    let file = fs::File::create(&a.metrics_out).map_err(|e| CliError::io(&a.metrics_out, e))?;
    let mut csv = BufWriter::new(file);
    let metrics_path = a.metrics_out.clone();
    let io_err = |e: std::io::Error| Error::Format(format!("{}: {e}", metrics_path.display()));
    writeln!(csv, "{}", Metrics::CSV_HEADER).map_err(io_err)?;
    let model = train_with(&ds, &cfg, |row| {
        let mut row = row.clone();
        if a.omit_wall_time {
            row.wall_time_s = 0.0;
        }
        writeln!(csv, "{}", row.to_csv_row()).map_err(io_err)?;
        csv.flush().map_err(io_err)
    })?;
    drop(csv);
    write(&a.model_out, &model.to_json()?)?;
    let mut inputs = vec![a.data.as_path()];
    if let Some(c) = &a.config {
        inputs.push(c);
    }
    RunManifest {
        command: "train".into(),
        config: serde_json::to_value(&cfg).expect("config serializes"),
        seed: Some(cfg.rng_seed),
        inputs: records(&inputs)?,
        outputs: records(&[&a.model_out, &a.metrics_out])?,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.model_out)?;
    Ok(())
}

pub fn prune(a: &PruneArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let model = load_model(&a.model)?;
    let ds = load_dataset(&a.data)?;
    same_signature(&model, &ds)?;
    let out = prune_threshold_pipeline(&model, &ds.validation, a.epsilon)?;
    let audit_path = a.audit_out.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".audit.csv");
        s.into()
    });
    let mut audit = String::from(AuditEntry::CSV_HEADER);
    audit.push('\n');
    for e in &out.audit {
        audit.push_str(&e.to_csv_row());
        audit.push('\n');
    }
    write(&a.out, &out.model.to_json()?)?;
    write(&audit_path, &audit)?;
    RunManifest {
        command: "prune".into(),
        config: json!({ "epsilon": a.epsilon, "threshold": out.threshold }),
        seed: None,
        inputs: records(&[&a.model, &a.data])?,
        outputs: records(&[&a.out, &audit_path])?,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)?;
    Ok(())
}

pub fn extract(a: &ExtractArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let model = load_model(&a.model)?;
    let rules = extract_rules(&model, &model.signature)?;
    if rules.rules.is_empty() {
        eprintln!("warning: model encodes no rules; writing an empty rule set");
    }
    write(&a.out, &format_ruleset(&rules))?;
    RunManifest {
        command: "extract".into(),
        config: json!({}),
        seed: None,
        inputs: records(&[&a.model])?,
        outputs: records(&[&a.out])?,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
    .write(&a.out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SplitReport {
    split: &'static str,
    examples: usize,
    rules_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign_agreement: Option<f64>,
}

fn fraction(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let rules = parse_ruleset(&read(&a.rules)?)?;
    let ds = load_dataset(&a.data)?;
    let grounder = Grounder::new(&rules, &ds.signature)?;
    let model = match &a.model {
        Some(p) => {
            let m = load_model(p)?;
            same_signature(&m, &ds)?;
            if let Some((index, value)) = m.first_unthresholded() {
                return Err(Error::NotThresholded { index, value }.into());
            }
            let table = GatherTable::new(&m.signature)?;
            Some((m, table))
        }
        None => None,
    };

    let mut report = Vec::new();
    for (name, split) in ds.splits() {
        let verdicts: Vec<bool> = split.par_iter().map(|ex| grounder.evaluate_atoms(&ex.atoms)).collect();
        let rules_hits = verdicts.iter().zip(split).filter(|(v, ex)| **v == ex.label).count();
        let (model_accuracy, sign_agreement) = match &model {
            Some((m, table)) => {
                let outs = model_verdicts(table, m, split)?;
                let acc = outs.iter().zip(split).filter(|(o, ex)| **o == ex.label).count();
                let agree = outs.iter().zip(&verdicts).filter(|(o, v)| o == v).count();
                (Some(fraction(acc, split.len())), Some(fraction(agree, split.len())))
            }
            None => (None, None),
        };
        report.push(SplitReport {
            split: name,
            examples: split.len(),
            rules_accuracy: fraction(rules_hits, split.len()),
            model_accuracy,
            sign_agreement,
        });
    }
    let text = serde_json::to_string_pretty(&json!({ "splits": report })).expect("report serializes");
    println!("{text}");
    if let Some(out) = &a.out {
        write(out, &(text + "\n"))?;
    }
    Ok(())
}

fn model_verdicts(table: &GatherTable, m: &DnfModel, split: &[GroundExample]) -> Result<Vec<bool>, CliError> {
    let outs: Result<Vec<bool>, Error> = split
        .par_iter()
        .map(|ex| table.forward(&ex.atoms, m).map(|o| o.t_score > 0.0))
        .collect();
    Ok(outs?)
}
