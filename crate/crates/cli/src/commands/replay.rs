//! `replay`: recompute the metrics summary from stored traces without
//! re-running any model. Replaying a simulate run's traces reproduces
//! its summary byte-for-byte.

use crate::corpus::load_corpus;
use crate::error::{data_error, CliResult};
use crate::report::summarize;
use clap::Args;
use segstream::InstanceTrace;
use std::collections::HashMap;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Trace file from a simulate run (JSONL).
    #[arg(long)]
    pub traces: PathBuf,
    /// Optional corpus supplying reference texts by record id
    /// (overrides references embedded in the traces).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn read_traces(path: &PathBuf) -> CliResult<Vec<InstanceTrace>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_error(format!("cannot read traces {}: {e}", path.display())))?;
    let mut traces = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let trace = InstanceTrace::from_json_line(line).map_err(|e| {
            data_error(format!("{}:{}: bad trace: {e}", path.display(), number + 1))
        })?;
        traces.push(trace);
    }
    if traces.is_empty() {
        return Err(data_error(format!(
            "trace file {} holds no instances",
            path.display()
        )));
    }
    Ok(traces)
}

pub fn run(args: &ReplayArgs) -> CliResult<()> {
    let mut traces = read_traces(&args.traces)?;

    if let Some(corpus_path) = &args.corpus {
        let references: HashMap<String, String> = load_corpus(corpus_path)?
            .into_iter()
            .filter_map(|r| Some((r.id, r.reference?)))
            .collect();
        for trace in &mut traces {
            if let Some(reference) = references.get(&trace.id) {
                trace.reference = Some(reference.clone());
            }
        }
    }

    traces.sort_by(|a, b| a.id.cmp(&b.id));
    let summary = summarize(&traces)?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| data_error(format!("cannot create {}: {e}", args.out.display())))?;
    let write = |name: &str, contents: &str| {
        let path = args.out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| data_error(format!("cannot write {}: {e}", path.display())))
    };
    write("summary.json", &summary.to_json()?)?;
    write("metrics.csv", &summary.to_csv())?;
    println!("replayed {} instances -> {}", traces.len(), args.out.display());
    Ok(())
}
