//! `simulate`: run simultaneous translation over a corpus and write
//! traces, a metrics summary, and a per-instance CSV.
//!
//! Records run on a small worker pool (instances are independent);
//! results are aggregated and sorted by id, so parallel and serial
//! runs produce identical bytes.

use crate::config::{CommonOpts, RunConfig};
use crate::corpus::{load_corpus, CorpusRecord};
use crate::error::{data_error, CliResult};
use crate::report::summarize;
use clap::Args;
use segstream::{InstanceTrace, Simulator};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// JSONL corpus, one record per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

fn run_record(
    simulator: &Simulator,
    record: &CorpusRecord,
    corpus_dir: &Path,
    input_dim: usize,
) -> CliResult<InstanceTrace> {
    let frames = record.materialize(corpus_dir, input_dim)?;
    simulator
        .translate_stream(&record.id, &frames, record.reference.clone())
        .map_err(|e| data_error(format!("record {}: {e}", record.id)))
}

/// Simulate every record, preserving corpus order in the result.
pub fn run_corpus(
    cfg: &RunConfig,
    records: &[CorpusRecord],
    corpus_dir: &Path,
) -> CliResult<Vec<InstanceTrace>> {
    let simulator = cfg.simulator()?;
    let workers = cfg.workers.min(records.len()).max(1);
    let next = AtomicUsize::new(0);

    let mut slots: Vec<Option<CliResult<InstanceTrace>>> = Vec::new();
    slots.resize_with(records.len(), || None);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let simulator = &simulator;
                let next = &next;
                scope.spawn(move || {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= records.len() {
                            return done;
                        }
                        done.push((i, run_record(simulator, &records[i], corpus_dir, cfg.input_dim)));
                    }
                })
            })
            .collect();
        for handle in handles {
            for (i, result) in handle.join().expect("worker panicked") {
                slots[i] = Some(result);
            }
        }
    });

    slots
        .into_iter()
        .map(|slot| slot.expect("every record was assigned"))
        .collect()
}

pub fn write_outputs(out: &Path, traces: &[InstanceTrace]) -> CliResult<()> {
    std::fs::create_dir_all(out)
        .map_err(|e| data_error(format!("cannot create {}: {e}", out.display())))?;
    let write = |name: &str, contents: &str| {
        let path = out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| data_error(format!("cannot write {}: {e}", path.display())))
    };

    let mut lines = String::new();
    for trace in traces {
        lines.push_str(
            &trace
                .to_json_line()
                .map_err(|e| data_error(format!("instance {}: {e}", trace.id)))?,
        );
        lines.push('\n');
    }
    write("traces.jsonl", &lines)?;

    let summary = summarize(traces)?;
    write("summary.json", &summary.to_json()?)?;
    write("metrics.csv", &summary.to_csv())
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let records = load_corpus(&args.corpus)?;
    let corpus_dir = args
        .corpus
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();

    let mut traces = run_corpus(&cfg, &records, &corpus_dir)?;
    traces.sort_by(|a, b| a.id.cmp(&b.id));
    write_outputs(&args.out, &traces)?;
    println!("simulated {} instances -> {}", traces.len(), args.out.display());
    Ok(())
}
