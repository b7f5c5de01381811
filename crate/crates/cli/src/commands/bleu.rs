//! `bleu`: score line-aligned hypothesis and reference text files.
//! Corpus scoring pools clipped n-gram counts (no smoothing);
//! `--sentence` prints one smoothed sentence score per line instead.

use crate::error::{config_error, data_error, CliResult};
use clap::Args;
use segstream::{corpus_bleu, sentence_bleu, Smoothing};
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct BleuArgs {
    /// Hypothesis file, one sentence per line.
    #[arg(long)]
    pub hypotheses: PathBuf,
    /// Reference file, line-aligned with the hypotheses.
    #[arg(long)]
    pub references: PathBuf,
    /// Sentence smoothing: exp or none (sentence mode only).
    #[arg(long, default_value = "exp")]
    pub smoothing: String,
    /// Print one sentence score per line instead of one corpus score.
    #[arg(long)]
    pub sentence: bool,
}

fn read_lines(path: &PathBuf) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_error(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn run(args: &BleuArgs) -> CliResult<()> {
    let smoothing: Smoothing = args.smoothing.parse().map_err(config_error)?;
    let hypotheses = read_lines(&args.hypotheses)?;
    let references = read_lines(&args.references)?;
    if hypotheses.len() != references.len() {
        return Err(data_error(format!(
            "line count mismatch: {} hypotheses vs {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if hypotheses.is_empty() {
        return Err(data_error("no sentence pairs to score"));
    }

    if args.sentence {
        for (number, (hyp, reference)) in hypotheses.iter().zip(&references).enumerate() {
            let score = sentence_bleu(hyp, reference, smoothing)
                .map_err(|e| data_error(format!("line {}: {e}", number + 1)))?;
            println!("{score:.6}");
        }
    } else {
        let pairs: Vec<(&str, &str)> = hypotheses
            .iter()
            .map(String::as_str)
            .zip(references.iter().map(String::as_str))
            .collect();
        let score = corpus_bleu(&pairs).map_err(data_error)?;
        println!("{score:.6}");
    }
    Ok(())
}
