//! Plants a pseudoword in a synthetic two-topic corpus and ranks it.
//!
//! Usage: `cargo run --release --example pseudoword [seed] [out.txt]`
//!
//! With an output path the corpus text is written there too, so it can be fed
//! to `polysemy index`.

use std::time::Instant;

use polysemy_core::pipeline::{analyze, scan, PipelineConfig};
use polysemy_core::synth::{generate, SynthConfig};
use polysemy_core::CorpusIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut cfg = SynthConfig::default();
    if let Some(seed) = args.next() {
        cfg.seed = seed.parse()?;
    }
    let corpus = generate(&cfg);
    let text = corpus.text();
    if let Some(path) = args.next() {
        std::fs::write(&path, &text)?;
        println!("wrote {} tokens to {path}", corpus.tokens.len());
    }

    let index = CorpusIndex::from_text(&text);
    let config = PipelineConfig::default();

    let report = analyze(&index, &corpus.pseudoword, &config)?;
    println!(
        "{}: freq {}, n_w {}, index {:.3}",
        report.term,
        index.freq(&report.term),
        report.n_w,
        report.index
    );
    for (peak, seeds) in report.peaks.iter().zip(&report.seeds).take(2) {
        let alpha = seeds.iter().filter(|w| w.starts_with("alpha")).count();
        let beta = seeds.iter().filter(|w| w.starts_with("beta")).count();
        println!(
            "  peak at bin {}: {} seeds, {alpha} alpha, {beta} beta",
            peak.bin,
            seeds.len()
        );
    }

    let started = Instant::now();
    let ranked = scan(&index, &config, 4)?;
    let rank = ranked
        .iter()
        .position(|r| r.term == corpus.pseudoword)
        .map_or(0, |p| p + 1);
    println!(
        "scan of {} candidates took {:.1?}; {} ranks {rank}",
        ranked.len(),
        started.elapsed(),
        corpus.pseudoword
    );
    for r in ranked.iter().take(5) {
        println!("  {:<10} {:>9.3}  n_w {}", r.term, r.index, r.n_w);
    }
    Ok(())
}
