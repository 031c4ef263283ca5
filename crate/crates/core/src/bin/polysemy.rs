use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polysemy_core::pipeline::{
    analyze_full, candidates, context_snippets, report_json, report_tsv, scan, PipelineConfig,
};
use polysemy_core::{ContextParams, CorpusIndex, Error, Result};

#[derive(Parser)]
#[command(
    name = "polysemy",
    version,
    about = "Rank corpus terms by a polysemy index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize plain-text files and write a binary index.
    Index {
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Lines equal to this literal start a new document; windows never cross one.
        #[arg(long)]
        delimiter: Option<String>,
    },
    /// Score one term.
    Analyze {
        index: PathBuf,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        params: Params,
        /// Print the report as JSON instead of a TSV row.
        #[arg(long)]
        json: bool,
        /// Write relevant terms, distances, coordinates, profile and fit as TSV files here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
    },
    /// Score every candidate term and write a ranked report.
    Scan {
        index: PathBuf,
        #[command(flatten)]
        params: Params,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the full reports, with seeds and profiles, as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        /// Only list the candidates.
        #[arg(long)]
        list: bool,
    },
    /// Print the seed terms around each profile peak.
    Seeds {
        index: PathBuf,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        params: Params,
        /// Also print up to this many corpus snippets per peak.
        #[arg(long, default_value_t = 0)]
        snippets: usize,
    },
    /// Write the smoothed radial profile of a term as SVG (and optionally TSV).
    Profile {
        index: PathBuf,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 0.005)]
    threshold: f64,
    #[arg(long, default_value_t = 1)]
    mincount: usize,
    #[arg(long, default_value_t = 100)]
    cowindow: usize,
    #[arg(long, default_value_t = 90)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    smooth: usize,
    #[arg(long, default_value_t = 50)]
    min_freq: usize,
    #[arg(long, default_value_t = 5000)]
    max_freq: usize,
    #[arg(long, default_value_t = 2)]
    seed_radius: usize,
    /// Fraction of the highest bin below which peaks are ignored.
    #[arg(long, default_value_t = 0.1)]
    prominence_floor: f64,
    /// Admit candidates that do not start with a lowercase letter.
    #[arg(long)]
    any_case: bool,
}

impl Params {
    fn config(&self) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            context: ContextParams {
                k: self.k,
                threshold: self.threshold,
                mincount: self.mincount,
                co_window: self.cowindow,
            },
            bins: self.bins,
            smoothing_window: self.smooth,
            candidate_min_freq: self.min_freq,
            candidate_max_freq: self.max_freq,
            lowercase_only: !self.any_case,
            seed_bin_radius: self.seed_radius,
            prominence_floor: self.prominence_floor,
        };
        config.validate()?;
        Ok(config)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(Error::from)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index {
            corpus,
            output,
            delimiter,
        } => {
            let mut text = String::new();
            for path in &corpus {
                let bytes = fs::read(path)?;
                let chunk = std::str::from_utf8(&bytes).map_err(|e| Error::Decode {
                    offset: e.valid_up_to(),
                })?;
                text.push_str(chunk);
                // Files are separate documents when a delimiter is in use.
                text.push('\n');
                if let Some(d) = &delimiter {
                    text.push_str(d);
                    text.push('\n');
                }
            }
            let index = CorpusIndex::from_text_with_delimiter(&text, delimiter.as_deref());
            index.save(&output)?;
            eprintln!(
                "indexed {} tokens, {} types, {} documents",
                index.total_tokens(),
                index.vocabulary_len(),
                index.doc_starts().len()
            );
        }
        Command::Analyze {
            index,
            term,
            params,
            json,
            dump_dir,
        } => {
            let index = CorpusIndex::load(&index)?;
            let config = params.config()?;
            let analysis = analyze_full(&index, &term, &config)?;
            if json {
                println!("{}", report_json(std::slice::from_ref(&analysis.report)));
            } else {
                print!("{}", report_tsv(std::slice::from_ref(&analysis.report)));
            }
            if let Some(dir) = dump_dir {
                fs::create_dir_all(&dir)?;
                write(
                    &dir.join("relevant.tsv"),
                    &polysemy_core::context::relevant_tsv(&analysis.relevant),
                )?;
                if let Some(d) = &analysis.distances {
                    write(&dir.join("distances.tsv"), &d.to_tsv())?;
                }
                if let Some(e) = &analysis.embedding {
                    write(&dir.join("embedding.tsv"), &e.to_tsv())?;
                }
                write(&dir.join("profile.tsv"), &analysis.profile.to_tsv())?;
                if let Some(fit) = &analysis.fit {
                    let mut out = String::from("rotation\tmin_combined_sse\n");
                    for (r, v) in fit.per_rotation.iter().enumerate() {
                        out.push_str(&format!("{r}\t{v}\n"));
                    }
                    write(&dir.join("fit.tsv"), &out)?;
                }
            }
        }
        Command::Scan {
            index,
            params,
            output,
            json,
            workers,
            list,
        } => {
            let index = CorpusIndex::load(&index)?;
            let config = params.config()?;
            if list {
                let mut out = candidates(&index, &config).join("\n");
                out.push('\n');
                return write(&output, &out);
            }
            let reports = scan(&index, &config, workers)?;
            write(&output, &report_tsv(&reports))?;
            if let Some(path) = json {
                write(&path, &report_json(&reports))?;
            }
            eprintln!("scored {} candidates", reports.len());
        }
        Command::Seeds {
            index,
            term,
            params,
            snippets,
        } => {
            let index = CorpusIndex::load(&index)?;
            let config = params.config()?;
            let report = analyze_full(&index, &term, &config)?.report;
            if report.diagnostics.degenerate {
                eprintln!("{term}: only {} relevant terms, no seeds", report.n_w);
            }
            for (peak, seeds) in report.peaks.iter().zip(&report.seeds) {
                println!(
                    "peak bin {} ({}°), value {:.4}, prominence {:.4}: {}",
                    peak.bin,
                    peak.bin as f64 * 360.0 / config.bins as f64,
                    peak.value,
                    peak.prominence,
                    seeds.join(", ")
                );
                if snippets > 0 {
                    for s in context_snippets(&index, &term, seeds, config.context.k, snippets)? {
                        println!("    {s}");
                    }
                }
            }
            if report.diagnostics.seed_overlap {
                eprintln!("note: some seed windows overlap");
            }
        }
        Command::Profile {
            index,
            term,
            params,
            svg,
            tsv,
        } => {
            let index = CorpusIndex::load(&index)?;
            let config = params.config()?;
            let analysis = analyze_full(&index, &term, &config)?;
            let title = format!("{term}: polysemy index {:.2}", analysis.report.index);
            write(&svg, &analysis.profile.to_svg(&title))?;
            if let Some(path) = tsv {
                write(&path, &analysis.profile.to_tsv())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
