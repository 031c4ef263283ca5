//! End-to-end analysis of target terms: candidate selection, per-term
//! scoring, peak and seed extraction, ranking and report formatting.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{
    distance_matrix, distance_matrix_cached, select_relevant, CoOccurrenceCache, ContextParams,
    DistanceMatrix, RelevantSet,
};
use crate::corpus::CorpusIndex;
use crate::embedding::{classical_mds, Embedding2D};
use crate::error::{Error, Result};
use crate::profile::{radial_profile, RadialProfile, DEFAULT_BINS, DEFAULT_SMOOTHING};
use crate::unimodal::{circular_polysemy_index_any, CircularFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub context: ContextParams,
    pub bins: usize,
    pub smoothing_window: usize,
    /// Exclusive lower bound on candidate corpus frequency.
    pub candidate_min_freq: usize,
    /// Exclusive upper bound on candidate corpus frequency.
    pub candidate_max_freq: usize,
    pub lowercase_only: bool,
    pub seed_bin_radius: usize,
    /// Peaks less prominent than this fraction of the highest bin are dropped.
    pub prominence_floor: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            context: ContextParams::default(),
            bins: DEFAULT_BINS,
            smoothing_window: DEFAULT_SMOOTHING,
            candidate_min_freq: 50,
            candidate_max_freq: 5000,
            lowercase_only: true,
            seed_bin_radius: 2,
            prominence_floor: 0.1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.context.validate()?;
        if self.candidate_min_freq >= self.candidate_max_freq {
            return Err(Error::Parameter(format!(
                "candidate frequency bounds {} .. {} are empty",
                self.candidate_min_freq, self.candidate_max_freq
            )));
        }
        if self.bins < 3 {
            return Err(Error::Parameter(format!(
                "need at least 3 bins, got {}",
                self.bins
            )));
        }
        if self.smoothing_window.is_multiple_of(2) || self.smoothing_window >= self.bins {
            return Err(Error::Parameter(format!(
                "smoothing window must be odd and below {}, got {}",
                self.bins, self.smoothing_window
            )));
        }
        if !(0.0..=1.0).contains(&self.prominence_floor) {
            return Err(Error::Parameter(format!(
                "prominence floor must lie in [0, 1], got {}",
                self.prominence_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub value: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub clamped_distances: usize,
    pub clamped_eigenvalues: usize,
    /// Cut bin of the winning linearization.
    pub rotation: usize,
    /// Peak of the single-peak fit, in bin coordinates.
    pub fit_peak_bin: usize,
    /// Fewer than three relevant terms; nothing was embedded.
    pub degenerate: bool,
    /// Some seed windows share bins.
    pub seed_overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolysemyReport {
    pub term: String,
    pub index: f64,
    pub n_w: usize,
    pub peaks: Vec<Peak>,
    /// One list per entry of `peaks`.
    pub seeds: Vec<Vec<String>>,
    pub diagnostics: Diagnostics,
    pub raw_profile: Vec<f64>,
    pub smoothed_profile: Vec<f64>,
}

/// Intermediate products of one analysis, for dumps and plots.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: PolysemyReport,
    pub relevant: RelevantSet,
    pub distances: Option<DistanceMatrix>,
    pub embedding: Option<Embedding2D>,
    pub profile: RadialProfile,
    pub fit: Option<CircularFit>,
}

fn is_lowercase_initial(term: &str) -> bool {
    term.chars().next().is_some_and(char::is_lowercase)
}

/// Vocabulary terms inside the frequency band, sorted by surface.
pub fn candidates(index: &CorpusIndex, config: &PipelineConfig) -> Vec<String> {
    let mut out: Vec<String> = index
        .term_ids()
        .filter(|&t| {
            let f = index.freq_id(t);
            f > config.candidate_min_freq
                && f < config.candidate_max_freq
                && (!config.lowercase_only || is_lowercase_initial(index.surface(t)))
        })
        .map(|t| index.surface(t).to_string())
        .collect();
    out.sort();
    out
}

/// Local maxima of the smoothed circular profile plus the fit's peak bin.
///
/// A plateau counts once, at its leftmost bin. Prominence is the peak value
/// minus the higher of the two valleys reached by descending on either side.
pub fn find_peaks(
    profile: &RadialProfile,
    fit_peak_bin: usize,
    prominence_floor: f64,
) -> Vec<Peak> {
    let s = &profile.smoothed;
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let prev = |i: usize| (i + n - 1) % n;
    let next = |i: usize| (i + 1) % n;

    if s.iter().all(|&v| v == s[0]) {
        return vec![Peak {
            bin: 0,
            value: s[0],
            prominence: 0.0,
        }];
    }

    let valley = |start: usize, step: &dyn Fn(usize) -> usize| {
        let mut cur = start;
        for _ in 0..n {
            let nb = step(cur);
            if s[nb] <= s[cur] {
                cur = nb;
            } else {
                break;
            }
        }
        s[cur]
    };
    let plateau_end = |start: usize| {
        let mut end = start;
        for _ in 0..n {
            if s[next(end)] == s[start] {
                end = next(end);
            } else {
                break;
            }
        }
        end
    };
    let prominence = |start: usize, end: usize| {
        let left = valley(start, &prev);
        let right = valley(end, &next);
        s[start] - left.max(right)
    };

    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = prominence_floor * max;
    let mut peaks = Vec::new();
    for i in 0..n {
        if s[i] <= s[prev(i)] {
            continue;
        }
        let end = plateau_end(i);
        if s[next(end)] < s[i] {
            let p = prominence(i, end);
            if p >= floor || i == fit_peak_bin {
                peaks.push(Peak {
                    bin: i,
                    value: s[i],
                    prominence: p,
                });
            }
        }
    }
    if fit_peak_bin < n && !peaks.iter().any(|p| p.bin == fit_peak_bin) {
        let end = plateau_end(fit_peak_bin);
        peaks.push(Peak {
            bin: fit_peak_bin,
            value: s[fit_peak_bin],
            prominence: prominence(fit_peak_bin, end).max(0.0),
        });
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.bin.cmp(&b.bin)));
    peaks
}

/// Bins within `radius` of `center` on the circle, without repeats.
fn neighborhood(center: usize, radius: usize, n: usize) -> Vec<usize> {
    let span = (2 * radius + 1).min(n);
    (0..span)
        .map(|o| (center + n * (radius / n + 1) + o - radius) % n)
        .collect()
}

/// Member terms of the bins around each peak, largest contribution first.
pub fn extract_seeds(profile: &RadialProfile, peaks: &[Peak], radius: usize) -> Vec<Vec<String>> {
    let n = profile.bins();
    peaks
        .iter()
        .map(|peak| {
            let mut members: Vec<(&str, f64)> = neighborhood(peak.bin, radius, n)
                .into_iter()
                .flat_map(|b| profile.members[b].iter())
                .map(|m| (m.term.as_str(), m.distance))
                .collect();
            members.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            members.into_iter().map(|(t, _)| t.to_string()).collect()
        })
        .collect()
}

fn circular_gap(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

fn seeds_overlap(peaks: &[Peak], radius: usize, n: usize) -> bool {
    peaks.iter().enumerate().any(|(i, a)| {
        peaks[i + 1..]
            .iter()
            .any(|b| circular_gap(a.bin, b.bin, n) < 2 * radius + 1)
    })
}

/// Upper bound on co-occurrence pairs kept in memory during a multi-term run.
pub const CACHE_ENTRIES: usize = 1 << 24;

/// Full analysis of one target, keeping intermediate products.
pub fn analyze_full(index: &CorpusIndex, term: &str, config: &PipelineConfig) -> Result<Analysis> {
    analyze_with(index, term, config, None)
}

fn analyze_with(
    index: &CorpusIndex,
    term: &str,
    config: &PipelineConfig,
    cache: Option<&CoOccurrenceCache>,
) -> Result<Analysis> {
    config.validate()?;
    let relevant = select_relevant(index, term, &config.context)?;
    let n_w = relevant.n_w();
    let distances = match cache {
        Some(cache) => distance_matrix_cached(index, &relevant, cache),
        None => distance_matrix(index, &relevant, config.context.co_window),
    }
    .map_err(|e| e.for_term(term))?;

    let Some(distances) = distances else {
        let profile = RadialProfile::empty(config.bins);
        let report = PolysemyReport {
            term: term.to_string(),
            index: 0.0,
            n_w,
            peaks: Vec::new(),
            seeds: Vec::new(),
            diagnostics: Diagnostics {
                degenerate: true,
                ..Default::default()
            },
            raw_profile: profile.raw.clone(),
            smoothed_profile: profile.smoothed.clone(),
        };
        return Ok(Analysis {
            report,
            relevant,
            distances: None,
            embedding: None,
            profile,
            fit: None,
        });
    };

    let embedding = classical_mds(&distances).map_err(|e| e.for_term(term))?;
    let profile = radial_profile(&embedding, config.bins, config.smoothing_window)
        .map_err(|e| e.for_term(term))?;
    let fit = circular_polysemy_index_any(&profile.smoothed).map_err(|e| e.for_term(term))?;
    let peaks = find_peaks(&profile, fit.peak_bin, config.prominence_floor);
    let seeds = extract_seeds(&profile, &peaks, config.seed_bin_radius);

    let report = PolysemyReport {
        term: term.to_string(),
        index: fit.index,
        n_w,
        diagnostics: Diagnostics {
            clamped_distances: distances.clamped,
            clamped_eigenvalues: embedding.clamped_negatives,
            rotation: fit.rotation,
            fit_peak_bin: fit.peak_bin,
            degenerate: false,
            seed_overlap: seeds_overlap(&peaks, config.seed_bin_radius, config.bins),
        },
        peaks,
        seeds,
        raw_profile: profile.raw.clone(),
        smoothed_profile: profile.smoothed.clone(),
    };
    Ok(Analysis {
        report,
        relevant,
        distances: Some(distances),
        embedding: Some(embedding),
        profile,
        fit: Some(fit),
    })
}

pub fn analyze(index: &CorpusIndex, term: &str, config: &PipelineConfig) -> Result<PolysemyReport> {
    analyze_full(index, term, config).map(|a| a.report)
}

/// Descending index, ties by term.
pub fn rank(mut reports: Vec<PolysemyReport>) -> Vec<PolysemyReport> {
    reports.sort_by(|a, b| {
        b.index
            .total_cmp(&a.index)
            .then_with(|| a.term.cmp(&b.term))
    });
    reports
}

/// Analyzes `terms` on a pool of `workers` threads and ranks the results.
pub fn analyze_many(
    index: &CorpusIndex,
    terms: &[String],
    config: &PipelineConfig,
    workers: usize,
) -> Result<Vec<PolysemyReport>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let cache = CoOccurrenceCache::new(index, config.context.co_window, CACHE_ENTRIES);
    let reports: Result<Vec<PolysemyReport>> = pool.install(|| {
        terms
            .par_iter()
            .map(|t| analyze_with(index, t, config, Some(&cache)).map(|a| a.report))
            .collect()
    });
    Ok(rank(reports?))
}

/// Scores every candidate term.
pub fn scan(
    index: &CorpusIndex,
    config: &PipelineConfig,
    workers: usize,
) -> Result<Vec<PolysemyReport>> {
    analyze_many(index, &candidates(index, config), config, workers)
}

pub const REPORT_HEADER: &str = "term\tindex\tn_w\tpeak_bins\trotation\tdiagnostics";

pub fn report_tsv(reports: &[PolysemyReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        let bins: Vec<String> = r.peaks.iter().map(|p| p.bin.to_string()).collect();
        let d = &r.diagnostics;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\tclamped_dist={};clamped_eig={};fit_peak={};degenerate={};seed_overlap={}",
            r.term,
            r.index,
            r.n_w,
            bins.join(","),
            d.rotation,
            d.clamped_distances,
            d.clamped_eigenvalues,
            d.fit_peak_bin,
            u8::from(d.degenerate),
            u8::from(d.seed_overlap),
        );
    }
    out
}

pub fn report_json(reports: &[PolysemyReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// Windows of `±k` tokens around occurrences of `target` that contain any of
/// `terms`, target bracketed, in corpus order.
pub fn context_snippets(
    index: &CorpusIndex,
    target: &str,
    terms: &[String],
    k: usize,
    limit: usize,
) -> Result<Vec<String>> {
    let id = index.require(target)?;
    let wanted: HashSet<_> = terms.iter().filter_map(|t| index.term_id(t)).collect();
    let mut out = Vec::new();
    for &pos in index.postings(id) {
        if out.len() >= limit {
            break;
        }
        let pos = pos as usize;
        let window = index.window(pos, k);
        if !window
            .clone()
            .any(|p| p != pos && wanted.contains(&index.token_at(p)))
        {
            continue;
        }
        let words: Vec<String> = window
            .map(|p| {
                let s = index.surface(index.token_at(p));
                if p == pos {
                    format!("[{s}]")
                } else {
                    s.to_string()
                }
            })
            .collect();
        out.push(words.join(" "));
    }
    Ok(out)
}
