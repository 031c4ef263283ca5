//! Context collection around a target term and the pairwise distance matrix
//! over its relevant context terms.
//!
//! Two counting conventions live here side by side:
//!
//! * window frequency (`FREQ_w`) counts each context *position* once, however
//!   many target windows cover it, so `FREQ_w(q) <= FREQ_C(q)`;
//! * co-occurrence (`CO(q|q')`) is summed per occurrence of `q`, so a
//!   position inside two `q` windows counts twice.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, TermId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextParams {
    /// Half-width of the context window around the target.
    pub k: usize,
    /// Minimum (exclusive) ratio `FREQ_w(q) / FREQ_C(q)`.
    pub threshold: f64,
    /// Minimum (exclusive) window frequency.
    pub mincount: usize,
    /// Half-width of the co-occurrence window between context terms.
    pub co_window: usize,
}

impl Default for ContextParams {
    fn default() -> Self {
        ContextParams {
            k: 30,
            threshold: 0.005,
            mincount: 1,
            co_window: 100,
        }
    }
}

impl ContextParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.co_window < 1 {
            return Err(Error::Parameter(
                "co-occurrence window must be at least 1".into(),
            ));
        }
        if !self.threshold.is_finite() || self.threshold <= 0.0 {
            return Err(Error::Parameter(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.mincount < 1 {
            return Err(Error::Parameter("mincount must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantTerm {
    pub term: String,
    #[serde(skip)]
    pub(crate) id: Option<TermId>,
    pub freq_window: usize,
    pub freq_corpus: usize,
}

impl RelevantTerm {
    pub fn id(&self) -> Option<TermId> {
        self.id
    }
}

/// The filtered context terms of one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantSet {
    pub target: String,
    /// Descending window frequency, ties by surface.
    pub members: Vec<RelevantTerm>,
}

impl RelevantSet {
    pub fn n_w(&self) -> usize {
        self.members.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|m| m.term.clone()).collect()
    }
}

/// Window frequency of every context term of `target`, keyed by term id.
pub fn window_counts(index: &CorpusIndex, target: TermId, k: usize) -> HashMap<TermId, usize> {
    let mut counts = HashMap::new();
    let mut covered = 0usize;
    for &pos in index.postings(target) {
        let window = index.window(pos as usize, k);
        let start = window.start.max(covered);
        for p in start..window.end {
            let t = index.token_at(p);
            if t != target {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        covered = covered.max(window.end);
    }
    counts
}

/// Window frequency of every context term of `target`, keyed by surface.
pub fn collect_window_counts(
    index: &CorpusIndex,
    target: &str,
    k: usize,
) -> Result<HashMap<String, usize>> {
    let id = index.require(target)?;
    Ok(window_counts(index, id, k)
        .into_iter()
        .map(|(t, c)| (index.surface(t).to_string(), c))
        .collect())
}

/// Both filter inequalities, strict.
pub fn passes_filter(freq_window: usize, freq_corpus: usize, params: &ContextParams) -> bool {
    freq_corpus > 0
        && freq_window > params.mincount
        && (freq_window as f64 / freq_corpus as f64) > params.threshold
}

pub fn select_relevant(
    index: &CorpusIndex,
    target: &str,
    params: &ContextParams,
) -> Result<RelevantSet> {
    params.validate()?;
    let id = index.require(target)?;
    let mut members: Vec<RelevantTerm> = window_counts(index, id, params.k)
        .into_iter()
        .filter_map(|(t, fw)| {
            let fc = index.freq_id(t);
            passes_filter(fw, fc, params).then(|| RelevantTerm {
                term: index.surface(t).to_string(),
                id: Some(t),
                freq_window: fw,
                freq_corpus: fc,
            })
        })
        .collect();
    members.sort_by(|a, b| {
        b.freq_window
            .cmp(&a.freq_window)
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(RelevantSet {
        target: target.to_string(),
        members,
    })
}

/// Occurrences of `q2` within `w` tokens of each occurrence of `q`, summed
/// over the occurrences of `q`. A position never co-occurs with itself.
pub fn co_count(index: &CorpusIndex, q: &str, q2: &str, w: usize) -> Result<u64> {
    let a = index.require(q)?;
    let b = index.require(q2)?;
    Ok(co_count_ids(index, a, b, w))
}

pub fn co_count_ids(index: &CorpusIndex, q: TermId, q2: TermId, w: usize) -> u64 {
    let targets = index.postings(q2);
    index
        .postings(q)
        .iter()
        .map(|&pos| {
            let window = index.window(pos as usize, w);
            let lo = targets.partition_point(|&p| (p as usize) < window.start);
            let hi = targets.partition_point(|&p| (p as usize) < window.end);
            let n = (hi - lo) as u64;
            if q == q2 {
                n - 1
            } else {
                n
            }
        })
        .sum()
}

/// Counts of every term within `w` tokens of the occurrences of `q`, as
/// `(term id, count)` pairs in id order.
pub fn co_occurrence_row(index: &CorpusIndex, q: TermId, w: usize) -> Vec<(u32, u32)> {
    let mut counts = vec![0u32; index.vocabulary_len()];
    let mut touched = Vec::new();
    for &pos in index.postings(q) {
        let pos = pos as usize;
        for p in index.window(pos, w) {
            if p == pos {
                continue;
            }
            let t = index.token_at(p).0;
            if counts[t as usize] == 0 {
                touched.push(t);
            }
            counts[t as usize] += 1;
        }
    }
    touched.sort_unstable();
    touched
        .into_iter()
        .map(|t| (t, counts[t as usize]))
        .collect()
}

type Row = Arc<[(u32, u32)]>;

/// Co-occurrence rows shared by many targets over one index and window.
///
/// Rows are computed on first use. Once `max_entries` pairs are stored,
/// further rows are computed but not kept.
pub struct CoOccurrenceCache {
    window: usize,
    rows: Vec<OnceLock<Row>>,
    max_entries: usize,
    stored: AtomicUsize,
}

impl CoOccurrenceCache {
    pub fn new(index: &CorpusIndex, window: usize, max_entries: usize) -> Self {
        CoOccurrenceCache {
            window,
            rows: (0..index.vocabulary_len())
                .map(|_| OnceLock::new())
                .collect(),
            max_entries,
            stored: AtomicUsize::new(0),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn stored_entries(&self) -> usize {
        self.stored.load(Ordering::Relaxed)
    }

    pub fn row(&self, index: &CorpusIndex, q: TermId) -> Arc<[(u32, u32)]> {
        let slot = &self.rows[q.index()];
        if let Some(row) = slot.get() {
            return row.clone();
        }
        let row: Arc<[(u32, u32)]> = co_occurrence_row(index, q, self.window).into();
        let len = row.len();
        let admitted = self
            .stored
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |used| {
                (used + len <= self.max_entries).then_some(used + len)
            })
            .is_ok();
        if admitted && slot.set(row.clone()).is_err() {
            self.stored.fetch_sub(len, Ordering::Relaxed);
        }
        row
    }
}

/// Row-major `n × n` matrix with `co[i * n + j] = CO(members[i] | members[j])`.
pub fn co_count_matrix(index: &CorpusIndex, rel: &RelevantSet, w: usize) -> Result<Vec<u64>> {
    co_count_matrix_with(index, rel, w, None)
}

fn co_count_matrix_with(
    index: &CorpusIndex,
    rel: &RelevantSet,
    w: usize,
    cache: Option<&CoOccurrenceCache>,
) -> Result<Vec<u64>> {
    let n = rel.n_w();
    let ids = member_ids(index, rel)?;
    const NONE: u32 = u32::MAX;
    let mut slot = vec![NONE; index.vocabulary_len()];
    for (i, id) in ids.iter().enumerate() {
        slot[id.index()] = i as u32;
    }
    let rows: Vec<Vec<u64>> = ids
        .par_iter()
        .map(|&id| {
            let full: Arc<[(u32, u32)]> = match cache {
                Some(c) => c.row(index, id),
                None => co_occurrence_row(index, id, w).into(),
            };
            let mut row = vec![0u64; n];
            for &(t, c) in full.iter() {
                let j = slot[t as usize];
                if j != NONE {
                    row[j as usize] = u64::from(c);
                }
            }
            row
        })
        .collect();
    Ok(rows.concat())
}

fn member_ids(index: &CorpusIndex, rel: &RelevantSet) -> Result<Vec<TermId>> {
    let mut ids = Vec::with_capacity(rel.n_w());
    for m in &rel.members {
        let id = match m.id {
            Some(id) if index.surface(id) == m.term => id,
            _ => index.require(&m.term)?,
        };
        if ids.contains(&id) {
            return Err(Error::Contract(format!("duplicate member {:?}", m.term)));
        }
        ids.push(id);
    }
    Ok(ids)
}

/// Dissimilarity between two context terms from their mutual co-occurrence
/// counts and corpus frequencies. May be negative for pathological input.
pub fn dissimilarity(co_ab: u64, co_ba: u64, freq_a: usize, freq_b: usize) -> f64 {
    let num = (co_ab + co_ba) as f64;
    let den = 2.0 * (freq_a + freq_b) as f64;
    1.0 - num / den
}

/// Symmetric matrix of pairwise dissimilarities, zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    entries: Vec<f64>,
    /// Pairs whose raw value fell below 0 and were clamped.
    pub clamped: usize,
}

impl DistanceMatrix {
    /// Wraps a row-major matrix. Shape is checked; symmetry is not.
    pub fn from_entries(labels: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(Error::Parameter(format!(
                "{} entries for {} labels",
                entries.len(),
                n
            )));
        }
        Ok(DistanceMatrix {
            labels,
            entries,
            clamped: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order() + j]
    }

    /// Label row followed by one row per term.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("term");
        for l in &self.labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        let n = self.order();
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..n {
                let _ = write!(out, "\t{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Smallest relevant set that can be embedded.
pub const MIN_EMBEDDABLE: usize = 3;

/// Builds the distance matrix of `rel`, or `None` when `rel` has fewer than
/// three members.
pub fn distance_matrix(
    index: &CorpusIndex,
    rel: &RelevantSet,
    w: usize,
) -> Result<Option<DistanceMatrix>> {
    build_distances(index, rel, w, None)
}

/// [`distance_matrix`] reading co-occurrence rows through `cache`.
pub fn distance_matrix_cached(
    index: &CorpusIndex,
    rel: &RelevantSet,
    cache: &CoOccurrenceCache,
) -> Result<Option<DistanceMatrix>> {
    build_distances(index, rel, cache.window(), Some(cache))
}

fn build_distances(
    index: &CorpusIndex,
    rel: &RelevantSet,
    w: usize,
    cache: Option<&CoOccurrenceCache>,
) -> Result<Option<DistanceMatrix>> {
    if w < 1 {
        return Err(Error::Parameter(
            "co-occurrence window must be at least 1".into(),
        ));
    }
    let n = rel.n_w();
    if n < MIN_EMBEDDABLE {
        return Ok(None);
    }
    let co = co_count_matrix_with(index, rel, w, cache)?;
    let freq: Vec<usize> = rel.members.iter().map(|m| m.freq_corpus).collect();
    let mut entries = vec![0.0; n * n];
    let mut clamped = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d = dissimilarity(co[i * n + j], co[j * n + i], freq[i], freq[j]);
            if d < 0.0 {
                d = 0.0;
                clamped += 1;
            }
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(Some(DistanceMatrix {
        labels: rel.labels(),
        entries,
        clamped,
    }))
}

/// Tab-separated dump of a relevant set: term, window frequency, corpus frequency.
pub fn relevant_tsv(rel: &RelevantSet) -> String {
    let mut out = String::from("term\tfreq_window\tfreq_corpus\n");
    for m in &rel.members {
        let _ = writeln!(out, "{}\t{}\t{}", m.term, m.freq_window, m.freq_corpus);
    }
    out
}
