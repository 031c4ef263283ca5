//! Tokenized corpus with a positional index.

mod codec;
mod tokenize;

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};

pub use codec::{FORMAT_VERSION, MAGIC};
pub use tokenize::{
    normalize_piece, tokenize, tokenize_bytes, tokenize_documents, Segmented, TOKENIZER_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, position: usize) -> Self {
        Token {
            surface: surface.into(),
            position,
        }
    }
}

/// Dense id of a vocabulary entry, assigned in first-occurrence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Immutable positional index over one token stream.
///
/// Holds the vocabulary, per-term sorted postings and the stream of term ids
/// itself, so both "where does `t` occur" and "what is at position `p`" are
/// constant-time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusIndex {
    terms: Vec<String>,
    lookup: HashMap<String, TermId>,
    postings: Vec<Vec<u32>>,
    stream: Vec<TermId>,
    doc_starts: Vec<u32>,
}

impl CorpusIndex {
    /// Builds an index over a single document.
    pub fn build(tokens: &[Token]) -> Result<Self> {
        let starts = if tokens.is_empty() { vec![] } else { vec![0] };
        Self::build_with_documents(tokens, &starts)
    }

    /// Builds an index where windows never cross the given document starts.
    pub fn build_with_documents(tokens: &[Token], doc_starts: &[usize]) -> Result<Self> {
        if tokens.len() > u32::MAX as usize {
            return Err(Error::Structure(format!(
                "{} tokens exceed the 32-bit position space",
                tokens.len()
            )));
        }
        let mut index = CorpusIndex::default();
        for (expected, token) in tokens.iter().enumerate() {
            if token.position != expected {
                return Err(Error::Structure(format!(
                    "token {:?} has position {}, expected {}",
                    token.surface, token.position, expected
                )));
            }
            if token.surface.is_empty() || token.surface.chars().any(char::is_whitespace) {
                return Err(Error::Structure(format!(
                    "bad surface {:?} at position {}",
                    token.surface, expected
                )));
            }
            let id = index.intern(&token.surface);
            index.postings[id.index()].push(expected as u32);
            index.stream.push(id);
        }
        index.doc_starts = normalize_doc_starts(doc_starts, tokens.len())?;
        Ok(index)
    }

    /// Tokenizes and indexes `text` as one document.
    pub fn from_text(text: &str) -> Self {
        Self::build(&tokenize(text)).expect("tokenizer output is contiguous")
    }

    /// Tokenizes and indexes `text`, splitting documents on `delimiter` lines.
    pub fn from_text_with_delimiter(text: &str, delimiter: Option<&str>) -> Self {
        let seg = tokenize_documents(text, delimiter);
        Self::build_with_documents(&seg.tokens, &seg.doc_starts)
            .expect("tokenizer output is contiguous")
    }

    fn intern(&mut self, surface: &str) -> TermId {
        if let Some(&id) = self.lookup.get(surface) {
            return id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(surface.to_string());
        self.lookup.insert(surface.to_string(), id);
        self.postings.push(Vec::new());
        id
    }

    pub(crate) fn from_parts(
        terms: Vec<String>,
        postings: Vec<Vec<u32>>,
        total_tokens: usize,
        doc_starts: Vec<u32>,
    ) -> Result<Self> {
        if terms.len() != postings.len() {
            return Err(Error::Format(
                "vocabulary and postings disagree in length".into(),
            ));
        }
        let mut lookup = HashMap::with_capacity(terms.len());
        const UNSET: TermId = TermId(u32::MAX);
        let mut stream = vec![UNSET; total_tokens];
        for (i, (term, list)) in terms.iter().zip(&postings).enumerate() {
            if term.is_empty() || lookup.insert(term.clone(), TermId(i as u32)).is_some() {
                return Err(Error::Format(format!("duplicate or empty term {term:?}")));
            }
            for &pos in list {
                let slot = stream
                    .get_mut(pos as usize)
                    .ok_or_else(|| Error::Format(format!("position {pos} out of range")))?;
                if *slot != UNSET {
                    return Err(Error::Format(format!("position {pos} claimed twice")));
                }
                *slot = TermId(i as u32);
            }
        }
        if let Some(pos) = stream.iter().position(|&t| t == UNSET) {
            return Err(Error::Format(format!("position {pos} has no term")));
        }
        let doc_starts: Vec<usize> = doc_starts.iter().map(|&s| s as usize).collect();
        let doc_starts = normalize_doc_starts(&doc_starts, total_tokens)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(CorpusIndex {
            terms,
            lookup,
            postings,
            stream,
            doc_starts,
        })
    }

    pub fn total_tokens(&self) -> usize {
        self.stream.len()
    }

    pub fn vocabulary_len(&self) -> usize {
        self.terms.len()
    }

    pub fn term_id(&self, surface: &str) -> Option<TermId> {
        self.lookup.get(surface).copied()
    }

    pub(crate) fn require(&self, surface: &str) -> Result<TermId> {
        self.term_id(surface)
            .ok_or_else(|| Error::NoSuchTerm(surface.to_string()))
    }

    pub fn surface(&self, id: TermId) -> &str {
        &self.terms[id.index()]
    }

    /// All term ids in id order.
    pub fn term_ids(&self) -> impl Iterator<Item = TermId> + '_ {
        (0..self.terms.len() as u32).map(TermId)
    }

    /// Corpus frequency; 0 for unknown terms.
    pub fn freq(&self, surface: &str) -> usize {
        self.term_id(surface).map_or(0, |id| self.freq_id(id))
    }

    pub fn freq_id(&self, id: TermId) -> usize {
        self.postings[id.index()].len()
    }

    pub fn postings(&self, id: TermId) -> &[u32] {
        &self.postings[id.index()]
    }

    pub fn stream(&self) -> &[TermId] {
        &self.stream
    }

    pub fn token_at(&self, position: usize) -> TermId {
        self.stream[position]
    }

    pub fn doc_starts(&self) -> &[u32] {
        &self.doc_starts
    }

    /// Span of the document containing `position`.
    pub fn document_span(&self, position: usize) -> Range<usize> {
        let idx = self
            .doc_starts
            .partition_point(|&s| s as usize <= position)
            .saturating_sub(1);
        let start = self.doc_starts.get(idx).map_or(0, |&s| s as usize);
        let end = self
            .doc_starts
            .get(idx + 1)
            .map_or(self.stream.len(), |&s| s as usize);
        start..end
    }

    /// Positions within `radius` tokens of `position` on either side,
    /// truncated at corpus and document boundaries. Includes `position`.
    pub fn window(&self, position: usize, radius: usize) -> Range<usize> {
        let doc = self.document_span(position);
        let lo = position.saturating_sub(radius).max(doc.start);
        let hi = position
            .saturating_add(radius)
            .saturating_add(1)
            .min(doc.end);
        lo..hi
    }

    /// Reconstructs the token sequence from the postings.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out: Vec<Token> = Vec::with_capacity(self.total_tokens());
        for id in self.term_ids() {
            for &pos in self.postings(id) {
                out.push(Token::new(self.surface(id), pos as usize));
            }
        }
        out.sort_by_key(|t| t.position);
        out
    }
}

fn normalize_doc_starts(starts: &[usize], total: usize) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::with_capacity(starts.len() + 1);
    if total > 0 {
        out.push(0);
    }
    for &s in starts {
        if s > total {
            return Err(Error::Structure(format!(
                "document start {s} beyond corpus end {total}"
            )));
        }
        if s == total {
            continue;
        }
        let s = s as u32;
        match out.last() {
            Some(&last) if s < last => {
                return Err(Error::Structure("document starts are not sorted".into()))
            }
            Some(&last) if s == last => {}
            _ => out.push(s),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(*w, i))
            .collect()
    }

    #[test]
    fn small_counts() {
        let idx = CorpusIndex::build(&toks(&["a", "b", "a"])).unwrap();
        assert_eq!(idx.freq("a"), 2);
        assert_eq!(idx.freq("b"), 1);
        assert_eq!(idx.freq("z"), 0);
        assert_eq!(idx.postings(idx.term_id("a").unwrap()), &[0, 2]);
        assert_eq!(idx.total_tokens(), 3);
    }

    #[test]
    fn empty_index() {
        let idx = CorpusIndex::build(&[]).unwrap();
        assert_eq!(idx.total_tokens(), 0);
        assert_eq!(idx.vocabulary_len(), 0);
        assert!(idx.doc_starts().is_empty());
    }

    #[test]
    fn many_repetitions() {
        let words = vec!["x"; 1000];
        let idx = CorpusIndex::build(&toks(&words)).unwrap();
        let id = idx.term_id("x").unwrap();
        assert_eq!(idx.freq("x"), 1000);
        assert!(idx.postings(id).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_gaps() {
        let bad = vec![Token::new("a", 0), Token::new("b", 2)];
        assert!(matches!(CorpusIndex::build(&bad), Err(Error::Structure(_))));
        let bad = vec![Token::new("a", 1)];
        assert!(matches!(CorpusIndex::build(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn rejects_bad_surface() {
        let bad = vec![Token::new("a b", 0)];
        assert!(CorpusIndex::build(&bad).is_err());
        let bad = vec![Token::new("", 0)];
        assert!(CorpusIndex::build(&bad).is_err());
    }

    #[test]
    fn windows_truncate_at_documents() {
        let t = toks(&["a", "b", "c", "d", "e", "f"]);
        let idx = CorpusIndex::build_with_documents(&t, &[0, 3]).unwrap();
        assert_eq!(idx.window(1, 5), 0..3);
        assert_eq!(idx.window(3, 1), 3..5);
        assert_eq!(idx.window(5, 10), 3..6);
        let single = CorpusIndex::build(&t).unwrap();
        assert_eq!(single.window(2, 1), 1..4);
        assert_eq!(single.window(0, 2), 0..3);
    }

    #[test]
    fn unsorted_doc_starts_rejected() {
        let t = toks(&["a", "b", "c"]);
        assert!(CorpusIndex::build_with_documents(&t, &[2, 1]).is_err());
        assert!(CorpusIndex::build_with_documents(&t, &[5]).is_err());
    }

    proptest! {
        #[test]
        fn index_invariants(words in prop::collection::vec(0u8..12, 0..400)) {
            let surfaces: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
            let tokens: Vec<Token> = surfaces.iter().enumerate().map(|(i, s)| Token::new(s.clone(), i)).collect();
            let idx = CorpusIndex::build(&tokens).unwrap();

            let total: usize = idx.term_ids().map(|t| idx.freq_id(t)).sum();
            prop_assert_eq!(total, idx.total_tokens());
            for t in idx.term_ids() {
                let naive = surfaces.iter().filter(|s| s.as_str() == idx.surface(t)).count();
                prop_assert_eq!(idx.freq_id(t), naive);
                prop_assert!(idx.postings(t).windows(2).all(|w| w[0] < w[1]));
            }
            prop_assert_eq!(idx.tokens(), tokens);
        }
    }
}
