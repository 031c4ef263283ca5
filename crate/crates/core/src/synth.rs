//! Synthetic two-topic corpora with a planted pseudoword.
//!
//! The stream is a sequence of articles. Each article draws from one topic:
//! a token is a shared function word with probability `function_share`,
//! otherwise a word from that topic's Zipfian unigram distribution. After
//! generation, the words at rank `merge_rank` of both topics are rewritten
//! to one surface form, giving a term whose contexts are known to split
//! cleanly in two.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topic {
    A,
    B,
    /// Function words, shared by both topics.
    Shared,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub tokens: usize,
    /// Distinct words per topic.
    pub topic_vocab: usize,
    pub function_words: usize,
    pub function_share: f64,
    pub zipf_exponent: f64,
    /// Inclusive article length range, in tokens.
    pub article_len: (usize, usize),
    /// 0-based rank (within each topic) of the words merged into the pseudoword.
    pub merge_rank: usize,
    pub pseudoword: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            tokens: 240_000,
            topic_vocab: 320,
            function_words: 8,
            function_share: 0.4,
            zipf_exponent: 0.7,
            article_len: (2_000, 6_000),
            merge_rank: 6,
            pseudoword: "pseudo".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub tokens: Vec<String>,
    /// Topic of every generated surface, the pseudoword excluded.
    pub topic_of: HashMap<String, Topic>,
    pub pseudoword: String,
    /// The two original words that were merged.
    pub merged: (String, String),
    /// Surfaces of each topic, by descending expected frequency.
    pub topic_a: Vec<String>,
    pub topic_b: Vec<String>,
}

impl SynthCorpus {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn count(&self, surface: &str) -> usize {
        self.tokens.iter().filter(|t| t.as_str() == surface).count()
    }
}

fn topic_word(topic: Topic, rank: usize) -> String {
    match topic {
        Topic::A => format!("alpha{rank:03}"),
        Topic::B => format!("beta{rank:03}"),
        Topic::Shared => format!("fn{rank}"),
    }
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights: Vec<f64> = (1..=config.topic_vocab)
        .map(|r| (r as f64).powf(-config.zipf_exponent))
        .collect();
    let zipf = WeightedIndex::new(&weights).expect("positive weights");

    let topic_a: Vec<String> = (0..config.topic_vocab)
        .map(|r| topic_word(Topic::A, r))
        .collect();
    let topic_b: Vec<String> = (0..config.topic_vocab)
        .map(|r| topic_word(Topic::B, r))
        .collect();
    let shared: Vec<String> = (0..config.function_words)
        .map(|r| topic_word(Topic::Shared, r))
        .collect();

    let mut tokens = Vec::with_capacity(config.tokens);
    let mut topic = if rng.gen_bool(0.5) {
        Topic::A
    } else {
        Topic::B
    };
    while tokens.len() < config.tokens {
        let len = rng
            .gen_range(config.article_len.0..=config.article_len.1)
            .min(config.tokens - tokens.len());
        let words = if topic == Topic::A {
            &topic_a
        } else {
            &topic_b
        };
        for _ in 0..len {
            if !shared.is_empty() && rng.gen_bool(config.function_share) {
                tokens.push(shared[rng.gen_range(0..shared.len())].clone());
            } else {
                tokens.push(words[zipf.sample(&mut rng)].clone());
            }
        }
        topic = if rng.gen_bool(0.5) {
            Topic::A
        } else {
            Topic::B
        };
    }

    let merged = (
        topic_a[config.merge_rank].clone(),
        topic_b[config.merge_rank].clone(),
    );
    for t in tokens.iter_mut() {
        if *t == merged.0 || *t == merged.1 {
            *t = config.pseudoword.clone();
        }
    }

    let mut topic_of = HashMap::new();
    for w in &topic_a {
        topic_of.insert(w.clone(), Topic::A);
    }
    for w in &topic_b {
        topic_of.insert(w.clone(), Topic::B);
    }
    for w in &shared {
        topic_of.insert(w.clone(), Topic::Shared);
    }
    topic_of.remove(&merged.0);
    topic_of.remove(&merged.1);

    SynthCorpus {
        tokens,
        topic_of,
        pseudoword: config.pseudoword.clone(),
        merged,
        topic_a,
        topic_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let cfg = SynthConfig {
            tokens: 20_000,
            ..Default::default()
        };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.tokens, b.tokens);
        assert_eq!(a.tokens.len(), 20_000);
        assert_eq!(a.count(&a.merged.0), 0);
        assert!(a.count("pseudo") > 0);
    }
}
