//! Whitespace tokenizer with edge-punctuation stripping.
//!
//! Rule set, version [`TOKENIZER_VERSION`]:
//!
//! 1. Text is split on Unicode whitespace and on the bracket characters
//!    `( ) [ ] { }`.
//! 2. Each piece loses any leading and trailing characters from the edge
//!    punctuation set: `. , ; : ! ? " ' `` ` `` … « » “ ” ‘ ’ „ – —`.
//!    Interior characters are never touched, so `M.D.` becomes `M.D`,
//!    `white-tailed` and `d'amore` stay whole, and `0.5` survives.
//! 3. Pieces that become empty are dropped. Symbols outside the edge set
//!    (`=`, `+`, `$`, ...) are kept, alone or attached.
//! 4. Case is preserved.

use super::Token;
use crate::error::{Error, Result};

/// Bumped whenever the rules above change; stored in serialized indexes.
pub const TOKENIZER_VERSION: u16 = 1;

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '{' | '}')
}

fn is_edge_punctuation(c: char) -> bool {
    matches!(
        c,
        '.' | ','
            | ';'
            | ':'
            | '!'
            | '?'
            | '"'
            | '\''
            | '`'
            | '…'
            | '«'
            | '»'
            | '“'
            | '”'
            | '‘'
            | '’'
            | '„'
            | '–'
            | '—'
    )
}

/// Applies the rules to one whitespace/bracket-delimited piece.
pub fn normalize_piece(piece: &str) -> Option<&str> {
    let trimmed = piece.trim_matches(is_edge_punctuation);
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed)
    }
}

pub(crate) fn surfaces(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_separator).filter_map(normalize_piece)
}

/// Tokenizes `text` as one stream, numbering positions from 0.
pub fn tokenize(text: &str) -> Vec<Token> {
    surfaces(text)
        .enumerate()
        .map(|(position, surface)| Token {
            surface: surface.to_string(),
            position,
        })
        .collect()
}

/// Like [`tokenize`], but decodes raw bytes first.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<Token>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text))
}

/// A token stream split into documents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Segmented {
    pub tokens: Vec<Token>,
    /// Position of the first token of each non-empty document, ascending.
    pub doc_starts: Vec<usize>,
}

/// Tokenizes `text`, starting a new document at every line whose trimmed
/// content equals `delimiter`. Delimiter lines produce no tokens.
pub fn tokenize_documents(text: &str, delimiter: Option<&str>) -> Segmented {
    let Some(delimiter) = delimiter else {
        let tokens = tokenize(text);
        let doc_starts = if tokens.is_empty() { vec![] } else { vec![0] };
        return Segmented { tokens, doc_starts };
    };

    let mut out = Segmented::default();
    let mut doc_open = false;
    for line in text.lines() {
        if line.trim() == delimiter {
            doc_open = false;
            continue;
        }
        for surface in surfaces(line) {
            if !doc_open {
                out.doc_starts.push(out.tokens.len());
                doc_open = true;
            }
            let position = out.tokens.len();
            out.tokens.push(Token {
                surface: surface.to_string(),
                position,
            });
        }
    }
    out
}
