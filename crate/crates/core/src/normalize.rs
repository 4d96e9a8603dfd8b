//! Clinical note normalization.
//!
//! A note is turned into a flat token stream by a fixed sequence of
//! rewrites: de-identification tag removal, age phrases to per-decade
//! tokens, all-caps runs to a single token, lowercasing, splitting on
//! anything that is not an ASCII letter or digit, and zeroing numbers.
//!
//! Tokens produced by the age and all-caps rewrites carry the reserved
//! prefixes `age_` and `allcaps_`. Such tokens are recognized on input
//! and passed through untouched, which makes normalization idempotent.

use std::io::{BufRead, Write};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;

/// MIMIC de-identification placeholder, e.g. `[**Hospital 123**]`.
pub const DEFAULT_PHI_PATTERN: &str = r"(?s)\[\*\*.*?\*\*\]";

/// Digit run followed by an age cue. Group 1 holds the age.
pub const DEFAULT_AGE_PATTERN: &str =
    r"(?i)\b([0-9]+)[\s-]*(?:years?[\s-]*old\b|yrs?[\s-]*old\b|y/o\b|y\.o\.?|yo\b)";

const ALLCAPS_PATTERN: &str = r"\b[A-Z]{2,}\b(?:[ \t]+[A-Z]{2,}\b)*";
const RESERVED_PATTERN: &str = r"\b(?:age_[0-9]+s|allcaps(?:_[a-z]+)+)\b";

pub const AGE_PREFIX: &str = "age_";
pub const ALLCAPS_PREFIX: &str = "allcaps_";

/// Ages outside this range are left as ordinary numbers.
const AGE_RANGE: std::ops::RangeInclusive<u32> = 1..=120;

/// A raw note.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Which rewrites to apply. Lowercasing and splitting on non-alphanumeric
/// characters always run, since they define the token alphabet.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationRules {
    pub strip_phi: bool,
    pub age_tokens: bool,
    pub collapse_allcaps: bool,
    pub zero_numbers: bool,
    /// Replaces [`DEFAULT_PHI_PATTERN`].
    pub phi_pattern: Option<String>,
    /// Replaces [`DEFAULT_AGE_PATTERN`]; must capture the age in group 1.
    pub age_pattern: Option<String>,
}

impl Default for NormalizationRules {
    fn default() -> Self {
        NormalizationRules {
            strip_phi: true,
            age_tokens: true,
            collapse_allcaps: true,
            zero_numbers: true,
            phi_pattern: None,
            age_pattern: None,
        }
    }
}

impl NormalizationRules {
    /// Rules for non-clinical text: only lowercasing and splitting.
    pub fn plain() -> Self {
        NormalizationRules {
            strip_phi: false,
            age_tokens: false,
            collapse_allcaps: false,
            zero_numbers: false,
            phi_pattern: None,
            age_pattern: None,
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))
    }
}

/// Compiled form of [`NormalizationRules`].
#[derive(Clone, Debug)]
pub struct Normalizer {
    phi: Option<Regex>,
    age: Option<Regex>,
    allcaps: Option<Regex>,
    reserved: Regex,
    zero_numbers: bool,
}

enum Piece {
    Text(String),
    Token(String),
}

impl Normalizer {
    pub fn new(rules: &NormalizationRules) -> Result<Self> {
        let compile = |pattern: &str| {
            Regex::new(pattern).map_err(|e| Error::Config(format!("bad pattern {pattern:?}: {e}")))
        };

        let phi = if rules.strip_phi {
            Some(compile(rules.phi_pattern.as_deref().unwrap_or(DEFAULT_PHI_PATTERN))?)
        } else {
            None
        };

        let age = if rules.age_tokens {
            let re = compile(rules.age_pattern.as_deref().unwrap_or(DEFAULT_AGE_PATTERN))?;
            if re.captures_len() < 2 {
                return Err(Error::Config(
                    "age pattern must capture the age in group 1".into(),
                ));
            }
            Some(re)
        } else {
            None
        };

        let allcaps = if rules.collapse_allcaps {
            Some(compile(ALLCAPS_PATTERN)?)
        } else {
            None
        };

        Ok(Normalizer {
            phi,
            age,
            allcaps,
            reserved: compile(RESERVED_PATTERN)?,
            zero_numbers: rules.zero_numbers,
        })
    }

    /// Normalizes one text into its token sequence.
    pub fn normalize(&self, text: &str) -> Vec<String> {
        let text = match &self.phi {
            Some(re) => re.replace_all(text, " ").into_owned(),
            None => text.to_owned(),
        };

        let mut pieces = vec![Piece::Text(text)];
        pieces = split_pieces(pieces, |s| {
            self.reserved
                .find_iter(s)
                .map(|m| (m.start(), m.end(), m.as_str().to_owned()))
                .collect()
        });
        if let Some(age) = &self.age {
            pieces = split_pieces(pieces, |s| age_matches(age, s));
        }
        if let Some(allcaps) = &self.allcaps {
            pieces = split_pieces(pieces, |s| {
                allcaps
                    .find_iter(s)
                    .map(|m| (m.start(), m.end(), allcaps_token(m.as_str())))
                    .collect()
            });
        }

        let mut tokens = Vec::new();
        for piece in pieces {
            match piece {
                Piece::Token(t) => tokens.push(t),
                Piece::Text(t) => {
                    let lower = t.to_lowercase();
                    for word in lower
                        .split(|c: char| !c.is_ascii_alphanumeric())
                        .filter(|w| !w.is_empty())
                    {
                        tokens.push(if self.zero_numbers {
                            zero_digit_runs(word)
                        } else {
                            word.to_owned()
                        });
                    }
                }
            }
        }
        tokens
    }

    pub fn normalize_document(&self, doc: &RawDocument) -> Vec<String> {
        self.normalize(&doc.text)
    }
}

/// One-shot convenience wrapper; compile a [`Normalizer`] for bulk work.
pub fn normalize_document(doc: &RawDocument, rules: &NormalizationRules) -> Result<Vec<String>> {
    Ok(Normalizer::new(rules)?.normalize_document(doc))
}

fn split_pieces<F>(pieces: Vec<Piece>, mut find: F) -> Vec<Piece>
where
    F: FnMut(&str) -> Vec<(usize, usize, String)>,
{
    let mut out = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let text = match piece {
            Piece::Text(text) => text,
            token => {
                out.push(token);
                continue;
            }
        };
        let mut last = 0;
        for (start, end, token) in find(&text) {
            if start > last {
                out.push(Piece::Text(text[last..start].to_owned()));
            }
            // Keep a boundary so the token never fuses with its neighbours.
            out.push(Piece::Token(token));
            last = end;
        }
        if last < text.len() {
            out.push(Piece::Text(text[last..].to_owned()));
        }
    }
    out
}

fn age_matches(age: &Regex, text: &str) -> Vec<(usize, usize, String)> {
    age.captures_iter(text)
        .filter_map(|caps| {
            let whole = caps.get(0)?;
            let years: u32 = caps.get(1)?.as_str().parse().ok()?;
            if !AGE_RANGE.contains(&years) {
                return None;
            }
            Some((whole.start(), whole.end(), age_token(years)))
        })
        .collect()
}

/// Per-decade age token; everything from 90 up shares `age_90s`.
pub fn age_token(years: u32) -> String {
    let decade = (years.min(90) / 10) * 10;
    format!("{AGE_PREFIX}{decade}s")
}

fn allcaps_token(run: &str) -> String {
    let words: Vec<String> = run.split_whitespace().map(str::to_ascii_lowercase).collect();
    format!("{ALLCAPS_PREFIX}{}", words.join("_"))
}

fn zero_digit_runs(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut in_digits = false;
    for c in word.chars() {
        if c.is_ascii_digit() {
            if !in_digits {
                out.push('0');
            }
            in_digits = true;
        } else {
            out.push(c);
            in_digits = false;
        }
    }
    out
}

/// Layout of a raw document file.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum InputLayout {
    /// One document per line; the id is the 1-based line number.
    Lines,
    /// `id<delimiter>text`, split at the first delimiter.
    Delimited(char),
}

pub fn read_documents<R: BufRead>(reader: R, layout: InputLayout) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let doc = match layout {
            InputLayout::Lines => RawDocument::new((idx + 1).to_string(), line),
            InputLayout::Delimited(delim) => match line.split_once(delim) {
                Some((id, text)) => RawDocument::new(id, text),
                None => {
                    return Err(Error::format(
                        format!("line {}", idx + 1),
                        format!("missing {delim:?} delimiter between id and text"),
                    ))
                }
            },
        };
        docs.push(doc);
    }
    Ok(docs)
}

/// Normalizes every document of `input` and writes one line of
/// space-joined tokens per document to `output`. Returns the document and
/// token counts.
pub fn normalize_file(
    input: &Path,
    output: &Path,
    layout: InputLayout,
    rules: &NormalizationRules,
) -> Result<(usize, usize)> {
    let normalizer = Normalizer::new(rules)?;
    let docs = read_documents(fsutil::open(input)?, layout).map_err(|e| match e {
        Error::Format { location, message } => {
            Error::format(format!("{}: {location}", input.display()), message)
        }
        other => other,
    })?;
    let mut n_tokens = 0;
    fsutil::write_atomic(output, |w| {
        for doc in &docs {
            let tokens = normalizer.normalize_document(doc);
            n_tokens += tokens.len();
            writeln!(w, "{}", tokens.join(" "))?;
        }
        Ok(())
    })?;
    Ok((docs.len(), n_tokens))
}
