use std::collections::HashMap;

use crate::error::{Error, Result};

/// Symbol table with frequency counts.
///
/// Ids are dense and assigned in descending count order, ties broken by
/// symbol, so the same counts always yield the same ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    symbols: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total: u64,
}

impl Vocabulary {
    /// Keeps the symbols whose count reaches `min_count`.
    pub fn from_counts<I, S>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .map(|(s, c)| (s.into(), c))
            .filter(|&(_, c)| c >= min_count.max(1))
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut index = HashMap::with_capacity(entries.len());
        for (id, (symbol, _)) in entries.iter().enumerate() {
            if index.insert(symbol.clone(), id as u32).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary symbol {symbol:?}")));
            }
        }
        let total = entries.iter().map(|e| e.1).sum();
        let (symbols, counts) = entries.into_iter().unzip();
        Ok(Vocabulary {
            symbols,
            counts,
            index,
            total,
        })
    }

    /// Counts the tokens of a corpus and keeps those reaching `min_count`.
    pub fn build<'a, D, T>(documents: D, min_count: u64) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: IntoIterator<Item = &'a str>,
    {
        let mut counter = Counter::default();
        for doc in documents {
            counter.add_all(doc);
        }
        counter.into_vocabulary(min_count)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative frequency of `id` among all counted occurrences.
    pub fn frequency(&self, id: u32) -> f64 {
        self.count(id) as f64 / self.total as f64
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.symbols
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}

/// Mergeable symbol counter.
#[derive(Clone, Debug, Default)]
pub struct Counter {
    counts: HashMap<String, u64>,
}

impl Counter {
    pub fn add(&mut self, symbol: &str) {
        match self.counts.get_mut(symbol) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(symbol.to_owned(), 1);
            }
        }
    }

    pub fn add_all<'a, T: IntoIterator<Item = &'a str>>(&mut self, symbols: T) {
        for s in symbols {
            self.add(s);
        }
    }

    pub fn merge(&mut self, other: Counter) {
        for (s, c) in other.counts {
            *self.counts.entry(s).or_insert(0) += c;
        }
    }

    pub fn get(&self, symbol: &str) -> u64 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    pub fn into_vocabulary(self, min_count: u64) -> Result<Vocabulary> {
        Vocabulary::from_counts(self.counts, min_count)
    }
}
