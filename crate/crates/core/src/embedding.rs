use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dense row-major matrix with one labelled row per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    symbols: Vec<String>,
    index: HashMap<String, u32>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Checks that symbols are unique, that `data` holds exactly one row of
    /// `dim` values per symbol, and that every value is finite.
    pub fn new(symbols: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        if data.len() != symbols.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: symbols.len() * dim,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite value in row {:?}",
                symbols[pos / dim]
            )));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (id, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), id as u32).is_some() {
                return Err(Error::Config(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(EmbeddingMatrix {
            symbols,
            index,
            dim,
            data,
        })
    }

    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.1.len());
        let mut symbols = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (s, v) in rows {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            symbols.push(s.into());
            data.extend(v);
        }
        Self::new(symbols, dim, data)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn get(&self, symbol: &str) -> Option<&[f64]> {
        self.id(symbol).map(|id| self.row(id))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.symbols
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    /// Multiplies every component by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let m = EmbeddingMatrix::from_rows(vec![("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]).unwrap();
        assert_eq!(m.get("b"), Some(&[0.0, 1.0][..]));
        assert_eq!(m.len(), 2);

        assert!(EmbeddingMatrix::from_rows(vec![("a", vec![1.0]), ("a", vec![2.0])]).is_err());
        assert!(EmbeddingMatrix::from_rows(vec![("a", vec![1.0]), ("b", vec![2.0, 3.0])]).is_err());
        assert!(EmbeddingMatrix::from_rows(vec![("a", vec![f64::NAN])]).is_err());
        assert!(EmbeddingMatrix::new(vec!["a".into()], 2, vec![1.0]).is_err());
    }
}
