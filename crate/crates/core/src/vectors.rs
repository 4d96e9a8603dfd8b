//! Embedding files.
//!
//! Text format: a `<rows> <dim>` header line, then one line per row with
//! the symbol followed by `dim` floats at 9 significant digits.
//!
//! Binary format (word2vec): the same header line, then per row the
//! symbol, a single space, and `dim` little-endian `f32` values. Writers
//! of this format usually put a newline after each row; the reader skips
//! newlines before a symbol.

use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl FromStr for VectorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(VectorFormat::Text),
            "binary" => Ok(VectorFormat::Binary),
            other => Err(Error::Config(format!("unknown vector format {other:?}"))),
        }
    }
}

/// Formats `v` with 9 significant digits.
fn format_component(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_text_to<W: Write>(matrix: &EmbeddingMatrix, w: &mut W) -> Result<()> {
    if matrix.is_empty() {
        return Err(Error::Config("refusing to write an empty embedding matrix".into()));
    }
    writeln!(w, "{} {}", matrix.len(), matrix.dim())?;
    for (symbol, row) in matrix.iter() {
        w.write_all(symbol.as_bytes())?;
        for &v in row {
            write!(w, " {}", format_component(v))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `matrix` in text format; the file appears only once complete.
pub fn write_text(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    if matrix.is_empty() {
        return Err(Error::Config("refusing to write an empty embedding matrix".into()));
    }
    fsutil::write_atomic(path, |w| write_text_to(matrix, w))
}

fn parse_header(line: &str, location: &str) -> Result<(usize, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let parse = |s: &str| s.parse::<usize>().ok();
    match fields.as_slice() {
        [n, d] => match (parse(n), parse(d)) {
            (Some(n), Some(d)) if d > 0 => Ok((n, d)),
            _ => Err(Error::format(location, format!("malformed header {line:?}"))),
        },
        _ => Err(Error::format(
            location,
            format!("malformed header {line:?}: expected \"<rows> <dim>\""),
        )),
    }
}

pub fn read_text_from<R: BufRead>(reader: R, name: &str) -> Result<EmbeddingMatrix> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::format(format!("{name}: line 1"), "empty file")),
    };
    let (n_rows, dim) = parse_header(&header, &format!("{name}: line 1"))?;

    let mut symbols = Vec::with_capacity(n_rows);
    let mut data = Vec::with_capacity(n_rows * dim);
    let mut seen = std::collections::HashSet::with_capacity(n_rows);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let location = format!("{name}: line {}", idx + 2);
        if line.trim().is_empty() {
            continue;
        }
        if symbols.len() == n_rows {
            return Err(Error::format(
                location,
                format!("more rows than the {n_rows} declared in the header"),
            ));
        }
        let mut fields = line.split_whitespace();
        let symbol = fields.next().unwrap_or_default();
        let mut n_values = 0;
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(&location, format!("invalid number {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::format(&location, format!("non-finite value {field:?}")));
            }
            data.push(v);
            n_values += 1;
        }
        if n_values != dim {
            return Err(Error::format(
                location,
                format!("row {symbol:?} has {n_values} values, header declares {dim}"),
            ));
        }
        if !seen.insert(symbol.to_owned()) {
            return Err(Error::format(location, format!("duplicate symbol {symbol:?}")));
        }
        symbols.push(symbol.to_owned());
    }
    if symbols.len() != n_rows {
        return Err(Error::format(
            format!("{name}: end of file"),
            format!("header declares {n_rows} rows, found {}", symbols.len()),
        ));
    }
    EmbeddingMatrix::new(symbols, dim, data)
}

pub fn read_text(path: &Path) -> Result<EmbeddingMatrix> {
    read_text_from(fsutil::open(path)?, &path.display().to_string())
}

pub fn write_binary_to<W: Write>(matrix: &EmbeddingMatrix, w: &mut W) -> Result<()> {
    if matrix.is_empty() {
        return Err(Error::Config("refusing to write an empty embedding matrix".into()));
    }
    writeln!(w, "{} {}", matrix.len(), matrix.dim())?;
    for (symbol, row) in matrix.iter() {
        if symbol.contains([' ', '\n']) {
            return Err(Error::Config(format!(
                "symbol {symbol:?} cannot be stored in binary format"
            )));
        }
        w.write_all(symbol.as_bytes())?;
        w.write_all(b" ")?;
        for &v in row {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_binary(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, |w| write_binary_to(matrix, w))
}

/// Byte-counting reader for offset diagnostics.
struct Tracked<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> Tracked<R> {
    fn peek(&mut self) -> Result<Option<u8>> {
        Ok(self.inner.fill_buf()?.first().copied())
    }

    fn bump(&mut self) {
        self.inner.consume(1);
        self.offset += 1;
    }

    fn read_until(&mut self, delim: u8, limit: usize) -> Result<Option<Vec<u8>>> {
        let mut buf = Vec::new();
        loop {
            match self.peek()? {
                None => return Ok(None),
                Some(b) if b == delim => {
                    self.bump();
                    return Ok(Some(buf));
                }
                Some(b) => {
                    buf.push(b);
                    self.bump();
                    if buf.len() > limit {
                        return Ok(None);
                    }
                }
            }
        }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                break;
            }
            filled += n;
            self.offset += n as u64;
        }
        Ok(filled)
    }
}

const MAX_HEADER_BYTES: usize = 64;
const MAX_SYMBOL_BYTES: usize = 4096;

/// Whether every byte could belong to a decimal number in a text file.
fn looks_like_text(bytes: &[u8]) -> bool {
    bytes
        .iter()
        .all(|b| b.is_ascii_digit() || b" .eE+-\t\n".contains(b))
}

pub fn read_binary_from<R: BufRead>(reader: R, name: &str) -> Result<EmbeddingMatrix> {
    let mut r = Tracked {
        inner: reader,
        offset: 0,
    };
    let at = |offset: u64| format!("{name}: byte {offset}");

    let header = r
        .read_until(b'\n', MAX_HEADER_BYTES)?
        .ok_or_else(|| Error::format(at(0), "missing or oversized header line"))?;
    let header = String::from_utf8(header).map_err(|_| Error::format(at(0), "header is not UTF-8"))?;
    let (n_rows, dim) = parse_header(&header, &at(0))?;

    let mut symbols = Vec::with_capacity(n_rows);
    let mut data = Vec::with_capacity(n_rows * dim);
    let mut seen = std::collections::HashSet::with_capacity(n_rows);
    let mut payload = vec![0u8; dim * 4];

    for row in 0..n_rows {
        while r.peek()? == Some(b'\n') {
            r.bump();
        }
        let start = r.offset;
        let symbol = r.read_until(b' ', MAX_SYMBOL_BYTES)?.ok_or_else(|| {
            Error::format(
                at(start),
                format!("truncated file: header declares {n_rows} rows, row {} is incomplete", row + 1),
            )
        })?;
        let symbol = String::from_utf8(symbol)
            .map_err(|_| Error::format(at(start), format!("row {} symbol is not UTF-8", row + 1)))?;
        if symbol.is_empty() {
            return Err(Error::format(at(start), format!("row {} has an empty symbol", row + 1)));
        }

        let payload_start = r.offset;
        let n = r.read_exact(&mut payload)?;
        if n < payload.len() {
            return Err(Error::format(
                at(payload_start),
                format!(
                    "truncated file: row {} ({symbol:?}) needs {} payload bytes, found {n}",
                    row + 1,
                    payload.len()
                ),
            ));
        }
        if looks_like_text(&payload) {
            return Err(Error::format(
                at(payload_start),
                "payload looks like text; is this a text-format file?",
            ));
        }
        for chunk in payload.chunks_exact(4) {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(Error::format(
                    at(payload_start),
                    format!("non-finite value in row {} ({symbol:?})", row + 1),
                ));
            }
            data.push(f64::from(v));
        }
        if !seen.insert(symbol.clone()) {
            return Err(Error::format(at(start), format!("duplicate symbol {symbol:?}")));
        }
        symbols.push(symbol);
    }

    while r.peek()? == Some(b'\n') {
        r.bump();
    }
    if r.peek()?.is_some() {
        return Err(Error::format(
            at(r.offset),
            format!("trailing data after the {n_rows} rows declared in the header"),
        ));
    }
    EmbeddingMatrix::new(symbols, dim, data)
}

pub fn read_binary(path: &Path) -> Result<EmbeddingMatrix> {
    read_binary_from(fsutil::open(path)?, &path.display().to_string())
}

pub fn read(path: &Path, format: VectorFormat) -> Result<EmbeddingMatrix> {
    match format {
        VectorFormat::Text => read_text(path),
        VectorFormat::Binary => read_binary(path),
    }
}

pub fn write(matrix: &EmbeddingMatrix, path: &Path, format: VectorFormat) -> Result<()> {
    match format {
        VectorFormat::Text => write_text(matrix, path),
        VectorFormat::Binary => write_binary(matrix, path),
    }
}
