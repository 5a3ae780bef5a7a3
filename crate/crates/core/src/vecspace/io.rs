//! Text embedding format: a `N D` header, then `term c1 .. cD` per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{EmbeddingSpace, VecError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read embeddings: {0}")]
    Io(#[from] std::io::Error),
    #[error("line 1: bad header: {0}")]
    BadHeader(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad component {token:?}")]
    BadValue { line: usize, token: String },
    #[error("header declares {expected} rows, file has {found}")]
    RowCount { expected: usize, found: usize },
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::BadHeader(_) => Some(1),
            LoadError::DimensionMismatch { line, .. } | LoadError::BadValue { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Stop after this many rows.
    pub max_rows: Option<usize>,
}

impl EmbeddingSpace {
    pub fn load(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Self, LoadError> {
        Self::read(BufReader::new(File::open(path)?), opts)
    }

    pub fn parse_str(text: &str) -> Result<Self, LoadError> {
        Self::read(text.as_bytes(), LoadOptions::default())
    }

    pub fn read(reader: impl BufRead, opts: LoadOptions) -> Result<Self, LoadError> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| LoadError::BadHeader("empty file".into()))?;
        let (n, dim) = parse_header(&header)?;
        let cap = opts.max_rows.map_or(n, |m| m.min(n));
        let mut space = EmbeddingSpace::new(dim);
        let mut row = Vec::with_capacity(dim);
        let mut count = 0;
        for (i, text) in lines.enumerate() {
            let line = i + 2;
            let text = text?;
            if text.trim().is_empty() {
                continue;
            }
            if count == cap {
                if opts.max_rows.is_some() {
                    break;
                }
                count += 1;
                continue;
            }
            count += 1;
            let mut fields = text.split_whitespace();
            let term = fields.next().unwrap_or_default();
            row.clear();
            for tok in fields {
                let x: f32 = tok.parse().map_err(|_| LoadError::BadValue {
                    line,
                    token: tok.to_string(),
                })?;
                if !x.is_finite() {
                    return Err(LoadError::BadValue {
                        line,
                        token: tok.to_string(),
                    });
                }
                row.push(x);
            }
            match space.insert(term, &row) {
                Ok(()) => {}
                Err(VecError::DimensionMismatch { expected, found }) => {
                    return Err(LoadError::DimensionMismatch { line, expected, found })
                }
                Err(VecError::ZeroVector) => {
                    log::warn!("line {line}: skipping zero vector for {term:?}");
                }
                Err(e) => unreachable!("row validated above: {e}"),
            }
        }
        if count != cap {
            return Err(LoadError::RowCount {
                expected: n,
                found: count,
            });
        }
        Ok(space)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    /// Writes the text format; components use the shortest form that reads
    /// back to the same `f32`.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (id, term) in self.terms().iter().enumerate() {
            write!(w, "{term}")?;
            for x in self.row(id) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn parse_header(header: &str) -> Result<(usize, usize), LoadError> {
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, d] = fields[..] else {
        return Err(LoadError::BadHeader(format!("expected \"N D\", got {header:?}")));
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| LoadError::BadHeader(format!("not a count: {s:?}")))
    };
    let (n, d) = (parse(n)?, parse(d)?);
    if d == 0 {
        return Err(LoadError::BadHeader("dimension must be positive".into()));
    }
    Ok((n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "4 3\nParis 1 0 0\nLondon 0.5 0.5 0\nrich 0 1e0 0\nruler 0 0 -2.5E-1\n";

    #[test]
    fn loads_rows_exactly() {
        let s = EmbeddingSpace::parse_str(TOY).unwrap();
        assert_eq!((s.len(), s.dim()), (4, 3));
        assert_eq!(s.word2vec("ruler").unwrap().as_slice(), &[0.0, 0.0, -0.25]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(EmbeddingSpace::parse_str("4\n"), Err(LoadError::BadHeader(_))));
        assert!(matches!(EmbeddingSpace::parse_str(""), Err(LoadError::BadHeader(_))));
        let err = EmbeddingSpace::parse_str("2 3\na 1 2 3\nb 1 2\n").unwrap_err();
        assert!(matches!(
            err,
            LoadError::DimensionMismatch {
                line: 3,
                expected: 3,
                found: 2
            }
        ));
        let err = EmbeddingSpace::parse_str("1 2\na 1 x\n").unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = EmbeddingSpace::parse_str("1 2\na 1 NaN\n").unwrap_err();
        assert!(matches!(err, LoadError::BadValue { line: 2, .. }));
        assert!(matches!(
            EmbeddingSpace::parse_str("3 2\na 1 2\n"),
            Err(LoadError::RowCount { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn duplicates_and_zero_rows() {
        let s = EmbeddingSpace::parse_str("3 2\na 1 2\nz 0 0\na 3 4\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("a").unwrap().as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn row_cap() {
        let s = EmbeddingSpace::read(TOY.as_bytes(), LoadOptions { max_rows: Some(2) }).unwrap();
        assert_eq!(s.terms(), ["Paris", "London"]);
    }

    #[test]
    fn save_round_trips() {
        let s = EmbeddingSpace::from_rows(2, [("x", vec![0.1f32, -3.25e-7]), ("y", vec![1e30, 2.0])]).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = EmbeddingSpace::parse_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        for t in ["x", "y"] {
            assert_eq!(back.get(t), s.get(t));
        }
    }
}
