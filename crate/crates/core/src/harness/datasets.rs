//! Loaders for the experiment input files. Every malformed row is reported
//! with its 1-based line number.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::world::{GoldRow, Split};
use crate::analogy::AnalogyProblem;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("dataset has no items")]
    EmptyDataset,
}

impl DatasetError {
    pub fn line(&self) -> Option<usize> {
        match self {
            DatasetError::BadRow { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn bad(line: usize, reason: impl Into<String>) -> DatasetError {
    DatasetError::BadRow {
        line,
        reason: reason.into(),
    }
}

fn nonempty<T>(items: Vec<T>) -> Result<Vec<T>, DatasetError> {
    if items.is_empty() {
        Err(DatasetError::EmptyDataset)
    } else {
        Ok(items)
    }
}

/// Content lines with their line numbers; skips blanks and `#` comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameRow {
    pub name: String,
    pub gender: String,
}

/// Two-column CSV `name,gender`; a `name,gender` header line is optional.
pub fn parse_names(text: &str) -> Result<Vec<NameRow>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            bad(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(bad(line, format!("expected `name,gender`, found {} fields", rec.len())));
        }
        if rows.is_empty() && rec[0].eq_ignore_ascii_case("name") && rec[1].eq_ignore_ascii_case("gender") {
            continue;
        }
        rows.push(NameRow {
            name: rec[0].to_string(),
            gender: rec[1].to_lowercase(),
        });
    }
    nonempty(rows)
}

/// One machine term per line.
pub fn parse_machine_list(text: &str) -> Result<Vec<String>, DatasetError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        if l.contains('\t') {
            return Err(bad(line, "expected a single term per line"));
        }
        out.push(l.to_string());
    }
    nonempty(out)
}

/// `relation \t input \t answer \t split` rows.
pub fn parse_gold(text: &str) -> Result<Vec<GoldRow>, DatasetError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let cols: Vec<&str> = l.split('\t').collect();
        let [relation, input, answer, split] = cols[..] else {
            return Err(bad(
                line,
                format!("expected 4 tab-separated columns, found {}", cols.len()),
            ));
        };
        let split: Split = split.parse().map_err(|e: String| bad(line, e))?;
        out.push(GoldRow {
            relation: relation.into(),
            input: input.into(),
            answer: answer.into(),
            split,
        });
    }
    nonempty(out)
}

/// Gold answers of one relation, grouped by input term.
pub fn gold_by_input(rows: &[GoldRow], relation: &str) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.relation == relation) {
        out.entry(r.input.clone()).or_default().push(r.answer.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SswrItem {
    pub category: String,
    pub problem: AnalogyProblem,
    pub gold: String,
}

/// `: category` headers followed by `a b c d` lines.
pub fn parse_sswr(text: &str) -> Result<Vec<SswrItem>, DatasetError> {
    let mut category: Option<String> = None;
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        if let Some(rest) = l.strip_prefix(':') {
            let name = rest.trim();
            if name.is_empty() {
                return Err(bad(line, "empty category name"));
            }
            category = Some(name.to_string());
            continue;
        }
        let terms: Vec<&str> = l.split_whitespace().collect();
        let [a, b, c, d] = terms[..] else {
            return Err(bad(line, format!("expected 4 terms, found {}", terms.len())));
        };
        let Some(cat) = &category else {
            return Err(bad(line, "problem before any `: category` header"));
        };
        out.push(SswrItem {
            category: cat.clone(),
            problem: AnalogyProblem::new(a, b, c),
            gold: d.to_string(),
        });
    }
    nonempty(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatItem {
    pub stem: (String, String),
    pub choices: [(String, String); 4],
    /// Index into `choices`.
    pub gold: usize,
    pub alternates: Vec<String>,
}

impl SatItem {
    /// `stem.0 : stem.1 :: gold.0 : ?`
    pub fn problem(&self) -> AnalogyProblem {
        AnalogyProblem::new(&self.stem.0, &self.stem.1, &self.choices[self.gold].0)
    }

    /// Accepted fourth terms: the gold choice and any alternates.
    pub fn accepted(&self) -> Vec<String> {
        let mut out = vec![self.choices[self.gold].1.clone()];
        out.extend(self.alternates.iter().cloned());
        out
    }
}

/// Blank-line separated blocks: stem pair, four choice pairs, gold letter,
/// then an optional `alternates: x y ...` line.
pub fn parse_sat(text: &str) -> Result<Vec<SatItem>, DatasetError> {
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('#') {
            continue;
        }
        if l.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, l));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }

    let pair = |line: usize, l: &str| -> Result<(String, String), DatasetError> {
        let t: Vec<&str> = l.split_whitespace().collect();
        match t[..] {
            [x, y] => Ok((x.to_string(), y.to_string())),
            _ => Err(bad(line, format!("expected a pair of terms, found {}", t.len()))),
        }
    };
    let mut out = Vec::new();
    for block in blocks {
        if block.len() < 6 || block.len() > 7 {
            let (line, _) = block[0];
            return Err(bad(
                line,
                format!(
                    "item has {} lines; expected stem, 4 choices, gold letter and optional alternates",
                    block.len()
                ),
            ));
        }
        let stem = pair(block[0].0, block[0].1)?;
        let mut choices: [(String, String); 4] = Default::default();
        for (slot, &(line, l)) in choices.iter_mut().zip(&block[1..5]) {
            *slot = pair(line, l)?;
        }
        let (gline, g) = block[5];
        let gold = match g.to_ascii_lowercase().as_str() {
            "a" => 0,
            "b" => 1,
            "c" => 2,
            "d" => 3,
            _ => return Err(bad(gline, format!("gold must be a letter a-d, found {g:?}"))),
        };
        let alternates = match block.get(6) {
            None => Vec::new(),
            Some(&(line, l)) => {
                let Some(rest) = l.strip_prefix("alternates:") else {
                    return Err(bad(line, "expected `alternates:` line"));
                };
                rest.split_whitespace().map(String::from).collect()
            }
        };
        out.push(SatItem {
            stem,
            choices,
            gold,
            alternates,
        });
    }
    nonempty(out)
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String, DatasetError> {
    Ok(std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_with_and_without_header() {
        let rows = parse_names("name,gender\nmary,Female\n\njohn , male\n").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].gender, "female");
        assert_eq!(rows[1].name, "john");
        assert_eq!(parse_names("a,male\n").unwrap().len(), 1);
    }

    #[test]
    fn names_errors() {
        assert!(matches!(parse_names(""), Err(DatasetError::EmptyDataset)));
        assert!(matches!(parse_names("name,gender\n"), Err(DatasetError::EmptyDataset)));
        let e = parse_names("a,male\nb\n").unwrap_err();
        assert_eq!(e.line(), Some(2));
        assert_eq!(parse_names("a,male\nb,female,x\n").unwrap_err().line(), Some(2));
    }

    #[test]
    fn machines_and_gold() {
        assert_eq!(
            parse_machine_list("# list\nloader_1\n\ndump truck\n").unwrap(),
            ["loader_1", "dump truck"]
        );
        assert!(matches!(parse_machine_list("\n# x\n"), Err(DatasetError::EmptyDataset)));
        let g = parse_gold("capitals\tcountry_01\tcapital_01\tkb\nparts\tx\ty\theld-out\n").unwrap();
        assert_eq!(g[1].split, Split::HeldOut);
        assert_eq!(gold_by_input(&g, "parts")["x"], ["y"]);
        assert_eq!(parse_gold("a\tb\tc\n").unwrap_err().line(), Some(1));
        assert_eq!(parse_gold("a\tb\tc\tkb\na\tb\tc\tmaybe\n").unwrap_err().line(), Some(2));
    }

    #[test]
    fn sswr_format() {
        let items = parse_sswr(": capitals\nathens greece berlin germany\n\n: other\na b c d\n").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].problem, AnalogyProblem::new("athens", "greece", "berlin"));
        assert_eq!(items[1].category, "other");
        assert_eq!(parse_sswr(": c\na b c\n").unwrap_err().line(), Some(2));
        assert_eq!(parse_sswr("a b c d\n").unwrap_err().line(), Some(1));
        assert_eq!(parse_sswr(":\n").unwrap_err().line(), Some(1));
    }

    #[test]
    fn sat_format() {
        let text = "take took\nrun ran\nsee sat\ngo went\neat ate\nb\n\nx y\na b\nc d\ne f\ng h\nD\nalternates: q r\n";
        let items = parse_sat(text).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].gold, 1);
        assert_eq!(items[0].problem(), AnalogyProblem::new("take", "took", "see"));
        assert_eq!(items[0].accepted(), ["sat"]);
        assert_eq!(items[1].accepted(), ["h", "q", "r"]);
    }

    #[test]
    fn sat_errors() {
        assert_eq!(parse_sat("a b\nc d\n").unwrap_err().line(), Some(1));
        let bad_gold = "a b\nc d\ne f\ng h\ni j\nz\n";
        assert_eq!(parse_sat(bad_gold).unwrap_err().line(), Some(6));
        let bad_pair = "a b\nc d e\ne f\ng h\ni j\na\n";
        assert_eq!(parse_sat(bad_pair).unwrap_err().line(), Some(2));
        let bad_alt = "a b\nc d\ne f\ng h\ni j\na\nalso: x\n";
        assert_eq!(parse_sat(bad_alt).unwrap_err().line(), Some(7));
        assert!(matches!(parse_sat("\n\n"), Err(DatasetError::EmptyDataset)));
    }
}
