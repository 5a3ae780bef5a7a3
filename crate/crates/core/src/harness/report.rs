//! Experiment reports: per-item records plus aggregates derived from them,
//! serialized as JSON lines with a trailing summary record.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::displacer::TRACKED_RANKS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub input: String,
    pub gold: Vec<String>,
    pub predicted: Option<String>,
    pub rank: Option<usize>,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Experiment-specific numbers, e.g. part precision.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl ItemRecord {
    pub fn new(index: usize, input: impl Into<String>, gold: Vec<String>) -> Self {
        ItemRecord {
            index,
            category: None,
            input: input.into(),
            gold,
            predicted: None,
            rank: None,
            correct: false,
            error: None,
            values: BTreeMap::new(),
        }
    }
}

/// Which aggregates an experiment reports on top of overall accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Accuracy,
    RankTable,
    Confusion,
    ValueMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub metrics: MetricKind,
    /// Where the data came from: a world directory or explicit store paths.
    pub source: String,
    pub config: serde_json::Value,
    #[serde(skip)]
    pub items: Vec<ItemRecord>,
    pub aggregates: BTreeMap<String, f64>,
    pub wall_time_secs: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Line {
    Item(ItemRecord),
    Summary(ExperimentReport),
}

fn bump(m: &mut BTreeMap<String, f64>, key: String, by: f64) {
    *m.entry(key).or_insert(0.0) += by;
}

/// Aggregates as a pure function of the item records.
pub fn aggregate(kind: MetricKind, items: &[ItemRecord]) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let n = items.len() as f64;
    let correct = items.iter().filter(|i| i.correct).count() as f64;
    m.insert("items".into(), n);
    m.insert("correct".into(), correct);
    m.insert(
        "errors".into(),
        items.iter().filter(|i| i.error.is_some()).count() as f64,
    );
    m.insert("accuracy".into(), if n > 0.0 { correct / n } else { 0.0 });

    let mut by_cat: BTreeMap<&str, Vec<&ItemRecord>> = BTreeMap::new();
    for i in items {
        if let Some(c) = &i.category {
            by_cat.entry(c).or_default().push(i);
        }
    }
    for (cat, its) in &by_cat {
        let c = its.iter().filter(|i| i.correct).count() as f64;
        m.insert(format!("items[{cat}]"), its.len() as f64);
        m.insert(format!("accuracy[{cat}]"), c / its.len() as f64);
    }

    match kind {
        MetricKind::Accuracy => {}
        MetricKind::RankTable => {
            let mut groups: Vec<(String, Vec<&ItemRecord>)> = vec![(String::new(), items.iter().collect())];
            groups.extend(by_cat.iter().map(|(c, its)| (format!("[{c}]"), its.clone())));
            for (suffix, its) in groups {
                let total = its.len().max(1) as f64;
                let mut missed = its.len();
                for r in 1..=TRACKED_RANKS {
                    let hits = its.iter().filter(|i| i.rank == Some(r)).count();
                    missed -= hits;
                    m.insert(format!("p_rank{r}{suffix}"), hits as f64 / total);
                }
                m.insert(format!("p_missed{suffix}"), missed as f64 / total);
            }
        }
        MetricKind::Confusion => {
            for i in items {
                let gold = i.gold.first().map_or("?", String::as_str);
                match &i.predicted {
                    Some(p) => bump(&mut m, format!("confusion[{gold}->{p}]"), 1.0),
                    None => bump(&mut m, format!("unclassified[{gold}]"), 1.0),
                }
            }
        }
        MetricKind::ValueMeans => {
            let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
            for i in items {
                for (k, v) in &i.values {
                    let e = sums.entry(k).or_insert((0.0, 0));
                    e.0 += v;
                    e.1 += 1;
                }
            }
            for (k, (s, c)) in sums {
                m.insert(format!("sum[{k}]"), s);
                m.insert(format!("mean[{k}]"), s / c as f64);
            }
        }
    }
    m
}

impl ExperimentReport {
    pub fn new(
        experiment: impl Into<String>,
        metrics: MetricKind,
        source: impl Into<String>,
        config: serde_json::Value,
        mut items: Vec<ItemRecord>,
        wall_time_secs: f64,
    ) -> Self {
        items.sort_by_key(|i| i.index);
        let aggregates = aggregate(metrics, &items);
        ExperimentReport {
            experiment: experiment.into(),
            metrics,
            source: source.into(),
            config,
            items,
            aggregates,
            wall_time_secs,
        }
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.aggregates.get(key).copied()
    }

    pub fn recompute(&self) -> BTreeMap<String, f64> {
        aggregate(self.metrics, &self.items)
    }

    pub fn is_consistent(&self) -> bool {
        self.recompute() == self.aggregates
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for item in &self.items {
            serde_json::to_writer(&mut w, &Line::Item(item.clone()))?;
            w.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut w, &Line::Summary(self.clone()))?;
        w.write_all(b"\n")
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let mut items = Vec::new();
        let mut summary = None;
        for (n, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            match serde_json::from_str::<Line>(l).map_err(|e| format!("line {}: {e}", n + 1))? {
                Line::Item(i) => items.push(i),
                Line::Summary(s) => summary = Some(s),
            }
        }
        let mut report = summary.ok_or("no summary record")?;
        report.items = items;
        Ok(report)
    }

    /// Aligned `metric value` lines for terminals.
    pub fn summary_table(&self) -> String {
        let mut out = format!("experiment: {}\nsource: {}\n", self.experiment, self.source);
        let width = self.aggregates.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in &self.aggregates {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                writeln!(out, "{k:<width$}  {v}").unwrap();
            } else {
                writeln!(out, "{k:<width$}  {v:.4}").unwrap();
            }
        }
        writeln!(out, "wall time: {:.2}s", self.wall_time_secs).unwrap();
        out
    }
}
