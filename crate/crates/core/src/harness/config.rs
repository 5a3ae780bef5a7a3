//! Flat `key = value` run configuration.

use serde::{Deserialize, Serialize};

use crate::displacer::PipelineConfig;
use crate::vecspace::SearchMode;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub search_mode: SearchMode,
    /// Read at most this many embedding rows.
    pub max_rows: Option<usize>,
    /// Vector candidates examined per analogy problem.
    pub analogy_k: usize,
    /// Neighbor counts tried by the sweep.
    pub sweep_min: usize,
    pub sweep_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineConfig::default(),
            search_mode: SearchMode::Exact,
            max_rows: None,
            analogy_k: 5,
            sweep_min: 1,
            sweep_max: 8,
        }
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 5] = ["search_mode", "max_rows", "analogy_k", "sweep_min", "sweep_max"];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let count = |v: &str| v.parse::<usize>().map_err(|_| format!("not a count: {v:?}"));
        match key {
            "search_mode" => self.search_mode = value.parse()?,
            "max_rows" => self.max_rows = Some(count(value)?),
            "analogy_k" => self.analogy_k = count(value)?,
            "sweep_min" => self.sweep_min = count(value)?,
            "sweep_max" => self.sweep_max = count(value)?,
            _ => self.pipeline.set(key, value)?,
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.pipeline.validate().map_err(HarnessError::Config)?;
        if self.analogy_k == 0 {
            return Err(HarnessError::Config("analogy_k must be at least 1".into()));
        }
        if self.sweep_min == 0 || self.sweep_min > self.sweep_max {
            return Err(HarnessError::Config(
                "sweep range must satisfy 1 <= sweep_min <= sweep_max".into(),
            ));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values. Blank lines
    /// and `#` comments are ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<(), HarnessError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| HarnessError::Config(format!("line {}: {reason}", i + 1));
            let Some((k, v)) = line.split_once('=') else {
                return Err(err(format!("expected key = value, found {line:?}")));
            };
            self.set(k.trim(), v.trim()).map_err(err)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut c = RunConfig::default();
        c.apply_str(text)?;
        Ok(c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::displacer::ClassifyMode;

    #[test]
    fn parses_every_pipeline_key() {
        let text = "# run\nn_neighbors = 6\nmax_senses=2\nk_clusters = auto\nclassify_mode = label-vector\n\
                    answers_returned = 12\nsearch_cap = 40\nranking = mean-distance\nseed = 9\n\
                    search_mode = approximate\nmax_rows = 1000\nanalogy_k = 3\nsweep_min = 2\nsweep_max = 4\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.pipeline.n_neighbors, 6);
        assert_eq!(c.pipeline.classify_mode, ClassifyMode::LabelVector);
        assert_eq!(c.search_mode, SearchMode::Approximate);
        assert_eq!(c.max_rows, Some(1000));
        c.validate().unwrap();
        for k in PipelineConfig::KEYS.iter().chain(RunConfig::KEYS.iter()) {
            assert!(text.contains(k), "{k} not covered");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("seed = 1\nn_neighbors 4\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = RunConfig::parse("\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(RunConfig::parse("n_neighbors = 0").unwrap().validate().is_err());
    }
}
