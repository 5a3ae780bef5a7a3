use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::kmeans::auto_k;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ClusterCount {
    #[default]
    Auto,
    Fixed(usize),
}

impl ClusterCount {
    /// Cluster count for `m` points, never more than `m`.
    pub fn resolve(self, m: usize) -> usize {
        match self {
            ClusterCount::Auto => auto_k(m),
            ClusterCount::Fixed(k) => k.min(m),
        }
    }
}

impl FromStr for ClusterCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(ClusterCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(ClusterCount::Fixed(k)),
            _ => Err(format!("expected \"auto\" or a positive count, got {s:?}")),
        }
    }
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterCount::Auto => f.write_str("auto"),
            ClusterCount::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl From<ClusterCount> for String {
    fn from(c: ClusterCount) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ClusterCount {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifyMode {
    /// A label needs more than half of the neighbor votes.
    #[default]
    Majority,
    /// Nearest label vector to the mean answer vector.
    LabelVector,
}

impl FromStr for ClassifyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "majority" => Ok(ClassifyMode::Majority),
            "label-vector" | "label_vector" => Ok(ClassifyMode::LabelVector),
            _ => Err(format!("unknown classify mode {s:?}")),
        }
    }
}

impl fmt::Display for ClassifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifyMode::Majority => "majority",
            ClassifyMode::LabelVector => "label-vector",
        })
    }
}

/// How single-answer candidates are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ranking {
    /// Distance to the averaged estimate vector.
    #[default]
    Centroid,
    /// Mean distance to the individual estimate vectors.
    MeanDistance,
}

impl FromStr for Ranking {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centroid" => Ok(Ranking::Centroid),
            "mean-distance" | "mean_distance" => Ok(Ranking::MeanDistance),
            _ => Err(format!("unknown ranking {s:?}")),
        }
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ranking::Centroid => "centroid",
            Ranking::MeanDistance => "mean-distance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub n_neighbors: usize,
    /// Senses considered per term when a surface form is ambiguous.
    pub max_senses: usize,
    pub k_clusters: ClusterCount,
    pub classify_mode: ClassifyMode,
    pub answers_returned: usize,
    /// Raw nearest-neighbor results scanned while looking for covered terms.
    pub search_cap: usize,
    pub ranking: Ranking,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_neighbors: 4,
            max_senses: 8,
            k_clusters: ClusterCount::Auto,
            classify_mode: ClassifyMode::Majority,
            answers_returned: 10,
            search_cap: 50,
            ranking: Ranking::Centroid,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 8] = [
        "n_neighbors",
        "max_senses",
        "k_clusters",
        "classify_mode",
        "answers_returned",
        "search_cap",
        "ranking",
        "seed",
    ];

    pub fn validate(&self) -> Result<(), String> {
        if self.n_neighbors == 0 {
            return Err("n_neighbors must be at least 1".into());
        }
        if self.answers_returned == 0 {
            return Err("answers_returned must be at least 1".into());
        }
        if self.max_senses == 0 {
            return Err("max_senses must be at least 1".into());
        }
        if self.search_cap < self.n_neighbors {
            return Err("search_cap must be at least n_neighbors".into());
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(v: &str) -> Result<usize, String> {
            v.parse().map_err(|_| format!("not a count: {v:?}"))
        }
        match key {
            "n_neighbors" => self.n_neighbors = num(value)?,
            "max_senses" => self.max_senses = num(value)?,
            "k_clusters" => self.k_clusters = value.parse()?,
            "classify_mode" => self.classify_mode = value.parse()?,
            "answers_returned" => self.answers_returned = num(value)?,
            "search_cap" => self.search_cap = num(value)?,
            "ranking" => self.ranking = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed {value:?}"))?,
            _ => return Err(format!("unknown setting {key:?}")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_setters() {
        let mut c = PipelineConfig::default();
        assert_eq!(c.n_neighbors, 4);
        c.set("k_clusters", "3").unwrap();
        c.set("classify_mode", "label-vector").unwrap();
        assert_eq!(c.k_clusters, ClusterCount::Fixed(3));
        assert!(c.set("n_neighbors", "x").is_err());
        assert!(c.set("bogus", "1").is_err());
        c.set("n_neighbors", "0").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let c = PipelineConfig {
            k_clusters: ClusterCount::Fixed(5),
            ..Default::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"k_clusters\":\"5\""));
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), c);
    }
}
