//! Experiment plumbing: store loading, dataset readers, synthetic worlds,
//! runners and reports.

mod config;
pub mod datasets;
mod experiments;
mod report;
pub mod world;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analogy::{AnalogyError, AnalogySolver};
use crate::displacer::{Displacer, DisplacerError};
use crate::kb::{load_kb, load_kb_str, KbError, KbLoadError, KnowledgeBase};
use crate::lexicon::{Lexicon, LexiconError};
use crate::vecspace::{EmbeddingSpace, LoadError, LoadOptions};

pub use config::RunConfig;
pub use datasets::DatasetError;
pub use experiments::{
    run_gender, run_parts, run_query, run_rank_probability, run_sat, run_sswr, sweep_neighbors, AnalogyMode,
    QueryAnswer, QueryMode, CAPITAL_TEMPLATE, GENDER_TEMPLATE, PARTS_TEMPLATE,
};
pub use report::{aggregate, ExperimentReport, ItemRecord, MetricKind};
pub use world::{gen_synthetic_world, GeneratedWorld, SyntheticWorldSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid world spec: {0}")]
    BadSpec(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("embeddings: {0}")]
    Embeddings(#[from] LoadError),
    #[error("knowledge base: {0}")]
    KbLoad(#[from] KbLoadError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Displacer(#[from] DisplacerError),
    #[error(transparent)]
    Analogy(#[from] AnalogyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Errors caused by settings rather than by input data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::BadSpec(_)
                | HarnessError::Config(_)
                | HarnessError::Displacer(DisplacerError::BadConfig(_) | DisplacerError::BadTemplate(_))
        )
    }
}

/// The three stores an experiment runs against.
#[derive(Debug)]
pub struct Stores {
    pub kb: KnowledgeBase,
    pub space: EmbeddingSpace,
    pub lexicon: Lexicon,
    /// Human-readable origin, copied into reports.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorePaths {
    pub kb: PathBuf,
    pub embeddings: PathBuf,
    pub lexicon: PathBuf,
}

impl StorePaths {
    pub fn in_world_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        StorePaths {
            kb: dir.join(world::KB_FILE),
            embeddings: dir.join(world::EMBEDDINGS_FILE),
            lexicon: dir.join(world::LEXICON_FILE),
        }
    }
}

impl Stores {
    pub fn load(paths: &StorePaths, cfg: &RunConfig) -> Result<Self, HarnessError> {
        let kb = load_kb(&paths.kb)?;
        let lexicon = Lexicon::load(&paths.lexicon)?;
        let opts = LoadOptions { max_rows: cfg.max_rows };
        let space = EmbeddingSpace::load(&paths.embeddings, opts)?.with_search_mode(cfg.search_mode);
        let source = format!(
            "kb={} embeddings={} lexicon={}",
            paths.kb.display(),
            paths.embeddings.display(),
            paths.lexicon.display()
        );
        Ok(Stores {
            kb,
            space,
            lexicon,
            source,
        })
    }

    pub fn from_world_dir(dir: impl AsRef<Path>, cfg: &RunConfig) -> Result<Self, HarnessError> {
        let mut s = Self::load(&StorePaths::in_world_dir(&dir), cfg)?;
        s.source = format!("synthetic world {}", dir.as_ref().display());
        Ok(s)
    }

    /// Parses a generated world without touching the file system.
    pub fn from_generated(world: &GeneratedWorld, cfg: &RunConfig) -> Result<Self, HarnessError> {
        let file = |name: &str| world.file(name).unwrap_or_default();
        let kb = load_kb_str(file(world::KB_FILE))?;
        let lexicon = Lexicon::from_tsv(file(world::LEXICON_FILE))?;
        let opts = LoadOptions { max_rows: cfg.max_rows };
        let space =
            EmbeddingSpace::read(file(world::EMBEDDINGS_FILE).as_bytes(), opts)?.with_search_mode(cfg.search_mode);
        Ok(Stores {
            kb,
            space,
            lexicon,
            source: "synthetic world (in memory)".into(),
        })
    }

    pub fn displacer(&self) -> Displacer<'_> {
        Displacer::new(&self.kb, &self.space, &self.lexicon)
    }

    pub fn solver(&self, cfg: &RunConfig) -> AnalogySolver<'_> {
        AnalogySolver {
            max_senses: cfg.pipeline.max_senses,
            ..AnalogySolver::new(&self.kb, &self.space, &self.lexicon)
        }
    }
}
