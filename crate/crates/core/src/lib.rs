//! Hybrid question answering over a deductive knowledge base and a word
//! embedding space.

pub mod analogy;
pub mod displacer;
pub mod harness;
pub mod kb;
pub mod lexicon;
pub mod sexpr;
pub mod vecspace;

pub use analogy::{AnalogyAnswer, AnalogyError, AnalogyProblem, AnalogySolver, AnswerSource};
pub use displacer::{Displacer, DisplacerError, PipelineConfig, QueryTemplate, RankedAnswer};
pub use harness::{ExperimentReport, HarnessError, RunConfig, Stores};
pub use kb::{Binding, KbError, KnowledgeBase, QueryExpr};
pub use lexicon::{Lexicon, LexiconError};
pub use sexpr::{ParseError, SExpr};
pub use vecspace::{EmbeddingSpace, Neighbor, SearchMode, VecError, Vector};
