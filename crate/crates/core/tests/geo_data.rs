use std::path::PathBuf;

use displacer_core::harness::{run_query, QueryMode, RunConfig, Stores};
use displacer_core::kb::load_kb;
use displacer_core::lexicon::Lexicon;
use displacer_core::vecspace::EmbeddingSpace;
use displacer_core::SExpr;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn stores() -> Stores {
    Stores {
        kb: load_kb(data("geo.kb")).unwrap(),
        space: EmbeddingSpace::new(4),
        lexicon: Lexicon::load(data("geo_lexicon.tsv")).unwrap(),
        source: "bundled geo data".into(),
    }
}

#[test]
fn bundled_kb_has_two_hundred_facts_and_no_german_capital() {
    let s = stores();
    assert_eq!(s.kb.fact_count(), 200);
    assert!(s.kb.query_str("(capitalCity ?X Germany)").unwrap().is_empty());
    // the rule derives city membership from capitals
    assert!(!s.kb.query_str("(cityInCountry Paris France)").unwrap().is_empty());
}

#[test]
fn kb_mode_answers_a_bundled_fact() {
    let answers = run_query(
        &stores(),
        "(capitalCity ?X France)",
        QueryMode::Kb,
        None,
        &RunConfig::default(),
    )
    .unwrap();
    let names: Vec<&str> = answers.iter().map(|a| a.answer.as_str()).collect();
    assert_eq!(names, ["Paris"]);
}

#[test]
fn paris_is_ambiguous() {
    let s = stores();
    let senses = s.lexicon.word2kb("Paris");
    assert!(senses.len() >= 3);
    assert!(senses.contains(&SExpr::symbol("ParisTexas")));
    for term in ["Berlin", "Frankfurt", "Germany"] {
        assert!(!s.lexicon.word2kb(term).is_empty(), "{term}");
    }
}
