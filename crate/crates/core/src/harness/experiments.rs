use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::datasets::{NameRow, SatItem, SswrItem};
use super::report::{ExperimentReport, ItemRecord, MetricKind};
use super::{HarnessError, RunConfig, Stores};
use crate::analogy::{AnalogyAnswer, AnalogyError, AnalogyProblem};
use crate::displacer::{DisplacerError, QueryTemplate, TRACKED_RANKS};
use crate::kb::QueryExpr;
use crate::sexpr::SExpr;

/// Default templates as (query, input variable, answer variable).
pub const GENDER_TEMPLATE: (&str, &str, &str) = ("(gender ?N ?G)", "N", "G");
pub const PARTS_TEMPLATE: (&str, &str, &str) = ("(physicalPartTypes ?M ?P)", "M", "P");
pub const CAPITAL_TEMPLATE: (&str, &str, &str) = ("(capitalCity ?Y ?X)", "X", "Y");

fn snapshot(cfg: &RunConfig, extra: serde_json::Value) -> serde_json::Value {
    let mut v = cfg.to_json();
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn start(cfg: &RunConfig, stores: &Stores) -> Result<Instant, HarnessError> {
    cfg.validate()?;
    stores.kb.freeze()?;
    Ok(Instant::now())
}

/// Labels each name by the majority gender of its covered neighbors.
pub fn run_gender(
    stores: &Stores,
    names: &[NameRow],
    template: &QueryTemplate,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    let t0 = start(cfg, stores)?;
    let labels: Vec<String> = names
        .iter()
        .map(|n| n.gender.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let d = stores.displacer();
    let items = names
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rec = ItemRecord::new(i, &row.name, vec![row.gender.clone()]);
            match d.classify_by_neighbors(&row.name, template, &labels, &cfg.pipeline) {
                Ok(c) => {
                    rec.correct = c.label == row.gender;
                    rec.predicted = Some(c.label);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    let config = snapshot(cfg, json!({ "template": template.to_string(), "labels": labels }));
    Ok(ExperimentReport::new(
        "gender",
        MetricKind::Confusion,
        &stores.source,
        config,
        items,
        t0.elapsed().as_secs_f64(),
    ))
}

fn rank_items(
    stores: &Stores,
    template: &QueryTemplate,
    domain: Option<&QueryExpr>,
    cfg: &RunConfig,
    category: Option<String>,
    first_index: usize,
) -> Result<Vec<ItemRecord>, HarnessError> {
    let table = stores
        .displacer()
        .estimate_rank_probabilities(template, domain, &cfg.pipeline)?;
    Ok(table
        .outcomes
        .into_iter()
        .enumerate()
        .map(|(i, o)| ItemRecord {
            category: category.clone(),
            correct: o.rank == Some(1),
            predicted: o.predicted,
            rank: o.rank,
            error: o.error,
            ..ItemRecord::new(first_index + i, o.input, vec![o.gold])
        })
        .collect())
}

/// Leave-one-out rank table for one template.
pub fn run_rank_probability(
    stores: &Stores,
    template: &QueryTemplate,
    domain: Option<&QueryExpr>,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    let t0 = start(cfg, stores)?;
    let items = rank_items(stores, template, domain, cfg, None, 0)?;
    let config = snapshot(
        cfg,
        json!({ "template": template.to_string(), "domain": domain.map(|d| d.to_string()), "tracked_ranks": TRACKED_RANKS }),
    );
    Ok(ExperimentReport::new(
        "rank-probability",
        MetricKind::RankTable,
        &stores.source,
        config,
        items,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Rank tables for each neighbor count in `range`, one category per count.
pub fn sweep_neighbors(
    stores: &Stores,
    template: &QueryTemplate,
    domain: Option<&QueryExpr>,
    range: RangeInclusive<usize>,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    if *range.start() == 0 || range.is_empty() {
        return Err(HarnessError::Config(format!(
            "neighbor range {}..={} must be nonempty and start at 1 or more",
            range.start(),
            range.end()
        )));
    }
    let t0 = start(cfg, stores)?;
    let mut items = Vec::new();
    for n in range.clone() {
        let mut c = cfg.clone();
        c.pipeline.n_neighbors = n;
        c.pipeline.search_cap = c.pipeline.search_cap.max(n);
        let next = items.len();
        items.extend(rank_items(
            stores,
            template,
            domain,
            &c,
            Some(format!("n={n:02}")),
            next,
        )?);
    }
    let config = snapshot(
        cfg,
        json!({ "template": template.to_string(), "range": [range.start(), range.end()] }),
    );
    Ok(ExperimentReport::new(
        "sweep-neighbors",
        MetricKind::RankTable,
        &stores.source,
        config,
        items,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Multi-answer displacement over a machine list, with KB and hybrid
/// coverage and, where gold parts are known, top-3 precision.
pub fn run_parts(
    stores: &Stores,
    machines: &[String],
    gold: Option<&BTreeMap<String, Vec<String>>>,
    template: &QueryTemplate,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    let t0 = start(cfg, stores)?;
    let d = stores.displacer();
    let items: Result<Vec<ItemRecord>, HarnessError> = machines
        .par_iter()
        .enumerate()
        .map(|(i, machine)| {
            let golds = gold.and_then(|g| g.get(machine)).cloned().unwrap_or_default();
            let mut rec = ItemRecord::new(i, machine, golds.clone());
            let mut kb_covered = false;
            for sense in stores.lexicon.word2kb(machine) {
                if !stores.kb.query(&template.instantiate(&sense))?.is_empty() {
                    kb_covered = true;
                    break;
                }
            }
            let ranked = match d.displace_multi(machine, template, &cfg.pipeline) {
                Ok(r) => r,
                Err(e @ DisplacerError::BadConfig(_)) => return Err(e.into()),
                Err(e) => {
                    rec.error = Some(e.to_string());
                    Vec::new()
                }
            };
            let terms: Vec<&str> = ranked.iter().map(|r| r.term.as_str()).collect();
            rec.values.insert("kb_covered".into(), kb_covered as u8 as f64);
            rec.values
                .insert("hybrid_covered".into(), (kb_covered || !terms.is_empty()) as u8 as f64);
            rec.predicted = terms.first().map(|t| t.to_string());
            rec.rank = terms.iter().position(|t| golds.iter().any(|g| g == t)).map(|p| p + 1);
            rec.correct = rec.rank == Some(1);
            if !golds.is_empty() && !terms.is_empty() {
                let hits3 = terms.iter().take(3).filter(|t| golds.iter().any(|g| g == *t)).count();
                let top8: BTreeSet<&str> = terms.iter().take(8).copied().collect();
                let all8 = golds.iter().all(|g| top8.contains(g.as_str()));
                rec.values.insert("top3_precision".into(), hits3 as f64 / 3.0);
                rec.values.insert("all_in_top8".into(), all8 as u8 as f64);
            }
            Ok(rec)
        })
        .collect();
    let config = snapshot(cfg, json!({ "template": template.to_string(), "gold": gold.is_some() }));
    Ok(ExperimentReport::new(
        "parts",
        MetricKind::ValueMeans,
        &stores.source,
        config,
        items?,
        t0.elapsed().as_secs_f64(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalogyMode {
    Dsvs,
    Kb,
    Combined,
}

impl FromStr for AnalogyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dsvs" => Ok(AnalogyMode::Dsvs),
            "kb" => Ok(AnalogyMode::Kb),
            "combined" => Ok(AnalogyMode::Combined),
            _ => Err(format!("unknown analogy mode {s:?}; expected dsvs, kb or combined")),
        }
    }
}

impl fmt::Display for AnalogyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalogyMode::Dsvs => "dsvs",
            AnalogyMode::Kb => "kb",
            AnalogyMode::Combined => "combined",
        })
    }
}

fn solve(
    stores: &Stores,
    p: &AnalogyProblem,
    mode: AnalogyMode,
    index: usize,
    cfg: &RunConfig,
) -> Result<AnalogyAnswer, AnalogyError> {
    let solver = stores.solver(cfg);
    match mode {
        AnalogyMode::Dsvs => solver
            .solve_dsvs(p, cfg.analogy_k)?
            .into_iter()
            .next()
            .ok_or(AnalogyError::NoAnswer),
        AnalogyMode::Kb => solver.solve_kb_random(p, cfg.pipeline.seed.wrapping_add(index as u64)),
        AnalogyMode::Combined => solver.solve_combined(p, cfg.analogy_k),
    }
}

/// Analogy accuracy per category.
pub fn run_sswr(
    stores: &Stores,
    items: &[SswrItem],
    mode: AnalogyMode,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    let t0 = start(cfg, stores)?;
    let records = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut rec = ItemRecord {
                category: Some(item.category.clone()),
                ..ItemRecord::new(i, item.problem.to_string(), vec![item.gold.clone()])
            };
            match solve(stores, &item.problem, mode, i, cfg) {
                Ok(a) => {
                    rec.correct = a.term == item.gold;
                    rec.predicted = Some(a.term);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    Ok(ExperimentReport::new(
        format!("sswr-{mode}"),
        MetricKind::Accuracy,
        &stores.source,
        snapshot(cfg, json!({ "mode": mode })),
        records,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Open-ended SAT analogies scored against gold and alternates. A near miss
/// is a wrong answer whose accepted term is among the top vector candidates.
pub fn run_sat(
    stores: &Stores,
    items: &[SatItem],
    mode: AnalogyMode,
    cfg: &RunConfig,
) -> Result<ExperimentReport, HarnessError> {
    let t0 = start(cfg, stores)?;
    let solver = stores.solver(cfg);
    let records = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let p = item.problem();
            let accepted = item.accepted();
            let mut rec = ItemRecord {
                category: Some("sat".into()),
                ..ItemRecord::new(i, p.to_string(), accepted.clone())
            };
            match solve(stores, &p, mode, i, cfg) {
                Ok(a) => {
                    rec.correct = accepted.contains(&a.term);
                    rec.predicted = Some(a.term);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            let near = !rec.correct
                && solver
                    .solve_dsvs(&p, cfg.analogy_k)
                    .map(|c| c.iter().any(|x| accepted.contains(&x.term)))
                    .unwrap_or(false);
            rec.values.insert("near_miss".into(), near as u8 as f64);
            rec
        })
        .collect();
    Ok(ExperimentReport::new(
        format!("sat-{mode}"),
        MetricKind::ValueMeans,
        &stores.source,
        snapshot(cfg, json!({ "mode": mode })),
        records,
        t0.elapsed().as_secs_f64(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    Kb,
    HybridSingle,
    HybridMulti,
}

impl FromStr for QueryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kb" => Ok(QueryMode::Kb),
            "hybrid-single" | "hybrid" => Ok(QueryMode::HybridSingle),
            "hybrid-multi" => Ok(QueryMode::HybridMulti),
            _ => Err(format!(
                "unknown query mode {s:?}; expected kb, hybrid-single or hybrid-multi"
            )),
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::Kb => "kb",
            QueryMode::HybridSingle => "hybrid-single",
            QueryMode::HybridMulti => "hybrid-multi",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub answer: String,
    /// Distance-based score for hybrid answers; lower is better.
    pub score: Option<f64>,
    pub support: Option<usize>,
}

fn collect_constants(e: &SExpr, out: &mut Vec<String>) {
    if let Some(items) = e.as_list() {
        for x in items.iter().skip(1) {
            match x.as_symbol() {
                Some(s) => {
                    if !out.iter().any(|o| o == s) {
                        out.push(s.to_string());
                    }
                }
                None => collect_constants(x, out),
            }
        }
    }
}

fn replace_constant(e: &SExpr, name: &str, var: &str) -> SExpr {
    match e.as_list() {
        Some(items) => SExpr::list(items.iter().enumerate().map(|(i, x)| {
            if i > 0 && x.as_symbol() == Some(name) {
                SExpr::var(var)
            } else if i > 0 {
                replace_constant(x, name, var)
            } else {
                x.clone()
            }
        })),
        None => e.clone(),
    }
}

const INPUT_VAR: &str = "input__";

/// Turns a query with one constant hole into a template plus the surface
/// term to displace from. `term` picks the constant when there are several;
/// it may be the constant itself or one of its surface forms.
fn hybrid_template(
    stores: &Stores,
    query: &QueryExpr,
    term: Option<&str>,
) -> Result<(QueryTemplate, String), HarnessError> {
    let sx = query.to_sexpr();
    let mut constants = Vec::new();
    collect_constants(&sx, &mut constants);
    let (constant, surface) = match term {
        Some(t) => {
            let senses: Vec<String> = stores.lexicon.word2kb(t).iter().map(SExpr::to_string).collect();
            let c = constants
                .iter()
                .find(|c| *c == t || senses.contains(c))
                .ok_or_else(|| HarnessError::Config(format!("term {t:?} does not name a constant of {query}")))?;
            let surface = if c == t {
                stores.lexicon.surface(&SExpr::symbol(c.as_str()))
            } else {
                t.to_string()
            };
            (c.clone(), surface)
        }
        None => match &constants[..] {
            [c] => (c.clone(), stores.lexicon.surface(&SExpr::symbol(c.as_str()))),
            [] => {
                return Err(HarnessError::Config(format!(
                    "{query} has no constant to displace from"
                )))
            }
            _ => {
                return Err(HarnessError::Config(format!(
                    "{query} has several constants {constants:?}; pick one with --term"
                )))
            }
        },
    };
    let vars = query.vars();
    let [answer] = &vars[..] else {
        return Err(HarnessError::Config(format!(
            "hybrid queries need exactly one variable, {query} has {}",
            vars.len()
        )));
    };
    let expr = QueryExpr::from_sexpr(&replace_constant(&sx, &constant, INPUT_VAR))?;
    Ok((QueryTemplate::new(expr, INPUT_VAR, answer.clone())?, surface))
}

/// Answers a query from the KB alone or by displacement from covered
/// neighbors of the query's constant.
pub fn run_query(
    stores: &Stores,
    text: &str,
    mode: QueryMode,
    term: Option<&str>,
    cfg: &RunConfig,
) -> Result<Vec<QueryAnswer>, HarnessError> {
    cfg.validate()?;
    let query = QueryExpr::parse(text)?;
    match mode {
        QueryMode::Kb => {
            let mut out = Vec::new();
            for b in stores.kb.query(&query)? {
                let answer = if b.len() == 1 {
                    stores.lexicon.surface(b.values().next().unwrap())
                } else {
                    b.iter()
                        .map(|(k, v)| format!("?{k}={}", stores.lexicon.surface(v)))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                out.push(QueryAnswer {
                    answer,
                    score: None,
                    support: None,
                });
            }
            Ok(out)
        }
        QueryMode::HybridSingle | QueryMode::HybridMulti => {
            let (template, surface) = hybrid_template(stores, &query, term)?;
            let d = stores.displacer();
            let ranked = if mode == QueryMode::HybridSingle {
                d.displace_single(&surface, &template, &cfg.pipeline)?
            } else {
                d.displace_multi(&surface, &template, &cfg.pipeline)?
            };
            Ok(ranked
                .into_iter()
                .map(|r| QueryAnswer {
                    answer: r.term,
                    score: Some(r.score),
                    support: Some(r.support),
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::datasets::{gold_by_input, parse_gold, parse_machine_list, parse_names, parse_sat, parse_sswr};
    use crate::harness::world::{self, gen_synthetic_world, SyntheticWorldSpec};

    fn world(preset: &str, seed: u64) -> (crate::harness::GeneratedWorld, Stores) {
        let w = gen_synthetic_world(&SyntheticWorldSpec::preset(preset, seed).unwrap()).unwrap();
        let s = Stores::from_generated(&w, &RunConfig::default()).unwrap();
        (w, s)
    }

    fn template(t: (&str, &str, &str)) -> QueryTemplate {
        QueryTemplate::parse(t.0, t.1, t.2).unwrap()
    }

    #[test]
    fn gender_on_planted_world() {
        let (w, s) = world("gender", 2);
        let names = parse_names(w.file(world::NAMES_FILE).unwrap()).unwrap();
        let r = run_gender(&s, &names, &template(GENDER_TEMPLATE), &RunConfig::default()).unwrap();
        assert!(r.is_consistent());
        assert!(r.metric("accuracy").unwrap() >= 0.95, "{}", r.summary_table());
    }

    #[test]
    fn noiseless_rank_table_is_all_rank_one() {
        let (_, s) = world("capitals", 4);
        let r = run_rank_probability(&s, &template(CAPITAL_TEMPLATE), None, &RunConfig::default()).unwrap();
        assert_eq!(r.metric("p_rank1"), Some(1.0), "{}", r.summary_table());
        assert_eq!(r.metric("items"), Some(25.0));
    }

    #[test]
    fn sweep_rejects_zero_and_is_deterministic() {
        let (_, s) = world("capitals", 5);
        let t = template(CAPITAL_TEMPLATE);
        let cfg = RunConfig::default();
        assert!(sweep_neighbors(&s, &t, None, 0..=2, &cfg).unwrap_err().is_config());
        let a = sweep_neighbors(&s, &t, None, 1..=3, &cfg).unwrap();
        let b = sweep_neighbors(&s, &t, None, 1..=3, &cfg).unwrap();
        assert_eq!((&a.items, &a.aggregates), (&b.items, &b.aggregates));
        assert!(b.aggregates.contains_key("p_rank1[n=03]"));
    }

    #[test]
    fn parts_coverage() {
        let (w, s) = world("machines", 6);
        let machines = parse_machine_list(w.file(world::MACHINES_FILE).unwrap()).unwrap();
        let gold = gold_by_input(&parse_gold(w.file(world::GOLD_FILE).unwrap()).unwrap(), "parts");
        let r = run_parts(
            &s,
            &machines,
            Some(&gold),
            &template(PARTS_TEMPLATE),
            &RunConfig::default(),
        )
        .unwrap();
        assert_eq!(r.metric("sum[kb_covered]"), Some(28.0));
        assert_eq!(r.metric("sum[hybrid_covered]"), Some(32.0));
        let unknown = vec!["nothing".to_string(), "nowhere".to_string()];
        let r = run_parts(&s, &unknown, None, &template(PARTS_TEMPLATE), &RunConfig::default()).unwrap();
        assert_eq!(r.metric("sum[hybrid_covered]"), Some(0.0));
        assert_eq!(r.metric("errors"), Some(2.0));
    }

    #[test]
    fn analogy_runners() {
        let (w, s) = world("analogy", 7);
        let cfg = RunConfig::default();
        let items = parse_sswr(w.file(world::SSWR_FILE).unwrap()).unwrap();
        let combined = run_sswr(&s, &items, AnalogyMode::Combined, &cfg).unwrap();
        assert_eq!(combined.metric("accuracy"), Some(1.0), "{}", combined.summary_table());
        let sat = parse_sat(w.file(world::SAT_FILE).unwrap()).unwrap();
        let r = run_sat(&s, &sat, AnalogyMode::Combined, &cfg).unwrap();
        assert_eq!(r.metric("accuracy"), Some(1.0), "{}", r.summary_table());
        assert!(r.is_consistent());
    }

    #[test]
    fn query_modes() {
        let (_, s) = world("capitals", 8);
        let cfg = RunConfig::default();
        let kb = run_query(&s, "(capitalCity ?X Country03)", QueryMode::Kb, None, &cfg).unwrap();
        assert_eq!(kb[0].answer, "capital_03");
        let hy = run_query(&s, "(capitalCity ?X Country29)", QueryMode::HybridSingle, None, &cfg).unwrap();
        assert_eq!(hy[0].answer, "capital_29");
        let by_surface = run_query(
            &s,
            "(capitalCity ?X Country29)",
            QueryMode::HybridSingle,
            Some("country_29"),
            &cfg,
        )
        .unwrap();
        assert_eq!(by_surface, hy);
        let e = run_query(&s, "(capitalCity ?X", QueryMode::Kb, None, &cfg).unwrap_err();
        assert!(!e.is_config(), "{e}");
        assert!(run_query(&s, "(capitalCity ?X ?Y)", QueryMode::HybridSingle, None, &cfg).is_err());
    }
}
