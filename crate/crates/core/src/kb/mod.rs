//! Ground-triple store with Horn-rule inference.
//!
//! Facts are asserted into a [`KnowledgeBase`] together with range-restricted
//! rules. The first query (or an explicit [`KnowledgeBase::freeze`])
//! materializes the least fixpoint bottom-up, stratum by stratum, with
//! negation-as-failure allowed only across strata. After that the closure is
//! read-only and queries may run concurrently.

mod loader;
mod materialize;
mod query;
mod store;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use thiserror::Error;

use crate::sexpr::SExpr;

pub use loader::{load_kb, load_kb_str, KbLoadError};
pub use query::QueryExpr;
pub use store::Binding;

use store::FactStore;

pub const DEFAULT_DEPTH_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("assertion contains a variable: {0}")]
    NonGroundAssertion(String),
    #[error("rule head variable ?{var} does not occur in a positive body literal: {rule}")]
    UnsafeRule { rule: String, var: String },
    #[error("negated expression has variables not bound by a positive sibling: {0}")]
    UnsafeNegation(String),
    #[error("branches of a disjunction bind different variables: {0}")]
    UnsafeDisjunction(String),
    #[error("derivation depth limit of {limit} exceeded")]
    DepthLimitExceeded { limit: usize },
    #[error("negation cycle through predicate {0}")]
    NegationCycle(String),
    #[error("malformed expression: {0}")]
    Malformed(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// A predicate applied to arguments. In queries the predicate itself may be
/// a variable; in facts and rule literals it is always a symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: SExpr,
    pub args: Vec<SExpr>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<SExpr>) -> Self {
        Atom {
            predicate: SExpr::Symbol(predicate.into()),
            args,
        }
    }

    pub fn from_sexpr(expr: &SExpr) -> Result<Self, KbError> {
        match expr.as_list() {
            Some([head @ (SExpr::Symbol(_) | SExpr::Variable(_)), args @ ..]) if !args.is_empty() => Ok(Atom {
                predicate: head.clone(),
                args: args.to_vec(),
            }),
            _ => Err(KbError::Malformed(expr.to_string())),
        }
    }

    pub fn to_sexpr(&self) -> SExpr {
        SExpr::List(
            std::iter::once(self.predicate.clone())
                .chain(self.args.iter().cloned())
                .collect(),
        )
    }

    pub fn predicate_name(&self) -> Option<&str> {
        self.predicate.as_symbol()
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.predicate.collect_vars(&mut out);
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

/// A ground fact such as `(capitalCity CityOfParisFrance France)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assertion {
    predicate: String,
    args: Vec<SExpr>,
}

impl Assertion {
    pub fn new(predicate: impl Into<String>, args: Vec<SExpr>) -> Result<Self, KbError> {
        let predicate = predicate.into();
        if args.is_empty() {
            return Err(KbError::Malformed(format!("({predicate})")));
        }
        if !args.iter().all(SExpr::is_ground) {
            return Err(KbError::NonGroundAssertion(
                Atom::new(predicate, args).to_sexpr().to_string(),
            ));
        }
        Ok(Assertion { predicate, args })
    }

    pub fn from_sexpr(expr: &SExpr) -> Result<Self, KbError> {
        let atom = Atom::from_sexpr(expr)?;
        match atom.predicate {
            SExpr::Symbol(p) => Assertion::new(p, atom.args),
            _ => Err(KbError::NonGroundAssertion(expr.to_string())),
        }
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn args(&self) -> &[SExpr] {
        &self.args
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

/// `head <= body` with every head variable bound by a positive body literal
/// and every variable of a negated literal bound likewise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornRule {
    head: Atom,
    body: Vec<Literal>,
}

impl HornRule {
    pub fn new(head: Atom, body: Vec<Literal>) -> Result<Self, KbError> {
        let rule_text = || {
            HornRule {
                head: head.clone(),
                body: body.clone(),
            }
            .to_string()
        };
        for lit in std::iter::once(&head).chain(body.iter().map(|l| &l.atom)) {
            if lit.predicate_name().is_none() {
                return Err(KbError::Unsupported(format!(
                    "variable predicate in rule: {}",
                    rule_text()
                )));
            }
        }
        if body.iter().all(|l| l.negated) {
            return Err(KbError::UnsafeRule {
                rule: rule_text(),
                var: head.vars().into_iter().next().unwrap_or_default(),
            });
        }
        let positive: BTreeSet<String> = body.iter().filter(|l| !l.negated).flat_map(|l| l.atom.vars()).collect();
        if let Some(var) = head.vars().into_iter().find(|v| !positive.contains(v)) {
            return Err(KbError::UnsafeRule { rule: rule_text(), var });
        }
        for lit in body.iter().filter(|l| l.negated) {
            if lit.atom.vars().iter().any(|v| !positive.contains(v)) {
                return Err(KbError::UnsafeNegation(lit.atom.to_sexpr().to_string()));
            }
        }
        Ok(HornRule { head, body })
    }

    /// Reads `(<= head body...)`, where the body is a sequence of literals or a
    /// single `(and ...)`; literals are atoms or `(not atom)`.
    pub fn from_sexpr(expr: &SExpr) -> Result<Self, KbError> {
        let items = expr
            .as_list()
            .filter(|items| items.first().and_then(SExpr::as_symbol) == Some("<="))
            .ok_or_else(|| KbError::Malformed(expr.to_string()))?;
        let (head, rest) = match &items[1..] {
            [head, rest @ ..] if !rest.is_empty() => (Atom::from_sexpr(head)?, rest),
            _ => return Err(KbError::Malformed(expr.to_string())),
        };
        let flat: Vec<&SExpr> = match rest {
            [single] if head_symbol(single) == Some("and") => single.as_list().unwrap()[1..].iter().collect(),
            _ => rest.iter().collect(),
        };
        let mut body = Vec::with_capacity(flat.len());
        for lit in flat {
            body.push(match head_symbol(lit) {
                Some("not") => match lit.as_list().unwrap() {
                    [_, inner] => Literal {
                        atom: Atom::from_sexpr(inner)?,
                        negated: true,
                    },
                    _ => return Err(KbError::Malformed(lit.to_string())),
                },
                Some(op @ ("and" | "or" | "<=")) => {
                    return Err(KbError::Unsupported(format!("`{op}` inside a rule body")))
                }
                _ => Literal {
                    atom: Atom::from_sexpr(lit)?,
                    negated: false,
                },
            });
        }
        HornRule::new(head, body)
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }
}

impl std::fmt::Display for HornRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(<= {}", self.head.to_sexpr())?;
        for lit in &self.body {
            if lit.negated {
                write!(f, " (not {})", lit.atom.to_sexpr())?;
            } else {
                write!(f, " {}", lit.atom.to_sexpr())?;
            }
        }
        f.write_str(")")
    }
}

fn head_symbol(expr: &SExpr) -> Option<&str> {
    expr.as_list()?.first()?.as_symbol()
}

/// Whether `(P a b)` or `(P b a)` holds for a pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArgOrder {
    AFirst,
    BFirst,
}

impl ArgOrder {
    pub fn flipped(self) -> Self {
        match self {
            ArgOrder::AFirst => ArgOrder::BFirst,
            ArgOrder::BFirst => ArgOrder::AFirst,
        }
    }
}

/// `(first anchor a)` and `(second anchor b)` both hold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnchorPattern {
    pub first: String,
    pub second: String,
    pub anchor: SExpr,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    facts: FactStore,
    rules: Vec<HornRule>,
    depth_limit: usize,
    closure: OnceLock<Result<FactStore, KbError>>,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new()
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::with_depth_limit(DEFAULT_DEPTH_LIMIT)
    }

    pub fn with_depth_limit(depth_limit: usize) -> Self {
        KnowledgeBase {
            facts: FactStore::default(),
            rules: Vec::new(),
            depth_limit,
            closure: OnceLock::new(),
        }
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    /// Number of distinct asserted facts.
    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn rules(&self) -> &[HornRule] {
        &self.rules
    }

    pub fn assert_fact(&mut self, fact: Assertion) {
        if self.facts.insert(&fact.predicate, fact.args) {
            self.closure = OnceLock::new();
        }
    }

    /// Parses and asserts a ground fact.
    pub fn assert_sexpr(&mut self, expr: &SExpr) -> Result<(), KbError> {
        self.assert_fact(Assertion::from_sexpr(expr)?);
        Ok(())
    }

    pub fn add_rule(&mut self, rule: HornRule) {
        if !self.rules.contains(&rule) {
            self.rules.push(rule);
            self.closure = OnceLock::new();
        }
    }

    /// Materializes the closure. Queries do this on demand; calling it up
    /// front surfaces inference errors before concurrent use.
    pub fn freeze(&self) -> Result<(), KbError> {
        self.closure().map(|_| ())
    }

    /// Number of facts in the materialized closure.
    pub fn closure_size(&self) -> Result<usize, KbError> {
        Ok(self.closure()?.len())
    }

    fn closure(&self) -> Result<&FactStore, KbError> {
        self.closure
            .get_or_init(|| materialize::materialize(&self.facts, &self.rules, self.depth_limit))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn query(&self, q: &QueryExpr) -> Result<BTreeSet<Binding>, KbError> {
        q.check_safety()?;
        let closure = self.closure()?;
        Ok(q.evaluate(closure).into_iter().collect())
    }

    pub fn query_str(&self, text: &str) -> Result<BTreeSet<Binding>, KbError> {
        let expr = crate::sexpr::parse(text).map_err(|e| KbError::Malformed(e.to_string()))?;
        self.query(&QueryExpr::from_sexpr(&expr)?)
    }

    /// True when the ground fact is in the closure.
    pub fn holds(&self, predicate: &str, args: &[SExpr]) -> Result<bool, KbError> {
        Ok(self.closure()?.contains(predicate, args))
    }

    /// Every binary predicate linking `a` and `b` in either direction.
    pub fn predicates_between(&self, a: &SExpr, b: &SExpr) -> Result<BTreeSet<(String, ArgOrder)>, KbError> {
        let closure = self.closure()?;
        let mut out = BTreeSet::new();
        for (p, row) in closure.with_arg(0, a) {
            if row.len() == 2 && &row[1] == b {
                out.insert((p.to_string(), ArgOrder::AFirst));
            }
        }
        for (p, row) in closure.with_arg(0, b) {
            if row.len() == 2 && &row[1] == a {
                out.insert((p.to_string(), ArgOrder::BFirst));
            }
        }
        Ok(out)
    }

    /// Every `(P1, P2, r)` with `(P1 r a)` and `(P2 r b)`, for `a != b`.
    pub fn shared_anchor_patterns(&self, a: &SExpr, b: &SExpr) -> Result<BTreeSet<AnchorPattern>, KbError> {
        let mut out = BTreeSet::new();
        if a == b {
            return Ok(out);
        }
        let closure = self.closure()?;
        let into_a: Vec<(&str, &SExpr)> = closure
            .with_arg(1, a)
            .filter(|(_, row)| row.len() == 2)
            .map(|(p, row)| (p, &row[0]))
            .collect();
        for (p2, row) in closure.with_arg(1, b).filter(|(_, row)| row.len() == 2) {
            for &(p1, anchor) in &into_a {
                if anchor == &row[0] {
                    out.insert(AnchorPattern {
                        first: p1.to_string(),
                        second: p2.to_string(),
                        anchor: anchor.clone(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Answers `d` with `(P c d)` for [`ArgOrder::AFirst`], `(P d c)` otherwise.
    pub fn apply_predicate(&self, predicate: &str, order: ArgOrder, c: &SExpr) -> Result<BTreeSet<SExpr>, KbError> {
        let closure = self.closure()?;
        let (known, answer) = match order {
            ArgOrder::AFirst => (0, 1),
            ArgOrder::BFirst => (1, 0),
        };
        Ok(closure
            .with_arg(known, c)
            .filter(|(p, row)| *p == predicate && row.len() == 2)
            .map(|(_, row)| row[answer].clone())
            .collect())
    }

    /// Answers `d` with `(first r c)` and `(second r d)` for some anchor `r`.
    pub fn apply_anchor(&self, first: &str, second: &str, c: &SExpr) -> Result<BTreeSet<SExpr>, KbError> {
        let closure = self.closure()?;
        let mut out = BTreeSet::new();
        for (_, row) in closure.with_arg(1, c).filter(|(p, row)| *p == first && row.len() == 2) {
            let anchor = &row[0];
            out.extend(
                closure
                    .with_arg(0, anchor)
                    .filter(|(p, r)| *p == second && r.len() == 2)
                    .map(|(_, r)| r[1].clone()),
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse;

    fn kb(text: &str) -> KnowledgeBase {
        load_kb_str(text).unwrap()
    }

    fn sym(s: &str) -> SExpr {
        SExpr::symbol(s)
    }

    fn answers(kb: &KnowledgeBase, q: &str, var: &str) -> Vec<String> {
        kb.query_str(q)
            .unwrap()
            .into_iter()
            .map(|b| b[var].to_string())
            .collect()
    }

    #[test]
    fn single_fact_query() {
        let mut k = KnowledgeBase::new();
        k.assert_sexpr(&parse("(capitalCity Paris France)").unwrap()).unwrap();
        assert_eq!(answers(&k, "(capitalCity ?X France)", "X"), ["Paris"]);
    }

    #[test]
    fn assert_is_idempotent() {
        let mut k = KnowledgeBase::new();
        let f = parse("(capitalCity Paris France)").unwrap();
        k.assert_sexpr(&f).unwrap();
        k.assert_sexpr(&f).unwrap();
        assert_eq!(k.fact_count(), 1);
    }

    #[test]
    fn non_ground_assertion_rejected() {
        let mut k = KnowledgeBase::new();
        let err = k.assert_sexpr(&parse("(p ?X)").unwrap()).unwrap_err();
        assert!(matches!(err, KbError::NonGroundAssertion(_)));
    }

    #[test]
    fn inherited_parts() {
        let k = kb(
            "(<= (physicalPartTypes ?M ?P) (and (genls ?M ?C) (physicalPartTypes ?C ?P)))\n\
                    (genls Bulldozer RoadVehicleICE)\n\
                    (physicalPartTypes RoadVehicleICE Piston)\n",
        );
        assert_eq!(answers(&k, "(physicalPartTypes Bulldozer ?P)", "P"), ["Piston"]);
    }

    #[test]
    fn unsafe_rule_rejected() {
        let err = HornRule::from_sexpr(&parse("(<= (p ?X ?Y) (q ?X))").unwrap()).unwrap_err();
        assert_eq!(
            err,
            KbError::UnsafeRule {
                rule: "(<= (p ?X ?Y) (q ?X))".into(),
                var: "Y".into()
            }
        );
        let err = HornRule::from_sexpr(&parse("(<= (p ?X) (q ?X) (not (r ?Z)))").unwrap()).unwrap_err();
        assert!(matches!(err, KbError::UnsafeNegation(_)));
        let err = HornRule::from_sexpr(&parse("(<= (p ?X) (or (q ?X) (r ?X)))").unwrap()).unwrap_err();
        assert!(matches!(err, KbError::Unsupported(_)));
    }

    #[test]
    fn transitive_chain_depth_three() {
        let k = kb("(<= (genls ?A ?C) (genls ?A ?B) (genls ?B ?C))\n\
                    (genls A B)\n(genls B C)\n(genls C D)\n");
        let mut got = answers(&k, "(genls A ?X)", "X");
        got.sort();
        assert_eq!(got, ["B", "C", "D"]);
    }

    #[test]
    fn depth_limit_is_enforced() {
        let mut text = String::from("(<= (reach ?A ?C) (reach ?A ?B) (edge ?B ?C))\n(reach n0 n0)\n");
        for i in 0..10 {
            text.push_str(&format!("(edge n{i} n{})\n", i + 1));
        }
        let mut k = KnowledgeBase::with_depth_limit(4);
        for expr in crate::sexpr::parse_all(&text).unwrap() {
            match HornRule::from_sexpr(&expr) {
                Ok(r) => k.add_rule(r),
                Err(_) => k.assert_sexpr(&expr).unwrap(),
            }
        }
        assert_eq!(
            k.query_str("(reach n0 ?X)").unwrap_err(),
            KbError::DepthLimitExceeded { limit: 4 }
        );
        let full = load_kb_str(&text).unwrap();
        assert_eq!(full.query_str("(reach n0 ?X)").unwrap().len(), 11);
    }

    #[test]
    fn nonterminating_function_terms_hit_limit() {
        let k = kb("(<= (nat (SuccFn ?X)) (nat ?X))\n(nat Zero)\n");
        assert_eq!(
            k.query_str("(nat ?X)").unwrap_err(),
            KbError::DepthLimitExceeded {
                limit: DEFAULT_DEPTH_LIMIT
            }
        );
    }

    #[test]
    fn stratified_negation() {
        let k = kb("(<= (bachelor ?X) (male ?X) (not (married ?X)))\n\
                    (male Bob)\n(male Tom)\n(married Tom)\n");
        assert_eq!(answers(&k, "(bachelor ?X)", "X"), ["Bob"]);
    }

    #[test]
    fn negation_cycle_rejected() {
        let k = kb("(<= (p ?X) (d ?X) (not (q ?X)))\n(<= (q ?X) (d ?X) (not (p ?X)))\n(d a)\n");
        assert!(matches!(k.freeze().unwrap_err(), KbError::NegationCycle(_)));
    }

    #[test]
    fn empty_kb_answers_nothing() {
        let k = KnowledgeBase::new();
        assert!(k.query_str("(capitalCity ?X France)").unwrap().is_empty());
    }

    const GEO: &str = "(capitalCity CityOfParisFrance France)\n\
        (geographicalSubRegion France CityOfParisFrance)\n\
        (capitalCity CityOfLondonEngland England)\n\
        (gerundOf take taking)\n(pastTenseOf take took)\n\
        (gerundOf run running)\n(pastTenseOf run ran)\n";

    #[test]
    fn predicates_between_both_orders() {
        let k = kb(GEO);
        let got = k.predicates_between(&sym("CityOfParisFrance"), &sym("France")).unwrap();
        let want: BTreeSet<_> = [
            ("capitalCity".to_string(), ArgOrder::AFirst),
            ("geographicalSubRegion".to_string(), ArgOrder::BFirst),
        ]
        .into();
        assert_eq!(got, want);
        let flipped: BTreeSet<_> = k
            .predicates_between(&sym("France"), &sym("CityOfParisFrance"))
            .unwrap()
            .into_iter()
            .map(|(p, o)| (p, o.flipped()))
            .collect();
        assert_eq!(flipped, want);
        assert!(k
            .predicates_between(&sym("France"), &sym("England"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn shared_anchor_found_and_applied() {
        let k = kb(GEO);
        let pats = k.shared_anchor_patterns(&sym("taking"), &sym("took")).unwrap();
        assert_eq!(
            pats.into_iter().collect::<Vec<_>>(),
            [AnchorPattern {
                first: "gerundOf".into(),
                second: "pastTenseOf".into(),
                anchor: sym("take")
            }]
        );
        let ans = k.apply_anchor("gerundOf", "pastTenseOf", &sym("running")).unwrap();
        assert_eq!(ans.into_iter().collect::<Vec<_>>(), [sym("ran")]);
        assert!(k
            .shared_anchor_patterns(&sym("taking"), &sym("England"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn apply_predicate_directions() {
        let k = kb(GEO);
        let a = k
            .apply_predicate("capitalCity", ArgOrder::AFirst, &sym("CityOfLondonEngland"))
            .unwrap();
        assert_eq!(a.into_iter().collect::<Vec<_>>(), [sym("England")]);
        let b = k
            .apply_predicate("capitalCity", ArgOrder::BFirst, &sym("France"))
            .unwrap();
        assert_eq!(b.into_iter().collect::<Vec<_>>(), [sym("CityOfParisFrance")]);
    }

    #[test]
    fn frozen_kb_is_shareable() {
        fn assert_sync<T: Sync + Send>() {}
        assert_sync::<KnowledgeBase>();
        let k = kb(GEO);
        k.freeze().unwrap();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| assert_eq!(k.query_str("(capitalCity ?X ?Y)").unwrap().len(), 2));
            }
        });
    }
}
