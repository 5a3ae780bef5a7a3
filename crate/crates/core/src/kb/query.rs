use std::collections::BTreeSet;

use super::store::{Binding, FactStore};
use super::{Atom, KbError};
use crate::sexpr::SExpr;

/// Conjunctive query with disjunction and safe negation. Variables that are
/// not projected away are implicitly existential.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Pattern(Atom),
    And(Vec<QueryExpr>),
    Or(Vec<QueryExpr>),
    Not(Box<QueryExpr>),
}

impl QueryExpr {
    pub fn from_sexpr(expr: &SExpr) -> Result<Self, KbError> {
        let items = expr.as_list().ok_or_else(|| KbError::Malformed(expr.to_string()))?;
        let children =
            |rest: &[SExpr]| -> Result<Vec<QueryExpr>, KbError> { rest.iter().map(QueryExpr::from_sexpr).collect() };
        match items.first().and_then(SExpr::as_symbol) {
            Some("and") => Ok(QueryExpr::And(children(&items[1..])?)),
            Some("or") if items.len() > 1 => Ok(QueryExpr::Or(children(&items[1..])?)),
            Some("not") if items.len() == 2 => Ok(QueryExpr::Not(Box::new(QueryExpr::from_sexpr(&items[1])?))),
            Some("or" | "not") => Err(KbError::Malformed(expr.to_string())),
            _ => Atom::from_sexpr(expr).map(QueryExpr::Pattern),
        }
    }

    pub fn parse(text: &str) -> Result<Self, KbError> {
        let expr = crate::sexpr::parse(text).map_err(|e| KbError::Malformed(e.to_string()))?;
        Self::from_sexpr(&expr)
    }

    pub fn to_sexpr(&self) -> SExpr {
        let tagged = |tag: &str, xs: &[QueryExpr]| {
            SExpr::List(
                std::iter::once(SExpr::symbol(tag))
                    .chain(xs.iter().map(QueryExpr::to_sexpr))
                    .collect(),
            )
        };
        match self {
            QueryExpr::Pattern(a) => a.to_sexpr(),
            QueryExpr::And(xs) => tagged("and", xs),
            QueryExpr::Or(xs) => tagged("or", xs),
            QueryExpr::Not(x) => SExpr::list([SExpr::symbol("not"), x.to_sexpr()]),
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        self.to_sexpr().vars().into_iter().collect()
    }

    /// All patterns, including those under `not`.
    pub fn patterns(&self) -> Vec<&Atom> {
        match self {
            QueryExpr::Pattern(a) => vec![a],
            QueryExpr::And(xs) | QueryExpr::Or(xs) => xs.iter().flat_map(|x| x.patterns()).collect(),
            QueryExpr::Not(x) => x.patterns(),
        }
    }

    /// Replaces variables with the bound terms.
    pub fn substitute(&self, binding: &Binding) -> QueryExpr {
        let sub = |a: &Atom| Atom {
            predicate: super::store::substitute(&a.predicate, binding),
            args: a.args.iter().map(|x| super::store::substitute(x, binding)).collect(),
        };
        match self {
            QueryExpr::Pattern(a) => QueryExpr::Pattern(sub(a)),
            QueryExpr::And(xs) => QueryExpr::And(xs.iter().map(|x| x.substitute(binding)).collect()),
            QueryExpr::Or(xs) => QueryExpr::Or(xs.iter().map(|x| x.substitute(binding)).collect()),
            QueryExpr::Not(x) => QueryExpr::Not(Box::new(x.substitute(binding))),
        }
    }

    pub fn check_safety(&self) -> Result<(), KbError> {
        self.bound_after(&BTreeSet::new()).map(|_| ())
    }

    /// Variables guaranteed bound after evaluating `self` with `bound` bound.
    fn bound_after(&self, bound: &BTreeSet<String>) -> Result<BTreeSet<String>, KbError> {
        match self {
            QueryExpr::Pattern(a) => {
                let mut out = bound.clone();
                out.extend(a.vars());
                Ok(out)
            }
            QueryExpr::And(xs) => {
                let mut out = bound.clone();
                for x in xs.iter().filter(|x| !matches!(x, QueryExpr::Not(_))) {
                    out = x.bound_after(&out)?;
                }
                for x in xs.iter().filter(|x| matches!(x, QueryExpr::Not(_))) {
                    x.bound_after(&out)?;
                }
                Ok(out)
            }
            QueryExpr::Or(xs) => {
                let mut sets = xs.iter().map(|x| x.bound_after(bound));
                let first = sets.next().transpose()?.unwrap_or_else(|| bound.clone());
                for s in sets {
                    if s? != first {
                        return Err(KbError::UnsafeDisjunction(self.to_sexpr().to_string()));
                    }
                }
                Ok(first)
            }
            QueryExpr::Not(x) => {
                if x.vars().iter().any(|v| !bound.contains(v)) {
                    return Err(KbError::UnsafeNegation(self.to_sexpr().to_string()));
                }
                x.bound_after(bound)?;
                Ok(bound.clone())
            }
        }
    }

    pub(crate) fn evaluate(&self, store: &FactStore) -> BTreeSet<Binding> {
        self.eval(store, vec![Binding::new()]).into_iter().collect()
    }

    fn eval(&self, store: &FactStore, input: Vec<Binding>) -> Vec<Binding> {
        match self {
            QueryExpr::Pattern(a) => input.iter().flat_map(|b| store.matches(a, b)).collect(),
            QueryExpr::And(xs) => {
                let mut cur = input;
                for x in xs.iter().filter(|x| !matches!(x, QueryExpr::Not(_))) {
                    if cur.is_empty() {
                        break;
                    }
                    cur = x.eval(store, cur);
                }
                for x in xs.iter().filter(|x| matches!(x, QueryExpr::Not(_))) {
                    cur = x.eval(store, cur);
                }
                cur
            }
            QueryExpr::Or(xs) => {
                let mut seen = BTreeSet::new();
                for x in xs {
                    seen.extend(x.eval(store, input.clone()));
                }
                seen.into_iter().collect()
            }
            QueryExpr::Not(x) => input
                .into_iter()
                .filter(|b| x.eval(store, vec![b.clone()]).is_empty())
                .collect(),
        }
    }
}

impl std::fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_sexpr().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb_str;

    const TOY: &str = "\
(capitalCity CityOfParisFrance France)
(capitalCity CityOfBerlinGermany Germany)
(capitalCity CityOfRomeItaly Italy)
(capitalCity CityOfMadridSpain Spain)
(capitalCity CityOfLisbonPortugal Portugal)
(isa France Country)
(isa Germany Country)
(isa Italy Country)
(isa Spain Country)
(isa Portugal Country)
(capitalCity CityOfAustinTexas Texas)
(isa Texas State)
(euMember France)
(euMember Germany)
";

    #[test]
    fn all_capitals() {
        let kb = load_kb_str(TOY).unwrap();
        let all = kb.query_str("(capitalCity ?Y ?X)").unwrap();
        assert_eq!(all.len(), 6);
        let countries = kb.query_str("(and (capitalCity ?Y ?X) (isa ?X Country))").unwrap();
        assert_eq!(countries.len(), 5);
        for b in &countries {
            assert_eq!(b.len(), 2);
        }
    }

    #[test]
    fn disjunction_and_negation() {
        let kb = load_kb_str(TOY).unwrap();
        let q = "(and (isa ?X Country) (not (euMember ?X)))";
        let got: Vec<_> = kb
            .query_str(q)
            .unwrap()
            .into_iter()
            .map(|b| b["X"].to_string())
            .collect();
        assert_eq!(got, ["Italy", "Portugal", "Spain"]);
        let q = "(or (isa ?X State) (euMember ?X))";
        assert_eq!(kb.query_str(q).unwrap().len(), 3);
    }

    #[test]
    fn negation_safety() {
        let kb = load_kb_str(TOY).unwrap();
        assert!(matches!(
            kb.query_str("(not (euMember ?X))").unwrap_err(),
            KbError::UnsafeNegation(_)
        ));
        // the binding sibling may come after the negation textually
        assert_eq!(
            kb.query_str("(and (not (euMember ?X)) (isa ?X Country))")
                .unwrap()
                .len(),
            3
        );
        assert!(matches!(
            kb.query_str("(or (isa ?X State) (capitalCity ?Y ?X))").unwrap_err(),
            KbError::UnsafeDisjunction(_)
        ));
    }

    #[test]
    fn ground_query_yields_empty_binding() {
        let kb = load_kb_str(TOY).unwrap();
        let got = kb.query_str("(isa France Country)").unwrap();
        assert_eq!(got.len(), 1);
        assert!(got.iter().next().unwrap().is_empty());
        assert!(kb.query_str("(isa France State)").unwrap().is_empty());
    }

    #[test]
    fn malformed_queries() {
        assert!(QueryExpr::parse("(not)").is_err());
        assert!(QueryExpr::parse("(not (a b) (c d))").is_err());
        assert!(QueryExpr::parse("foo").is_err());
        assert!(QueryExpr::parse("(p)").is_err());
    }

    #[test]
    fn display_round_trips() {
        let text = "(and (capitalCity ?Y ?X) (isa ?X Country) (not (euMember ?X)))";
        assert_eq!(QueryExpr::parse(text).unwrap().to_string(), text);
    }
}
