use std::collections::{BTreeMap, HashMap, HashSet};

use crate::sexpr::SExpr;

use super::Atom;

/// Variable name → ground term.
pub type Binding = BTreeMap<String, SExpr>;

/// Ground facts grouped by predicate, indexed by (argument position, term).
#[derive(Debug, Clone, Default)]
pub(crate) struct FactStore {
    tables: HashMap<String, Table>,
    len: usize,
}

#[derive(Debug, Clone, Default)]
struct Table {
    rows: Vec<Vec<SExpr>>,
    seen: HashSet<Vec<SExpr>>,
    by_arg: HashMap<(usize, SExpr), Vec<usize>>,
}

impl Table {
    fn insert(&mut self, args: Vec<SExpr>) -> bool {
        if self.seen.contains(&args) {
            return false;
        }
        let idx = self.rows.len();
        for (pos, arg) in args.iter().enumerate() {
            self.by_arg.entry((pos, arg.clone())).or_default().push(idx);
        }
        self.seen.insert(args.clone());
        self.rows.push(args);
        true
    }

    /// Rows that could match `pattern` (already substituted) by index lookup.
    fn candidates<'a>(&'a self, pattern: &[SExpr]) -> Box<dyn Iterator<Item = &'a Vec<SExpr>> + 'a> {
        let mut best: Option<&Vec<usize>> = None;
        for (pos, arg) in pattern.iter().enumerate() {
            if !arg.is_ground() {
                continue;
            }
            // ground argument with no index entry: nothing can match
            let Some(hits) = self.by_arg.get(&(pos, arg.clone())) else {
                return Box::new(std::iter::empty());
            };
            if best.is_none_or(|b| hits.len() < b.len()) {
                best = Some(hits);
            }
        }
        match best {
            Some(hits) => Box::new(hits.iter().map(move |&i| &self.rows[i])),
            None => Box::new(self.rows.iter()),
        }
    }
}

impl FactStore {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, predicate: &str, args: Vec<SExpr>) -> bool {
        let added = self.tables.entry(predicate.to_string()).or_default().insert(args);
        if added {
            self.len += 1;
        }
        added
    }

    pub fn contains(&self, predicate: &str, args: &[SExpr]) -> bool {
        self.tables.get(predicate).is_some_and(|t| t.seen.contains(args))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[SExpr])> {
        self.tables
            .iter()
            .flat_map(|(p, t)| t.rows.iter().map(move |r| (p.as_str(), r.as_slice())))
    }

    /// Facts with `term` at argument `pos`, across all predicates.
    pub fn with_arg<'a>(&'a self, pos: usize, term: &'a SExpr) -> impl Iterator<Item = (&'a str, &'a [SExpr])> + 'a {
        let key = (pos, term.clone());
        self.tables.iter().flat_map(move |(p, t)| {
            t.by_arg
                .get(&key)
                .into_iter()
                .flatten()
                .map(move |&i| (p.as_str(), t.rows[i].as_slice()))
        })
    }

    /// Extends `binding` with every way `atom` matches a stored fact.
    pub fn matches(&self, atom: &Atom, binding: &Binding) -> Vec<Binding> {
        let pattern: Vec<SExpr> = atom.args.iter().map(|a| substitute(a, binding)).collect();
        let mut out = Vec::new();
        match substitute(&atom.predicate, binding) {
            SExpr::Symbol(p) => {
                if let Some(table) = self.tables.get(&p) {
                    match_table(table, &pattern, binding, &mut out);
                }
            }
            SExpr::Variable(v) => {
                for (p, table) in &self.tables {
                    let mut b = binding.clone();
                    b.insert(v.clone(), SExpr::Symbol(p.clone()));
                    match_table(table, &pattern, &b, &mut out);
                }
            }
            // a predicate variable bound to a non-symbol never matches
            _ => {}
        }
        out
    }
}

fn match_table(table: &Table, pattern: &[SExpr], binding: &Binding, out: &mut Vec<Binding>) {
    for row in table.candidates(pattern) {
        if row.len() != pattern.len() {
            continue;
        }
        let mut b = binding.clone();
        if pattern.iter().zip(row).all(|(p, g)| unify(p, g, &mut b)) {
            out.push(b);
        }
    }
}

/// One-way match of `pattern` against the ground term `ground`.
pub(crate) fn unify(pattern: &SExpr, ground: &SExpr, binding: &mut Binding) -> bool {
    match (pattern, ground) {
        (SExpr::Variable(v), g) => match binding.get(v) {
            Some(bound) => bound == g,
            None => {
                binding.insert(v.clone(), g.clone());
                true
            }
        },
        (SExpr::List(ps), SExpr::List(gs)) => {
            ps.len() == gs.len() && ps.iter().zip(gs).all(|(p, g)| unify(p, g, binding))
        }
        (p, g) => p == g,
    }
}

pub(crate) fn substitute(expr: &SExpr, binding: &Binding) -> SExpr {
    match expr {
        SExpr::Variable(v) => binding.get(v).cloned().unwrap_or_else(|| expr.clone()),
        SExpr::List(items) => SExpr::List(items.iter().map(|i| substitute(i, binding)).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse;

    fn atom(text: &str) -> Atom {
        Atom::from_sexpr(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn insert_dedupes() {
        let mut s = FactStore::default();
        assert!(s.insert("p", vec![SExpr::symbol("a")]));
        assert!(!s.insert("p", vec![SExpr::symbol("a")]));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn repeated_variable_must_agree() {
        let mut s = FactStore::default();
        s.insert("p", vec![SExpr::symbol("a"), SExpr::symbol("a")]);
        s.insert("p", vec![SExpr::symbol("a"), SExpr::symbol("b")]);
        let hits = s.matches(&atom("(p ?X ?X)"), &Binding::new());
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn nested_terms_unify() {
        let mut s = FactStore::default();
        let nat = parse("(FruitFn AppleTree)").unwrap();
        s.insert("fruitOf", vec![SExpr::symbol("AppleTree"), nat]);
        let hits = s.matches(&atom("(fruitOf ?T (FruitFn ?T))"), &Binding::new());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0]["T"], SExpr::symbol("AppleTree"));
    }

    #[test]
    fn variable_predicate_scans_all_tables() {
        let mut s = FactStore::default();
        s.insert("p", vec![SExpr::symbol("a"), SExpr::symbol("b")]);
        s.insert("q", vec![SExpr::symbol("a"), SExpr::symbol("b")]);
        s.insert("r", vec![SExpr::symbol("b"), SExpr::symbol("a")]);
        let hits = s.matches(&atom("(?P a b)"), &Binding::new());
        let mut preds: Vec<_> = hits.iter().map(|b| b["P"].to_string()).collect();
        preds.sort();
        assert_eq!(preds, ["p", "q"]);
    }
}
