//! Stratified semi-naive bottom-up evaluation.

use std::collections::{BTreeMap, HashSet};

use super::store::{substitute, Binding, FactStore};
use super::{HornRule, KbError};
use crate::sexpr::SExpr;

pub(crate) fn materialize(base: &FactStore, rules: &[HornRule], depth_limit: usize) -> Result<FactStore, KbError> {
    let mut total = base.clone();
    for stratum in stratify(rules)? {
        let idb: HashSet<&str> = stratum.iter().map(|r| r.head.predicate_name().unwrap()).collect();

        let mut delta = FactStore::default();
        for rule in &stratum {
            for fact in fire(rule, &total, None) {
                if !total.contains(&fact.0, &fact.1) {
                    delta.insert(&fact.0, fact.1);
                }
            }
        }
        let mut rounds = 1;
        while !delta.is_empty() {
            if rounds > depth_limit {
                return Err(KbError::DepthLimitExceeded { limit: depth_limit });
            }
            for (p, args) in delta.iter() {
                total.insert(p, args.to_vec());
            }
            let mut next = FactStore::default();
            for rule in &stratum {
                for (i, lit) in rule.body.iter().enumerate() {
                    if lit.negated || !idb.contains(lit.atom.predicate_name().unwrap()) {
                        continue;
                    }
                    for (p, args) in fire(rule, &total, Some((i, &delta))) {
                        if !total.contains(&p, &args) {
                            next.insert(&p, args);
                        }
                    }
                }
            }
            delta = next;
            rounds += 1;
        }
    }
    Ok(total)
}

/// Derives head instances of `rule`. With `delta = Some((i, d))` the i-th
/// body literal is matched against `d` only.
fn fire(rule: &HornRule, total: &FactStore, delta: Option<(usize, &FactStore)>) -> Vec<(String, Vec<SExpr>)> {
    let mut bindings = vec![Binding::new()];
    for (i, lit) in rule.body.iter().enumerate().filter(|(_, l)| !l.negated) {
        let source = match delta {
            Some((j, d)) if j == i => d,
            _ => total,
        };
        bindings = bindings.iter().flat_map(|b| source.matches(&lit.atom, b)).collect();
        if bindings.is_empty() {
            return Vec::new();
        }
    }
    for lit in rule.body.iter().filter(|l| l.negated) {
        bindings.retain(|b| total.matches(&lit.atom, b).is_empty());
    }
    let pred = rule.head.predicate_name().unwrap().to_string();
    bindings
        .iter()
        .map(|b| {
            let args = rule.head.args.iter().map(|a| substitute(a, b)).collect();
            (pred.clone(), args)
        })
        .collect()
}

/// Groups rules by stratum so that every negated predicate is fully
/// computed before a rule that negates it runs.
fn stratify(rules: &[HornRule]) -> Result<Vec<Vec<HornRule>>, KbError> {
    let mut level: BTreeMap<&str, usize> = BTreeMap::new();
    for r in rules {
        level.insert(r.head.predicate_name().unwrap(), 0);
        for l in &r.body {
            level.entry(l.atom.predicate_name().unwrap()).or_insert(0);
        }
    }
    let bound = level.len();
    loop {
        let mut changed = false;
        for r in rules {
            let head = r.head.predicate_name().unwrap();
            for l in &r.body {
                let need = level[l.atom.predicate_name().unwrap()] + usize::from(l.negated);
                if level[head] < need {
                    if need > bound {
                        return Err(KbError::NegationCycle(head.to_string()));
                    }
                    level.insert(head, need);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let max = level.values().copied().max().unwrap_or(0);
    let mut strata = vec![Vec::new(); max + 1];
    for r in rules {
        strata[level[r.head.predicate_name().unwrap()]].push(r.clone());
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}
