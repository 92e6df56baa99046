//! Test oracles written without reference to the library's own indexing or
//! evaluation code.

#![allow(dead_code)]

pub mod checks;

use std::collections::HashMap;

use dnfforge_core::rulelang::{Atom, Head, RuleSet};
use dnfforge_core::PredicateSignature;

/// Ground atom key: (arity, objects, predicate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Key {
    N(usize),
    U(usize, usize),
    B(usize, usize, usize),
}

/// Layout built by walking the canonical order: nullary, then unary grouped
/// by object, then binary grouped by ordered object pair.
pub fn layout_map(n0: usize, n1: usize, n2: usize, m: usize) -> HashMap<Key, usize> {
    let mut map = HashMap::new();
    let mut next = 0;
    for k in 0..n0 {
        map.insert(Key::N(k), next);
        next += 1;
    }
    for o in 0..m {
        for k in 0..n1 {
            map.insert(Key::U(o, k), next);
            next += 1;
        }
    }
    for s in 0..m {
        for o in 0..m {
            if o == s {
                continue;
            }
            for k in 0..n2 {
                map.insert(Key::B(s, o, k), next);
                next += 1;
            }
        }
    }
    map
}

pub fn ground_map(sig: &PredicateSignature) -> HashMap<Key, usize> {
    layout_map(sig.num_nullary, sig.num_unary, sig.num_binary, sig.num_objects)
}

/// All injective maps from `v` variables into `n` objects, by recursion.
pub fn injections(n: usize, v: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, v: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == v {
            out.push(cur.clone());
            return;
        }
        for o in 0..n {
            if !cur.contains(&o) {
                cur.push(o);
                go(n, v, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, v, &mut Vec::new(), &mut out);
    out
}

fn holds(atom: &Atom, map: &HashMap<Key, usize>, atoms: &[i8], theta: &HashMap<usize, usize>, aux: &[bool]) -> bool {
    let key = match *atom {
        Atom::Nullary(k) => Key::N(k),
        Atom::Unary { var, pred } => Key::U(theta[&var], pred),
        Atom::Binary { subj, obj, pred } => Key::B(theta[&subj], theta[&obj], pred),
        Atom::Aux(k) => return aux[k],
    };
    atoms[map[&key]] > 0
}

fn body_satisfiable(
    rule: &dnfforge_core::rulelang::Rule,
    map: &HashMap<Key, usize>,
    atoms: &[i8],
    n: usize,
    aux: &[bool],
) -> bool {
    let mut vars: Vec<usize> = rule.body.iter().flat_map(|l| l.atom.variables()).collect();
    vars.sort_unstable();
    vars.dedup();
    injections(n, vars.len()).into_iter().any(|objs| {
        let theta: HashMap<usize, usize> = vars.iter().copied().zip(objs).collect();
        rule.body
            .iter()
            .all(|l| holds(&l.atom, map, atoms, &theta, aux) != l.negated)
    })
}

/// Stratified evaluation: auxiliary heads first (their bodies are aux-free),
/// then `t`.
pub fn oracle_evaluate(rs: &RuleSet, atoms: &[i8], sig: &PredicateSignature) -> bool {
    let map = ground_map(sig);
    let n_aux = rs
        .rules
        .iter()
        .flat_map(|r| {
            let h = match r.head {
                Head::Aux(k) => Some(k + 1),
                Head::Target => None,
            };
            let b = r.body.iter().filter_map(|l| match l.atom {
                Atom::Aux(k) => Some(k + 1),
                _ => None,
            });
            h.into_iter().chain(b)
        })
        .max()
        .unwrap_or(0);
    let mut aux = vec![false; n_aux];
    for r in &rs.rules {
        if let Head::Aux(k) = r.head {
            if body_satisfiable(r, &map, atoms, sig.num_objects, &[]) {
                aux[k] = true;
            }
        }
    }
    rs.rules
        .iter()
        .filter(|r| r.head == Head::Target)
        .any(|r| body_satisfiable(r, &map, atoms, sig.num_objects, &aux))
}

/// All bipolar vectors of length `d`, counting in binary with bit set = true.
pub fn all_inputs(d: usize) -> impl Iterator<Item = Vec<i8>> {
    (0u64..1 << d).map(move |bits| (0..d).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
}
