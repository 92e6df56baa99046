//! Conversion between thresholded models and rule sets.

use super::model::DnfModel;
use crate::error::{Error, Result};
use crate::rulelang::{Atom, Head, Literal, Rule, RuleSet};
use crate::semisymbolic::SATURATED_WEIGHT;
use crate::signature::PredicateSignature;

fn check_signature(m: &DnfModel, sig: &PredicateSignature) -> Result<()> {
    m.validate()?;
    if m.signature != *sig {
        return Err(Error::InvalidSignature("model signature differs".into()));
    }
    Ok(())
}

/// Reads the rules off a model whose weights are all in `{-6, 0, +6}`.
///
/// A positive disjunct `r` becomes `t :- body_r.`; a negative one becomes the
/// pair `t :- not c<r>t.` / `c<r>t :- body_r.`; a zero disjunct is dropped.
/// A non-zero disjunct over an all-zero conjunction has no rule equivalent
/// (its unit outputs exactly 0) and is rejected.
pub fn extract_rules(m: &DnfModel, sig: &PredicateSignature) -> Result<RuleSet> {
    check_signature(m, sig)?;
    if let Some((index, value)) = m.first_unthresholded() {
        return Err(Error::NotThresholded { index, value });
    }
    let layout = sig.template_layout();
    let mut rules = Vec::new();
    for (r, &d) in m.disj_w.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let body: Vec<Literal> = m
            .conj_row(r)
            .iter()
            .zip(&layout)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, atom)| Literal {
                atom: *atom,
                negated: *w < 0.0,
            })
            .collect();
        if body.is_empty() {
            return Err(Error::DegenerateRule { rule: r });
        }
        if d > 0.0 {
            rules.push(Rule::new(Head::Target, body));
        } else {
            rules.push(Rule::new(Head::Target, vec![Literal::neg(Atom::Aux(r))]));
            rules.push(Rule::new(Head::Aux(r), body));
        }
    }
    Ok(RuleSet::new(rules))
}

/// Builds the saturated model computing a rule set; the inverse of
/// [`extract_rules`].
///
/// Accepts plain `t :- body.` rules and the `t :- not c<k>t.` pattern backed by
/// a single `c<k>t` rule. Rules occupy disjuncts in order of appearance.
pub fn encode_rules(rs: &RuleSet, sig: &PredicateSignature) -> Result<DnfModel> {
    let mut m = DnfModel::zeros(sig, 1.0)?;
    let a = sig.template_atoms();
    let targets: Vec<&Rule> = rs.rules.iter().filter(|r| r.head == Head::Target).collect();
    if targets.len() > sig.num_rules {
        return Err(Error::Shape {
            what: "target rules",
            expected: sig.num_rules,
            actual: targets.len(),
        });
    }
    for (r, rule) in targets.into_iter().enumerate() {
        let (body, sign) = match rule.body.as_slice() {
            [Literal {
                atom: Atom::Aux(k),
                negated: true,
            }] => {
                let defs: Vec<&Rule> = rs.rules.iter().filter(|d| d.head == Head::Aux(*k)).collect();
                match defs.as_slice() {
                    [def] => (def.body.as_slice(), -1.0),
                    [] => return Err(Error::UndefinedAux(*k)),
                    _ => {
                        return Err(Error::Format(format!(
                            "c{k}t has several definitions and cannot be encoded"
                        )))
                    }
                }
            }
            body => (body, 1.0),
        };
        if body.is_empty() {
            return Err(Error::DegenerateRule { rule: r });
        }
        let row = &mut m.conj_w[r * a..(r + 1) * a];
        for lit in body {
            if let Atom::Aux(k) = lit.atom {
                return Err(Error::NotStratified(k));
            }
            let i = sig.template_index(&lit.atom).ok_or(Error::OutOfRange {
                kind: "template atom",
                index: 0,
                limit: a,
            })?;
            let w = if lit.negated { -SATURATED_WEIGHT } else { SATURATED_WEIGHT };
            if row[i] != 0.0 && row[i] != w {
                return Err(Error::Format(format!(
                    "rule {r} requires {} both true and false",
                    lit.atom
                )));
            }
            row[i] = w;
        }
        m.disj_w[r] = sign * SATURATED_WEIGHT;
    }
    Ok(m)
}
