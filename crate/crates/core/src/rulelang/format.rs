use std::fmt::{self, Display, Formatter, Write};

use super::{Atom, Head, Literal, Rule, RuleSet};

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::Nullary(k) => write!(f, "nullary({k})"),
            Atom::Unary { var, pred } => write!(f, "unary(V{var},{pred})"),
            Atom::Binary { subj, obj, pred } => write!(f, "binary(V{subj},V{obj},{pred})"),
            Atom::Aux(k) => write!(f, "c{k}t"),
        }
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        self.atom.fmt(f)
    }
}

impl Display for Head {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Head::Target => f.write_str("t"),
            Head::Aux(k) => write!(f, "c{k}t"),
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if self.body.is_empty() {
            return f.write_str(".");
        }
        f.write_str(" :- ")?;
        let mut items: Vec<String> = self.body.iter().map(Literal::to_string).collect();
        let vars: Vec<usize> = self.variables().into_iter().collect();
        for (i, v) in vars.iter().enumerate() {
            items.push(format!("obj(V{v})"));
            items.extend(vars[i + 1..].iter().map(|w| format!("V{v} != V{w}")));
        }
        write!(f, "{}.", items.join(", "))
    }
}

/// Renders one rule per line, each terminated by a newline.
pub fn format_ruleset(rs: &RuleSet) -> String {
    let mut out = String::new();
    for rule in &rs.rules {
        // Writing into a String cannot fail.
        let _ = writeln!(out, "{rule}");
    }
    out
}
