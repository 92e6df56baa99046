//! Recursive-descent parser for rule text.
//!
//! Whitespace (including newlines) is insignificant inside a rule, so rules
//! may span several lines. `%` starts a comment running to the end of the line.

use super::{Atom, Head, Literal, Rule, RuleSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Var(usize),
    Num(usize),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'%' {
                while !matches!(self.peek(), None | Some(b'\n')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            for _ in 0..token.len() {
                self.bump();
            }
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|c| format!("`{}`", c as char))
                .unwrap_or_else(|| "end of input".into());
            self.error(format!("expected `{token}`, found {found}"))
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            for _ in 0..token.len() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    /// Identifier: `[A-Za-z_][A-Za-z0-9_]*`.
    fn ident(&mut self) -> Result<(String, usize, usize)> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            Some(c) => return self.error(format!("unexpected `{}`", c as char)),
            None => return self.error("unexpected end of input"),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        Ok((s, line, column))
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return self.error("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| self.error("number out of range"), Ok)
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Term::Num(self.number()?)),
            Some(b'V') => {
                self.bump();
                Ok(Term::Var(self.number()?))
            }
            _ => self.error("expected a variable `V<n>` or a number"),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        self.expect("(")?;
        let mut out = vec![self.term()?];
        while self.eat(",") {
            out.push(self.term()?);
        }
        self.expect(")")?;
        Ok(out)
    }

    fn rule(&mut self) -> Result<Rule> {
        let (name, line, column) = self.ident()?;
        let head = match name.as_str() {
            "t" => Head::Target,
            other => match aux_index(other) {
                Some(k) => Head::Aux(k),
                None => {
                    return Err(Error::UnknownPredicate {
                        name: other.into(),
                        line,
                        column,
                    })
                }
            },
        };
        let mut body = Vec::new();
        if self.eat(".") {
            return Ok(Rule::new(head, body));
        }
        self.expect(":-")?;
        loop {
            if let Some(lit) = self.body_item()? {
                body.push(lit);
            }
            if self.eat(".") {
                break;
            }
            self.expect(",")?;
        }
        Ok(Rule::new(head, body))
    }

    /// Parses a literal, or a guard (returns `None`).
    fn body_item(&mut self) -> Result<Option<Literal>> {
        let (name, line, column) = self.ident()?;
        if name == "not" {
            let (name, line, column) = self.ident()?;
            return self.atom(&name, line, column).map(|a| Some(Literal::neg(a)));
        }
        if let Some(rest) = name.strip_prefix('V') {
            if rest.chars().all(|c| c.is_ascii_digit()) && !rest.is_empty() {
                self.expect("!=")?;
                self.term()?;
                return Ok(None);
            }
        }
        if name == "obj" {
            let args = self.args()?;
            check_arity(&name, &args, 1, line, column)?;
            if !matches!(args[0], Term::Var(_)) {
                return self.error("obj/1 takes a variable");
            }
            return Ok(None);
        }
        self.atom(&name, line, column).map(|a| Some(Literal::pos(a)))
    }

    fn atom(&mut self, name: &str, line: usize, column: usize) -> Result<Atom> {
        let expected = match name {
            "nullary" => 1,
            "unary" => 2,
            "binary" => 3,
            "t" => return self.error("the target `t` cannot occur in a rule body"),
            other => {
                return match aux_index(other) {
                    Some(k) => Ok(Atom::Aux(k)),
                    None => Err(Error::UnknownPredicate {
                        name: other.into(),
                        line,
                        column,
                    }),
                }
            }
        };
        let args = self.args()?;
        check_arity(name, &args, expected, line, column)?;
        let pred = match args[expected - 1] {
            Term::Num(k) => k,
            Term::Var(_) => return self.error("the last argument must be a predicate index"),
        };
        let mut vars = Vec::with_capacity(2);
        for arg in &args[..expected - 1] {
            match arg {
                Term::Var(v) => vars.push(*v),
                Term::Num(_) => return self.error("constants are not allowed as arguments"),
            }
        }
        match vars.as_slice() {
            [] => Ok(Atom::Nullary(pred)),
            [var] => Ok(Atom::Unary { var: *var, pred }),
            [subj, obj] if subj == obj => self.error("binary atom relates a variable to itself"),
            [subj, obj] => Ok(Atom::Binary {
                subj: *subj,
                obj: *obj,
                pred,
            }),
            _ => unreachable!(),
        }
    }
}

fn check_arity(name: &str, args: &[Term], expected: usize, line: usize, column: usize) -> Result<()> {
    if args.len() != expected {
        return Err(Error::Arity {
            name: name.into(),
            expected,
            found: args.len(),
            line,
            column,
        });
    }
    Ok(())
}

/// `c<k>t` -> `k`.
fn aux_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('c')?.strip_suffix('t')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses rule text. Guards are validated syntactically and then discarded.
pub fn parse_ruleset(text: &str) -> Result<RuleSet> {
    let mut p = Parser::new(text);
    let mut rules = Vec::new();
    loop {
        p.skip_ws();
        if p.peek().is_none() {
            break;
        }
        rules.push(p.rule()?);
    }
    Ok(RuleSet::new(rules))
}
