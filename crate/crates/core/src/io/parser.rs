//! Line-oriented system file format.

use thiserror::Error;

use crate::feasibility::Relation;
use crate::poly::{parse_rational, Polynomial, Rational, VarLayout};
use crate::reduction::{SpecError, SystemSpec};
use crate::symmetry::{
    elementary_symmetric, gradient_family, invariance_violation, power_sum, sum_of_squares, EquivariantFamily,
    SymmetryError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {source}")]
    Validation { line: usize, source: SpecError },
    #[error("{0}")]
    System(SpecError),
}

impl ParseError {
    pub fn is_validation(&self) -> bool {
        !matches!(self, ParseError::Syntax { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    Rel(Relation),
}

fn tokenize(text: &str, line: usize, offset: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let err = |col: usize, msg: String| ParseError::Syntax { line, col, msg };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = offset + i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &text[start..i];
            let value = parse_rational(lit).ok_or_else(|| err(col, format!("bad number {lit:?}")))?;
            out.push((Tok::Num(value), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else if c == '>' || c == '=' || c == '<' {
            let two = text.get(i..i + 2);
            let (rel, len) = match (c, two) {
                ('>', Some(">=")) => (Relation::Ge, 2),
                ('>', _) => (Relation::Gt, 1),
                ('=', _) => (Relation::Eq, 1),
                _ => return Err(err(col, "write constraints as `expr >= 0` or `expr > 0`".into())),
            };
            out.push((Tok::Rel(rel), col));
            i += len;
        } else {
            return Err(err(col, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    layout: VarLayout,
}

impl ExprParser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        let col = self.toks.get(self.pos).map_or(self.end_col, |t| t.1);
        ParseError::Syntax { line: self.line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc += &self.term()?;
            } else if self.eat_op('-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat_op('/') {
                let at = self.pos;
                let d = self.unary()?;
                let c = d.constant_term();
                if !d.is_constant() || d.is_zero() {
                    self.pos = at;
                    return Err(self.err("division is only allowed by a nonzero constant"));
                }
                acc = acc.scale(&c.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.eat_op('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        match self.peek() {
            Some(Tok::Num(e)) if e.is_integer() => {
                let e = e.to_integer();
                let e: u32 = e.try_into().map_err(|_| self.err("exponent out of range"))?;
                self.pos += 1;
                Ok(base.pow(e))
            }
            _ => Err(self.err("exponent must be a nonnegative integer")),
        }
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(Polynomial::constant(c))
            }
            Some(Tok::Ident(name)) => {
                let p = self.ident(&name)?;
                self.pos += 1;
                Ok(p)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(_) => Err(self.err("expected a number, variable or `(`")),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn ident(&self, name: &str) -> Result<Polynomial, ParseError> {
        let n = self.layout.n;
        let t = self.layout.t;
        let (head, index) = name.split_at(1);
        let index: usize = index.parse().map_err(|_| self.err(format!("unknown name {name:?}")))?;
        match head {
            "x" if (1..=n).contains(&index) => Ok(Polynomial::var(self.layout.x(index - 1))),
            "y" if (1..=t).contains(&index) => Ok(Polynomial::var(self.layout.y(index - 1))),
            "p" if index >= 1 => Ok(power_sum(index as u32, n)),
            "e" if index <= n => elementary_symmetric(index, n).map_err(|e| self.err(e.to_string())),
            "x" => Err(self.err(format!("{name} is outside x1..x{n}"))),
            "y" => Err(self.err(format!("{name} is outside the {t} declared parameters"))),
            _ => Err(self.err(format!("unknown name {name:?}"))),
        }
    }
}

/// `<expr> <rel> 0`, returning the polynomial and the relation.
fn parse_constraint(
    text: &str,
    line: usize,
    offset: usize,
    layout: VarLayout,
) -> Result<(Polynomial, Relation), ParseError> {
    let toks = tokenize(text, line, offset)?;
    let mut p = ExprParser { toks: &toks, pos: 0, line, end_col: offset + text.len() + 1, layout };
    let poly = p.expr()?;
    let rel = match p.peek() {
        Some(Tok::Rel(r)) => *r,
        _ => return Err(p.err("expected a relation (`=`, `>=` or `>`)")),
    };
    p.pos += 1;
    match p.peek() {
        Some(Tok::Num(z)) if z == &Rational::from_integer(0.into()) => p.pos += 1,
        _ => return Err(p.err("right-hand side must be 0")),
    }
    if p.pos != toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok((poly, rel))
}

enum Mode {
    Explicit,
    Template,
    Grad,
}

/// Parses and validates a system file.
pub fn parse_system(text: &str) -> Result<SystemSpec, ParseError> {
    let mut n: Option<usize> = None;
    let mut t = 0usize;
    let mut name = String::new();
    let mut sym: Vec<(usize, Polynomial, Relation)> = Vec::new();
    let mut general: Vec<(Polynomial, Relation)> = Vec::new();
    let mut family: Option<(usize, EquivariantFamily, Relation)> = None;
    let mut explicit: Option<(usize, Vec<(usize, Polynomial, Relation)>)> = None;
    let mut transform = false;

    let syntax = |line: usize, col: usize, msg: &str| ParseError::Syntax { line, col, msg: msg.to_string() };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let indent = content.len() - content.trim_start().len();
        let body = content.trim();
        if body.is_empty() {
            continue;
        }
        let layout = |n: Option<usize>| -> Result<VarLayout, ParseError> {
            n.map(|n| VarLayout::new(n, t)).ok_or_else(|| syntax(line, 1, "`n = <int>` must come first"))
        };

        if let Some((start, rows)) = explicit.as_mut() {
            let nn = n.expect("n is set before equ-explicit");
            let (text, col) = match body.split_once(':') {
                Some((label, rest)) if label.trim().starts_with('g') => (rest, indent + label.len() + 2),
                _ => (body, indent + 1),
            };
            let (poly, rel) = parse_constraint(text, line, col - 1, layout(n)?)?;
            rows.push((line, poly, rel));
            if rows.len() == nn {
                let start = *start;
                let rel = rows[0].2;
                if let Some(bad) = rows.iter().find(|r| r.2 != rel) {
                    return Err(syntax(bad.0, 1, "all components of an explicit family must use the same relation"));
                }
                let comps = rows.iter().map(|r| r.1.clone()).collect();
                let g = EquivariantFamily::new(nn, comps).map_err(|source| ParseError::Validation {
                    line: start,
                    source: SpecError::Symmetry { what: "equivariant family".into(), source },
                })?;
                family = Some((start, g, rel));
                explicit = None;
            }
            continue;
        }

        if let Some((key, value)) = body.split_once('=').filter(|(k, _)| !k.contains(':')) {
            let key = key.trim();
            let value = value.trim();
            let col = indent + body.find('=').unwrap_or(0) + 2;
            match key {
                "n" | "params" => {
                    if !sym.is_empty() || !general.is_empty() || family.is_some() {
                        return Err(syntax(line, 1, "header lines must precede constraints"));
                    }
                    let v: usize = value.parse().map_err(|_| syntax(line, col, "expected a nonnegative integer"))?;
                    if key == "n" {
                        if n.is_some() {
                            return Err(syntax(line, 1, "duplicate `n` header"));
                        }
                        if v == 0 {
                            return Err(syntax(line, col, "n must be at least 1"));
                        }
                        n = Some(v);
                    } else {
                        t = v;
                    }
                }
                "name" => name = value.to_string(),
                _ => return Err(syntax(line, indent + 1, &format!("unknown header {key:?}"))),
            }
            continue;
        }

        let Some((keyword, rest)) = body.split_once(':') else {
            return Err(syntax(line, indent + 1, "expected `keyword: ...` or a header `key = value`"));
        };
        let col = indent + keyword.len() + 1;
        let keyword = keyword.trim();
        match keyword {
            "sym" | "con" => {
                let (poly, rel) = parse_constraint(rest, line, col, layout(n)?)?;
                if keyword == "sym" {
                    sym.push((line, poly, rel));
                } else {
                    general.push((poly, rel));
                }
            }
            "equ-explicit" | "equ-template" | "equ-grad" => {
                if family.is_some() || explicit.is_some() {
                    return Err(syntax(line, indent + 1, "only one equivariant family is allowed"));
                }
                let mode = match keyword {
                    "equ-explicit" => Mode::Explicit,
                    "equ-template" => Mode::Template,
                    _ => Mode::Grad,
                };
                let layout = layout(n)?;
                let nn = layout.n;
                if let Mode::Explicit = mode {
                    if !rest.trim().is_empty() {
                        return Err(syntax(
                            line,
                            col + 1,
                            "components of an explicit family go on the following lines",
                        ));
                    }
                    explicit = Some((line, Vec::new()));
                    continue;
                }
                let (poly, rel) = parse_constraint(rest, line, col, layout)?;
                let built = match mode {
                    Mode::Template => EquivariantFamily::from_template(nn, poly),
                    _ => gradient_family(&poly, nn),
                };
                let g = built.map_err(|source| ParseError::Validation {
                    line,
                    source: SpecError::Symmetry { what: "equivariant family".into(), source },
                })?;
                family = Some((line, g, rel));
            }
            "transform" => match rest.trim() {
                "sum_of_squares" => transform = true,
                other => return Err(syntax(line, col + 2, &format!("unknown transform {other:?}"))),
            },
            _ => return Err(syntax(line, indent + 1, &format!("unknown keyword {keyword:?}"))),
        }
    }

    let Some(n) = n else {
        return Err(syntax(1, 1, "missing `n = <int>` header"));
    };
    if let Some((start, rows)) = explicit {
        return Err(syntax(start, 1, &format!("explicit family needs {n} component lines, found {}", rows.len())));
    }

    let mut b = SystemSpec::builder(n, t).source(name);
    let (eqs, ineqs): (Vec<_>, Vec<_>) = sym.into_iter().partition(|s| s.2 == Relation::Eq);
    if transform {
        let fs: Vec<Polynomial> = eqs.iter().map(|s| s.1.clone()).collect();
        if !fs.is_empty() {
            b = b.equality(sum_of_squares(&fs, n));
        }
    } else {
        for (line, f, _) in &eqs {
            if let Some(s) = invariance_violation(f, n) {
                return Err(not_invariant(*line, n, s.cycle_notation()));
            }
            b = b.equality(f.clone());
        }
    }
    for (line, f, rel) in ineqs {
        if let Some(s) = invariance_violation(&f, n) {
            return Err(not_invariant(line, n, s.cycle_notation()));
        }
        b = b.symmetric(f, rel);
    }
    if let Some((line, g, rel)) = family {
        if rel == Relation::Eq {
            return Err(ParseError::Validation {
                line,
                source: SpecError::Relation { what: "equivariant family".into(), rel },
            });
        }
        b = b.family(g, rel);
    }
    for (f, rel) in general {
        b = b.general(f, rel);
    }
    b.build().map_err(ParseError::System)
}

fn not_invariant(line: usize, n: usize, generator: String) -> ParseError {
    ParseError::Validation {
        line,
        source: SpecError::Symmetry {
            what: "symmetric constraint".into(),
            source: SymmetryError::NotInvariant { n, generator },
        },
    }
}
