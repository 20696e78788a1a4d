//! Concrete syntax: parsing and canonical printing.
//!
//! ```text
//! formula := quant | impl ;  quant := ('E'|'A') ident ':' ('vec'|'val') '.' formula
//! impl := disj ['->' impl] ; disj := conj {'|' conj} ; conj := lit {'&' lit}
//! lit  := ['!'] (atom | '(' formula ')')
//! atom := 'L[' place '](' vterm ',' vterm ')' | 'M[' place '](' vterm ',' vterm ',' vterm ')'
//!       | 'Q[' place ',' nat '](' vterm ')' | vterm ('='|'<='|'<'|'>='|'>') vterm
//!       | sterm ('<='|'<'|'>='|'>'|'=') sterm | 'P[' nat '](' sterm ')'
//! ```
//!
//! `vterm < vterm` and `vterm <= vterm` are order atoms of the real place.
//! Free identifiers get their sort from context; identifiers whose sort no
//! context fixes are vector variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use crate::ast::{Atom, Comp, Formula, Place, Sort, ValTerm, Var, VecTerm};
use crate::error::{Error, Result, SourceSpan};
use crate::rational::{bigint_to_i64, Rat};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Nat(BigInt),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

const SYMBOLS: [&str; 19] = ["->", "<=", ">=", ">", "(", ")", "[", "]", ",", ".", ":", "+", "-", "*", "/", "=", "<", "|", "&"];

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span_at = |start: usize, end: usize, line: usize, col: usize| SourceSpan { start, end, line, column: col };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push(Token { tok: Tok::Nat(n), span: span_at(start, i, line, col) });
            col += i - start;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), span: span_at(start, i, line, col) });
            col += i - start;
            continue;
        }
        if c == '!' {
            out.push(Token { tok: Tok::Sym("!"), span: span_at(i, i + 1, line, col) });
            i += 1;
            col += 1;
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), span: span_at(i, i + s.len(), line, col) });
                i += s.len();
                col += s.len();
            }
            None => {
                let ch = text[i..].chars().next().unwrap();
                return Err(Error::Parse {
                    message: format!("unexpected character {:?}", ch),
                    span: span_at(i, i + ch.len_utf8(), line, col),
                });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: span_at(text.len(), text.len(), line, col) });
    Ok(out)
}

#[derive(Clone, Debug)]
enum Item {
    Ident(String, SourceSpan),
    V(Place, Box<RExpr>, SourceSpan),
    Oo,
}

#[derive(Clone, Debug)]
struct RExpr {
    terms: Vec<(Rat, Item)>,
    constant: Rat,
    span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum CmpOp {
    Eq,
    Le,
    Lt,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PredKind {
    L,
    M,
    Q(u64),
}

#[derive(Clone, Debug)]
enum RAtom {
    Cmp(CmpOp, RExpr, RExpr, SourceSpan),
    Pred(PredKind, Place, Vec<RExpr>, SourceSpan),
    P(u64, RExpr, SourceSpan),
}

#[derive(Clone, Debug)]
enum RFormula {
    Atom(RAtom),
    Not(Box<RFormula>),
    And(Vec<RFormula>),
    Or(Vec<RFormula>),
    Implies(Box<RFormula>, Box<RFormula>),
    Quant(bool, Var, Box<RFormula>),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    places: Option<&'a BTreeSet<Place>>,
}

fn perr<T>(message: impl Into<String>, span: SourceSpan) -> Result<T> {
    Err(Error::Parse { message: message.into(), span })
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan { start: a.start, end: b.end.max(a.start), line: a.line, column: a.column }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            perr(format!("expected '{}'", s), self.span())
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => perr("expected identifier", self.span()),
        }
    }

    fn nat(&mut self) -> Result<(BigInt, SourceSpan)> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                let sp = self.bump().span;
                Ok((n, sp))
            }
            _ => perr("expected natural number", self.span()),
        }
    }

    fn small_nat(&mut self) -> Result<(u64, SourceSpan)> {
        let (n, sp) = self.nat()?;
        match u64::try_from(&n) {
            Ok(v) => Ok((v, sp)),
            Err(_) => perr("number too large", sp),
        }
    }

    fn place(&mut self) -> Result<Place> {
        let sp = self.span();
        let place = match self.peek().clone() {
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Place::Inf
            }
            Tok::Nat(_) => {
                let (p, _) = self.small_nat()?;
                Place::finite(p)?
            }
            _ => return perr("expected a prime or 'inf'", sp),
        };
        if let Some(sig) = self.places {
            if !sig.contains(&place) {
                return Err(Error::Signature(format!("place {} at {} is not declared in the signature", place, sp)));
            }
        }
        Ok(place)
    }

    fn formula(&mut self) -> Result<RFormula> {
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        self.implication()
    }

    fn quantifier(&mut self) -> Result<Option<RFormula>> {
        let is_q = matches!(self.peek(), Tok::Ident(s) if s == "E" || s == "A")
            && matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Sym(":"));
        if !is_q {
            return Ok(None);
        }
        let exists = matches!(self.bump().tok, Tok::Ident(ref s) if s == "E");
        let (name, nsp) = self.ident()?;
        if name.starts_with("__") || name == "oo" {
            return perr(format!("reserved identifier {}", name), nsp);
        }
        self.expect(":")?;
        let (sort_name, ssp) = self.ident()?;
        let sort = match sort_name.as_str() {
            "vec" => Sort::Vec,
            "val" => Sort::Val,
            _ => return perr("expected 'vec' or 'val'", ssp),
        };
        self.expect(".")?;
        let body = self.formula()?;
        Ok(Some(RFormula::Quant(exists, Var { name, sort }, Box::new(body))))
    }

    fn implication(&mut self) -> Result<RFormula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = match self.quantifier()? {
                Some(q) => q,
                None => self.implication()?,
            };
            return Ok(RFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<RFormula> {
        let mut parts = vec![self.conjunction()?];
        while self.eat("|") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { RFormula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<RFormula> {
        let mut parts = vec![self.literal()?];
        while self.eat("&") {
            parts.push(self.literal()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { RFormula::And(parts) })
    }

    fn literal(&mut self) -> Result<RFormula> {
        if self.eat("!") {
            let inner = self.primary()?;
            return Ok(RFormula::Not(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RFormula> {
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        Ok(RFormula::Atom(self.atom()?))
    }

    fn atom(&mut self) -> Result<RAtom> {
        let start = self.span();
        if let (Tok::Ident(name), Tok::Sym("[")) = (self.peek().clone(), self.peek_at(1).clone()) {
            match name.as_str() {
                "L" | "M" | "Q" => {
                    self.bump();
                    self.bump();
                    let place = self.place()?;
                    let kind = if name == "Q" {
                        self.expect(",")?;
                        let (n, nsp) = self.small_nat()?;
                        if n == 0 {
                            return perr("Q needs a positive exponent", nsp);
                        }
                        PredKind::Q(n)
                    } else if name == "L" {
                        PredKind::L
                    } else {
                        PredKind::M
                    };
                    self.expect("]")?;
                    self.expect("(")?;
                    let arity = match kind {
                        PredKind::L => 2,
                        PredKind::M => 3,
                        PredKind::Q(_) => 1,
                    };
                    let mut args = vec![self.expr()?];
                    for _ in 1..arity {
                        self.expect(",")?;
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                    return Ok(RAtom::Pred(kind, place, args, join(start, self.prev_span())));
                }
                "P" => {
                    self.bump();
                    self.bump();
                    let (n, nsp) = self.small_nat()?;
                    if n == 0 {
                        return perr("P needs a positive modulus", nsp);
                    }
                    self.expect("]")?;
                    self.expect("(")?;
                    let arg = self.expr()?;
                    self.expect(")")?;
                    return Ok(RAtom::P(n, arg, join(start, self.prev_span())));
                }
                _ => {}
            }
        }
        let lhs = self.expr()?;
        let (op, flip) = if self.eat("=") {
            (CmpOp::Eq, false)
        } else if self.eat("<=") {
            (CmpOp::Le, false)
        } else if self.eat("<") {
            (CmpOp::Lt, false)
        } else if self.eat(">=") {
            (CmpOp::Le, true)
        } else if self.eat(">") {
            (CmpOp::Lt, true)
        } else {
            return perr("expected a comparison", self.span());
        };
        let rhs = self.expr()?;
        let sp = join(start, self.prev_span());
        Ok(if flip { RAtom::Cmp(op, rhs, lhs, sp) } else { RAtom::Cmp(op, lhs, rhs, sp) })
    }

    fn expr(&mut self) -> Result<RExpr> {
        let start = self.span();
        let mut e = RExpr { terms: Vec::new(), constant: Rat::zero(), span: start };
        let mut negate = self.eat("-");
        loop {
            self.term(&mut e, negate)?;
            if self.eat("+") {
                negate = false;
            } else if self.eat("-") {
                negate = true;
            } else {
                break;
            }
        }
        e.span = join(start, self.prev_span());
        Ok(e)
    }

    fn term(&mut self, e: &mut RExpr, negate: bool) -> Result<()> {
        let sign = if negate { -Rat::one() } else { Rat::one() };
        if let Tok::Nat(_) = self.peek() {
            let (n, _) = self.nat()?;
            let mut c = Rat::from_bigint(n);
            if self.eat("/") {
                let (d, dsp) = self.nat()?;
                c = c.checked_div(&Rat::from_bigint(d)).or_else(|_| perr("zero denominator", dsp))?;
            }
            if self.eat("*") {
                let item = self.item()?;
                e.terms.push((&sign * &c, item));
            } else {
                e.constant += &(&sign * &c);
            }
            return Ok(());
        }
        let item = self.item()?;
        e.terms.push((sign, item));
        Ok(())
    }

    fn item(&mut self) -> Result<Item> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if s == "oo" => {
                self.bump();
                Ok(Item::Oo)
            }
            Tok::Ident(s) if s == "v" && matches!(self.peek_at(1), Tok::Sym("[")) => {
                self.bump();
                self.bump();
                let place = self.place()?;
                self.expect("]")?;
                self.expect("(")?;
                let arg = self.expr()?;
                self.expect(")")?;
                Ok(Item::V(place, Box::new(arg), join(sp, self.prev_span())))
            }
            Tok::Ident(s) => {
                if s.starts_with("__") {
                    return perr(format!("reserved identifier {}", s), sp);
                }
                if matches!(s.as_str(), "E" | "A" | "L" | "M" | "Q" | "P") && matches!(self.peek_at(1), Tok::Sym("[")) {
                    return perr(format!("predicate {} used inside a term", s), sp);
                }
                self.bump();
                Ok(Item::Ident(s, sp))
            }
            _ => perr("expected a term", sp),
        }
    }
}

/// Sort inference for free identifiers plus sort checking of bound ones.
struct Sorter<'a> {
    hints: &'a BTreeMap<String, Sort>,
    free: BTreeMap<String, Sort>,
    changed: bool,
}

fn expr_forced_sort(e: &RExpr) -> Option<Sort> {
    if e.terms.iter().any(|(_, it)| matches!(it, Item::V(..) | Item::Oo)) {
        return Some(Sort::Val);
    }
    if !e.constant.is_integer() || e.terms.iter().any(|(c, _)| !c.is_integer()) {
        return Some(Sort::Vec);
    }
    None
}

impl<'a> Sorter<'a> {
    fn lookup(&self, name: &str, scope: &[Var]) -> Option<Sort> {
        if let Some(v) = scope.iter().rev().find(|v| v.name == name) {
            return Some(v.sort);
        }
        self.free.get(name).copied().or_else(|| self.hints.get(name).copied())
    }

    fn assign(&mut self, name: &str, sort: Sort, scope: &[Var], span: SourceSpan) -> Result<()> {
        if let Some(v) = scope.iter().rev().find(|v| v.name == name) {
            if v.sort != sort {
                return Err(Error::IllSorted(format!("{} has sort {} but is used as {} at {}", name, v.sort, sort, span)));
            }
            return Ok(());
        }
        match self.free.get(name).copied().or_else(|| self.hints.get(name).copied()) {
            Some(s) if s != sort => {
                Err(Error::IllSorted(format!("{} is used both as {} and as {} (at {})", name, s, sort, span)))
            }
            Some(_) => {
                if !self.free.contains_key(name) {
                    self.free.insert(name.to_string(), sort);
                    self.changed = true;
                }
                Ok(())
            }
            None => {
                self.free.insert(name.to_string(), sort);
                self.changed = true;
                Ok(())
            }
        }
    }

    /// Sort of a top-level expression from its own features and known identifiers.
    fn expr_sort(&self, e: &RExpr, scope: &[Var]) -> Option<Sort> {
        expr_forced_sort(e).or_else(|| {
            e.terms.iter().find_map(|(_, it)| match it {
                Item::Ident(n, _) => self.lookup(n, scope),
                _ => None,
            })
        })
    }

    fn mark_expr(&mut self, e: &RExpr, sort: Sort, scope: &[Var]) -> Result<()> {
        for (_, it) in &e.terms {
            match it {
                Item::Ident(n, sp) => self.assign(n, sort, scope, *sp)?,
                Item::V(_, inner, _) => self.mark_expr(inner, Sort::Vec, scope)?,
                Item::Oo => {}
            }
        }
        Ok(())
    }

    fn atom_sort(&self, a: &RAtom, scope: &[Var]) -> Option<Sort> {
        match a {
            RAtom::Cmp(_, l, r, _) => {
                let sl = self.expr_sort(l, scope);
                let sr = self.expr_sort(r, scope);
                sl.or(sr)
            }
            RAtom::Pred(..) => Some(Sort::Vec),
            RAtom::P(..) => Some(Sort::Val),
        }
    }

    fn visit(&mut self, f: &RFormula, scope: &mut Vec<Var>, finalize: bool) -> Result<()> {
        match f {
            RFormula::Atom(a) => {
                let sort = match self.atom_sort(a, scope) {
                    Some(s) => s,
                    None if finalize => Sort::Vec,
                    None => {
                        // only nested valuation arguments are fixed so far
                        if let RAtom::Cmp(_, l, r, _) = a {
                            for e in [l, r] {
                                for (_, it) in &e.terms {
                                    if let Item::V(_, inner, _) = it {
                                        self.mark_expr(inner, Sort::Vec, scope)?;
                                    }
                                }
                            }
                        }
                        return Ok(());
                    }
                };
                match a {
                    RAtom::Cmp(_, l, r, sp) => {
                        for e in [l, r] {
                            if let Some(s) = expr_forced_sort(e) {
                                if s != sort {
                                    return Err(Error::IllSorted(format!("atom at {} mixes vector and value terms", sp)));
                                }
                            }
                            self.mark_expr(e, sort, scope)?;
                        }
                    }
                    RAtom::Pred(_, _, args, sp) => {
                        for e in args {
                            if expr_forced_sort(e) == Some(Sort::Val) {
                                return Err(Error::IllSorted(format!("value term as argument of a predicate at {}", sp)));
                            }
                            self.mark_expr(e, Sort::Vec, scope)?;
                        }
                    }
                    RAtom::P(_, e, sp) => {
                        if expr_forced_sort(e) == Some(Sort::Vec) {
                            return Err(Error::IllSorted(format!("non-integer coefficient in P at {}", sp)));
                        }
                        self.mark_expr(e, Sort::Val, scope)?;
                    }
                }
                Ok(())
            }
            RFormula::Not(g) => self.visit(g, scope, finalize),
            RFormula::And(gs) | RFormula::Or(gs) => gs.iter().try_for_each(|g| self.visit(g, scope, finalize)),
            RFormula::Implies(a, b) => {
                self.visit(a, scope, finalize)?;
                self.visit(b, scope, finalize)
            }
            RFormula::Quant(_, v, g) => {
                scope.push(v.clone());
                let r = self.visit(g, scope, finalize);
                scope.pop();
                r
            }
        }
    }
}

fn vec_term(e: &RExpr) -> Result<VecTerm> {
    let mut t = VecTerm::constant(e.constant.clone());
    for (c, it) in &e.terms {
        match it {
            Item::Ident(n, _) => t = t.add(&VecTerm::monomial(n, c.clone())),
            _ => return Err(Error::IllSorted(format!("value term in vector position at {}", e.span))),
        }
    }
    Ok(t)
}

fn int_of(c: &Rat, span: SourceSpan) -> Result<i64> {
    if !c.is_integer() {
        return Err(Error::IllSorted(format!("non-integer coefficient {} in value term at {}", c, span)));
    }
    bigint_to_i64(c.numer()).ok_or_else(|| perr::<()>("coefficient too large", span).unwrap_err())
}

fn val_term(e: &RExpr) -> Result<ValTerm> {
    let mut s = ValTerm::int(int_of(&e.constant, e.span)?);
    for (c, it) in &e.terms {
        let k = int_of(c, e.span)?;
        let item = match it {
            Item::Ident(n, _) => ValTerm::var(n),
            Item::Oo => ValTerm::infinity(),
            Item::V(Place::Inf, _, sp) => {
                return Err(Error::Unsupported(format!("valuation at the real place at {}", sp)));
            }
            Item::V(Place::Finite(p), inner, _) => ValTerm::v(*p, &vec_term(inner)?),
        };
        s = s.add(&item.scale(k));
    }
    Ok(s)
}

fn build(f: &RFormula, sorter: &Sorter, scope: &mut Vec<Var>) -> Result<Formula> {
    Ok(match f {
        RFormula::Atom(a) => Formula::Atom(match a {
            RAtom::Cmp(op, l, r, _) => match sorter.atom_sort(a, scope).unwrap_or(Sort::Vec) {
                Sort::Vec => {
                    let (l, r) = (vec_term(l)?, vec_term(r)?);
                    match op {
                        CmpOp::Eq => Atom::vec_eq(l.sub(&r)),
                        CmpOp::Le => Atom::le(&l, &r),
                        CmpOp::Lt => Atom::lt(&l, &r),
                    }
                }
                Sort::Val => {
                    let (l, r) = (val_term(l)?, val_term(r)?);
                    match op {
                        CmpOp::Eq => Atom::val_eq(l, r),
                        CmpOp::Le => Atom::val_le(l, r),
                        CmpOp::Lt => return Ok(Formula::Not(Box::new(Formula::Atom(Atom::val_le(r, l))))),
                    }
                }
            },
            RAtom::Pred(kind, place, args, _) => {
                let ts: Vec<VecTerm> = args.iter().map(vec_term).collect::<Result<_>>()?;
                match kind {
                    PredKind::L => Atom::L(*place, ts[0].clone(), ts[1].clone()),
                    PredKind::M => Atom::M(*place, ts[0].clone(), ts[1].clone(), ts[2].clone()),
                    PredKind::Q(n) => Atom::Q(*place, *n, ts[0].clone()),
                }
            }
            RAtom::P(n, e, _) => Atom::div(*n, val_term(e)?),
        }),
        RFormula::Not(g) => Formula::Not(Box::new(build(g, sorter, scope)?)),
        RFormula::And(gs) => Formula::And(gs.iter().map(|g| build(g, sorter, scope)).collect::<Result<_>>()?),
        RFormula::Or(gs) => Formula::Or(gs.iter().map(|g| build(g, sorter, scope)).collect::<Result<_>>()?),
        RFormula::Implies(a, b) => Formula::Implies(Box::new(build(a, sorter, scope)?), Box::new(build(b, sorter, scope)?)),
        RFormula::Quant(exists, v, g) => {
            scope.push(v.clone());
            let body = build(g, sorter, scope);
            scope.pop();
            let body = Box::new(body?);
            if *exists {
                Formula::Exists(v.clone(), body)
            } else {
                Formula::Forall(v.clone(), body)
            }
        }
    })
}

/// Parses a formula. When `places` is given, every place mentioned must
/// belong to it.
pub fn parse(text: &str, places: Option<&BTreeSet<Place>>) -> Result<Formula> {
    parse_with_sorts(text, places, &BTreeMap::new())
}

/// Like [`parse`], with declared sorts for free identifiers.
pub fn parse_with_sorts(text: &str, places: Option<&BTreeSet<Place>>, free_sorts: &BTreeMap<String, Sort>) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, places };
    if matches!(p.peek(), Tok::Eof) {
        return perr("empty input", p.span());
    }
    let raw = p.formula()?;
    if !matches!(p.peek(), Tok::Eof) {
        return perr("unexpected trailing input", p.span());
    }
    let mut sorter = Sorter { hints: free_sorts, free: BTreeMap::new(), changed: true };
    while sorter.changed {
        sorter.changed = false;
        sorter.visit(&raw, &mut Vec::new(), false)?;
    }
    sorter.visit(&raw, &mut Vec::new(), true)?;
    let f = build(&raw, &sorter, &mut Vec::new())?;
    f.check_sorts()?;
    Ok(f)
}

/// Canonical surface text; `parse(print(f))` gives back `f` up to bound
/// variable names and canonical term forms.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

fn write_coeff_item(out: &mut String, first: bool, c: &Rat, item: &str) {
    let neg = c.is_negative();
    let a = c.abs();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    if !a.is_one() {
        out.push_str(&a.to_string());
        out.push('*');
    }
    out.push_str(item);
}

fn write_const(out: &mut String, first: bool, c: &Rat) {
    if first {
        out.push_str(&c.to_string());
    } else if !c.is_zero() {
        out.push_str(if c.is_negative() { " - " } else { " + " });
        out.push_str(&c.abs().to_string());
    }
}

impl fmt::Display for VecTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, (v, c)) in self.coeffs().iter().enumerate() {
            write_coeff_item(&mut out, i == 0, c, v);
        }
        write_const(&mut out, self.coeffs().is_empty(), self.constant_part());
        f.write_str(&out)
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comp::Var(n) => f.write_str(n),
            Comp::V(p, t) => write!(f, "v[{}]({})", p, t),
        }
    }
}

impl fmt::Display for ValTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            return f.write_str("oo");
        }
        let mut out = String::new();
        for (i, (c, k)) in self.comps().iter().enumerate() {
            write_coeff_item(&mut out, i == 0, &Rat::from_int(*k), &c.to_string());
        }
        write_const(&mut out, self.comps().is_empty(), &Rat::from_int(self.constant_part()));
        f.write_str(&out)
    }
}

/// Splits `t` into its variable part and the negated constant, for `lhs = rhs` style output.
fn split_vec(t: &VecTerm) -> (String, String) {
    let vars = VecTerm::from_parts(t.coeffs().clone(), Rat::zero());
    (vars.to_string(), (-t.constant_part()).to_string())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::VecEq(t) => {
                if t.is_constant() {
                    write!(f, "{} = 0", t.constant_part())
                } else {
                    let (l, r) = split_vec(t);
                    write!(f, "{} = {}", l, r)
                }
            }
            Atom::Ord { term, strict } => {
                let (r, l) = split_vec(term);
                if term.is_constant() {
                    write!(f, "0 {} {}", if *strict { "<" } else { "<=" }, term.constant_part())
                } else {
                    write!(f, "{} {} {}", l, if *strict { "<" } else { "<=" }, r)
                }
            }
            Atom::ValLe(a, b) => write!(f, "{} <= {}", a, b),
            Atom::ValEq(a, b) => write!(f, "{} = {}", a, b),
            Atom::Div(n, s) => write!(f, "P[{}]({})", n, s),
            Atom::L(p, a, b) => write!(f, "L[{}]({}, {})", p, a, b),
            Atom::M(p, a, b, c) => write!(f, "M[{}]({}, {}, {})", p, a, b, c),
            Atom::Q(p, n, t) => write!(f, "Q[{},{}]({})", p, n, t),
        }
    }
}

const TRUE_TEXT: &str = "0 = 0";
const FALSE_TEXT: &str = "0 = 1";

fn write_formula(out: &mut String, f: &Formula, ctx: u8) {
    let paren = |out: &mut String, level: u8, body: &dyn Fn(&mut String)| {
        if ctx > level {
            out.push('(');
            body(out);
            out.push(')');
        } else {
            body(out);
        }
    };
    match f {
        Formula::True => out.push_str(TRUE_TEXT),
        Formula::False => out.push_str(FALSE_TEXT),
        Formula::Atom(a) => out.push_str(&a.to_string()),
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => {
                out.push('!');
                out.push_str(&a.to_string());
            }
            Formula::True | Formula::False => {
                out.push('!');
                write_formula(out, g, 4);
            }
            other => {
                out.push_str("!(");
                write_formula(out, other, 0);
                out.push(')');
            }
        },
        Formula::And(gs) | Formula::Or(gs) if gs.is_empty() => {
            out.push_str(if matches!(f, Formula::And(_)) { TRUE_TEXT } else { FALSE_TEXT })
        }
        Formula::And(gs) | Formula::Or(gs) if gs.len() == 1 => write_formula(out, &gs[0], ctx),
        Formula::And(gs) => paren(out, 3, &|out| {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                write_formula(out, g, 4);
            }
        }),
        Formula::Or(gs) => paren(out, 2, &|out| {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_formula(out, g, 3);
            }
        }),
        Formula::Implies(a, b) => paren(out, 1, &|out| {
            write_formula(out, a, 2);
            out.push_str(" -> ");
            write_formula(out, b, 1);
        }),
        Formula::Exists(v, g) | Formula::Forall(v, g) => paren(out, 0, &|out| {
            out.push_str(if matches!(f, Formula::Exists(..)) { "E " } else { "A " });
            out.push_str(&v.name);
            out.push(':');
            out.push_str(&v.sort.to_string());
            out.push_str(". ");
            write_formula(out, g, 0);
        }),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_formula(&mut out, self, 0);
        f.write_str(&out)
    }
}

impl fmt::Display for crate::ast::Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s, None).unwrap()
    }

    #[test]
    fn parses_quantified_surface_formula() {
        let f = p("E x:vec. L[2](x, 1) & !(x = 0)");
        let expected = Formula::exists(
            Var::vec("x"),
            Formula::And(vec![
                Formula::Atom(Atom::L(Place::Finite(2), VecTerm::var("x"), VecTerm::int(1))),
                Formula::Not(Box::new(Formula::Atom(Atom::vec_eq(VecTerm::var("x"))))),
            ]),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_value_comparison() {
        let f = p("v[3](x) <= v[3](y) + 2");
        let expected = Atom::val_le(ValTerm::v(3, &VecTerm::var("x")), ValTerm::v(3, &VecTerm::var("y")).add_int(2));
        assert_eq!(f, Formula::Atom(expected));
    }

    #[test]
    fn rejects_composite_place() {
        assert!(matches!(parse("L[4](x,y)", None), Err(Error::InvalidPlace(_))));
    }

    #[test]
    fn undeclared_place() {
        let sig: BTreeSet<Place> = [Place::Finite(2)].into_iter().collect();
        assert!(matches!(parse("L[3](x,y)", Some(&sig)), Err(Error::Signature(_))));
        assert!(parse("L[2](x,y)", Some(&sig)).is_ok());
    }

    #[test]
    fn errors_carry_spans_inside_input() {
        for text in ["E x:vec. L[2](x, ", "x = = 1", "L[2](x y)", "x $ 1", "E x:foo. x = 0"] {
            let e = parse(text, None).unwrap_err();
            let sp = e.span().expect("span");
            assert!(sp.start <= sp.end && sp.end <= text.len(), "{} {:?}", text, sp);
        }
    }

    #[test]
    fn ill_sorted_inputs() {
        assert!(matches!(parse("E g:val. L[2](g, 1)", None), Err(Error::IllSorted(_))));
        assert!(matches!(parse("E x:vec. P[2](x)", None), Err(Error::IllSorted(_))));
        assert!(matches!(parse("v[2](x) = 1/2", None), Err(Error::IllSorted(_))));
        assert!(matches!(parse("L[2](x, 1) & P[2](x)", None), Err(Error::IllSorted(_))));
    }

    #[test]
    fn free_sorts_are_inferred() {
        let f = p("g <= v[2](x) & g = h");
        let fv = f.free_vars();
        assert_eq!(fv["g"], Sort::Val);
        assert_eq!(fv["h"], Sort::Val);
        assert_eq!(fv["x"], Sort::Vec);
        assert_eq!(p("x <= y").free_vars()["x"], Sort::Vec);
    }

    #[test]
    fn comments_and_whitespace() {
        let f = p("# header\nE x:vec. # trailing\n  x = 1");
        assert_eq!(f, Formula::exists(Var::vec("x"), Formula::Atom(Atom::vec_eq(VecTerm::var("x").add_const(&-Rat::one())))));
    }

    #[test]
    fn printing_basics() {
        assert_eq!(print(&Formula::True), "0 = 0");
        assert_eq!(print(&Formula::False), "0 = 1");
        let a = Formula::Atom(Atom::vec_eq(VecTerm::var("a")));
        let b = Formula::Atom(Atom::vec_eq(VecTerm::var("b")));
        let c = Formula::Atom(Atom::vec_eq(VecTerm::var("c")));
        let f = Formula::Or(vec![Formula::And(vec![a.clone(), b.clone()]), c.clone()]);
        assert_eq!(print(&f), "a = 0 & b = 0 | c = 0");
        let g = Formula::And(vec![Formula::Or(vec![a, b]), c]);
        assert_eq!(print(&g), "(a = 0 | b = 0) & c = 0");
    }

    #[test]
    fn round_trip_examples() {
        for text in [
            "E x:vec. L[2](x, 1) & !(x = 0)",
            "A x:vec. A y:vec. L[2](x + y, x) | L[2](x + y, y)",
            "E x:vec. v[2](x) = 0 & v[2](x - 1) = 0",
            "E g:val. P[3](g - 1) & g <= v[5](1/2*x - 3) + 2",
            "E y:vec. 1/4 <= y & y <= 3/4 & Q[3,2](y)",
            "M[2](x, y, 2*z) -> !(L[inf](x - 1, x + 1) -> y < x)",
            "E g:val. g = oo & !(g <= 3)",
        ] {
            let f = p(text);
            let printed = print(&f);
            let back = parse(&printed, None).unwrap();
            assert_eq!(back.simplify(), f.simplify(), "{} => {}", text, printed);
        }
    }
}
