//! Fourier–Motzkin elimination for the real place.

use std::collections::BTreeMap;

use crate::ast::{Atom, Formula, Lit, VecTerm};
use crate::error::{Error, Result};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
}

/// `0 < t`, `0 ≤ t`, `t = 0` or `t ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinIneq {
    pub term: VecTerm,
    pub rel: Rel,
}

impl LinIneq {
    pub fn new(term: VecTerm, rel: Rel) -> LinIneq {
        let term = match term.monic() {
            None => term,
            Some((lead, m)) => match rel {
                Rel::Eq | Rel::Ne => m,
                Rel::Lt | Rel::Le => term.scale(&lead.abs().recip().expect("nonzero")),
            },
        };
        LinIneq { term, rel }
    }

    pub fn from_lit(l: &Lit) -> Option<LinIneq> {
        match (&l.atom, l.pos) {
            (Atom::Ord { term, strict }, true) => {
                Some(LinIneq::new(term.clone(), if *strict { Rel::Lt } else { Rel::Le }))
            }
            (Atom::Ord { term, strict }, false) => {
                Some(LinIneq::new(term.neg(), if *strict { Rel::Le } else { Rel::Lt }))
            }
            (Atom::VecEq(t), pos) => Some(LinIneq::new(t.clone(), if pos { Rel::Eq } else { Rel::Ne })),
            _ => None,
        }
    }

    pub fn to_formula(&self) -> Formula {
        let t = self.term.clone();
        match self.rel {
            Rel::Lt => Formula::atom(Atom::ord(t, true)),
            Rel::Le => Formula::atom(Atom::ord(t, false)),
            Rel::Eq => Formula::atom(Atom::vec_eq(t)),
            Rel::Ne => Formula::not(Formula::atom(Atom::vec_eq(t))),
        }
    }

    pub fn holds(&self, value: &Rat) -> bool {
        match self.rel {
            Rel::Lt => value.is_positive(),
            Rel::Le => !value.is_negative(),
            Rel::Eq => value.is_zero(),
            Rel::Ne => !value.is_zero(),
        }
    }

    fn substitute(&self, x: &str, t: &VecTerm) -> LinIneq {
        LinIneq::new(self.term.substitute(x, t), self.rel)
    }
}

/// Lower and upper bounds `x > b` / `x < b` (strict flag) read off the
/// conjuncts mentioning `x`.
fn bounds(conj: &[LinIneq], x: &str) -> (Vec<(VecTerm, bool)>, Vec<(VecTerm, bool)>) {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for c in conj {
        let k = c.term.coeff(x);
        if k.is_zero() {
            continue;
        }
        let strict = c.rel == Rel::Lt;
        let bound = c.term.solve_for(x).expect("x occurs");
        if k.is_positive() {
            lower.push((bound, strict));
        } else {
            upper.push((bound, strict));
        }
    }
    (lower, upper)
}

fn fm(conj: &[LinIneq], x: &str) -> Formula {
    let (lower, upper) = bounds(conj, x);
    let mut parts: Vec<Formula> =
        conj.iter().filter(|c| !c.term.contains(x)).map(LinIneq::to_formula).collect();
    for (l, sl) in &lower {
        for (u, su) in &upper {
            parts.push(Formula::atom(Atom::ord(u.sub(l), *sl || *su)));
        }
    }
    Formula::and(parts).simplify()
}

/// `∃x. ⋀ conj` over the rationals.
pub fn eliminate_vec_var_real(conj: &[LinIneq], x: &str) -> Formula {
    if let Some(i) = conj.iter().position(|c| c.rel == Rel::Ne && c.term.contains(x)) {
        let mut rest = conj.to_vec();
        let t = rest.remove(i).term;
        let branches = [t.clone(), t.neg()].into_iter().map(|s| {
            let mut branch = rest.clone();
            branch.push(LinIneq::new(s, Rel::Lt));
            eliminate_vec_var_real(&branch, x)
        });
        return Formula::or(branches.collect()).simplify();
    }
    if let Some(eq) = conj.iter().find(|c| c.rel == Rel::Eq && c.term.contains(x)) {
        let value = eq.term.solve_for(x).expect("x occurs");
        let parts = conj.iter().map(|c| c.substitute(x, &value).to_formula()).collect();
        return Formula::and(parts).simplify();
    }
    fm(conj, x)
}

/// `∃x` of the conjunction with every bound on `x` made strict and the
/// disequalities on `x` dropped: existence of an open interval of solutions.
pub fn eliminate_generic(conj: &[LinIneq], x: &str) -> Formula {
    let relaxed: Vec<LinIneq> = conj
        .iter()
        .filter(|c| !(c.rel == Rel::Ne && c.term.contains(x)))
        .map(|c| if c.term.contains(x) && c.rel == Rel::Le { LinIneq { rel: Rel::Lt, ..c.clone() } } else { c.clone() })
        .collect();
    if relaxed.iter().any(|c| c.rel == Rel::Eq && c.term.contains(x)) {
        return Formula::False;
    }
    fm(&relaxed, x)
}

fn order_ineq(g: &Formula) -> Option<LinIneq> {
    let ineq = match g {
        Formula::Atom(a @ Atom::Ord { .. }) => LinIneq::from_lit(&Lit::pos(a.clone())),
        Formula::Not(h) => match h.as_ref() {
            Formula::Atom(a @ Atom::Ord { .. }) => LinIneq::from_lit(&Lit::neg(a.clone())),
            _ => None,
        },
        _ => None,
    };
    ineq.filter(|c| !c.term.is_constant())
}

type Bound = Option<(Rat, bool)>;

/// Merges the order literals among `parts` form by form. In a conjunction
/// the tightest bound on each side survives, in a disjunction the loosest.
/// `None` means the junction collapses to its absorbing value.
fn merge_bounds(parts: Vec<Formula>, conj: bool) -> Option<Vec<Formula>> {
    let mut out = Vec::new();
    let mut ranges: BTreeMap<VecTerm, (Bound, Bound)> = BTreeMap::new();
    for g in parts {
        let Some(ineq) = order_ineq(&g) else {
            out.push(g);
            continue;
        };
        let strict = ineq.rel == Rel::Lt;
        let k = ineq.term.constant_part().clone();
        let lin = ineq.term.add_const(&-&k);
        let (slot, value, is_lower) = if lin.leading().is_positive() {
            (&mut ranges.entry(lin).or_default().0, -k, true)
        } else {
            (&mut ranges.entry(lin.neg()).or_default().1, k, false)
        };
        let replace = match slot {
            None => true,
            Some((v, st)) => {
                // a bound is tighter when it is larger (lower) or smaller (upper)
                let tighter = if is_lower { value > *v } else { value < *v } || (value == *v && strict && !*st);
                let looser = if is_lower { value < *v } else { value > *v } || (value == *v && !strict && *st);
                if conj {
                    tighter
                } else {
                    looser
                }
            }
        };
        if replace {
            *slot = Some((value, strict));
        }
    }
    for (lin, (lo, hi)) in ranges {
        if let (Some((l, sl)), Some((h, sh))) = (&lo, &hi) {
            let crossing = l > h || (l == h && (*sl || *sh));
            if crossing == conj {
                return None;
            }
        }
        if let Some((l, strict)) = lo {
            out.push(Formula::atom(Atom::ord(lin.add_const(&-&l), strict)));
        }
        if let Some((h, strict)) = hi {
            out.push(Formula::atom(Atom::ord(lin.neg().add_const(&h), strict)));
        }
    }
    Some(out)
}

fn conjuncts(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(gs) => gs.clone(),
        other => vec![other.clone()],
    }
}

/// Disjunction of `parts` with absorption (`A ∨ (A ∧ B) = A`) and merging of
/// disjuncts that differ in one conjunct (`(A ∧ l) ∨ (A ∧ m) = A ∧ (l ∨ m)`).
fn factor(parts: Vec<Formula>) -> Formula {
    let mut ds: Vec<Vec<Formula>> = parts.iter().map(conjuncts).collect();
    'again: loop {
        for i in 0..ds.len() {
            for j in 0..ds.len() {
                if i == j {
                    continue;
                }
                let only_i: Vec<&Formula> = ds[i].iter().filter(|g| !ds[j].contains(g)).collect();
                if only_i.is_empty() {
                    ds.remove(j);
                    continue 'again;
                }
                let only_j: Vec<&Formula> = ds[j].iter().filter(|g| !ds[i].contains(g)).collect();
                if only_i.len() == 1 && only_j.len() == 1 {
                    let joined = match merge_bounds(vec![only_i[0].clone(), only_j[0].clone()], false) {
                        None => None,
                        Some(v) if v.len() == 1 => Some(v[0].clone()),
                        Some(_) => continue,
                    };
                    let mut merged: Vec<Formula> = ds[i].iter().filter(|g| *g != only_i[0]).cloned().collect();
                    merged.extend(joined);
                    let merged = conjuncts(&Formula::and(merged).simplify());
                    let (lo, hi) = (i.min(j), i.max(j));
                    ds.remove(hi);
                    ds[lo] = merged;
                    continue 'again;
                }
            }
        }
        break;
    }
    Formula::or(ds.into_iter().map(|d| Formula::and(d).simplify()).collect()).simplify()
}

/// Keeps the tightest order bound per linear form in each conjunction and
/// the loosest in each disjunction; crossing bounds become `false` in a
/// conjunction and covering bounds `true` in a disjunction.
pub fn tighten(f: &Formula) -> Formula {
    match f {
        Formula::And(gs) => match merge_bounds(gs.iter().map(tighten).collect(), true) {
            None => Formula::False,
            Some(parts) => Formula::and(parts).simplify(),
        },
        Formula::Or(gs) => match merge_bounds(gs.iter().map(tighten).collect(), false) {
            None => Formula::True,
            Some(parts) => factor(parts),
        },
        Formula::Not(g) => Formula::not(tighten(g)).simplify(),
        Formula::Implies(a, b) => Formula::implies(tighten(a), tighten(b)).simplify(),
        other => other.clone(),
    }
}

/// Points where some conjunct mentioning `x` changes truth value, as terms in
/// the other variables.
pub fn boundary_points(conj: &[LinIneq], x: &str) -> Vec<VecTerm> {
    let mut out: Vec<VecTerm> = Vec::new();
    for c in conj {
        if let Some(b) = c.term.solve_for(x) {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    out
}

/// Non-strict lower bounds on `x`. When the conjunction pins `x` to a
/// single point, that point is one of them.
pub fn closed_lower_bounds(conj: &[LinIneq], x: &str) -> Vec<VecTerm> {
    let mut out: Vec<VecTerm> = Vec::new();
    for (b, strict) in bounds(conj, x).0 {
        let closed = !strict && conj.iter().all(|c| c.rel != Rel::Ne || c.term.solve_for(x).as_ref() != Some(&b));
        if closed && !out.contains(&b) {
            out.push(b);
        }
    }
    out
}

/// Solution set of a conjunction in the single variable `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    /// `(bound, strict)`.
    pub lo: Option<(Rat, bool)>,
    pub hi: Option<(Rat, bool)>,
    pub pinned: Option<Rat>,
    pub excluded: Vec<Rat>,
    pub empty: bool,
}

impl Interval {
    pub fn contains(&self, v: &Rat) -> bool {
        if self.empty || self.excluded.contains(v) {
            return false;
        }
        if let Some(p) = &self.pinned {
            if p != v {
                return false;
            }
        }
        let above = match &self.lo {
            None => true,
            Some((b, s)) => if *s { v > b } else { v >= b },
        };
        let below = match &self.hi {
            None => true,
            Some((b, s)) => if *s { v < b } else { v <= b },
        };
        above && below
    }

    /// Open interval left after making both ends strict; `None` if it is
    /// empty or the set is pinned to a point.
    pub fn open_part(&self) -> Option<(Option<Rat>, Option<Rat>)> {
        if self.empty || self.pinned.is_some() {
            return None;
        }
        let lo = self.lo.as_ref().map(|b| b.0.clone());
        let hi = self.hi.as_ref().map(|b| b.0.clone());
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l >= h {
                return None;
            }
        }
        Some((lo, hi))
    }
}

/// Evaluates the bounds of a conjunction whose only free variable is `x`.
pub fn interval(conj: &[LinIneq], x: &str) -> Result<Interval> {
    let mut iv = Interval { lo: None, hi: None, pinned: None, excluded: Vec::new(), empty: false };
    let env = |_: &str| None;
    for c in conj {
        let k = c.term.coeff(x);
        if k.is_zero() {
            let v = c.term.eval(&env)?;
            if !c.holds(&v) {
                iv.empty = true;
            }
            continue;
        }
        let b = c.term.solve_for(x).expect("x occurs").eval(&env)?;
        match c.rel {
            Rel::Eq => match &iv.pinned {
                Some(p) if *p != b => iv.empty = true,
                _ => iv.pinned = Some(b),
            },
            Rel::Ne => iv.excluded.push(b),
            Rel::Lt | Rel::Le => {
                let strict = c.rel == Rel::Lt;
                let slot = if k.is_positive() { &mut iv.lo } else { &mut iv.hi };
                let tighter = match slot {
                    None => true,
                    Some((old, old_strict)) => {
                        let better = if k.is_positive() { b > *old } else { b < *old };
                        better || (b == *old && strict && !*old_strict)
                    }
                };
                if tighter {
                    *slot = Some((b, strict));
                }
            }
        }
    }
    if let Some(p) = iv.pinned.clone() {
        let unpinned = Interval { pinned: None, ..iv.clone() };
        if !unpinned.contains(&p) {
            iv.empty = true;
        }
    } else if let (Some((l, sl)), Some((h, sh))) = (&iv.lo, &iv.hi) {
        if l > h || (l == h && (*sl || *sh || iv.excluded.contains(l))) {
            iv.empty = true;
        }
    }
    Ok(iv)
}

/// A point of the open interval `(lo, hi)` avoiding `excluded`.
pub fn pick_open(lo: Option<&Rat>, hi: Option<&Rat>, excluded: &[Rat]) -> Rat {
    let mut k: i64 = 1;
    loop {
        let v = match (lo, hi) {
            (Some(l), Some(h)) => l + &((h - l) * Rat::new(1, k + 1).expect("nonzero")),
            (Some(l), None) => Rat::from_bigint(l.floor()) + Rat::from_int(k),
            (None, Some(h)) => Rat::from_bigint(h.ceil()) - Rat::from_int(k),
            (None, None) => Rat::from_int(k - 1),
        };
        if !excluded.contains(&v) {
            return v;
        }
        k += 1;
    }
}

/// A rational satisfying `conj` once the assignment is substituted.
pub fn witness_real(conj: &[LinIneq], x: &str, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
    let ground: Vec<LinIneq> = conj
        .iter()
        .map(|c| {
            let mut t = c.term.clone();
            for (name, v) in assignment {
                if name != x {
                    t = t.substitute(name, &VecTerm::constant(v.clone()));
                }
            }
            LinIneq::new(t, c.rel)
        })
        .collect();
    if let Some(v) = ground.iter().flat_map(|c| c.term.vars()).find(|v| v.as_str() != x) {
        return Err(Error::MissingAssignment(v.clone()));
    }
    let iv = interval(&ground, x)?;
    if iv.empty {
        return Err(Error::NoWitness("the real constraints are infeasible".into()));
    }
    if let Some(p) = iv.pinned {
        return Ok(p);
    }
    let lo = iv.lo.as_ref().map(|b| &b.0);
    let hi = iv.hi.as_ref().map(|b| &b.0);
    let mut excluded = iv.excluded.clone();
    if let (Some(l), Some(h)) = (lo, hi) {
        if l == h {
            return Ok(l.clone());
        }
    }
    excluded.extend(lo.cloned());
    excluded.extend(hi.cloned());
    let v = pick_open(lo, hi, &excluded);
    if iv.contains(&v) {
        Ok(v)
    } else {
        Err(Error::Internal(format!("real witness {} misses its interval", v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::dnf_of_nnf;
    use crate::oracle::{check_equiv_sampled, eval_qf, Assignment};
    use crate::parser::parse;

    fn conj(s: &str) -> Vec<LinIneq> {
        let f = parse(s, None).unwrap();
        let d = dnf_of_nnf(&f.nnf());
        assert_eq!(d.len(), 1);
        d[0].iter().map(|l| LinIneq::from_lit(l).unwrap()).collect()
    }

    fn assign(pairs: &[(&str, i64, i64)]) -> BTreeMap<String, Rat> {
        pairs.iter().map(|(n, a, b)| (n.to_string(), Rat::new(*a, *b).unwrap())).collect()
    }

    #[test]
    fn density() {
        let out = eliminate_vec_var_real(&conj("a < x & x < b"), "x");
        assert_eq!(out, parse("a < b", None).unwrap());
    }

    #[test]
    fn pinned_by_equation() {
        let out = eliminate_vec_var_real(&conj("2*x = a + b & x >= a"), "x");
        assert_eq!(out, parse("1/2*a + 1/2*b >= a", None).unwrap().simplify());
    }

    #[test]
    fn unbounded_side() {
        assert_eq!(eliminate_vec_var_real(&conj("x > a"), "x"), Formula::True);
    }

    #[test]
    fn mixed_strictness_needs_strict_gap() {
        let out = eliminate_vec_var_real(&conj("a <= x & x < b"), "x");
        assert_eq!(out, parse("a < b", None).unwrap());
        let out = eliminate_vec_var_real(&conj("a <= x & x <= b"), "x");
        assert_eq!(out, parse("a <= b", None).unwrap());
    }

    #[test]
    fn disequality_is_split() {
        let out = eliminate_vec_var_real(&conj("a <= x & x <= b & !(x = a)"), "x");
        let f = parse("E x:vec. a <= x & x <= b & !(x = a)", None).unwrap();
        let rep = check_equiv_sampled(&f, &out, 200, 7).unwrap();
        assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn witnesses() {
        assert_eq!(witness_real(&conj("a < x & x < b"), "x", &assign(&[("a", 0, 1), ("b", 1, 1)])).unwrap(), Rat::new(1, 2).unwrap());
        assert_eq!(witness_real(&conj("x > 3"), "x", &BTreeMap::new()).unwrap(), Rat::from_int(4));
        assert_eq!(witness_real(&conj("x = 2*a"), "x", &assign(&[("a", 1, 3)])).unwrap(), Rat::new(2, 3).unwrap());
        assert!(witness_real(&conj("x > 3 & x < 2"), "x", &BTreeMap::new()).is_err());
    }

    #[test]
    fn sampled_soundness() {
        let cases = [
            "a < x & x < b & 2*x <= c",
            "x - y <= 1 & y - x <= 1 & x >= 0 & 3*x < y + 2",
            "x = 2*a + 1 & x < b",
            "!(x = 0) & x <= a & -x <= a",
            "a <= x & x <= a",
        ];
        for text in cases {
            let c = conj(text);
            let out = eliminate_vec_var_real(&c, "x");
            assert!(!out.free_vars().contains_key("x"), "{}", out);
            let f = Formula::exists(crate::ast::Var::vec("x"), parse(text, None).unwrap());
            let rep = check_equiv_sampled(&f, &out, 200, 11).unwrap();
            assert!(rep.passed(), "{}: {:?}", text, rep);
        }
    }

    #[test]
    fn generic_part_is_open() {
        let c = conj("a <= x & x <= b");
        assert_eq!(eliminate_generic(&c, "x"), parse("a < b", None).unwrap());
        assert_eq!(eliminate_generic(&conj("x = a"), "x"), Formula::False);
        let pts = boundary_points(&c, "x");
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn witness_satisfies_formula() {
        let text = "x - y <= 1 & y - x <= 1 & x >= 0 & 3*x < y + 2 & !(x = 1/2)";
        let c = conj(text);
        let v = witness_real(&c, "x", &assign(&[("y", 1, 1)])).unwrap();
        let a = Assignment::new().with_vec("x", v).with_vec("y", Rat::one());
        assert!(eval_qf(&parse(text, None).unwrap(), &a).unwrap());
    }
}
