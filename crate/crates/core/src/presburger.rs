//! Value-sort elimination: ℤ-groups with `P_n` and the element `∞`.
//!
//! Components `v_p(t)` and free value variables are opaque integers here.
//! Before an integer variable is eliminated, every component sharing an atom
//! with it is split into its `∞` and finite cases, after which Cooper's
//! method runs on purely integer literals.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::ast::{dnf_of_nnf, Atom, Comp, Formula, Lit, ValTerm};
use crate::error::{Error, Result};

/// Literal over finite integers: `e < 0`, `e = 0`, `e ≠ 0`, `n | e`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum IntLit {
    Lt(ValTerm),
    Eq(ValTerm),
    Ne(ValTerm),
    Dvd(i64, ValTerm),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum CF {
    True,
    False,
    Int(IntLit),
    Opaque(Lit),
    And(Vec<CF>),
    Or(Vec<CF>),
}

fn cf_and(parts: Vec<CF>) -> CF {
    let mut out = BTreeSet::new();
    for p in parts {
        match p {
            CF::True => {}
            CF::False => return CF::False,
            CF::And(inner) => out.extend(inner),
            other => {
                out.insert(other);
            }
        }
    }
    match out.len() {
        0 => CF::True,
        1 => out.into_iter().next().unwrap(),
        _ => CF::And(out.into_iter().collect()),
    }
}

fn cf_or(parts: Vec<CF>) -> CF {
    let mut out = BTreeSet::new();
    for p in parts {
        match p {
            CF::False => {}
            CF::True => return CF::True,
            CF::Or(inner) => out.extend(inner),
            other => {
                out.insert(other);
            }
        }
    }
    match out.len() {
        0 => CF::False,
        1 => out.into_iter().next().unwrap(),
        _ => CF::Or(out.into_iter().collect()),
    }
}

fn content(e: &ValTerm) -> i64 {
    e.comps().values().fold(0i64, |g, k| g.gcd(k))
}

/// Ground evaluation, gcd normalization and modulus reduction.
fn simplify_lit(l: IntLit) -> CF {
    let g = |e: &ValTerm| content(e);
    let is_eq = matches!(l, IntLit::Eq(_));
    match l {
        IntLit::Lt(e) => {
            if e.is_constant() {
                return bool_cf(e.constant_part() < 0);
            }
            // g·u + c < 0 ⟺ u ≤ ⌊(−c−1)/g⌋
            let k = g(&e);
            let c = e.constant_part();
            let u = e.add_int(-c);
            let bound = Integer::div_floor(&(-c - 1), &k);
            CF::Int(IntLit::Lt(scale_div(&u, k).add_int(-bound - 1)))
        }
        IntLit::Eq(e) | IntLit::Ne(e) if e.is_constant() => {
            let zero = e.constant_part() == 0;
            bool_cf(if is_eq { zero } else { !zero })
        }
        IntLit::Eq(e) | IntLit::Ne(e) => {
            let eq = is_eq;
            let k = g(&e);
            let c = e.constant_part();
            if c % k != 0 {
                return bool_cf(!eq);
            }
            let mut u = scale_div(&e.add_int(-c), k).add_int(c / k);
            // sign: first coefficient positive
            if u.comps().values().next().copied().unwrap_or(1) < 0 {
                u = u.neg();
            }
            CF::Int(if eq { IntLit::Eq(u) } else { IntLit::Ne(u) })
        }
        IntLit::Dvd(n, e) => {
            if n == 1 {
                return CF::True;
            }
            let mut r = ValTerm::int(e.constant_part().rem_euclid(n));
            for (c, k) in e.comps() {
                r = r.add(&ValTerm::comp(c.clone(), k.rem_euclid(n)));
            }
            if r.is_constant() {
                return bool_cf(r.constant_part() == 0);
            }
            // n | g·u + c with d = gcd(n, g): needs d | c, then (n/d) | (g/d)·u + c/d
            let d = n.gcd(&content(&r));
            if d > 1 {
                if r.constant_part() % d != 0 {
                    return CF::False;
                }
                let u = scale_div(&r.add_int(-r.constant_part()), d).add_int(r.constant_part() / d);
                return simplify_lit(IntLit::Dvd(n / d, u));
            }
            CF::Int(IntLit::Dvd(n, r))
        }
    }
}

fn scale_div(e: &ValTerm, k: i64) -> ValTerm {
    let mut out = ValTerm::int(e.constant_part() / k);
    for (c, v) in e.comps() {
        out = out.add(&ValTerm::comp(c.clone(), v / k));
    }
    out
}

fn bool_cf(b: bool) -> CF {
    if b {
        CF::True
    } else {
        CF::False
    }
}

fn m_comp(m: &str) -> Comp {
    Comp::Var(m.to_string())
}

fn diff(a: &ValTerm, b: &ValTerm) -> ValTerm {
    a.add(&b.neg())
}

/// Truth of an atom with an infinite side once all its components are finite.
fn resolve_infinite(a: &Atom) -> Option<bool> {
    match a {
        Atom::ValLe(l, r) if l.is_infinite() || r.is_infinite() => Some(r.is_infinite()),
        Atom::ValEq(l, r) if l.is_infinite() || r.is_infinite() => Some(l.is_infinite() && r.is_infinite()),
        Atom::Div(_, s) if s.is_infinite() => Some(true),
        _ => None,
    }
}

fn lit_to_cf(l: &Lit, m: &str) -> CF {
    let mc = m_comp(m);
    if !l.atom.comps().contains(&mc) {
        return match l.eval_ground() {
            Some(b) => bool_cf(b),
            None => CF::Opaque(l.clone()),
        };
    }
    if let Some(b) = resolve_infinite(&l.atom) {
        return bool_cf(b == l.pos);
    }
    let lit = |x| simplify_lit(x);
    match (&l.atom, l.pos) {
        (Atom::ValLe(a, b), true) => lit(IntLit::Lt(diff(a, b).add_int(-1))),
        (Atom::ValLe(a, b), false) => lit(IntLit::Lt(diff(b, a))),
        (Atom::ValEq(a, b), true) => lit(IntLit::Eq(diff(a, b))),
        (Atom::ValEq(a, b), false) => lit(IntLit::Ne(diff(a, b))),
        (Atom::Div(n, s), true) => lit(IntLit::Dvd(*n as i64, s.clone())),
        (Atom::Div(n, s), false) => {
            let n = *n as i64;
            cf_or((1..n).map(|r| lit(IntLit::Dvd(n, s.add_int(-r)))).collect())
        }
        _ => CF::Opaque(l.clone()),
    }
}

fn formula_to_cf(f: &Formula, m: &str) -> Result<CF> {
    Ok(match f {
        Formula::True => CF::True,
        Formula::False => CF::False,
        Formula::Atom(a) => lit_to_cf(&Lit::pos(a.clone()), m),
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => lit_to_cf(&Lit::neg(a.clone()), m),
            _ => return Err(Error::Internal("formula not in negation normal form".into())),
        },
        Formula::And(gs) => cf_and(gs.iter().map(|g| formula_to_cf(g, m)).collect::<Result<_>>()?),
        Formula::Or(gs) => cf_or(gs.iter().map(|g| formula_to_cf(g, m)).collect::<Result<_>>()?),
        _ => return Err(Error::Internal("unexpected connective in value elimination".into())),
    })
}

fn int_lit_to_formula(l: &IntLit) -> Formula {
    match l {
        IntLit::Lt(e) => Formula::Atom(Atom::val_le(e.add_int(1), ValTerm::int(0))),
        IntLit::Eq(e) => Formula::Atom(Atom::val_eq(e.clone(), ValTerm::int(0))),
        IntLit::Ne(e) => Formula::not(Formula::Atom(Atom::val_eq(e.clone(), ValTerm::int(0)))),
        IntLit::Dvd(n, e) => Formula::Atom(Atom::div(*n as u64, e.clone())),
    }
}

fn cf_to_formula(c: &CF) -> Formula {
    match c {
        CF::True => Formula::True,
        CF::False => Formula::False,
        CF::Int(l) => int_lit_to_formula(l),
        CF::Opaque(l) => l.to_formula(),
        CF::And(cs) => Formula::and(cs.iter().map(cf_to_formula).collect()),
        CF::Or(cs) => Formula::or(cs.iter().map(cf_to_formula).collect()),
    }
}

fn map_lits(c: &CF, f: &mut dyn FnMut(&IntLit) -> CF) -> CF {
    match c {
        CF::Int(l) => f(l),
        CF::And(cs) => cf_and(cs.iter().map(|x| map_lits(x, f)).collect()),
        CF::Or(cs) => cf_or(cs.iter().map(|x| map_lits(x, f)).collect()),
        other => other.clone(),
    }
}

fn visit_lits(c: &CF, f: &mut dyn FnMut(&IntLit)) {
    match c {
        CF::Int(l) => f(l),
        CF::And(cs) | CF::Or(cs) => cs.iter().for_each(|x| visit_lits(x, f)),
        _ => {}
    }
}

fn lit_term(l: &IntLit) -> &ValTerm {
    match l {
        IntLit::Lt(e) | IntLit::Eq(e) | IntLit::Ne(e) | IntLit::Dvd(_, e) => e,
    }
}

fn with_term(l: &IntLit, e: ValTerm) -> IntLit {
    match l {
        IntLit::Lt(_) => IntLit::Lt(e),
        IntLit::Eq(_) => IntLit::Eq(e),
        IntLit::Ne(_) => IntLit::Ne(e),
        IntLit::Dvd(n, _) => IntLit::Dvd(*n, e),
    }
}

fn subst_m(c: &CF, mc: &Comp, by: &ValTerm) -> CF {
    map_lits(c, &mut |l| simplify_lit(with_term(l, lit_term(l).subst_comp(mc, by))))
}

/// Cooper's method on a formula whose `m`-literals are all integer literals.
fn cooper(c: CF, m: &str) -> CF {
    let mc = m_comp(m);
    let mut l: i64 = 1;
    visit_lits(&c, &mut |x| {
        let k = lit_term(x).coeff(&mc);
        if k != 0 {
            l = l.lcm(&k.abs());
        }
    });
    // unit coefficients for m' = l·m
    let c = map_lits(&c, &mut |x| {
        let e = lit_term(x);
        let k = e.coeff(&mc);
        if k == 0 {
            return CF::Int(x.clone());
        }
        let s = l / k.abs();
        let scaled = e.scale(s);
        let unit = scaled.subst_comp(&mc, &ValTerm::int(0)).add(&ValTerm::comp(mc.clone(), k.signum()));
        CF::Int(match x {
            IntLit::Dvd(n, _) => IntLit::Dvd(n * s, unit),
            other => with_term(other, unit),
        })
    });
    let c = cf_and(vec![c, simplify_lit(IntLit::Dvd(l, ValTerm::comp(mc.clone(), 1)))]);
    let mut delta: i64 = 1;
    let mut lower: BTreeSet<ValTerm> = BTreeSet::new();
    let mut upper: BTreeSet<ValTerm> = BTreeSet::new();
    visit_lits(&c, &mut |x| {
        let e = lit_term(x);
        let k = e.coeff(&mc);
        if k == 0 {
            return;
        }
        // rest: e = k·m + rest
        let rest = e.subst_comp(&mc, &ValTerm::int(0));
        // value s with m = s solving e = 0
        let root = if k > 0 { rest.neg() } else { rest.clone() };
        match x {
            IntLit::Lt(_) => {
                if k < 0 {
                    lower.insert(rest.clone());
                } else {
                    upper.insert(rest.neg());
                }
            }
            IntLit::Eq(_) => {
                lower.insert(root.add_int(-1));
                upper.insert(root.add_int(1));
            }
            IntLit::Ne(_) => {
                lower.insert(root.clone());
                upper.insert(root);
            }
            IntLit::Dvd(n, _) => delta = delta.lcm(n),
        }
    });
    let use_lower = lower.len() <= upper.len();
    let at_infinity = map_lits(&c, &mut |x| {
        let k = lit_term(x).coeff(&mc);
        if k == 0 {
            return CF::Int(x.clone());
        }
        match x {
            IntLit::Lt(_) => bool_cf((k > 0) == use_lower),
            IntLit::Eq(_) => CF::False,
            IntLit::Ne(_) => CF::True,
            IntLit::Dvd(..) => CF::Int(x.clone()),
        }
    });
    let mut parts = Vec::new();
    for j in 1..=delta {
        let shift = if use_lower { j } else { -j };
        parts.push(subst_m(&at_infinity, &mc, &ValTerm::int(shift)));
        let bounds = if use_lower { &lower } else { &upper };
        for b in bounds {
            parts.push(subst_m(&c, &mc, &b.add_int(shift)));
        }
    }
    cf_or(parts)
}

/// Components that share an atom with `Var(m)`.
fn cooccurring(f: &Formula, m: &str) -> BTreeSet<Comp> {
    let mc = m_comp(m);
    let mut out = BTreeSet::new();
    f.visit_atoms(&mut |a| {
        let cs = a.comps();
        if cs.contains(&mc) {
            out.extend(cs.into_iter().filter(|c| **c != mc).cloned());
        }
    });
    out
}

/// Literal asserting `c = ∞` (or `c ≠ ∞`).
pub fn infinity_guard(c: &Comp, infinite: bool) -> Lit {
    let atom = match c {
        Comp::Var(n) => Atom::val_eq(ValTerm::var(n), ValTerm::infinity()),
        Comp::V(_, t) => Atom::vec_eq(t.clone()),
    };
    Lit { pos: infinite, atom }
}

fn subst_infinity(f: &Formula, c: &Comp) -> Formula {
    f.map_atoms(&mut |a| Formula::Atom(a.subst_comp(c, &ValTerm::infinity()))).simplify()
}

fn split_then(f: &Formula, m: &str, finite: &mut BTreeSet<Comp>, k: &mut dyn FnMut(&Formula) -> Result<Formula>) -> Result<Formula> {
    let pending = cooccurring(f, m).into_iter().find(|c| !finite.contains(c));
    match pending {
        None => k(f),
        Some(c) => {
            let inf_branch = subst_infinity(f, &c);
            let a = Formula::and(vec![infinity_guard(&c, true).to_formula(), split_then(&inf_branch, m, finite, k)?]);
            finite.insert(c.clone());
            let b = split_then(f, m, finite, k);
            finite.remove(&c);
            Ok(Formula::or(vec![a, Formula::and(vec![infinity_guard(&c, false).to_formula(), b?])]))
        }
    }
}

/// `∃m ∈ ℤ. f` for a quantifier-free `f`.
pub fn exists_int(f: &Formula, m: &str) -> Result<Formula> {
    exists_int_given(f, m, &BTreeSet::new())
}

/// [`exists_int`] where the components in `finite` are known not to be `∞`.
pub fn exists_int_given(f: &Formula, m: &str, finite: &BTreeSet<Comp>) -> Result<Formula> {
    if !f.is_quantifier_free() {
        return Err(Error::Precondition("value elimination needs a quantifier-free formula".into()));
    }
    let f = f.nnf().simplify();
    let out = split_then(&f, m, &mut finite.clone(), &mut |g| {
        let g = g.nnf();
        let cf = formula_to_cf(&g, m)?;
        Ok(cf_to_formula(&cooper(cf, m)))
    })?;
    Ok(out.simplify())
}

/// `∃γ ∈ ℤ ∪ {∞}. f`.
pub fn exists_val(f: &Formula, g: &str) -> Result<Formula> {
    let at_inf = subst_infinity(f, &Comp::Var(g.to_string()));
    Ok(Formula::or(vec![at_inf, exists_int(f, g)?]).simplify())
}

/// Splits every component of `f` into its `∞` and finite cases and resolves
/// comparisons with `∞`; no `∞` remains in the result.
pub fn infinity_split(f: &Formula) -> Formula {
    fn go(f: &Formula, finite: &mut Vec<Comp>) -> Formula {
        let mut all = BTreeSet::new();
        f.visit_atoms(&mut |a| all.extend(a.comps().into_iter().cloned()));
        match all.into_iter().find(|c| !finite.contains(c)) {
            None => f
                .map_atoms(&mut |a| match resolve_infinite(a) {
                    Some(b) => bool_formula(b),
                    None => Formula::Atom(a.clone()),
                })
                .simplify(),
            Some(c) => {
                let inf = go(&subst_infinity(f, &c), finite);
                finite.push(c.clone());
                let fin = go(f, finite);
                finite.pop();
                Formula::or(vec![
                    Formula::and(vec![infinity_guard(&c, true).to_formula(), inf]),
                    Formula::and(vec![infinity_guard(&c, false).to_formula(), fin]),
                ])
                .simplify()
            }
        }
    }
    go(&f.nnf(), &mut Vec::new())
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// Truth value of a variable-free value formula.
pub fn decide_ground_val(f: &Formula) -> Result<bool> {
    match f.simplify() {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        other => Err(Error::Precondition(format!("not a ground formula: {}", other))),
    }
}

/// DNF of a quantifier-free formula after the `m`-related `∞` split; exposed
/// for callers that want literal conjunctions.
pub fn dnf(f: &Formula) -> Vec<Vec<Lit>> {
    dnf_of_nnf(&f.nnf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eval_qf, Assignment};
    use crate::parser::parse;
    use crate::rational::ValInt;

    fn p(s: &str) -> Formula {
        parse(s, None).unwrap()
    }

    fn pv(s: &str, vals: &[&str]) -> Formula {
        let sorts = vals.iter().map(|v| (v.to_string(), crate::ast::Sort::Val)).collect();
        crate::parser::parse_with_sorts(s, None, &sorts).unwrap()
    }

    #[test]
    fn infinity_split_examples() {
        assert_eq!(infinity_split(&p("v[2](x) <= v[2](0)")), Formula::True);
        assert_eq!(infinity_split(&p("v[2](0) <= v[2](x)")), p("x = 0"));
        assert_eq!(infinity_split(&p("P[3](oo)")), Formula::True);
    }

    #[test]
    fn elimination_examples() {
        let f = pv("g = d + 3", &["g", "d"]);
        assert_eq!(exists_val(&f, "g").unwrap(), Formula::True);
        // over ℤ alone the witness needs a finite δ
        assert_eq!(exists_int(&f, "g").unwrap(), pv("!(d = oo)", &["d"]));
        let f = pv("2*g = d", &["g", "d"]);
        let out = exists_val(&f, "g").unwrap();
        for d in (-8..=8).map(ValInt::Fin).chain([ValInt::Inf]) {
            let a = Assignment::new().with_val("d", d);
            assert_eq!(eval_qf(&out, &a).unwrap(), d.divisible_by(2), "{}", out);
        }
    }

    #[test]
    fn open_interval_needs_gap_two() {
        // ∃γ (δ₁ < γ ∧ γ < δ₂) ⟺ δ₁ + 2 ≤ δ₂, exhaustively over [−6, 6]²
        let f = pv("d1 < g & g < d2", &["g", "d1", "d2"]);
        let out = exists_int(&f, "g").unwrap();
        let expected = pv("d1 + 2 <= d2", &["d1", "d2"]);
        for d1 in -6..=6 {
            for d2 in -6..=6 {
                let a = Assignment::new().with_val("d1", ValInt::Fin(d1)).with_val("d2", ValInt::Fin(d2));
                let brute = (-20..=20).any(|g| d1 < g && g < d2);
                assert_eq!(eval_qf(&out, &a).unwrap(), brute);
                assert_eq!(eval_qf(&expected, &a).unwrap(), brute);
            }
        }
    }

    #[test]
    fn ground_decisions() {
        assert!(decide_ground_val(&p("P[2](4)")).unwrap());
        assert!(!decide_ground_val(&p("3 <= 2 + v[7](1)")).unwrap());
        assert!(decide_ground_val(&p("P[3](v[2](8))")).unwrap());
        assert!(decide_ground_val(&pv("g <= 1", &["g"])).is_err());
    }

    #[test]
    fn negated_comparison_over_extended_integers() {
        // ¬(γ ≤ δ) ⟺ δ + 1 ≤ γ once both are finite
        let vals: Vec<ValInt> = (-3..=3).map(ValInt::Fin).chain([ValInt::Inf]).collect();
        let neg = pv("!(g <= d)", &["g", "d"]);
        let split = infinity_split(&neg);
        let rewritten = pv("d + 1 <= g", &["g", "d"]);
        for g in &vals {
            for d in &vals {
                let a = Assignment::new().with_val("g", *g).with_val("d", *d);
                let truth = eval_qf(&neg, &a).unwrap();
                assert_eq!(eval_qf(&split, &a).unwrap(), truth);
                if !g.is_inf() && !d.is_inf() {
                    assert_eq!(eval_qf(&rewritten, &a).unwrap(), truth);
                }
            }
        }
    }

    #[test]
    fn valuation_components_are_split() {
        // ∃γ (v2(x) < γ ∧ γ < v2(y)): false when y = 0 is not forced
        let f = pv("v[2](x) < g & g < v[2](y)", &["g"]);
        let out = exists_int(&f, "g").unwrap();
        for (x, y, expect) in [(1, 8, true), (1, 2, false), (1, 0, true), (0, 0, false), (0, 1, false), (4, 16, true), (4, 8, false)] {
            let a = Assignment::new().with_vec("x", x.into()).with_vec("y", y.into());
            assert_eq!(eval_qf(&out, &a).unwrap(), expect, "x={} y={} {}", x, y, out);
        }
        let with_inf = exists_val(&pv("v[2](x) <= g & P[2](g)", &["g"]), "g").unwrap();
        assert_eq!(with_inf, Formula::True);
    }

    fn brute_exists(f: &Formula, g: &str, base: &Assignment) -> bool {
        (-40..=40).map(ValInt::Fin).chain([ValInt::Inf]).any(|v| eval_qf(f, &base.clone().with_val(g, v)).unwrap())
    }

    #[test]
    fn cooper_agrees_with_brute_force() {
        let cases = [
            "3*g <= d & d <= 3*g + 1 & P[2](g + e)",
            "2*g + 1 = d | (e < 2*g & !P[3](g))",
            "!(g = d) & !(g = e) & d <= g & g <= e",
            "P[4](2*g + d) & g + e <= 2 & 0 <= g",
            "!P[2](g) & !P[3](g + d) & e <= g & g <= e + 2",
        ];
        for text in cases {
            let f = pv(text, &["g", "d", "e"]);
            let out = exists_val(&f, "g").unwrap();
            for d in -5..=5 {
                for e in -5..=5 {
                    let a = Assignment::new().with_val("d", ValInt::Fin(d)).with_val("e", ValInt::Fin(e));
                    assert_eq!(eval_qf(&out, &a).unwrap(), brute_exists(&f, "g", &a), "{} d={} e={}", text, d, e);
                }
            }
        }
    }

    #[test]
    fn outputs_normalize_divisibility() {
        let out = exists_int(&pv("5*g = d + 1 & P[1](g)", &["g", "d"]), "g").unwrap();
        out.visit_atoms(&mut |a| {
            if let Atom::Div(n, _) = a {
                assert!(*n >= 2);
            }
        });
        assert!(!format!("{}", out).contains('g'));
    }
}
