//! Elimination and decision for formulas mixing several places.
//!
//! For one vector variable `x` and one conjunction of literals, either `x` is
//! a root of some literal (a center of a valuation, a boundary of an order
//! atom, or the solution of an equation), which is handled by substitution,
//! or `x` avoids all of them. In the latter case each literal only constrains
//! `x` on an open set of one completion of ℚ, and since ℚ is dense in the
//! product of finitely many completions the conjunction is satisfiable iff
//! the literals of each place are satisfiable separately.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::ast::{dnf_of_nnf, tidy_conj, Atom, Comp, Formula, Lit, Place, Sort, ValTerm, Var, VecTerm};
use crate::error::{Error, Result};
use crate::interpret::{l_to_order, to_two_sorted};
use crate::oracle::{eval_qf, Assignment};
use crate::padic;
use crate::presburger::exists_val;
use crate::rational::{is_prime, vp_unchecked, Rat, ValInt};
use crate::real::{self, LinIneq};

pub const DEFAULT_MAX_BLOCK: usize = 6;

/// Places with `L` (`s0`) and the finite places that also have `M` and `Q`
/// (`s1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub s0: BTreeSet<Place>,
    pub s1: BTreeSet<u64>,
}

impl Signature {
    pub fn new(s0: BTreeSet<Place>, s1: BTreeSet<u64>) -> Result<Signature> {
        for p in &s1 {
            if !is_prime(*p) {
                return Err(Error::InvalidPlace(p.to_string()));
            }
            if !s0.contains(&Place::Finite(*p)) {
                return Err(Error::Signature(format!("M/Q place {} is not among the L places", p)));
            }
        }
        Ok(Signature { s0, s1 })
    }

    /// Every place used by `f`, with `M` and `Q` at all of its finite ones.
    pub fn of_formula(f: &Formula) -> Signature {
        let s0 = f.places();
        let s1 = s0.iter().filter_map(|p| p.prime()).collect();
        Signature { s0, s1 }
    }

    /// `s0` with `M` and `Q` at every finite place of it.
    pub fn full(s0: BTreeSet<Place>) -> Signature {
        let s1 = s0.iter().filter_map(|p| p.prime()).collect();
        Signature { s0, s1 }
    }

    fn has(&self, p: Place) -> bool {
        self.s0.contains(&p)
    }

    pub fn check_atom(&self, a: &Atom) -> Result<()> {
        let outside = |p: Place| Error::Signature(format!("{} uses place {} outside the signature", a, p));
        match a {
            Atom::M(Place::Inf, ..) | Atom::Q(Place::Inf, ..) => {
                return Err(Error::Unsupported(format!("{}: M and Q at the real place are not decidable", a)))
            }
            Atom::M(p @ Place::Finite(q), ..) | Atom::Q(p @ Place::Finite(q), ..) => {
                if !self.has(*p) {
                    return Err(outside(*p));
                }
                if !self.s1.contains(q) {
                    return Err(Error::Signature(format!("{}: M and Q are not available at {}", a, q)));
                }
            }
            _ => {
                let places = a.places();
                if let Some(p) = places.iter().find(|p| !self.has(**p)) {
                    return Err(outside(*p));
                }
                if places.len() > 1 {
                    return Err(Error::Unsupported(format!("{} compares values at different places", a)));
                }
            }
        }
        Ok(())
    }

    pub fn check(&self, f: &Formula) -> Result<()> {
        let mut err = None;
        f.visit_atoms(&mut |a| {
            if err.is_none() {
                err = self.check_atom(a).err();
            }
        });
        err.map_or(Ok(()), Err)
    }
}

/// Checks the signature and rewrites surface atoms: `L_∞` into the order,
/// finite `L`, `M`, `Q` into valuations. Bound variables are renamed apart.
pub fn prepare(f: &Formula, sig: &Signature) -> Result<Formula> {
    f.check_sorts()?;
    sig.check(f)?;
    let g = to_two_sorted(&l_to_order(f)?)?;
    Ok(g.alpha_rename())
}

fn check_blocks(f: &Formula, limit: usize) -> Result<()> {
    fn go(f: &Formula, limit: usize, run: usize, kind: u8) -> Result<()> {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => Ok(()),
            Formula::Not(g) => go(g, limit, 0, 0),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| go(g, limit, 0, 0)),
            Formula::Implies(a, b) => {
                go(a, limit, 0, 0)?;
                go(b, limit, 0, 0)
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => {
                let k = if matches!(f, Formula::Exists(..)) { 1 } else { 2 };
                let run = if k == kind { run + 1 } else { 1 };
                if run > limit {
                    return Err(Error::BlockTooLarge { found: run, limit });
                }
                go(g, limit, run, k)
            }
        }
    }
    go(f, limit, 0, 0)
}

/// Quantifier-free equivalent of `f` over ℚ.
pub fn eliminate(f: &Formula, sig: &Signature, max_block: usize) -> Result<Formula> {
    let g = prepare(f, sig)?;
    check_blocks(&g, max_block)?;
    eliminate_prepared(&g)
}

fn eliminate_prepared(f: &Formula) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(eliminate_prepared(g)?).simplify(),
        Formula::And(gs) => Formula::and(gs.iter().map(eliminate_prepared).collect::<Result<_>>()?).simplify(),
        Formula::Or(gs) => Formula::or(gs.iter().map(eliminate_prepared).collect::<Result<_>>()?).simplify(),
        Formula::Implies(a, b) => Formula::implies(eliminate_prepared(a)?, eliminate_prepared(b)?).simplify(),
        Formula::Exists(v, g) => exists(v, &eliminate_prepared(g)?)?,
        Formula::Forall(v, g) => {
            let inner = Formula::not(eliminate_prepared(g)?);
            Formula::not(exists(v, &inner)?).simplify()
        }
    })
}

/// `∃v. body` for quantifier-free `body`.
pub fn exists(v: &Var, body: &Formula) -> Result<Formula> {
    match v.sort {
        Sort::Val => exists_val(body, &v.name),
        Sort::Vec => Ok(real::tighten(&exists_vec(&v.name, &body.nnf())?)),
    }
}

/// `∃x. f` for `f` in negation normal form. The quantifier is pushed through
/// disjunctions and past conjuncts without `x` before expanding into DNF.
fn exists_vec(x: &str, f: &Formula) -> Result<Formula> {
    let mentions = |g: &Formula| g.free_vars().contains_key(x);
    match f {
        _ if !mentions(f) => Ok(f.clone()),
        Formula::Or(gs) => {
            let mut out = Vec::new();
            for g in gs {
                let part = exists_vec(x, g)?;
                if part == Formula::True {
                    return Ok(Formula::True);
                }
                out.push(part);
            }
            Ok(Formula::or(out).simplify())
        }
        Formula::And(gs) if gs.iter().any(|g| !mentions(g)) => {
            let (bound, mut free): (Vec<Formula>, Vec<Formula>) = gs.iter().cloned().partition(|g| mentions(g));
            free.push(exists_vec(x, &Formula::and(bound))?);
            Ok(Formula::and(free).simplify())
        }
        _ => {
            // disjuncts sharing their literals on x share one elimination
            let mut groups: BTreeMap<Vec<Lit>, Vec<Formula>> = BTreeMap::new();
            for (free, bound) in x_dnf(f, x) {
                groups.entry(bound).or_default().push(Formula::and(free));
            }
            let mut out = Vec::new();
            for (bound, frees) in groups {
                let part = Formula::and(vec![exists_vec_conj(&bound, x)?, Formula::or(frees)]).simplify();
                if part == Formula::True {
                    return Ok(Formula::True);
                }
                out.push(part);
            }
            Ok(Formula::or(out).simplify())
        }
    }
}

/// Disjunctive form of the NNF formula `f` in which subformulas without `x`
/// stay intact: a list of (conjuncts without `x`, literals with `x`).
fn x_dnf(f: &Formula, x: &str) -> Vec<(Vec<Formula>, Vec<Lit>)> {
    if !f.free_vars().contains_key(x) {
        return match f {
            Formula::True => vec![(vec![], vec![])],
            Formula::False => vec![],
            _ => vec![(vec![f.clone()], vec![])],
        };
    }
    match f {
        Formula::Or(gs) => gs.iter().flat_map(|g| x_dnf(g, x)).collect(),
        Formula::And(gs) => {
            let mut acc: Vec<(Vec<Formula>, Vec<Lit>)> = vec![(vec![], vec![])];
            for g in gs {
                let d = x_dnf(g, x);
                let mut next = Vec::new();
                for (af, al) in &acc {
                    for (bf, bl) in &d {
                        let mut lits = al.clone();
                        lits.extend(bl.iter().cloned());
                        if let Some(lits) = tidy_conj(lits) {
                            let mut free = af.clone();
                            free.extend(bf.iter().cloned());
                            next.push((free, lits));
                        }
                    }
                }
                acc = next;
            }
            acc
        }
        _ => dnf_of_nnf(f).into_iter().map(|c| (vec![], c)).collect(),
    }
}

/// The literals of a conjunction mentioning `x`, sorted by where they
/// constrain it.
#[derive(Default)]
struct Buckets {
    free: Vec<Lit>,
    real: Vec<LinIneq>,
    finite: BTreeMap<u64, Vec<Lit>>,
}

fn bucket(conj: &[Lit], x: &str) -> Result<Buckets> {
    let mut b = Buckets::default();
    for l in conj {
        if !l.atom.mentions_vec(x) {
            b.free.push(l.clone());
            continue;
        }
        if let Some(ineq) = LinIneq::from_lit(l) {
            b.real.push(ineq);
            continue;
        }
        let places = padic::places_of(l, x);
        match places.len() {
            1 => b.finite.entry(*places.iter().next().expect("one")).or_default().push(l.clone()),
            _ => return Err(Error::Unsupported(format!("{} uses {} at several places", l.atom, x))),
        }
    }
    Ok(b)
}

fn subst_conj(conj: &[Lit], x: &str, t: &VecTerm) -> Formula {
    let parts = conj.iter().map(|l| Lit { pos: l.pos, atom: l.atom.subst_vec(x, t) }.to_formula()).collect();
    Formula::and(parts).simplify()
}

/// Points that a solution may be forced onto: the p-adic centers and the
/// closed lower bounds at the real place.
fn roots(b: &Buckets, x: &str) -> Result<Vec<VecTerm>> {
    let mut out: Vec<VecTerm> = Vec::new();
    for (p, lits) in &b.finite {
        for c in padic::centers(lits, x, *p)? {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    for c in real::closed_lower_bounds(&b.real, x) {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// `∃x. ⋀ conj`.
pub fn exists_vec_conj(conj: &[Lit], x: &str) -> Result<Formula> {
    if let Some(eq) = conj.iter().find(|l| l.pos && matches!(&l.atom, Atom::VecEq(t) if t.contains(x))) {
        let Atom::VecEq(t) = &eq.atom else { unreachable!() };
        let value = t.solve_for(x).expect("x occurs");
        return Ok(subst_conj(conj, x, &value));
    }
    let b = bucket(conj, x)?;
    if b.real.is_empty() && b.finite.is_empty() {
        return Ok(Formula::from_lits(conj).simplify());
    }
    // Centers that coincide for some values of the parameters: either all of
    // them stay apart, or one pair meets and a parameter is solved for.
    let mut apart = Vec::new();
    let mut finite = BTreeSet::new();
    for (p, lits) in &b.finite {
        let cs = padic::centers(lits, x, *p)?;
        for i in 0..cs.len() {
            for j in 0..i {
                let d = cs[i].sub(&cs[j]);
                if !d.is_constant() {
                    finite.extend(ValTerm::v(*p, &d).comps().keys().cloned());
                    let eq = Atom::vec_eq(d);
                    if !apart.contains(&eq) {
                        apart.push(eq);
                    }
                }
            }
        }
    }
    if !apart.is_empty() {
        let mut cases = Vec::new();
        for eq in &apart {
            let Atom::VecEq(d) = eq else { unreachable!() };
            let u = d.vars().next().expect("non-constant").clone();
            let value = d.solve_for(&u).expect("u occurs");
            let pinned: Vec<Lit> =
                conj.iter().map(|l| Lit { pos: l.pos, atom: l.atom.subst_vec(&u, &value) }).collect();
            cases.push(Formula::and(vec![Formula::atom(eq.clone()), exists_vec_conj(&pinned, x)?]));
        }
        let mut parts: Vec<Formula> = apart.iter().map(|eq| Formula::not(Formula::atom(eq.clone()))).collect();
        parts.push(exists_vec_apart(conj, x, &b, &finite)?);
        cases.push(Formula::and(parts));
        return Ok(Formula::or(cases).simplify());
    }
    exists_vec_apart(conj, x, &b, &finite)
}

/// `∃x. ⋀ conj` when the distances between centers in `finite` are known
/// to be finite.
fn exists_vec_apart(conj: &[Lit], x: &str, b: &Buckets, finite: &BTreeSet<Comp>) -> Result<Formula> {
    let bound: Vec<Lit> = conj.iter().filter(|l| l.atom.mentions_vec(x)).cloned().collect();
    let mut cases: Vec<Formula> = roots(b, x)?.iter().map(|r| subst_conj(&bound, x, r)).collect();
    let mut generic = vec![real::eliminate_generic(&b.real, x)];
    for (p, lits) in &b.finite {
        let (sys, residual) = padic::normalize_to_centers(lits, x, *p)?;
        generic.push(padic::eliminate_generic_given(&sys, &residual, finite)?);
    }
    cases.push(Formula::and(generic));
    let mut parts = vec![Formula::or(cases)];
    parts.extend(b.free.iter().map(Lit::to_formula));
    Ok(Formula::and(parts).simplify())
}

/// Truth value of a sentence.
pub fn decide(f: &Formula, sig: &Signature, max_block: usize) -> Result<bool> {
    sig.check(f)?;
    if let Some(v) = f.free_vars().keys().next() {
        return Err(Error::Precondition(format!("decide needs a sentence, {} is free", v)));
    }
    let g = eliminate(f, sig, max_block)?;
    match g {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        other => eval_qf(&other, &Assignment::new()),
    }
}

/// Values for the leading existential variables of a true sentence, checked
/// against the matrix.
pub fn witness(f: &Formula, sig: &Signature, max_block: usize) -> Result<Assignment> {
    sig.check(f)?;
    if let Some(v) = f.free_vars().keys().next() {
        return Err(Error::Precondition(format!("witness needs a sentence, {} is free", v)));
    }
    let g = prepare(f, sig)?;
    check_blocks(&g, max_block)?;
    let mut vars = Vec::new();
    let mut body = &g;
    while let Formula::Exists(v, inner) = body {
        vars.push(v.clone());
        body = inner;
    }
    let mut rest = body.clone();
    let mut out = Assignment::new();
    for (i, v) in vars.iter().enumerate() {
        let mut inner = rest.clone();
        for w in vars[i + 1..].iter().rev() {
            inner = Formula::exists(w.clone(), inner);
        }
        let psi = eliminate_prepared(&inner)?;
        match v.sort {
            Sort::Vec => {
                let value = witness_vec(&psi, &v.name)?;
                rest = rest.substitute(v, &crate::ast::Term::Vec(VecTerm::constant(value.clone())))?;
                out = out.with_vec(&v.name, value);
            }
            Sort::Val => {
                let value = witness_val(&psi, &v.name)?;
                let term = match value {
                    ValInt::Inf => ValTerm::infinity(),
                    ValInt::Fin(k) => ValTerm::int(k),
                };
                rest = rest.substitute(v, &crate::ast::Term::Val(term))?;
                out = out.with_val(&v.name, value);
            }
        }
    }
    let rest = eliminate_prepared(&rest)?;
    if eval_qf(&rest, &Assignment::new())? {
        Ok(out)
    } else {
        Err(Error::Internal("the witness does not satisfy the matrix".into()))
    }
}

/// A value for `g` making the quantifier-free `f` (with no other free
/// variable) true.
pub fn witness_val(f: &Formula, g: &str) -> Result<ValInt> {
    let holds = |v: ValInt| eval_qf(f, &Assignment::new().with_val(g, v));
    if holds(ValInt::Inf)? {
        return Ok(ValInt::Inf);
    }
    let mut reach: i64 = 1;
    let mut modulus: i64 = 1;
    f.visit_atoms(&mut |a| {
        if let Atom::Div(n, _) = a {
            modulus = modulus.lcm(&(*n as i64));
        }
        for s in a.val_terms() {
            reach += s.constant_part().abs();
        }
    });
    let w = reach + modulus;
    for k in 0..=2 * w {
        let v = if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 };
        if holds(ValInt::Fin(v))? {
            return Ok(ValInt::Fin(v));
        }
    }
    Err(Error::NoWitness(format!("no value for {}", g)))
}

/// A rational `x` making the quantifier-free `f` (with no other free
/// variable) true.
pub fn witness_vec(f: &Formula, x: &str) -> Result<Rat> {
    for conj in dnf_of_nnf(&f.nnf()) {
        if let Some(v) = witness_conj(&conj, x)? {
            return Ok(v);
        }
    }
    Err(Error::NoWitness(format!("no value for {}", x)))
}

fn constant_of(t: &VecTerm) -> Result<Rat> {
    t.as_constant().cloned().ok_or_else(|| Error::Precondition(format!("{} is not ground", t)))
}

fn witness_conj(conj: &[Lit], x: &str) -> Result<Option<Rat>> {
    let Some(conj) = tidy_conj(conj.to_vec()) else { return Ok(None) };
    let f = Formula::from_lits(&conj);
    let holds = |v: &Rat| eval_qf(&f, &Assignment::new().with_vec(x, v.clone()));
    if let Some(Lit { atom: Atom::VecEq(t), .. }) = conj.iter().find(|l| l.pos && matches!(&l.atom, Atom::VecEq(t) if t.contains(x))) {
        let v = constant_of(&t.solve_for(x).expect("x occurs"))?;
        return Ok(if holds(&v)? { Some(v) } else { None });
    }
    let b = bucket(&conj, x)?;
    if !b.free.iter().all(|l| l.eval_ground() == Some(true)) {
        return Ok(None);
    }
    for r in roots(&b, x)? {
        let v = constant_of(&r)?;
        if holds(&v)? {
            return Ok(Some(v));
        }
    }
    let iv = real::interval(&b.real, x)?;
    let Some((lo, hi)) = iv.open_part() else { return Ok(None) };
    let mut targets = Vec::new();
    for (p, lits) in &b.finite {
        match padic::generic_point(lits, x, *p)? {
            Some((point, top)) => targets.push((*p, point, top + 1)),
            None => return Ok(None),
        }
    }
    approximate(&targets, lo.as_ref(), hi.as_ref(), &|v| holds(v).unwrap_or(false)).map(Some)
}

/// A rational within `p^n` of each target `(p, point, n)` and inside the open
/// interval `(lo, hi)` that also satisfies `accept`.
pub fn approximate(targets: &[(u64, Rat, i64)], lo: Option<&Rat>, hi: Option<&Rat>, accept: &dyn Fn(&Rat) -> bool) -> Result<Rat> {
    // y = z/D + (M/D)·t with v_p(t) ≥ 0 at every target place
    let mut d = BigInt::one();
    let mut z = BigInt::zero();
    let mut m = BigInt::one();
    let mut shifts = Vec::new();
    for (p, point, _) in targets {
        let s = match vp_unchecked(point, *p) {
            ValInt::Fin(v) if v < 0 => -v,
            _ => 0,
        };
        shifts.push(s);
        d *= BigInt::from(*p).pow(s as u32);
    }
    for ((p, point, n), s) in targets.iter().zip(&shifts) {
        let modulus = BigInt::from(*p).pow((*n.max(&1) + s) as u32);
        let target = (point * &Rat::from_bigint(d.clone())).residue_mod(&modulus)?;
        // z ≡ target mod modulus, keeping the earlier congruences mod m
        let inv = crate::rational::mod_inverse(&m.mod_floor(&modulus), &modulus).expect("coprime moduli");
        let k = ((&target - &z) * inv).mod_floor(&modulus);
        z += &m * k;
        m *= &modulus;
    }
    let base = Rat::from_bigints(z, d.clone())?;
    let scale = Rat::from_bigints(m, d)?;
    let used: BTreeSet<u64> = targets.iter().map(|t| t.0).collect();
    let q = (2u64..).find(|q| is_prime(*q) && !used.contains(q)).expect("infinitely many primes");
    let to_t = |y: &Rat| (y - &base) * scale.recip().expect("nonzero");
    let (tlo, thi) = (lo.map(to_t), hi.map(to_t));
    let mut denom = Rat::one();
    for _ in 0..64 {
        let candidates: Vec<Rat> = match (&tlo, &thi) {
            (None, None) => (0..32).map(|k| Rat::from_int(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 })).collect(),
            (Some(l), None) => (1..33).map(|k| Rat::from_bigint(l.floor()) + Rat::from_int(k)).collect(),
            (None, Some(h)) => (1..33).map(|k| Rat::from_bigint(h.ceil()) - Rat::from_int(k)).collect(),
            (Some(l), Some(h)) => {
                let (a, b): (BigInt, BigInt) = ((l * &denom).floor() + 1, (h * &denom).ceil());
                let mut v: Vec<Rat> = Vec::new();
                let mut k = a;
                while k < b && v.len() < 32 {
                    v.push(Rat::from_bigint(k.clone()) * denom.recip().expect("nonzero"));
                    k += 1;
                }
                v
            }
        };
        for t in candidates {
            let y = &base + &(&scale * &t);
            if accept(&y) {
                return Ok(y);
            }
        }
        denom = denom * Rat::from_int(q as i64);
    }
    Err(Error::Internal("approximation search exhausted".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn places(ps: &[&str]) -> Signature {
        Signature::full(ps.iter().map(|p| p.parse().unwrap()).collect())
    }

    fn decide_in(text: &str, ps: &[&str]) -> Result<bool> {
        let sig = places(ps);
        decide(&parse(text, Some(&sig.s0)).unwrap(), &sig, DEFAULT_MAX_BLOCK)
    }

    fn witness_in(text: &str, ps: &[&str]) -> Assignment {
        let sig = places(ps);
        witness(&parse(text, Some(&sig.s0)).unwrap(), &sig, DEFAULT_MAX_BLOCK).unwrap()
    }

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn crt_instance() {
        let text = "E y:vec. v[2](y - 1) >= 3 & v[3](y) >= 2";
        assert!(decide_in(text, &["2", "3"]).unwrap());
        assert_eq!(witness_in(text, &["2", "3"]).vecs["y"], Rat::from_int(9));
    }

    #[test]
    fn real_and_dyadic() {
        let text = "E y:vec. L[inf](y - 1/2, 1/4) & v[2](y) = 1";
        assert!(decide_in(text, &["2", "inf"]).unwrap());
        let w = witness_in(text, &["2", "inf"]);
        let y = &w.vecs["y"];
        assert_eq!(vp_unchecked(y, 2), ValInt::Fin(1));
        assert!((y - &rat("1/2")).abs() <= rat("1/4"));
    }

    #[test]
    fn single_place_spheres() {
        assert!(!decide_in("E y:vec. v[2](y) = 0 & v[2](y - 1) = 0", &["2"]).unwrap());
        assert!(decide_in("E x:vec. v[3](x) = 0 & v[3](x - 1) = 0", &["3"]).unwrap());
    }

    #[test]
    fn sentences() {
        assert!(decide_in("A x:vec. A y:vec. L[2](x + y, x) | L[2](x + y, y)", &["2"]).unwrap());
        assert!(decide_in("E x:vec. !(x = 0) & L[2](2*x, x) & !L[2](x, 2*x)", &["2"]).unwrap());
        assert!(!decide_in("A x:vec. L[3](x, 1)", &["3"]).unwrap());
        assert!(decide_in("A x:vec. E y:vec. v[5](y) = v[5](x) + 1", &["5"]).unwrap());
        assert!(decide_in("A x:vec. x < 0 | 0 <= x", &["inf"]).unwrap());
        assert!(!decide_in("E x:vec. x < 0 & 0 < x", &["inf"]).unwrap());
    }

    #[test]
    fn witnesses() {
        assert_eq!(witness_in("E y:vec. y > 0 & v[2](y) >= 1", &["2", "inf"]).vecs["y"], Rat::from_int(2));
        let w = witness_in("E y:vec. v[2](y) = -1 & v[3](y) = 1", &["2", "3"]);
        let y = &w.vecs["y"];
        assert_eq!((vp_unchecked(y, 2), vp_unchecked(y, 3)), (ValInt::Fin(-1), ValInt::Fin(1)));
    }

    #[test]
    fn refusals() {
        assert!(matches!(decide_in("M[inf](1, 1, 1)", &["inf"]), Err(Error::Unsupported(_))));
        let f = parse("E x:vec. L[3](x, 1)", None).unwrap();
        assert!(matches!(decide(&f, &places(&["2"]), 6), Err(Error::Signature(_))));
        let f = parse("E x:vec. x < 1", None).unwrap();
        assert!(matches!(decide(&f, &places(&["2"]), 6), Err(Error::Signature(_))));
        let sig = Signature::new([Place::Finite(2)].into_iter().collect(), BTreeSet::new()).unwrap();
        let f = parse("E x:vec. M[2](x, x, 1)", None).unwrap();
        assert!(matches!(decide(&f, &sig, 6), Err(Error::Signature(_))));
        let f = parse("E a:vec. E b:vec. E c:vec. v[2](a + b + c) = 0", None).unwrap();
        assert!(matches!(decide(&f, &places(&["2"]), 2), Err(Error::BlockTooLarge { found: 3, limit: 2 })));
        assert!(Signature::new([Place::Inf].into_iter().collect(), [2].into_iter().collect()).is_err());
    }

    #[test]
    fn approximation_meets_every_target() {
        let targets = [(2, rat("1/4"), 5), (3, rat("7"), 3), (5, rat("-2/25"), 1)];
        let y = approximate(&targets, Some(&rat("10")), Some(&rat("21/2")), &|_| true).unwrap();
        for (p, t, n) in &targets {
            assert!(vp_unchecked(&(&y - t), *p) >= ValInt::Fin(*n), "{} {}", p, y);
        }
        assert!(y > rat("10") && y < rat("21/2"));
    }
}
