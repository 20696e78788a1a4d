//! Exact evaluation over ℚ, bounded witness search, and seeded differential
//! comparison of formulas.
//!
//! Nothing here calls the elimination code; it is the independent side of
//! every differential test.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{surface_l, surface_m, surface_q, Atom, Comp, Formula, Place, Sort, ValTerm, Var, VecTerm};
use crate::error::{Error, Result};
use crate::rational::{vp_unchecked, Rat, ValInt};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub vecs: BTreeMap<String, Rat>,
    pub vals: BTreeMap<String, ValInt>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn with_vec(mut self, name: &str, v: Rat) -> Assignment {
        self.vecs.insert(name.to_string(), v);
        self
    }

    pub fn with_val(mut self, name: &str, v: ValInt) -> Assignment {
        self.vals.insert(name.to_string(), v);
        self
    }

    /// Parses `"x=3/4,y=2,g=oo"`. Names listed in `sorts` as value
    /// variables take integers or `oo`; all others take rationals.
    pub fn parse(text: &str, sorts: &BTreeMap<String, Sort>) -> Result<Assignment> {
        let mut a = Assignment::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Precondition(format!("assignment {:?} is not of the form name=value", part)))?;
            let (name, value) = (name.trim(), value.trim());
            match sorts.get(name) {
                Some(Sort::Val) => {
                    let v = if value == "oo" {
                        ValInt::Inf
                    } else {
                        ValInt::Fin(value.parse().map_err(|_| Error::Precondition(format!("bad value {:?} for {}", value, name)))?)
                    };
                    a.vals.insert(name.to_string(), v);
                }
                _ => {
                    a.vecs.insert(name.to_string(), value.parse()?);
                }
            }
        }
        Ok(a)
    }

    fn vec_env(&self) -> impl Fn(&str) -> Option<Rat> + '_ {
        move |n| self.vecs.get(n).cloned()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (k, v) in &self.vecs {
            m.insert(k.clone(), serde_json::Value::String(v.to_string()));
        }
        for (k, v) in &self.vals {
            m.insert(k.clone(), serde_json::Value::String(v.to_string()));
        }
        serde_json::Value::Object(m)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .vecs
            .iter()
            .map(|(k, v)| format!("{}={}", k, v))
            .chain(self.vals.iter().map(|(k, v)| format!("{}={}", k, v)))
            .collect();
        f.write_str(&parts.join(","))
    }
}

fn comp_value(c: &Comp, a: &Assignment) -> Result<ValInt> {
    match c {
        Comp::Var(n) => a.vals.get(n).copied().ok_or_else(|| Error::MissingAssignment(n.clone())),
        Comp::V(p, t) => Ok(vp_unchecked(&t.eval(&a.vec_env())?, *p)),
    }
}

pub fn eval_vec(t: &VecTerm, a: &Assignment) -> Result<Rat> {
    t.eval(&a.vec_env())
}

pub fn eval_val(s: &ValTerm, a: &Assignment) -> Result<ValInt> {
    s.eval(&mut |c| comp_value(c, a))
}

pub fn eval_atom(atom: &Atom, a: &Assignment) -> Result<bool> {
    let v = |t: &VecTerm| eval_vec(t, a);
    let s = |t: &ValTerm| eval_val(t, a);
    Ok(match atom {
        Atom::VecEq(t) => v(t)?.is_zero(),
        Atom::Ord { term, strict } => {
            let x = v(term)?;
            if *strict {
                x.is_positive()
            } else {
                !x.is_negative()
            }
        }
        Atom::ValLe(l, r) => s(l)? <= s(r)?,
        Atom::ValEq(l, r) => s(l)? == s(r)?,
        Atom::Div(n, t) => s(t)?.divisible_by(*n),
        Atom::L(p, x, y) => surface_l(*p, &v(x)?, &v(y)?),
        Atom::M(p, x, y, z) => surface_m(*p, &v(x)?, &v(y)?, &v(z)?),
        Atom::Q(p, n, x) => surface_q(*p, *n, &v(x)?),
    })
}

/// Exact truth value of a quantifier-free formula.
pub fn eval_qf(f: &Formula, a: &Assignment) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(at) => eval_atom(at, a)?,
        Formula::Not(g) => !eval_qf(g, a)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_qf(g, a)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_qf(g, a)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(x, y) => !eval_qf(x, a)? || eval_qf(y, a)?,
        Formula::Exists(..) | Formula::Forall(..) => {
            return Err(Error::Precondition("eval_qf on a quantified formula".into()))
        }
    })
}

/// Shape of the candidate grid used by the bounded search.
#[derive(Clone, Debug)]
pub struct GridConfig {
    /// Plain rationals `a/b` with `|a| ≤ plain_bound`, `1 ≤ b ≤ plain_bound`.
    pub plain_bound: u64,
    /// Levels `m` of the center-shifted points `d + p^m·r` extend this far
    /// around the valuations of center differences, and at least `|m| ≤ log_p N`.
    pub level_margin: i64,
    /// N for the `log_p N` level range.
    pub bound: u64,
    /// Half-width of the integer window searched for value variables.
    pub val_window: i64,
}

impl GridConfig {
    pub fn with_bound(n: u64) -> GridConfig {
        GridConfig { plain_bound: n, level_margin: 3, bound: n, val_window: 6 }
    }

    /// Center-based points only; used for nested quantifiers.
    pub fn centers_only(n: u64) -> GridConfig {
        GridConfig { plain_bound: 2, ..GridConfig::with_bound(n) }
    }
}

fn log_floor(n: u64, p: u64) -> i64 {
    let (mut k, mut acc) = (0, p);
    while acc <= n {
        k += 1;
        acc = acc.saturating_mul(p);
    }
    k
}

/// Vector terms whose roots are critical points for the search.
fn collect_terms(f: &Formula, out: &mut Vec<VecTerm>) {
    f.visit_atoms(&mut |a| {
        for t in a.vec_terms() {
            out.push(t.clone());
        }
        match a {
            Atom::L(_, x, y) => {
                out.push(x.sub(y));
                out.push(x.add(y));
            }
            Atom::M(_, x, y, z) => {
                // |xy| = |z| at the real place has breakpoints outside the
                // linear roots; the extra points below are enough for the
                // desk-scale grids used here.
                out.push(x.sub(y));
                out.push(x.add(y));
                out.push(x.sub(z));
                out.push(y.sub(z));
            }
            _ => {}
        }
        for c in a.comps() {
            if let Comp::V(_, t) = c {
                out.push(t.clone());
            }
        }
    });
}

fn partial_eval(t: &VecTerm, a: &Assignment) -> VecTerm {
    let mut out = VecTerm::constant(t.constant_part().clone());
    for (v, c) in t.coeffs() {
        match a.vecs.get(v) {
            Some(val) => out = out.add_const(&(c * val)),
            None => out = out.add(&VecTerm::monomial(v, c.clone())),
        }
    }
    out
}

/// How far the levels of the center-shifted grid must reach: the largest
/// atom, with its evaluable parts under `a` summed in absolute value, plus the period of the divisibility atoms.
fn value_reach(body: &Formula, a: &Assignment) -> i64 {
    let mut reach = 0;
    let mut modulus: i64 = 1;
    body.visit_atoms(&mut |at| {
        match at {
            Atom::Div(n, _) | Atom::Q(_, n, _) => modulus = num_integer::lcm(modulus, *n as i64),
            _ => {}
        }
        let mut r = 0;
        for s in at.val_terms() {
            r += s.constant_part().abs();
            for (c, k) in s.comps() {
                if let Ok(ValInt::Fin(v)) = comp_value(c, a) {
                    r += (k * v).abs();
                }
            }
        }
        reach = reach.max(r);
    });
    reach + modulus
}

/// Candidate values for vector variable `x` in `body` under `a`.
pub fn vec_candidates(x: &str, body: &Formula, a: &Assignment, cfg: &GridConfig) -> Vec<Rat> {
    let mut terms = Vec::new();
    collect_terms(body, &mut terms);
    let mut roots: BTreeSet<Rat> = BTreeSet::new();
    for t in &terms {
        let u = partial_eval(t, a);
        if u.coeffs().len() == 1 && u.contains(x) {
            roots.insert(u.solve_for(x).expect("contains x").constant_part().clone());
        }
    }
    let mut out = Ordered::default();
    roots.iter().for_each(|r| out.push(r.clone()));
    if roots.is_empty() {
        out.push(Rat::zero());
    }
    // real place: between and beyond the critical points
    let sorted: Vec<&Rat> = roots.iter().collect();
    for w in sorted.windows(2) {
        out.push(&(w[0] + w[1]) * &Rat::new(1, 2).expect("half"));
    }
    if let (Some(lo), Some(hi)) = (sorted.first(), sorted.last()) {
        out.push(*lo - &Rat::one());
        out.push(*hi + &Rat::one());
    }
    // finite places: center-shifted points
    let mut centers = roots.clone();
    centers.insert(Rat::zero());
    let places = body.places();
    let reach = value_reach(body, a);
    for &place in &places {
        let p = match place {
            Place::Finite(p) => p,
            Place::Inf => continue,
        };
        // a coefficient of x shifts the level a term sees
        let scale = terms
            .iter()
            .filter_map(|t| match vp_unchecked(&t.coeff(x), p) {
                ValInt::Fin(e) => Some(e.abs()),
                ValInt::Inf => None,
            })
            .max()
            .unwrap_or(0);
        let k = log_floor(cfg.bound, p).max(reach) + scale;
        let (mut lo, mut hi) = (-k, k);
        let cs: Vec<&Rat> = centers.iter().collect();
        for i in 0..cs.len() {
            for j in 0..i {
                if let ValInt::Fin(d) = vp_unchecked(&(cs[i] - cs[j]), p) {
                    lo = lo.min(d - cfg.level_margin);
                    hi = hi.max(d + cfg.level_margin);
                }
            }
            if let ValInt::Fin(d) = vp_unchecked(cs[i], p) {
                lo = lo.min(d - cfg.level_margin);
                hi = hi.max(d + cfg.level_margin);
            }
        }
        for d in &centers {
            out.push(d.clone());
            for m in lo..=hi {
                let step = Rat::prime_pow(p, m);
                for r in 1..p as i64 {
                    out.push(d + &(&step * &Rat::from_int(r)));
                }
            }
        }
    }
    // without finite places the structured points above already meet every
    // cell of the real line cut out by the roots
    if !places.iter().any(|p| p.is_finite()) {
        return out.items;
    }
    let n = cfg.plain_bound as i64;
    for b in 1..=n {
        for num in -n..=n {
            out.push(Rat::new(num, b).expect("nonzero"));
        }
    }
    out.items
}

/// Insertion-ordered set.
#[derive(Default)]
struct Ordered {
    seen: BTreeSet<Rat>,
    items: Vec<Rat>,
}

impl Ordered {
    fn push(&mut self, r: Rat) {
        if self.seen.insert(r.clone()) {
            self.items.push(r);
        }
    }
}

/// Candidate values for value variable `g`: `∞` and an integer window around
/// every evaluable value term.
pub fn val_candidates(body: &Formula, a: &Assignment, cfg: &GridConfig) -> Vec<ValInt> {
    let mut centers: BTreeSet<i64> = [0].into_iter().collect();
    let mut modulus: i64 = 1;
    body.visit_atoms(&mut |at| {
        if let Atom::Div(n, _) = at {
            modulus = num_integer::lcm(modulus, *n as i64);
        }
        for s in at.val_terms() {
            let mut known = ValTerm::int(s.constant_part());
            let mut ok = true;
            for (c, k) in s.comps() {
                match comp_value(c, a) {
                    Ok(v) => known = known.add(&match v {
                        ValInt::Inf => ValTerm::infinity(),
                        ValInt::Fin(x) => ValTerm::int(x * k),
                    }),
                    Err(_) => {
                        if !matches!(c, Comp::Var(_)) {
                            ok = false;
                        }
                    }
                }
            }
            if ok {
                if let Some(ValInt::Fin(v)) = known.as_ground() {
                    centers.insert(v);
                    centers.insert(-v);
                }
            }
        }
    });
    let w = cfg.val_window + modulus;
    let mut out: BTreeSet<ValInt> = [ValInt::Inf].into_iter().collect();
    for c in centers {
        for d in -w..=w {
            out.insert(ValInt::Fin(c + d));
        }
    }
    out.into_iter().collect()
}

/// Evaluates a possibly quantified formula, replacing each quantifier by a
/// search over the candidate grid. Exact for quantifier-free input.
pub fn eval_bounded(f: &Formula, a: &Assignment, cfg: &GridConfig) -> Result<bool> {
    Bounded { cfg, free: HashMap::new(), memo: HashMap::new() }.eval(f, a)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Slot {
    Vec(Rat),
    Val(ValInt),
    Unset,
}

/// Grid evaluation with quantified subformulas memoized on the values of
/// their free variables.
struct Bounded<'c> {
    cfg: &'c GridConfig,
    free: HashMap<usize, Vec<String>>,
    memo: HashMap<(usize, Vec<Slot>), bool>,
}

impl Bounded<'_> {
    fn eval(&mut self, f: &Formula, a: &Assignment) -> Result<bool> {
        Ok(match f {
            Formula::Exists(..) | Formula::Forall(..) => {
                let id = f as *const Formula as usize;
                let names = self.free.entry(id).or_insert_with(|| f.free_vars().into_keys().collect());
                let key: Vec<Slot> = names
                    .iter()
                    .map(|n| match (a.vecs.get(n), a.vals.get(n)) {
                        (Some(r), _) => Slot::Vec(r.clone()),
                        (None, Some(v)) => Slot::Val(*v),
                        _ => Slot::Unset,
                    })
                    .collect();
                if let Some(&b) = self.memo.get(&(id, key.clone())) {
                    return Ok(b);
                }
                let b = self.quantifier(f, a)?;
                self.memo.insert((id, key), b);
                b
            }
            Formula::Not(g) => !self.eval(g, a)?,
            Formula::And(gs) => {
                for g in gs {
                    if !self.eval(g, a)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.eval(g, a)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(x, y) => !self.eval(x, a)? || self.eval(y, a)?,
            _ => eval_qf(f, a)?,
        })
    }

    fn quantifier(&mut self, f: &Formula, a: &Assignment) -> Result<bool> {
        let (v, g, want) = match f {
            Formula::Exists(v, g) => (v, g, true),
            Formula::Forall(v, g) => (v, g, false),
            _ => unreachable!(),
        };
        let mut b = a.clone();
        match v.sort {
            Sort::Vec => {
                for c in vec_candidates(&v.name, g, a, self.cfg) {
                    b.vecs.insert(v.name.clone(), c);
                    if self.eval(g, &b)? == want {
                        return Ok(want);
                    }
                }
            }
            Sort::Val => {
                for c in val_candidates(g, a, self.cfg) {
                    b.vals.insert(v.name.clone(), c);
                    if self.eval(g, &b)? == want {
                        return Ok(want);
                    }
                }
            }
        }
        Ok(!want)
    }
}

/// Searches the grid for values of `vars` (outermost first) satisfying the
/// quantifier-free `matrix` together with the fixed assignment `base`.
pub fn search_witness_from(matrix: &Formula, vars: &[Var], base: &Assignment, cfg: &GridConfig) -> Result<Option<Assignment>> {
    if vars.is_empty() {
        return Ok(if eval_qf(matrix, base)? { Some(base.clone()) } else { None });
    }
    let v = &vars[0];
    let mut b = base.clone();
    match v.sort {
        Sort::Vec => {
            for c in vec_candidates(&v.name, matrix, base, cfg) {
                b.vecs.insert(v.name.clone(), c);
                if let Some(w) = search_witness_from(matrix, &vars[1..], &b, cfg)? {
                    return Ok(Some(w));
                }
            }
        }
        Sort::Val => {
            for c in val_candidates(matrix, base, cfg) {
                b.vals.insert(v.name.clone(), c);
                if let Some(w) = search_witness_from(matrix, &vars[1..], &b, cfg)? {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

/// Bounded witness search with the default grid for bound `n`.
pub fn search_witness(matrix: &Formula, vars: &[Var], n: u64) -> Result<Option<Assignment>> {
    search_witness_from(matrix, vars, &Assignment::new(), &GridConfig::with_bound(n))
}

/// Seeded sampler of rational and value assignments.
pub struct Sampler {
    rng: ChaCha8Rng,
    primes: Vec<u64>,
    specials: Vec<Rat>,
}

impl Sampler {
    /// `specials` are values worth hitting often (centers of the formula).
    pub fn new(seed: u64, places: &BTreeSet<Place>, specials: Vec<Rat>) -> Sampler {
        let mut primes: Vec<u64> = places.iter().filter_map(|p| p.prime()).collect();
        if primes.is_empty() {
            primes.push(2);
        }
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), primes, specials }
    }

    /// Distribution: 1/8 zero, 1/8 ±1, 1/4 ±p^k (|k| ≤ 4), 1/8 a center,
    /// 1/8 a small integer, 1/4 a random a/b with |a| ≤ 30, 1 ≤ b ≤ 30,
    /// and ±p^k·(a/b) for the rest.
    pub fn rat(&mut self) -> Rat {
        let r = &mut self.rng;
        let sign = if r.gen_bool(0.5) { Rat::one() } else { -Rat::one() };
        let p = self.primes[r.gen_range(0..self.primes.len())];
        match r.gen_range(0..16) {
            0 | 1 => Rat::zero(),
            2 | 3 => sign,
            4..=7 => &sign * &Rat::prime_pow(p, r.gen_range(-4..=4)),
            8 | 9 if !self.specials.is_empty() => self.specials[r.gen_range(0..self.specials.len())].clone(),
            8..=9 => Rat::from_int(r.gen_range(-6..=6)),
            10 | 11 => Rat::from_int(r.gen_range(-6..=6)),
            12..=14 => Rat::new(r.gen_range(-30..=30), r.gen_range(1..=30)).expect("nonzero"),
            _ => {
                let base = Rat::new(r.gen_range(-9..=9), r.gen_range(1..=9)).expect("nonzero");
                &base * &Rat::prime_pow(p, r.gen_range(-3..=3))
            }
        }
    }

    /// 1/6 `∞`, otherwise an integer in [-5, 5].
    pub fn val(&mut self) -> ValInt {
        if self.rng.gen_range(0..6) == 0 {
            ValInt::Inf
        } else {
            ValInt::Fin(self.rng.gen_range(-5..=5))
        }
    }

    pub fn assignment(&mut self, vars: &BTreeMap<String, Sort>) -> Assignment {
        let mut a = Assignment::new();
        for (name, sort) in vars {
            match sort {
                Sort::Vec => {
                    let v = self.rat();
                    a.vecs.insert(name.clone(), v);
                }
                Sort::Val => {
                    let v = self.val();
                    a.vals.insert(name.clone(), v);
                }
            }
        }
        a
    }
}

/// Constant centers of a formula: roots of its single-variable terms.
pub fn constant_centers(f: &Formula) -> Vec<Rat> {
    let mut terms = Vec::new();
    collect_terms(f, &mut terms);
    let mut out = BTreeSet::new();
    for t in terms {
        if t.coeffs().len() == 1 {
            let x = t.vars().next().unwrap().clone();
            out.insert(t.solve_for(&x).unwrap().constant_part().clone());
        } else if let Some(c) = t.as_constant() {
            out.insert(c.clone());
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivReport {
    pub samples: usize,
    pub counterexample: Option<Assignment>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Compares `f` and `g` on seeded samples of their free variables.
/// Quantifiers are evaluated by [`eval_bounded`] with `cfg`.
pub fn check_equiv_sampled_with(f: &Formula, g: &Formula, samples: usize, seed: u64, cfg: &GridConfig) -> Result<EquivReport> {
    let mut vars = f.free_vars();
    vars.extend(g.free_vars());
    let mut places = f.places();
    places.extend(g.places());
    let mut specials = constant_centers(f);
    specials.extend(constant_centers(g));
    let mut sampler = Sampler::new(seed, &places, specials);
    for i in 0..samples {
        let a = sampler.assignment(&vars);
        if eval_bounded(f, &a, cfg)? != eval_bounded(g, &a, cfg)? {
            return Ok(EquivReport { samples: i + 1, counterexample: Some(a) });
        }
    }
    Ok(EquivReport { samples, counterexample: None })
}

pub fn check_equiv_sampled(f: &Formula, g: &Formula, samples: usize, seed: u64) -> Result<EquivReport> {
    check_equiv_sampled_with(f, g, samples, seed, &GridConfig::with_bound(50))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn p(s: &str) -> Formula {
        parse(s, None).unwrap()
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn ground_examples() {
        let a = Assignment::new();
        assert!(eval_qf(&p("L[2](4, 2)"), &a).unwrap());
        assert!(eval_qf(&p("M[inf](2, 3, -6)"), &a).unwrap());
        assert!(eval_qf(&p("Q[3,2](9)"), &a).unwrap());
        assert!(!eval_qf(&p("Q[3,2](3)"), &a).unwrap());
        assert!(eval_qf(&p("P[3](v[2](8))"), &a).unwrap());
        assert!(eval_qf(&p("P[2](4)"), &a).unwrap());
        assert!(!eval_qf(&p("3 <= 2 + v[5](1)"), &a).unwrap());
    }

    #[test]
    fn missing_assignment_is_an_error() {
        assert!(matches!(eval_qf(&p("L[2](x, 1)"), &Assignment::new()), Err(Error::MissingAssignment(_))));
    }

    #[test]
    fn assignment_parsing() {
        let f = p("g <= v[2](x)");
        let a = Assignment::parse("x=3/4, g=oo", &f.free_vars()).unwrap();
        assert_eq!(a.vecs["x"], r("3/4"));
        assert_eq!(a.vals["g"], ValInt::Inf);
        assert!(!eval_qf(&f, &a).unwrap());
        assert!(Assignment::parse("x", &f.free_vars()).is_err());
    }

    #[test]
    fn witness_search_examples() {
        let x = [Var::vec("x")];
        let w = search_witness(&p("v[3](x) = 0 & v[3](x - 1) = 0"), &x, 10).unwrap().unwrap();
        assert!(eval_qf(&p("v[3](x) = 0 & v[3](x - 1) = 0"), &w).unwrap());
        assert!(search_witness(&p("v[2](x) = 0 & v[2](x - 1) = 0"), &x, 50).unwrap().is_none());
        let w = search_witness(&p("3 < x & x < 4"), &x, 10).unwrap().unwrap();
        assert_eq!(w.vecs["x"], r("7/2"));
    }

    #[test]
    fn search_is_monotone_in_bound() {
        let f = p("3 <= v[2](x - 1) & 2 <= v[3](x)");
        let x = [Var::vec("x")];
        for n in [2, 5, 10, 50] {
            assert!(search_witness(&f, &x, n).unwrap().is_some());
        }
    }

    #[test]
    fn equivalence_checker_finds_mutation() {
        let f = p("L[2](x, y)");
        let g = p("v[2](y) <= v[2](x)");
        assert!(check_equiv_sampled(&f, &g, 200, 7).unwrap().passed());
        let bad = p("L[2](y, x)");
        let rep = check_equiv_sampled(&bad, &g, 200, 7).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn bounded_quantifiers() {
        let cfg = GridConfig::with_bound(10);
        assert!(eval_bounded(&p("E x:vec. v[3](x) = 0 & v[3](x - 1) = 0"), &Assignment::new(), &cfg).unwrap());
        assert!(!eval_bounded(&p("E x:vec. v[2](x) = 0 & v[2](x - 1) = 0"), &Assignment::new(), &cfg).unwrap());
        assert!(eval_bounded(&p("A x:vec. A y:vec. L[2](x + y, x) | L[2](x + y, y)"), &Assignment::new(), &cfg).unwrap());
        assert!(eval_bounded(&p("E g:val. P[2](g) & 3 <= g & g <= 4"), &Assignment::new(), &cfg).unwrap());
    }

    #[test]
    fn sampler_is_deterministic() {
        let places: BTreeSet<Place> = [Place::Finite(2), Place::Finite(3)].into_iter().collect();
        let vars: BTreeMap<String, Sort> = [("x".to_string(), Sort::Vec), ("g".to_string(), Sort::Val)].into_iter().collect();
        let mut s1 = Sampler::new(11, &places, vec![]);
        let mut s2 = Sampler::new(11, &places, vec![]);
        for _ in 0..50 {
            assert_eq!(s1.assignment(&vars), s2.assignment(&vars));
        }
    }
}
