//! Terms and formulas of the two-sorted valued-vector-space language and the
//! one-sorted surface languages (`L`, `M`, `Q` per place, plus the order of
//! the real place).
//!
//! Terms are kept canonical at all times: zero coefficients are dropped and
//! every `v_p(t)` is stored with `t` scaled to have leading coefficient one,
//! the scaling factor being folded into the integer constant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{abs_le_inf, is_abs_nth_power, is_prime, vp_unchecked, Rat, ValInt};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Place {
    /// The place of a prime `p`; uniformizer `p`, residue field of size `p`.
    Finite(u64),
    /// The real absolute value.
    Inf,
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(Error::InvalidPlace(p.to_string()))
        }
    }

    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Inf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Place::Finite(_))
    }

    pub fn uniformizer(self) -> Option<Rat> {
        self.prime().map(|p| Rat::from_int(p as i64))
    }

    pub fn residue_cardinality(self) -> Option<u64> {
        self.prime()
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{}", p),
            Place::Inf => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Place::Inf);
        }
        let p: u64 = s.parse().map_err(|_| Error::InvalidPlace(s.to_string()))?;
        Place::finite(p)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    Vec,
    Val,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Vec => "vec",
            Sort::Val => "val",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn vec(name: &str) -> Var {
        Var { name: name.to_string(), sort: Sort::Vec }
    }

    pub fn val(name: &str) -> Var {
        Var { name: name.to_string(), sort: Sort::Val }
    }
}

/// An affine ℚ-linear combination of vector-sort variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VecTerm {
    coeffs: BTreeMap<String, Rat>,
    constant: Rat,
}

impl VecTerm {
    pub fn zero() -> VecTerm {
        VecTerm::default()
    }

    pub fn constant(c: Rat) -> VecTerm {
        VecTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn int(c: i64) -> VecTerm {
        VecTerm::constant(Rat::from_int(c))
    }

    pub fn var(name: &str) -> VecTerm {
        VecTerm::monomial(name, Rat::one())
    }

    pub fn monomial(name: &str, c: Rat) -> VecTerm {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(name.to_string(), c);
        }
        VecTerm { coeffs, constant: Rat::zero() }
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (String, Rat)>, constant: Rat) -> VecTerm {
        let mut t = VecTerm::constant(constant);
        for (v, c) in coeffs {
            t.add_monomial(&v, &c);
        }
        t
    }

    fn add_monomial(&mut self, name: &str, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(name.to_string()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(name);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rat> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn coeff(&self, name: &str) -> Rat {
        self.coeffs.get(name).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.coeffs.contains_key(name)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn as_constant(&self) -> Option<&Rat> {
        if self.is_constant() {
            Some(&self.constant)
        } else {
            None
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn add(&self, other: &VecTerm) -> VecTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_monomial(v, c);
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &VecTerm) -> VecTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VecTerm {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, c: &Rat) -> VecTerm {
        if c.is_zero() {
            return VecTerm::zero();
        }
        VecTerm {
            coeffs: self.coeffs.iter().map(|(v, k)| (v.clone(), k * c)).collect(),
            constant: &self.constant * c,
        }
    }

    pub fn add_const(&self, c: &Rat) -> VecTerm {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// `self[name := t]`.
    pub fn substitute(&self, name: &str, t: &VecTerm) -> VecTerm {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(name);
                rest.add(&t.scale(c))
            }
        }
    }

    /// The coefficient that [`VecTerm::monic`] divides by: the coefficient of
    /// the first variable, or the constant for a constant term.
    pub fn leading(&self) -> &Rat {
        self.coeffs.values().next().unwrap_or(&self.constant)
    }

    /// Splits `self` as `lead · monic` with the leading coefficient of `monic`
    /// equal to one. Returns `None` for the zero term.
    pub fn monic(&self) -> Option<(Rat, VecTerm)> {
        let lead = self.leading().clone();
        if lead.is_zero() {
            return None;
        }
        let inv = lead.recip().expect("nonzero");
        Some((lead, self.scale(&inv)))
    }

    /// Solves `self = 0` for `name`, which must occur.
    pub fn solve_for(&self, name: &str) -> Option<VecTerm> {
        let c = self.coeffs.get(name)?;
        let mut rest = self.clone();
        rest.coeffs.remove(name);
        Some(rest.scale(&-c.recip().ok()?))
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Rat>) -> Result<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let val = env(v).ok_or_else(|| Error::MissingAssignment(v.clone()))?;
            acc += &(c * &val);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: serde_json::Map<String, Value> =
            self.coeffs.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect();
        json!({"kind": "vterm", "coeffs": coeffs, "constant": self.constant.to_string()})
    }
}

impl fmt::Debug for VecTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// An opaque integer-valued component of a value term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Comp {
    /// A value-sort variable.
    Var(String),
    /// `v_p(t)` with `t` non-constant and monic.
    V(u64, VecTerm),
}

impl Comp {
    pub fn mentions_vec(&self, name: &str) -> bool {
        matches!(self, Comp::V(_, t) if t.contains(name))
    }

    pub fn place(&self) -> Option<u64> {
        match self {
            Comp::V(p, _) => Some(*p),
            Comp::Var(_) => None,
        }
    }
}

/// An integer-affine combination of value components, or `∞`.
///
/// Inside atoms the coefficients of components are nonnegative, so a term
/// is `∞` exactly when one of its components is.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ValTerm {
    comps: BTreeMap<Comp, i64>,
    constant: i64,
    infinite: bool,
}

impl ValTerm {
    pub fn int(c: i64) -> ValTerm {
        ValTerm { comps: BTreeMap::new(), constant: c, infinite: false }
    }

    pub fn infinity() -> ValTerm {
        ValTerm { comps: BTreeMap::new(), constant: 0, infinite: true }
    }

    pub fn var(name: &str) -> ValTerm {
        ValTerm::comp(Comp::Var(name.to_string()), 1)
    }

    pub fn comp(c: Comp, k: i64) -> ValTerm {
        let mut t = ValTerm::int(0);
        t.add_comp(c, k);
        t
    }

    /// `v_p(t)` in canonical form.
    pub fn v(p: u64, t: &VecTerm) -> ValTerm {
        match t.monic() {
            None => ValTerm::infinity(),
            Some((lead, m)) => {
                let shift = vp_unchecked(&lead, p).finite().expect("nonzero lead");
                if m.is_constant() {
                    // m is the constant 1
                    ValTerm::int(shift)
                } else {
                    let mut out = ValTerm::comp(Comp::V(p, m), 1);
                    out.constant = shift;
                    out
                }
            }
        }
    }

    fn add_comp(&mut self, c: Comp, k: i64) {
        if k == 0 || self.infinite {
            return;
        }
        let e = self.comps.entry(c.clone()).or_insert(0);
        *e += k;
        if *e == 0 {
            self.comps.remove(&c);
        }
    }

    pub fn comps(&self) -> &BTreeMap<Comp, i64> {
        &self.comps
    }

    pub fn constant_part(&self) -> i64 {
        self.constant
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn is_constant(&self) -> bool {
        self.comps.is_empty()
    }

    /// The value of a component-free term.
    pub fn as_ground(&self) -> Option<ValInt> {
        if self.infinite {
            Some(ValInt::Inf)
        } else if self.comps.is_empty() {
            Some(ValInt::Fin(self.constant))
        } else {
            None
        }
    }

    pub fn coeff(&self, c: &Comp) -> i64 {
        self.comps.get(c).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &ValTerm) -> ValTerm {
        if self.infinite || other.infinite {
            return ValTerm::infinity();
        }
        let mut out = self.clone();
        for (c, k) in &other.comps {
            out.add_comp(c.clone(), *k);
        }
        out.constant += other.constant;
        out
    }

    pub fn add_int(&self, k: i64) -> ValTerm {
        if self.infinite {
            return self.clone();
        }
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Integer multiple; `∞` stays `∞` for any nonzero factor.
    pub fn scale(&self, k: i64) -> ValTerm {
        if k == 0 {
            return ValTerm::int(0);
        }
        if self.infinite {
            return self.clone();
        }
        ValTerm {
            comps: self.comps.iter().map(|(c, v)| (c.clone(), v * k)).collect(),
            constant: self.constant * k,
            infinite: false,
        }
    }

    /// Formal negation of a finite term (used only for finite arithmetic).
    pub fn neg(&self) -> ValTerm {
        debug_assert!(!self.infinite);
        self.scale(-1)
    }

    /// Replaces component `c` by the term `by`.
    pub fn subst_comp(&self, c: &Comp, by: &ValTerm) -> ValTerm {
        match self.comps.get(c) {
            None => self.clone(),
            Some(&k) => {
                let mut rest = self.clone();
                rest.comps.remove(c);
                rest.add(&by.scale(k))
            }
        }
    }

    pub fn subst_vec(&self, name: &str, t: &VecTerm) -> ValTerm {
        if self.infinite || !self.comps.keys().any(|c| c.mentions_vec(name)) {
            return self.clone();
        }
        let mut out = ValTerm::int(self.constant);
        for (c, k) in &self.comps {
            match c {
                Comp::V(p, u) if u.contains(name) => {
                    out = out.add(&ValTerm::v(*p, &u.substitute(name, t)).scale(*k));
                }
                _ => out.add_comp(c.clone(), *k),
            }
        }
        out
    }

    pub fn subst_val(&self, name: &str, t: &ValTerm) -> ValTerm {
        self.subst_comp(&Comp::Var(name.to_string()), t)
    }

    pub fn mentions_vec(&self, name: &str) -> bool {
        self.comps.keys().any(|c| c.mentions_vec(name))
    }

    pub fn mentions_val(&self, name: &str) -> bool {
        self.comps.contains_key(&Comp::Var(name.to_string()))
    }

    /// Splits into the nonnegative and the negated negative part.
    fn split_signs(&self) -> (ValTerm, ValTerm) {
        let mut pos = ValTerm::int(self.constant.max(0));
        let mut neg = ValTerm::int((-self.constant).max(0));
        for (c, &k) in &self.comps {
            if k > 0 {
                pos.add_comp(c.clone(), k);
            } else {
                neg.add_comp(c.clone(), -k);
            }
        }
        (pos, neg)
    }

    pub fn places(&self) -> BTreeSet<u64> {
        self.comps.keys().filter_map(|c| c.place()).collect()
    }

    pub fn eval(&self, comp_value: &mut dyn FnMut(&Comp) -> Result<ValInt>) -> Result<ValInt> {
        if self.infinite {
            return Ok(ValInt::Inf);
        }
        let mut acc = ValInt::Fin(self.constant);
        for (c, &k) in &self.comps {
            let v = comp_value(c)?;
            acc = match v {
                ValInt::Inf => ValInt::Inf,
                ValInt::Fin(x) => acc.add(ValInt::Fin(x.checked_mul(k).expect("value overflow"))),
            };
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        if self.infinite {
            return json!({"kind": "oo"});
        }
        let coeffs: Vec<Value> = self
            .comps
            .iter()
            .map(|(c, k)| match c {
                Comp::Var(n) => json!({"kind": "var", "name": n, "coeff": k}),
                Comp::V(p, t) => json!({"kind": "v", "place": p.to_string(), "arg": t.to_json(), "coeff": k}),
            })
            .collect();
        json!({"kind": "sterm", "coeffs": coeffs, "constant": self.constant})
    }
}

impl fmt::Debug for ValTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Normalizes the two sides of a value comparison so both carry only
/// nonnegative component coefficients and the smaller constant is zero.
fn normalize_sides(a: &ValTerm, b: &ValTerm) -> (ValTerm, ValTerm) {
    let (mut a, mut b) = (a.clone(), b.clone());
    if !a.infinite && !b.infinite {
        let (ap, an) = a.split_signs();
        let (bp, bn) = b.split_signs();
        a = ap.add(&bn);
        b = bp.add(&an);
    } else if a.infinite && !b.infinite {
        let (bp, _) = b.split_signs();
        b = bp;
    } else if b.infinite && !a.infinite {
        let (ap, _) = a.split_signs();
        a = ap;
    }
    if !a.infinite && !b.infinite {
        let m = a.constant.min(b.constant);
        a.constant -= m;
        b.constant -= m;
    } else if !a.infinite {
        a.constant = 0.max(a.constant.min(0));
    } else if !b.infinite {
        b.constant = 0.max(b.constant.min(0));
    }
    (a, b)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    /// `t = 0`.
    VecEq(VecTerm),
    /// `0 < t` (strict) or `0 ≤ t`, in the order of the real place.
    Ord { term: VecTerm, strict: bool },
    ValLe(ValTerm, ValTerm),
    ValEq(ValTerm, ValTerm),
    /// `P_n(s)`: `s ∈ nZ ∪ {∞}`.
    Div(u64, ValTerm),
    /// `|t1|_p ≤ |t2|_p`.
    L(Place, VecTerm, VecTerm),
    /// `|t1·t2|_p = |t3|_p`.
    M(Place, VecTerm, VecTerm, VecTerm),
    /// `∃y |t|_p = |y|_p^n`.
    Q(Place, u64, VecTerm),
}

impl Atom {
    pub fn vec_eq(t: VecTerm) -> Atom {
        let t = if t.is_constant() {
            if t.is_zero() {
                VecTerm::zero()
            } else {
                VecTerm::int(1)
            }
        } else {
            t.monic().expect("non-constant").1
        };
        Atom::VecEq(t)
    }

    pub fn ord(t: VecTerm, strict: bool) -> Atom {
        let term = if t.is_constant() {
            VecTerm::int(t.constant_part().signum() as i64)
        } else {
            let lead = t.leading().abs();
            t.scale(&lead.recip().expect("nonzero"))
        };
        Atom::Ord { term, strict }
    }

    /// `a ≤ b` for vector terms in the real order.
    pub fn le(a: &VecTerm, b: &VecTerm) -> Atom {
        Atom::ord(b.sub(a), false)
    }

    pub fn lt(a: &VecTerm, b: &VecTerm) -> Atom {
        Atom::ord(b.sub(a), true)
    }

    pub fn val_le(a: ValTerm, b: ValTerm) -> Atom {
        let (a, b) = normalize_sides(&a, &b);
        Atom::ValLe(a, b)
    }

    pub fn val_eq(a: ValTerm, b: ValTerm) -> Atom {
        let (a, b) = normalize_sides(&a, &b);
        if a <= b {
            Atom::ValEq(a, b)
        } else {
            Atom::ValEq(b, a)
        }
    }

    pub fn div(n: u64, s: ValTerm) -> Atom {
        assert!(n >= 1, "P_0 is not a predicate");
        if s.infinite {
            return Atom::Div(n, s);
        }
        let ni = n as i64;
        let mut t = ValTerm::int(s.constant.rem_euclid(ni));
        for (c, &k) in &s.comps {
            // representatives in 1..=n keep every component, so ∞ still absorbs
            t.add_comp(c.clone(), (k - 1).rem_euclid(ni) + 1);
        }
        Atom::Div(n, t)
    }

    /// Re-establishes canonical form after a substitution.
    pub fn canon(self) -> Atom {
        match self {
            Atom::VecEq(t) => Atom::vec_eq(t),
            Atom::Ord { term, strict } => Atom::ord(term, strict),
            Atom::ValLe(a, b) => Atom::val_le(a, b),
            Atom::ValEq(a, b) => Atom::val_eq(a, b),
            Atom::Div(n, s) => Atom::div(n, s),
            other => other,
        }
    }

    pub fn map_vec_terms(&self, f: &dyn Fn(&VecTerm) -> VecTerm, g: &dyn Fn(&ValTerm) -> ValTerm) -> Atom {
        match self {
            Atom::VecEq(t) => Atom::vec_eq(f(t)),
            Atom::Ord { term, strict } => Atom::ord(f(term), *strict),
            Atom::ValLe(a, b) => Atom::val_le(g(a), g(b)),
            Atom::ValEq(a, b) => Atom::val_eq(g(a), g(b)),
            Atom::Div(n, s) => Atom::div(*n, g(s)),
            Atom::L(p, a, b) => Atom::L(*p, f(a), f(b)),
            Atom::M(p, a, b, c) => Atom::M(*p, f(a), f(b), f(c)),
            Atom::Q(p, n, t) => Atom::Q(*p, *n, f(t)),
        }
    }

    pub fn subst_vec(&self, name: &str, t: &VecTerm) -> Atom {
        if !self.free_vec_vars().contains(name) {
            return self.clone();
        }
        self.map_vec_terms(&|u| u.substitute(name, t), &|s| s.subst_vec(name, t))
    }

    pub fn subst_val(&self, name: &str, t: &ValTerm) -> Atom {
        self.map_vec_terms(&|u| u.clone(), &|s| s.subst_val(name, t))
    }

    pub fn subst_comp(&self, c: &Comp, by: &ValTerm) -> Atom {
        self.map_vec_terms(&|u| u.clone(), &|s| s.subst_comp(c, by))
    }

    pub fn vec_terms(&self) -> Vec<&VecTerm> {
        match self {
            Atom::VecEq(t) | Atom::Ord { term: t, .. } | Atom::Q(_, _, t) => vec![t],
            Atom::L(_, a, b) => vec![a, b],
            Atom::M(_, a, b, c) => vec![a, b, c],
            _ => vec![],
        }
    }

    pub fn val_terms(&self) -> Vec<&ValTerm> {
        match self {
            Atom::ValLe(a, b) | Atom::ValEq(a, b) => vec![a, b],
            Atom::Div(_, s) => vec![s],
            _ => vec![],
        }
    }

    pub fn comps(&self) -> BTreeSet<&Comp> {
        self.val_terms().into_iter().flat_map(|s| s.comps.keys()).collect()
    }

    pub fn free_vec_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = BTreeSet::new();
        for t in self.vec_terms() {
            out.extend(t.vars().cloned());
        }
        for c in self.comps() {
            if let Comp::V(_, t) = c {
                out.extend(t.vars().cloned());
            }
        }
        out
    }

    pub fn free_val_vars(&self) -> BTreeSet<String> {
        self.comps()
            .into_iter()
            .filter_map(|c| match c {
                Comp::Var(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn mentions_vec(&self, name: &str) -> bool {
        self.vec_terms().iter().any(|t| t.contains(name)) || self.comps().iter().any(|c| c.mentions_vec(name))
    }

    /// Places whose predicates or valuations the atom uses.
    pub fn places(&self) -> BTreeSet<Place> {
        match self {
            Atom::VecEq(_) => BTreeSet::new(),
            Atom::Ord { .. } => [Place::Inf].into_iter().collect(),
            Atom::L(p, ..) | Atom::M(p, ..) | Atom::Q(p, ..) => [*p].into_iter().collect(),
            _ => self.comps().iter().filter_map(|c| c.place()).map(Place::Finite).collect(),
        }
    }

    /// Truth value when it does not depend on the variables: ground atoms,
    /// `s ≤ ∞`, `s = s`, `P_n(∞)` and `s ≤ s + k` for `k ≥ 0`.
    pub fn eval_ground(&self) -> Option<bool> {
        match self {
            Atom::ValLe(_, b) if b.infinite => return Some(true),
            Atom::ValLe(a, b) if a.comps == b.comps && !a.infinite && a.constant <= b.constant => return Some(true),
            Atom::ValEq(a, b) if a.infinite && b.infinite => return Some(true),
            Atom::ValEq(a, b) if a == b => return Some(true),
            Atom::Div(_, s) if s.infinite => return Some(true),
            Atom::Div(1, _) => return Some(true),
            _ => {}
        }
        if !self.free_vec_vars().is_empty() || !self.free_val_vars().is_empty() {
            return None;
        }
        let c = |t: &VecTerm| t.constant_part().clone();
        let g = |s: &ValTerm| s.as_ground().expect("ground");
        Some(match self {
            Atom::VecEq(t) => t.is_zero(),
            Atom::Ord { term, strict } => {
                let s = term.constant_part().signum();
                if *strict {
                    s > 0
                } else {
                    s >= 0
                }
            }
            Atom::ValLe(a, b) => g(a) <= g(b),
            Atom::ValEq(a, b) => g(a) == g(b),
            Atom::Div(n, s) => g(s).divisible_by(*n),
            Atom::L(p, a, b) => surface_l(*p, &c(a), &c(b)),
            Atom::M(p, a, b, d) => surface_m(*p, &c(a), &c(b), &c(d)),
            Atom::Q(p, n, t) => surface_q(*p, *n, &c(t)),
        })
    }

    pub fn to_json(&self) -> Value {
        let vt = |t: &VecTerm| t.to_json();
        let st = |s: &ValTerm| s.to_json();
        match self {
            Atom::VecEq(t) => json!({"kind": "vec_eq", "children": [vt(t)]}),
            Atom::Ord { term, strict } => {
                json!({"kind": if *strict { "lt" } else { "le" }, "place": "inf", "children": [json!({"kind": "vterm", "coeffs": {}, "constant": "0"}), vt(term)]})
            }
            Atom::ValLe(a, b) => json!({"kind": "val_le", "children": [st(a), st(b)]}),
            Atom::ValEq(a, b) => json!({"kind": "val_eq", "children": [st(a), st(b)]}),
            Atom::Div(n, s) => json!({"kind": "div", "n": n, "children": [st(s)]}),
            Atom::L(p, a, b) => json!({"kind": "L", "place": p.to_string(), "children": [vt(a), vt(b)]}),
            Atom::M(p, a, b, c) => json!({"kind": "M", "place": p.to_string(), "children": [vt(a), vt(b), vt(c)]}),
            Atom::Q(p, n, t) => json!({"kind": "Q", "place": p.to_string(), "n": n, "children": [vt(t)]}),
        }
    }
}

pub fn surface_l(p: Place, a: &Rat, b: &Rat) -> bool {
    match p {
        Place::Finite(q) => vp_unchecked(a, q) >= vp_unchecked(b, q),
        Place::Inf => abs_le_inf(a, b),
    }
}

pub fn surface_m(p: Place, a: &Rat, b: &Rat, c: &Rat) -> bool {
    match p {
        Place::Finite(q) => vp_unchecked(a, q).add(vp_unchecked(b, q)) == vp_unchecked(c, q),
        Place::Inf => (a * b).abs() == c.abs(),
    }
}

pub fn surface_q(p: Place, n: u64, a: &Rat) -> bool {
    match p {
        Place::Finite(q) => vp_unchecked(a, q).divisible_by(n),
        Place::Inf => is_abs_nth_power(a, n),
    }
}

/// A possibly negated atom.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Lit {
    pub pos: bool,
    pub atom: Atom,
}

impl Lit {
    pub fn pos(atom: Atom) -> Lit {
        Lit { pos: true, atom }
    }

    pub fn neg(atom: Atom) -> Lit {
        Lit { pos: false, atom }
    }

    pub fn negate(&self) -> Lit {
        Lit { pos: !self.pos, atom: self.atom.clone() }
    }

    /// Negated order atoms are flipped into positive ones.
    pub fn normalized(self) -> Lit {
        match (&self.atom, self.pos) {
            (Atom::Ord { term, strict }, false) => Lit::pos(Atom::ord(term.neg(), !strict)),
            _ => self,
        }
    }

    pub fn eval_ground(&self) -> Option<bool> {
        self.atom.eval_ground().map(|b| b == self.pos)
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.pos {
            a
        } else {
            Formula::Not(Box::new(a))
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn from_lits(lits: &[Lit]) -> Formula {
        Formula::and(lits.iter().map(Lit::to_formula).collect())
    }

    pub fn from_dnf(dnf: &[Vec<Lit>]) -> Formula {
        Formula::or(dnf.iter().map(|c| Formula::from_lits(c)).collect())
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Free variables with their sorts.
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeMap<String, Sort>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.free_vec_vars() {
                    if !bound.contains(&v) {
                        out.insert(v, Sort::Vec);
                    }
                }
                for v in a.free_val_vars() {
                    if !bound.contains(&v) {
                        out.insert(v, Sort::Val);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.name.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.extend(a.free_vec_vars());
            out.extend(a.free_val_vars());
        });
        self.visit_binders(&mut |v| {
            out.insert(v.name.clone());
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    fn visit_binders(&self, f: &mut dyn FnMut(&Var)) {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(g) => g.visit_binders(f),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                f(v);
                g.visit_binders(f);
            }
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_binders(f)),
            Formula::Implies(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
        }
    }

    pub fn places(&self) -> BTreeSet<Place> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| out.extend(a.places()));
        out
    }

    /// Applies `f` to every atom; quantifiers are left in place.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Formula::Not(Box::new(g.map_atoms(f))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(g.map_atoms(f))),
            Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(g.map_atoms(f))),
        }
    }

    pub fn try_map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Result<Formula>) -> Result<Formula> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a)?,
            Formula::Not(g) => Formula::Not(Box::new(g.try_map_atoms(f)?)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.try_map_atoms(f)).collect::<Result<_>>()?),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.try_map_atoms(f)).collect::<Result<_>>()?),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.try_map_atoms(f)?), Box::new(b.try_map_atoms(f)?))
            }
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(g.try_map_atoms(f)?)),
            Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(g.try_map_atoms(f)?)),
        })
    }

    /// Capture-avoiding substitution of a term for a free variable.
    pub fn substitute(&self, x: &Var, t: &Term) -> Result<Formula> {
        match (x.sort, t) {
            (Sort::Vec, Term::Vec(_)) | (Sort::Val, Term::Val(_)) => {}
            _ => return Err(Error::IllSorted(format!("cannot substitute a {} term for {}:{}", t.sort(), x.name, x.sort))),
        }
        let t_vars = t.vars();
        Ok(self.subst_inner(x, t, &t_vars))
    }

    fn subst_inner(&self, x: &Var, t: &Term, t_vars: &BTreeSet<String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(match (x.sort, t) {
                (Sort::Vec, Term::Vec(u)) => a.subst_vec(&x.name, u),
                (Sort::Val, Term::Val(u)) => a.subst_val(&x.name, u),
                _ => unreachable!("sorts checked by caller"),
            }),
            Formula::Not(g) => Formula::Not(Box::new(g.subst_inner(x, t, t_vars))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.subst_inner(x, t, t_vars)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.subst_inner(x, t, t_vars)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.subst_inner(x, t, t_vars)), Box::new(b.subst_inner(x, t, t_vars)))
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                if v.name == x.name {
                    return self.clone();
                }
                let (v2, g2) = if t_vars.contains(&v.name) {
                    let mut avoid = g.all_names();
                    avoid.extend(t_vars.iter().cloned());
                    avoid.insert(x.name.clone());
                    let fresh = Var { name: fresh_name(&v.name, &avoid), sort: v.sort };
                    let renamed = g.rename_free(v, &fresh.name);
                    (fresh, renamed)
                } else {
                    (v.clone(), (**g).clone())
                };
                let body = Box::new(g2.subst_inner(x, t, t_vars));
                match self {
                    Formula::Exists(..) => Formula::Exists(v2, body),
                    _ => Formula::Forall(v2, body),
                }
            }
        }
    }

    fn rename_free(&self, v: &Var, new: &str) -> Formula {
        let t = match v.sort {
            Sort::Vec => Term::Vec(VecTerm::var(new)),
            Sort::Val => Term::Val(ValTerm::var(new)),
        };
        self.subst_inner(v, &t, &[new.to_string()].into_iter().collect())
    }

    /// Renames bound variables apart so every binder has a distinct name that
    /// also differs from every free variable.
    pub fn alpha_rename(&self) -> Formula {
        let mut used: BTreeSet<String> = self.free_vars().into_keys().collect();
        self.alpha_inner(&mut used)
    }

    fn alpha_inner(&self, used: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(g) => Formula::Not(Box::new(g.alpha_inner(used))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.alpha_inner(used)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.alpha_inner(used)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.alpha_inner(used)), Box::new(b.alpha_inner(used))),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let name = if used.contains(&v.name) { fresh_name(&v.name, used) } else { v.name.clone() };
                used.insert(name.clone());
                let body = if name != v.name { g.rename_free(v, &name) } else { (**g).clone() };
                let nv = Var { name, sort: v.sort };
                let body = Box::new(body.alpha_inner(used));
                match self {
                    Formula::Exists(..) => Formula::Exists(nv, body),
                    _ => Formula::Forall(nv, body),
                }
            }
        }
    }

    /// Negation normal form. Negations end up directly on atoms; negated
    /// order atoms are flipped; implications are expanded. Quantifiers stay.
    pub fn nnf(&self) -> Formula {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Formula {
        match self {
            Formula::True => {
                if pos {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::False => {
                if pos {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::Atom(a) => Lit { pos, atom: a.clone() }.normalized().to_formula(),
            Formula::Not(g) => g.nnf_pol(!pos),
            Formula::And(gs) => {
                let parts = gs.iter().map(|g| g.nnf_pol(pos)).collect();
                if pos {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(gs) => {
                let parts = gs.iter().map(|g| g.nnf_pol(pos)).collect();
                if pos {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
            Formula::Implies(a, b) => {
                if pos {
                    Formula::or(vec![a.nnf_pol(false), b.nnf_pol(true)])
                } else {
                    Formula::and(vec![a.nnf_pol(true), b.nnf_pol(false)])
                }
            }
            Formula::Exists(v, g) => {
                if pos {
                    Formula::exists(v.clone(), g.nnf_pol(true))
                } else {
                    Formula::forall(v.clone(), g.nnf_pol(false))
                }
            }
            Formula::Forall(v, g) => {
                if pos {
                    Formula::forall(v.clone(), g.nnf_pol(true))
                } else {
                    Formula::exists(v.clone(), g.nnf_pol(false))
                }
            }
        }
    }

    /// Disjunctive normal form as a list of literal conjunctions. Trivially
    /// false conjunctions (ground-false or complementary literals) are dropped.
    pub fn dnf(&self) -> Result<Vec<Vec<Lit>>> {
        if !self.is_quantifier_free() {
            return Err(Error::Precondition("DNF requires a quantifier-free formula".into()));
        }
        Ok(dnf_of_nnf(&self.nnf()))
    }

    pub fn to_dnf(&self) -> Result<Formula> {
        Ok(Formula::from_dnf(&self.dnf()?))
    }

    /// Folds ground atoms, flattens connectives and removes duplicates.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => match a.eval_ground() {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => infinite_valuation(a).unwrap_or_else(|| self.clone()),
            },
            Formula::Not(g) => match g.simplify() {
                Formula::Atom(a) => Lit::neg(a).normalized().to_formula(),
                other => Formula::not(other),
            },
            Formula::And(gs) => {
                let parts: Vec<Formula> = gs.iter().map(Formula::simplify).collect();
                dedupe_junction(Formula::and(parts), true)
            }
            Formula::Or(gs) => {
                let parts: Vec<Formula> = gs.iter().map(Formula::simplify).collect();
                dedupe_junction(Formula::or(parts), false)
            }
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, b) => b,
                (a, Formula::False) => Formula::not(a),
                (a, b) => Formula::implies(a, b),
            },
            Formula::Exists(v, g) => match g.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                b => Formula::exists(v.clone(), b),
            },
            Formula::Forall(v, g) => match g.simplify() {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                b => Formula::forall(v.clone(), b),
            },
        }
    }

    /// Checks that every variable is used at a single sort and that bound
    /// variables are used at their declared sort.
    pub fn check_sorts(&self) -> Result<()> {
        let mut free: BTreeMap<String, Sort> = BTreeMap::new();
        self.check_sorts_inner(&mut Vec::new(), &mut free)
    }

    fn check_sorts_inner(&self, scope: &mut Vec<Var>, free: &mut BTreeMap<String, Sort>) -> Result<()> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(a) => {
                let uses = a
                    .free_vec_vars()
                    .into_iter()
                    .map(|v| (v, Sort::Vec))
                    .chain(a.free_val_vars().into_iter().map(|v| (v, Sort::Val)));
                for (name, sort) in uses {
                    let declared = scope.iter().rev().find(|v| v.name == name).map(|v| v.sort);
                    let expected = match declared {
                        Some(s) => s,
                        None => *free.entry(name.clone()).or_insert(sort),
                    };
                    if expected != sort {
                        return Err(Error::IllSorted(format!("variable {} used as {} but has sort {}", name, sort, expected)));
                    }
                }
                Ok(())
            }
            Formula::Not(g) => g.check_sorts_inner(scope, free),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| g.check_sorts_inner(scope, free)),
            Formula::Implies(a, b) => {
                a.check_sorts_inner(scope, free)?;
                b.check_sorts_inner(scope, free)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                scope.push(v.clone());
                let r = g.check_sorts_inner(scope, free);
                scope.pop();
                r
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.size(),
            Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Formula::True => json!({"kind": "true"}),
            Formula::False => json!({"kind": "false"}),
            Formula::Atom(a) => a.to_json(),
            Formula::Not(g) => json!({"kind": "not", "children": [g.to_json()]}),
            Formula::And(gs) => json!({"kind": "and", "children": gs.iter().map(Formula::to_json).collect::<Vec<_>>()}),
            Formula::Or(gs) => json!({"kind": "or", "children": gs.iter().map(Formula::to_json).collect::<Vec<_>>()}),
            Formula::Implies(a, b) => json!({"kind": "implies", "children": [a.to_json(), b.to_json()]}),
            Formula::Exists(v, g) => {
                json!({"kind": "exists", "var": v.name, "sort": v.sort.to_string(), "children": [g.to_json()]})
            }
            Formula::Forall(v, g) => {
                json!({"kind": "forall", "var": v.name, "sort": v.sort.to_string(), "children": [g.to_json()]})
            }
        }
    }
}

fn dedupe_junction(f: Formula, is_and: bool) -> Formula {
    let parts = match f {
        Formula::And(ps) if is_and => ps,
        Formula::Or(ps) if !is_and => ps,
        other => return other,
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in parts {
        let complement = Formula::not(p.clone());
        if seen.contains(&complement) {
            return if is_and { Formula::False } else { Formula::True };
        }
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    if is_and {
        Formula::and(out)
    } else {
        Formula::or(out)
    }
}

/// DNF of a quantifier-free NNF formula.
/// `s = ∞` (or `∞ ≤ s`) where `s` is a sum of valuations of vector terms
/// holds exactly when one of those terms vanishes.
fn infinite_valuation(a: &Atom) -> Option<Formula> {
    let s = match a {
        Atom::ValEq(l, r) if r.infinite && !l.infinite => l,
        Atom::ValEq(l, r) if l.infinite && !r.infinite => r,
        Atom::ValLe(l, r) if l.infinite && !r.infinite => r,
        _ => return None,
    };
    let mut parts = Vec::new();
    for (c, &k) in &s.comps {
        match c {
            Comp::V(_, t) if k > 0 => parts.push(Formula::atom(Atom::vec_eq(t.clone()))),
            _ => return None,
        }
    }
    Some(Formula::or(parts).simplify())
}

pub fn dnf_of_nnf(f: &Formula) -> Vec<Vec<Lit>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Atom(a) => conj_or_empty(vec![Lit::pos(a.clone())]),
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => conj_or_empty(vec![Lit::neg(a.clone()).normalized()]),
            other => dnf_of_nnf(&other.nnf_pol(false)),
        },
        Formula::Or(gs) => {
            let mut out: Vec<Vec<Lit>> = Vec::new();
            let mut seen = BTreeSet::new();
            for g in gs {
                for c in dnf_of_nnf(g) {
                    if seen.insert(c.clone()) {
                        out.push(c);
                    }
                }
            }
            out
        }
        Formula::And(gs) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for g in gs {
                let d = dnf_of_nnf(g);
                let mut next = Vec::new();
                let mut seen = BTreeSet::new();
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        if let Some(c) = tidy_conj(c) {
                            if seen.insert(c.clone()) {
                                next.push(c);
                            }
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Formula::Implies(..) | Formula::Exists(..) | Formula::Forall(..) => dnf_of_nnf(&f.nnf()),
    }
}

fn conj_or_empty(c: Vec<Lit>) -> Vec<Vec<Lit>> {
    match tidy_conj(c) {
        Some(c) => vec![c],
        None => vec![],
    }
}

/// Sorts and dedupes a conjunction, drops ground-true literals, and returns
/// `None` when it is trivially unsatisfiable.
pub fn tidy_conj(mut c: Vec<Lit>) -> Option<Vec<Lit>> {
    c.retain(|l| l.eval_ground() != Some(true));
    if c.iter().any(|l| l.eval_ground() == Some(false)) {
        return None;
    }
    c.sort();
    c.dedup();
    for w in c.windows(2) {
        if w[0].atom == w[1].atom && w[0].pos != w[1].pos {
            return None;
        }
    }
    Some(c)
}

/// A term of either sort, for substitution.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Vec(VecTerm),
    Val(ValTerm),
}

impl Term {
    pub fn sort(&self) -> Sort {
        match self {
            Term::Vec(_) => Sort::Vec,
            Term::Val(_) => Sort::Val,
        }
    }

    fn vars(&self) -> BTreeSet<String> {
        match self {
            Term::Vec(t) => t.vars().cloned().collect(),
            Term::Val(s) => {
                let mut out = BTreeSet::new();
                for c in s.comps().keys() {
                    match c {
                        Comp::Var(n) => {
                            out.insert(n.clone());
                        }
                        Comp::V(_, t) => out.extend(t.vars().cloned()),
                    }
                }
                out
            }
        }
    }
}

pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..).map(|i| format!("{}{}", stem, i)).find(|n| !avoid.contains(n)).expect("unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn x() -> VecTerm {
        VecTerm::var("x")
    }

    #[test]
    fn canon_cancels() {
        // x + x − 2x + 1/2
        let t = x().add(&x()).sub(&x().scale(&rat("2"))).add_const(&rat("1/2"));
        assert_eq!(t, VecTerm::constant(rat("1/2")));
        // v2(x) + 0·γ + 3
        let s = ValTerm::v(2, &x()).add(&ValTerm::var("g").scale(0)).add_int(3);
        assert_eq!(s.comps().len(), 1);
        assert_eq!(s.constant_part(), 3);
    }

    #[test]
    fn valuation_terms_are_monic() {
        // v2(2x − 6) = 1 + v2(x − 3)
        let s = ValTerm::v(2, &x().scale(&rat("2")).add_const(&rat("-6")));
        let expected = ValTerm::v(2, &x().add_const(&rat("-3"))).add_int(1);
        assert_eq!(s, expected);
        assert_eq!(s.constant_part(), 1);
        assert_eq!(ValTerm::v(3, &VecTerm::int(18)), ValTerm::int(2));
        assert!(ValTerm::v(3, &VecTerm::zero()).is_infinite());
        assert_eq!(ValTerm::v(5, &x().neg()), ValTerm::v(5, &x()));
    }

    #[test]
    fn substitution_examples() {
        let f = Formula::atom(Atom::vec_eq(x().sub(&VecTerm::var("y"))));
        let g = f.substitute(&Var::vec("x"), &Term::Vec(VecTerm::var("y"))).unwrap();
        assert_eq!(g.simplify(), Formula::True);

        let f = Formula::atom(Atom::val_le(ValTerm::var("g"), ValTerm::v(2, &x())));
        let g = f.substitute(&Var::vec("x"), &Term::Vec(VecTerm::var("y").scale(&rat("2")))).unwrap();
        let expected = Formula::atom(Atom::val_le(ValTerm::var("g"), ValTerm::v(2, &VecTerm::var("y")).add_int(1)));
        assert_eq!(g, expected);

        let bound = Formula::exists(Var::vec("x"), Formula::atom(Atom::vec_eq(x())));
        assert_eq!(bound.substitute(&Var::vec("x"), &Term::Vec(VecTerm::int(1))).unwrap(), bound);

        assert!(matches!(
            f.substitute(&Var::vec("x"), &Term::Val(ValTerm::int(1))),
            Err(Error::IllSorted(_))
        ));
    }

    #[test]
    fn substitution_avoids_capture() {
        // ∃y (x = y)[x := y] must not capture
        let f = Formula::exists(Var::vec("y"), Formula::atom(Atom::vec_eq(x().sub(&VecTerm::var("y")))));
        let g = f.substitute(&Var::vec("x"), &Term::Vec(VecTerm::var("y"))).unwrap();
        match g {
            Formula::Exists(v, body) => {
                assert_ne!(v.name, "y");
                assert!(body.free_vars().contains_key("y"));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn nnf_and_dnf() {
        let a = Formula::atom(Atom::vec_eq(x()));
        let b = Formula::atom(Atom::vec_eq(VecTerm::var("y")));
        let c = Formula::atom(Atom::vec_eq(VecTerm::var("z")));
        let n = Formula::not(Formula::and(vec![a.clone(), b.clone()])).nnf();
        assert_eq!(n, Formula::or(vec![Formula::not(a.clone()), Formula::not(b.clone())]));
        let d = Formula::and(vec![Formula::or(vec![a.clone(), b.clone()]), c.clone()]).dnf().unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|conj| conj.len() == 2));
        assert!(Formula::exists(Var::vec("x"), a).dnf().is_err());
    }

    #[test]
    fn negated_order_flips() {
        let f = Formula::not(Formula::atom(Atom::le(&x(), &VecTerm::int(3)))).nnf();
        assert_eq!(f, Formula::atom(Atom::lt(&VecTerm::int(3), &x())));
    }

    #[test]
    fn sort_checker() {
        // x used as vector and as value variable
        let f = Formula::and(vec![
            Formula::atom(Atom::vec_eq(x())),
            Formula::atom(Atom::val_le(ValTerm::var("x"), ValTerm::int(0))),
        ]);
        assert!(matches!(f.check_sorts(), Err(Error::IllSorted(_))));
        let g = Formula::exists(Var::val("x"), Formula::atom(Atom::vec_eq(x())));
        assert!(g.check_sorts().is_err());
        let ok = Formula::exists(Var::val("g"), Formula::atom(Atom::val_le(ValTerm::var("g"), ValTerm::v(2, &x()))));
        assert!(ok.check_sorts().is_ok());
    }

    #[test]
    fn div_coefficients_stay_positive() {
        let s = ValTerm::var("g").scale(-1).add_int(-3);
        match Atom::div(2, s) {
            Atom::Div(2, t) => {
                assert_eq!(t.coeff(&Comp::Var("g".into())), 1);
                assert_eq!(t.constant_part(), 1);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn side_normalization_moves_negatives() {
        // g − v(x) ≤ 2 ⟶ g ≤ v(x) + 2
        let a = Atom::val_le(ValTerm::var("g").add(&ValTerm::v(2, &x()).scale(-1)), ValTerm::int(2));
        assert_eq!(a, Atom::val_le(ValTerm::var("g"), ValTerm::v(2, &x()).add_int(2)));
    }

    #[test]
    fn json_has_stable_keys() {
        let f = Formula::and(vec![
            Formula::atom(Atom::L(Place::Finite(2), x(), VecTerm::int(1))),
            Formula::not(Formula::atom(Atom::vec_eq(x()))),
        ]);
        let j = f.to_json();
        assert_eq!(j["kind"], "and");
        assert_eq!(j["children"][0]["place"], "2");
        assert_eq!(j["children"][0]["children"][0]["coeffs"]["x"], "1");
    }
}
