//! Elimination of a vector variable at one finite place.
//!
//! Every valuation `v_p(λx + t)` is rewritten as `v_p(λ) + μ_i` with
//! `μ_i = v_p(x − d_i)`. A point `x` outside the centers has a largest value
//! `m = max μ_i`, attained on a top set `C*`; writing `x = d_j + p^m·u` for
//! `j ∈ C*`, the residue of `u` must avoid the classes of the top centers
//! modulo `p^{m+1}`, and every other `μ_i` equals `v_p(d_i − d_j)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{fresh_name, Atom, Comp, Formula, Lit, ValTerm, VecTerm};
use crate::error::{Error, Result};
use crate::oracle::{eval_qf, Assignment};
use crate::presburger::exists_int_given;
use crate::rational::{vp_unchecked, Rat, ValInt};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereSystem {
    pub p: u64,
    pub x: String,
    pub centers: Vec<VecTerm>,
    /// Value variables standing for `v_p(x − d_i)`.
    pub mu: Vec<String>,
}

impl SphereSystem {
    /// `v_p(d_i − d_j)`.
    pub fn delta(&self, i: usize, j: usize) -> ValTerm {
        ValTerm::v(self.p, &self.centers[i].sub(&self.centers[j]))
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConfigPattern {
    /// `x = d_i`, with `i` the first center hit.
    AtCenter(usize),
    /// `x` off every center; `top` is the set where `μ` is maximal and
    /// `blocks` partitions it by residue class at the next level.
    Generic { top: Vec<usize>, blocks: Vec<Vec<usize>> },
}

/// Splits `t = c·x + r` into the center `−r/c` and the shift `v_p(c)`.
fn center_of(t: &VecTerm, x: &str, p: u64) -> (VecTerm, i64) {
    let c = t.coeff(x);
    let center = t.solve_for(x).expect("x occurs");
    (center, vp_unchecked(&c, p).finite().expect("nonzero coefficient"))
}

/// Rewrites the valuations of `x` at `p` in terms of fresh `μ` variables.
pub fn normalize_to_centers(conj: &[Lit], x: &str, p: u64) -> Result<(SphereSystem, Vec<Lit>)> {
    let mut avoid = Formula::from_lits(conj).all_names();
    avoid.insert(x.to_string());
    let mut sys = SphereSystem { p, x: x.to_string(), centers: Vec::new(), mu: Vec::new() };
    let mut out = Vec::with_capacity(conj.len());
    for lit in conj {
        if lit.atom.vec_terms().iter().any(|t| t.contains(x)) {
            return Err(Error::Precondition(format!("{} uses {} outside a valuation", lit.atom, x)));
        }
        let mut atom = lit.atom.clone();
        let comps: Vec<Comp> = atom.comps().into_iter().filter(|c| c.mentions_vec(x)).cloned().collect();
        for comp in comps {
            let (q, t) = match &comp {
                Comp::V(q, t) => (*q, t),
                Comp::Var(_) => unreachable!(),
            };
            if q != p {
                return Err(Error::Unsupported(format!("{} uses {} at places {} and {}", lit.atom, x, p, q)));
            }
            let (center, shift) = center_of(t, x, p);
            let i = match sys.centers.iter().position(|d| *d == center) {
                Some(i) => i,
                None => {
                    let name = fresh_name("mu", &avoid);
                    avoid.insert(name.clone());
                    sys.centers.push(center);
                    sys.mu.push(name);
                    sys.centers.len() - 1
                }
            };
            atom = atom.subst_comp(&comp, &ValTerm::var(&sys.mu[i]).add_int(shift));
        }
        out.push(Lit { pos: lit.pos, atom });
    }
    Ok((sys, out))
}

fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    match items.split_first() {
        None => vec![vec![]],
        Some((&first, rest)) => {
            let mut out = Vec::new();
            for part in set_partitions(rest) {
                for k in 0..part.len() {
                    let mut q = part.clone();
                    q[k].insert(0, first);
                    out.push(q);
                }
                let mut q = part;
                q.insert(0, vec![first]);
                out.push(q);
            }
            out
        }
    }
}

/// All patterns for `n` centers.
pub fn patterns(n: usize) -> Vec<ConfigPattern> {
    let mut out: Vec<ConfigPattern> = (0..n).map(ConfigPattern::AtCenter).collect();
    for mask in 1u32..(1 << n) {
        let top: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        for blocks in set_partitions(&top) {
            out.push(ConfigPattern::Generic { top: top.clone(), blocks });
        }
    }
    out
}

fn le(a: ValTerm, b: ValTerm) -> Formula {
    Formula::atom(Atom::val_le(a, b))
}

fn eq(a: ValTerm, b: ValTerm) -> Formula {
    Formula::atom(Atom::val_eq(a, b))
}

fn block_of(blocks: &[Vec<usize>], i: usize) -> usize {
    blocks.iter().position(|b| b.contains(&i)).expect("i in top")
}

/// Conditions on the distances between centers for a generic pattern at
/// level `m`, and the value of each `μ_i` in terms of `m`.
fn generic_shape(sys: &SphereSystem, top: &[usize], blocks: &[Vec<usize>], m: &ValTerm) -> (Vec<Formula>, Vec<ValTerm>) {
    let j0 = top[0];
    let mut conds = Vec::new();
    let mut values = Vec::with_capacity(sys.len());
    for i in 0..sys.len() {
        if top.contains(&i) {
            values.push(m.clone());
            for &j in top.iter().filter(|&&j| j < i) {
                if block_of(blocks, i) == block_of(blocks, j) {
                    conds.push(le(m.add_int(1), sys.delta(i, j)));
                } else {
                    conds.push(eq(sys.delta(i, j), m.clone()));
                }
            }
        } else {
            let d = sys.delta(i, j0);
            conds.push(le(d.add_int(1), m.clone()));
            values.push(d);
        }
    }
    (conds, values)
}

/// The value-sort condition under which `x` can realize `pattern` with
/// `μ_i = v_p(x − d_i)`.
pub fn realizability(sys: &SphereSystem, pattern: &ConfigPattern) -> Formula {
    let mu = |i: usize| ValTerm::var(&sys.mu[i]);
    match pattern {
        ConfigPattern::AtCenter(i) => {
            let mut parts = vec![eq(mu(*i), ValTerm::infinity())];
            for j in (0..sys.len()).filter(|j| j != i) {
                parts.push(eq(mu(j), sys.delta(*i, j)));
            }
            Formula::and(parts).simplify()
        }
        ConfigPattern::Generic { top, blocks } => {
            if blocks.len() as u64 >= sys.p {
                return Formula::False;
            }
            let level = mu(top[0]);
            let (mut parts, values) = generic_shape(sys, top, blocks, &level);
            parts.push(Formula::not(eq(level.clone(), ValTerm::infinity())));
            for (i, v) in values.into_iter().enumerate() {
                parts.push(eq(mu(i), v));
            }
            Formula::and(parts).simplify()
        }
    }
}

/// Shape of a pattern without the residue count: which `μ` is maximal and
/// how the top centers split at the next level.
pub fn pattern_shape(sys: &SphereSystem, pattern: &ConfigPattern) -> Formula {
    let mu = |i: usize| ValTerm::var(&sys.mu[i]);
    match pattern {
        ConfigPattern::AtCenter(i) => {
            let mut parts = vec![eq(mu(*i), ValTerm::infinity())];
            for j in 0..*i {
                parts.push(Formula::not(eq(mu(j), ValTerm::infinity())));
            }
            Formula::and(parts)
        }
        ConfigPattern::Generic { top, blocks } => {
            let level = mu(top[0]);
            let mut parts = vec![Formula::not(eq(level.clone(), ValTerm::infinity()))];
            for i in 0..sys.len() {
                if top.contains(&i) {
                    parts.push(eq(mu(i), level.clone()));
                } else {
                    parts.push(le(mu(i).add_int(1), level.clone()));
                }
            }
            for (a, &i) in top.iter().enumerate() {
                for &j in &top[..a] {
                    let split = le(level.add_int(1), sys.delta(i, j));
                    if block_of(blocks, i) == block_of(blocks, j) {
                        parts.push(split);
                    } else {
                        parts.push(Formula::not(split));
                    }
                }
            }
            Formula::and(parts)
        }
    }
}

fn substitute_mu(lits: &[Lit], sys: &SphereSystem, values: &[ValTerm]) -> Formula {
    let parts = lits
        .iter()
        .map(|l| {
            let mut atom = l.atom.clone();
            for (name, v) in sys.mu.iter().zip(values) {
                atom = atom.subst_val(name, v);
            }
            Lit { pos: l.pos, atom }.to_formula()
        })
        .collect();
    Formula::and(parts).simplify()
}

fn level_name(sys: &SphereSystem, residual: &[Lit]) -> String {
    let mut avoid = Formula::from_lits(residual).all_names();
    avoid.extend(sys.mu.iter().cloned());
    avoid.insert(sys.x.clone());
    fresh_name("m", &avoid)
}

/// `∃x` over the generic patterns only: `x` differs from every center.
pub fn eliminate_generic(sys: &SphereSystem, residual: &[Lit]) -> Result<Formula> {
    eliminate_generic_given(sys, residual, &BTreeSet::new())
}

/// [`eliminate_generic`] where the components in `finite` (typically
/// distances between centers) are known not to be `∞`.
pub fn eliminate_generic_given(sys: &SphereSystem, residual: &[Lit], finite: &BTreeSet<Comp>) -> Result<Formula> {
    if sys.is_empty() {
        return Ok(Formula::from_lits(residual).simplify());
    }
    let m = level_name(sys, residual);
    let level = ValTerm::var(&m);
    let mut out = Vec::new();
    for pattern in patterns(sys.len()) {
        if let ConfigPattern::Generic { top, blocks } = &pattern {
            if blocks.len() as u64 >= sys.p {
                continue;
            }
            let (mut parts, values) = generic_shape(sys, top, blocks, &level);
            parts.push(substitute_mu(residual, sys, &values));
            let body = Formula::and(parts).simplify();
            if body != Formula::False {
                out.push(exists_int_given(&body, &m, finite)?);
            }
        }
    }
    Ok(Formula::or(out).simplify())
}

/// `∃x. ⋀ conj` where `x` occurs only inside valuations at `p`.
pub fn eliminate_vec_var_finite(conj: &[Lit], x: &str, p: u64) -> Result<Formula> {
    let (sys, residual) = normalize_to_centers(conj, x, p)?;
    let mut out = Vec::new();
    for i in 0..sys.len() {
        let values: Vec<ValTerm> =
            (0..sys.len()).map(|j| if j == i { ValTerm::infinity() } else { sys.delta(i, j) }).collect();
        out.push(substitute_mu(&residual, &sys, &values));
    }
    out.push(eliminate_generic(&sys, &residual)?);
    Ok(Formula::or(out).simplify())
}

fn ground_centers(sys: &SphereSystem, assignment: &BTreeMap<String, Rat>) -> Result<Vec<Rat>> {
    sys.centers
        .iter()
        .map(|d| d.eval(&|v| assignment.get(v).cloned()))
        .collect()
}

/// A rational `x` with `v_p(x − d_i) = mu[i]` for every center.
pub fn witness_finite(sys: &SphereSystem, mu: &[ValInt], assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
    let centers = ground_centers(sys, assignment)?;
    let p = sys.p;
    let check = |x: &Rat| centers.iter().zip(mu).all(|(d, m)| vp_unchecked(&(x - d), p) == *m);
    let candidates: Vec<Rat> = match mu.iter().position(|m| m.is_inf()) {
        Some(i) => vec![centers[i].clone()],
        None => {
            let top = mu.iter().max().and_then(|m| m.finite());
            match (top, mu.iter().position(|m| Some(*m) == top.map(ValInt::Fin))) {
                (Some(level), Some(j)) => (1..p as i64)
                    .map(|r| &centers[j] + &(Rat::prime_pow(p, level) * Rat::from_int(r)))
                    .collect(),
                _ => vec![],
            }
        }
    };
    candidates
        .into_iter()
        .find(check)
        .ok_or_else(|| Error::NoWitness(format!("no point realizes the valuations {:?} at {}", mu, p)))
}

/// Bound on the level `m` of a generic solution, for conjunctions whose only
/// variable is `x`.
fn level_window(sys: &SphereSystem, centers: &[Rat], residual: &[Lit]) -> i64 {
    let mut k: i64 = 0;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[..i] {
            if let ValInt::Fin(d) = vp_unchecked(&(a - b), sys.p) {
                k = k.max(d.abs());
            }
        }
    }
    let mut c: i64 = 0;
    let mut modulus: i64 = 1;
    for l in residual {
        if let Atom::Div(n, _) = &l.atom {
            modulus = num_integer::lcm(modulus, *n as i64);
        }
        for s in l.atom.val_terms() {
            c += s.constant_part().abs();
            c += s.comps().values().map(|v| v.abs()).sum::<i64>() * (k + 1);
        }
    }
    (k + 1).max(c) + modulus + 1
}

/// A point off every center satisfying the conjunction, whose only free
/// variable is `x` (occurring inside valuations at `p`), together with its
/// largest valuation `max_i v_p(x − d_i)`.
pub fn generic_point(conj: &[Lit], x: &str, p: u64) -> Result<Option<(Rat, i64)>> {
    let (sys, residual) = normalize_to_centers(conj, x, p)?;
    let empty = BTreeMap::new();
    let centers = ground_centers(&sys, &empty)?;
    let f = Formula::from_lits(conj);
    let holds = |v: &Rat| eval_qf(&f, &Assignment::new().with_vec(x, v.clone()));
    if centers.is_empty() {
        return Ok(if holds(&Rat::zero())? { Some((Rat::zero(), 0)) } else { None });
    }
    let w = level_window(&sys, &centers, &residual);
    let mut distinct: Vec<&Rat> = Vec::new();
    for d in &centers {
        if !distinct.contains(&d) {
            distinct.push(d);
        }
    }
    for k in 0..=2 * w {
        let m = if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 };
        let step = Rat::prime_pow(p, m);
        for d in &distinct {
            for r in 1..p as i64 {
                let v = *d + &(&step * &Rat::from_int(r));
                if centers.contains(&v) {
                    continue;
                }
                if holds(&v)? {
                    let top = centers.iter().filter_map(|c| vp_unchecked(&(&v - c), p).finite()).max().expect("off centers");
                    return Ok(Some((v, top)));
                }
            }
        }
    }
    Ok(None)
}

/// Centers of `x` at `p` in a conjunction, as terms in the other variables.
pub fn centers(conj: &[Lit], x: &str, p: u64) -> Result<Vec<VecTerm>> {
    Ok(normalize_to_centers(conj, x, p)?.0.centers)
}

/// Places at which `x` occurs inside a valuation.
pub fn places_of(lit: &Lit, x: &str) -> BTreeSet<u64> {
    lit.atom.comps().into_iter().filter(|c| c.mentions_vec(x)).filter_map(|c| c.place()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{dnf_of_nnf, Var};
    use crate::oracle::{check_equiv_sampled_with, search_witness, GridConfig};
    use crate::parser::parse;

    fn conj(s: &str) -> Vec<Lit> {
        let d = dnf_of_nnf(&parse(s, None).unwrap().nnf());
        assert_eq!(d.len(), 1);
        d[0].clone()
    }

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    /// Residues `x mod p^2` realizing `v_p(x − d_i) = 0` for integer centers.
    fn residue_count(p: i64, centers: &[i64]) -> usize {
        let q = p * p;
        (0..q).filter(|x| centers.iter().all(|d| (x - d).rem_euclid(p) != 0)).count()
    }

    #[test]
    fn normalization_folds_coefficients() {
        let (sys, res) = normalize_to_centers(&conj("v[2](2*x - 6) >= 5"), "x", 2).unwrap();
        assert_eq!(sys.centers, vec![VecTerm::int(3)]);
        let mu = ValTerm::var(&sys.mu[0]);
        assert_eq!(res, vec![Lit::pos(Atom::val_le(ValTerm::int(5), mu.add_int(1)))]);

        let (sys, res) = normalize_to_centers(&conj("v[3](x) = v[3](x - 1)"), "x", 3).unwrap();
        let mut cs = sys.centers.clone();
        cs.sort();
        assert_eq!(cs, vec![VecTerm::int(0), VecTerm::int(1)]);
        assert_eq!(res, vec![Lit::pos(Atom::val_eq(ValTerm::var(&sys.mu[0]), ValTerm::var(&sys.mu[1])))]);

        let (sys, _) = normalize_to_centers(&conj("v[2](x - 1) <= 3 & v[2](2*x - 2) >= 1"), "x", 2).unwrap();
        assert_eq!(sys.centers.len(), 1);
    }

    #[test]
    fn other_places_are_rejected() {
        assert!(matches!(
            normalize_to_centers(&conj("v[2](x) <= v[3](x)"), "x", 2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn residue_capacity() {
        assert_eq!(residue_count(2, &[0, 1]), 0);
        assert_eq!(residue_count(3, &[0, 1]), 3);
        let two = eliminate_vec_var_finite(&conj("v[2](x) = 0 & v[2](x - 1) = 0"), "x", 2).unwrap();
        assert_eq!(two, Formula::False);
        let three = eliminate_vec_var_finite(&conj("v[3](x) = 0 & v[3](x - 1) = 0"), "x", 3).unwrap();
        assert_eq!(three, Formula::True);
    }

    #[test]
    fn realizability_examples() {
        let (sys, _) = normalize_to_centers(&conj("v[2](x) = v[2](x - 1)"), "x", 2).unwrap();
        let pat = ConfigPattern::Generic { top: vec![0, 1], blocks: vec![vec![0], vec![1]] };
        assert_eq!(realizability(&sys, &pat), Formula::False);
        let (sys3, _) = normalize_to_centers(&conj("v[3](x) = v[3](x - 1)"), "x", 3).unwrap();
        let r = realizability(&sys3, &pat);
        let zero = Assignment::new().with_val(&sys3.mu[0], ValInt::Fin(0)).with_val(&sys3.mu[1], ValInt::Fin(0));
        assert!(eval_qf(&r, &zero).unwrap());
        let (single, _) = normalize_to_centers(&conj("v[2](x - y) <= 4"), "x", 2).unwrap();
        let one = ConfigPattern::Generic { top: vec![0], blocks: vec![vec![0]] };
        let r = realizability(&single, &one);
        for g in -3..=3 {
            let a = Assignment::new().with_val(&single.mu[0], ValInt::Fin(g));
            assert!(eval_qf(&r, &a).unwrap());
        }
    }

    #[test]
    fn ball_around_parameter_is_nonempty() {
        let out = eliminate_vec_var_finite(&conj("v[2](x - y) >= g"), "x", 2).unwrap();
        assert_eq!(out, Formula::True);
    }

    /// Demanded values listed by center.
    fn demand(sys: &SphereSystem, by_center: &[(i64, ValInt)]) -> Vec<ValInt> {
        sys.centers.iter().map(|c| by_center.iter().find(|(d, _)| VecTerm::int(*d) == *c).unwrap().1).collect()
    }

    #[test]
    fn witnesses() {
        let empty = BTreeMap::new();
        let (s3, _) = normalize_to_centers(&conj("v[3](x) = v[3](x - 1)"), "x", 3).unwrap();
        assert_eq!(witness_finite(&s3, &[ValInt::Fin(0), ValInt::Fin(0)], &empty).unwrap(), Rat::from_int(2));
        let (s2, _) = normalize_to_centers(&conj("v[2](x) <= 0"), "x", 2).unwrap();
        assert_eq!(witness_finite(&s2, &[ValInt::Fin(-3)], &empty).unwrap(), rat("1/8"));
        let (s5, _) = normalize_to_centers(&conj("v[5](x) = v[5](x - 1)"), "x", 5).unwrap();
        assert_eq!(witness_finite(&s5, &demand(&s5, &[(0, ValInt::Fin(1)), (1, ValInt::Fin(0))]), &empty).unwrap(), Rat::from_int(5));
        let (s2b, _) = normalize_to_centers(&conj("v[2](x) = v[2](x - 1)"), "x", 2).unwrap();
        assert!(witness_finite(&s2b, &[ValInt::Fin(0), ValInt::Fin(0)], &empty).is_err());
    }

    #[test]
    fn patterns_partition_the_configurations() {
        // centers 0, 1, 3, 4 at p = 2 and 3 give every kind of coincidence
        let pool = [0i64, 1, 3, 4, 9];
        for p in [2u64, 3] {
            for n in 1..=3usize {
                for start in 0..pool.len() - n + 1 {
                    let terms: Vec<String> = pool[start..start + n].iter().map(|d| format!("v[{}](x - {})", p, d)).collect();
                    let (sys, _) = normalize_to_centers(&conj(&format!("{} <= 0", terms.join(" + "))), "x", p).unwrap();
                    let pats = patterns(n);
                    let shapes: Vec<Formula> = pats.iter().map(|q| pattern_shape(&sys, q)).collect();
                    let values: Vec<ValInt> = (-2..=2).map(ValInt::Fin).chain([ValInt::Inf]).collect();
                    let mut idx = vec![0usize; n];
                    loop {
                        let mut a = Assignment::new();
                        for (i, &k) in idx.iter().enumerate() {
                            a = a.with_val(&sys.mu[i], values[k]);
                        }
                        let hits = shapes.iter().filter(|s| eval_qf(s, &a).unwrap()).count();
                        let consistent = is_ultrametric(&sys, &a, p);
                        if consistent {
                            assert_eq!(hits, 1, "p={} n={} start={} {}", p, n, start, a);
                        }
                        let mut k = 0;
                        while k < n && idx[k] + 1 == values.len() {
                            idx[k] = 0;
                            k += 1;
                        }
                        if k == n {
                            break;
                        }
                        idx[k] += 1;
                    }
                }
            }
        }
    }

    /// Whether the `μ` values obey the ultrametric law against the concrete
    /// centers: the two smallest of `μ_i, μ_j, δ_ij` agree.
    fn is_ultrametric(sys: &SphereSystem, a: &Assignment, p: u64) -> bool {
        let cs = ground_centers(sys, &BTreeMap::new()).unwrap();
        let mu: Vec<ValInt> = sys.mu.iter().map(|m| a.vals[m]).collect();
        for i in 0..cs.len() {
            for j in 0..i {
                let mut t = [mu[i], mu[j], vp_unchecked(&(&cs[i] - &cs[j]), p)];
                t.sort();
                if t[0] != t[1] {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn agrees_with_grid_search() {
        let cases = [
            ("v[2](x - y) = 1 & v[2](x) = 0", 2),
            ("v[3](x) = v[3](x - y) & v[3](x - 1) >= 1", 3),
            ("v[2](x) + 1 <= v[2](x - y) & P[2](v[2](x))", 2),
            ("!(v[2](x - 1) <= v[2](y)) & v[2](x) <= v[2](x - y)", 2),
            ("v[5](x) = v[5](x - 1) & v[5](x - 2) = v[5](x - y) & v[5](x - y) = 0", 5),
            ("v[3](x - y) = g & P[2](g) & v[3](x) >= 2", 3),
            ("v[2](3*x - y) <= v[2](x + 1) & !(v[2](x + 1) = 0)", 2),
        ];
        for (text, p) in cases {
            let c = conj(text);
            let out = eliminate_vec_var_finite(&c, "x", p).unwrap();
            assert!(!out.free_vars().contains_key("x"), "{}", out);
            let f = Formula::exists(Var::vec("x"), parse(text, None).unwrap());
            let rep = check_equiv_sampled_with(&f, &out, 150, 5, &GridConfig::centers_only(50)).unwrap();
            assert!(rep.passed(), "{} vs {}: {:?}", text, out, rep);
        }
    }

    #[test]
    fn generic_points_verify() {
        for (text, p) in [
            ("v[2](x - 1) = 3 & v[2](x) <= 0", 2),
            ("v[3](x) = 0 & v[3](x - 1) = 0", 3),
            ("v[5](x - 1/5) = -1 & P[3](v[5](x))", 5),
            ("v[2](x) >= 7", 2),
        ] {
            let c = conj(text);
            let (v, top) = generic_point(&c, "x", p).unwrap().expect(text);
            let a = Assignment::new().with_vec("x", v.clone());
            assert!(eval_qf(&Formula::from_lits(&c), &a).unwrap(), "{} at {}", text, v);
            assert!(top >= vp_unchecked(&(&v - &Rat::zero()), p).finite().unwrap_or(top));
            assert!(search_witness(&parse(text, None).unwrap(), &[Var::vec("x")], 50).unwrap().is_some());
        }
        assert!(generic_point(&conj("v[2](x) = 0 & v[2](x - 1) = 0"), "x", 2).unwrap().is_none());
    }
}
