//! The acceptance suite: ten criteria, each producing one report line.
//!
//! Report lines contain no timings, so two runs with the same seed must
//! print identical reports.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Formula, Place, Sort, Var, VecTerm};
use crate::combine::{decide, eliminate, witness, Signature, DEFAULT_MAX_BLOCK};
use crate::error::{Error, Result};
use crate::gadgets::{self, GadgetKind};
use crate::interpret::{to_one_sorted, to_two_sorted};
use crate::oracle::{check_equiv_sampled_with, eval_bounded, eval_qf, search_witness, Assignment, GridConfig, Sampler};
use crate::parser::{parse, parse_with_sorts};
use crate::rational::{vp_unchecked, Rat};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<24} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// A report together with its wall-clock time and time limit.
#[derive(Clone, Debug)]
pub struct Timed {
    pub report: CriterionReport,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl Timed {
    pub fn within_limit(&self) -> bool {
        self.limit.map_or(true, |l| self.elapsed <= l)
    }

    pub fn passed(&self) -> bool {
        self.report.passed && self.within_limit()
    }

    pub fn line(&self) -> String {
        let mut s = self.report.line();
        if !self.within_limit() {
            s = s.replacen("PASS", "FAIL", 1);
            s.push_str(&format!("  [time limit {:?} exceeded]", self.limit.unwrap()));
        }
        s
    }
}

pub const NAMES: [&str; 10] = [
    "axiom-suite",
    "qe-finite-places",
    "qe-real-place",
    "residue-capacity",
    "weak-approximation",
    "decoupling",
    "translation",
    "gadgets",
    "sentence-table",
    "determinism",
];

pub fn time_limit(id: u8) -> Option<Duration> {
    let secs = match id {
        1 => 10,
        2 => 180,
        3 => 60,
        4 => 5,
        5 => 30,
        6 => 120,
        7 => 30,
        8 => 10,
        9 => 10,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

fn report(id: u8, outcome: Result<(bool, String)>) -> CriterionReport {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {}", e)));
    CriterionReport { id, name: NAMES[id as usize - 1], passed, detail }
}

/// Runs criterion `id` (1 to 9).
pub fn run_criterion(id: u8, seed: u64) -> CriterionReport {
    let outcome = match id {
        1 => axiom_suite(seed),
        2 => qe_finite(seed, 500),
        3 => qe_real(seed, 300),
        4 => residue_capacity(seed),
        5 => weak_approximation(seed, 50),
        6 => decoupling(seed, 100),
        7 => translation(seed, 300),
        8 => gadget_check(seed),
        9 => sentence_table(),
        _ => Err(Error::Precondition(format!("no criterion {}", id))),
    };
    report(id, outcome)
}

fn run_timed(id: u8, seed: u64) -> Timed {
    let start = Instant::now();
    let report = run_criterion(id, seed);
    Timed { report, elapsed: start.elapsed(), limit: time_limit(id) }
}

/// Runs criteria 1 to 9, then all of them again for the determinism check.
/// `on_line` sees each timed result as soon as it is known.
pub fn run_suite(seed: u64, on_line: &mut dyn FnMut(&Timed)) -> Vec<Timed> {
    let mut out = Vec::new();
    for id in 1..=9 {
        let t = run_timed(id, seed);
        on_line(&t);
        out.push(t);
    }
    let start = Instant::now();
    let second: Vec<CriterionReport> = (1..=9).map(|id| run_criterion(id, seed)).collect();
    let first: Vec<&CriterionReport> = out.iter().map(|t| &t.report).collect();
    let differing: Vec<String> =
        first.iter().zip(&second).filter(|(a, b)| **a != *b).map(|(a, _)| a.id.to_string()).collect();
    let detail = if differing.is_empty() {
        "9 reports identical across two runs".to_string()
    } else {
        format!("reports differ for criteria {}", differing.join(","))
    };
    let t = Timed {
        report: CriterionReport { id: 10, name: NAMES[9], passed: differing.is_empty(), detail },
        elapsed: start.elapsed(),
        limit: None,
    };
    on_line(&t);
    out.push(t);
    out
}

// ---------------------------------------------------------------- helpers

fn places(ps: &[Place]) -> BTreeSet<Place> {
    ps.iter().copied().collect()
}

fn fin(p: u64) -> Place {
    Place::Finite(p)
}

fn small_rat(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    Rat::new(rng.gen_range(-num..=num), rng.gen_range(1..=den)).expect("nonzero denominator")
}

fn nonzero_coeff(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    loop {
        let c = rng.gen_range(-bound..=bound);
        if c != 0 {
            return c;
        }
    }
}

fn vt(t: &VecTerm) -> String {
    t.to_string()
}

fn rat_text(r: &Rat) -> String {
    VecTerm::constant(r.clone()).to_string()
}

/// Random Boolean combination of `parts` (at least one).
fn combine_parts(rng: &mut ChaCha8Rng, mut parts: Vec<String>) -> String {
    parts.shuffle(rng);
    let mut acc = parts.pop().expect("nonempty");
    while let Some(p) = parts.pop() {
        let p = if rng.gen_bool(0.25) { format!("!({})", p) } else { p };
        acc = match rng.gen_range(0..3) {
            0 => format!("({}) | ({})", acc, p),
            _ => format!("({}) & ({})", acc, p),
        };
    }
    if rng.gen_bool(0.15) {
        format!("!({})", acc)
    } else {
        acc
    }
}

/// Random prenex-free nesting of quantifiers over `bound`, outermost first.
/// `atom(rng, Some(x))` makes an atom whose only bound variable is `x`;
/// `atom(rng, None)` one without bound variables.
fn nested_formula(
    rng: &mut ChaCha8Rng,
    bound: &[&str],
    atom: &mut dyn FnMut(&mut ChaCha8Rng, Option<&str>) -> String,
) -> String {
    fn go(
        rng: &mut ChaCha8Rng,
        bound: &[&str],
        depth: usize,
        atom: &mut dyn FnMut(&mut ChaCha8Rng, Option<&str>) -> String,
    ) -> String {
        if depth == bound.len() {
            return String::new();
        }
        let x = bound[depth];
        let mut parts = Vec::new();
        let k = rng.gen_range(1..=3);
        for _ in 0..k {
            let target = if rng.gen_bool(0.85) {
                if rng.gen_bool(0.7) {
                    Some(x)
                } else {
                    Some(bound[rng.gen_range(0..=depth)])
                }
            } else {
                None
            };
            parts.push(atom(rng, target));
        }
        let inner = go(rng, bound, depth + 1, atom);
        if !inner.is_empty() {
            parts.push(inner);
        }
        let body = combine_parts(rng, parts);
        let q = if rng.gen_bool(0.5) { "E" } else { "A" };
        format!("{} {}:vec. ({})", q, x, body)
    }
    go(rng, bound, 0, atom)
}

/// A shift built from the free vector variables and a small constant.
fn shift(rng: &mut ChaCha8Rng, free: &[&str]) -> VecTerm {
    let mut t = VecTerm::constant(small_rat(rng, 4, 3));
    for a in free {
        if rng.gen_bool(0.5) {
            t = t.add(&VecTerm::var(a).scale(&Rat::from_int(rng.gen_range(-4..=4))));
        }
    }
    t
}

fn bound_term(rng: &mut ChaCha8Rng, x: &str, free: &[&str]) -> VecTerm {
    VecTerm::var(x).scale(&Rat::from_int(nonzero_coeff(rng, 4))).sub(&shift(rng, free))
}

// ---------------------------------------------------------------- criterion 1

fn sentence_true(text: &str, sig: &Signature) -> Result<bool> {
    decide(&parse(text, None)?, sig, DEFAULT_MAX_BLOCK)
}

fn axiom_instances(p: u64) -> Vec<String> {
    let mut out = vec![
        "!(0 = 1)".to_string(),
        "g <= oo".into(),
        "g <= d | d <= g".into(),
        "(g <= d & d <= e) -> g <= e".into(),
        "(g <= d & d <= g) -> g = d".into(),
        "!(g = oo) -> !(g < d & d < g + 1)".into(),
        "oo + 1 = oo".into(),
        "!(g = oo) -> g < g + 1".into(),
        format!("v[{p}](x + y) >= v[{p}](x) | v[{p}](x + y) >= v[{p}](y)"),
        format!("(v[{p}](x) = oo -> x = 0) & (x = 0 -> v[{p}](x) = oo)"),
        format!("v[{p}](1) = 0"),
        format!("v[{p}]({p}) = 1"),
        "g + 0 = g".into(),
        "g + oo = oo".into(),
        "g + d = d + g".into(),
        "g + d + e = e + d + g".into(),
        "g <= d -> g + e <= d + e".into(),
        format!("v[{p}](x) + v[{p}](y) = v[{p}](y) + v[{p}](x)"),
    ];
    for n in -10..=10i64 {
        out.push(format!("v[{}]({}) = {}", p, rat_text(&Rat::prime_pow(p, n)), n));
    }
    let lambdas = [
        Rat::from_int(2),
        Rat::from_int(-3),
        Rat::prime_pow(p, -1),
        Rat::prime_pow(p, 2),
        Rat::new(12, 5).expect("nonzero"),
        Rat::new(-7, 9).expect("nonzero"),
    ];
    for l in &lambdas {
        let u = vp_unchecked(l, p).finite().expect("nonzero");
        out.push(format!("v[{}]({}) = v[{}](x) + {}", p, vt(&VecTerm::var("x").scale(l)), p, u).replace("+ -", "- "));
    }
    let disj: Vec<String> =
        (1..p).map(|w| format!("v[{p}]({}) > v[{p}](x)", vt(&VecTerm::var("x").scale(&Rat::from_int(w as i64)).add(&VecTerm::var("y"))))).collect();
    out.push(format!("(v[{p}](x) = v[{p}](y) & !(v[{p}](x) = oo)) -> ({})", disj.join(" | ")));
    for n in 2..=5 {
        let cover: Vec<String> = (0..n).map(|i| format!("P[{}](g + {})", n, i)).collect();
        out.push(cover.join(" | "));
        out.push(format!("P[{}]({}*g)", n, n));
        out.push(format!("P[{}](oo)", n));
    }
    out
}

fn axiom_sentences(p: u64) -> Vec<String> {
    let mut out = Vec::new();
    for n in -10..=10 {
        out.push(format!("E x:vec. v[{}](x) = {}", p, n));
    }
    out.push(format!("A g:val. E x:vec. v[{}](x) = g", p));
    out.push(format!("A x:vec. A y:vec. v[{p}](x + y) >= v[{p}](x) | v[{p}](x + y) >= v[{p}](y)"));
    out.push(format!("A x:vec. A y:vec. L[{p}](x + y, x) | L[{p}](x + y, y)"));
    out.push(format!("A x:vec. v[{p}]({p}*x) = v[{p}](x) + 1"));
    out.push(format!("A x:vec. (v[{p}](x) = oo -> x = 0) & (x = 0 -> v[{p}](x) = oo)"));
    let disj: Vec<String> = (1..p).map(|w| format!("v[{p}]({w}*x + y) > v[{p}](x)")).collect();
    out.push(format!("A x:vec. A y:vec. (v[{p}](x) = v[{p}](y) & !(v[{p}](x) = oo)) -> ({})", disj.join(" | ")));
    out
}

fn axiom_suite(seed: u64) -> Result<(bool, String)> {
    let ps = [2u64, 3, 5];
    let sig = Signature::full(places(&[fin(2), fin(3), fin(5)]));
    let sorts: BTreeMap<String, Sort> = [("x", Sort::Vec), ("y", Sort::Vec), ("g", Sort::Val), ("d", Sort::Val), ("e", Sort::Val)]
        .into_iter()
        .map(|(n, s)| (n.to_string(), s))
        .collect();
    let mut instances = Vec::new();
    for p in ps {
        for text in axiom_instances(p) {
            let f = parse_with_sorts(&text, None, &sorts)?;
            instances.push((text, f));
        }
    }
    let mut sampler = Sampler::new(seed, &places(&[fin(2), fin(3), fin(5)]), vec![]);
    let mut evaluations = 0;
    for _ in 0..200 {
        let a = sampler.assignment(&sorts);
        for (text, f) in &instances {
            evaluations += 1;
            if !eval_qf(f, &a)? {
                return Ok((false, format!("instance {:?} fails at {}", text, a.to_json())));
            }
        }
    }
    let mut sentences: Vec<String> = ps.iter().flat_map(|&p| axiom_sentences(p)).collect();
    sentences.push("A g:val. !(g = oo) -> E d:val. g + d = 0".into());
    sentences.push("A g:val. A d:val. g + d = d + g".into());
    for n in 2..=5 {
        let alts: Vec<String> = (1..=n).map(|i| format!("g = {}*d + {}", n, i)).collect();
        sentences.push(format!("A g:val. E d:val. {}", alts.join(" | ")));
        sentences.push(format!("A g:val. (P[{n}](g) -> E d:val. g = {n}*d) & ((E d:val. g = {n}*d) -> P[{n}](g))"));
    }
    for s in &sentences {
        if !sentence_true(s, &sig)? {
            return Ok((false, format!("sentence decided false: {}", s)));
        }
    }
    Ok((true, format!("{} instances x 200 samples = {} evaluations true; {} sentences decided true", instances.len(), evaluations, sentences.len())))
}

// ---------------------------------------------------------------- criterion 2

fn finite_atom(rng: &mut ChaCha8Rng, x: Option<&str>, place_of: &BTreeMap<String, u64>, free: &[&str], val_free: bool) -> String {
    let Some(x) = x else {
        let p = *[2u64, 3].choose(rng).expect("nonempty");
        if free.is_empty() {
            return format!("v[{}]({}) >= {}", p, rat_text(&small_rat(rng, 12, 4)), rng.gen_range(-2..=2));
        }
        let t = VecTerm::var(free[0]).sub(&VecTerm::constant(small_rat(rng, 4, 3)));
        return match rng.gen_range(0..3) {
            0 => format!("v[{}]({}) >= {}", p, vt(&t), rng.gen_range(-2..=2)),
            1 => format!("{} = 0", vt(&t)),
            _ => format!("L[{}]({}, {})", p, vt(&t), rat_text(&small_rat(rng, 4, 2))),
        };
    };
    let p = place_of[x];
    let t1 = bound_term(rng, x, free);
    let t2 = bound_term(rng, x, free);
    let k = rng.gen_range(-2..=3);
    match rng.gen_range(0..20) {
        0..=3 => format!("v[{p}]({}) <= v[{p}]({}) + {k}", vt(&t1), vt(&t2)).replace("+ -", "- "),
        4..=8 => {
            let op = ["=", ">=", "<=", ">", "<"].choose(rng).expect("nonempty");
            format!("v[{p}]({}) {op} {k}", vt(&t1))
        }
        9 | 10 if val_free => format!("v[{p}]({}) <= g + {k}", vt(&t1)).replace("+ -", "- "),
        9..=11 => format!("P[{}](v[{p}]({}) + {k})", rng.gen_range(2..=3), vt(&t1)).replace("+ -", "- "),
        12..=14 => format!("L[{p}]({}, {})", vt(&t1), vt(&t2)),
        15 | 16 => format!("Q[{p},{}]({})", rng.gen_range(2..=3), vt(&t1)),
        17 | 18 => {
            let t3 = bound_term(rng, x, free);
            format!("M[{p}]({}, {}, {})", vt(&t1), vt(&t2), vt(&t3))
        }
        _ => format!("{} = 0", vt(&t1)),
    }
}

fn qe_finite_formula(rng: &mut ChaCha8Rng) -> String {
    let nb = match rng.gen_range(0..10) {
        0..=4 => 1,
        5..=8 => 2,
        _ => 3,
    };
    let free: Vec<&str> = if nb < 3 && rng.gen_bool(0.7) { vec!["a"] } else { vec![] };
    let val_free = rng.gen_bool(0.3);
    let bound = &["x", "y", "z"][..nb];
    let place_of: BTreeMap<String, u64> = bound.iter().map(|b| (b.to_string(), *[2u64, 3].choose(rng).expect("nonempty"))).collect();
    nested_formula(rng, bound, &mut |rng, x| finite_atom(rng, x, &place_of, &free, val_free))
}

fn differential(f: &Formula, sig: &Signature, seed: u64, samples: usize) -> Result<Option<String>> {
    let out = eliminate(f, sig, DEFAULT_MAX_BLOCK)?;
    if !out.is_quantifier_free() {
        return Ok(Some(format!("output not quantifier-free: {}", out)));
    }
    let extra: Vec<String> = out.free_vars().keys().filter(|v| !f.free_vars().contains_key(*v)).cloned().collect();
    if !extra.is_empty() {
        return Ok(Some(format!("output has new free variables {:?}", extra)));
    }
    let rep = check_equiv_sampled_with(f, &out, samples, seed, &GridConfig::centers_only(50))?;
    Ok(rep.counterexample.map(|a| format!("{}  vs  {}  at {}", f, out, a.to_json())))
}

fn qe_finite(seed: u64, count: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2);
    let sig = Signature::full(places(&[fin(2), fin(3)]));
    let mut mismatches = Vec::new();
    for i in 0..count {
        let text = qe_finite_formula(&mut rng);
        let f = parse(&text, None)?;
        let outcome = differential(&f, &sig, seed.wrapping_add(i as u64), 6)
            .unwrap_or_else(|e| Some(format!("{}: {}", text, e)));
        if let Some(m) = outcome {
            mismatches.push(format!("#{} {}", i, m));
        }
    }
    summarize(count, "formulas", mismatches)
}

fn summarize(count: usize, what: &str, mismatches: Vec<String>) -> Result<(bool, String)> {
    if mismatches.is_empty() {
        Ok((true, format!("{} {}, 0 mismatches", count, what)))
    } else {
        Ok((false, format!("{} {}, {} mismatches; first: {}", count, what, mismatches.len(), mismatches[0])))
    }
}

// ---------------------------------------------------------------- criterion 3

fn real_atom(rng: &mut ChaCha8Rng, x: Option<&str>, free: &[&str]) -> String {
    let Some(x) = x else {
        if free.is_empty() {
            return "0 = 0".into();
        }
        let t = VecTerm::var(free[0]).sub(&shift(rng, &free[1..]));
        return format!("{} < 0", vt(&t));
    };
    let t1 = bound_term(rng, x, free);
    match rng.gen_range(0..10) {
        0..=5 => {
            let op = ["<", "<=", ">", ">=", "<", "="].choose(rng).expect("nonempty");
            format!("{} {} 0", vt(&t1), op)
        }
        6 | 7 => format!("L[inf]({}, {})", vt(&t1), vt(&bound_term(rng, x, free))),
        _ => format!("L[inf]({}, {})", vt(&t1), vt(&shift(rng, free))),
    }
}

fn qe_real(seed: u64, count: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3);
    let sig = Signature::full(places(&[Place::Inf]));
    let mut mismatches = Vec::new();
    for i in 0..count {
        let nb = rng.gen_range(1..=3);
        let free: Vec<&str> = ["a", "b"].into_iter().take(3 - nb).filter(|_| rng.gen_bool(0.7)).collect();
        let bound = &["x", "y", "z"][..nb];
        let text = nested_formula(&mut rng, bound, &mut |rng, x| real_atom(rng, x, &free));
        let f = parse(&text, None)?;
        let outcome = differential(&f, &sig, seed.wrapping_add(i as u64), 8)
            .unwrap_or_else(|e| Some(format!("{}: {}", text, e)));
        if let Some(m) = outcome {
            mismatches.push(format!("#{} {}", i, m));
        }
    }
    summarize(count, "formulas", mismatches)
}

// ---------------------------------------------------------------- criterion 4

fn residue_capacity(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4);
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for p in [2u64, 3, 5] {
        let sig = Signature::full(places(&[fin(p)]));
        for n in 1..=p + 1 {
            let pi = p as i64;
            let centers: Vec<i64> = (0..n as i64).map(|i| i % pi + pi * rng.gen_range(-2..=2)).collect();
            let conj: Vec<String> = centers.iter().map(|d| format!("v[{}](x - {}) = 0", p, d).replace("- -", "+ ")).collect();
            let text = format!("E x:vec. {}", conj.join(" & "));
            let engine = decide(&parse(&text, None)?, &sig, DEFAULT_MAX_BLOCK)?;
            let forbidden: BTreeSet<i64> = centers.iter().map(|d| d.rem_euclid(pi)).collect();
            let law = forbidden.len() < p as usize;
            let modulus = pi * pi;
            let exhaustive = (0..modulus).any(|x| centers.iter().all(|d| (x - d).rem_euclid(pi) != 0));
            rows.push(format!("p={} n={}:{}", p, n, engine));
            if engine != law || engine != exhaustive {
                bad.push(format!("{} engine={} law={} residues={}", text, engine, law, exhaustive));
            }
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{} instances agree [{}]", rows.len(), rows.join(" "))))
    } else {
        Ok((false, format!("{} disagreements; first: {}", bad.len(), bad[0])))
    }
}

// ---------------------------------------------------------------- criterion 5

/// Basis of the null space of `a` (rows of length `n`).
fn kernel(a: &[Vec<Rat>], n: usize) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(r) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, r);
        let inv = m[row][col].recip().expect("nonzero pivot");
        m[row] = m[row].iter().map(|v| v * &inv).collect();
        for r2 in 0..m.len() {
            if r2 != row && !m[r2][col].is_zero() {
                let f = m[r2][col].clone();
                let pivot_row = m[row].clone();
                for (v, pv) in m[r2].iter_mut().zip(&pivot_row) {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); n];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][free];
        }
        basis.push(v);
    }
    basis
}

fn weak_approx_instance(rng: &mut ChaCha8Rng) -> (String, Vec<String>, BTreeSet<Place>) {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(0..=n.min(3));
    let y0: Vec<Rat> = (0..n).map(|_| small_rat(rng, 6, 4)).collect();
    let a: Vec<Vec<Rat>> = (0..m).map(|_| (0..n).map(|_| Rat::from_int(rng.gen_range(-3..=3))).collect()).collect();
    let ker = kernel(&a, n);
    let pool = [fin(2), fin(3), Place::Inf];
    let k = rng.gen_range(2..=3);
    let chosen: Vec<Place> = pool.choose_multiple(rng, k).copied().collect();
    let names: Vec<String> = (1..=n).map(|j| format!("y{}", j)).collect();
    let mut parts = Vec::new();
    for row in &a {
        let mut lhs = VecTerm::zero();
        let mut b = Rat::zero();
        for (j, c) in row.iter().enumerate() {
            lhs = lhs.add(&VecTerm::var(&names[j]).scale(c));
            b = &b + &(c * &y0[j]);
        }
        if !lhs.is_constant() {
            parts.push(format!("{} = 0", vt(&lhs.add_const(&-&b))));
        }
    }
    for place in &chosen {
        let mut target = y0.clone();
        for basis in &ker {
            let t = small_rat(rng, 6, 3);
            for j in 0..n {
                target[j] = &target[j] + &(&t * &basis[j]);
            }
        }
        for j in 0..n {
            let diff = VecTerm::var(&names[j]).add_const(&-&target[j]);
            match place {
                Place::Finite(p) => parts.push(format!("v[{}]({}) >= {}", p, vt(&diff), rng.gen_range(1..=3))),
                Place::Inf => {
                    let eps = Rat::new(1, rng.gen_range(1..=8)).expect("nonzero");
                    parts.push(format!("{} < {}", vt(&diff), rat_text(&eps)));
                    parts.push(format!("{} > {}", vt(&diff), rat_text(&-&eps)));
                }
            }
        }
    }
    let prefix: String = names.iter().map(|v| format!("E {}:vec. ", v)).collect();
    (format!("{}{}", prefix, parts.join(" & ")), names, chosen.into_iter().collect())
}

fn weak_approximation(seed: u64, count: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5);
    let mut bad = Vec::new();
    for i in 0..count {
        let (text, names, ps) = weak_approx_instance(&mut rng);
        let f = parse(&text, None)?;
        let sig = Signature::full(ps);
        let outcome = (|| -> Result<Option<String>> {
            if !decide(&f, &sig, DEFAULT_MAX_BLOCK)? {
                return Ok(Some("decided false".into()));
            }
            let w = witness(&f, &sig, DEFAULT_MAX_BLOCK)?;
            let mut matrix = &f;
            while let Formula::Exists(_, body) = matrix {
                matrix = body;
            }
            if names.iter().any(|v| !w.vecs.contains_key(v)) || !eval_qf(matrix, &w)? {
                return Ok(Some(format!("witness {} fails", w.to_json())));
            }
            Ok(None)
        })()
        .unwrap_or_else(|e| Some(e.to_string()));
        if let Some(m) = outcome {
            bad.push(format!("#{} {}: {}", i, text, m));
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{} instances decided true, all witnesses verified", count)))
    } else {
        Ok((false, format!("{} of {} failed; first: {}", bad.len(), count, bad[0])))
    }
}

// ---------------------------------------------------------------- criterion 6

fn place_literals(rng: &mut ChaCha8Rng, place: Place) -> Vec<String> {
    let k = rng.gen_range(1..=2);
    let centers = ["0", "1", "-1", "1/2", "2", "1/3", "3"];
    match place {
        Place::Finite(p) => (0..k)
            .map(|_| {
                let d = centers.choose(rng).expect("nonempty");
                let op = ["=", ">=", "<=", "!="].choose(rng).expect("nonempty");
                let c = rng.gen_range(-1..=1);
                let t = format!("v[{}](x - {})", p, d).replace("- -", "+ ");
                if *op == "!=" {
                    format!("!({} = {})", t, c)
                } else {
                    format!("{} {} {}", t, op, c)
                }
            })
            .collect(),
        Place::Inf => {
            let lo = rng.gen_range(-4..=2);
            let w = [2, 4, 8].choose(rng).expect("nonempty");
            match rng.gen_range(0..4) {
                0 => vec![format!("x > {}", lo)],
                1 => vec![format!("x < {}", lo)],
                _ => vec![format!("x > {}", lo), format!("x < {}", lo + w)],
            }
        }
    }
}

fn decoupling(seed: u64, count: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6);
    let pool = [fin(2), fin(3), Place::Inf];
    let x = Var::vec("x");
    let mut bad = Vec::new();
    let mut truths = 0;
    for i in 0..count {
        let k = rng.gen_range(2..=3);
        let chosen: Vec<Place> = pool.choose_multiple(&mut rng, k).copied().collect();
        let sig = Signature::full(chosen.iter().copied().collect());
        let per_place: Vec<Vec<String>> = chosen.iter().map(|&p| place_literals(&mut rng, p)).collect();
        let joint_text = format!("!(x = 0) & {}", per_place.iter().flatten().cloned().collect::<Vec<_>>().join(" & "));
        let matrix = parse(&joint_text, None)?;
        let joint = decide(&Formula::exists(x.clone(), matrix.clone()), &sig, DEFAULT_MAX_BLOCK)?;
        let mut split = true;
        for lits in &per_place {
            let f = parse(&format!("E x:vec. !(x = 0) & {}", lits.join(" & ")), None)?;
            split &= decide(&f, &sig, DEFAULT_MAX_BLOCK)?;
        }
        let oracle = search_witness(&matrix, &[x.clone()], 50)?.is_some();
        truths += joint as usize;
        if joint != split || joint != oracle {
            bad.push(format!("#{} {}: joint={} per-place={} oracle={}", i, joint_text, joint, split, oracle));
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{} conjunctions ({} satisfiable), 0 mismatches", count, truths)))
    } else {
        Ok((false, format!("{} of {} mismatched; first: {}", bad.len(), count, bad[0])))
    }
}

// ---------------------------------------------------------------- criterion 7

fn linear(rng: &mut ChaCha8Rng) -> VecTerm {
    let mut t = VecTerm::constant(small_rat(rng, 4, 3));
    for v in ["x", "y"] {
        if rng.gen_bool(0.6) {
            t = t.add(&VecTerm::var(v).scale(&Rat::from_int(rng.gen_range(-3..=3))));
        }
    }
    t
}

fn one_sorted_atom(rng: &mut ChaCha8Rng) -> String {
    let p = [2u64, 3].choose(rng).expect("nonempty");
    match rng.gen_range(0..7) {
        0..=2 => format!("L[{}]({}, {})", p, vt(&linear(rng)), vt(&linear(rng))),
        3 | 4 => format!("M[{}]({}, {}, {})", p, vt(&linear(rng)), vt(&linear(rng)), vt(&linear(rng))),
        5 => format!("Q[{},{}]({})", p, rng.gen_range(2..=3), vt(&linear(rng))),
        _ => format!("{} = 0", vt(&linear(rng))),
    }
}

fn two_sorted_atom(rng: &mut ChaCha8Rng) -> String {
    let p = [2u64, 3].choose(rng).expect("nonempty");
    let (c1, c2) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
    let text = match rng.gen_range(0..7) {
        0 | 1 => format!("v[{p}]({}) + {c1} <= v[{p}]({}) + {c2}", vt(&linear(rng)), vt(&linear(rng))),
        2 => format!("v[{p}]({}) + {c1} = v[{p}]({}) + {c2}", vt(&linear(rng)), vt(&linear(rng))),
        3 => format!("v[{p}]({}) = {c1}", vt(&linear(rng))),
        4 => format!("P[{}](v[{p}]({}) + {c1})", rng.gen_range(2..=3), vt(&linear(rng))),
        5 => format!("v[{p}]({}) + v[{p}]({}) + {c1} = v[{p}]({})", vt(&linear(rng)), vt(&linear(rng)), vt(&linear(rng))),
        _ => format!("v[{p}]({}) = oo", vt(&linear(rng))),
    };
    text.replace("+ -", "- ")
}

fn qf_combination(rng: &mut ChaCha8Rng, atom: fn(&mut ChaCha8Rng) -> String) -> String {
    let k = rng.gen_range(1..=4);
    let parts: Vec<String> = (0..k).map(|_| atom(rng)).collect();
    combine_parts(rng, parts)
}

fn translation(seed: u64, count: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7);
    let cfg = GridConfig::with_bound(50);
    let mut bad = Vec::new();
    for i in 0..count {
        let one_first = i % 2 == 0;
        let text = qf_combination(&mut rng, if one_first { one_sorted_atom } else { two_sorted_atom });
        let f = parse(&text, None)?;
        let outcome = (|| -> Result<Option<String>> {
            let (a, b) = if one_first {
                let two = to_two_sorted(&f)?;
                let back = to_one_sorted(&two, None)?;
                (two, back)
            } else {
                let one = to_one_sorted(&f, None)?;
                let back = to_two_sorted(&one)?;
                (one, back)
            };
            for g in [&a, &b] {
                let rep = check_equiv_sampled_with(&f, g, 40, seed.wrapping_add(i as u64), &cfg)?;
                if let Some(ce) = rep.counterexample {
                    return Ok(Some(format!("{} vs {} at {}", f, g, ce.to_json())));
                }
            }
            Ok(None)
        })()
        .unwrap_or_else(|e| Some(e.to_string()));
        if let Some(m) = outcome {
            bad.push(format!("#{} {}: {}", i, text, m));
        }
    }
    summarize(count, "formulas round-tripped", bad)
}

// ---------------------------------------------------------------- criterion 8

fn gadget_check(seed: u64) -> Result<(bool, String)> {
    let mut parts = Vec::new();
    for kind in GadgetKind::ALL {
        let rep = gadgets::verify(kind, 1000, seed)?;
        if let Some(ce) = rep.counterexample {
            return Ok((false, format!("{} disagrees at {}", kind, ce.to_json())));
        }
        parts.push(format!("{} {}/{}", kind, rep.samples, rep.samples));
    }
    let refusals = [
        "E x:vec. M[inf](x, x, 2)",
        "A x:vec. M[inf](x, 1, x)",
        "E x:vec. L[2](x, 1) & M[inf](x, x, x)",
        "M[inf](1, 2, 2)",
    ];
    let sig = Signature::full(places(&[fin(2), Place::Inf]));
    for text in refusals {
        match decide(&parse(text, None)?, &sig, DEFAULT_MAX_BLOCK) {
            Err(e) if e.exit_code() == 3 => {}
            other => return Ok((false, format!("{} not refused with code 3: {:?}", text, other))),
        }
    }
    let mult = gadgets::emit(GadgetKind::MultiplicationFromM);
    let closed = ["z", "y", "x"].iter().fold(mult, |f, v| Formula::exists(Var::vec(v), f));
    match decide(&closed, &sig, DEFAULT_MAX_BLOCK) {
        Err(e) if e.exit_code() == 3 => {}
        other => return Ok((false, format!("multiplication gadget not refused: {:?}", other))),
    }
    Ok((true, format!("{}; {} M[inf] queries refused with code 3", parts.join(", "), refusals.len() + 1)))
}

// ---------------------------------------------------------------- criterion 9

/// Named sentences with their expected verdicts.
pub const SENTENCES: [(&str, &str, bool); 16] = [
    ("ultrametric", "A x:vec. A y:vec. L[2](x+y, x) | L[2](x+y, y)", true),
    ("scaling-by-two", "E x:vec. !(x=0) & L[2](2*x, x) & !L[2](x, 2*x)", true),
    ("f2-sphere", "E x:vec. v[2](x)=0 & v[2](x-1)=0", false),
    ("f3-sphere", "E x:vec. v[3](x)=0 & v[3](x-1)=0", true),
    ("f3-three-spheres", "E x:vec. v[3](x)=0 & v[3](x-1)=0 & v[3](x-2)=0", false),
    ("f5-four-spheres", "E x:vec. v[5](x)=0 & v[5](x-1)=0 & v[5](x-2)=0 & v[5](x-3)=0", true),
    ("crt-8-9", "E y:vec. v[2](y-1) >= 3 & v[3](y) >= 2", true),
    ("crt-mixed-signs", "E y:vec. v[2](y) = -1 & v[3](y) = 1", true),
    ("crt-negative", "E x:vec. x < 0 & v[3](x - 1) >= 2", true),
    ("mixed-real-2adic", "E y:vec. y - 1/2 <= 1/4 & 1/2 - y <= 1/4 & v[2](y) = 1", true),
    ("positive-even", "E y:vec. y > 0 & v[2](y) >= 1", true),
    ("units-between-3-and-4", "E x:vec. x > 3 & x < 4 & v[2](x) >= 0 & v[3](x) >= 0", true),
    ("odd-and-even", "E x:vec. v[2](x - 1) >= 3 & v[2](x) >= 1", false),
    ("shifted-ball", "E x:vec. v[2](2*x - 6) >= 5", true),
    ("equal-valuations", "E x:vec. v[3](x) = v[3](x - 1)", true),
    ("unit-ball-not-everything", "A x:vec. L[2](x, 1)", false),
];

/// Oracle verdict: grid search for existential blocks, grid evaluation
/// otherwise.
pub fn oracle_verdict(f: &Formula) -> Result<bool> {
    let mut vars = Vec::new();
    let mut body = f;
    while let Formula::Exists(v, g) = body {
        vars.push(v.clone());
        body = g;
    }
    if body.is_quantifier_free() {
        return Ok(search_witness(body, &vars, 50)?.is_some());
    }
    eval_bounded(f, &Assignment::new(), &GridConfig::centers_only(50))
}

fn sentence_table() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for (name, text, expected) in SENTENCES {
        let f = parse(text, None)?;
        let sig = Signature::full(f.places());
        let engine = decide(&f, &sig, DEFAULT_MAX_BLOCK)?;
        let oracle = oracle_verdict(&f)?;
        if engine != oracle || engine != expected {
            bad.push(format!("{}: engine={} oracle={} expected={}", name, engine, oracle, expected));
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{} sentences agree with the oracle", SENTENCES.len())))
    } else {
        Ok((false, format!("{} disagreements: {}", bad.len(), bad.join("; "))))
    }
}
