//! Definability formulas over the real place, checked against the relations
//! they define.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{Atom, Formula, Place, VecTerm};
use crate::error::{Error, Result};
use crate::oracle::{eval_qf, Assignment, Sampler};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GadgetKind {
    OrderFromL,
    NonNeg,
    MultiplicationFromM,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 3] = [GadgetKind::OrderFromL, GadgetKind::NonNeg, GadgetKind::MultiplicationFromM];

    pub fn vars(self) -> &'static [&'static str] {
        match self {
            GadgetKind::OrderFromL => &["x", "y"],
            GadgetKind::NonNeg => &["x"],
            GadgetKind::MultiplicationFromM => &["x", "y", "z"],
        }
    }

    /// The relation the gadget defines.
    pub fn ground_truth(self, args: &[Rat]) -> bool {
        match self {
            GadgetKind::OrderFromL => args[0] <= args[1],
            GadgetKind::NonNeg => !args[0].is_negative(),
            GadgetKind::MultiplicationFromM => &args[0] * &args[1] == args[2],
        }
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GadgetKind::OrderFromL => "order",
            GadgetKind::NonNeg => "nonneg",
            GadgetKind::MultiplicationFromM => "mult",
        })
    }
}

impl std::str::FromStr for GadgetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "order" => Ok(GadgetKind::OrderFromL),
            "nonneg" => Ok(GadgetKind::NonNeg),
            "mult" => Ok(GadgetKind::MultiplicationFromM),
            other => Err(Error::Precondition(format!("unknown gadget {:?} (expected order, nonneg or mult)", other))),
        }
    }
}

fn nonneg(t: &VecTerm) -> Formula {
    let one = Rat::one();
    Formula::atom(Atom::L(Place::Inf, t.add_const(&-&one), t.add_const(&one)))
}

pub fn emit(kind: GadgetKind) -> Formula {
    let (x, y, z) = (VecTerm::var("x"), VecTerm::var("y"), VecTerm::var("z"));
    match kind {
        GadgetKind::OrderFromL => nonneg(&y.sub(&x)),
        GadgetKind::NonNeg => nonneg(&x),
        GadgetKind::MultiplicationFromM => {
            let psi = |a: &VecTerm, b: &VecTerm, c: &VecTerm| Formula::And(vec![nonneg(a), nonneg(b), nonneg(c)]);
            Formula::And(vec![
                Formula::atom(Atom::M(Place::Inf, x.clone(), y.clone(), z.clone())),
                Formula::Or(vec![
                    psi(&x, &y, &z),
                    psi(&x.neg(), &y.neg(), &z),
                    psi(&x.neg(), &y, &z.neg()),
                    psi(&x, &y.neg(), &z.neg()),
                ]),
            ])
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetReport {
    pub kind: GadgetKind,
    pub samples: usize,
    pub counterexample: Option<Assignment>,
}

impl GadgetReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Argument tuples: every sign pattern over `{−a, 0, a}` first, then seeded
/// samples; for multiplication the third argument is the product (up to
/// sign) in most samples so that both truth values occur.
fn sample_args(kind: GadgetKind, samples: usize, seed: u64) -> Vec<Vec<Rat>> {
    let n = kind.vars().len();
    let mut sampler = Sampler::new(seed, &BTreeSet::new(), vec![]);
    let mut out = Vec::with_capacity(samples);
    let mut pattern = vec![0usize; n];
    let base = [Rat::new(-2, 3).expect("nonzero"), Rat::zero(), Rat::new(3, 2).expect("nonzero")];
    loop {
        if out.len() == samples {
            return out;
        }
        let mut args: Vec<Rat> = pattern.iter().map(|&k| base[k].clone()).collect();
        if kind == GadgetKind::MultiplicationFromM && pattern[2] != 1 {
            let prod = &args[0] * &args[1];
            args[2] = if pattern[2] == 0 { -prod } else { prod };
        }
        out.push(args);
        let mut k = 0;
        while k < n && pattern[k] == 2 {
            pattern[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        pattern[k] += 1;
    }
    while out.len() < samples {
        let mut args: Vec<Rat> = (0..n).map(|_| sampler.rat()).collect();
        if kind == GadgetKind::MultiplicationFromM {
            let prod = &args[0] * &args[1];
            match out.len() % 4 {
                0 | 1 => args[2] = prod,
                2 => args[2] = -prod,
                _ => {}
            }
        }
        out.push(args);
    }
    out
}

pub fn verify(kind: GadgetKind, samples: usize, seed: u64) -> Result<GadgetReport> {
    let f = emit(kind);
    for (i, args) in sample_args(kind, samples, seed).into_iter().enumerate() {
        let mut a = Assignment::new();
        for (name, v) in kind.vars().iter().zip(&args) {
            a = a.with_vec(name, v.clone());
        }
        if eval_qf(&f, &a)? != kind.ground_truth(&args) {
            return Ok(GadgetReport { kind, samples: i + 1, counterexample: Some(a) });
        }
    }
    Ok(GadgetReport { kind, samples, counterexample: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::{decide, Signature, DEFAULT_MAX_BLOCK};
    use crate::parser::parse;

    fn at(kind: GadgetKind, vals: &[&str]) -> bool {
        let mut a = Assignment::new();
        for (n, v) in kind.vars().iter().zip(vals) {
            a = a.with_vec(n, v.parse().unwrap());
        }
        eval_qf(&emit(kind), &a).unwrap()
    }

    #[test]
    fn emitted_forms() {
        assert_eq!(emit(GadgetKind::OrderFromL), parse("L[inf](y - x - 1, y - x + 1)", None).unwrap());
        assert_eq!(emit(GadgetKind::NonNeg), parse("L[inf](x - 1, x + 1)", None).unwrap());
        let printed = emit(GadgetKind::MultiplicationFromM).to_string();
        assert!(printed.starts_with("M[inf](x, y, z) & "), "{}", printed);
        assert_eq!(parse(&printed, None).unwrap(), emit(GadgetKind::MultiplicationFromM));
    }

    #[test]
    fn spot_values() {
        assert!(at(GadgetKind::OrderFromL, &["2", "5"]));
        assert!(!at(GadgetKind::NonNeg, &["-1/3"]));
        assert!(at(GadgetKind::MultiplicationFromM, &["2/3", "-3", "-2"]));
        assert!(!at(GadgetKind::MultiplicationFromM, &["2/3", "-3", "2"]));
        assert!(at(GadgetKind::MultiplicationFromM, &["0", "-3", "0"]));
    }

    #[test]
    fn sampled_agreement() {
        for kind in GadgetKind::ALL {
            let rep = verify(kind, 1000, 17).unwrap();
            assert!(rep.passed(), "{:?}", rep);
        }
    }

    #[test]
    fn engine_refuses_multiplication() {
        let f = Formula::exists(crate::ast::Var::vec("x"), Formula::exists(crate::ast::Var::vec("y"), Formula::exists(crate::ast::Var::vec("z"), emit(GadgetKind::MultiplicationFromM))));
        let sig = Signature::full([Place::Inf].into_iter().collect());
        assert!(matches!(decide(&f, &sig, DEFAULT_MAX_BLOCK), Err(Error::Unsupported(_))));
    }
}
