//! Translations between the one-sorted surface predicates and the
//! two-sorted valuation language, and between `L_∞` and the order.

use std::collections::BTreeSet;

use crate::ast::{Atom, Comp, Formula, Place, ValTerm, VecTerm};
use crate::error::{Error, Result};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationDirection {
    OneToTwo,
    TwoToOne,
    OrderToL,
    LToOrder,
}

impl std::str::FromStr for TranslationDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sorted" => Ok(TranslationDirection::OneToTwo),
            "one-sorted" => Ok(TranslationDirection::TwoToOne),
            "L" => Ok(TranslationDirection::OrderToL),
            "order" => Ok(TranslationDirection::LToOrder),
            other => Err(Error::Precondition(format!(
                "unknown translation target {:?} (expected two-sorted, one-sorted, order or L)",
                other
            ))),
        }
    }
}

/// Translation of one surface atom at a finite place.
pub fn atom_to_two_sorted(a: &Atom) -> Result<Formula> {
    Ok(Formula::Atom(match a {
        Atom::L(Place::Finite(p), x, y) => Atom::val_le(ValTerm::v(*p, y), ValTerm::v(*p, x)),
        Atom::M(Place::Finite(p), x, y, z) => {
            Atom::val_eq(ValTerm::v(*p, x).add(&ValTerm::v(*p, y)), ValTerm::v(*p, z))
        }
        Atom::Q(Place::Finite(p), n, x) => Atom::div(*n, ValTerm::v(*p, x)),
        Atom::L(Place::Inf, ..) | Atom::M(Place::Inf, ..) | Atom::Q(Place::Inf, ..) => {
            return Err(Error::Unsupported(format!("{} has no two-sorted form at the real place", a)))
        }
        other => other.clone(),
    }))
}

/// `L_p ↦ v_p ≥ v_p`, `M_p ↦ v_p + v_p = v_p`, `Q_{n,p} ↦ P_n(v_p)`.
pub fn to_two_sorted(f: &Formula) -> Result<Formula> {
    f.try_map_atoms(&mut |a| atom_to_two_sorted(a))
}

/// `p^c · t` for the vector term behind a value side of the form
/// `v_p(t) + c`, `c` or `∞`.
fn simple_side(s: &ValTerm, p: u64) -> Option<VecTerm> {
    if s.is_infinite() {
        return Some(VecTerm::zero());
    }
    let scale = Rat::prime_pow(p, s.constant_part());
    match s.comps().iter().collect::<Vec<_>>().as_slice() {
        [] => Some(VecTerm::constant(scale)),
        [(Comp::V(q, t), 1)] if *q == p => Some(t.scale(&scale)),
        _ => None,
    }
}

/// `(t1, t2, p^c)` for a side of the form `v_p(t1) + v_p(t2) + c`.
fn product_side(s: &ValTerm, p: u64) -> Option<(VecTerm, VecTerm, Rat)> {
    if s.is_infinite() {
        return None;
    }
    let scale = Rat::prime_pow(p, s.constant_part());
    match s.comps().iter().collect::<Vec<_>>().as_slice() {
        [(Comp::V(q, t), 2)] if *q == p => Some((t.clone(), t.clone(), scale)),
        [(Comp::V(q1, t1), 1), (Comp::V(q2, t2), 1)] if *q1 == p && *q2 == p => Some((t1.clone(), t2.clone(), scale)),
        _ => None,
    }
}

fn atom_place(a: &Atom) -> Result<Option<u64>> {
    let mut places = BTreeSet::new();
    for c in a.comps() {
        match c {
            Comp::Var(n) => {
                return Err(Error::Unsupported(format!("value variable {} has no one-sorted form", n)));
            }
            Comp::V(p, _) => {
                places.insert(*p);
            }
        }
    }
    if places.len() > 1 {
        return Err(Error::Unsupported(format!("{} mixes valuations of several places", a)));
    }
    Ok(places.into_iter().next())
}

fn lambda(p: Place, a: VecTerm, b: VecTerm) -> Formula {
    Formula::And(vec![Formula::Atom(Atom::L(p, a.clone(), b.clone())), Formula::Atom(Atom::L(p, b, a))])
}

/// Translation of one two-sorted atom back to `L_p`, `M_p`, `Q_{n,p}`.
/// `m_places` lists the primes where `M` and `Q` may be used.
pub fn atom_to_one_sorted(a: &Atom, m_places: Option<&BTreeSet<u64>>) -> Result<Formula> {
    let p = match a {
        Atom::ValLe(..) | Atom::ValEq(..) | Atom::Div(..) => match atom_place(a)? {
            Some(p) => p,
            None => {
                return Ok(match a.eval_ground() {
                    Some(true) => Formula::True,
                    Some(false) => Formula::False,
                    None => Formula::Atom(a.clone()),
                })
            }
        },
        _ => return Ok(Formula::Atom(a.clone())),
    };
    let place = Place::Finite(p);
    let need_m = |what: &str| -> Result<()> {
        match m_places {
            Some(s) if !s.contains(&p) => {
                Err(Error::Unsupported(format!("{} needs {} at {}, which the signature does not provide", a, what, p)))
            }
            _ => Ok(()),
        }
    };
    let inexpressible = || Error::Unsupported(format!("{} has no one-sorted form", a));
    match a {
        Atom::ValLe(l, r) => {
            let (x, y) = (simple_side(l, p).ok_or_else(inexpressible)?, simple_side(r, p).ok_or_else(inexpressible)?);
            // v(x) ≤ v(y) ⟺ |y| ≤ |x|
            Ok(Formula::Atom(Atom::L(place, y, x)))
        }
        Atom::ValEq(l, r) => {
            if let (Some(x), Some(y)) = (simple_side(l, p), simple_side(r, p)) {
                if x.is_zero() {
                    return Ok(Formula::Atom(Atom::vec_eq(y)));
                }
                if y.is_zero() {
                    return Ok(Formula::Atom(Atom::vec_eq(x)));
                }
                return Ok(lambda(place, x, y));
            }
            let (prod, other) = match (product_side(l, p), product_side(r, p)) {
                (Some(pr), None) => (pr, r),
                (None, Some(pr)) => (pr, l),
                _ => return Err(inexpressible()),
            };
            let z = simple_side(other, p).ok_or_else(inexpressible)?;
            need_m("M")?;
            let (t1, t2, scale) = prod;
            Ok(Formula::Atom(Atom::M(place, t1.scale(&scale), t2, z)))
        }
        Atom::Div(n, s) => {
            let t = simple_side(s, p).ok_or_else(inexpressible)?;
            need_m("Q")?;
            Ok(Formula::Atom(Atom::Q(place, *n, t)))
        }
        _ => unreachable!(),
    }
}

/// Inverse of [`to_two_sorted`] on quantifier-free formulas without value
/// variables whose value atoms compare single valuations up to constants,
/// equate a sum of two valuations with one, or test `P_n` of one valuation.
pub fn to_one_sorted(f: &Formula, m_places: Option<&BTreeSet<u64>>) -> Result<Formula> {
    if !f.is_quantifier_free() {
        return Err(Error::Precondition("one-sorted translation needs a quantifier-free formula".into()));
    }
    f.try_map_atoms(&mut |a| atom_to_one_sorted(a, m_places))
}

/// `0 ≤ t ↦ L_∞(t − 1, t + 1)`; `0 < t ↦ ¬L_∞(−t − 1, −t + 1)`.
pub fn order_to_l(f: &Formula) -> Formula {
    let one = Rat::one();
    f.map_atoms(&mut |a| match a {
        Atom::Ord { term, strict: false } => {
            Formula::Atom(Atom::L(Place::Inf, term.add_const(&-one.clone()), term.add_const(&one)))
        }
        Atom::Ord { term, strict: true } => {
            let n = term.neg();
            Formula::not(Formula::Atom(Atom::L(Place::Inf, n.add_const(&-one.clone()), n.add_const(&one))))
        }
        other => Formula::Atom(other.clone()),
    })
}

/// `L_∞(x, y) ↦ y≥x≥0 ∨ y≥−x≥0 ∨ −y≥x≥0 ∨ −y≥−x≥0`.
pub fn l_inf_to_order(x: &VecTerm, y: &VecTerm) -> Formula {
    let zero = VecTerm::zero();
    let case = |a: VecTerm, b: VecTerm| {
        Formula::And(vec![Formula::Atom(Atom::le(&a, &b)), Formula::Atom(Atom::le(&zero, &a))])
    };
    Formula::Or(vec![
        case(x.clone(), y.clone()),
        case(x.neg(), y.clone()),
        case(x.clone(), y.neg()),
        case(x.neg(), y.neg()),
    ])
}

/// Replaces every `L_∞` atom by its order definition.
pub fn l_to_order(f: &Formula) -> Result<Formula> {
    f.try_map_atoms(&mut |a| match a {
        Atom::L(Place::Inf, x, y) => Ok(l_inf_to_order(x, y)),
        Atom::M(Place::Inf, ..) | Atom::Q(Place::Inf, ..) => {
            Err(Error::Unsupported(format!("{} cannot be expressed with the order", a)))
        }
        other => Ok(Formula::Atom(other.clone())),
    })
}

pub fn translate(f: &Formula, dir: TranslationDirection, m_places: Option<&BTreeSet<u64>>) -> Result<Formula> {
    match dir {
        TranslationDirection::OneToTwo => to_two_sorted(f),
        TranslationDirection::TwoToOne => to_one_sorted(f, m_places),
        TranslationDirection::OrderToL => Ok(order_to_l(f)),
        TranslationDirection::LToOrder => l_to_order(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_equiv_sampled, eval_qf, Assignment};
    use crate::parser::parse;

    fn p(s: &str) -> Formula {
        parse(s, None).unwrap()
    }

    #[test]
    fn one_to_two_examples() {
        assert_eq!(to_two_sorted(&p("L[2](x, 1)")).unwrap(), p("0 <= v[2](x)"));
        assert_eq!(to_two_sorted(&p("M[3](x, x, y)")).unwrap(), p("2*v[3](x) = v[3](y)"));
        assert_eq!(to_two_sorted(&p("Q[5,2](x)")).unwrap(), p("P[2](v[5](x))"));
        assert!(matches!(to_two_sorted(&p("L[inf](x, 1)")), Err(Error::Unsupported(_))));
    }

    #[test]
    fn two_to_one_examples() {
        assert_eq!(to_one_sorted(&p("v[2](y) <= v[2](x)"), None).unwrap(), p("L[2](x, y)"));
        let f = to_one_sorted(&p("v[2](x) = v[2](y) + 1"), None).unwrap();
        assert_eq!(f, p("L[2](x, 2*y) & L[2](2*y, x)"));
        assert_eq!(to_one_sorted(&p("v[2](x) = oo"), None).unwrap(), p("x = 0"));
        assert_eq!(to_one_sorted(&p("P[2](v[5](x) + 1)"), None).unwrap(), p("Q[5,2](5*x)"));
        let m = to_one_sorted(&p("v[3](x) + v[3](y) = v[3](z) + 1"), None).unwrap();
        assert!(check_equiv_sampled(&m, &p("v[3](x) + v[3](y) = v[3](z) + 1"), 300, 3).unwrap().passed());
    }

    #[test]
    fn two_to_one_rejections() {
        let only2: BTreeSet<u64> = BTreeSet::new();
        assert!(to_one_sorted(&p("2*v[2](x) = v[2](y)"), Some(&only2)).is_err());
        assert!(to_one_sorted(&p("v[2](x) <= v[3](y)"), None).is_err());
        assert!(to_one_sorted(&p("E g:val. g <= v[2](x)"), None).is_err());
        assert!(to_one_sorted(&p("v[2](x) + v[2](y) <= v[2](z)"), None).is_err());
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_to_l(&p("x <= y")), p("L[inf](y - x - 1, y - x + 1)"));
        let a = Assignment::new().with_vec("x", Rat::from_int(2)).with_vec("y", Rat::from_int(5));
        assert!(eval_qf(&p("L[inf](2, 4)"), &a).unwrap());
        assert!(eval_qf(&order_to_l(&p("x <= y")), &a).unwrap());
        let four = l_to_order(&p("L[inf](x, y)")).unwrap();
        let b = Assignment::new().with_vec("x", Rat::from_int(-3)).with_vec("y", Rat::from_int(5));
        assert!(eval_qf(&four, &b).unwrap());
        // second branch: y ≥ −x ≥ 0
        if let Formula::Or(branches) = &four {
            assert!(eval_qf(&branches[1], &b).unwrap());
        }
        assert!(l_to_order(&p("M[inf](x, y, 1)")).is_err());
    }

    #[test]
    fn order_translations_are_faithful() {
        for text in ["x <= y", "x < y", "L[inf](x, y)", "L[inf](x - 1/2, 1/4)", "!(2*x < y + 3)"] {
            let f = p(text);
            assert!(check_equiv_sampled(&f, &order_to_l(&f), 300, 1).unwrap().passed(), "{}", text);
            assert!(check_equiv_sampled(&f, &l_to_order(&f).unwrap(), 300, 2).unwrap().passed(), "{}", text);
        }
    }
}
