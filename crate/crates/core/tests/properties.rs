use std::collections::BTreeSet;

use proptest::prelude::*;

use placeq::acceptance::oracle_verdict;
use placeq::ast::{Atom, Formula, Place, VecTerm};
use placeq::combine::{decide, eliminate, witness, Signature, DEFAULT_MAX_BLOCK};
use placeq::error::Error;
use placeq::gadgets::{emit, GadgetKind};
use placeq::interpret::{l_inf_to_order, l_to_order, to_one_sorted, to_two_sorted};
use placeq::oracle::{check_equiv_sampled, check_equiv_sampled_with, eval_qf, search_witness, Assignment, GridConfig};
use placeq::parser::parse;
use placeq::presburger::exists_val;
use placeq::rational::Rat;

fn lin(parts: &[(i64, &str)], num: i64, den: i64) -> String {
    let mut out = String::new();
    for &(c, x) in parts.iter().filter(|(c, _)| *c != 0) {
        let sign = if c < 0 { "-" } else { "+" };
        if out.is_empty() {
            out = format!("{}{}*{}", if c < 0 { "-" } else { "" }, c.abs(), x);
        } else {
            out = format!("{} {} {}*{}", out, sign, c.abs(), x);
        }
    }
    let k = if den == 1 { num.abs().to_string() } else { format!("{}/{}", num.abs(), den) };
    if out.is_empty() {
        return format!("{}{}", if num < 0 { "-" } else { "" }, k);
    }
    if num == 0 {
        return out;
    }
    format!("{} {} {}", out, if num < 0 { "-" } else { "+" }, k)
}

fn off(k: i64) -> String {
    if k < 0 {
        format!("- {}", -k)
    } else {
        format!("+ {}", k)
    }
}

prop_compose! {
    fn term_in(vars: &'static [&'static str])(cs in proptest::collection::vec(-3i64..=3, vars.len()), num in -4i64..=4, den in 1i64..=3) -> String {
        let parts: Vec<(i64, &str)> = cs.into_iter().zip(vars.iter().copied()).collect();
        lin(&parts, num, den)
    }
}

fn finite_place() -> impl Strategy<Value = u64> {
    prop_oneof![Just(2u64), Just(3u64)]
}

fn atom_in(vars: &'static [&'static str], real: bool) -> BoxedStrategy<String> {
    let t = || term_in(vars);
    let mut options: Vec<BoxedStrategy<String>> = vec![
        (finite_place(), t(), t(), -2i64..=2).prop_map(|(p, a, b, k)| format!("v[{p}]({a}) <= v[{p}]({b}) {}", off(k))).boxed(),
        (finite_place(), t(), t()).prop_map(|(p, a, b)| format!("L[{p}]({a}, {b})")).boxed(),
        (finite_place(), t(), t(), t()).prop_map(|(p, a, b, c)| format!("M[{p}]({a}, {b}, {c})")).boxed(),
        (finite_place(), 2u64..=3, t()).prop_map(|(p, n, a)| format!("Q[{p},{n}]({a})")).boxed(),
        (finite_place(), 2u64..=3, t(), -2i64..=2).prop_map(|(p, n, a, k)| format!("P[{n}](v[{p}]({a}) {})", off(k))).boxed(),
        t().prop_map(|a| format!("{a} = 0")).boxed(),
    ];
    if real {
        options.push((t(), prop_oneof![Just("<"), Just("<=")]).prop_map(|(a, op)| format!("{a} {op} 0")).boxed());
        options.push((t(), t()).prop_map(|(a, b)| format!("L[inf]({a}, {b})")).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

fn formula_in(vars: &'static [&'static str], real: bool) -> impl Strategy<Value = String> {
    atom_in(vars, real).prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| format!("!({f})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) | ({b})")),
        ]
    })
}

/// Atoms in `x` at the single place `p`, with `y` free.
fn single_place_atom(p: u64) -> BoxedStrategy<String> {
    let t = || term_in(&["x", "y"]);
    let k = -2i64..=2;
    prop_oneof![
        (t(), t(), k.clone()).prop_map(move |(a, b, k)| format!("v[{p}]({a}) <= v[{p}]({b}) {}", off(k))),
        (t(), k.clone()).prop_map(move |(a, k)| format!("v[{p}]({a}) = {k}")),
        (t(), t()).prop_map(move |(a, b)| format!("L[{p}]({a}, {b})")),
        (2u64..=3, t()).prop_map(move |(n, a)| format!("Q[{p},{n}]({a})")),
    ]
    .boxed()
}

fn single_place_body(p: u64) -> impl Strategy<Value = String> {
    single_place_atom(p).prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| format!("!({f})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) | ({b})")),
        ]
    })
}

fn closed_body() -> impl Strategy<Value = (u64, String)> {
    finite_place().prop_flat_map(|p| {
        let t = || term_in(&["x"]);
        let atom = prop_oneof![
            (t(), -2i64..=2).prop_map(move |(a, k)| format!("v[{p}]({a}) = {k}")),
            (t(), t()).prop_map(move |(a, b)| format!("L[{p}]({a}, {b})")),
            (2u64..=3, t()).prop_map(move |(n, a)| format!("Q[{p},{n}]({a})")),
        ];
        let body = atom.prop_recursive(2, 6, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| format!("!({f})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) | ({b})")),
            ]
        });
        (Just(p), body)
    })
}

fn rat() -> impl Strategy<Value = Rat> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| Rat::new(n, d).unwrap())
}

fn p(s: &str) -> Formula {
    parse(s, None).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

fn sig_of(ps: &[Place]) -> Signature {
    Signature::full(ps.iter().copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn print_parse_round_trip(s in formula_in(&["x", "y"], true)) {
        let f = p(&s);
        prop_assert_eq!(p(&f.to_string()), f);
    }

    #[test]
    fn parse_errors_point_inside_input(s in formula_in(&["x", "y"], true), cut in 0usize..200, junk in prop_oneof![Just("$"), Just(")"), Just("&"), Just("v[4]")]) {
        let cut = cut.min(s.len());
        let bad = format!("{}{}", &s[..cut], junk);
        if let Err(Error::Parse { span, .. }) = parse(&bad, None) {
            prop_assert!(span.start <= span.end && span.end <= bad.len(), "{:?} in {:?}", span, bad);
        }
    }

    #[test]
    fn normal_forms_preserve_truth(s in formula_in(&["x", "y"], true), seed in any::<u64>()) {
        let f = p(&s);
        prop_assert!(check_equiv_sampled(&f, &f.nnf(), 30, seed).unwrap().passed());
        prop_assert!(check_equiv_sampled(&f, &f.to_dnf().unwrap(), 30, seed).unwrap().passed());
    }

    #[test]
    fn substitution_is_additive(a in term_in(&["x", "y"]), b in term_in(&["x", "y"]), s in term_in(&["y"])) {
        let (ta, tb, ts) = (term(&a), term(&b), term(&s));
        prop_assert_eq!(ta.add(&tb).substitute("x", &ts), ta.substitute("x", &ts).add(&tb.substitute("x", &ts)));
    }

    #[test]
    fn sort_checker_rejects_misuse(t in term_in(&["x"]), q in finite_place()) {
        let cases = [
            format!("E g:val. E z:vec. {} + z + g < 0", t),
            format!("E y:vec. v[{}]({}) <= y", q, t),
            format!("E g:val. L[{}](g, {})", q, t),
        ];
        for c in cases {
            prop_assert!(matches!(parse(&c, None), Err(Error::IllSorted(_))), "{}", c);
        }
    }

    #[test]
    fn translations_are_faithful(s in formula_in(&["x", "y"], true), seed in any::<u64>()) {
        let f = p(&s);
        let two = to_two_sorted(&l_to_order(&f).unwrap()).unwrap();
        prop_assert!(two.is_quantifier_free());
        prop_assert!(check_equiv_sampled(&f, &two, 40, seed).unwrap().passed());
        let back = to_one_sorted(&two, None).unwrap();
        prop_assert!(back.is_quantifier_free());
        prop_assert!(check_equiv_sampled(&f, &back, 40, seed).unwrap().passed());
    }

    #[test]
    fn real_absolute_value_comparisons(x in rat(), y in rat()) {
        let (tx, ty) = (VecTerm::constant(x.clone()), VecTerm::constant(y.clone()));
        let a = Assignment::new();
        let l = eval_qf(&Formula::atom(Atom::L(Place::Inf, tx.clone(), ty.clone())), &a).unwrap();
        prop_assert_eq!(l, eval_qf(&l_inf_to_order(&tx, &ty), &a).unwrap());
        prop_assert_eq!(l, x.abs() <= y.abs());
        let d = ty.sub(&tx);
        let one = Rat::one();
        let ord = Formula::atom(Atom::L(Place::Inf, d.add_const(&-&one), d.add_const(&one)));
        prop_assert_eq!(eval_qf(&ord, &a).unwrap(), x <= y);
    }

    #[test]
    fn gadgets_match_ground_truth(x in rat(), y in rat(), z in rat(), product in any::<bool>()) {
        let z = if product { &x * &y } else { z };
        for kind in GadgetKind::ALL {
            let args = [x.clone(), y.clone(), z.clone()];
            let mut a = Assignment::new();
            for (n, v) in kind.vars().iter().zip(&args) {
                a = a.with_vec(n, v.clone());
            }
            prop_assert_eq!(eval_qf(&emit(kind), &a).unwrap(), kind.ground_truth(&args[..kind.vars().len()]));
        }
    }

    #[test]
    fn witness_search_is_monotone(s in formula_in(&["x"], true), n in 1u64..8, extra in 1u64..6) {
        let f = p(&s);
        let vars = [placeq::ast::Var::vec("x")];
        if let Some(w) = search_witness(&f, &vars, n).unwrap() {
            prop_assert!(eval_qf(&f, &w).unwrap());
            prop_assert!(search_witness(&f, &vars, n + extra).unwrap().is_some());
        }
    }
}

fn term(s: &str) -> VecTerm {
    match p(&format!("{} = 0", s)) {
        Formula::Atom(Atom::VecEq(t)) => t,
        Formula::True | Formula::False => VecTerm::constant(s.parse().unwrap()),
        other => panic!("{:?}", other),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn elimination_agrees_with_oracle((q, body) in finite_place().prop_flat_map(|q| (Just(q), single_place_body(q))), forall in any::<bool>(), seed in any::<u64>()) {
        let f = p(&format!("{} x:vec. {}", if forall { "A" } else { "E" }, body));
        let sig = sig_of(&[Place::Finite(q)]);
        let out = eliminate(&f, &sig, DEFAULT_MAX_BLOCK).unwrap();
        prop_assert!(out.is_quantifier_free());
        prop_assert!(!out.free_vars().contains_key("x"));
        let rep = check_equiv_sampled_with(&f, &out, 8, seed, &GridConfig::centers_only(50)).unwrap();
        prop_assert!(rep.passed(), "{} vs {} at {:?}", f, out, rep.counterexample);
    }

    #[test]
    fn decisions_are_consistent((q, body) in closed_body(), (_, other) in closed_body()) {
        let f = p(&format!("E x:vec. {}", body));
        let g = p(&format!("E x:vec. {}", other.replace("v[2]", &format!("v[{}]", q)).replace("v[3]", &format!("v[{}]", q)).replace("L[2]", &format!("L[{}]", q)).replace("L[3]", &format!("L[{}]", q)).replace("Q[2,", &format!("Q[{},", q)).replace("Q[3,", &format!("Q[{},", q))));
        let sig = sig_of(&[Place::Finite(q)]);
        let df = decide(&f, &sig, DEFAULT_MAX_BLOCK).unwrap();
        let dg = decide(&g, &sig, DEFAULT_MAX_BLOCK).unwrap();
        prop_assert_eq!(df, oracle_verdict(&f).unwrap(), "{}", f);
        prop_assert_eq!(df, decide(&Formula::not(Formula::not(f.clone())), &sig, DEFAULT_MAX_BLOCK).unwrap());
        prop_assert_eq!(df && dg, decide(&Formula::and(vec![f.clone(), g]), &sig, DEFAULT_MAX_BLOCK).unwrap());
        if df {
            let w = witness(&f, &sig, DEFAULT_MAX_BLOCK).unwrap();
            let Formula::Exists(_, matrix) = &f else { unreachable!() };
            prop_assert!(eval_qf(matrix, &w).unwrap(), "{} at {}", f, w);
        }
    }

    #[test]
    fn value_elimination(q in finite_place(), k1 in -3i64..=3, k2 in -3i64..=3, c in 1i64..=3, n in 2u64..=4, r in 0i64..4, strict in any::<bool>(), seed in any::<u64>()) {
        let op = if strict { "<" } else { "<=" };
        let f = p(&format!("v[{q}](x) {} {op} {c}*g & g <= v[{q}](y) {} & P[{n}](g + {r})", off(k1), off(k2)));
        let out = exists_val(&f, "g").unwrap();
        prop_assert!(!out.free_vars().contains_key("g"));
        let mut bad = false;
        out.visit_atoms(&mut |a| bad |= matches!(a, Atom::Div(m, _) if *m < 2));
        prop_assert!(!bad, "{}", out);
        let q_f = Formula::exists(placeq::ast::Var::val("g"), f);
        prop_assert!(check_equiv_sampled(&q_f, &out, 20, seed).unwrap().passed(), "{}", out);
    }
}

#[test]
fn places_of_generated_formulas_are_declared() {
    let allowed: BTreeSet<Place> = [Place::Finite(2), Place::Finite(3), Place::Inf].into_iter().collect();
    let f = p("L[2](x, y) & M[3](x, y, 1) | L[inf](x, 2)");
    assert!(f.places().is_subset(&allowed));
}
