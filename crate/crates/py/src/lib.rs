//! Python bindings.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use placeq::ast::{Formula, Place, Sort};
use placeq::combine::{self, Signature, DEFAULT_MAX_BLOCK};
use placeq::gadgets::{self, GadgetKind};
use placeq::interpret::{self, TranslationDirection};
use placeq::oracle::{self, Assignment};
use placeq::rational::{self, Rat, ValInt};
use placeq::{acceptance, parser, Error};

create_exception!(placeq, PlaceqError, PyException);
create_exception!(placeq, ParseError, PlaceqError);
create_exception!(placeq, UnsupportedError, PlaceqError);
create_exception!(placeq, SortError, PlaceqError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => ParseError::new_err(msg),
        3 => UnsupportedError::new_err(msg),
        4 => SortError::new_err(msg),
        _ => PlaceqError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for placeq::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "Formula", module = "placeq", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyFormula {
    inner: Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    #[pyo3(signature = (text, places = None))]
    fn new(text: &str, places: Option<Vec<String>>) -> PyResult<Self> {
        let places = places.map(|ps| place_set(&ps)).transpose()?;
        Ok(PyFormula { inner: parser::parse(text, places.as_ref()).py()? })
    }

    fn is_quantifier_free(&self) -> bool {
        self.inner.is_quantifier_free()
    }

    /// Free variables with their sorts ("vec" or "val").
    fn free_vars(&self) -> BTreeMap<String, &'static str> {
        self.inner
            .free_vars()
            .into_iter()
            .map(|(k, s)| (k, if s == Sort::Vec { "vec" } else { "val" }))
            .collect()
    }

    fn places(&self) -> Vec<String> {
        self.inner.places().iter().map(Place::to_string).collect()
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn nnf(&self) -> Self {
        PyFormula { inner: self.inner.nnf() }
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }
}

#[derive(FromPyObject)]
enum FormulaArg {
    Parsed(PyFormula),
    Text(String),
}

impl FormulaArg {
    fn formula(self) -> PyResult<Formula> {
        match self {
            FormulaArg::Parsed(f) => Ok(f.inner),
            FormulaArg::Text(s) => parser::parse(&s, None).py(),
        }
    }
}

fn place_set(ps: &[String]) -> PyResult<BTreeSet<Place>> {
    ps.iter().map(|p| p.parse::<Place>()).collect::<placeq::Result<_>>().py()
}

fn signature(f: &Formula, places: Option<Vec<String>>, m_places: Option<Vec<u64>>) -> PyResult<Signature> {
    let s0 = match places {
        Some(ps) => place_set(&ps)?,
        None => f.places(),
    };
    match m_places {
        Some(m) => Signature::new(s0, m.into_iter().collect()).py(),
        None => Ok(Signature::full(s0)),
    }
}

fn assignment(f: &Formula, values: BTreeMap<String, String>) -> PyResult<Assignment> {
    let sorts = f.free_vars();
    let text: Vec<String> = values.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
    Assignment::parse(&text.join(","), &sorts).py()
}

fn assignment_dict(a: &Assignment) -> BTreeMap<String, String> {
    let mut out: BTreeMap<String, String> = a.vecs.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
    out.extend(a.vals.iter().map(|(k, v)| (k.clone(), v.to_string())));
    out
}

/// Decides a sentence.
#[pyfunction]
#[pyo3(signature = (formula, places = None, m_places = None, max_block = DEFAULT_MAX_BLOCK))]
fn decide(py: Python<'_>, formula: FormulaArg, places: Option<Vec<String>>, m_places: Option<Vec<u64>>, max_block: usize) -> PyResult<bool> {
    let f = formula.formula()?;
    let sig = signature(&f, places, m_places)?;
    py.detach(|| combine::decide(&f, &sig, max_block)).py()
}

/// Quantifier-free equivalent, in one-sorted syntax when it has one.
#[pyfunction]
#[pyo3(signature = (formula, places = None, m_places = None, max_block = DEFAULT_MAX_BLOCK))]
fn eliminate(py: Python<'_>, formula: FormulaArg, places: Option<Vec<String>>, m_places: Option<Vec<u64>>, max_block: usize) -> PyResult<PyFormula> {
    let f = formula.formula()?;
    let sig = signature(&f, places, m_places)?;
    let g = py.detach(|| combine::eliminate(&f, &sig, max_block)).py()?;
    let g = interpret::to_one_sorted(&g, Some(&sig.s1)).unwrap_or(g);
    Ok(PyFormula { inner: g })
}

/// Values for the leading existential variables, as rational strings.
#[pyfunction]
#[pyo3(signature = (formula, places = None, m_places = None, max_block = DEFAULT_MAX_BLOCK))]
fn witness(py: Python<'_>, formula: FormulaArg, places: Option<Vec<String>>, m_places: Option<Vec<u64>>, max_block: usize) -> PyResult<BTreeMap<String, String>> {
    let f = formula.formula()?;
    let sig = signature(&f, places, m_places)?;
    let a = py.detach(|| combine::witness(&f, &sig, max_block)).py()?;
    Ok(assignment_dict(&a))
}

/// Exact truth value under `values`; quantifiers are searched on the grid.
#[pyfunction(name = "eval")]
#[pyo3(signature = (formula, values = BTreeMap::new(), bound = 50))]
fn eval_formula(formula: FormulaArg, values: BTreeMap<String, String>, bound: u64) -> PyResult<bool> {
    let f = formula.formula()?;
    let a = assignment(&f, values)?;
    if f.is_quantifier_free() {
        oracle::eval_qf(&f, &a).py()
    } else {
        oracle::eval_bounded(&f, &a, &oracle::GridConfig::with_bound(bound)).py()
    }
}

/// `to` is one of "two-sorted", "one-sorted", "order", "L".
#[pyfunction]
#[pyo3(signature = (formula, to, m_places = None))]
fn translate(formula: FormulaArg, to: &str, m_places: Option<Vec<u64>>) -> PyResult<PyFormula> {
    let f = formula.formula()?;
    let dir: TranslationDirection = to.parse().py()?;
    let m: Option<BTreeSet<u64>> = m_places.map(|v| v.into_iter().collect());
    Ok(PyFormula { inner: interpret::translate(&f, dir, m.as_ref()).py()? })
}

/// First sampled counterexample to the equivalence of `f` and `g`, if any.
#[pyfunction]
#[pyo3(signature = (f, g, samples = 200, seed = acceptance::DEFAULT_SEED))]
fn check_equiv(f: FormulaArg, g: FormulaArg, samples: usize, seed: u64) -> PyResult<Option<BTreeMap<String, String>>> {
    let rep = oracle::check_equiv_sampled(&f.formula()?, &g.formula()?, samples, seed).py()?;
    Ok(rep.counterexample.as_ref().map(assignment_dict))
}

/// `kind` is "order", "nonneg" or "mult".
#[pyfunction]
fn gadget(kind: &str) -> PyResult<PyFormula> {
    let kind: GadgetKind = kind.parse().py()?;
    Ok(PyFormula { inner: gadgets::emit(kind) })
}

#[pyfunction]
#[pyo3(signature = (kind, samples = 1000, seed = acceptance::DEFAULT_SEED))]
fn verify_gadget(kind: &str, samples: usize, seed: u64) -> PyResult<bool> {
    let kind: GadgetKind = kind.parse().py()?;
    Ok(gadgets::verify(kind, samples, seed).py()?.passed())
}

/// p-adic valuation of a rational given as a string; None for zero.
#[pyfunction]
fn vp(a: &str, p: u64) -> PyResult<Option<i64>> {
    let a: Rat = a.parse().py()?;
    Ok(match rational::vp(&a, p).py()? {
        ValInt::Fin(n) => Some(n),
        ValInt::Inf => None,
    })
}

/// Runs one acceptance criterion; returns (passed, detail).
#[pyfunction]
#[pyo3(signature = (id, seed = acceptance::DEFAULT_SEED))]
fn run_criterion(py: Python<'_>, id: u8, seed: u64) -> (bool, String) {
    let r = py.detach(|| acceptance::run_criterion(id, seed));
    (r.passed, r.detail)
}

#[pymodule]
#[pyo3(name = "placeq")]
fn placeq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyFormula>()?;
    m.add("PlaceqError", py.get_type::<PlaceqError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("UnsupportedError", py.get_type::<UnsupportedError>())?;
    m.add("SortError", py.get_type::<SortError>())?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(eliminate, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(check_equiv, m)?)?;
    m.add_function(wrap_pyfunction!(gadget, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(vp, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    m.add("DEFAULT_SEED", acceptance::DEFAULT_SEED)?;
    Ok(())
}
