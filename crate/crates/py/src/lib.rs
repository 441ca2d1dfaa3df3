//! Python bindings.  Sets and subgroups come through as thin wrapper
//! classes; composite results (decompositions, certificates, run reports)
//! come through as plain dicts with exact rationals mapped to
//! `fractions.Fraction`.  `run_removal` returns the same "report v1" JSON
//! document the command-line tool prints, so reports can be exchanged
//! between the two front ends and re-verified on either side.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use f2tri::driver::{self, CertSummary};
use f2tri::gf2::{Coset, GroupElement, Subgroup};
use f2tri::instances;
use f2tri::regularity;
use f2tri::report::{Report, RunPayload};
use f2tri::set::SetF2;
use f2tri::setfile::{BodyFormat, SetFile};
use f2tri::shattering::{self, DichotomyResult};
use f2tri::triangles;
use f2tri::{parse_rat, Error, Rat};

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ratarg(s: &str) -> PyResult<Rat> {
    parse_rat(s).map_err(pyerr)
}

fn fraction<'py>(py: Python<'py>, r: &Rat) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

fn triple(t: &f2tri::triangles::Triangle) -> (u32, u32, u32) {
    let [x, y, z] = t.elements();
    (x.bits(), y.bits(), z.bits())
}

/// A subset of F_2^n, stored as a bitmap.
#[pyclass(name = "SetF2", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySetF2 {
    inner: SetF2,
}

#[pymethods]
impl PySetF2 {
    #[new]
    fn new(n: usize, elements: Vec<u32>) -> PyResult<Self> {
        Ok(PySetF2 { inner: SetF2::from_elements(n, &elements).map_err(pyerr)? })
    }

    /// Parse the `f2nset v1` text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PySetF2 { inner: SetFile::parse(text).map_err(pyerr)?.set })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn elements(&self) -> Vec<u32> {
        self.inner.elements()
    }

    /// Render as `f2nset v1` text; `format` is "hex" or "bitmap".
    #[pyo3(signature = (format = "hex"))]
    fn to_text(&self, format: &str) -> PyResult<String> {
        let fmt: BodyFormat = format.parse().map_err(pyerr)?;
        Ok(SetFile::new(self.inner.clone(), fmt).to_text())
    }

    fn __len__(&self) -> usize {
        self.inner.count() as usize
    }

    fn __contains__(&self, x: u32) -> bool {
        self.inner.contains_bits(x)
    }

    fn __repr__(&self) -> String {
        format!("SetF2(n={}, count={})", self.inner.n(), self.inner.count())
    }
}

/// A linear subspace of F_2^n in canonical reduced form.
#[pyclass(name = "Subgroup", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySubgroup {
    inner: Subgroup,
}

#[pymethods]
impl PySubgroup {
    #[new]
    fn new(n: usize, gens: Vec<u32>) -> PyResult<Self> {
        Ok(PySubgroup { inner: Subgroup::from_bits(n, &gens).map_err(pyerr)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn size(&self) -> u64 {
        self.inner.size()
    }

    fn basis(&self) -> Vec<u32> {
        self.inner.basis().to_vec()
    }

    fn __contains__(&self, x: u32) -> bool {
        self.inner.contains_bits(x)
    }

    fn __repr__(&self) -> String {
        let basis: Vec<String> = self.inner.basis().iter().map(|b| format!("{b:x}")).collect();
        format!("Subgroup(n={}, basis=[{}])", self.inner.n(), basis.join(", "))
    }
}

#[pyfunction]
fn gen_random_density(n: usize, p: &str, seed: u64) -> PyResult<PySetF2> {
    Ok(PySetF2 { inner: instances::gen_random_density(n, &ratarg(p)?, seed).map_err(pyerr)? })
}

#[pyfunction]
fn gen_halfspace(n: usize, coordinate_index: usize) -> PyResult<PySetF2> {
    Ok(PySetF2 {
        inner: instances::gen_triangle_free_halfspace(n, coordinate_index).map_err(pyerr)?,
    })
}

/// Returns `(set, planted_triangles, accidental_count)`.
#[pyfunction]
fn gen_triangle_union(n: usize, m: u64, seed: u64) -> PyResult<(PySetF2, Vec<(u32, u32, u32)>, u64)> {
    let u = instances::gen_disjoint_triangle_union(n, m, seed).map_err(pyerr)?;
    let planted = u.planted.iter().map(triple).collect();
    Ok((PySetF2 { inner: u.set }, planted, u.accidental))
}

#[pyfunction]
fn gen_subgroup_coset(n: usize, subgroup_dim: usize, seed: u64) -> PyResult<PySetF2> {
    Ok(PySetF2 { inner: instances::gen_subgroup_coset(n, subgroup_dim, seed).map_err(pyerr)? })
}

#[pyfunction]
fn gen_planted_noise(n: usize, subgroup_dim: usize, flip_p: &str, seed: u64) -> PyResult<PySetF2> {
    Ok(PySetF2 {
        inner: instances::gen_planted_subgroup_noise(n, subgroup_dim, &ratarg(flip_p)?, seed)
            .map_err(pyerr)?,
    })
}

/// Ordered triple count (degenerate triples included); `method` is
/// "brute", "fourier" or "both" (both routes must agree).
#[pyfunction]
#[pyo3(signature = (a, method = "both"))]
fn count_ordered(a: &PySetF2, method: &str) -> PyResult<u64> {
    match method {
        "brute" => Ok(triangles::count_ordered_bruteforce(&a.inner)),
        "fourier" => triangles::count_ordered_fourier(&a.inner).map_err(pyerr),
        "both" => {
            let b = triangles::count_ordered_bruteforce(&a.inner);
            let f = triangles::count_ordered_fourier(&a.inner).map_err(pyerr)?;
            if b != f {
                return Err(PyRuntimeError::new_err(format!(
                    "count mismatch: brute {b} vs fourier {f}"
                )));
            }
            Ok(b)
        }
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

#[pyfunction]
fn count_distinct(a: &PySetF2) -> u64 {
    triangles::distinct_triangles(&a.inner).len() as u64
}

/// In-place Walsh–Hadamard transform of a length-2^k vector (returned as
/// a new list).
#[pyfunction]
fn wht(mut vals: Vec<i64>) -> PyResult<Vec<i64>> {
    f2tri::fourier::wht_in_place(&mut vals).map_err(pyerr)?;
    Ok(vals)
}

/// Greedy maximal triangle packing and the derived farness sandwich.
#[pyfunction]
fn pack<'py>(py: Python<'py>, a: &PySetF2, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let packing = triangles::greedy_max_packing(&a.inner, seed);
    let bounds = triangles::farness_bounds(&a.inner, &packing).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("triangles", packing.triangles().iter().map(triple).collect::<Vec<_>>())?;
    d.set_item("support_size", packing.support().count())?;
    d.set_item("lower", fraction(py, &bounds.lower)?)?;
    d.set_item("upper", fraction(py, &bounds.upper)?)?;
    Ok(d)
}

/// Exact removal distance; exponential in |A|, only for tiny sets.
#[pyfunction]
fn exact_farness<'py>(py: Python<'py>, a: &PySetF2) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &triangles::exact_farness_small(&a.inner).map_err(pyerr)?)
}

#[pyfunction]
fn sample_tester<'py>(
    py: Python<'py>,
    a: &PySetF2,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &triangles::sample_tester(&a.inner, trials, seed).map_err(pyerr)?)
}

fn part_dict<'py>(py: Python<'py>, p: &regularity::SuperregularPart) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("elements", p.part.elements())?;
    d.set_item("subgroup_basis", p.subgroup.basis().to_vec())?;
    d.set_item("shift", p.shift.bits())?;
    d.set_item("density", fraction(py, &p.density)?)?;
    Ok(d)
}

/// Superregular decomposition of `A` inside the coset `shift + <gens>`.
#[pyfunction]
#[pyo3(signature = (a, gens, shift, rho, d))]
fn decompose<'py>(
    py: Python<'py>,
    a: &PySetF2,
    gens: Vec<u32>,
    shift: u32,
    rho: &str,
    d: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let n = a.inner.n();
    let h = Subgroup::from_bits(n, &gens).map_err(pyerr)?;
    let g = GroupElement::new(n, shift).map_err(pyerr)?;
    let dec = regularity::superregular_decomposition(&a.inner, &h, &g, &ratarg(rho)?, &ratarg(d)?)
        .map_err(pyerr)?;
    let out = PyDict::new(py);
    out.set_item("subgroup_basis", dec.subgroup.basis().to_vec())?;
    out.set_item("base_shift", dec.base_shift.bits())?;
    let parts = PyList::empty(py);
    for p in &dec.parts {
        parts.append(part_dict(py, p)?)?;
    }
    out.set_item("parts", parts)?;
    out.set_item("leftover", dec.leftover.elements())?;
    Ok(out)
}

fn cert_dict<'py>(py: Python<'py>, c: &CertSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("target_rep", c.target_rep)?;
    d.set_item("refining_basis", c.refining_basis.clone())?;
    d.set_item("alpha", fraction(py, &c.alpha)?)?;
    d.set_item("beta", fraction(py, &c.beta)?)?;
    d.set_item("k", c.k)?;
    d.set_item("measured_low_fraction", fraction(py, &c.measured_low_fraction)?)?;
    d.set_item("base_density", fraction(py, &c.base_density)?)?;
    Ok(d)
}

/// Run the shatter-or-count dichotomy on the coset triple
/// `(g1, g2, g1 + g2)` of `<gens>`.  Certificates are re-verified against
/// `A` before being returned.
#[pyfunction]
fn shatter_or_count<'py>(
    py: Python<'py>,
    a: &PySetF2,
    gens: Vec<u32>,
    g1: u32,
    g2: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let n = a.inner.n();
    let h = Subgroup::from_bits(n, &gens).map_err(pyerr)?;
    let e1 = GroupElement::new(n, g1).map_err(pyerr)?;
    let e2 = GroupElement::new(n, g2).map_err(pyerr)?;
    let e3 = e1 + e2;
    let out = PyDict::new(py);
    match shattering::shatter_or_count(&a.inner, &h, &e1, &e2, &e3).map_err(pyerr)? {
        DichotomyResult::Shatter(cert) => {
            cert.verify(&a.inner).map_err(pyerr)?;
            out.set_item("outcome", "shatter")?;
            out.set_item("certificate", cert_dict(py, &CertSummary::from(&cert))?)?;
        }
        DichotomyResult::TriangleCert(tc) => {
            out.set_item("outcome", "count")?;
            out.set_item("count", tc.count)?;
            out.set_item("threshold", fraction(py, &tc.threshold)?)?;
        }
    }
    Ok(out)
}

/// Mean entropy of the density profile of `A` over the cosets of
/// `<refining_gens>` inside `rep + <gens>`.
#[pyfunction]
fn mean_entropy(
    a: &PySetF2,
    gens: Vec<u32>,
    rep: u32,
    refining_gens: Vec<u32>,
) -> PyResult<f64> {
    let n = a.inner.n();
    let h = Subgroup::from_bits(n, &gens).map_err(pyerr)?;
    let hp = Subgroup::from_bits(n, &refining_gens).map_err(pyerr)?;
    let coset = Coset::new(h, &GroupElement::new(n, rep).map_err(pyerr)?).map_err(pyerr)?;
    shattering::mean_entropy(&a.inner, &coset, &hp).map_err(pyerr)
}

/// Full removal-lemma driver.  Returns the "report v1" JSON document.
#[pyfunction]
#[pyo3(signature = (a, seed, max_steps = None))]
fn run_removal(a: &PySetF2, seed: u64, max_steps: Option<u64>) -> PyResult<String> {
    let report = driver::run_removal_capped(&a.inner, seed, max_steps).map_err(pyerr)?;
    let payload = RunPayload::from_report(a.inner.n(), &report);
    Ok(Report::new("run", None, Some(seed), &payload).map_err(pyerr)?.to_json())
}

/// Re-verify a "report v1" run document against the input set.
#[pyfunction]
fn verify_run(a: &PySetF2, seed: u64, report_json: &str) -> PyResult<()> {
    let report = Report::parse(report_json).map_err(pyerr)?;
    let payload: RunPayload = report.payload_as().map_err(pyerr)?;
    let rebuilt = payload.to_report().map_err(pyerr)?;
    driver::verify_report(&a.inner, seed, &rebuilt).map_err(pyerr)
}

/// Tower-form bound `(height, top)` for the removal lemma at `epsilon`.
#[pyfunction]
fn theorem_bound(epsilon: &str) -> PyResult<(u32, f64)> {
    let tb = driver::theorem_bound(&ratarg(epsilon)?).map_err(pyerr)?;
    Ok((tb.height, tb.top))
}

#[pymodule]
fn f2tri_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetF2>()?;
    m.add_class::<PySubgroup>()?;
    m.add_function(wrap_pyfunction!(gen_random_density, m)?)?;
    m.add_function(wrap_pyfunction!(gen_halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(gen_triangle_union, m)?)?;
    m.add_function(wrap_pyfunction!(gen_subgroup_coset, m)?)?;
    m.add_function(wrap_pyfunction!(gen_planted_noise, m)?)?;
    m.add_function(wrap_pyfunction!(count_ordered, m)?)?;
    m.add_function(wrap_pyfunction!(count_distinct, m)?)?;
    m.add_function(wrap_pyfunction!(wht, m)?)?;
    m.add_function(wrap_pyfunction!(pack, m)?)?;
    m.add_function(wrap_pyfunction!(exact_farness, m)?)?;
    m.add_function(wrap_pyfunction!(sample_tester, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(shatter_or_count, m)?)?;
    m.add_function(wrap_pyfunction!(mean_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(run_removal, m)?)?;
    m.add_function(wrap_pyfunction!(verify_run, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_bound, m)?)?;
    Ok(())
}
