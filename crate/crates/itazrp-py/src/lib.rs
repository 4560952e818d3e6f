//! Python bindings for the iTAZRP steady-state library.
//!
//! Exposes a `Sector` class for enumeration, steady states and simulation,
//! plus module-level helpers for the pairing algorithm and the
//! hat-relation check. Polynomials and exact rationals cross the boundary
//! as canonical strings.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use itazrp::fock::check_hat_relation;
use itazrp::gillespie::{run as run_simulation, SimConfig};
use itazrp::markov::solve_kernel;
use itazrp::mpf::steady_state_matrix_product;
use itazrp::multiline::{pair_and_project, steady_state_multiline, unfold};
use itazrp::states::{Configuration, MultilineState, Sector as CoreSector};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_rational(s: &str) -> PyResult<BigRational> {
    let parse_int = |t: &str| -> PyResult<num_bigint::BigInt> {
        t.parse().map_err(|_| value_err(format!("cannot parse rate {s:?}")))
    };
    let r = if let Some((num, den)) = s.split_once('/') {
        let d = parse_int(den)?;
        if d.is_zero() {
            return Err(value_err("zero denominator"));
        }
        BigRational::new(parse_int(num)?, d)
    } else if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let base = num_bigint::BigInt::from(10u32).pow(digits);
        let int_part = if int.is_empty() || int == "-" {
            num_bigint::BigInt::from(0)
        } else {
            parse_int(int)?
        };
        let frac_part =
            if frac.is_empty() { num_bigint::BigInt::from(0) } else { parse_int(frac)? };
        let total =
            &int_part * &base + if int.starts_with('-') { -frac_part } else { frac_part };
        BigRational::new(total, base)
    } else {
        BigRational::from_integer(parse_int(s)?)
    };
    if r.is_positive() {
        Ok(r)
    } else {
        Err(value_err(format!("rates must be positive, got {s:?}")))
    }
}

/// A basic sector of the n-species inhomogeneous TAZRP on a ring of
/// length L.
#[pyclass]
struct Sector {
    inner: CoreSector,
}

#[pymethods]
impl Sector {
    #[new]
    fn new(n: usize, l: usize, m: Vec<u32>) -> PyResult<Self> {
        Ok(Sector { inner: CoreSector::new(n, l, m).map_err(value_err)? })
    }

    /// Canonical text of every configuration, in enumeration order.
    fn configurations(&self) -> Vec<String> {
        self.inner.enumerate_configurations().iter().map(|c| c.to_text()).collect()
    }

    fn configuration_count(&self) -> u128 {
        self.inner.configuration_count()
    }

    fn multiline_count(&self) -> u128 {
        self.inner.multiline_count()
    }

    /// Steady state by "mpf" or "multiline": dict of configuration text to
    /// canonical polynomial string.
    fn steady_state(&self, method: &str) -> PyResult<BTreeMap<String, String>> {
        let probs = match method {
            "mpf" => steady_state_matrix_product(&self.inner)
                .map_err(runtime_err)?
                .probs()
                .clone(),
            "multiline" => {
                steady_state_multiline(&self.inner).map_err(runtime_err)?.probs().clone()
            }
            other => {
                return Err(value_err(format!(
                    "unknown method {other:?}, expected \"mpf\" or \"multiline\""
                )))
            }
        };
        Ok(probs.iter().map(|(c, p)| (c.to_text(), p.to_string())).collect())
    }

    /// Exact unit-sum stationary distribution at fixed rates (strings like
    /// "2" or "3/2"); values are exact rationals as strings.
    fn kernel_steady(&self, w: Vec<String>) -> PyResult<BTreeMap<String, String>> {
        let rates: Vec<BigRational> =
            w.iter().map(|s| parse_rational(s)).collect::<PyResult<_>>()?;
        let probs = solve_kernel(&self.inner, &rates).map_err(runtime_err)?;
        Ok(probs.iter().map(|(c, v)| (c.to_text(), v.to_string())).collect())
    }

    /// Time-fraction estimate of the stationary law from a continuous-time
    /// simulation; deterministic for a fixed seed.
    #[pyo3(signature = (w, events, burn_in=0, seed=0))]
    fn simulate(
        &self,
        w: Vec<f64>,
        events: u64,
        burn_in: u64,
        seed: u64,
    ) -> PyResult<BTreeMap<String, f64>> {
        let cfg = SimConfig { sector: self.inner.clone(), w, seed, events, burn_in };
        let empirical = run_simulation(&cfg).map_err(value_err)?;
        Ok(empirical
            .time_fractions()
            .into_iter()
            .map(|(c, v)| (c.to_text(), v))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Sector(n={}, L={}, m={:?})",
            self.inner.species(),
            self.inner.chain_length(),
            self.inner.multiplicities()
        )
    }
}

/// Verify the hat relation for all local states with occupations up to
/// `bound`; returns the number of tuples checked.
#[pyfunction]
fn hat_check(n: usize, bound: u32) -> PyResult<u64> {
    let report = check_hat_relation(n, bound).map_err(runtime_err)?;
    Ok(report.tuples)
}

/// One pairing step: project a level-(a-1) configuration through a bottom
/// row, returning (configuration text, weight monomial).
#[pyfunction]
fn pair_project(level: usize, top: &str, bottom: Vec<u32>) -> PyResult<(String, String)> {
    if level < 2 {
        return Err(value_err("level must be at least 2"));
    }
    let parsed = Configuration::parse(top, level - 1).map_err(value_err)?;
    let (phi, w) = pair_and_project(level, &parsed, &bottom).map_err(value_err)?;
    Ok((phi.to_text(), w.to_string()))
}

/// Project a multiline state (rows bottom-up: x^1 first) to a
/// configuration text and its weight monomial.
#[pyfunction]
fn project_multiline(rows: Vec<Vec<u32>>) -> PyResult<(String, String)> {
    let x = MultilineState::new(rows).map_err(value_err)?;
    let trace = unfold(&x).map_err(value_err)?;
    let target = trace.intermediates.last().expect("nonempty").to_text();
    Ok((target, trace.weight.to_string()))
}

/// Total variation distance between two distributions given as dicts.
#[pyfunction]
fn tv_distance(p: BTreeMap<String, f64>, q: BTreeMap<String, f64>) -> f64 {
    let mut acc = 0.0;
    for (k, a) in &p {
        acc += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in &q {
        if !p.contains_key(k) {
            acc += b.abs();
        }
    }
    acc / 2.0
}

#[pymodule]
fn itazrp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sector>()?;
    m.add_function(wrap_pyfunction!(hat_check, m)?)?;
    m.add_function(wrap_pyfunction!(pair_project, m)?)?;
    m.add_function(wrap_pyfunction!(project_multiline, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    Ok(())
}
