//! Sparse multivariate polynomials over the rate variables `w1..wn`.
//!
//! This is the universal coefficient ring of the crate: steady state
//! probabilities, generator entries and operator matrix elements are all
//! values of [`Polynomial`]. Coefficients are arbitrary-precision integers
//! and every operation is exact.
//!
//! Monomials are exponent vectors aligned with the variables, `exps[a-1]` is
//! the exponent of `w_a`. The ambient variable count is fixed per polynomial
//! and polynomials of different ambient counts never mix; mixing them is a
//! [`PolyError::DimensionMismatch`].
//!
//! Canonical term order is *descending* lexicographic on the exponent
//! vectors (so `w1` terms print before `w2` terms); Display and the JSON
//! term-list serialization both use it, which makes all emitted forms
//! byte-stable across runs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exponent vector of a monomial; `exps[a-1]` is the exponent of `w_a`.
/// Invariant: the length equals the ambient variable count of the owning
/// polynomial.
pub type Monomial = Vec<u32>;

/// Errors from polynomial arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    /// Two operands live in rings with different variable counts.
    #[error("ambient variable count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// Exact division by a variable hit a monomial with exponent zero.
    #[error("not divisible by w{var}: monomial {monomial:?} has exponent 0")]
    NotDivisible { var: usize, monomial: Monomial },
    /// The degree of the zero polynomial is undefined.
    #[error("degree of the zero polynomial is undefined")]
    ZeroDegree,
    /// Variable index outside `1..=nvars`.
    #[error("variable index {0} out of range 1..={1}")]
    VarOutOfRange(usize, usize),
    /// Evaluation point has the wrong length.
    #[error("evaluation point has length {0}, expected {1}")]
    BadEvalPoint(usize, usize),
    /// Malformed term list in deserialization.
    #[error("invalid term list: {0}")]
    BadTerms(String),
}

/// Sparse multivariate polynomial in `w1..wn` with `BigInt` coefficients.
///
/// Invariants: no stored coefficient is zero and every stored monomial has
/// length `nvars`. Values are immutable in practice — all operations return
/// new polynomials — so they are safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    /// The constant polynomial `1`.
    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigInt::one())
    }

    /// A constant polynomial.
    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Polynomial { nvars, terms }
    }

    /// The variable `w_a` (1-indexed).
    pub fn var(nvars: usize, a: usize) -> Result<Self, PolyError> {
        if a == 0 || a > nvars {
            return Err(PolyError::VarOutOfRange(a, nvars));
        }
        let mut exps = vec![0; nvars];
        exps[a - 1] = 1;
        Ok(Self::from_term(nvars, exps, BigInt::one()))
    }

    /// A single-term polynomial `coeff * w^exps`.
    pub fn from_term(nvars: usize, exps: Monomial, coeff: impl Into<BigInt>) -> Self {
        assert_eq!(exps.len(), nvars, "monomial length must equal nvars");
        let coeff = coeff.into();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        Polynomial { nvars, terms }
    }

    /// Build from a term list, merging duplicates and dropping zeros.
    pub fn from_terms<I>(nvars: usize, iter: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, BigInt)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, coeff) in iter {
            if exps.len() != nvars {
                return Err(PolyError::BadTerms(format!(
                    "monomial {exps:?} has length {}, expected {nvars}",
                    exps.len()
                )));
            }
            p.add_term(&exps, &coeff);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending lex order (internal storage order).
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    /// Terms in the canonical (descending lex) order.
    pub fn terms_canonical(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter().rev()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    /// True when every coefficient is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    fn add_term(&mut self, exps: &[u32], coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(exps) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(exps);
                }
            }
            None => {
                self.terms.insert(exps.to_vec(), coeff.clone());
            }
        }
    }

    fn check_same_ring(&self, rhs: &Self) -> Result<(), PolyError> {
        if self.nvars != rhs.nvars {
            return Err(PolyError::DimensionMismatch(self.nvars, rhs.nvars));
        }
        Ok(())
    }

    /// Coefficient-wise sum.
    pub fn add(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same_ring(rhs)?;
        let mut out = self.clone();
        for (exps, coeff) in &rhs.terms {
            out.add_term(exps, coeff);
        }
        Ok(out)
    }

    /// In-place sum (same ring required).
    pub fn add_assign(&mut self, rhs: &Self) -> Result<(), PolyError> {
        self.check_same_ring(rhs)?;
        for (exps, coeff) in &rhs.terms {
            self.add_term(exps, coeff);
        }
        Ok(())
    }

    /// Coefficient-wise difference.
    pub fn sub(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    /// Distributive product in canonical form.
    pub fn mul(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same_ring(rhs)?;
        let mut out = Self::zero(self.nvars);
        let mut exps = vec![0u32; self.nvars];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                for (i, e) in exps.iter_mut().enumerate() {
                    *e = ea[i] + eb[i];
                }
                out.add_term(&exps, &(ca * cb));
            }
        }
        Ok(out)
    }

    /// Multiply by an integer scalar.
    pub fn scale(&self, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * &c)).collect(),
        }
    }

    /// Exact division by the variable `w_a` (1-indexed).
    ///
    /// Every monomial must carry exponent >= 1 on `w_a`; otherwise this is a
    /// [`PolyError::NotDivisible`], which signals a bug in trace assembly or
    /// pairing rather than a user error.
    pub fn exact_div_var(&self, a: usize) -> Result<Self, PolyError> {
        if a == 0 || a > self.nvars {
            return Err(PolyError::VarOutOfRange(a, self.nvars));
        }
        let idx = a - 1;
        let mut terms = BTreeMap::new();
        for (exps, coeff) in &self.terms {
            if exps[idx] == 0 {
                return Err(PolyError::NotDivisible { var: a, monomial: exps.clone() });
            }
            let mut e = exps.clone();
            e[idx] -= 1;
            terms.insert(e, coeff.clone());
        }
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    /// Multiply by the variable `w_a` (1-indexed).
    pub fn mul_var(&self, a: usize) -> Result<Self, PolyError> {
        if a == 0 || a > self.nvars {
            return Err(PolyError::VarOutOfRange(a, self.nvars));
        }
        let idx = a - 1;
        let terms = self
            .terms
            .iter()
            .map(|(exps, coeff)| {
                let mut e = exps.clone();
                e[idx] += 1;
                (e, coeff.clone())
            })
            .collect();
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    /// Substitute exact rationals for the variables.
    pub fn eval(&self, w: &[BigRational]) -> Result<BigRational, PolyError> {
        if w.len() != self.nvars {
            return Err(PolyError::BadEvalPoint(w.len(), self.nvars));
        }
        let mut acc = BigRational::zero();
        for (exps, coeff) in &self.terms {
            let mut term = BigRational::from_integer(coeff.clone());
            for (wi, &e) in w.iter().zip(exps.iter()) {
                if e > 0 {
                    let num = wi.numer().pow(e);
                    let den = wi.denom().pow(e);
                    term *= BigRational::new(num, den);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Value at `w1 = ... = wn = 1`, i.e. the coefficient sum.
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Common total degree of all monomials.
    ///
    /// `Ok(Some(d))` when homogeneous of degree `d`, `Ok(None)` when the
    /// monomials disagree, `Err(ZeroDegree)` on the zero polynomial.
    pub fn homogeneous_degree(&self) -> Result<Option<u32>, PolyError> {
        let mut it = self.terms.keys();
        let first = it.next().ok_or(PolyError::ZeroDegree)?;
        let d: u32 = first.iter().sum();
        for exps in it {
            if exps.iter().sum::<u32>() != d {
                return Ok(None);
            }
        }
        Ok(Some(d))
    }

    /// Re-embed into a ring with more variables (the new ones unused).
    pub fn extend_vars(&self, nvars: usize) -> Result<Self, PolyError> {
        if nvars < self.nvars {
            return Err(PolyError::DimensionMismatch(self.nvars, nvars));
        }
        if nvars == self.nvars {
            return Ok(self.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(exps, coeff)| {
                let mut e = exps.clone();
                e.resize(nvars, 0);
                (e, coeff.clone())
            })
            .collect();
        Ok(Polynomial { nvars, terms })
    }

    /// Canonical JSON term list: `[{"exps":[...],"coeff":"<decimal>"}]` in
    /// descending lex order. Bit-exact across runs.
    pub fn to_json_terms(&self) -> serde_json::Value {
        let list: Vec<JsonTerm> = self
            .terms_canonical()
            .map(|(exps, coeff)| JsonTerm { exps: exps.clone(), coeff: coeff.to_string() })
            .collect();
        serde_json::to_value(list).expect("term list serialization cannot fail")
    }

    /// Parse the JSON term list form produced by [`Self::to_json_terms`].
    pub fn from_json_terms(nvars: usize, value: &serde_json::Value) -> Result<Self, PolyError> {
        let list: Vec<JsonTerm> = serde_json::from_value(value.clone())
            .map_err(|e| PolyError::BadTerms(e.to_string()))?;
        let mut terms = Vec::with_capacity(list.len());
        for t in list {
            let coeff: BigInt = t
                .coeff
                .parse()
                .map_err(|_| PolyError::BadTerms(format!("bad coefficient {:?}", t.coeff)))?;
            terms.push((t.exps, coeff));
        }
        Self::from_terms(nvars, terms)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    exps: Monomial,
    coeff: String,
}

impl fmt::Display for Polynomial {
    /// Canonical human form, e.g. `w1^2+2*w1*w2+w2^2`; the zero polynomial
    /// prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (exps, coeff)) in self.terms_canonical().enumerate() {
            let neg = coeff.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            let abs = coeff.abs();
            let is_const = exps.iter().all(|&e| e == 0);
            if is_const {
                write!(f, "{abs}")?;
            } else {
                let mut wrote_factor = false;
                if !abs.is_one() {
                    write!(f, "{abs}")?;
                    wrote_factor = true;
                }
                for (idx, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if wrote_factor {
                        write!(f, "*")?;
                    }
                    wrote_factor = true;
                    if e == 1 {
                        write!(f, "w{}", idx + 1)?;
                    } else {
                        write!(f, "w{}^{}", idx + 1, e)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs).expect("polynomial ring mismatch")
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs).expect("polynomial ring mismatch")
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs).expect("polynomial ring mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(n: usize, a: usize) -> Polynomial {
        Polynomial::var(n, a).unwrap()
    }

    #[test]
    fn add_merges_coefficients() {
        // (w1+w2) + w2 = w1+2w2
        let p = &w(2, 1) + &w(2, 2);
        let q = p.add(&w(2, 2)).unwrap();
        assert_eq!(q.to_string(), "w1+2*w2");
    }

    #[test]
    fn add_identity_and_disjoint_supports() {
        let p = &w(3, 1) + &w(3, 3);
        assert_eq!(p.add(&Polynomial::zero(3)).unwrap(), p);
        let a = Polynomial::from_term(3, vec![0, 2, 0], 1);
        let b = Polynomial::from_term(3, vec![1, 1, 0], 1);
        assert_eq!(a.add(&b).unwrap().to_string(), "w1*w2+w2^2");
    }

    #[test]
    fn mul_expands() {
        // (w1+w2)(w1+w2+w3) = w1^2+2w1w2+w2^2+w1w3+w2w3
        let p = &w(3, 1) + &w(3, 2);
        let q = &(&w(3, 1) + &w(3, 2)) + &w(3, 3);
        let r = p.mul(&q).unwrap();
        assert_eq!(r.to_string(), "w1^2+2*w1*w2+w1*w3+w2^2+w2*w3");
        assert_eq!(r.eval_at_one(), BigInt::from(6));
    }

    #[test]
    fn mul_identity_and_square() {
        let p = &w(2, 1) + &w(2, 2);
        assert_eq!(p.mul(&Polynomial::one(2)).unwrap(), p);
        let sq = w(2, 2).mul(&w(2, 2)).unwrap();
        assert_eq!(sq.to_string(), "w2^2");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = w(2, 1);
        let q = w(3, 1);
        assert!(matches!(p.add(&q), Err(PolyError::DimensionMismatch(2, 3))));
        assert!(matches!(p.mul(&q), Err(PolyError::DimensionMismatch(2, 3))));
    }

    #[test]
    fn exact_div_var_examples() {
        // w2^2 w3 / w3 = w2^2
        let p = Polynomial::from_term(3, vec![0, 2, 1], 1);
        assert_eq!(p.exact_div_var(3).unwrap().to_string(), "w2^2");
        // (w1 w2 + w2^2)/w2 = w1+w2
        let q = Polynomial::from_terms(
            2,
            vec![(vec![1, 1], BigInt::one()), (vec![0, 2], BigInt::one())],
        )
        .unwrap();
        assert_eq!(q.exact_div_var(2).unwrap().to_string(), "w1+w2");
        // (w1+w2)/w2 fails on the w1 monomial
        let r = &w(2, 1) + &w(2, 2);
        assert!(matches!(
            r.exact_div_var(2),
            Err(PolyError::NotDivisible { var: 2, .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        let p = Polynomial::from_terms(
            2,
            vec![
                (vec![2, 0], BigInt::one()),
                (vec![1, 1], BigInt::one()),
                (vec![0, 2], BigInt::one()),
            ],
        )
        .unwrap();
        assert_eq!(p.eval(&[one.clone(), one.clone()]).unwrap(), BigRational::from_integer(3.into()));
        let q = (&w(3, 1) + &w(3, 2)).mul(&(&(&w(3, 1) + &w(3, 2)) + &w(3, 3))).unwrap();
        assert_eq!(
            q.eval(&[one.clone(), one.clone(), one.clone()]).unwrap(),
            BigRational::from_integer(6.into())
        );
        let r = Polynomial::from_term(2, vec![0, 2], 1);
        assert_eq!(r.eval(&[one, two]).unwrap(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn homogeneous_degree_examples() {
        let p = Polynomial::from_terms(
            2,
            vec![
                (vec![2, 0], BigInt::one()),
                (vec![1, 1], BigInt::one()),
                (vec![0, 2], BigInt::one()),
            ],
        )
        .unwrap();
        assert_eq!(p.homogeneous_degree().unwrap(), Some(2));
        let q = Polynomial::from_term(4, vec![1, 3, 2, 3], 1);
        assert_eq!(q.homogeneous_degree().unwrap(), Some(9));
        let r = &w(2, 1) + &Polynomial::from_term(2, vec![0, 2], 1);
        assert_eq!(r.homogeneous_degree().unwrap(), None);
        assert!(matches!(
            Polynomial::zero(2).homogeneous_degree(),
            Err(PolyError::ZeroDegree)
        ));
    }

    #[test]
    fn json_round_trip_and_order() {
        let p = Polynomial::from_terms(
            2,
            vec![(vec![0, 2], BigInt::from(3)), (vec![2, 0], BigInt::from(-1))],
        )
        .unwrap();
        let v = p.to_json_terms();
        // descending lex: w1^2 term first
        assert_eq!(v[0]["exps"], serde_json::json!([2, 0]));
        assert_eq!(v[0]["coeff"], "-1");
        let q = Polynomial::from_json_terms(2, &v).unwrap();
        assert_eq!(p, q);
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
        let term = (
            proptest::collection::vec(0u32..5, nvars),
            -9i64..10,
        );
        proptest::collection::vec(term, 0..20).prop_map(move |ts| {
            Polynomial::from_terms(
                nvars,
                ts.into_iter().map(|(e, c)| (e, BigInt::from(c))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(p in arb_poly(3), q in arb_poly(3), r in arb_poly(3)) {
            prop_assert_eq!(p.add(&q).unwrap(), q.add(&p).unwrap());
            prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
            prop_assert_eq!(
                p.add(&q).unwrap().add(&r).unwrap(),
                p.add(&q.add(&r).unwrap()).unwrap()
            );
            prop_assert_eq!(
                p.mul(&q).unwrap().mul(&r).unwrap(),
                p.mul(&q.mul(&r).unwrap()).unwrap()
            );
            prop_assert_eq!(
                p.mul(&q.add(&r).unwrap()).unwrap(),
                p.mul(&q).unwrap().add(&p.mul(&r).unwrap()).unwrap()
            );
        }

        #[test]
        fn div_var_round_trip(p in arb_poly(3), a in 1usize..4) {
            let shifted = p.mul_var(a).unwrap();
            prop_assert_eq!(shifted.exact_div_var(a).unwrap(), p);
        }

        #[test]
        fn eval_is_a_ring_homomorphism(p in arb_poly(3), q in arb_poly(3)) {
            let w: Vec<BigRational> = vec![
                BigRational::new(2.into(), 3.into()),
                BigRational::from_integer(5.into()),
                BigRational::new((-7).into(), 2.into()),
            ];
            prop_assert_eq!(
                p.mul(&q).unwrap().eval(&w).unwrap(),
                p.eval(&w).unwrap() * q.eval(&w).unwrap()
            );
            prop_assert_eq!(
                p.add(&q).unwrap().eval(&w).unwrap(),
                p.eval(&w).unwrap() + q.eval(&w).unwrap()
            );
        }

        #[test]
        fn display_json_stable(p in arb_poly(2)) {
            let q = Polynomial::from_json_terms(2, &p.to_json_terms()).unwrap();
            prop_assert_eq!(p.to_string(), q.to_string());
        }
    }
}
