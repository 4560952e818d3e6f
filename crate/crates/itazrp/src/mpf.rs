//! The matrix-product steady state.
//!
//! The probability of a configuration is a trace of site operators over a
//! truncated bosonic space, divided by `w2 .. wn`. Evaluation proceeds by a
//! recursion over the species count: the level-a table is assembled from
//! the level-(a-1) table by summing, over the lowered-model configurations
//! `mu` of the same chain, the level-(a-1) probability times the trace of
//! the cyclic operator product `A_{mu_1,s_1} ... A_{mu_L,s_L}`, then
//! dividing by `w_a` exactly.
//!
//! The `mu`-sum runs over the lowered sector only: occupation bookkeeping
//! in the trace forces the per-species totals of `mu` to match the sector,
//! so everything else vanishes. A direct single-trace evaluation over the
//! full tensor space is kept for small species counts as a cross-check
//! ([`steady_state_direct_trace`]).

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{site_operator, trace_product, FockError, FockOperator, OperatorKind, TruncatedSpace};
use crate::polyring::{PolyError, Polynomial};
use crate::states::{Configuration, LocalState, Sector, StateError};

#[derive(Debug, Clone, Error)]
pub enum MpfError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("internal consistency failure: {0}")]
    Internal(PolyError),
    #[error("direct trace evaluation supports up to 3 species, got {0}")]
    UnsupportedLevel(usize),
    #[error("truncation head-room check failed for a trace at level {level}")]
    TruncationUnstable { level: usize },
    #[error("rate vector has length {0}, expected {1}")]
    BadRates(usize, usize),
    #[error("steady state sums to zero at the given rates")]
    DegenerateNormalization,
}

/// How a steady state was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MatrixProduct,
    Multiline,
    Kernel,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MatrixProduct => "mpf",
            Method::Multiline => "multiline",
            Method::Kernel => "kernel",
        }
    }
}

/// A complete polynomial steady state over a sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    sector: Sector,
    probs: BTreeMap<Configuration, Polynomial>,
    method: Method,
}

impl SteadyState {
    pub fn new(
        sector: Sector,
        probs: BTreeMap<Configuration, Polynomial>,
        method: Method,
    ) -> Self {
        SteadyState { sector, probs, method }
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn probs(&self) -> &BTreeMap<Configuration, Polynomial> {
        &self.probs
    }

    pub fn get(&self, c: &Configuration) -> Option<&Polynomial> {
        self.probs.get(c)
    }

    /// JSON map from canonical configuration text to the canonical
    /// polynomial string.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, String> =
            self.probs.iter().map(|(c, p)| (c.to_text(), p.to_string())).collect();
        serde_json::json!(map)
    }

    /// Evaluate at positive rates and normalize to unit sum.
    pub fn eval_unit_sum(
        &self,
        w: &[BigRational],
    ) -> Result<BTreeMap<Configuration, BigRational>, MpfError> {
        if w.len() != self.sector.species() {
            return Err(MpfError::BadRates(w.len(), self.sector.species()));
        }
        let values: BTreeMap<Configuration, BigRational> = self
            .probs
            .iter()
            .map(|(c, p)| (c.clone(), p.eval(w).expect("length checked")))
            .collect();
        let total: BigRational = values.values().sum();
        if total.is_zero() {
            return Err(MpfError::DegenerateNormalization);
        }
        Ok(values.into_iter().map(|(c, v)| (c, v / &total)).collect())
    }
}

/// Options for the matrix-product evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct MpfOptions {
    /// Recompute every trace with all caps raised by one and require the
    /// identical polynomial, turning the truncation argument into a runtime
    /// assertion.
    pub verify_truncation: bool,
}

/// Steady state of a basic sector by the matrix-product recursion.
pub fn steady_state_matrix_product(sector: &Sector) -> Result<SteadyState, MpfError> {
    steady_state_matrix_product_with(sector, MpfOptions::default())
}

/// Same, with options.
pub fn steady_state_matrix_product_with(
    sector: &Sector,
    opts: MpfOptions,
) -> Result<SteadyState, MpfError> {
    let n = sector.species();
    let nvars = n;

    // level 1: every probability is the constant 1
    let mut table: HashMap<Configuration, Polynomial> = sector
        .truncate(1)
        .enumerate_configurations()
        .into_iter()
        .map(|c| (c, Polynomial::one(nvars)))
        .collect();

    for level in 2..=n {
        table = lift_level(sector, level, nvars, &table, opts)?;
    }

    let probs: BTreeMap<Configuration, Polynomial> = table.into_iter().collect();
    Ok(SteadyState { sector: sector.clone(), probs, method: Method::MatrixProduct })
}

/// One step of the recursion: level-(a-1) table -> level-a table.
fn lift_level(
    sector: &Sector,
    level: usize,
    nvars: usize,
    lower: &HashMap<Configuration, Polynomial>,
    opts: MpfOptions,
) -> Result<HashMap<Configuration, Polynomial>, MpfError> {
    let caps = sector.multiplicities()[..level - 1].to_vec();
    let space = TruncatedSpace::new(caps);
    let ops = build_operator_table(&space, nvars, level, sector)?;
    let headroom_ops = if opts.verify_truncation {
        Some(build_operator_table(&space.with_headroom(1), nvars, level, sector)?)
    } else {
        None
    };

    let mu_configs: Vec<&Configuration> = {
        let mut v: Vec<&Configuration> = lower.keys().collect();
        v.sort();
        v
    };
    let sigma_configs = sector.truncate(level).enumerate_configurations();

    let entries: Result<Vec<(Configuration, Polynomial)>, MpfError> = sigma_configs
        .into_par_iter()
        .map(|sigma| {
            let mut acc = Polynomial::zero(nvars);
            for mu in &mu_configs {
                let tr = cyclic_trace(&ops, mu, &sigma)?;
                if tr.is_zero() {
                    continue;
                }
                if let Some(hops) = &headroom_ops {
                    let tr2 = cyclic_trace(hops, mu, &sigma)?;
                    if tr2 != tr {
                        return Err(MpfError::TruncationUnstable { level });
                    }
                }
                let weighted = lower[*mu].mul(&tr).expect("same ring");
                acc.add_assign(&weighted).expect("same ring");
            }
            let divided = acc.exact_div_var(level).map_err(MpfError::Internal)?;
            Ok((sigma, divided))
        })
        .collect();
    Ok(entries?.into_iter().collect())
}

type OperatorTable = HashMap<(LocalState, LocalState), FockOperator>;

/// All site operators `A_{mu, sigma}` a level can need, keyed by the pair
/// of local states. Local occupations never exceed the sector
/// multiplicities, so the table is finite and small.
fn build_operator_table(
    space: &TruncatedSpace,
    nvars: usize,
    level: usize,
    sector: &Sector,
) -> Result<OperatorTable, MpfError> {
    let mu_locals = locals_up_to(&sector.multiplicities()[..level - 1]);
    let sigma_locals = locals_up_to(&sector.multiplicities()[..level]);
    let mut table = HashMap::with_capacity(mu_locals.len() * sigma_locals.len());
    for mu in &mu_locals {
        for sigma in &sigma_locals {
            let op = site_operator(space, nvars, level, mu, sigma, OperatorKind::Plain)?;
            table.insert((mu.clone(), sigma.clone()), op);
        }
    }
    Ok(table)
}

fn locals_up_to(bounds: &[u32]) -> Vec<LocalState> {
    let mut out = vec![vec![]];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=b).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(LocalState::new).collect()
}

fn cyclic_trace(
    ops: &OperatorTable,
    mu: &Configuration,
    sigma: &Configuration,
) -> Result<Polynomial, MpfError> {
    let factors: Vec<&FockOperator> = (0..sigma.len())
        .map(|i| &ops[&(mu.site(i).clone(), sigma.site(i).clone())])
        .collect();
    Ok(trace_product(&factors)?)
}

/// Steady state via one trace over the full tensor space (no recursion).
///
/// Kept as an independent evaluation route for `n <= 3`; the stacked site
/// operator at level a is the mu-sum of tensor products of the level-(a-1)
/// stack with the level-a site operator.
pub fn steady_state_direct_trace(sector: &Sector) -> Result<SteadyState, MpfError> {
    let n = sector.species();
    if n > 3 {
        return Err(MpfError::UnsupportedLevel(n));
    }
    let nvars = n;
    let probs: BTreeMap<Configuration, Polynomial> = if n == 1 {
        sector
            .enumerate_configurations()
            .into_iter()
            .map(|c| (c, Polynomial::one(1)))
            .collect()
    } else {
        let stacked = build_stacked_operators(sector, nvars)?;
        let configs = sector.enumerate_configurations();
        let entries: Result<Vec<(Configuration, Polynomial)>, MpfError> = configs
            .into_par_iter()
            .map(|sigma| {
                let mut product: Option<FockOperator> = None;
                for i in 0..sigma.len() {
                    let x = &stacked[&sigma.site(i).clone()];
                    product = Some(match product {
                        None => x.clone(),
                        Some(p) => p.mul(x)?,
                    });
                }
                let mut p = product.expect("L >= 2").trace();
                for a in 2..=n {
                    p = p.exact_div_var(a).map_err(MpfError::Internal)?;
                }
                Ok((sigma, p))
            })
            .collect();
        entries?.into_iter().collect()
    };
    Ok(SteadyState { sector: sector.clone(), probs, method: Method::MatrixProduct })
}

/// The stacked operators, one per level-n local state, on the tensor
/// product of the per-level spaces.
fn build_stacked_operators(
    sector: &Sector,
    nvars: usize,
) -> Result<HashMap<LocalState, FockOperator>, MpfError> {
    let m = sector.multiplicities();
    // level 2 stack: sum over the one-mode creation index
    let space2 = TruncatedSpace::new(vec![m[0]]);
    let mut stack: HashMap<LocalState, FockOperator> = HashMap::new();
    for sigma in locals_up_to(&m[..2]) {
        let mut acc = FockOperator::zero(space2.clone(), nvars);
        for mu in locals_up_to(&m[..1]) {
            let a = site_operator(&space2, nvars, 2, &mu, &sigma, OperatorKind::Plain)?;
            acc = acc.add(&a)?;
        }
        stack.insert(sigma, acc);
    }
    for level in 3..=sector.species() {
        let space = TruncatedSpace::new(m[..level - 1].to_vec());
        let mut next: HashMap<LocalState, FockOperator> = HashMap::new();
        for sigma in locals_up_to(&m[..level]) {
            let mut acc: Option<FockOperator> = None;
            for mu in locals_up_to(&m[..level - 1]) {
                let a = site_operator(&space, nvars, level, &mu, &sigma, OperatorKind::Plain)?;
                let term = stack[&mu].tensor(&a)?;
                acc = Some(match acc {
                    None => term,
                    Some(x) => x.add(&term)?,
                });
            }
            next.insert(sigma, acc.expect("at least one mu"));
        }
        stack = next;
    }
    Ok(stack)
}

/// Mismatch reported by [`normalization_check`].
#[derive(Debug, Clone)]
pub struct NormalizationMismatch {
    pub expected: BigInt,
    pub got: BigInt,
}

/// Check that the coefficient total over the sector equals the multiline
/// state count `prod_a binom(L-1+l_a, l_a)`.
pub fn normalization_check(ss: &SteadyState) -> Result<(), NormalizationMismatch> {
    let got: BigInt = ss.probs.values().map(|p| p.eval_at_one()).sum();
    let expected = BigInt::from(ss.sector.multiline_count());
    if got == expected {
        Ok(())
    } else {
        Err(NormalizationMismatch { expected, got })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(n: usize, l: usize, m: &[u32]) -> Sector {
        Sector::new(n, l, m.to_vec()).unwrap()
    }

    fn poly(ss: &SteadyState, text: &str) -> String {
        let c = Configuration::parse(text, ss.sector().species()).unwrap();
        ss.get(&c).unwrap().to_string()
    }

    #[test]
    fn one_species_is_uniform() {
        let ss = steady_state_matrix_product(&sector(1, 3, &[2])).unwrap();
        assert_eq!(ss.probs().len(), 6);
        for p in ss.probs().values() {
            assert_eq!(p.to_string(), "1");
        }
        assert!(normalization_check(&ss).is_ok());
    }

    #[test]
    fn two_species_l3_values() {
        let ss = steady_state_matrix_product(&sector(2, 3, &[1, 1])).unwrap();
        assert_eq!(poly(&ss, "e|e|12"), "w1^2+w1*w2+w2^2");
        assert_eq!(poly(&ss, "e|2|1"), "w1*w2+w2^2");
        assert_eq!(poly(&ss, "e|1|2"), "w2^2");
        assert!(normalization_check(&ss).is_ok());
    }

    #[test]
    fn three_species_l2_value() {
        let ss = steady_state_matrix_product(&sector(3, 2, &[1, 1, 1])).unwrap();
        // (w1+w2)(w1+w2+w3)
        assert_eq!(poly(&ss, "e|123"), "w1^2+2*w1*w2+w1*w3+w2^2+w2*w3");
    }

    #[test]
    fn normalization_counts() {
        let cases = [
            (sector(2, 3, &[1, 1]), 18u128),
            (sector(1, 3, &[2]), 6),
            (sector(3, 3, &[1, 1, 1]), 180),
        ];
        for (s, expect) in cases {
            assert_eq!(s.multiline_count(), expect);
            let ss = steady_state_matrix_product(&s).unwrap();
            let got: BigInt = ss.probs().values().map(|p| p.eval_at_one()).sum();
            assert_eq!(got, BigInt::from(expect));
        }
    }

    #[test]
    fn direct_trace_agrees_with_recursion() {
        for s in [
            sector(2, 3, &[1, 1]),
            sector(2, 2, &[2, 1]),
            sector(3, 2, &[1, 1, 1]),
            sector(3, 3, &[1, 1, 1]),
            sector(3, 2, &[2, 1, 1]),
        ] {
            let rec = steady_state_matrix_product(&s).unwrap();
            let direct = steady_state_direct_trace(&s).unwrap();
            assert_eq!(rec.probs(), direct.probs(), "sector {s:?}");
        }
    }

    #[test]
    fn truncation_headroom_is_stable() {
        let opts = MpfOptions { verify_truncation: true };
        for s in [sector(2, 3, &[1, 1]), sector(3, 2, &[1, 2, 1]), sector(2, 4, &[2, 2])] {
            let checked = steady_state_matrix_product_with(&s, opts).unwrap();
            let plain = steady_state_matrix_product(&s).unwrap();
            assert_eq!(checked.probs(), plain.probs());
        }
    }

    #[test]
    fn degree_and_nonnegativity() {
        let s = sector(3, 3, &[1, 1, 1]);
        let ss = steady_state_matrix_product(&s).unwrap();
        for p in ss.probs().values() {
            assert_eq!(p.homogeneous_degree().unwrap(), Some(4));
            assert!(p.is_nonnegative());
        }
    }

    #[test]
    fn cyclic_shift_invariance() {
        let s = sector(2, 4, &[2, 1]);
        let ss = steady_state_matrix_product(&s).unwrap();
        for (c, p) in ss.probs() {
            assert_eq!(ss.get(&c.cyclic_shift()).unwrap(), p);
        }
    }

    #[test]
    fn four_species_steady_state_is_in_the_kernel() {
        let s = sector(4, 2, &[1, 1, 1, 1]);
        let ss = steady_state_matrix_product(&s).unwrap();
        let h = crate::markov::GeneratorMatrix::build(&s);
        assert!(crate::markov::check_steady(&h, ss.probs()).unwrap().is_ok());
        assert!(normalization_check(&ss).is_ok());
    }
}
