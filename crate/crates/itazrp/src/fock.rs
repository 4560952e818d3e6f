//! Truncated multi-mode bosonic operator algebra.
//!
//! One mode per intermediate species: the raising/lowering operators, the
//! vacuum projector `k` and its complement `d = 1 - k` combine into the
//! site operators of the matrix-product representation. Operators are
//! materialized as sparse matrices over a truncated occupation basis with
//! [`Polynomial`] entries; per-mode caps come from the sector
//! multiplicities, which is exact for every trace the steady-state
//! recursion needs (a site with a top-species particle forces the all-empty
//! state once per cycle, so reachable occupations never exceed the caps).
//! The head-room re-check behind [`crate::mpf::MpfOptions`] turns that
//! argument into a runtime assertion.
//!
//! [`check_hat_relation`] verifies, column by column on a truncated space,
//! the operator identity that drives the whole construction: conjugating a
//! product of two site operators by the local Markov matrix equals the
//! commutator-like combination with the hatted operators.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::markov::{exit_rate_in, local_transitions};
use crate::polyring::Polynomial;
use crate::states::LocalState;

#[derive(Debug, Clone, Error)]
pub enum FockError {
    #[error("operators live on different spaces")]
    SpaceMismatch,
    #[error("mode {0} out of range for a {1}-mode space")]
    ModeOutOfRange(usize, usize),
    #[error("trace of an empty operator list")]
    EmptyProduct,
    #[error("site operator needs level >= 2, got {0}")]
    LevelTooSmall(usize),
    #[error("operand shape mismatch: {0}")]
    Shape(String),
    #[error(
        "hat relation violated at alpha={alpha:?} beta={beta:?} mu={mu:?} nu={nu:?}, input occupations {column:?}"
    )]
    HatViolation {
        alpha: Vec<u32>,
        beta: Vec<u32>,
        mu: Vec<u32>,
        nu: Vec<u32>,
        column: Vec<u32>,
    },
}

/// A finite occupation basis: mode `b` runs over `0..=caps[b]`.
///
/// Basis states are indexed row-major with mode 0 most significant, so the
/// index of a concatenated occupation vector on a tensor-product space is
/// `index_left * dim_right + index_right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSpace {
    caps: Vec<u32>,
    dim: usize,
}

impl TruncatedSpace {
    pub fn new(caps: Vec<u32>) -> Self {
        let dim = caps.iter().map(|&c| c as usize + 1).product();
        TruncatedSpace { caps, dim }
    }

    pub fn uniform(modes: usize, cap: u32) -> Self {
        Self::new(vec![cap; modes])
    }

    pub fn modes(&self) -> usize {
        self.caps.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    /// The same space with every cap increased by `extra`.
    pub fn with_headroom(&self, extra: u32) -> Self {
        Self::new(self.caps.iter().map(|&c| c + extra).collect())
    }

    /// Index of an occupation vector; `None` when any mode exceeds its cap.
    pub fn index(&self, occ: &[u32]) -> Option<usize> {
        debug_assert_eq!(occ.len(), self.caps.len());
        let mut idx = 0usize;
        for (b, (&v, &cap)) in occ.iter().zip(&self.caps).enumerate() {
            if v > cap {
                return None;
            }
            let _ = b;
            idx = idx * (cap as usize + 1) + v as usize;
        }
        Some(idx)
    }

    /// Occupation vector of a basis index.
    pub fn occupation(&self, mut idx: usize) -> Vec<u32> {
        let mut occ = vec![0u32; self.caps.len()];
        for b in (0..self.caps.len()).rev() {
            let base = self.caps[b] as usize + 1;
            occ[b] = (idx % base) as u32;
            idx /= base;
        }
        occ
    }

    pub fn basis(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.dim).map(|i| self.occupation(i))
    }
}

/// Which coefficient set a site operator carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Rates `w_r` per surviving term.
    Plain,
    /// Rates `w_r (w_r + g(alpha))`, the hatted companion.
    Hat,
}

/// Sparse operator on a [`TruncatedSpace`] with polynomial entries,
/// stored column-major. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: TruncatedSpace,
    nvars: usize,
    cols: Vec<Vec<(usize, Polynomial)>>,
}

/// A sparse vector over the basis, used when applying operators.
pub type SparseVec = BTreeMap<usize, Polynomial>;

impl FockOperator {
    pub fn zero(space: TruncatedSpace, nvars: usize) -> Self {
        let dim = space.dim();
        FockOperator { space, nvars, cols: vec![Vec::new(); dim] }
    }

    pub fn identity(space: TruncatedSpace, nvars: usize) -> Self {
        let dim = space.dim();
        let cols = (0..dim).map(|i| vec![(i, Polynomial::one(nvars))]).collect();
        FockOperator { space, nvars, cols }
    }

    /// Raising operator on one mode (annihilates the cap level by
    /// truncation).
    pub fn raising(space: TruncatedSpace, nvars: usize, mode: usize) -> Result<Self, FockError> {
        Self::shift(space, nvars, mode, 1)
    }

    /// Lowering operator on one mode (annihilates the vacuum).
    pub fn lowering(space: TruncatedSpace, nvars: usize, mode: usize) -> Result<Self, FockError> {
        Self::shift(space, nvars, mode, -1)
    }

    fn shift(
        space: TruncatedSpace,
        nvars: usize,
        mode: usize,
        delta: i64,
    ) -> Result<Self, FockError> {
        if mode >= space.modes() {
            return Err(FockError::ModeOutOfRange(mode, space.modes()));
        }
        let mut op = Self::zero(space, nvars);
        for (i, mut occ) in op.space.basis().enumerate().collect::<Vec<_>>() {
            let v = occ[mode] as i64 + delta;
            if v < 0 {
                continue;
            }
            occ[mode] = v as u32;
            if let Some(j) = op.space.index(&occ) {
                op.cols[i].push((j, Polynomial::one(nvars)));
            }
        }
        Ok(op)
    }

    /// Projector onto occupation 0 of one mode.
    pub fn vacuum_projector(
        space: TruncatedSpace,
        nvars: usize,
        mode: usize,
    ) -> Result<Self, FockError> {
        Self::mode_projector(space, nvars, mode, true)
    }

    /// Its complement `d = 1 - k`.
    pub fn occupied_projector(
        space: TruncatedSpace,
        nvars: usize,
        mode: usize,
    ) -> Result<Self, FockError> {
        Self::mode_projector(space, nvars, mode, false)
    }

    fn mode_projector(
        space: TruncatedSpace,
        nvars: usize,
        mode: usize,
        vacuum: bool,
    ) -> Result<Self, FockError> {
        if mode >= space.modes() {
            return Err(FockError::ModeOutOfRange(mode, space.modes()));
        }
        let mut op = Self::zero(space, nvars);
        for i in 0..op.space.dim() {
            let occ = op.space.occupation(i);
            if (occ[mode] == 0) == vacuum {
                op.cols[i].push((i, Polynomial::one(nvars)));
            }
        }
        Ok(op)
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Entries of one column (the image of a basis vector).
    pub fn column(&self, i: usize) -> &[(usize, Polynomial)] {
        &self.cols[i]
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    fn check_compatible(&self, rhs: &Self) -> Result<(), FockError> {
        if self.space != rhs.space || self.nvars != rhs.nvars {
            return Err(FockError::SpaceMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, FockError> {
        self.check_compatible(rhs)?;
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| {
                let mut acc: BTreeMap<usize, Polynomial> = BTreeMap::new();
                for (r, p) in a.iter().chain(b) {
                    match acc.get_mut(r) {
                        Some(q) => q.add_assign(p).expect("same ring"),
                        None => {
                            acc.insert(*r, p.clone());
                        }
                    }
                }
                acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
            })
            .collect();
        Ok(FockOperator { space: self.space.clone(), nvars: self.nvars, cols })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, FockError> {
        self.add(&rhs.scale(&Polynomial::constant(rhs.nvars, -1)))
    }

    pub fn scale(&self, p: &Polynomial) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .filter_map(|(r, q)| {
                        let s = q.mul(p).expect("same ring");
                        if s.is_zero() {
                            None
                        } else {
                            Some((*r, s))
                        }
                    })
                    .collect()
            })
            .collect();
        FockOperator { space: self.space.clone(), nvars: self.nvars, cols }
    }

    /// Operator product `self o rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Self) -> Result<Self, FockError> {
        self.check_compatible(rhs)?;
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, Polynomial> = BTreeMap::new();
                for (mid, p) in col {
                    for (out, q) in &self.cols[*mid] {
                        let term = q.mul(p).expect("same ring");
                        match acc.get_mut(out) {
                            Some(x) => x.add_assign(&term).expect("same ring"),
                            None => {
                                acc.insert(*out, term);
                            }
                        }
                    }
                }
                acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
            })
            .collect();
        Ok(FockOperator { space: self.space.clone(), nvars: self.nvars, cols })
    }

    /// Tensor product; the result lives on the concatenated mode list.
    pub fn tensor(&self, rhs: &Self) -> Result<Self, FockError> {
        if self.nvars != rhs.nvars {
            return Err(FockError::SpaceMismatch);
        }
        let mut caps = self.space.caps.clone();
        caps.extend_from_slice(&rhs.space.caps);
        let space = TruncatedSpace::new(caps);
        let dim_r = rhs.space.dim();
        let mut cols = vec![Vec::new(); space.dim()];
        for (ia, ca) in self.cols.iter().enumerate() {
            for (ib, cb) in rhs.cols.iter().enumerate() {
                let col = &mut cols[ia * dim_r + ib];
                for (ra, pa) in ca {
                    for (rb, pb) in cb {
                        col.push((ra * dim_r + rb, pa.mul(pb).expect("same ring")));
                    }
                }
            }
        }
        Ok(FockOperator { space, nvars: self.nvars, cols })
    }

    /// Apply to a sparse vector.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (col, p) in v {
            for (row, q) in &self.cols[*col] {
                let term = q.mul(p).expect("same ring");
                match out.get_mut(row) {
                    Some(x) => x.add_assign(&term).expect("same ring"),
                    None => {
                        out.insert(*row, term);
                    }
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Polynomial {
        let mut acc = Polynomial::zero(self.nvars);
        for (i, col) in self.cols.iter().enumerate() {
            for (row, p) in col {
                if *row == i {
                    acc.add_assign(p).expect("same ring");
                }
            }
        }
        acc
    }

    /// Debug dump as JSON sparse triplets.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .cols
            .iter()
            .enumerate()
            .flat_map(|(col, c)| {
                c.iter().map(move |(row, p)| {
                    serde_json::json!({"row": row, "col": col, "poly": p.to_json_terms()})
                })
            })
            .collect();
        serde_json::json!({"caps": self.space.caps, "entries": entries})
    }
}

/// Trace of an ordered operator product, without materializing it.
///
/// Follows each basis vector through the factors right to left, branching
/// where a column has several entries; the site operators used by the
/// steady-state recursion have at most one entry per column, so this is a
/// single pass over the basis.
pub fn trace_product(ops: &[&FockOperator]) -> Result<Polynomial, FockError> {
    let first = *ops.first().ok_or(FockError::EmptyProduct)?;
    for op in ops {
        first.check_compatible(op)?;
    }
    let mut acc = Polynomial::zero(first.nvars);
    for start in 0..first.space.dim() {
        walk(ops, ops.len(), start, start, &Polynomial::one(first.nvars), &mut acc);
    }
    Ok(acc)
}

fn walk(
    ops: &[&FockOperator],
    stage: usize,
    state: usize,
    start: usize,
    weight: &Polynomial,
    acc: &mut Polynomial,
) {
    if stage == 0 {
        if state == start {
            acc.add_assign(weight).expect("same ring");
        }
        return;
    }
    for (next, p) in ops[stage - 1].column(state) {
        let w = weight.mul(p).expect("same ring");
        walk(ops, stage - 1, *next, start, &w, acc);
    }
}

/// The site operator of the matrix-product representation at `level`
/// (written `A` for [`OperatorKind::Plain`] and `A-hat` for
/// [`OperatorKind::Hat`]).
///
/// `mu` is a local state with `level - 1` species (one per mode of
/// `space`), `alpha` a local state with `level` species; `nvars` is the
/// ambient variable count of the polynomial entries. The operator
/// annihilates `alpha`'s first `level - 1` occupations, applies the
/// projector sum selected by `alpha`'s tail of zeros, and creates `mu`.
pub fn site_operator(
    space: &TruncatedSpace,
    nvars: usize,
    level: usize,
    mu: &LocalState,
    alpha: &LocalState,
    kind: OperatorKind,
) -> Result<FockOperator, FockError> {
    if level < 2 {
        return Err(FockError::LevelTooSmall(level));
    }
    if space.modes() != level - 1 {
        return Err(FockError::Shape(format!(
            "space has {} modes, level {level} needs {}",
            space.modes(),
            level - 1
        )));
    }
    if mu.nvars() != level - 1 || alpha.nvars() != level {
        return Err(FockError::Shape(format!(
            "mu has {} species and alpha {}, expected {} and {level}",
            mu.nvars(),
            alpha.nvars(),
            level - 1
        )));
    }
    if nvars < level {
        return Err(FockError::Shape(format!(
            "ambient ring has {nvars} variables, level {level} needs at least that many"
        )));
    }

    let a_mult = alpha.mult();
    let g_alpha = exit_rate_in(alpha, nvars);
    // per-term coefficient, with the delta-condition on alpha's tail
    // evaluated up front so vanishing terms are never materialized
    let mut term_coeff: Vec<Option<Polynomial>> = Vec::with_capacity(level);
    for r in 1..level {
        if a_mult[r..].iter().any(|&c| c != 0) {
            term_coeff.push(None);
            continue;
        }
        term_coeff.push(Some(rate_factor(nvars, r, &g_alpha, kind)));
    }
    let top = rate_factor(nvars, level, &g_alpha, kind);

    let mut op = FockOperator::zero(space.clone(), nvars);
    let annihilate = &a_mult[..level - 1];
    let create = mu.mult();
    for i in 0..op.space.dim() {
        let occ = op.space.occupation(i);
        let mut mid = Vec::with_capacity(level - 1);
        let mut ok = true;
        for (v, d) in occ.iter().zip(annihilate) {
            match v.checked_sub(*d) {
                Some(x) => mid.push(x),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut coeff = Polynomial::zero(nvars);
        for (r_idx, tc) in term_coeff.iter().enumerate() {
            let Some(tc) = tc else { continue };
            // K_r: modes before r empty, mode r occupied
            if mid[..r_idx].iter().all(|&v| v == 0) && mid[r_idx] >= 1 {
                coeff.add_assign(tc).expect("same ring");
            }
        }
        if mid.iter().all(|&v| v == 0) {
            coeff.add_assign(&top).expect("same ring");
        }
        if coeff.is_zero() {
            continue;
        }
        let out: Vec<u32> = mid.iter().zip(create).map(|(v, c)| v + c).collect();
        if let Some(j) = op.space.index(&out) {
            op.cols[i].push((j, coeff));
        }
    }
    Ok(op)
}

fn rate_factor(nvars: usize, r: usize, g_alpha: &Polynomial, kind: OperatorKind) -> Polynomial {
    let wr = Polynomial::var(nvars, r).expect("level <= nvars");
    match kind {
        OperatorKind::Plain => wr,
        OperatorKind::Hat => {
            let shifted = wr.add(g_alpha).expect("same ring");
            wr.mul(&shifted).expect("same ring")
        }
    }
}

/// Report of a completed hat-relation sweep.
#[derive(Debug, Clone, Copy)]
pub struct HatCheckReport {
    /// Number of `(alpha, beta, mu, nu)` tuples verified.
    pub tuples: u64,
    /// Occupation bound per species/mode.
    pub bound: u32,
    /// Per-mode cap of the truncated space used.
    pub cap: u32,
}

/// Verify the generalized hat relation for all local states with
/// occupations up to `bound`.
///
/// For each tuple the two sides are expanded on every input basis vector
/// with occupations `<= bound` per mode. The space is capped at `3*bound`:
/// annihilation precedes creation inside every factor and multiset
/// conservation bounds total creation by `2*bound` per mode, so those
/// columns agree exactly with the untruncated operators.
pub fn check_hat_relation(n: usize, bound: u32) -> Result<HatCheckReport, FockError> {
    if n < 2 {
        return Err(FockError::LevelTooSmall(n));
    }
    let modes = n - 1;
    let cap = 3 * bound;
    let space = TruncatedSpace::uniform(modes, cap);
    let alphas = boxed_states(n, bound);
    let mus = boxed_states(modes, bound);
    let columns: Vec<usize> = TruncatedSpace::uniform(modes, bound)
        .basis()
        .map(|occ| space.index(&occ).expect("bound <= cap"))
        .collect();

    let mut tuples: Vec<(LocalState, LocalState, LocalState, LocalState)> =
        Vec::with_capacity(alphas.len() * alphas.len() * mus.len() * mus.len());
    for a in &alphas {
        for b in &alphas {
            for m in &mus {
                for v in &mus {
                    tuples.push((a.clone(), b.clone(), m.clone(), v.clone()));
                }
            }
        }
    }

    let count = tuples.len() as u64;
    tuples
        .par_iter()
        .try_for_each_init(OperatorCache::default, |cache, (alpha, beta, mu, nu)| {
            check_one_tuple(&space, n, &columns, cache, alpha, beta, mu, nu)
        })?;

    Ok(HatCheckReport { tuples: count, bound, cap })
}

#[derive(Default)]
struct OperatorCache {
    ops: HashMap<(Vec<u32>, Vec<u32>, OperatorKind), FockOperator>,
}

impl OperatorCache {
    fn get(
        &mut self,
        space: &TruncatedSpace,
        n: usize,
        mu: &LocalState,
        alpha: &LocalState,
        kind: OperatorKind,
    ) -> &FockOperator {
        let key = (mu.mult().to_vec(), alpha.mult().to_vec(), kind);
        self.ops.entry(key).or_insert_with(|| {
            site_operator(space, n, n, mu, alpha, kind).expect("shapes validated by caller")
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn check_one_tuple(
    space: &TruncatedSpace,
    n: usize,
    columns: &[usize],
    cache: &mut OperatorCache,
    alpha: &LocalState,
    beta: &LocalState,
    mu: &LocalState,
    nu: &LocalState,
) -> Result<(), FockError> {
    use OperatorKind::{Hat, Plain};
    let g_beta = exit_rate_in(beta, n);
    let g_nu = exit_rate_in(nu, n);

    for &col in columns {
        let unit: SparseVec = [(col, Polynomial::one(n))].into_iter().collect();

        // h-conjugated sum over predecessors of (alpha, beta)
        let mut lhs = SparseVec::new();
        for (gamma, delta, rate_species) in predecessors(alpha, beta) {
            let inner = cache.get(space, n, nu, &delta, Plain).apply(&unit);
            let outer = cache.get(space, n, mu, &gamma, Plain).apply(&inner);
            let rate = Polynomial::var(n, rate_species).expect("species in range");
            accumulate(&mut lhs, &outer, &rate);
        }
        // both diagonal terms act on the same product
        let base_inner = cache.get(space, n, nu, beta, Plain).apply(&unit);
        let base = cache.get(space, n, mu, alpha, Plain).apply(&base_inner);
        let diag = g_nu.sub(&g_beta).expect("same ring");
        accumulate(&mut lhs, &base, &diag);
        // minus the lowered-model sum over successors of (mu, nu)
        for lt in local_transitions(mu, nu) {
            let inner = cache.get(space, n, &lt.delta, beta, Plain).apply(&unit);
            let outer = cache.get(space, n, &lt.gamma, alpha, Plain).apply(&inner);
            let rate = Polynomial::var(n, lt.rate_species).expect("species in range");
            accumulate(&mut lhs, &outer, &rate.neg());
        }

        // hat side
        let mut rhs = SparseVec::new();
        let hat_outer = cache.get(space, n, mu, alpha, Hat).apply(&base_inner);
        accumulate(&mut rhs, &hat_outer, &Polynomial::one(n));
        let hat_inner = cache.get(space, n, nu, beta, Hat).apply(&unit);
        let plain_outer = cache.get(space, n, mu, alpha, Plain).apply(&hat_inner);
        accumulate(&mut rhs, &plain_outer, &Polynomial::constant(n, -1));

        if !sparse_eq(&lhs, &rhs) {
            return Err(FockError::HatViolation {
                alpha: alpha.mult().to_vec(),
                beta: beta.mult().to_vec(),
                mu: mu.mult().to_vec(),
                nu: nu.mult().to_vec(),
                column: space.occupation(col),
            });
        }
    }
    Ok(())
}

fn accumulate(acc: &mut SparseVec, v: &SparseVec, scale: &Polynomial) {
    for (row, p) in v {
        let term = p.mul(scale).expect("same ring");
        match acc.get_mut(row) {
            Some(x) => x.add_assign(&term).expect("same ring"),
            None => {
                acc.insert(*row, term);
            }
        }
    }
}

fn sparse_eq(a: &SparseVec, b: &SparseVec) -> bool {
    let zero = |m: &SparseVec, k: &usize| m.get(k).map(|p| p.is_zero()).unwrap_or(true);
    for (k, p) in a {
        if p.is_zero() {
            continue;
        }
        if b.get(k) != Some(p) {
            return false;
        }
    }
    for (k, p) in b {
        if !p.is_zero() && zero(a, k) {
            return false;
        }
    }
    true
}

/// Pairs `(gamma, delta, rate_species)` that transition *into*
/// `(alpha, beta)`: a nonempty sub-multiset `t` of alpha, supported on
/// species `>= max(beta)`, hops back, giving `gamma = alpha \ t`,
/// `delta = beta U t` and rate species `min(t)`.
pub fn predecessors(
    alpha: &LocalState,
    beta: &LocalState,
) -> Vec<(LocalState, LocalState, usize)> {
    let n = alpha.nvars();
    let lowest = beta.max_species().unwrap_or(1);
    let bounds: Vec<u32> = alpha
        .mult()
        .iter()
        .enumerate()
        .map(|(idx, &c)| if idx + 1 >= lowest { c } else { 0 })
        .collect();
    let mut out = Vec::new();
    let mut t = vec![0u32; n];
    loop {
        // advance t in mixed radix within bounds
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if t[i] < bounds[i] {
                t[i] += 1;
                for x in t[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
            t[i] = 0;
        }
        let moved = LocalState::new(t.clone());
        let gamma = alpha.difference(&moved).expect("t <= alpha");
        let delta = beta.union(&moved).expect("same ambient");
        let rate_species = moved.min_species().expect("t nonempty");
        out.push((gamma, delta, rate_species));
    }
}

fn boxed_states(n: usize, bound: u32) -> Vec<LocalState> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=bound).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(LocalState::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::LocalState;

    fn one_mode(cap: u32) -> TruncatedSpace {
        TruncatedSpace::uniform(1, cap)
    }

    fn ls(v: &[u32]) -> LocalState {
        LocalState::new(v.to_vec())
    }

    #[test]
    fn index_round_trip() {
        let s = TruncatedSpace::new(vec![1, 2, 1]);
        assert_eq!(s.dim(), 12);
        for i in 0..s.dim() {
            assert_eq!(s.index(&s.occupation(i)), Some(i));
        }
        assert_eq!(s.index(&[0, 3, 0]), None);
    }

    #[test]
    fn single_mode_operator_relations() {
        let space = one_mode(3);
        let up = FockOperator::raising(space.clone(), 1, 0).unwrap();
        let down = FockOperator::lowering(space.clone(), 1, 0).unwrap();
        let k = FockOperator::vacuum_projector(space.clone(), 1, 0).unwrap();
        let d = FockOperator::occupied_projector(space.clone(), 1, 0).unwrap();
        let id = FockOperator::identity(space.clone(), 1);

        // a- a+ = 1 below the cap, k + a+ a- = 1 everywhere
        let da = down.mul(&up).unwrap();
        for col in 0..3 {
            assert_eq!(da.column(col), id.column(col));
        }
        let ad = up.mul(&down).unwrap();
        assert_eq!(k.add(&ad).unwrap(), id);
        // d = 1 - k
        assert_eq!(id.sub(&k).unwrap(), d);
    }

    #[test]
    fn trace_of_vacuum_projector() {
        let space = one_mode(2);
        let k = FockOperator::vacuum_projector(space, 1, 0).unwrap();
        assert_eq!(k.trace().to_string(), "1");
    }

    #[test]
    fn site_operator_small_cases() {
        // level 2: A_{0,01} = w2 k, A_{1,10} = a+ (w1 d + w2 k) a-
        let space = one_mode(2);
        let a001 = site_operator(&space, 2, 2, &ls(&[0]), &ls(&[0, 1]), OperatorKind::Plain).unwrap();
        let k = FockOperator::vacuum_projector(space.clone(), 2, 0).unwrap();
        let w2 = Polynomial::var(2, 2).unwrap();
        assert_eq!(a001, k.scale(&w2));

        let a110 = site_operator(&space, 2, 2, &ls(&[1]), &ls(&[1, 0]), OperatorKind::Plain).unwrap();
        let up = FockOperator::raising(space.clone(), 2, 0).unwrap();
        let down = FockOperator::lowering(space.clone(), 2, 0).unwrap();
        let d = FockOperator::occupied_projector(space.clone(), 2, 0).unwrap();
        let w1 = Polynomial::var(2, 1).unwrap();
        let inner = d.scale(&w1).add(&k.scale(&w2)).unwrap();
        let expect = up.mul(&inner).unwrap().mul(&down).unwrap();
        assert_eq!(a110, expect);
    }

    #[test]
    fn site_operator_level_three() {
        // A_{00,000} = w1 d x 1 + w2 k x d + w3 k x k
        let space = TruncatedSpace::uniform(2, 2);
        let a = site_operator(&space, 3, 3, &ls(&[0, 0]), &ls(&[0, 0, 0]), OperatorKind::Plain)
            .unwrap();
        let k0 = FockOperator::vacuum_projector(space.clone(), 3, 0).unwrap();
        let k1 = FockOperator::vacuum_projector(space.clone(), 3, 1).unwrap();
        let d0 = FockOperator::occupied_projector(space.clone(), 3, 0).unwrap();
        let d1 = FockOperator::occupied_projector(space.clone(), 3, 1).unwrap();
        let w = |a| Polynomial::var(3, a).unwrap();
        let expect = d0
            .scale(&w(1))
            .add(&k0.mul(&d1).unwrap().scale(&w(2)))
            .unwrap()
            .add(&k0.mul(&k1).unwrap().scale(&w(3)))
            .unwrap();
        assert_eq!(a, expect);
    }

    #[test]
    fn hat_operator_differs_by_rate_shift() {
        // with g(alpha) = 0 (alpha empty), the hat operator is the plain one
        // with each w_r replaced by w_r^2
        let space = one_mode(2);
        let plain =
            site_operator(&space, 2, 2, &ls(&[0]), &ls(&[0, 0]), OperatorKind::Plain).unwrap();
        let hat = site_operator(&space, 2, 2, &ls(&[0]), &ls(&[0, 0]), OperatorKind::Hat).unwrap();
        let k = FockOperator::vacuum_projector(space.clone(), 2, 0).unwrap();
        let d = FockOperator::occupied_projector(space.clone(), 2, 0).unwrap();
        let w = |a| Polynomial::var(2, a).unwrap();
        assert_eq!(plain, d.scale(&w(1)).add(&k.scale(&w(2))).unwrap());
        let w1sq = w(1).mul(&w(1)).unwrap();
        let w2sq = w(2).mul(&w(2)).unwrap();
        assert_eq!(hat, d.scale(&w1sq).add(&k.scale(&w2sq)).unwrap());
    }

    #[test]
    fn predecessors_of_a_pair() {
        // predecessors of (alpha, beta) = ({1}, {}) : t = {1}
        let preds = predecessors(&ls(&[1, 0]), &ls(&[0, 0]));
        assert_eq!(preds.len(), 1);
        let (gamma, delta, rate) = &preds[0];
        assert!(gamma.is_empty());
        assert_eq!(delta.multiset(), vec![1]);
        assert_eq!(*rate, 1);

        // min(t) >= max(beta) filters low species
        let preds = predecessors(&ls(&[1, 1]), &ls(&[0, 1]));
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].1.multiset(), vec![2, 2]);
    }

    #[test]
    fn hat_relation_small() {
        assert!(check_hat_relation(2, 1).is_ok());
    }

    #[test]
    fn debug_dump_lists_every_entry() {
        let space = one_mode(1);
        let a = site_operator(&space, 2, 2, &ls(&[0]), &ls(&[0, 0]), OperatorKind::Plain).unwrap();
        let dump = a.to_json();
        assert_eq!(dump["caps"], serde_json::json!([1]));
        assert_eq!(dump["entries"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn trace_product_matches_materialized_product() {
        let space = one_mode(2);
        let a = site_operator(&space, 2, 2, &ls(&[1]), &ls(&[1, 0]), OperatorKind::Plain).unwrap();
        let b = site_operator(&space, 2, 2, &ls(&[0]), &ls(&[0, 1]), OperatorKind::Plain).unwrap();
        let via_path = trace_product(&[&a, &b]).unwrap();
        let via_matrix = a.mul(&b).unwrap().trace();
        assert_eq!(via_path, via_matrix);
    }
}
