//! The transition rule, the Markov generator over a sector, steady-state
//! verification and an exact rational kernel solver.
//!
//! A pair of adjacent sites `(alpha, beta)` can change into `(gamma, delta)`
//! when a suffix of beta's sorted species list hops left onto alpha; the
//! rate is the parameter of the smallest species that moved. The generator
//! `H` sums the local rule over all periodic site pairs; its entries are
//! polynomials in `w1..wn` and every column sums to zero.
//!
//! [`solve_kernel`] substitutes exact rational rates and extracts the
//! one-dimensional kernel by fraction-free Gaussian elimination. It is
//! deliberately independent of the matrix-product and multiline modules so
//! it can serve as an oracle for them. No floating point anywhere.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::polyring::Polynomial;
use crate::states::{Configuration, LocalState, Sector, StateError};

#[derive(Debug, Clone, Error)]
pub enum MarkovError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("rate vector has length {0}, expected {1}")]
    BadRates(usize, usize),
    #[error("all rates must be positive, w{0} is not")]
    NonPositiveRate(usize),
    #[error("kernel of the generator has dimension {0}, expected 1 (generator construction bug)")]
    KernelDimension(usize),
    #[error("kernel vector is not sign-definite (generator construction bug)")]
    IndefiniteKernel,
    #[error("steady-state map is missing configuration {0}")]
    MissingConfiguration(String),
}

/// One admissible move of a pair of adjacent sites.
///
/// `split` is the 1-indexed position k in beta's sorted species list: the
/// particles `beta_k..beta_r` hop left, and `rate_species` = beta_k is the
/// smallest species among them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTransition {
    pub gamma: LocalState,
    pub delta: LocalState,
    pub split: usize,
    pub rate_species: usize,
}

/// A move of the whole chain: the local transition applied at `site`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub site: usize,
    pub split: usize,
    pub target: Configuration,
    pub rate_species: usize,
}

/// All local transitions of the pair `(alpha, beta)`, one per split point.
///
/// There are exactly `|beta|` outcomes; an empty second site yields none.
pub fn local_transitions(alpha: &LocalState, beta: &LocalState) -> Vec<LocalTransition> {
    let species = beta.multiset();
    let r = species.len();
    let n = alpha.nvars();
    let mut out = Vec::with_capacity(r);
    for k in 1..=r {
        let moved = LocalState::from_multiset(n, &species[k - 1..]).expect("species in range");
        let gamma = alpha.union(&moved).expect("same ambient n");
        let delta = LocalState::from_multiset(n, &species[..k - 1]).expect("species in range");
        out.push(LocalTransition { gamma, delta, split: k, rate_species: species[k - 1] });
    }
    out
}

/// Total exit rate of a site holding `beta`, as a linear polynomial:
/// `w1*beta^1 + ... + wn*beta^n`.
pub fn exit_rate(beta: &LocalState) -> Polynomial {
    exit_rate_in(beta, beta.nvars())
}

/// Same as [`exit_rate`] but embedded into a ring with `nvars >= n`
/// variables (used by the operator algebra at intermediate levels).
pub fn exit_rate_in(beta: &LocalState, nvars: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for (idx, &c) in beta.mult().iter().enumerate() {
        if c > 0 {
            let mut exps = vec![0u32; nvars];
            exps[idx] = 1;
            p.add_assign(&Polynomial::from_term(nvars, exps, BigInt::from(c)))
                .expect("same ring");
        }
    }
    p
}

/// All chain moves out of `config`, site by site, split by split.
///
/// Events are kept separate here (one entry per `(site, split)`); the
/// generator accumulates them per target instead.
pub fn transitions(config: &Configuration) -> Vec<Transition> {
    let l = config.len();
    let mut out = Vec::new();
    for i in 0..l {
        let alpha = config.site(i);
        let beta = config.site((i + 1) % l);
        for lt in local_transitions(alpha, beta) {
            out.push(Transition {
                site: i,
                split: lt.split,
                target: config.with_pair(i, lt.gamma, lt.delta),
                rate_species: lt.rate_species,
            });
        }
    }
    out
}

/// The Markov generator of a sector over its canonical configuration basis.
///
/// Column-major sparse storage; entry `(row, col)` is the polynomial rate
/// from `basis[col]` to `basis[row]`, the diagonal carries minus the total
/// exit rate, so every column sums to the zero polynomial.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    sector: Sector,
    basis: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    cols: Vec<BTreeMap<usize, Polynomial>>,
}

impl GeneratorMatrix {
    /// Build the generator of a basic sector.
    pub fn build(sector: &Sector) -> Self {
        let basis = sector.enumerate_configurations();
        let index: HashMap<Configuration, usize> =
            basis.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let n = sector.species();
        let cols: Vec<BTreeMap<usize, Polynomial>> = basis
            .iter()
            .enumerate()
            .map(|(col, config)| {
                let mut entries: BTreeMap<usize, Polynomial> = BTreeMap::new();
                let mut diagonal = Polynomial::zero(n);
                for t in transitions(config) {
                    let row = *index.get(&t.target).expect("target stays in the sector");
                    let rate = Polynomial::var(n, t.rate_species).expect("species in range");
                    entries
                        .entry(row)
                        .or_insert_with(|| Polynomial::zero(n))
                        .add_assign(&rate)
                        .expect("same ring");
                }
                for i in 0..sector.chain_length() {
                    diagonal
                        .add_assign(&exit_rate(config.site(i)))
                        .expect("same ring");
                }
                let diagonal = diagonal.neg();
                if !diagonal.is_zero() {
                    entries
                        .entry(col)
                        .or_insert_with(|| Polynomial::zero(n))
                        .add_assign(&diagonal)
                        .expect("same ring");
                }
                entries.retain(|_, p| !p.is_zero());
                entries
            })
            .collect();
        GeneratorMatrix { sector: sector.clone(), basis, index, cols }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn basis(&self) -> &[Configuration] {
        &self.basis
    }

    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Sparse entries as `(row, col, polynomial)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Polynomial)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(col, rows)| rows.iter().map(move |(&row, p)| (row, col, p)))
    }

    /// Sum of each column; all zero for a well-formed generator.
    pub fn column_sums(&self) -> Vec<Polynomial> {
        let n = self.sector.species();
        self.cols
            .iter()
            .map(|rows| {
                let mut acc = Polynomial::zero(n);
                for p in rows.values() {
                    acc.add_assign(p).expect("same ring");
                }
                acc
            })
            .collect()
    }

    /// True when conjugating by the cyclic shift permutation leaves the
    /// matrix unchanged, i.e. `H C = C H`.
    pub fn commutes_with_cyclic_shift(&self) -> bool {
        let perm: Vec<usize> = self
            .basis
            .iter()
            .map(|c| self.index[&c.cyclic_shift()])
            .collect();
        for (col, rows) in self.cols.iter().enumerate() {
            let shifted_col = &self.cols[perm[col]];
            if rows.len() != shifted_col.len() {
                return false;
            }
            for (&row, p) in rows {
                match shifted_col.get(&perm[row]) {
                    Some(q) if q == p => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Apply `H` to a vector of polynomials indexed by the basis.
    pub fn apply(&self, v: &[Polynomial]) -> Vec<Polynomial> {
        let n = self.sector.species();
        let mut out = vec![Polynomial::zero(n); self.dim()];
        for (col, rows) in self.cols.iter().enumerate() {
            if v[col].is_zero() {
                continue;
            }
            for (&row, p) in rows {
                let term = p.mul(&v[col]).expect("same ring");
                out[row].add_assign(&term).expect("same ring");
            }
        }
        out
    }

    /// Substitute rates and return the columns as exact rationals.
    pub fn eval_columns(&self, w: &[BigRational]) -> Result<Vec<BTreeMap<usize, BigRational>>, MarkovError> {
        if w.len() != self.sector.species() {
            return Err(MarkovError::BadRates(w.len(), self.sector.species()));
        }
        let cols = self
            .cols
            .iter()
            .map(|rows| {
                rows.iter()
                    .filter_map(|(&row, p)| {
                        let v = p.eval(w).expect("rate vector checked");
                        if v.is_zero() {
                            None
                        } else {
                            Some((row, v))
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(cols)
    }

    /// Sparse triplet JSON export: `[{"row":r,"col":c,"poly":[terms]}]`.
    pub fn to_json_triplets(&self) -> serde_json::Value {
        let list: Vec<serde_json::Value> = self
            .entries()
            .map(|(row, col, p)| {
                serde_json::json!({"row": row, "col": col, "poly": p.to_json_terms()})
            })
            .collect();
        serde_json::Value::Array(list)
    }
}

/// Witness of a violated steady-state row.
#[derive(Debug, Clone)]
pub struct SteadyViolation {
    pub configuration: Configuration,
    pub residual: Polynomial,
}

/// Assert `H P = 0` as exact polynomial identities.
///
/// Returns the first violated row with its residual polynomial; a missing
/// configuration in `probs` is an input error.
pub fn check_steady(
    generator: &GeneratorMatrix,
    probs: &BTreeMap<Configuration, Polynomial>,
) -> Result<Result<(), SteadyViolation>, MarkovError> {
    let v: Vec<Polynomial> = generator
        .basis()
        .iter()
        .map(|c| {
            probs
                .get(c)
                .cloned()
                .ok_or_else(|| MarkovError::MissingConfiguration(c.to_text()))
        })
        .collect::<Result<_, _>>()?;
    let residuals = generator.apply(&v);
    for (row, r) in residuals.into_iter().enumerate() {
        if !r.is_zero() {
            return Ok(Err(SteadyViolation {
                configuration: generator.basis()[row].clone(),
                residual: r,
            }));
        }
    }
    Ok(Ok(()))
}

/// Exact stationary distribution at fixed positive rational rates.
///
/// Builds the generator, runs fraction-free Gaussian elimination over the
/// integers (exact; rows are rescaled and gcd-reduced, pivots are chosen to
/// limit fill-in), demands a one-dimensional kernel and returns the kernel
/// vector normalized to unit sum.
pub fn solve_kernel(
    sector: &Sector,
    w: &[BigRational],
) -> Result<BTreeMap<Configuration, BigRational>, MarkovError> {
    if w.len() != sector.species() {
        return Err(MarkovError::BadRates(w.len(), sector.species()));
    }
    for (i, wi) in w.iter().enumerate() {
        if *wi <= BigRational::zero() {
            return Err(MarkovError::NonPositiveRate(i + 1));
        }
    }
    let generator = GeneratorMatrix::build(sector);
    let cols = generator.eval_columns(w)?;
    let kernel = rational_kernel(&cols, generator.dim())?;

    // exactness check: H x = 0
    let mut residual = vec![BigRational::zero(); generator.dim()];
    for (col, rows) in cols.iter().enumerate() {
        if kernel[col].is_zero() {
            continue;
        }
        for (&row, v) in rows {
            residual[row] += v * &kernel[col];
        }
    }
    if residual.iter().any(|r| !r.is_zero()) {
        return Err(MarkovError::KernelDimension(0));
    }

    let sum: BigRational = kernel.iter().sum();
    if sum.is_zero() {
        return Err(MarkovError::IndefiniteKernel);
    }
    let sign_positive = sum.is_positive();
    let mut out = BTreeMap::new();
    for (i, x) in kernel.into_iter().enumerate() {
        let p = &x / &sum;
        if x.is_positive() != sign_positive && !x.is_zero() {
            return Err(MarkovError::IndefiniteKernel);
        }
        out.insert(generator.basis()[i].clone(), p);
    }
    Ok(out)
}

/// Kernel of a sparse square matrix given by columns, demanding dimension 1.
fn rational_kernel(
    cols: &[BTreeMap<usize, BigRational>],
    dim: usize,
) -> Result<Vec<BigRational>, MarkovError> {
    // rows as integer vectors (clear denominators, strip content)
    let mut rat_rows: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); dim];
    for (col, entries) in cols.iter().enumerate() {
        for (&row, v) in entries {
            rat_rows[row].insert(col, v.clone());
        }
    }
    let mut int_rows: Vec<BTreeMap<usize, BigInt>> = Vec::with_capacity(dim);
    for row in rat_rows {
        let mut lcm = BigInt::one();
        for v in row.values() {
            lcm = lcm.lcm(v.denom());
        }
        let mut int_row: BTreeMap<usize, BigInt> =
            row.into_iter().map(|(c, v)| (c, v.numer() * (&lcm / v.denom()))).collect();
        reduce_content(&mut int_row);
        int_rows.push(int_row);
    }

    let mut active: Vec<usize> = (0..dim).filter(|&r| !int_rows[r].is_empty()).collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; dim]; // col -> pivot row
    let mut pivot_order: Vec<(usize, usize)> = Vec::new(); // (col, row) in elimination order

    while !active.is_empty() {
        // column with fewest active entries, then row with fewest entries
        let mut col_count: HashMap<usize, usize> = HashMap::new();
        for &r in &active {
            for &c in int_rows[r].keys() {
                if pivot_of_col[c].is_none() {
                    *col_count.entry(c).or_insert(0) += 1;
                }
            }
        }
        let Some((&pc, _)) = col_count.iter().min_by_key(|(&c, &cnt)| (cnt, c)) else {
            break; // no eliminable column left
        };
        let pr = *active
            .iter()
            .filter(|&&r| int_rows[r].contains_key(&pc))
            .min_by_key(|&&r| (int_rows[r].len(), r))
            .expect("column count included an active row");

        let pivot_row = int_rows[pr].clone();
        let p = pivot_row[&pc].clone();
        for &r in &active {
            if r == pr {
                continue;
            }
            let Some(v) = int_rows[r].get(&pc).cloned() else {
                continue;
            };
            // fraction-free update: row <- p*row - v*pivot_row, gcd-reduced
            let g = p.gcd(&v);
            let pf = &p / &g;
            let vf = &v / &g;
            let mut updated: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (&c, x) in &int_rows[r] {
                updated.insert(c, x * &pf);
            }
            for (&c, x) in &pivot_row {
                let delta = x * &vf;
                match updated.get_mut(&c) {
                    Some(y) => {
                        *y -= delta;
                        if y.is_zero() {
                            updated.remove(&c);
                        }
                    }
                    None => {
                        updated.insert(c, -delta);
                    }
                }
            }
            reduce_content(&mut updated);
            int_rows[r] = updated;
        }
        pivot_of_col[pc] = Some(pr);
        pivot_order.push((pc, pr));
        active.retain(|&r| r != pr && !int_rows[r].is_empty());
    }

    let free: Vec<usize> = (0..dim).filter(|&c| pivot_of_col[c].is_none()).collect();
    if free.len() != 1 {
        return Err(MarkovError::KernelDimension(free.len()));
    }
    let free_col = free[0];

    let mut x: Vec<Option<BigRational>> = vec![None; dim];
    x[free_col] = Some(BigRational::one());
    for &(pc, pr) in pivot_order.iter().rev() {
        let mut acc = BigRational::zero();
        let mut pivot_val = BigInt::zero();
        for (&c, v) in &int_rows[pr] {
            if c == pc {
                pivot_val = v.clone();
            } else {
                let xc = x[c].as_ref().expect("later pivots and the free column are solved");
                acc += BigRational::from_integer(v.clone()) * xc;
            }
        }
        x[pc] = Some(-acc / BigRational::from_integer(pivot_val));
    }
    Ok(x.into_iter().map(|v| v.expect("all columns solved")).collect())
}

fn reduce_content(row: &mut BTreeMap<usize, BigInt>) {
    let mut g = BigInt::zero();
    for v in row.values() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_one() || g.is_zero() {
        return;
    }
    for v in row.values_mut() {
        *v /= &g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local(n: usize, species: &[usize]) -> LocalState {
        LocalState::from_multiset(n, species).unwrap()
    }

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn local_transitions_first_example() {
        // (124, 2335) -> (1245,233,w5),(12345,23,w3),(123345,2,w3),(1223345,e,w2)
        let alpha = local(5, &[1, 2, 4]);
        let beta = local(5, &[2, 3, 3, 5]);
        let got: Vec<(Vec<usize>, Vec<usize>, usize)> = local_transitions(&alpha, &beta)
            .into_iter()
            .map(|t| (t.gamma.multiset(), t.delta.multiset(), t.rate_species))
            .collect();
        let expect = vec![
            (vec![1, 2, 2, 3, 3, 4, 5], vec![], 2),
            (vec![1, 2, 3, 3, 4, 5], vec![2], 3),
            (vec![1, 2, 3, 4, 5], vec![2, 3], 3),
            (vec![1, 2, 4, 5], vec![2, 3, 3], 5),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn local_transitions_empty_and_vacuum() {
        // (3446, e) -> none
        let alpha = local(6, &[3, 4, 4, 6]);
        assert!(local_transitions(&alpha, &LocalState::empty(6)).is_empty());
        // (e, 255) -> (5,25,w5),(55,2,w5),(255,e,w2)
        let got: Vec<(Vec<usize>, Vec<usize>, usize)> =
            local_transitions(&LocalState::empty(5), &local(5, &[2, 5, 5]))
                .into_iter()
                .map(|t| (t.gamma.multiset(), t.delta.multiset(), t.rate_species))
                .collect();
        let expect = vec![
            (vec![2, 5, 5], vec![], 2),
            (vec![5, 5], vec![2], 5),
            (vec![5], vec![2, 5], 5),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn exit_rate_examples() {
        assert_eq!(exit_rate(&local(5, &[2, 3, 3, 5])).to_string(), "w2+2*w3+w5");
        assert_eq!(exit_rate(&LocalState::empty(3)).to_string(), "0");
        assert_eq!(exit_rate(&local(2, &[1, 1])).to_string(), "2*w1");
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        for (n, l, m) in [(1, 3, vec![2]), (2, 2, vec![1, 1]), (2, 3, vec![2, 1]), (3, 2, vec![1, 1, 1])] {
            let s = Sector::new(n, l, m).unwrap();
            let h = GeneratorMatrix::build(&s);
            assert!(h.column_sums().iter().all(|p| p.is_zero()), "n={n} L={l}");
        }
    }

    #[test]
    fn diagonal_matches_total_exit_rate() {
        // configuration (e,2,1) with n=2, L=3: diagonal -(w1+w2)
        let s = Sector::new(2, 3, vec![1, 1]).unwrap();
        let h = GeneratorMatrix::build(&s);
        let c = Configuration::parse("e|2|1", 2).unwrap();
        let col = h.index_of(&c).unwrap();
        let diag = h
            .entries()
            .find(|(r, cl, _)| *r == col && *cl == col)
            .map(|(_, _, p)| p.clone())
            .unwrap();
        assert_eq!(diag.to_string(), "-w1-w2");
    }

    #[test]
    fn uniform_vector_in_kernel_for_one_species() {
        let s = Sector::new(1, 4, vec![2]).unwrap();
        let h = GeneratorMatrix::build(&s);
        let ones = vec![Polynomial::one(1); h.dim()];
        assert!(h.apply(&ones).iter().all(|p| p.is_zero()));
    }

    #[test]
    fn example_steady_vector_is_in_kernel() {
        // n=2, L=2, m=(1,1): (w1+w2)|e,12> + w2|1,2> + shifts
        let s = Sector::new(2, 2, vec![1, 1]).unwrap();
        let h = GeneratorMatrix::build(&s);
        let w1w2 = Polynomial::from_terms(
            2,
            vec![(vec![1, 0], BigInt::one()), (vec![0, 1], BigInt::one())],
        )
        .unwrap();
        let w2 = Polynomial::var(2, 2).unwrap();
        let mut probs = BTreeMap::new();
        probs.insert(Configuration::parse("e|12", 2).unwrap(), w1w2.clone());
        probs.insert(Configuration::parse("12|e", 2).unwrap(), w1w2);
        probs.insert(Configuration::parse("1|2", 2).unwrap(), w2.clone());
        probs.insert(Configuration::parse("2|1", 2).unwrap(), w2);
        assert!(check_steady(&h, &probs).unwrap().is_ok());

        // perturbing one coefficient breaks it
        let mut bad = probs_clone(&h, &probs);
        let key = Configuration::parse("1|2", 2).unwrap();
        let bumped = bad[&key].add(&Polynomial::one(2)).unwrap();
        bad.insert(key, bumped);
        let violation = check_steady(&h, &bad).unwrap().unwrap_err();
        assert!(!violation.residual.is_zero());
    }

    fn probs_clone(
        _h: &GeneratorMatrix,
        p: &BTreeMap<Configuration, Polynomial>,
    ) -> BTreeMap<Configuration, Polynomial> {
        p.clone()
    }

    #[test]
    fn kernel_solver_uniform_and_ratio() {
        // n=1, L=3, m=2: uniform 1/6 whatever the rate
        let s = Sector::new(1, 3, vec![2]).unwrap();
        let probs = solve_kernel(&s, &[rat(7)]).unwrap();
        assert_eq!(probs.len(), 6);
        for v in probs.values() {
            assert_eq!(*v, BigRational::new(1.into(), 6.into()));
        }

        // n=2, L=2, m=(1,1) at w=(1,2): P(e|12)/P(1|2) = (w1+w2)/w2 = 3/2
        let s = Sector::new(2, 2, vec![1, 1]).unwrap();
        let probs = solve_kernel(&s, &[rat(1), rat(2)]).unwrap();
        let a = &probs[&Configuration::parse("e|12", 2).unwrap()];
        let b = &probs[&Configuration::parse("1|2", 2).unwrap()];
        assert_eq!(a / b, BigRational::new(3.into(), 2.into()));
    }

    #[test]
    fn kernel_solver_unit_sum_value() {
        // n=2, L=3, m=(1,1) at w=(1,1): P(e|e|12) = 3/18
        let s = Sector::new(2, 3, vec![1, 1]).unwrap();
        let probs = solve_kernel(&s, &[rat(1), rat(1)]).unwrap();
        let total: BigRational = probs.values().sum();
        assert_eq!(total, BigRational::one());
        assert_eq!(
            probs[&Configuration::parse("e|e|12", 2).unwrap()],
            BigRational::new(3.into(), 18.into())
        );
    }

    #[test]
    fn generator_commutes_with_cyclic_shift() {
        for (n, l, m) in [(2, 3, vec![1, 1]), (2, 4, vec![2, 1]), (3, 3, vec![1, 1, 1])] {
            let s = Sector::new(n, l, m).unwrap();
            assert!(GeneratorMatrix::build(&s).commutes_with_cyclic_shift());
        }
    }

    #[test]
    fn triplet_export_shape() {
        let s = Sector::new(2, 2, vec![1, 1]).unwrap();
        let h = GeneratorMatrix::build(&s);
        let triplets = h.to_json_triplets();
        let list = triplets.as_array().unwrap();
        assert_eq!(list.len(), h.entries().count());
        for t in list {
            assert!(t["row"].is_u64() && t["col"].is_u64() && t["poly"].is_array());
        }
    }

    #[test]
    fn rate_column_sum_matches_exit_rate() {
        // sum of off-diagonal rates out of (alpha,beta) equals exit_rate(beta)
        for beta in [local(3, &[1, 2, 2]), local(3, &[3]), local(3, &[1, 1, 2, 3])] {
            let alpha = local(3, &[2]);
            let mut acc = Polynomial::zero(3);
            for t in local_transitions(&alpha, &beta) {
                acc.add_assign(&Polynomial::var(3, t.rate_species).unwrap()).unwrap();
            }
            assert_eq!(acc, exit_rate(&beta));
        }
    }
}
