//! The combinatorial steady-state construction.
//!
//! A two-row pairing diagram connects the particles of a level-(a-1)
//! configuration (top row) to the dots of a row summing to `l_a` (bottom
//! row): colors are processed in ascending order, each particle's line
//! descends into its south-west neighbor box and scans leftward
//! periodically until it captures the first uncolored dot. Captured dots
//! inherit the line's color, leftover dots become species a, and each
//! bottom border contributes a rate factor — the smallest color crossing
//! it, or `w_a` where nothing crosses. The product of the factors divided
//! by `w_a` is the level weight.
//!
//! Composing the projections over all rows maps a multiline state to a
//! configuration; summing the monomial weights over each fiber builds the
//! steady state.
//!
//! The pairing result does not depend on the order in which same-color
//! particles are processed, nor on which uncolored dot is taken inside a
//! box; the fixed policy below (ascending particle site, lowest dot
//! ordinal) makes diagrams reproducible, and the invariance itself is
//! exercised by tests rather than assumed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::mpf::{Method, SteadyState};
use crate::polyring::{PolyError, Polynomial};
use crate::states::{Configuration, LocalState, MultilineState, Sector, StateError};

#[derive(Debug, Clone, Error)]
pub enum MultilineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("internal weight inconsistency: {0}")]
    Weight(PolyError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid pairing policy: {0}")]
    BadPolicy(String),
    #[error(
        "pairing failure: no uncolored dot found in a full sweep for a color-{color} particle at site {particle_site} (internal error)"
    )]
    PairingFailure { color: usize, particle_site: usize },
}

/// One H-line of a pairing diagram: a particle of `color` at
/// `particle_site` captured the dot `(dot_site, dot_ordinal)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HLine {
    pub color: usize,
    pub particle_site: usize,
    pub dot_site: usize,
    pub dot_ordinal: usize,
}

/// A completed two-row pairing diagram, kept for debugging and golden
/// tests.
#[derive(Debug, Clone)]
pub struct PairingDiagram {
    /// The level a (bottom row sums to `l_a`).
    pub level: usize,
    /// Top row: a configuration with `a-1` species.
    pub top: Configuration,
    /// Bottom row dot counts.
    pub bottom: Vec<u32>,
    pub hlines: Vec<HLine>,
    /// Color of each dot (site -> ordinal -> color), `None` = uncolored.
    pub dot_colors: Vec<Vec<Option<usize>>>,
    /// Colors of the H-lines crossing each bottom border; border `i` sits
    /// between sites `i` and `i+1 mod L` (0-indexed).
    pub border_colors: Vec<Vec<usize>>,
    /// Species index of the rate factor at each border (`a` where nothing
    /// crosses, otherwise the smallest crossing color).
    pub eta_species: Vec<usize>,
    /// The projected level-a configuration.
    pub result: Configuration,
    /// The level weight: the border factor product divided by `w_a`.
    pub weight: Polynomial,
}

impl PairingDiagram {
    /// JSON dump: rows, H-lines and the border factor row.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "level": self.level,
            "top": self.top.to_text(),
            "bottom": self.bottom,
            "hlines": self.hlines.iter().map(|h| {
                serde_json::json!({
                    "color": h.color,
                    "from_site": h.particle_site + 1,
                    "to_site": h.dot_site + 1,
                    "dot": [h.dot_site + 1, h.dot_ordinal],
                })
            }).collect::<Vec<_>>(),
            "eta": self.eta_species.iter().map(|&s| format!("w{s}")).collect::<Vec<_>>(),
            "result": self.result.to_text(),
            "weight": self.weight.to_string(),
        })
    }
}

/// Which uncolored dot to take when a box offers several.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotChoice {
    LowestOrdinal,
    HighestOrdinal,
}

/// Pairing policy: the processing order of same-color particles and the
/// dot tie-break. The default is ascending particle site and lowest
/// ordinal.
#[derive(Debug, Clone)]
pub struct PairingPolicy {
    pub dot_choice: DotChoice,
    /// Optional explicit particle processing order per color: entry `b-1`
    /// lists the particle sites (0-indexed, with multiplicity) of color `b`
    /// in the order they are paired. Must be a permutation of the actual
    /// particle multiset.
    pub particle_order: Option<Vec<Vec<usize>>>,
}

impl Default for PairingPolicy {
    fn default() -> Self {
        PairingPolicy { dot_choice: DotChoice::LowestOrdinal, particle_order: None }
    }
}

/// Run the pairing at `level` on top configuration `top` and bottom row
/// `bottom`, returning the projected configuration and the level weight.
pub fn pair_and_project(
    level: usize,
    top: &Configuration,
    bottom: &[u32],
) -> Result<(Configuration, Polynomial), MultilineError> {
    let d = pairing_diagram(level, top, bottom)?;
    Ok((d.result, d.weight))
}

/// Full diagram under the default policy.
pub fn pairing_diagram(
    level: usize,
    top: &Configuration,
    bottom: &[u32],
) -> Result<PairingDiagram, MultilineError> {
    pairing_diagram_with(level, top, bottom, &PairingPolicy::default())
}

/// Full diagram under an explicit policy.
pub fn pairing_diagram_with(
    level: usize,
    top: &Configuration,
    bottom: &[u32],
    policy: &PairingPolicy,
) -> Result<PairingDiagram, MultilineError> {
    let a = level;
    if a < 2 {
        return Err(MultilineError::Shape(format!("pairing needs level >= 2, got {a}")));
    }
    if top.nvars() != a - 1 {
        return Err(MultilineError::Shape(format!(
            "top row has {} species, level {a} needs {}",
            top.nvars(),
            a - 1
        )));
    }
    let l = top.len();
    if bottom.len() != l {
        return Err(MultilineError::Shape(format!(
            "bottom row has length {}, top has {l}",
            bottom.len()
        )));
    }
    let particles: u64 = (0..l).map(|i| top.site(i).size() as u64).sum();
    let dots: u64 = bottom.iter().map(|&x| x as u64).sum();
    if dots <= particles {
        return Err(MultilineError::Shape(format!(
            "bottom row must carry more dots ({dots}) than top particles ({particles})"
        )));
    }

    let mut dot_colors: Vec<Vec<Option<usize>>> =
        bottom.iter().map(|&c| vec![None; c as usize]).collect();
    let mut uncolored: Vec<u32> = bottom.to_vec();
    let mut border_colors: Vec<Vec<usize>> = vec![Vec::new(); l];
    let mut hlines = Vec::new();

    for color in 1..a {
        let order = particle_order_for(top, color, policy)?;
        for &site in &order {
            let mut j = (site + l - 1) % l;
            let mut steps = 0usize;
            loop {
                if uncolored[j] > 0 {
                    let ordinal = match policy.dot_choice {
                        DotChoice::LowestOrdinal => dot_colors[j]
                            .iter()
                            .position(|c| c.is_none())
                            .expect("uncolored count is positive"),
                        DotChoice::HighestOrdinal => dot_colors[j]
                            .iter()
                            .rposition(|c| c.is_none())
                            .expect("uncolored count is positive"),
                    };
                    dot_colors[j][ordinal] = Some(color);
                    uncolored[j] -= 1;
                    hlines.push(HLine {
                        color,
                        particle_site: site,
                        dot_site: j,
                        dot_ordinal: ordinal,
                    });
                    break;
                }
                // leave box j to the left: cross the border between j-1 and j
                border_colors[(j + l - 1) % l].push(color);
                j = (j + l - 1) % l;
                steps += 1;
                if steps >= l {
                    return Err(MultilineError::PairingFailure { color, particle_site: site });
                }
            }
        }
    }

    let eta_species: Vec<usize> = border_colors
        .iter()
        .map(|cs| cs.iter().min().copied().unwrap_or(a))
        .collect();
    let mut weight = Polynomial::one(a);
    for &s in &eta_species {
        weight = weight.mul_var(s).map_err(MultilineError::Weight)?;
    }
    let weight = weight.exact_div_var(a).map_err(MultilineError::Weight)?;

    let result_sites: Vec<LocalState> = dot_colors
        .iter()
        .map(|dots| {
            let mut mult = vec![0u32; a];
            for d in dots {
                match d {
                    Some(b) => mult[b - 1] += 1,
                    None => mult[a - 1] += 1,
                }
            }
            LocalState::new(mult)
        })
        .collect();
    let result = Configuration::new(result_sites)?;

    Ok(PairingDiagram {
        level: a,
        top: top.clone(),
        bottom: bottom.to_vec(),
        hlines,
        dot_colors,
        border_colors,
        eta_species,
        result,
        weight,
    })
}

fn particle_order_for(
    top: &Configuration,
    color: usize,
    policy: &PairingPolicy,
) -> Result<Vec<usize>, MultilineError> {
    let mut default_order = Vec::new();
    for i in 0..top.len() {
        for _ in 0..top.site(i).count(color) {
            default_order.push(i);
        }
    }
    match &policy.particle_order {
        None => Ok(default_order),
        Some(orders) => {
            let given = orders.get(color - 1).ok_or_else(|| {
                MultilineError::BadPolicy(format!("no particle order for color {color}"))
            })?;
            let mut a = given.clone();
            let mut b = default_order.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(MultilineError::BadPolicy(format!(
                    "particle order for color {color} is not a permutation of the particle multiset"
                )));
            }
            Ok(given.clone())
        }
    }
}

/// The intermediate configurations and per-level weights of one multiline
/// state.
#[derive(Debug, Clone)]
pub struct MultilineTrace {
    /// `sigma^1, ..., sigma^n`, each in the ambient ring of the full model.
    pub intermediates: Vec<Configuration>,
    /// Level weights for levels `2..=n`, embedded into the full ring.
    pub level_weights: Vec<Polynomial>,
    /// Their product (the constant 1 for n = 1).
    pub weight: Polynomial,
}

/// Run the whole projection tower for one multiline state.
pub fn unfold(x: &MultilineState) -> Result<MultilineTrace, MultilineError> {
    let n = x.levels();
    let sigma1 = Configuration::new(
        x.row(1).iter().map(|&c| LocalState::new(vec![c])).collect(),
    )?;
    let mut intermediates = vec![sigma1];
    let mut level_weights = Vec::with_capacity(n.saturating_sub(1));
    for a in 2..=n {
        let (next, w) = pair_and_project(a, intermediates.last().expect("nonempty"), x.row(a))?;
        intermediates.push(next);
        level_weights.push(w.extend_vars(n).map_err(MultilineError::Weight)?);
    }
    let mut weight = Polynomial::one(n);
    for w in &level_weights {
        weight = weight.mul(w).map_err(MultilineError::Weight)?;
    }
    Ok(MultilineTrace { intermediates, level_weights, weight })
}

/// The projection to a configuration of the full model.
pub fn project(x: &MultilineState) -> Result<Configuration, MultilineError> {
    let mut t = unfold(x)?;
    Ok(t.intermediates.pop().expect("nonempty by construction"))
}

/// The monomial weight of a multiline state.
pub fn weight(x: &MultilineState) -> Result<Polynomial, MultilineError> {
    Ok(unfold(x)?.weight)
}

/// Steady state of a basic sector by fiber-summing multiline weights.
pub fn steady_state_multiline(sector: &Sector) -> Result<SteadyState, MultilineError> {
    let states = sector.enumerate_multiline();
    let merged: Result<BTreeMap<Configuration, Polynomial>, MultilineError> = states
        .par_chunks(1024.max(states.len() / 64 + 1))
        .map(|chunk| {
            let mut local: BTreeMap<Configuration, Polynomial> = BTreeMap::new();
            for x in chunk {
                let trace = unfold(x)?;
                let target = trace.intermediates.last().expect("nonempty").clone();
                match local.get_mut(&target) {
                    Some(p) => p.add_assign(&trace.weight).expect("same ring"),
                    None => {
                        local.insert(target, trace.weight);
                    }
                }
            }
            Ok(local)
        })
        .reduce(
            || Ok(BTreeMap::new()),
            |a, b| {
                let mut a = a?;
                for (k, v) in b? {
                    match a.get_mut(&k) {
                        Some(p) => p.add_assign(&v).expect("same ring"),
                        None => {
                            a.insert(k, v);
                        }
                    }
                }
                Ok(a)
            },
        );
    let probs = merged?;
    debug_assert!(probs.keys().all(|c| sector.contains(c)));
    Ok(SteadyState::new(sector.clone(), probs, Method::Multiline))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example_pairing() {
        // level 4 on L=7: top (e,13,2,3,e,12,11), bottom (0,2,1,2,0,1,3)
        let top = Configuration::parse("e|13|2|3|e|12|11", 3).unwrap();
        let bottom = [0u32, 2, 1, 2, 0, 1, 3];
        let d = pairing_diagram(4, &top, &bottom).unwrap();
        assert_eq!(d.result.to_text(), "e|23|2|11|e|1|134");
        let eta: Vec<usize> = d.eta_species.clone();
        assert_eq!(eta, vec![4, 3, 2, 1, 1, 4, 1]);
        assert_eq!(d.weight.to_string(), "w1^3*w2*w3*w4");
    }

    #[test]
    fn running_example_diagram_dump() {
        let top = Configuration::parse("e|13|2|3|e|12|11", 3).unwrap();
        let d = pairing_diagram(4, &top, &[0, 2, 1, 2, 0, 1, 3]).unwrap();
        let dump = d.to_json();
        assert_eq!(
            dump["eta"],
            serde_json::json!(["w4", "w3", "w2", "w1", "w1", "w4", "w1"])
        );
        // uncrossed borders carry no line; border 4 (between sites 4 and 5)
        // is crossed by two color-1 lines and one color-2 line
        assert_eq!(d.border_colors[5], Vec::<usize>::new());
        assert_eq!({ let mut v = d.border_colors[3].clone(); v.sort_unstable(); v }, vec![1, 1, 2]);
        // every H-line of the diagram, as (color, from 1-indexed site, to site)
        let mut lines: Vec<(usize, usize, usize)> = d
            .hlines
            .iter()
            .map(|h| (h.color, h.particle_site + 1, h.dot_site + 1))
            .collect();
        lines.sort_unstable();
        assert_eq!(
            lines,
            vec![
                (1, 2, 7),
                (1, 6, 4),
                (1, 7, 4),
                (1, 7, 6),
                (2, 3, 2),
                (2, 6, 3),
                (3, 2, 7),
                (3, 4, 2),
            ]
        );
    }

    #[test]
    fn forced_pairing_small_case() {
        // level 2, L=2: top (1, e), bottom (1,1); the single color-1
        // particle is forced, both orders give the same output
        let top = Configuration::parse("1|e", 1).unwrap();
        let (phi, w) = pair_and_project(2, &top, &[1, 1]).unwrap();
        let with_policy = pairing_diagram_with(
            2,
            &top,
            &[1, 1],
            &PairingPolicy { dot_choice: DotChoice::HighestOrdinal, particle_order: None },
        )
        .unwrap();
        assert_eq!(with_policy.result, phi);
        assert_eq!(with_policy.weight, w);
        // divisibility by w2 held (weight is a monomial)
        assert_eq!(w.num_terms(), 1);
    }

    #[test]
    fn projection_identity_for_one_row() {
        let x = MultilineState::new(vec![vec![1, 0, 2]]).unwrap();
        let c = project(&x).unwrap();
        assert_eq!(c.to_text(), "1|e|11");
        assert_eq!(weight(&x).unwrap().to_string(), "1");
    }

    #[test]
    fn example_fiber_member() {
        // y1 = (1,2,0,2) x (2,1,1,0) x (1,2,0,0) x (0,1,0,0)
        let x = MultilineState::new(vec![
            vec![0, 1, 0, 0],
            vec![1, 2, 0, 0],
            vec![2, 1, 1, 0],
            vec![1, 2, 0, 2],
        ])
        .unwrap();
        let t = unfold(&x).unwrap();
        assert_eq!(t.intermediates[0].to_text(), "e|1|e|e");
        assert_eq!(t.intermediates[1].to_text(), "1|22|e|e");
        assert_eq!(t.intermediates[2].to_text(), "22|3|1|e");
        assert_eq!(t.intermediates[3].to_text(), "3|14|e|22");
        assert_eq!(t.weight.to_string(), "w1*w2^3*w3^2*w4^3");
    }

    #[test]
    fn small_sector_steady_state() {
        let s = Sector::new(2, 2, vec![1, 1]).unwrap();
        let ss = steady_state_multiline(&s).unwrap();
        let get = |t: &str| {
            ss.get(&Configuration::parse(t, 2).unwrap()).unwrap().to_string()
        };
        assert_eq!(get("e|12"), "w1+w2");
        assert_eq!(get("1|2"), "w2");
        assert_eq!(get("12|e"), "w1+w2");
        assert_eq!(get("2|1"), "w2");
    }

    #[test]
    fn fibers_partition_the_multiline_set() {
        let s = Sector::new(2, 3, vec![2, 1]).unwrap();
        let ss = steady_state_multiline(&s).unwrap();
        // every configuration is hit and coefficient totals count the fibers
        assert_eq!(ss.probs().len() as u128, s.configuration_count());
        let total: num_bigint::BigInt =
            ss.probs().values().map(|p| p.eval_at_one()).sum();
        assert_eq!(total, num_bigint::BigInt::from(s.multiline_count()));
    }

    #[test]
    fn pairing_is_order_independent_exhaustively() {
        // level 3, L=3: every permutation of same-color particles and both
        // dot choices give the identical diagram output
        let top = Configuration::parse("1|12|2", 2).unwrap();
        let bottom = [2u32, 1, 2];
        let reference = pair_and_project(3, &top, &bottom).unwrap();
        let color1 = vec![vec![0, 1], vec![1, 2]];
        let color1_swapped = vec![vec![1, 0], vec![2, 1]];
        for particle_order in [color1, color1_swapped] {
            for dot_choice in [DotChoice::LowestOrdinal, DotChoice::HighestOrdinal] {
                let d = pairing_diagram_with(
                    3,
                    &top,
                    &bottom,
                    &PairingPolicy { dot_choice, particle_order: Some(particle_order.clone()) },
                )
                .unwrap();
                assert_eq!((d.result, d.weight), reference.clone());
            }
        }
    }
}
