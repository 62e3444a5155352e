//! Brute-force reference solvers: exhaustive minimization, move-space
//! enumeration, and dominance comparisons between move families. Desk-scale
//! only — every operation refuses instead of running past its cap.

use crate::energy::{Instance, Labeling};
use crate::moves::{move_space_size, MoveSpec};
use crate::{Error, Result};

/// Refuse enumerations beyond this many labelings unless the caller picks
/// another cap.
pub const DEFAULT_ENUM_CAP: u128 = 10_000_000;

/// A family of moves, unioned over all parameter choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveSetId {
    /// ICM over every node.
    Icm,
    /// Swaps over every unordered state pair.
    Swap,
    /// Expansions of every state.
    Expansion,
    /// Expansion-shrink over every ordered state pair (including equal
    /// pairs, which degenerate to expansions).
    ExpShrink,
    /// Union of `Swap` and `Expansion`.
    SwapOrExpansion,
}

impl MoveSetId {
    /// Every parameterized move of the family on `inst`, in a fixed order.
    pub fn specs(self, inst: &Instance) -> Vec<MoveSpec> {
        let n = inst.num_nodes();
        let ns = inst.num_states();
        match self {
            MoveSetId::Icm => (0..n).map(|node| MoveSpec::Icm { node }).collect(),
            MoveSetId::Swap => {
                let mut v = Vec::new();
                for alpha in 0..ns {
                    for beta in alpha + 1..ns {
                        v.push(MoveSpec::Swap { alpha, beta });
                    }
                }
                v
            }
            MoveSetId::Expansion => (0..ns).map(|alpha| MoveSpec::Expansion { alpha }).collect(),
            MoveSetId::ExpShrink => {
                let mut v = Vec::new();
                for alpha in 0..ns {
                    for beta in 0..ns {
                        v.push(MoveSpec::ExpShrink { alpha, beta });
                    }
                }
                v
            }
            MoveSetId::SwapOrExpansion => {
                let mut v = MoveSetId::Swap.specs(inst);
                v.extend(MoveSetId::Expansion.specs(inst));
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub labeling: Labeling,
    pub energy: f64,
}

/// Exhaustive global minimum; ties go to the lexicographically smallest
/// labeling. Refuses when `num_states ^ num_nodes` exceeds the cap.
pub fn brute_force_minimum(inst: &Instance) -> Result<OracleSolution> {
    brute_force_minimum_capped(inst, DEFAULT_ENUM_CAP)
}

pub fn brute_force_minimum_capped(inst: &Instance, cap: u128) -> Result<OracleSolution> {
    let size = (inst.num_states() as u128)
        .checked_pow(inst.num_nodes() as u32)
        .unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut x = Labeling::constant(inst.num_nodes(), 0);
    let mut best = OracleSolution {
        energy: inst.total_energy(&x)?,
        labeling: x.clone(),
    };
    while next_labeling(&mut x, inst.num_states()) {
        let e = inst.total_energy(&x)?;
        if e < best.energy {
            best = OracleSolution {
                labeling: x.clone(),
                energy: e,
            };
        }
    }
    Ok(best)
}

/// Advances `x` to the lexicographically next labeling; false once wrapped.
fn next_labeling(x: &mut Labeling, num_states: usize) -> bool {
    for s in x.0.iter_mut().rev() {
        if *s + 1 < num_states {
            *s += 1;
            return true;
        }
        *s = 0;
    }
    false
}

/// All labelings reachable by the single move `spec` from `x`, each exactly
/// once. The current labeling is always among them.
pub fn enumerate_moves(inst: &Instance, x: &Labeling, spec: MoveSpec) -> Result<Vec<Labeling>> {
    enumerate_moves_capped(inst, x, spec, DEFAULT_ENUM_CAP)
}

pub fn enumerate_moves_capped(
    inst: &Instance,
    x: &Labeling,
    spec: MoveSpec,
    cap: u128,
) -> Result<Vec<Labeling>> {
    let size = move_space_size(inst, x, spec)?;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    if let MoveSpec::Icm { node } = spec {
        return Ok((0..inst.num_states())
            .map(|s| {
                let mut y = x.clone();
                y.0[node] = s;
                y
            })
            .collect());
    }
    // Nodes with two distinct choices; everything else stays put.
    let choices: Vec<(usize, [usize; 2])> = match spec {
        MoveSpec::Icm { .. } => unreachable!(),
        MoveSpec::Swap { alpha, beta } => x
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == alpha || s == beta)
            .map(|(v, _)| (v, [alpha, beta]))
            .collect(),
        MoveSpec::Expansion { alpha } => x
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s != alpha)
            .map(|(v, &s)| (v, [s, alpha]))
            .collect(),
        MoveSpec::ExpShrink { alpha, beta } => x
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s != alpha || beta != alpha)
            .map(|(v, &s)| (v, if s == alpha { [beta, alpha] } else { [s, alpha] }))
            .collect(),
    };
    debug_assert_eq!(
        1u128.checked_shl(choices.len() as u32).unwrap_or(u128::MAX),
        size
    );
    let mut out = Vec::with_capacity(size as usize);
    for mask in 0u128..size {
        let mut y = x.clone();
        for (k, &(v, opts)) in choices.iter().enumerate() {
            y.0[v] = opts[(mask >> k & 1) as usize];
        }
        out.push(y);
    }
    Ok(out)
}

/// Union of the family's move spaces over all parameters; duplicates across
/// parameters are kept.
pub fn enumerate_move_set(inst: &Instance, x: &Labeling, id: MoveSetId) -> Result<Vec<Labeling>> {
    enumerate_move_set_capped(inst, x, id, DEFAULT_ENUM_CAP)
}

pub fn enumerate_move_set_capped(
    inst: &Instance,
    x: &Labeling,
    id: MoveSetId,
    cap: u128,
) -> Result<Vec<Labeling>> {
    let specs = id.specs(inst);
    let mut total: u128 = 0;
    for &spec in &specs {
        total = total.saturating_add(move_space_size(inst, x, spec)?);
    }
    if total > cap {
        return Err(Error::CapExceeded { size: total, cap });
    }
    let mut out = Vec::new();
    for spec in specs {
        out.extend(enumerate_moves_capped(inst, x, spec, cap)?);
    }
    Ok(out)
}

/// Exact minimum of one move space; ties go to the lexicographically
/// smallest labeling.
pub fn best_in_move_space(inst: &Instance, x: &Labeling, spec: MoveSpec) -> Result<OracleSolution> {
    best_of(inst, enumerate_moves(inst, x, spec)?, x)
}

/// Exact minimum over the family's unioned move spaces; ties go to the
/// lexicographically smallest labeling. A family with no parameters on this
/// instance (swaps with a single state) leaves `x` unchanged.
pub fn best_in_move_set(inst: &Instance, x: &Labeling, id: MoveSetId) -> Result<OracleSolution> {
    best_in_move_set_capped(inst, x, id, DEFAULT_ENUM_CAP)
}

pub fn best_in_move_set_capped(
    inst: &Instance,
    x: &Labeling,
    id: MoveSetId,
    cap: u128,
) -> Result<OracleSolution> {
    best_of(inst, enumerate_move_set_capped(inst, x, id, cap)?, x)
}

fn best_of(inst: &Instance, candidates: Vec<Labeling>, x: &Labeling) -> Result<OracleSolution> {
    let mut best: Option<OracleSolution> = None;
    for y in candidates {
        let e = inst.total_energy(&y)?;
        let better = match &best {
            None => true,
            Some(b) => e < b.energy || (e == b.energy && y < b.labeling),
        };
        if better {
            best = Some(OracleSolution {
                labeling: y,
                energy: e,
            });
        }
    }
    Ok(match best {
        Some(b) => b,
        None => OracleSolution {
            labeling: x.clone(),
            energy: inst.total_energy(x)?,
        },
    })
}

/// How the best energy reachable by family `a` compares to family `b` from
/// the same labeling.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceReport {
    pub energy_a: f64,
    pub energy_b: f64,
    /// `best(a) <= best(b) + eps`
    pub leq: bool,
    /// `best(a) < best(b) - eps`
    pub strict: bool,
}

pub fn dominance_report(
    inst: &Instance,
    x: &Labeling,
    a: MoveSetId,
    b: MoveSetId,
    eps: f64,
) -> Result<DominanceReport> {
    let ba = best_in_move_set(inst, x, a)?;
    let bb = best_in_move_set(inst, x, b)?;
    Ok(DominanceReport {
        energy_a: ba.energy,
        energy_b: bb.energy,
        leq: ba.energy <= bb.energy + eps,
        strict: ba.energy < bb.energy - eps,
    })
}
