//! Move construction: reduce a move from the current labeling to a binary
//! pairwise subproblem, optionally truncating the tables to restore
//! submodularity, and take the best move via the min-cut back-end.

use crate::energy::{Instance, Labeling, PairwiseTable};
use crate::mincut::{solve_binary, BinaryEdge, BinaryProblem};
use crate::{Error, Result};

/// One move family applied at fixed parameters from a current labeling `x`.
///
/// * `Icm { node }`: re-label a single node, all others fixed.
/// * `Swap { alpha, beta }`: nodes currently at `alpha` or `beta` re-choose
///   between the two; requires `alpha != beta`.
/// * `Expansion { alpha }`: every node keeps its state or adopts `alpha`.
/// * `ExpShrink { alpha, beta }`: nodes at `alpha` choose between `beta` and
///   `alpha`, all others between their state and `alpha`. `beta == alpha`
///   degenerates to `Expansion { alpha }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveSpec {
    Icm { node: usize },
    Swap { alpha: usize, beta: usize },
    Expansion { alpha: usize },
    ExpShrink { alpha: usize, beta: usize },
}

impl MoveSpec {
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let ns = inst.num_states();
        let check_state = |s: usize| {
            if s >= ns {
                Err(Error::InvalidMove(format!(
                    "state {s} out of range (instance has {ns} states)"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            MoveSpec::Icm { node } => {
                if node >= inst.num_nodes() {
                    return Err(Error::InvalidMove(format!(
                        "node {node} out of range (instance has {} nodes)",
                        inst.num_nodes()
                    )));
                }
            }
            MoveSpec::Swap { alpha, beta } => {
                check_state(alpha)?;
                check_state(beta)?;
                if alpha == beta {
                    return Err(Error::InvalidMove(
                        "swap requires two distinct states".into(),
                    ));
                }
            }
            MoveSpec::Expansion { alpha } => check_state(alpha)?,
            MoveSpec::ExpShrink { alpha, beta } => {
                check_state(alpha)?;
                check_state(beta)?;
            }
        }
        Ok(())
    }
}

/// Number of labelings reachable by the move (saturating at `u128::MAX`).
pub fn move_space_size(inst: &Instance, x: &Labeling, spec: MoveSpec) -> Result<u128> {
    spec.validate(inst)?;
    inst.validate_labeling(x)?;
    let pow2 = |k: usize| 1u128.checked_shl(k as u32).unwrap_or(u128::MAX);
    Ok(match spec {
        MoveSpec::Icm { .. } => inst.num_states() as u128,
        MoveSpec::Swap { alpha, beta } => pow2(
            x.as_slice()
                .iter()
                .filter(|&&s| s == alpha || s == beta)
                .count(),
        ),
        MoveSpec::Expansion { alpha } => {
            pow2(x.as_slice().iter().filter(|&&s| s != alpha).count())
        }
        MoveSpec::ExpShrink { alpha, beta } => {
            if alpha == beta {
                pow2(x.as_slice().iter().filter(|&&s| s != alpha).count())
            } else {
                pow2(x.len())
            }
        }
    })
}

/// Binary subproblem of a non-ICM move. Subproblem node `k` stands for
/// instance node `nodes[k]` and chooses between the two states
/// `options[k]`; all other instance nodes stay at their current state, with
/// their pairwise terms folded into the subproblem unaries and constant.
///
/// Option 1 is always the expanding state for expansion and expansion-shrink
/// moves, and option 0 / option 1 are `alpha` / `beta` for swap moves; these
/// orientations make the binary tables submodular exactly when the
/// corresponding table condition holds.
#[derive(Clone, Debug)]
pub struct MoveSubproblem {
    pub problem: BinaryProblem,
    pub nodes: Vec<usize>,
    pub options: Vec<[usize; 2]>,
    /// Instance edge index behind each binary edge.
    pub edge_sources: Vec<usize>,
}

impl MoveSubproblem {
    /// Labeling selected by the option vector `choices`.
    pub fn decode(&self, x: &Labeling, choices: &[bool]) -> Labeling {
        assert_eq!(choices.len(), self.nodes.len(), "option vector length mismatch");
        let mut y = x.clone();
        for (k, &node) in self.nodes.iter().enumerate() {
            y.0[node] = self.options[k][choices[k] as usize];
        }
        y
    }
}

/// Per-node participation and option pair for a non-ICM move.
fn move_options(
    inst: &Instance,
    x: &Labeling,
    spec: MoveSpec,
) -> Result<Vec<Option<[usize; 2]>>> {
    spec.validate(inst)?;
    inst.validate_labeling(x)?;
    let opts = match spec {
        MoveSpec::Icm { .. } => return Err(Error::NoBinaryForm),
        MoveSpec::Swap { alpha, beta } => x
            .as_slice()
            .iter()
            .map(|&s| (s == alpha || s == beta).then_some([alpha, beta]))
            .collect(),
        MoveSpec::Expansion { alpha } => x
            .as_slice()
            .iter()
            .map(|&s| (s != alpha).then_some([s, alpha]))
            .collect(),
        MoveSpec::ExpShrink { alpha, beta } => x
            .as_slice()
            .iter()
            .map(|&s| {
                if s == alpha {
                    Some([beta, alpha])
                } else {
                    Some([s, alpha])
                }
            })
            .collect(),
    };
    Ok(opts)
}

pub fn build_subproblem(inst: &Instance, x: &Labeling, spec: MoveSpec) -> Result<MoveSubproblem> {
    build_subproblem_with_tables(inst, x, spec, None)
}

/// Like [`build_subproblem`], but pairwise terms between two participating
/// nodes read from `tables` (one per instance edge, e.g. from [`truncate`])
/// instead of the instance's own tables. Folded terms always use the
/// instance tables; truncation never alters the entries they read.
pub fn build_subproblem_with_tables(
    inst: &Instance,
    x: &Labeling,
    spec: MoveSpec,
    tables: Option<&[PairwiseTable]>,
) -> Result<MoveSubproblem> {
    let opts = move_options(inst, x, spec)?;
    if let Some(t) = tables {
        if t.len() != inst.edges().len() {
            return Err(Error::InvalidArgument(format!(
                "{} replacement tables for {} edges",
                t.len(),
                inst.edges().len()
            )));
        }
    }
    let mut nodes = Vec::new();
    let mut sub_index = vec![None; inst.num_nodes()];
    for (v, o) in opts.iter().enumerate() {
        if o.is_some() {
            sub_index[v] = Some(nodes.len());
            nodes.push(v);
        }
    }
    let frozen: Vec<bool> = opts.iter().map(|o| o.is_none()).collect();
    let options: Vec<[usize; 2]> = nodes.iter().map(|&v| opts[v].unwrap()).collect();

    let mut problem = BinaryProblem::new(nodes.len());
    for (k, &v) in nodes.iter().enumerate() {
        problem.unaries[k] = [
            inst.conditional_energy(v, options[k][0], x, &frozen)?,
            inst.conditional_energy(v, options[k][1], x, &frozen)?,
        ];
    }
    for (v, is_frozen) in frozen.iter().enumerate() {
        if *is_frozen {
            problem.constant += inst.unary(v, x[v]);
        }
    }
    let mut edge_sources = Vec::new();
    for (idx, e) in inst.edges().iter().enumerate() {
        match (sub_index[e.i], sub_index[e.j]) {
            (Some(si), Some(sj)) => {
                let table = tables.map_or(&e.table, |t| &t[idx]);
                let mut t = [[0.0; 2]; 2];
                for (oi, row) in t.iter_mut().enumerate() {
                    for (oj, cell) in row.iter_mut().enumerate() {
                        *cell = table.get(options[si][oi], options[sj][oj]);
                    }
                }
                problem.edges.push(BinaryEdge { i: si, j: sj, table: t });
                edge_sources.push(idx);
            }
            (None, None) => problem.constant += e.table.get(x[e.i], x[e.j]),
            // Folded into the participant's unary by conditional_energy.
            _ => {}
        }
    }
    Ok(MoveSubproblem {
        problem,
        nodes,
        options,
        edge_sources,
    })
}

/// Replacement tables for one expansion or expansion-shrink move.
#[derive(Clone, Debug)]
pub struct Truncation {
    /// One table per instance edge, in edge order.
    pub tables: Vec<PairwiseTable>,
    /// True when at least one entry differs from the instance tables.
    pub modified: bool,
}

/// Per-edge table surgery making the subproblem of `spec` submodular while
/// keeping the move a descent move on the original energy.
///
/// With current states `(x_i, x_j)` on an edge, exactly one entry changes,
/// keyed on which endpoints currently hold the expanding state `a` (`b` is
/// the shrink state; for `Expansion` only the first case applies):
///
/// * neither: `t(x_i,x_j) <- min(t(x_i,x_j), t(a,x_j) + t(x_i,a) - t(a,a))`
/// * both:    `t(a,a) <- min(t(a,a), t(a,b) + t(b,a) - t(b,b))`
/// * only j:  `t(a,b) <- max(t(a,b), t(a,a) + t(x_i,b) - t(x_i,a))`
/// * only i:  `t(b,a) <- max(t(b,a), t(a,a) + t(b,x_j) - t(a,x_j))`
///
/// The first two lower only the entry the current labeling pays, the last
/// two raise only entries it does not pay, so the minimizer of the modified
/// energy still does not increase the original energy. Tables already
/// satisfying the triangle condition come back bit-for-bit unchanged.
pub fn truncate(inst: &Instance, x: &Labeling, spec: MoveSpec) -> Result<Truncation> {
    let (a, b) = match spec {
        MoveSpec::Expansion { alpha } => (alpha, None),
        MoveSpec::ExpShrink { alpha, beta } => (alpha, Some(beta)),
        _ => return Err(Error::TruncationNotApplicable),
    };
    spec.validate(inst)?;
    inst.validate_labeling(x)?;
    let mut tables: Vec<PairwiseTable> = inst.edges().iter().map(|e| e.table.clone()).collect();
    let mut modified = false;
    for (idx, e) in inst.edges().iter().enumerate() {
        let (xi, xj) = (x[e.i], x[e.j]);
        let t = &mut tables[idx];
        match (xi == a, xj == a) {
            (false, false) => {
                let cand = t.get(a, xj) + t.get(xi, a) - t.get(a, a);
                if cand < t.get(xi, xj) {
                    t.set(xi, xj, cand);
                    modified = true;
                }
            }
            (true, true) => {
                if let Some(b) = b {
                    let cand = t.get(a, b) + t.get(b, a) - t.get(b, b);
                    if cand < t.get(a, a) {
                        t.set(a, a, cand);
                        modified = true;
                    }
                }
            }
            (false, true) => {
                if let Some(b) = b {
                    let cand = t.get(a, a) + t.get(xi, b) - t.get(xi, a);
                    if cand > t.get(a, b) {
                        t.set(a, b, cand);
                        modified = true;
                    }
                }
            }
            (true, false) => {
                if let Some(b) = b {
                    let cand = t.get(a, a) + t.get(b, xj) - t.get(a, xj);
                    if cand > t.get(b, a) {
                        t.set(b, a, cand);
                        modified = true;
                    }
                }
            }
        }
    }
    Ok(Truncation { tables, modified })
}

/// Outcome of one move attempt.
#[derive(Clone, Debug)]
pub struct MoveResult {
    /// New labeling (the input labeling when the move was rejected).
    pub labeling: Labeling,
    /// Total energy of `labeling`.
    pub energy: f64,
    /// True when the move strictly improved the energy by more than `eps`.
    pub changed: bool,
    /// True when truncation ran and modified at least one table entry.
    pub truncated: bool,
}

/// Takes the best single move of `spec` from `x`: ICM scans states directly,
/// every other family goes through the exact min-cut subproblem. The result
/// is accepted only if it improves the energy by more than `eps`; otherwise
/// `x` comes back unchanged.
///
/// With `allow_truncation` unset (or for swap moves, always), a
/// non-submodular subproblem edge aborts with [`Error::NotSubmodular`]
/// naming the instance edge.
pub fn optimal_move(
    inst: &Instance,
    x: &Labeling,
    spec: MoveSpec,
    allow_truncation: bool,
    eps: f64,
) -> Result<MoveResult> {
    spec.validate(inst)?;
    inst.validate_labeling(x)?;
    let current_energy = inst.total_energy(x)?;

    if let MoveSpec::Icm { node } = spec {
        let mut cond = vec![true; inst.num_nodes()];
        cond[node] = false;
        let mut best_state = x[node];
        let mut best = inst.conditional_energy(node, x[node], x, &cond)?;
        for state in 0..inst.num_states() {
            let e = inst.conditional_energy(node, state, x, &cond)?;
            if e < best {
                best = e;
                best_state = state;
            }
        }
        let mut y = x.clone();
        y.0[node] = best_state;
        let energy = inst.total_energy(&y)?;
        return Ok(if current_energy - energy > eps {
            MoveResult { labeling: y, energy, changed: true, truncated: false }
        } else {
            MoveResult {
                labeling: x.clone(),
                energy: current_energy,
                changed: false,
                truncated: false,
            }
        });
    }

    let truncatable = matches!(
        spec,
        MoveSpec::Expansion { .. } | MoveSpec::ExpShrink { .. }
    );
    let (sub, truncated) = if allow_truncation && truncatable {
        let tr = truncate(inst, x, spec)?;
        (
            build_subproblem_with_tables(inst, x, spec, Some(&tr.tables))?,
            tr.modified,
        )
    } else {
        let sub = build_subproblem(inst, x, spec)?;
        for (k, be) in sub.problem.edges.iter().enumerate() {
            if be.submodular_excess() > eps {
                let e = &inst.edges()[sub.edge_sources[k]];
                let [p0, p1] = sub.options[be.i];
                let [q0, q1] = sub.options[be.j];
                return Err(Error::NotSubmodular {
                    i: e.i,
                    j: e.j,
                    detail: format!(
                        "E({},{}) + E({},{}) = {} > {} = E({},{}) + E({},{}) (states 1-based)",
                        p0 + 1,
                        q0 + 1,
                        p1 + 1,
                        q1 + 1,
                        be.table[0][0] + be.table[1][1],
                        be.table[1][0] + be.table[0][1],
                        p1 + 1,
                        q0 + 1,
                        p0 + 1,
                        q1 + 1
                    ),
                });
            }
        }
        (sub, false)
    };

    let sol = solve_binary(&sub.problem)?;
    let y = sub.decode(x, &sol.labeling);
    let energy = inst.total_energy(&y)?;
    Ok(if current_energy - energy > eps {
        MoveResult { labeling: y, energy, changed: true, truncated }
    } else {
        MoveResult {
            labeling: x.clone(),
            energy: current_energy,
            changed: false,
            truncated,
        }
    })
}
