//! Sweep drivers: run one move family (or expansion-shrink pairing rule)
//! over all its parameters until a full sweep accepts nothing, recording the
//! energy trace.

use crate::energy::{instance_is_triangle, Instance, Labeling};
use crate::moves::{optimal_move, MoveSpec};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sweep orders. States are swept in ascending order; for the expansion-
/// shrink methods the rule names how the shrink state pairs with the
/// expanding state `alpha`:
///
/// * `SwapSweep`: all unordered state pairs, second state in the outer loop.
/// * `ExpansionSweep`: plain expansions of every state.
/// * `ExpShrinkRandomBeta`: `beta` drawn per move (seeded), never `alpha`.
/// * `ExpShrinkBetaPrev` / `ExpShrinkBetaNext`: `beta` is the state below /
///   above `alpha`, clamped at the ends (where the move degenerates to an
///   expansion).
/// * `ExpShrinkAllBeta`: all ordered pairs, `beta` in the outer loop,
///   including `beta == alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    SwapSweep,
    ExpansionSweep,
    ExpShrinkRandomBeta { seed: u64 },
    ExpShrinkBetaPrev,
    ExpShrinkBetaNext,
    ExpShrinkAllBeta,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::SwapSweep => "swap",
            Method::ExpansionSweep => "expansion",
            Method::ExpShrinkRandomBeta { .. } => "expshrink-random",
            Method::ExpShrinkBetaPrev => "expshrink-prev",
            Method::ExpShrinkBetaNext => "expshrink-next",
            Method::ExpShrinkAllBeta => "expshrink-all",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoveRecord {
    pub spec: MoveSpec,
    pub accepted: bool,
    /// Total energy of the labeling after this move attempt.
    pub energy_after: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub method: String,
    pub instance_hash: u64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub final_labeling: Labeling,
    pub moves: Vec<MoveRecord>,
    /// Energy at the end of each sweep.
    pub sweep_energies: Vec<f64>,
    pub sweeps: usize,
    pub accepted_moves: usize,
    /// True when some move's truncation modified a table entry.
    pub truncation_used: bool,
    /// True when the run stopped because a full sweep accepted nothing
    /// (rather than exhausting `max_sweeps`).
    pub converged: bool,
}

fn sweep_specs(method: Method, num_states: usize, rng: Option<&mut ChaCha8Rng>) -> Vec<MoveSpec> {
    let mut specs = Vec::new();
    match method {
        Method::SwapSweep => {
            for beta in 0..num_states {
                for alpha in beta + 1..num_states {
                    specs.push(MoveSpec::Swap { alpha, beta });
                }
            }
        }
        Method::ExpansionSweep => {
            for alpha in 0..num_states {
                specs.push(MoveSpec::Expansion { alpha });
            }
        }
        Method::ExpShrinkRandomBeta { .. } => {
            let rng = rng.expect("random-beta sweep needs its generator");
            for alpha in 0..num_states {
                let beta = if num_states <= 1 {
                    alpha
                } else {
                    // Uniform over all states except alpha.
                    let r = rng.random_range(0..num_states - 1);
                    if r >= alpha {
                        r + 1
                    } else {
                        r
                    }
                };
                specs.push(MoveSpec::ExpShrink { alpha, beta });
            }
        }
        Method::ExpShrinkBetaPrev => {
            for alpha in 0..num_states {
                specs.push(MoveSpec::ExpShrink {
                    alpha,
                    beta: alpha.saturating_sub(1),
                });
            }
        }
        Method::ExpShrinkBetaNext => {
            for alpha in 0..num_states {
                specs.push(MoveSpec::ExpShrink {
                    alpha,
                    beta: (alpha + 1).min(num_states - 1),
                });
            }
        }
        Method::ExpShrinkAllBeta => {
            for beta in 0..num_states {
                for alpha in 0..num_states {
                    specs.push(MoveSpec::ExpShrink { alpha, beta });
                }
            }
        }
    }
    specs
}

/// Runs `method` from `init` until a full sweep accepts no move or
/// `max_sweeps` sweeps have run. Every accepted move strictly improves the
/// energy by more than `eps`, so the energy trace is non-increasing.
/// Truncation is enabled automatically when any edge table fails the
/// triangle condition.
pub fn run(
    inst: &Instance,
    init: &Labeling,
    method: Method,
    max_sweeps: usize,
    eps: f64,
) -> Result<RunReport> {
    let mut rng = match method {
        Method::ExpShrinkRandomBeta { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let allow_truncation = !instance_is_triangle(inst, eps);
    drive(inst, init, method.name(), max_sweeps, eps, |ns| {
        sweep_specs(method, ns, rng.as_mut())
    }, allow_truncation)
}

/// ICM sweeps over `node_order` (ascending by default); each move picks the
/// state minimizing the node's conditional energy.
pub fn run_icm(
    inst: &Instance,
    init: &Labeling,
    node_order: Option<&[usize]>,
    max_sweeps: usize,
    eps: f64,
) -> Result<RunReport> {
    let order: Vec<usize> = match node_order {
        Some(o) => {
            for &node in o {
                if node >= inst.num_nodes() {
                    return Err(Error::NodeOutOfRange {
                        node,
                        num_nodes: inst.num_nodes(),
                    });
                }
            }
            o.to_vec()
        }
        None => (0..inst.num_nodes()).collect(),
    };
    drive(inst, init, "icm", max_sweeps, eps, |_| {
        order.iter().map(|&node| MoveSpec::Icm { node }).collect()
    }, false)
}

fn drive(
    inst: &Instance,
    init: &Labeling,
    method_name: &str,
    max_sweeps: usize,
    eps: f64,
    mut specs_for_sweep: impl FnMut(usize) -> Vec<MoveSpec>,
    allow_truncation: bool,
) -> Result<RunReport> {
    inst.validate_labeling(init)?;
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
    }
    let mut x = init.clone();
    let mut energy = inst.total_energy(&x)?;
    let mut report = RunReport {
        method: method_name.to_string(),
        instance_hash: inst.content_hash(),
        initial_energy: energy,
        final_energy: energy,
        final_labeling: x.clone(),
        moves: Vec::new(),
        sweep_energies: Vec::new(),
        sweeps: 0,
        accepted_moves: 0,
        truncation_used: false,
        converged: false,
    };
    for _ in 0..max_sweeps {
        let mut accepted_this_sweep = false;
        for spec in specs_for_sweep(inst.num_states()) {
            let mv = optimal_move(inst, &x, spec, allow_truncation, eps)?;
            report.truncation_used |= mv.truncated;
            if mv.changed {
                x = mv.labeling;
                energy = mv.energy;
                accepted_this_sweep = true;
                report.accepted_moves += 1;
            }
            report.moves.push(MoveRecord {
                spec,
                accepted: mv.changed,
                energy_after: energy,
            });
        }
        report.sweeps += 1;
        report.sweep_energies.push(energy);
        if !accepted_this_sweep {
            report.converged = true;
            break;
        }
    }
    report.final_energy = energy;
    report.final_labeling = x;
    Ok(report)
}

/// Table-cell convention for energies relative to a baseline: `1` for
/// bit-identical energies, otherwise the ratio to 4 decimals (so energies
/// equal to 4 decimals but not identical print as `1.0000`).
pub fn format_ratio(energy: f64, baseline: f64) -> String {
    if energy == baseline {
        "1".to_string()
    } else {
        format!("{:.4}", energy / baseline)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub method: String,
    pub final_energy: f64,
    /// Formatted cell: ratio to the baseline, or the absolute energy when
    /// the baseline energy is 0.
    pub cell: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeEnergyReport {
    pub baseline_energy: f64,
    /// Ratios are undefined against a zero baseline; cells then carry
    /// absolute energies.
    pub absolute: bool,
    /// Baseline first, then `runs` in order.
    pub rows: Vec<RatioRow>,
}

/// Final energies of `runs` relative to `baseline`, in the `1` / `1.0000` /
/// 4-decimal convention of [`format_ratio`]. All reports must come from the
/// same instance.
pub fn relative_energy_report(
    runs: &[RunReport],
    baseline: &RunReport,
) -> Result<RelativeEnergyReport> {
    if runs
        .iter()
        .any(|r| r.instance_hash != baseline.instance_hash)
    {
        return Err(Error::InstanceMismatch);
    }
    let absolute = baseline.final_energy == 0.0;
    let cell = |e: f64| {
        if absolute {
            format!("{e}")
        } else {
            format_ratio(e, baseline.final_energy)
        }
    };
    let rows = std::iter::once(baseline)
        .chain(runs.iter())
        .map(|r| RatioRow {
            method: r.method.clone(),
            final_energy: r.final_energy,
            cell: cell(r.final_energy),
        })
        .collect();
    Ok(RelativeEnergyReport {
        baseline_energy: baseline.final_energy,
        absolute,
        rows,
    })
}

/// Plain-text rendering of a [`RelativeEnergyReport`]: a header line, then
/// one `method cell` line per row, single-space separated.
pub fn render_table(report: &RelativeEnergyReport) -> String {
    let header = if report.absolute { "method energy" } else { "method ratio" };
    let mut out = String::from(header);
    for row in &report.rows {
        out.push('\n');
        out.push_str(&row.method);
        out.push(' ');
        out.push_str(&row.cell);
    }
    out.push('\n');
    out
}
