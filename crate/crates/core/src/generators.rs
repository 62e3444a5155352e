//! Deterministic synthetic instances: 4-connected grids for the sweep
//! protocols and small random graphs for the enumeration oracles. All
//! energies are integer-valued so oracle comparisons need no tolerance.

use crate::energy::{Edge, Instance, PairwiseTable};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub enum PairwiseKind {
    Potts { lambda: f64 },
    TruncatedLinear { slope: f64, cap: f64 },
    /// Restoration-style cost `min(scale * (a-b)^2, cap)`; violates the
    /// triangle condition beyond two states, so solvers fall back to
    /// truncated moves.
    TruncatedQuadratic { scale: f64, cap: f64 },
    /// Fresh random table per edge: zero diagonal, integer off-diagonal
    /// entries in `[0, magnitude]`. With `force_triangle`, each table is
    /// projected onto the triangle condition.
    RandomTable {
        seed: u64,
        magnitude: u32,
        force_triangle: bool,
    },
}

#[derive(Clone, Debug)]
pub enum UnaryKind {
    /// Integer unaries in `[0, magnitude]`.
    RandomUnary { seed: u64, magnitude: u32 },
    /// `weight * |state - observation|` per node; `None` marks a node with
    /// no observation (zero unary everywhere).
    Observation {
        values: Vec<Option<f64>>,
        weight: f64,
    },
}

/// 4-connected grid of `rows * cols` nodes (row-major ids), one edge per
/// horizontal and vertical neighbor pair.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub num_states: usize,
    pub pairwise: PairwiseKind,
    pub unary: UnaryKind,
}

pub fn generate(spec: &GridSpec) -> Result<Instance> {
    if spec.rows == 0 || spec.cols == 0 || spec.num_states == 0 {
        return Err(Error::EmptyInstance);
    }
    let n = spec.rows * spec.cols;
    let ns = spec.num_states;

    let unaries: Vec<Vec<f64>> = match &spec.unary {
        UnaryKind::RandomUnary { seed, magnitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n)
                .map(|_| (0..ns).map(|_| rng.random_range(0..=*magnitude) as f64).collect())
                .collect()
        }
        UnaryKind::Observation { values, weight } => {
            if values.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{} observations for {} grid nodes",
                    values.len(),
                    n
                )));
            }
            values
                .iter()
                .map(|obs| match obs {
                    Some(o) => (0..ns).map(|k| weight * (k as f64 - o).abs()).collect(),
                    None => vec![0.0; ns],
                })
                .collect()
        }
    };

    let mut table_rng = match &spec.pairwise {
        PairwiseKind::RandomTable { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let shared = match &spec.pairwise {
        PairwiseKind::Potts { lambda } => Some(PairwiseTable::potts(ns, *lambda)),
        PairwiseKind::TruncatedLinear { slope, cap } => {
            Some(PairwiseTable::truncated_linear(ns, *slope, *cap))
        }
        PairwiseKind::TruncatedQuadratic { scale, cap } => {
            Some(PairwiseTable::truncated_quadratic(ns, *scale, *cap))
        }
        PairwiseKind::RandomTable { .. } => None,
    };
    let mut next_table = || match &spec.pairwise {
        PairwiseKind::RandomTable {
            magnitude,
            force_triangle,
            ..
        } => {
            let rng = table_rng.as_mut().unwrap();
            let mut t = PairwiseTable::from_fn(ns, |_, _| 0.0);
            for a in 0..ns {
                for b in 0..ns {
                    if a != b {
                        t.set(a, b, rng.random_range(0..=*magnitude) as f64);
                    }
                }
            }
            if *force_triangle {
                project_triangle(&mut t);
            }
            t
        }
        _ => shared.clone().unwrap(),
    };

    let mut edges = Vec::new();
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let v = r * spec.cols + c;
            if c + 1 < spec.cols {
                edges.push(Edge::new(v, v + 1, next_table()));
            }
            if r + 1 < spec.rows {
                edges.push(Edge::new(v, v + spec.cols, next_table()));
            }
        }
    }
    Instance::new(ns, unaries, edges)
}

/// Random connected instance (spanning tree plus a few extra edges) with
/// integer energies in `[0, 20]` and zero-diagonal pairwise tables. Draws at
/// least 2 nodes and 2 states whenever the caps allow. With `triangle`,
/// every table is projected onto the triangle condition.
pub fn random_small(seed: u64, max_nodes: usize, max_states: usize, triangle: bool) -> Instance {
    assert!(max_nodes >= 1 && max_states >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2.min(max_nodes)..=max_nodes);
    let ns = rng.random_range(2.min(max_states)..=max_states);

    let unaries: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..ns).map(|_| rng.random_range(0..=20) as f64).collect())
        .collect();

    let mut pairs = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for _ in 0..n {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let mut ordered: Vec<_> = pairs.into_iter().collect();
    ordered.sort_unstable();

    let edges = ordered
        .into_iter()
        .map(|(i, j)| {
            let mut t = PairwiseTable::zero(ns);
            for a in 0..ns {
                for b in 0..ns {
                    if a != b {
                        t.set(a, b, rng.random_range(0..=20) as f64);
                    }
                }
            }
            if triangle {
                project_triangle(&mut t);
            }
            Edge::new(i, j, t)
        })
        .collect();
    Instance::new(ns, unaries, edges).expect("generated instance is valid")
}

/// Uniformly random labeling for `inst`.
pub fn random_labeling(inst: &Instance, seed: u64) -> crate::energy::Labeling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    crate::energy::Labeling(
        (0..inst.num_nodes())
            .map(|_| rng.random_range(0..inst.num_states()))
            .collect(),
    )
}

/// Projects a table onto the triangle condition by repeatedly capping
/// `t(g1,g2)` at `t(g1,a) + t(a,g2) - t(a,a)` for violating triples until a
/// fixed point. On the generators' nonnegative zero-diagonal tables the loop
/// provably reaches one; a generous pass limit guards other inputs.
pub fn project_triangle(table: &mut PairwiseTable) {
    let n = table.num_states();
    for _ in 0..100_000 {
        let mut changed = false;
        for a in 0..n {
            for g1 in 0..n {
                for g2 in 0..n {
                    let bound = table.get(g1, a) + table.get(a, g2) - table.get(a, a);
                    if table.get(g1, g2) > bound {
                        table.set(g1, g2, bound);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Ground-truth ramp with blobs, integer noise, and rectangular masked
/// regions covering roughly `mask_fraction` of the grid: per-node noisy
/// observations for [`UnaryKind::Observation`], `None` where masked.
pub fn masked_observation(
    seed: u64,
    rows: usize,
    cols: usize,
    num_states: usize,
    mask_fraction: f64,
) -> Vec<Option<f64>> {
    assert!(rows >= 1 && cols >= 1 && num_states >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    let top = (num_states - 1) as f64;

    let mut truth = vec![0usize; n];
    let span = (rows + cols).saturating_sub(2).max(1) as f64;
    for r in 0..rows {
        for c in 0..cols {
            truth[r * cols + c] = ((top * (r + c) as f64 / span).round()) as usize;
        }
    }
    for _ in 0..2 {
        let (r0, h) = random_rect(&mut rng, rows);
        let (c0, w) = random_rect(&mut rng, cols);
        let state = rng.random_range(0..num_states);
        for r in r0..(r0 + h).min(rows) {
            for c in c0..(c0 + w).min(cols) {
                truth[r * cols + c] = state;
            }
        }
    }

    let mut masked = vec![false; n];
    let target = (mask_fraction * n as f64).round() as usize;
    let mut covered = 0;
    for _ in 0..64 {
        if covered >= target {
            break;
        }
        let (r0, h) = random_rect(&mut rng, rows);
        let (c0, w) = random_rect(&mut rng, cols);
        for r in r0..(r0 + h).min(rows) {
            for c in c0..(c0 + w).min(cols) {
                let v = r * cols + c;
                if !masked[v] {
                    masked[v] = true;
                    covered += 1;
                }
            }
        }
    }

    (0..n)
        .map(|v| {
            let noise = rng.random_range(-2i64..=2);
            if masked[v] {
                None
            } else {
                let obs = (truth[v] as i64 + noise).clamp(0, top as i64);
                Some(obs as f64)
            }
        })
        .collect()
}

fn random_rect(rng: &mut ChaCha8Rng, extent: usize) -> (usize, usize) {
    let len = rng.random_range(1..=(extent / 3).max(1));
    let start = rng.random_range(0..extent);
    (start, len)
}
