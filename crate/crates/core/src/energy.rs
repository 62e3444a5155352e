//! Energy model: pairwise tables, instances, labelings, and the two
//! structural checks (pairwise submodularity and the triangle condition).

use crate::{Error, Result};

/// Dense square table of pairwise energies, row-major: `get(a, b)` is the
/// energy of the first endpoint taking state `a` and the second taking `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseTable {
    num_states: usize,
    values: Vec<f64>,
}

impl PairwiseTable {
    /// Builds a table from row-major values; every entry must be finite.
    pub fn new(num_states: usize, values: Vec<f64>) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::EmptyInstance);
        }
        let expected = num_states * num_states;
        if values.len() != expected {
            return Err(Error::TableLength {
                expected,
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                place: "pairwise table".into(),
            });
        }
        Ok(Self { num_states, values })
    }

    /// Builds a table by evaluating `f(a, b)` for every state pair.
    ///
    /// Panics if `num_states == 0` or `f` produces a non-finite value.
    pub fn from_fn(num_states: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(num_states > 0, "table needs at least one state");
        let mut values = Vec::with_capacity(num_states * num_states);
        for a in 0..num_states {
            for b in 0..num_states {
                let v = f(a, b);
                assert!(v.is_finite(), "non-finite table entry at ({a},{b})");
                values.push(v);
            }
        }
        Self { num_states, values }
    }

    /// All-zero table.
    pub fn zero(num_states: usize) -> Self {
        Self::from_fn(num_states, |_, _| 0.0)
    }

    /// Potts: 0 on the diagonal, `lambda` off it.
    pub fn potts(num_states: usize, lambda: f64) -> Self {
        Self::from_fn(num_states, |a, b| if a == b { 0.0 } else { lambda })
    }

    /// `min(slope * |a - b|, cap)`.
    pub fn truncated_linear(num_states: usize, slope: f64, cap: f64) -> Self {
        Self::from_fn(num_states, |a, b| {
            (slope * (a as f64 - b as f64).abs()).min(cap)
        })
    }

    /// `min(scale * (a - b)^2, cap)`. Unlike the truncated-linear cost this
    /// violates the triangle condition once three states are in play (a
    /// double step costs four times a single one), so expansion-family
    /// subproblems over it need truncation.
    pub fn truncated_quadratic(num_states: usize, scale: f64, cap: f64) -> Self {
        Self::from_fn(num_states, |a, b| {
            let d = a as f64 - b as f64;
            (scale * d * d).min(cap)
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.num_states + b]
    }

    pub fn set(&mut self, a: usize, b: usize, value: f64) {
        assert!(value.is_finite(), "non-finite table entry");
        self.values[a * self.num_states + b] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Undirected edge between nodes `i < j`; the table is evaluated in stored
/// orientation: `table.get(state_of_i, state_of_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub table: PairwiseTable,
}

impl Edge {
    pub fn new(i: usize, j: usize, table: PairwiseTable) -> Self {
        Self { i, j, table }
    }
}

/// Assignment of one state per node. Ordering is lexicographic, which is the
/// tie-breaking order used by the brute-force oracles.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Labeling(pub Vec<usize>);

impl Labeling {
    /// All nodes at the same state.
    pub fn constant(num_nodes: usize, state: usize) -> Self {
        Self(vec![state; num_nodes])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for Labeling {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// A pairwise energy over `num_nodes` discrete variables with a common state
/// count. Edges are stored once with `i < j`; nodes may be isolated.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    num_states: usize,
    unaries: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    /// Per node: `(edge index, other endpoint)` for every incident edge.
    incident: Vec<Vec<(usize, usize)>>,
}

impl Instance {
    pub fn new(num_states: usize, unaries: Vec<Vec<f64>>, edges: Vec<Edge>) -> Result<Self> {
        if num_states == 0 || unaries.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let num_nodes = unaries.len();
        for (node, u) in unaries.iter().enumerate() {
            if u.len() != num_states {
                return Err(Error::UnaryLength {
                    node,
                    expected: num_states,
                    got: u.len(),
                });
            }
            if !u.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    place: format!("unary table of node {node}"),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut incident = vec![Vec::new(); num_nodes];
        for (idx, e) in edges.iter().enumerate() {
            if e.i >= e.j || e.j >= num_nodes {
                return Err(Error::BadEdgeEndpoints {
                    i: e.i,
                    j: e.j,
                    num_nodes,
                });
            }
            if e.table.num_states() != num_states {
                return Err(Error::TableLength {
                    expected: num_states * num_states,
                    got: e.table.num_states() * e.table.num_states(),
                });
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::DuplicateEdge { i: e.i, j: e.j });
            }
            incident[e.i].push((idx, e.j));
            incident[e.j].push((idx, e.i));
        }
        Ok(Self {
            num_states,
            unaries,
            edges,
            incident,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.unaries.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn unary(&self, node: usize, state: usize) -> f64 {
        self.unaries[node][state]
    }

    pub fn unaries(&self, node: usize) -> &[f64] {
        &self.unaries[node]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Incident edges of `node` as `(edge index, other endpoint)`.
    pub fn incident(&self, node: usize) -> &[(usize, usize)] {
        &self.incident[node]
    }

    /// Pairwise energy of edge `edge_idx` in stored orientation.
    pub fn pair_energy(&self, edge_idx: usize, state_i: usize, state_j: usize) -> f64 {
        self.edges[edge_idx].table.get(state_i, state_j)
    }

    pub fn validate_labeling(&self, x: &Labeling) -> Result<()> {
        if x.len() != self.num_nodes() {
            return Err(Error::LabelingLength {
                got: x.len(),
                want: self.num_nodes(),
            });
        }
        for (node, &state) in x.as_slice().iter().enumerate() {
            if state >= self.num_states {
                return Err(Error::StateOutOfRange {
                    node,
                    state,
                    num_states: self.num_states,
                });
            }
        }
        Ok(())
    }

    /// Total energy of `x`: all unaries in node order, then all edge terms in
    /// stored order.
    pub fn total_energy(&self, x: &Labeling) -> Result<f64> {
        self.validate_labeling(x)?;
        let mut e = 0.0;
        for (node, &state) in x.as_slice().iter().enumerate() {
            e += self.unaries[node][state];
        }
        for edge in &self.edges {
            e += edge.table.get(x[edge.i], x[edge.j]);
        }
        Ok(e)
    }

    /// Energy of node `node` taking `state` given the states of its
    /// conditioned neighbors: the node's unary plus one pairwise term per
    /// incident edge whose other endpoint has `cond` set. Factors not
    /// involving `node` are excluded, as are edges to unconditioned
    /// neighbors.
    ///
    /// `cond` is a mask over all nodes and must not contain `node` itself.
    pub fn conditional_energy(
        &self,
        node: usize,
        state: usize,
        x: &Labeling,
        cond: &[bool],
    ) -> Result<f64> {
        if node >= self.num_nodes() {
            return Err(Error::NodeOutOfRange {
                node,
                num_nodes: self.num_nodes(),
            });
        }
        if state >= self.num_states {
            return Err(Error::StateOutOfRange {
                node,
                state,
                num_states: self.num_states,
            });
        }
        if cond.len() != self.num_nodes() {
            return Err(Error::LabelingLength {
                got: cond.len(),
                want: self.num_nodes(),
            });
        }
        if cond[node] {
            return Err(Error::NodeInConditioningSet { node });
        }
        self.validate_labeling(x)?;
        let mut e = self.unaries[node][state];
        for &(edge_idx, other) in &self.incident[node] {
            if !cond[other] {
                continue;
            }
            let edge = &self.edges[edge_idx];
            e += if edge.i == node {
                edge.table.get(state, x[other])
            } else {
                edge.table.get(x[other], state)
            };
        }
        Ok(e)
    }

    /// Structural fingerprint (FNV-1a over counts and raw float bits); equal
    /// instances hash equally, and any changed energy value changes it.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_usize(self.num_nodes());
        h.write_usize(self.num_states);
        h.write_usize(self.edges.len());
        for u in &self.unaries {
            for &v in u {
                h.write_u64(v.to_bits());
            }
        }
        for e in &self.edges {
            h.write_usize(e.i);
            h.write_usize(e.j);
            for &v in e.table.values() {
                h.write_u64(v.to_bits());
            }
        }
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// First `(alpha, beta)` with `alpha != beta` violating pairwise
/// submodularity, i.e.
/// `E(alpha,alpha) + E(beta,beta) > E(beta,alpha) + E(alpha,beta) + eps`,
/// scanning `alpha` then `beta` in ascending state order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairViolation {
    pub alpha: usize,
    pub beta: usize,
}

pub fn check_pairwise_submodular(table: &PairwiseTable, eps: f64) -> Option<PairViolation> {
    let n = table.num_states();
    for alpha in 0..n {
        for beta in 0..n {
            if alpha == beta {
                continue;
            }
            if table.get(alpha, alpha) + table.get(beta, beta)
                > table.get(beta, alpha) + table.get(alpha, beta) + eps
            {
                return Some(PairViolation { alpha, beta });
            }
        }
    }
    None
}

/// First `(alpha, gamma1, gamma2)` violating the triangle condition
/// `E(alpha,alpha) + E(gamma1,gamma2) <= E(gamma1,alpha) + E(alpha,gamma2)`,
/// scanning `alpha`, then `gamma1`, then `gamma2` in ascending state order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriangleViolation {
    pub alpha: usize,
    pub gamma1: usize,
    pub gamma2: usize,
}

pub fn check_triangle(table: &PairwiseTable, eps: f64) -> Option<TriangleViolation> {
    let n = table.num_states();
    for alpha in 0..n {
        for gamma1 in 0..n {
            for gamma2 in 0..n {
                if table.get(alpha, alpha) + table.get(gamma1, gamma2)
                    > table.get(gamma1, alpha) + table.get(alpha, gamma2) + eps
                {
                    return Some(TriangleViolation {
                        alpha,
                        gamma1,
                        gamma2,
                    });
                }
            }
        }
    }
    None
}

/// True when every edge table of `inst` satisfies the triangle condition.
pub fn instance_is_triangle(inst: &Instance, eps: f64) -> bool {
    inst.edges()
        .iter()
        .all(|e| check_triangle(&e.table, eps).is_none())
}
