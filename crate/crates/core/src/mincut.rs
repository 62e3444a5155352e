//! Exact minimization of binary submodular pairwise energies by s-t min-cut.
//!
//! `decompose` rewrites a [`BinaryProblem`] as a flow network plus a folded
//! constant so that for every binary labeling, the capacity of the
//! corresponding cut plus the constant equals the energy; `max_flow` (Dinic)
//! then yields a minimum cut and `solve_binary` reads the optimal labeling
//! off the cut.

use crate::{Error, Result};

/// Residuals at or below this threshold count as empty when searching for
/// augmenting paths and when classifying the cut.
pub const RESIDUAL_EPS: f64 = 1e-12;

/// Pairwise energy over binary variables (options 0/1), plus a constant.
#[derive(Clone, Debug, Default)]
pub struct BinaryProblem {
    pub num_nodes: usize,
    /// Per node, energies of options 0 and 1.
    pub unaries: Vec<[f64; 2]>,
    pub edges: Vec<BinaryEdge>,
    pub constant: f64,
}

/// `table[option_of_i][option_of_j]`.
#[derive(Clone, Copy, Debug)]
pub struct BinaryEdge {
    pub i: usize,
    pub j: usize,
    pub table: [[f64; 2]; 2],
}

impl BinaryEdge {
    /// Amount by which the diagonal exceeds the off-diagonal; submodular
    /// tables have `excess <= 0`.
    pub fn submodular_excess(&self) -> f64 {
        self.table[0][0] + self.table[1][1] - self.table[1][0] - self.table[0][1]
    }
}

impl BinaryProblem {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            unaries: vec![[0.0, 0.0]; num_nodes],
            edges: Vec::new(),
            constant: 0.0,
        }
    }

    /// Energy of the option vector `y` (false = option 0, true = option 1).
    pub fn energy(&self, y: &[bool]) -> f64 {
        assert_eq!(y.len(), self.num_nodes, "option vector length mismatch");
        let mut e = self.constant;
        for (node, &opt) in y.iter().enumerate() {
            e += self.unaries[node][opt as usize];
        }
        for edge in &self.edges {
            e += edge.table[y[edge.i] as usize][y[edge.j] as usize];
        }
        e
    }

    /// First edge violating binary submodularity
    /// `t(0,0) + t(1,1) <= t(1,0) + t(0,1) + eps`, if any.
    pub fn first_nonsubmodular(&self, eps: f64) -> Option<&BinaryEdge> {
        self.edges.iter().find(|e| e.submodular_excess() > eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
}

/// Directed capacitated network. Nodes are `0..num_nodes`, with `source` and
/// `sink` among them; capacities are nonnegative.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    pub num_nodes: usize,
    pub arcs: Vec<Arc>,
    pub source: usize,
    pub sink: usize,
}

impl FlowNetwork {
    /// Capacity of the cut induced by `source_side` (one flag per node;
    /// `source_side[source]` must be true and `source_side[sink]` false):
    /// the sum of capacities of arcs leaving the source side.
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        assert_eq!(source_side.len(), self.num_nodes);
        assert!(source_side[self.source] && !source_side[self.sink]);
        self.arcs
            .iter()
            .filter(|a| source_side[a.from] && !source_side[a.to])
            .map(|a| a.capacity)
            .sum()
    }
}

/// Flow network plus the constant folded out of the energy during
/// decomposition.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub network: FlowNetwork,
    pub constant: f64,
}

/// Rewrites `bp` as a cut problem. Nodes `0..num_nodes` keep their ids;
/// `source = num_nodes`, `sink = num_nodes + 1`. A node on the source side
/// of a cut takes option 0, on the sink side option 1, and for every option
/// vector the cut capacity plus the returned constant equals `bp.energy`.
///
/// Per edge, the table is split as
///
/// ```text
///   t(0,0) -> constant
///   t(0,1) - t(0,0) -> unary of j, option 1
///   t(1,1) - t(0,1) -> unary of i, option 1
///   t(1,0) + t(0,1) - t(0,0) - t(1,1) -> arc j -> i
/// ```
///
/// The arc capacity is the negated submodular excess, so the decomposition
/// exists precisely for submodular tables; a violating edge is reported as
/// an error (tolerance [`RESIDUAL_EPS`]).
pub fn decompose(bp: &BinaryProblem) -> Result<Decomposition> {
    let n = bp.num_nodes;
    let source = n;
    let sink = n + 1;
    let mut constant = bp.constant;
    let mut cost1 = vec![0.0; n]; // unary of option 1 after folding
    let mut cost0 = vec![0.0; n];
    for (node, u) in bp.unaries.iter().enumerate() {
        cost0[node] += u[0];
        cost1[node] += u[1];
    }
    let mut arcs = Vec::new();
    for e in &bp.edges {
        let excess = e.submodular_excess();
        if excess > RESIDUAL_EPS {
            return Err(Error::NotSubmodular {
                i: e.i,
                j: e.j,
                detail: format!(
                    "t(0,0)+t(1,1) = {} > {} = t(1,0)+t(0,1)",
                    e.table[0][0] + e.table[1][1],
                    e.table[1][0] + e.table[0][1]
                ),
            });
        }
        let t = &e.table;
        constant += t[0][0];
        cost1[e.j] += t[0][1] - t[0][0];
        cost1[e.i] += t[1][1] - t[0][1];
        let cap = -excess;
        if cap > 0.0 {
            // Charged when i stays at option 1 while j is at option 0, i.e.
            // when j sits on the source side and i on the sink side.
            arcs.push(Arc {
                from: e.j,
                to: e.i,
                capacity: cap,
            });
        }
    }
    for node in 0..n {
        // Shift so one of the two terminal arcs is zero and drop it.
        let m = cost0[node].min(cost1[node]);
        constant += m;
        let c1 = cost1[node] - m; // charged when the node takes option 1
        let c0 = cost0[node] - m; // charged when the node takes option 0
        if c1 > 0.0 {
            arcs.push(Arc {
                from: source,
                to: node,
                capacity: c1,
            });
        }
        if c0 > 0.0 {
            arcs.push(Arc {
                from: node,
                to: sink,
                capacity: c0,
            });
        }
    }
    Ok(Decomposition {
        network: FlowNetwork {
            num_nodes: n + 2,
            arcs,
            source,
            sink,
        },
        constant,
    })
}

#[derive(Clone, Debug)]
pub struct MaxFlowResult {
    pub flow_value: f64,
    /// Minimum cut: true for nodes on the source side. A node with no
    /// residual path to the sink is placed on the source side, so nodes
    /// untouched by any arc land there.
    pub source_side: Vec<bool>,
}

struct Dinic {
    // arcs stored in pairs: arc k and its reverse k ^ 1
    to: Vec<usize>,
    residual: Vec<f64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(num_nodes: usize) -> Self {
        Self {
            to: Vec::new(),
            residual: Vec::new(),
            adj: vec![Vec::new(); num_nodes],
            level: vec![-1; num_nodes],
            iter: vec![0; num_nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        let id = self.to.len();
        self.to.push(to);
        self.residual.push(cap);
        self.to.push(from);
        self.residual.push(0.0);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.fill(-1);
        self.level[source] = 0;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.level[v] < 0 && self.residual[a] > RESIDUAL_EPS {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, limit: f64) -> f64 {
        if u == sink {
            return limit;
        }
        while self.iter[u] < self.adj[u].len() {
            let a = self.adj[u][self.iter[u]];
            let v = self.to[a];
            if self.level[v] == self.level[u] + 1 && self.residual[a] > RESIDUAL_EPS {
                let pushed = self.dfs(v, sink, limit.min(self.residual[a]));
                if pushed > 0.0 {
                    self.residual[a] -= pushed;
                    self.residual[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }
}

/// Exact maximum flow (Dinic). Terminates on arbitrary nonnegative real
/// capacities; `flow_value` equals the capacity of the returned cut.
pub fn max_flow(net: &FlowNetwork) -> MaxFlowResult {
    let mut dinic = Dinic::new(net.num_nodes);
    for a in &net.arcs {
        debug_assert!(a.capacity >= -RESIDUAL_EPS, "negative capacity");
        if a.capacity > 0.0 {
            dinic.add_arc(a.from, a.to, a.capacity);
        }
    }
    let mut flow = 0.0;
    while dinic.bfs(net.source, net.sink) {
        dinic.iter.fill(0);
        loop {
            let pushed = dinic.dfs(net.source, net.sink, f64::INFINITY);
            if pushed <= 0.0 {
                break;
            }
            flow += pushed;
        }
    }
    // Source side = nodes that cannot reach the sink in the residual graph,
    // found by walking residual arcs backwards from the sink.
    let mut reaches_sink = vec![false; net.num_nodes];
    reaches_sink[net.sink] = true;
    let mut queue = std::collections::VecDeque::from([net.sink]);
    while let Some(v) = queue.pop_front() {
        for &a in &dinic.adj[v] {
            // Arc a ^ 1 runs from to[a] into v.
            let u = dinic.to[a];
            if !reaches_sink[u] && dinic.residual[a ^ 1] > RESIDUAL_EPS {
                reaches_sink[u] = true;
                queue.push_back(u);
            }
        }
    }
    MaxFlowResult {
        flow_value: flow,
        source_side: reaches_sink.iter().map(|r| !r).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct BinarySolution {
    /// Optimal option per node (false = 0, true = 1).
    pub labeling: Vec<bool>,
    pub energy: f64,
}

/// Exact minimizer of a binary submodular problem. Nodes whose two options
/// tie across every completion come back at option 0.
pub fn solve_binary(bp: &BinaryProblem) -> Result<BinarySolution> {
    let dec = decompose(bp)?;
    let flow = max_flow(&dec.network);
    let labeling: Vec<bool> = (0..bp.num_nodes)
        .map(|v| !flow.source_side[v])
        .collect();
    Ok(BinarySolution {
        energy: bp.energy(&labeling),
        labeling,
    })
}
