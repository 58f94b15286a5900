//! Finite weighted graphs, node fields, the μ-Laplacian and discrete integrals.
//!
//! A [`Graph`] owns the node order (file order), the node measure μ and a
//! symmetric positive edge weight ω. Every [`NodeField`] is laid out in that
//! node order, so vectors, CSV columns and reports line up deterministically.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: String,
    #[serde(default = "one")]
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub a: String,
    pub b: String,
    #[serde(default = "one")]
    pub w: f64,
}

fn one() -> f64 {
    1.0
}

/// On-disk graph description: `{"nodes":[{"id","mu"}],"edges":[{"a","b","w"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

/// A connected finite graph G = (V, E, μ, ω).
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    // (i, j, w) with i < j
    edges: Vec<(usize, usize, f64)>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    /// Validates and builds a graph. Node order is the order of `nodes`.
    pub fn new(nodes: &[NodeEntry], edges: &[EdgeEntry]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut ids = Vec::with_capacity(nodes.len());
        let mut index = HashMap::with_capacity(nodes.len());
        let mut measure = Vec::with_capacity(nodes.len());
        for node in nodes {
            if !(node.mu > 0.0) || !node.mu.is_finite() {
                return Err(Error::NonPositiveMeasure {
                    node: node.id.clone(),
                    value: node.mu,
                });
            }
            if index.insert(node.id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateNode(node.id.clone()));
            }
            ids.push(node.id.clone());
            measure.push(node.mu);
        }

        let mut seen = HashSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        let mut neighbors = vec![Vec::new(); ids.len()];
        for edge in edges {
            let i = *index
                .get(&edge.a)
                .ok_or_else(|| Error::UnknownNode(edge.a.clone()))?;
            let j = *index
                .get(&edge.b)
                .ok_or_else(|| Error::UnknownNode(edge.b.clone()))?;
            if i == j {
                return Err(Error::SelfLoop(edge.a.clone()));
            }
            if !(edge.w > 0.0) || !edge.w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    a: edge.a.clone(),
                    b: edge.b.clone(),
                    value: edge.w,
                });
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge {
                    a: edge.a.clone(),
                    b: edge.b.clone(),
                });
            }
            stored.push((key.0, key.1, edge.w));
            neighbors[i].push((j, edge.w));
            neighbors[j].push((i, edge.w));
        }

        let graph = Graph {
            ids,
            index,
            measure,
            edges: stored,
            neighbors,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Unit measures and unit weights; edges given as index pairs.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let nodes: Vec<NodeEntry> = (0..n)
            .map(|i| NodeEntry {
                id: format!("x{}", i + 1),
                mu: 1.0,
            })
            .collect();
        let edges: Vec<EdgeEntry> = edges
            .iter()
            .map(|&(i, j)| EdgeEntry {
                a: format!("x{}", i + 1),
                b: format!("x{}", j + 1),
                w: 1.0,
            })
            .collect();
        Graph::new(&nodes, &edges)
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Graph::new(&file.nodes, &file.edges)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self
                .ids
                .iter()
                .zip(&self.measure)
                .map(|(id, &mu)| NodeEntry { id: id.clone(), mu })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(i, j, w)| EdgeEntry {
                    a: self.ids[i].clone(),
                    b: self.ids[j].clone(),
                    w,
                })
                .collect(),
        }
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.neighbors[i] {
                if !visited[j] {
                    visited[j] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
        if reached == n {
            Ok(())
        } else {
            Err(Error::Disconnected {
                root: self.ids[0].clone(),
                reached,
                total: n,
            })
        }
    }

    /// Number of nodes N.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Edges as `(i, j, ω)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn mu_min(&self) -> f64 {
        self.measure.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total measure Σ μ(x), used as |V| in all threshold constants.
    pub fn volume(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Weighted degree Σ_{y∼x} ω_xy.
    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors[i].iter().map(|&(_, w)| w).sum()
    }

    pub(crate) fn check(&self, f: &NodeField) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                expected: self.len(),
                got: f.len(),
            })
        }
    }

    /// Δu(x) = (1/μ(x)) Σ_{y∼x} ω_xy (u(y) − u(x)).
    pub fn laplacian(&self, u: &NodeField) -> Result<NodeField> {
        self.check(u)?;
        let mut out = vec![0.0; self.len()];
        self.laplacian_into(u.values(), &mut out);
        Ok(NodeField(out))
    }

    pub(crate) fn laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        for (x, slot) in out.iter_mut().enumerate() {
            let ux = u[x];
            let s: f64 = self.neighbors[x]
                .iter()
                .map(|&(y, w)| w * (u[y] - ux))
                .sum();
            *slot = s / self.measure[x];
        }
    }

    /// ∫_V f dμ = Σ μ(x) f(x).
    pub fn integral(&self, f: &NodeField) -> Result<f64> {
        self.check(f)?;
        Ok(self.integral_raw(f.values()))
    }

    pub(crate) fn integral_raw(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.measure).map(|(v, m)| v * m).sum()
    }

    /// ∫_V |∇u|² dμ := ½ Σ_x Σ_{y∼x} ω_xy (u(y) − u(x))², i.e. one term per edge.
    pub fn dirichlet_energy(&self, u: &NodeField) -> Result<f64> {
        self.check(u)?;
        Ok(self.dirichlet_raw(u.values()))
    }

    pub(crate) fn dirichlet_raw(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| {
                let d = u[j] - u[i];
                w * d * d
            })
            .sum()
    }

    /// (∫_V |f|^q dμ)^{1/q}.
    pub fn lp_norm(&self, f: &NodeField, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "norm exponent q = {q} must be >= 1"
            )));
        }
        self.check(f)?;
        Ok(self.lp_norm_raw(f.values(), q))
    }

    pub(crate) fn lp_norm_raw(&self, f: &[f64], q: f64) -> f64 {
        if q == 2.0 {
            return self.integral_raw_sq(f).sqrt();
        }
        let s: f64 = f
            .iter()
            .zip(&self.measure)
            .map(|(v, m)| m * v.abs().powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    fn integral_raw_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.measure).map(|(v, m)| m * v * v).sum()
    }
}

/// A real value per node, in the graph's node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeField(Vec<f64>);

impl NodeField {
    pub fn new(values: Vec<f64>) -> Self {
        NodeField(values)
    }

    pub fn constant(g: &Graph, c: f64) -> Self {
        NodeField(vec![c; g.len()])
    }

    pub fn zeros(g: &Graph) -> Self {
        NodeField::constant(g, 0.0)
    }

    /// Builds a field from an id → value map that must cover every node exactly.
    pub fn from_map<'a, I>(g: &Graph, map: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a String, &'a f64)>,
    {
        let mut values = vec![f64::NAN; g.len()];
        for (id, &v) in map {
            let i = g
                .index_of(id)
                .ok_or_else(|| Error::UnknownNode(id.clone()))?;
            values[i] = v;
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(format!(
                "no value given for node `{}`",
                g.ids()[i]
            )));
        }
        Ok(NodeField(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        NodeField(self.0.iter().map(|v| s * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        NodeField(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &NodeField) -> Self {
        NodeField(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
}

impl From<Vec<f64>> for NodeField {
    fn from(v: Vec<f64>) -> Self {
        NodeField(v)
    }
}

/// Parses and validates a graph file.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    Graph::from_file(&file)
}
