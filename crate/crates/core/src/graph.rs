//! Weighted graphs `(V, μ, m)`.
//!
//! A graph is a finite vertex set with symmetric nonnegative edge weights
//! `μ_xy` and a strictly positive vertex measure `m_x`. Vertices are opaque
//! string ids mapped to dense indices; the map is sorted (integer-looking ids
//! numerically, the rest lexicographically) so matrices built from the same
//! input are always laid out identically.
//!
//! Self-loops are kept. They count towards the weighted degree sum
//! `Σ_y μ_xy`, but every difference `f(x) - f(x)` vanishes so they never
//! affect the Laplacian or the Dirichlet form.

use crate::error::{Error, Result};
use crate::ext::{Ext, ExtHops};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// How the vertex measure is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurePolicy {
    /// `m` supplied per vertex.
    Explicit,
    /// `m ≡ 1`.
    Physical,
    /// `m_x = Σ_y μ_xy`.
    Normalized,
}

impl std::str::FromStr for MeasurePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(MeasurePolicy::Explicit),
            "physical" => Ok(MeasurePolicy::Physical),
            "normalized" => Ok(MeasurePolicy::Normalized),
            other => Err(Error::Parse(format!("unknown measure policy `{other}`"))),
        }
    }
}

/// Measure specification handed to [`build_graph`].
#[derive(Debug, Clone)]
pub enum Measure {
    Physical,
    Normalized,
    Explicit(HashMap<String, f64>),
}

impl Measure {
    pub fn policy(&self) -> MeasurePolicy {
        match self {
            Measure::Physical => MeasurePolicy::Physical,
            Measure::Normalized => MeasurePolicy::Normalized,
            Measure::Explicit(_) => MeasurePolicy::Explicit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub mu: f64,
}

impl Edge {
    pub fn new(u: impl Into<String>, v: impl Into<String>, mu: f64) -> Self {
        Edge {
            u: u.into(),
            v: v.into(),
            mu,
        }
    }
}

/// Immutable weighted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Neighbours with `μ > 0`, sorted by index, self-loop included.
    adj: Vec<Vec<(usize, f64)>>,
    m: Vec<f64>,
    policy: MeasurePolicy,
}

/// Function on the vertex set, indexed like the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction(pub Vec<f64>);

/// Subset of the vertex set, stored as sorted dense indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<usize>);

fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Builds a graph from an edge list. Edges are symmetrized; a pair listed
/// twice must carry the same weight.
pub fn build_graph(edges: &[Edge], measure: Measure) -> Result<WeightedGraph> {
    build_graph_with_vertices(&[], edges, measure)
}

/// Like [`build_graph`], with additional (possibly isolated) vertices.
pub fn build_graph_with_vertices(
    vertices: &[String],
    edges: &[Edge],
    measure: Measure,
) -> Result<WeightedGraph> {
    let mut ids: Vec<String> = vertices.to_vec();
    for e in edges {
        ids.push(e.u.clone());
        ids.push(e.v.clone());
    }
    if let Measure::Explicit(map) = &measure {
        ids.extend(map.keys().cloned());
    }
    ids.sort_by(|a, b| id_order(a, b));
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let index: HashMap<String, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();

    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in edges {
        if !(e.mu >= 0.0) || !e.mu.is_finite() {
            return Err(Error::NegativeWeight {
                u: e.u.clone(),
                v: e.v.clone(),
                mu: e.mu,
            });
        }
        let (a, b) = (index[&e.u], index[&e.v]);
        let key = (a.min(b), a.max(b));
        match weights.get(&key) {
            Some(&w) if w != e.mu => {
                return Err(Error::ContradictoryEdge {
                    u: e.u.clone(),
                    v: e.v.clone(),
                    first: w,
                    second: e.mu,
                })
            }
            _ => {
                weights.insert(key, e.mu);
            }
        }
    }

    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for (&(a, b), &w) in &weights {
        if w > 0.0 {
            adj[a].push((b, w));
            if a != b {
                adj[b].push((a, w));
            }
        }
    }
    for row in &mut adj {
        row.sort_by_key(|&(j, _)| j);
    }

    let policy = measure.policy();
    let m: Vec<f64> = match measure {
        Measure::Physical => vec![1.0; n],
        Measure::Normalized => adj
            .iter()
            .map(|row| row.iter().map(|e| e.1).sum())
            .collect(),
        Measure::Explicit(map) => ids
            .iter()
            .map(|id| map.get(id).copied().unwrap_or(f64::NAN))
            .collect(),
    };
    for (id, &mx) in ids.iter().zip(&m) {
        if !(mx > 0.0) || !mx.is_finite() {
            return Err(Error::InvalidMeasure {
                vertex: id.clone(),
                m: mx,
            });
        }
    }

    Ok(WeightedGraph {
        ids,
        index,
        adj,
        m,
        policy,
    })
}

/// Path on `2n + 1` vertices labelled `-n..=n` with unit weights: the window
/// `[-n, n]` of the integer lattice.
pub fn truncate_lattice(n: usize, policy: MeasurePolicy) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "lattice window half-width must be at least 1".into(),
        ));
    }
    let n = n as i64;
    let edges: Vec<Edge> = (-n..n)
        .map(|i| Edge::new(i.to_string(), (i + 1).to_string(), 1.0))
        .collect();
    build_graph(&edges, simple_measure(policy)?)
}

/// Path graph on vertices `0..n`.
pub fn path_graph(n: usize, policy: MeasurePolicy) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "path needs at least 2 vertices".into(),
        ));
    }
    let edges: Vec<Edge> = (0..n - 1)
        .map(|i| Edge::new(i.to_string(), (i + 1).to_string(), 1.0))
        .collect();
    build_graph(&edges, simple_measure(policy)?)
}

/// Star with center `0` and leaves `1..=k`.
pub fn star_graph(k: usize, policy: MeasurePolicy) -> Result<WeightedGraph> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "star needs at least one leaf".into(),
        ));
    }
    let edges: Vec<Edge> = (1..=k)
        .map(|i| Edge::new("0", i.to_string(), 1.0))
        .collect();
    build_graph(&edges, simple_measure(policy)?)
}

/// Complete graph on vertices `0..k`.
pub fn complete_graph(k: usize, policy: MeasurePolicy) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "complete graph needs at least 2 vertices".into(),
        ));
    }
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            edges.push(Edge::new(i.to_string(), j.to_string(), 1.0));
        }
    }
    build_graph(&edges, simple_measure(policy)?)
}

fn simple_measure(policy: MeasurePolicy) -> Result<Measure> {
    match policy {
        MeasurePolicy::Physical => Ok(Measure::Physical),
        MeasurePolicy::Normalized => Ok(Measure::Normalized),
        MeasurePolicy::Explicit => Err(Error::InvalidParameter(
            "generators need the physical or normalized policy".into(),
        )),
    }
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn policy(&self) -> MeasurePolicy {
        self.policy
    }

    pub fn measure(&self) -> &[f64] {
        &self.m
    }

    pub fn m(&self, i: usize) -> f64 {
        self.m[i]
    }

    /// Neighbours `(j, μ_ij)` with positive weight, self-loop included.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|p| self.adj[i][p].1)
            .unwrap_or(0.0)
    }

    /// `Σ_y μ_xy`, self-loop included.
    pub fn degree_sum(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|e| e.1).sum()
    }

    /// Weighted degree `Deg(x) = (1/m_x) Σ_y μ_xy`.
    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.degree_sum(i) / self.m[i]
    }

    /// Each undirected edge once as `(i, j, μ)` with `i <= j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j >= i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    /// Whether `m_x = Σ_y μ_xy` at every vertex, up to relative tolerance.
    pub fn is_normalized(&self, rel_tol: f64) -> bool {
        (0..self.len()).all(|i| (self.degree_sum(i) - self.m[i]).abs() <= rel_tol * self.m[i])
    }

    /// Total mass `m(A)`.
    pub fn mass(&self, set: &VertexSet) -> f64 {
        set.iter().map(|i| self.m[i]).sum()
    }

    /// Hop distances from `source` over edges with `μ > 0`.
    pub fn bfs_distances(&self, source: usize) -> Vec<ExtHops> {
        let mut dist = vec![Ext::Infinite; self.len()];
        dist[source] = Ext::Finite(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].finite().unwrap_or(0);
            for &(y, _) in &self.adj[x] {
                if dist[y].is_infinite() {
                    dist[y] = Ext::Finite(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Combinatorial (hop) distance, `+∞` across components.
    pub fn combinatorial_distance(&self, x: &str, y: &str) -> Result<ExtHops> {
        let (i, j) = (self.index_of(x)?, self.index_of(y)?);
        Ok(self.bfs_distances(i)[j])
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Ext::is_finite)
    }

    pub fn vertex_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<VertexSet> {
        let idx = ids
            .iter()
            .map(|s| self.index_of(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        VertexSet::from_indices(idx, self.len())
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet((0..self.len()).collect())
    }

    /// Builds a function from `id -> value` pairs; unspecified vertices get 0.
    pub fn function_from_pairs<S: AsRef<str>>(&self, pairs: &[(S, f64)]) -> Result<VertexFunction> {
        let mut f = vec![0.0; self.len()];
        for (id, v) in pairs {
            f[self.index_of(id.as_ref())?] = *v;
        }
        Ok(VertexFunction(f))
    }

    /// Indicator of `set`.
    pub fn indicator(&self, set: &VertexSet) -> VertexFunction {
        let mut f = vec![0.0; self.len()];
        for i in set.iter() {
            f[i] = 1.0;
        }
        VertexFunction(f)
    }
}

impl VertexSet {
    /// Sorts and deduplicates; every index must be below `n`.
    pub fn from_indices(mut idx: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::UnknownVertex(format!("#{bad}")));
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(VertexSet(idx))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.iter().any(|i| other.contains(i))
    }
}

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `⟨f, g⟩ = Σ_x m_x f(x) g(x)`.
    pub fn inner(&self, other: &VertexFunction, m: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .zip(m)
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    /// `ℓ²_m` norm.
    pub fn norm(&self, m: &[f64]) -> f64 {
        self.inner(self, m).sqrt()
    }

    /// Support `{x : f(x) ≠ 0}`.
    pub fn support(&self) -> VertexSet {
        VertexSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> VertexFunction {
        VertexFunction(self.0.iter().map(|v| a * v).collect())
    }
}
