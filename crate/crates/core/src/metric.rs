//! Pseudo metrics on the vertex set, intrinsic-metric certification,
//! distance-to-set functions and Lipschitz constants.

use crate::error::{Error, Result};
use crate::ext::{Ext, ExtReal};
use crate::graph::{VertexFunction, VertexSet, WeightedGraph};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Default relative tolerance for [`certify_intrinsic`].
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Explicit,
    PathMetric,
    Combinatorial,
}

/// Dense table `ρ(x, y)` over the vertices of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMetric {
    kind: MetricKind,
    n: usize,
    table: Vec<ExtReal>,
    jump_size: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntrinsicCertificate {
    /// `max_x (1/m_x) Σ_y μ_xy ρ²(x, y)`.
    pub max_ratio: ExtReal,
    /// `sup { ρ(x, y) : μ_xy > 0 }`.
    pub jump_size: ExtReal,
    pub is_intrinsic: bool,
    /// Pairs of distinct vertices at distance zero. The bound still holds for
    /// such metrics but they cannot separate those vertices.
    pub zero_distance_pairs: usize,
    pub tolerance: f64,
}

impl PseudoMetric {
    /// Hop-count metric.
    pub fn combinatorial(g: &WeightedGraph) -> Self {
        let n = g.len();
        let rows: Vec<Vec<ExtReal>> = (0..n)
            .into_par_iter()
            .map(|i| {
                g.bfs_distances(i)
                    .into_iter()
                    .map(|d| d.to_real())
                    .collect()
            })
            .collect();
        Self::from_rows(g, MetricKind::Combinatorial, rows)
    }

    /// Shortest-path metric for the given edge lengths (Dijkstra from every
    /// source). `length(i, j)` is called only for `i != j` with `μ_ij > 0`
    /// and must be nonnegative.
    pub fn path_metric<F>(g: &WeightedGraph, length: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        for (i, j, _) in g.edges().filter(|&(i, j, _)| i != j) {
            let l = length(i, j);
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidMetric(format!(
                    "edge length {l} on ({}, {}) is not a finite nonnegative number",
                    g.id(i),
                    g.id(j)
                )));
            }
        }
        let rows: Vec<Vec<ExtReal>> = (0..g.len())
            .into_par_iter()
            .map(|s| dijkstra(g, s, &length))
            .collect();
        Ok(Self::from_rows(g, MetricKind::PathMetric, rows))
    }

    /// Explicit table, row-major over the graph's vertex order. Validated for
    /// nonnegativity, zero diagonal, symmetry and the triangle inequality.
    pub fn explicit(g: &WeightedGraph, rows: Vec<Vec<ExtReal>>) -> Result<Self> {
        let n = g.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetric(format!("table must be {n}x{n}")));
        }
        let metric = Self::from_rows(g, MetricKind::Explicit, rows);
        metric.validate(g)?;
        Ok(metric)
    }

    fn from_rows(g: &WeightedGraph, kind: MetricKind, rows: Vec<Vec<ExtReal>>) -> Self {
        let n = g.len();
        let table: Vec<ExtReal> = rows.into_iter().flatten().collect();
        let mut metric = PseudoMetric {
            kind,
            n,
            table,
            jump_size: ExtReal::ZERO,
        };
        metric.jump_size = g
            .edges()
            .map(|(i, j, _)| metric.get(i, j))
            .fold(ExtReal::ZERO, |acc, d| if d > acc { d } else { acc });
        metric
    }

    fn validate(&self, g: &WeightedGraph) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != ExtReal::ZERO {
                return Err(Error::InvalidMetric(format!(
                    "nonzero diagonal at `{}`",
                    g.id(i)
                )));
            }
            for j in 0..n {
                let d = self.get(i, j);
                match d {
                    Ext::Finite(v) if v.is_nan() => {
                        return Err(Error::MissingMetricPair(g.id(i).into(), g.id(j).into()))
                    }
                    Ext::Finite(v) if v < 0.0 => {
                        return Err(Error::InvalidMetric(format!(
                            "negative distance between `{}` and `{}`",
                            g.id(i),
                            g.id(j)
                        )))
                    }
                    _ => {}
                }
                if d != self.get(j, i) {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric entries for `{}` and `{}`",
                        g.id(i),
                        g.id(j)
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.get(i, j).to_f64();
                for k in 0..n {
                    let via = self.get(i, k).to_f64() + self.get(k, j).to_f64();
                    if dij > via * (1.0 + 1e-12) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for `{}`, `{}` via `{}`",
                            g.id(i),
                            g.id(j),
                            g.id(k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> ExtReal {
        self.table[i * self.n + j]
    }

    /// Cached jump size `s`.
    pub fn jump_size(&self) -> ExtReal {
        self.jump_size
    }

    /// Rows of the table, for serialization.
    pub fn rows(&self) -> impl Iterator<Item = &[ExtReal]> {
        self.table.chunks(self.n)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn dijkstra<F: Fn(usize, usize) -> f64>(
    g: &WeightedGraph,
    source: usize,
    length: &F,
) -> Vec<ExtReal> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut done = vec![false; g.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([HeapItem(0.0, source)]);
    while let Some(HeapItem(d, x)) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, _) in g.neighbors(x) {
            if y == x || done[y] {
                continue;
            }
            let nd = d + length(x, y);
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(HeapItem(nd, y));
            }
        }
    }
    dist.into_iter().map(ExtReal::from_f64).collect()
}

/// Checks `Σ_y μ_xy ρ²(x, y) ≤ m_x` at every vertex.
pub fn certify_intrinsic(
    g: &WeightedGraph,
    rho: &PseudoMetric,
    tol: f64,
) -> Result<IntrinsicCertificate> {
    if rho.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            got: rho.len(),
        });
    }
    let mut max_ratio = ExtReal::ZERO;
    for x in 0..g.len() {
        let mut sum = 0.0;
        let mut infinite = false;
        for &(y, mu) in g.neighbors(x) {
            match rho.get(x, y) {
                Ext::Finite(d) => sum += mu * d * d,
                Ext::Infinite => infinite = true,
            }
        }
        let ratio = if infinite {
            ExtReal::Infinite
        } else {
            Ext::Finite(sum / g.m(x))
        };
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    let mut zero_pairs = 0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if rho.get(i, j) == ExtReal::ZERO {
                zero_pairs += 1;
            }
        }
    }
    let is_intrinsic = match max_ratio {
        Ext::Finite(r) => r <= 1.0 + tol,
        Ext::Infinite => false,
    };
    Ok(IntrinsicCertificate {
        max_ratio,
        jump_size: rho.jump_size(),
        is_intrinsic,
        zero_distance_pairs: zero_pairs,
        tolerance: tol,
    })
}

/// Path metric with edge length `min(Deg(x)^{-1/2}, Deg(y)^{-1/2})`, i.e.
/// the inverse square root of the larger degree.
///
/// Since `ℓ(x, y)² ≤ 1/Deg(x)`, every vertex satisfies
/// `Σ_y μ_xy ρ(x, y)² ≤ Σ_y μ_xy / Deg(x) = m_x`.
pub fn default_intrinsic_metric(g: &WeightedGraph) -> Result<PseudoMetric> {
    let deg: Vec<f64> = (0..g.len()).map(|i| g.weighted_degree(i)).collect();
    PseudoMetric::path_metric(g, |x, y| deg[x].max(deg[y]).sqrt().recip())
}

/// `x ↦ ρ(x, A) = min_{a ∈ A} ρ(x, a)`.
pub fn distance_to_set(rho: &PseudoMetric, set: &VertexSet) -> Result<Vec<ExtReal>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok((0..rho.len())
        .map(|x| {
            set.iter()
                .map(|a| rho.get(x, a))
                .fold(ExtReal::Infinite, ExtReal::min)
        })
        .collect())
}

/// `ρ(A, B) = min_{a ∈ A, b ∈ B} ρ(a, b)`.
pub fn set_distance(rho: &PseudoMetric, a: &VertexSet, b: &VertexSet) -> Result<ExtReal> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = ExtReal::Infinite;
    for x in a.iter() {
        for y in b.iter() {
            best = best.min(rho.get(x, y));
        }
    }
    Ok(best)
}

/// Smallest `κ` with `|f(x) - f(y)| ≤ κ ρ(x, y)` for all pairs. Pairs at
/// infinite distance impose nothing; pairs at distance zero force equality.
pub fn lipschitz_constant(rho: &PseudoMetric, f: &VertexFunction) -> Result<ExtReal> {
    let v = f.values();
    if v.len() != rho.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.len(),
            got: v.len(),
        });
    }
    if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "function value at index {bad} is not finite"
        )));
    }
    let mut best = 0.0f64;
    for x in 0..v.len() {
        for y in x + 1..v.len() {
            let diff = (v[x] - v[y]).abs();
            match rho.get(x, y) {
                Ext::Infinite => {}
                Ext::Finite(d) if d > 0.0 => best = best.max(diff / d),
                Ext::Finite(_) => {
                    if diff > 0.0 {
                        return Ok(ExtReal::Infinite);
                    }
                }
            }
        }
    }
    Ok(Ext::Finite(best))
}

/// Converts an extended function to a plain one; fails on infinite values.
pub fn finite_function(values: &[ExtReal]) -> Result<VertexFunction> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.finite().ok_or_else(|| {
                Error::InvalidParameter(format!("infinite value at vertex index {i}"))
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(VertexFunction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        build_graph, path_graph, star_graph, truncate_lattice, Edge, Measure, MeasurePolicy,
    };

    #[test]
    fn combinatorial_on_normalized_graph_is_intrinsic() {
        let g = truncate_lattice(5, MeasurePolicy::Normalized).unwrap();
        let rho = PseudoMetric::combinatorial(&g);
        let cert = certify_intrinsic(&g, &rho, DEFAULT_CERT_TOL).unwrap();
        assert_eq!(cert.max_ratio, Ext::Finite(1.0));
        assert_eq!(cert.jump_size, Ext::Finite(1.0));
        assert!(cert.is_intrinsic);
    }

    #[test]
    fn physical_star_is_not_intrinsic_for_hops() {
        let g = star_graph(3, MeasurePolicy::Physical).unwrap();
        let rho = PseudoMetric::combinatorial(&g);
        let cert = certify_intrinsic(&g, &rho, DEFAULT_CERT_TOL).unwrap();
        assert_eq!(cert.max_ratio, Ext::Finite(3.0));
        assert!(!cert.is_intrinsic);
    }

    #[test]
    fn zero_metric_is_intrinsic() {
        let g = path_graph(4, MeasurePolicy::Physical).unwrap();
        let rows = vec![vec![ExtReal::ZERO; 4]; 4];
        let rho = PseudoMetric::explicit(&g, rows).unwrap();
        let cert = certify_intrinsic(&g, &rho, DEFAULT_CERT_TOL).unwrap();
        assert_eq!(cert.max_ratio, ExtReal::ZERO);
        assert_eq!(cert.jump_size, ExtReal::ZERO);
        assert!(cert.is_intrinsic);
        assert_eq!(cert.zero_distance_pairs, 6);
    }

    #[test]
    fn default_metric_on_p2_physical() {
        let g = path_graph(2, MeasurePolicy::Physical).unwrap();
        let rho = default_intrinsic_metric(&g).unwrap();
        assert_eq!(rho.get(0, 1), Ext::Finite(1.0));
        let cert = certify_intrinsic(&g, &rho, DEFAULT_CERT_TOL).unwrap();
        assert_eq!(cert.max_ratio, Ext::Finite(1.0));
        assert!(cert.is_intrinsic);
    }

    #[test]
    fn default_metric_reproduces_hops_for_normalized_measure() {
        let g = truncate_lattice(4, MeasurePolicy::Normalized).unwrap();
        let a = default_intrinsic_metric(&g).unwrap();
        let b = PseudoMetric::combinatorial(&g);
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn default_metric_uses_the_larger_degree() {
        // Interior vertex next to an endpoint: Deg = 2 vs 1. Taking the
        // smaller degree would give Σ μ ℓ² = 1/2 + 1 > m = 1.
        let g = path_graph(4, MeasurePolicy::Physical).unwrap();
        let rho = default_intrinsic_metric(&g).unwrap();
        assert_eq!(rho.get(0, 1), Ext::Finite(2f64.sqrt().recip()));
        let cert = certify_intrinsic(&g, &rho, 1e-12).unwrap();
        assert!(cert.is_intrinsic);
    }

    #[test]
    fn default_metric_across_components_is_infinite() {
        let g = build_graph(
            &[Edge::new("a", "b", 2.0), Edge::new("c", "d", 1.0)],
            Measure::Physical,
        )
        .unwrap();
        let rho = default_intrinsic_metric(&g).unwrap();
        assert_eq!(rho.get(0, 3), ExtReal::Infinite);
        assert!(
            certify_intrinsic(&g, &rho, DEFAULT_CERT_TOL)
                .unwrap()
                .is_intrinsic
        );
    }

    #[test]
    fn set_distances() {
        let g = truncate_lattice(6, MeasurePolicy::Normalized).unwrap();
        let rho = PseudoMetric::combinatorial(&g);
        let a = g.vertex_set(&["0"]).unwrap();
        let b = g.vertex_set(&["5"]).unwrap();
        assert_eq!(set_distance(&rho, &a, &b).unwrap(), Ext::Finite(5.0));
        let c = g.vertex_set(&["0", "1"]).unwrap();
        assert_eq!(set_distance(&rho, &a, &c).unwrap(), ExtReal::ZERO);
        let empty = VertexSet::from_indices(vec![], g.len()).unwrap();
        assert!(matches!(
            set_distance(&rho, &a, &empty),
            Err(Error::EmptySet)
        ));

        let h = build_graph(
            &[Edge::new("a", "b", 1.0), Edge::new("c", "d", 1.0)],
            Measure::Physical,
        )
        .unwrap();
        let rho = PseudoMetric::combinatorial(&h);
        let a = h.vertex_set(&["a"]).unwrap();
        let d = h.vertex_set(&["d"]).unwrap();
        assert_eq!(set_distance(&rho, &a, &d).unwrap(), ExtReal::Infinite);
        let dist = distance_to_set(&rho, &a).unwrap();
        assert_eq!(dist[h.index_of("c").unwrap()], ExtReal::Infinite);
    }

    #[test]
    fn distance_to_set_on_p3() {
        let g = path_graph(3, MeasurePolicy::Physical).unwrap();
        let rho = PseudoMetric::combinatorial(&g);
        let a = g.vertex_set(&["0"]).unwrap();
        let d = distance_to_set(&rho, &a).unwrap();
        assert_eq!(
            d,
            vec![Ext::Finite(0.0), Ext::Finite(1.0), Ext::Finite(2.0)]
        );
        let empty = VertexSet::from_indices(vec![], 3).unwrap();
        assert!(distance_to_set(&rho, &empty).is_err());
    }

    #[test]
    fn lipschitz_constants() {
        let g = truncate_lattice(3, MeasurePolicy::Normalized).unwrap();
        let rho = PseudoMetric::combinatorial(&g);
        let c = VertexFunction(vec![4.0; g.len()]);
        assert_eq!(lipschitz_constant(&rho, &c).unwrap(), ExtReal::ZERO);

        let x0 = g.index_of("-1").unwrap();
        let f = VertexFunction(
            (0..g.len())
                .map(|i| 2.0 * rho.get(i, x0).to_f64())
                .collect(),
        );
        assert_eq!(lipschitz_constant(&rho, &f).unwrap(), Ext::Finite(2.0));
    }

    #[test]
    fn lipschitz_with_zero_distance_pairs() {
        let g = path_graph(2, MeasurePolicy::Physical).unwrap();
        let rho = PseudoMetric::explicit(&g, vec![vec![ExtReal::ZERO; 2]; 2]).unwrap();
        let f = VertexFunction(vec![0.0, 1.0]);
        assert_eq!(lipschitz_constant(&rho, &f).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn explicit_validation() {
        let g = path_graph(3, MeasurePolicy::Physical).unwrap();
        let f = Ext::Finite;
        let asym = vec![
            vec![f(0.0), f(1.0), f(2.0)],
            vec![f(1.5), f(0.0), f(1.0)],
            vec![f(2.0), f(1.0), f(0.0)],
        ];
        assert!(PseudoMetric::explicit(&g, asym).is_err());
        let triangle = vec![
            vec![f(0.0), f(1.0), f(3.0)],
            vec![f(1.0), f(0.0), f(1.0)],
            vec![f(3.0), f(1.0), f(0.0)],
        ];
        assert!(PseudoMetric::explicit(&g, triangle).is_err());
        let missing = vec![
            vec![f(0.0), f(1.0), f(f64::NAN)],
            vec![f(1.0), f(0.0), f(1.0)],
            vec![f(f64::NAN), f(1.0), f(0.0)],
        ];
        assert!(matches!(
            PseudoMetric::explicit(&g, missing),
            Err(Error::MissingMetricPair(..))
        ));
    }
}
