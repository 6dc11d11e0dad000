#![allow(dead_code)]

use heatdgg::graph::{build_graph_with_vertices, Edge, Measure, MeasurePolicy};
use heatdgg::{VertexFunction, VertexSet, WeightedGraph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};

/// Random connected graph: a random spanning tree plus about `n/2` extra
/// edges, weights in `[0.2, 3]`, an occasional self-loop. The measure
/// cycles through physical, normalized and an explicit
/// `m_x = U[0.5, 2] · Σ_y μ_xy` by `variant`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, variant: usize) -> WeightedGraph {
    assert!(n >= 2);
    let mut pairs = HashSet::new();
    let mut edges = Vec::new();
    let mut add = |u: usize, v: usize, rng: &mut ChaCha8Rng, edges: &mut Vec<Edge>| {
        let key = (u.min(v), u.max(v));
        if pairs.insert(key) {
            edges.push(Edge::new(
                u.to_string(),
                v.to_string(),
                rng.gen_range(0.2..3.0),
            ));
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        add(order[k], parent, rng, &mut edges);
    }
    for _ in 0..n / 2 {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            add(u, v, rng, &mut edges);
        }
    }
    if rng.gen_bool(0.3) {
        let x = rng.gen_range(0..n);
        add(x, x, rng, &mut edges);
    }
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let measure = match variant % 3 {
        0 => Measure::Physical,
        1 => Measure::Normalized,
        _ => {
            let mut sums: HashMap<String, f64> = HashMap::new();
            for e in &edges {
                *sums.entry(e.u.clone()).or_default() += e.mu;
                if e.u != e.v {
                    *sums.entry(e.v.clone()).or_default() += e.mu;
                }
            }
            for v in sums.values_mut() {
                *v *= rng.gen_range(0.5..2.0);
            }
            Measure::Explicit(sums)
        }
    };
    build_graph_with_vertices(&ids, &edges, measure).unwrap()
}

pub fn policy_name(g: &WeightedGraph) -> &'static str {
    match g.policy() {
        MeasurePolicy::Physical => "physical",
        MeasurePolicy::Normalized => "normalized",
        MeasurePolicy::Explicit => "explicit",
    }
}

/// Nonempty random subset of `pool` with at most `max_len` elements.
pub fn random_subset(rng: &mut ChaCha8Rng, pool: &[usize], n: usize, max_len: usize) -> VertexSet {
    let k = rng.gen_range(1..=max_len.min(pool.len()));
    let picked: Vec<usize> = pool.choose_multiple(rng, k).copied().collect();
    VertexSet::from_indices(picked, n).unwrap()
}

/// Uniform values in `[-1, 1]` on `set`, zero elsewhere.
pub fn random_function_on(rng: &mut ChaCha8Rng, set: &VertexSet, n: usize) -> VertexFunction {
    let mut f = vec![0.0; n];
    for x in set.iter() {
        f[x] = rng.gen_range(-1.0..1.0);
    }
    VertexFunction(f)
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> VertexFunction {
    VertexFunction((0..n).map(|_| rng.gen_range(-scale..scale)).collect())
}

pub fn singletons(domain: &[usize], n: usize) -> Vec<VertexSet> {
    domain
        .iter()
        .map(|&x| VertexSet::from_indices(vec![x], n).unwrap())
        .collect()
}
