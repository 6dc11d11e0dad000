//! File formats: graph JSON, CSV edge lists and explicit metric matrices.
//!
//! Graph JSON:
//!
//! ```json
//! {"vertices": [{"id": "a", "m": 1.0}],
//!  "edges": [{"u": "a", "v": "b", "mu": 1.0}],
//!  "measure_policy": "explicit"}
//! ```
//!
//! With `physical` or `normalized` the per-vertex `m` is recomputed and may
//! be omitted.

use crate::error::{Error, Result};
use crate::ext::{Ext, ExtReal};
use crate::graph::{build_graph_with_vertices, Edge, Measure, MeasurePolicy, WeightedGraph};
use crate::metric::PseudoMetric;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(default)]
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<Edge>,
    pub measure_policy: MeasurePolicy,
}

impl GraphFile {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        GraphFile {
            vertices: g
                .ids()
                .iter()
                .zip(g.measure())
                .map(|(id, &m)| VertexRecord {
                    id: id.clone(),
                    m: Some(m),
                })
                .collect(),
            edges: g
                .edges()
                .map(|(i, j, mu)| Edge::new(g.id(i), g.id(j), mu))
                .collect(),
            measure_policy: MeasurePolicy::Explicit,
        }
    }

    pub fn into_graph(self) -> Result<WeightedGraph> {
        let ids: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let measure = match self.measure_policy {
            MeasurePolicy::Physical => Measure::Physical,
            MeasurePolicy::Normalized => Measure::Normalized,
            MeasurePolicy::Explicit => {
                let mut map = HashMap::new();
                for v in &self.vertices {
                    let m = v.m.ok_or_else(|| {
                        Error::Parse(format!(
                            "vertex `{}` has no measure under the explicit policy",
                            v.id
                        ))
                    })?;
                    map.insert(v.id.clone(), m);
                }
                Measure::Explicit(map)
            }
        };
        build_graph_with_vertices(&ids, &self.edges, measure)
    }
}

pub fn read_graph_json<R: Read>(r: R) -> Result<WeightedGraph> {
    let file: GraphFile = serde_json::from_reader(r)?;
    file.into_graph()
}

/// Writes with the explicit policy so the measure round-trips exactly.
pub fn write_graph_json<W: Write>(g: &WeightedGraph, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &GraphFile::from_graph(g))?;
    Ok(())
}

/// `u,v,mu` per line; `#` comments and an optional `u,v,mu` header allowed.
pub fn read_edge_csv<R: Read>(r: R, policy: MeasurePolicy) -> Result<WeightedGraph> {
    let measure = match policy {
        MeasurePolicy::Physical => Measure::Physical,
        MeasurePolicy::Normalized => Measure::Normalized,
        MeasurePolicy::Explicit => {
            return Err(Error::Parse(
                "CSV edge lists carry no measure; use physical or normalized".into(),
            ))
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(r);
    let mut edges = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!(
                "record {} must have 3 fields",
                line + 1
            )));
        }
        if line == 0 && &rec[2] == "mu" {
            continue;
        }
        let mu: f64 = rec[2]
            .parse()
            .map_err(|_| Error::Parse(format!("record {}: bad weight `{}`", line + 1, &rec[2])))?;
        edges.push(Edge::new(&rec[0], &rec[1], mu));
    }
    build_graph_with_vertices(&[], &edges, measure)
}

fn parse_distance(s: &str) -> Result<ExtReal> {
    match s {
        "inf" | "Inf" | "INF" | "infinity" => Ok(ExtReal::Infinite),
        _ => s
            .parse::<f64>()
            .map(Ext::Finite)
            .map_err(|_| Error::Parse(format!("bad distance `{s}`"))),
    }
}

/// Square matrix with a header row of vertex ids (first cell ignored) and
/// one row per vertex starting with its id. Rows and columns may come in any
/// order; every pair must be present. `inf` marks infinite distance.
pub fn read_metric_csv<R: Read>(r: R, g: &WeightedGraph) -> Result<PseudoMetric> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = reader.headers()?.clone();
    let cols = header
        .iter()
        .skip(1)
        .map(|id| g.index_of(id))
        .collect::<Result<Vec<_>>>()?;
    let n = g.len();
    let mut table = vec![vec![Ext::Finite(f64::NAN); n]; n];
    let mut seen = vec![false; n];
    for rec in reader.records() {
        let rec = rec?;
        let row = g.index_of(&rec[0])?;
        seen[row] = true;
        for (k, cell) in rec.iter().skip(1).enumerate() {
            let col = *cols
                .get(k)
                .ok_or_else(|| Error::Parse("row longer than header".into()))?;
            table[row][col] = parse_distance(cell)?;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::MissingMetricPair(g.id(i).into(), g.id(i).into()));
    }
    PseudoMetric::explicit(g, table)
}

pub fn write_metric_csv<W: Write>(rho: &PseudoMetric, g: &WeightedGraph, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(g.ids().iter().cloned());
    out.write_record(&header)?;
    for (i, row) in rho.rows().enumerate() {
        let mut rec = vec![g.id(i).to_string()];
        rec.extend(row.iter().map(|d| d.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, truncate_lattice};
    use crate::metric::default_intrinsic_metric;
    use proptest::prelude::*;

    #[test]
    fn csv_edges_with_header_and_comments() {
        let text = "u,v,mu\n# comment\na,b,1.5\nb,c,2\n";
        let g = read_edge_csv(text.as_bytes(), MeasurePolicy::Normalized).unwrap();
        assert_eq!(g.ids(), &["a", "b", "c"]);
        assert_eq!(g.measure(), &[1.5, 3.5, 2.0]);
        assert!(read_edge_csv("a,b,x\n".as_bytes(), MeasurePolicy::Physical).is_err());
    }

    #[test]
    fn json_policies() {
        let text =
            r#"{"vertices":[],"edges":[{"u":"a","v":"b","mu":2.0}],"measure_policy":"normalized"}"#;
        let g = read_graph_json(text.as_bytes()).unwrap();
        assert_eq!(g.measure(), &[2.0, 2.0]);
        let text = r#"{"vertices":[{"id":"a"}],"edges":[{"u":"a","v":"b","mu":2.0}],"measure_policy":"explicit"}"#;
        assert!(read_graph_json(text.as_bytes()).is_err());
        assert!(read_graph_json("{not json".as_bytes()).is_err());
    }

    #[test]
    fn metric_csv_round_trip() {
        let g = truncate_lattice(3, MeasurePolicy::Physical).unwrap();
        let rho = default_intrinsic_metric(&g).unwrap();
        let mut buf = Vec::new();
        write_metric_csv(&rho, &g, &mut buf).unwrap();
        let back = read_metric_csv(buf.as_slice(), &g).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert_eq!(back.get(i, j), rho.get(i, j));
            }
        }
    }

    #[test]
    fn metric_csv_with_infinity() {
        let g = build_graph(
            &[Edge::new("a", "b", 1.0), Edge::new("c", "c", 1.0)],
            Measure::Physical,
        )
        .unwrap();
        let text = ",a,b,c\na,0,1,inf\nb,1,0,inf\nc,inf,inf,0\n";
        let rho = read_metric_csv(text.as_bytes(), &g).unwrap();
        assert_eq!(rho.get(0, 2), ExtReal::Infinite);
        let missing = ",a,b,c\na,0,1,inf\nb,1,0,inf\n";
        assert!(read_metric_csv(missing.as_bytes(), &g).is_err());
    }

    proptest! {
        #[test]
        fn graph_json_round_trips_bit_exactly(
            weights in proptest::collection::vec(0.0f64..1e3, 1..12),
            masses in proptest::collection::vec(1e-3f64..1e3, 13),
        ) {
            let edges: Vec<Edge> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| Edge::new(i.to_string(), ((i * 7 + 3) % 13).to_string(), w))
                .collect();
            let mut ids: Vec<String> = edges.iter().flat_map(|e| [e.u.clone(), e.v.clone()]).collect();
            ids.sort();
            ids.dedup();
            let measure: HashMap<String, f64> =
                ids.iter().cloned().zip(masses.iter().copied()).collect();
            let g = match build_graph(&edges, Measure::Explicit(measure)) {
                Ok(g) => g,
                // duplicate pairs with different weights are legitimately rejected
                Err(Error::ContradictoryEdge { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let mut buf = Vec::new();
            write_graph_json(&g, &mut buf).unwrap();
            let back = read_graph_json(buf.as_slice()).unwrap();
            prop_assert_eq!(back.ids(), g.ids());
            prop_assert_eq!(back.measure(), g.measure());
            for i in 0..g.len() {
                prop_assert_eq!(back.neighbors(i), g.neighbors(i));
            }
        }
    }
}
