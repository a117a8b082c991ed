//! Reductions of knapsack, path-based throughput and inventory-constrained
//! revenue problems to [`PackingInstance`] form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Column, ConcavePiece, PackingInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem {
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnapsackSpec {
    pub items: Vec<KnapsackItem>,
    #[serde(rename = "C")]
    pub capacity: f64,
    /// Adds `x_j ≤ v_j` for every item.
    #[serde(rename = "box", default = "default_true")]
    pub include_box: bool,
}

fn default_true() -> bool {
    true
}

/// Variable `x_j` is the value collected from item `j`; row 0 is the capacity
/// `Σ_j (w_j/v_j)·x_j ≤ C`, and with the box flag row `1 + j` is `x_j/v_j ≤ 1`.
pub fn build_knapsack(spec: &KnapsackSpec) -> Result<PackingInstance> {
    if !(spec.capacity > 0.0) {
        return Err(Error::Config(format!("capacity must be positive, got {}", spec.capacity)));
    }
    if let Some((j, it)) = spec.items.iter().enumerate().find(|(_, it)| !(it.value > 0.0 && it.weight > 0.0)) {
        return Err(Error::Config(format!(
            "item {} needs positive value and weight, got ({}, {})",
            j + 1,
            it.value,
            it.weight
        )));
    }
    let mut b = vec![spec.capacity];
    if spec.include_box {
        b.extend(std::iter::repeat_n(1.0, spec.items.len()));
    }
    let columns = spec
        .items
        .iter()
        .enumerate()
        .map(|(j, it)| {
            let mut coeffs = vec![(0, it.weight / it.value)];
            if spec.include_box {
                coeffs.push((1 + j, 1.0 / it.value));
            }
            Column::new(coeffs, ConcavePiece::linear(1.0))
        })
        .collect();
    PackingInstance::new(b, columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub source: String,
    pub target: String,
    /// Candidate paths, each a list of edge ids from source to target.
    pub paths: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThroughputSpec {
    pub edges: Vec<Edge>,
    pub requests: Vec<Request>,
}

/// One variable per (request, path), with all of a request's paths arriving
/// consecutively. Rows are the edges in spec order followed by one row per
/// request bounding its total allocation by 1.
pub fn build_throughput(spec: &ThroughputSpec) -> Result<PackingInstance> {
    let mut index = HashMap::new();
    for (e, edge) in spec.edges.iter().enumerate() {
        if !(edge.capacity > 0.0) {
            return Err(Error::Config(format!("edge {:?} needs positive capacity", edge.id)));
        }
        if index.insert(edge.id.as_str(), e).is_some() {
            return Err(Error::Config(format!("duplicate edge id {:?}", edge.id)));
        }
    }
    let n_edges = spec.edges.len();
    let mut b: Vec<f64> = spec.edges.iter().map(|e| e.capacity).collect();
    b.extend(std::iter::repeat_n(1.0, spec.requests.len()));

    let mut columns = Vec::new();
    for (r, req) in spec.requests.iter().enumerate() {
        for (p, path) in req.paths.iter().enumerate() {
            let label = || format!("request {} path {}", r + 1, p + 1);
            if path.is_empty() {
                return Err(Error::Config(format!("{} is empty", label())));
            }
            let mut at = req.source.as_str();
            let mut coeffs = Vec::with_capacity(path.len() + 1);
            for id in path {
                let &e = index
                    .get(id.as_str())
                    .ok_or_else(|| Error::Config(format!("{} uses unknown edge {id:?}", label())))?;
                let edge = &spec.edges[e];
                if edge.from != at {
                    return Err(Error::Config(format!(
                        "{}: edge {id:?} starts at {:?}, expected {at:?}",
                        label(),
                        edge.from
                    )));
                }
                if coeffs.iter().any(|&(row, _)| row == e) {
                    return Err(Error::Config(format!("{} repeats edge {id:?}", label())));
                }
                coeffs.push((e, 1.0));
                at = &edge.to;
            }
            if at != req.target {
                return Err(Error::Config(format!("{} ends at {at:?}, expected {:?}", label(), req.target)));
            }
            coeffs.push((n_edges + r, 1.0));
            columns.push(Column::new(coeffs, ConcavePiece::linear(1.0)));
        }
    }
    PackingInstance::new(b, columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OoicSpec {
    /// Revenue functions `g_t`, one per period.
    pub pieces: Vec<ConcavePiece>,
    /// Inventory `Δ`.
    pub delta: f64,
    /// Optional bounds `[m, M]` on each piece's initial slope, checked where finite.
    #[serde(default)]
    pub slope_bounds: Option<(f64, f64)>,
}

/// Single row `Σ_t x_t ≤ Δ`, column `t` carrying `g_t`.
pub fn build_ooic(spec: &OoicSpec) -> Result<PackingInstance> {
    if !(spec.delta > 0.0) {
        return Err(Error::Config(format!("inventory must be positive, got {}", spec.delta)));
    }
    if let Some((lo, hi)) = spec.slope_bounds {
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("need 0 < m ≤ M, got [{lo}, {hi}]")));
        }
        for (t, g) in spec.pieces.iter().enumerate() {
            if let Some(s) = g.initial_slope() {
                if s < lo || s > hi {
                    return Err(Error::Config(format!("period {}: initial slope {s} outside [{lo}, {hi}]", t + 1)));
                }
            }
        }
    }
    let columns = spec.pieces.iter().map(|&g| Column::new(vec![(0, 1.0)], g)).collect();
    PackingInstance::new(vec![spec.delta], columns)
}

/// Any application spec, tagged by `kind` in its file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ApplicationSpec {
    Knapsack(KnapsackSpec),
    Throughput(ThroughputSpec),
    Ooic(OoicSpec),
}

impl ApplicationSpec {
    pub fn build(&self) -> Result<PackingInstance> {
        match self {
            ApplicationSpec::Knapsack(s) => build_knapsack(s),
            ApplicationSpec::Throughput(s) => build_throughput(s),
            ApplicationSpec::Ooic(s) => build_ooic(s),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(value: f64, weight: f64) -> KnapsackItem {
        KnapsackItem { value, weight }
    }

    #[test]
    fn knapsack_layout() {
        let inst =
            build_knapsack(&KnapsackSpec { items: vec![item(1.0, 2.0)], capacity: 1.0, include_box: true }).unwrap();
        assert_eq!(inst.dense_rows(), vec![vec![2.0], vec![1.0]]);
        assert_eq!(inst.b, vec![1.0, 1.0]);

        let inst = build_knapsack(&KnapsackSpec {
            items: vec![item(2.0, 1.0), item(3.0, 1.0)],
            capacity: 1.0,
            include_box: false,
        })
        .unwrap();
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.columns[1].coeffs, vec![(0, 1.0 / 3.0)]);

        let empty = build_knapsack(&KnapsackSpec { items: vec![], capacity: 2.0, include_box: true }).unwrap();
        assert_eq!(empty.n(), 0);
    }

    #[test]
    fn knapsack_rejects_bad_items() {
        assert!(
            build_knapsack(&KnapsackSpec { items: vec![item(0.0, 1.0)], capacity: 1.0, include_box: true }).is_err()
        );
        assert!(build_knapsack(&KnapsackSpec { items: vec![], capacity: 0.0, include_box: true }).is_err());
    }

    fn edge(id: &str, from: &str, to: &str) -> Edge {
        Edge { id: id.into(), from: from.into(), to: to.into(), capacity: 1.0 }
    }

    fn req(s: &str, t: &str, paths: &[&[&str]]) -> Request {
        Request {
            source: s.into(),
            target: t.into(),
            paths: paths.iter().map(|p| p.iter().map(|e| e.to_string()).collect()).collect(),
        }
    }

    #[test]
    fn throughput_layout() {
        let spec = ThroughputSpec {
            edges: vec![edge("ab", "a", "b"), edge("bc", "b", "c"), edge("ac", "a", "c")],
            requests: vec![req("a", "c", &[&["ab", "bc"], &["ac"]]), req("b", "c", &[&["bc"]])],
        };
        let inst = build_throughput(&spec).unwrap();
        assert_eq!(inst.m(), 3 + 2);
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.columns[0].coeffs, vec![(0, 1.0), (1, 1.0), (3, 1.0)]);
        assert_eq!(inst.columns[1].coeffs, vec![(2, 1.0), (3, 1.0)]);
        assert_eq!(inst.columns[2].coeffs, vec![(1, 1.0), (4, 1.0)]);
    }

    #[test]
    fn throughput_rejects_broken_paths() {
        let edges = vec![edge("ab", "a", "b"), edge("bc", "b", "c")];
        let bad = |requests| build_throughput(&ThroughputSpec { edges: edges.clone(), requests }).unwrap_err();
        assert!(bad(vec![req("a", "c", &[&["ab", "zz"]])]).to_string().contains("unknown edge"));
        assert!(bad(vec![req("a", "c", &[&["bc"]])]).to_string().contains("starts at"));
        assert!(bad(vec![req("a", "c", &[&["ab"]])]).to_string().contains("ends at"));
        assert!(bad(vec![req("a", "c", &[&[]])]).to_string().contains("empty"));
    }

    #[test]
    fn ooic_layout() {
        let spec = OoicSpec {
            pieces: vec![
                ConcavePiece::Log { scale: 1.0, stretch: 1.0 },
                ConcavePiece::Power { scale: 1.0, exponent: 0.5 },
            ],
            delta: 2.0,
            slope_bounds: Some((0.5, 1.5)),
        };
        let inst = build_ooic(&spec).unwrap();
        assert_eq!(inst.b, vec![2.0]);
        assert_eq!(inst.columns[1].piece, spec.pieces[1]);
        assert!(build_ooic(&OoicSpec { slope_bounds: Some((2.0, 3.0)), ..spec.clone() }).is_err());
        assert!(build_ooic(&OoicSpec { delta: 0.0, ..spec }).is_err());
    }

    #[test]
    fn spec_files() {
        let k = ApplicationSpec::from_json_str(r#"{"kind": "knapsack", "items": [{"value": 1, "weight": 2}], "C": 1}"#)
            .unwrap();
        assert_eq!(k.build().unwrap().m(), 2);
        let o = ApplicationSpec::from_json_str(
            r#"{"kind": "ooic", "pieces": [{"kind": "linear", "weight": 1}], "delta": 1}"#,
        )
        .unwrap();
        assert_eq!(o.build().unwrap().n(), 1);
        assert!(ApplicationSpec::from_json_str(r#"{"kind": "matching"}"#).is_err());
    }
}
