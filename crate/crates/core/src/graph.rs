//! The diamond graphs `G_k`.
//!
//! `G_0` is a single edge `{s, t}` of length 1. `G_{i+1}` replaces every edge
//! `(u, v)` of `G_i` by the quadrilateral `u, a, v, b` whose four sides have
//! length `2^{-(i+1)}`; the pair `{a, b}` is the level `i+1` anti-edge of
//! `(u, v)`. The full construction history is kept: every level's edge list,
//! every level's anti-edges, and the parent/child links between levels.
//!
//! Vertex ids are dense and assigned in construction order: `s = 0`, `t = 1`,
//! then level by level, walking the parent edges in stored order and creating
//! `a` before `b`. Vertex ids of `G_{k-1}` are therefore a prefix of those of
//! `G_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest level `build_diamond` accepts (`4^8` edges at the top level).
pub const MAX_LEVEL: usize = 8;

/// Dense vertex identifier.
pub type VertexId = usize;

/// Id of the endpoint `s` of `G_0`.
pub const S: VertexId = 0;
/// Id of the endpoint `t` of `G_0`.
pub const T: VertexId = 1;

/// An edge of `G_level`, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeveledEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub level: usize,
}

impl LeveledEdge {
    pub fn new(x: VertexId, y: VertexId, level: usize) -> Self {
        assert_ne!(x, y, "self-loop in diamond construction");
        let (u, v) = if x < y { (x, y) } else { (y, x) };
        LeveledEdge { u, v, level }
    }

    /// Length `2^{-level}` of the edge in the metric of any `G_k`, `k >= level`.
    pub fn length(&self) -> f64 {
        edge_length(self.level)
    }
}

/// The diagonal `{a, b}` created when `parent` was replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AntiEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub level: usize,
    pub parent: LeveledEdge,
}

/// `G_k` with its complete construction history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiamondGraph {
    level: usize,
    num_vertices: usize,
    edges_by_level: Vec<Vec<LeveledEdge>>,
    anti_edges_by_level: Vec<Vec<AntiEdge>>,
}

/// Length of an edge of level `i`, exactly `2^{-i}`.
pub fn edge_length(i: usize) -> f64 {
    // exact for every i a caller can build; powi of 0.5 is exact down to subnormals
    0.5f64.powi(i as i32)
}

/// Vertex count of `G_k`: `(2 * 4^k + 4) / 3`.
pub fn vertex_count(k: usize) -> u128 {
    (2 * 4u128.pow(k as u32) + 4) / 3
}

/// Builds `G_k`.
pub fn build_diamond(k: usize) -> Result<DiamondGraph> {
    if k > MAX_LEVEL {
        return Err(Error::Capacity {
            what: "diamond level k",
            value: k as u64,
            max: MAX_LEVEL as u64,
        });
    }

    let mut edges_by_level = Vec::with_capacity(k + 1);
    let mut anti_edges_by_level = Vec::with_capacity(k + 1);
    edges_by_level.push(vec![LeveledEdge::new(S, T, 0)]);
    // A_0 does not exist; keep the slot so index i holds A_i.
    anti_edges_by_level.push(Vec::new());
    let mut next_id = 2;

    for level in 1..=k {
        let parents = &edges_by_level[level - 1];
        let mut edges = Vec::with_capacity(4 * parents.len());
        let mut anti = Vec::with_capacity(parents.len());
        for &parent in parents {
            let (u, v) = (parent.u, parent.v);
            let a = next_id;
            let b = next_id + 1;
            next_id += 2;
            edges.push(LeveledEdge::new(u, a, level));
            edges.push(LeveledEdge::new(a, v, level));
            edges.push(LeveledEdge::new(v, b, level));
            edges.push(LeveledEdge::new(b, u, level));
            anti.push(AntiEdge {
                a,
                b,
                level,
                parent,
            });
        }
        edges_by_level.push(edges);
        anti_edges_by_level.push(anti);
    }

    Ok(DiamondGraph {
        level: k,
        num_vertices: next_id,
        edges_by_level,
        anti_edges_by_level,
    })
}

impl DiamondGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.num_vertices
    }

    /// `E(G_k)`, the edges of the top level.
    pub fn edges(&self) -> &[LeveledEdge] {
        &self.edges_by_level[self.level]
    }

    /// Edges of `G_i` for `0 <= i <= k`.
    pub fn edges_at(&self, i: usize) -> Result<&[LeveledEdge]> {
        self.edges_by_level
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level: i,
                min: 0,
                max: self.level,
            })
    }

    pub fn edges_by_level(&self) -> &[Vec<LeveledEdge>] {
        &self.edges_by_level
    }

    /// `A_i`, the anti-edges created at level `i`, for `1 <= i <= k`.
    pub fn anti_edges(&self, i: usize) -> Result<&[AntiEdge]> {
        if i == 0 || i > self.level {
            return Err(Error::LevelOutOfRange {
                level: i,
                min: 1,
                max: self.level,
            });
        }
        Ok(&self.anti_edges_by_level[i])
    }

    /// All anti-edges, level-major.
    pub fn all_anti_edges(&self) -> impl Iterator<Item = &AntiEdge> {
        self.anti_edges_by_level.iter().flatten()
    }

    /// The four level `i+1` edges that replaced edge `index` of level `i`.
    pub fn children(&self, i: usize, index: usize) -> Result<&[LeveledEdge]> {
        if i >= self.level {
            return Err(Error::LevelOutOfRange {
                level: i,
                min: 0,
                max: self.level.saturating_sub(1),
            });
        }
        let next = &self.edges_by_level[i + 1];
        next.get(4 * index..4 * index + 4)
            .ok_or_else(|| Error::InvalidArgument(format!("no edge {index} at level {i}")))
    }

    /// The level `i-1` edge that edge `index` of level `i` was carved from.
    pub fn parent(&self, i: usize, index: usize) -> Result<LeveledEdge> {
        if i == 0 || i > self.level {
            return Err(Error::LevelOutOfRange {
                level: i,
                min: 1,
                max: self.level,
            });
        }
        if index >= self.edges_by_level[i].len() {
            return Err(Error::InvalidArgument(format!(
                "no edge {index} at level {i}"
            )));
        }
        Ok(self.edges_by_level[i - 1][index / 4])
    }

    /// Adjacency lists of `G_k`, neighbours in ascending order.
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for e in self.edges() {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            level: self.level,
            num_vertices: self.num_vertices,
            edges: self
                .edges_by_level
                .iter()
                .flatten()
                .map(|e| EdgeJson {
                    u: e.u,
                    v: e.v,
                    level: e.level,
                })
                .collect(),
            anti_edges: self
                .all_anti_edges()
                .map(|a| AntiEdgeJson {
                    a: a.a,
                    b: a.b,
                    level: a.level,
                    parent_u: a.parent.u,
                    parent_v: a.parent.v,
                })
                .collect(),
        }
    }
}

/// Smallest `k` with `|V(G_k)| >= n`.
pub fn level_for_points(n: u64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {n}"
        )));
    }
    let n = n as u128;
    let mut k = 0;
    while vertex_count(k) < n {
        k += 1;
    }
    Ok(k)
}

/// Serialized form of a diamond graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub level: usize,
    pub num_vertices: usize,
    pub edges: Vec<EdgeJson>,
    pub anti_edges: Vec<AntiEdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntiEdgeJson {
    pub a: usize,
    pub b: usize,
    pub level: usize,
    pub parent_u: usize,
    pub parent_v: usize,
}

impl GraphJson {
    /// Rebuilds the graph and checks that this document describes it exactly.
    pub fn to_graph(&self) -> Result<DiamondGraph> {
        let g = build_diamond(self.level)?;
        if &g.to_json() != self {
            return Err(Error::InvalidArgument(format!(
                "document is not the canonical diamond graph of level {}",
                self.level
            )));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_levels() {
        let g0 = build_diamond(0).unwrap();
        assert_eq!(g0.num_vertices(), 2);
        assert_eq!(g0.edges(), &[LeveledEdge::new(0, 1, 0)]);
        assert!(g0.anti_edges(1).is_err());

        let g1 = build_diamond(1).unwrap();
        assert_eq!(g1.num_vertices(), 4);
        assert_eq!(g1.edges().len(), 4);
        assert_eq!(g1.anti_edges(1).unwrap().len(), 1);
        let anti = g1.anti_edges(1).unwrap()[0];
        assert_eq!((anti.a, anti.b), (2, 3));
        assert_eq!(anti.parent, LeveledEdge::new(0, 1, 0));

        let g2 = build_diamond(2).unwrap();
        assert_eq!(g2.num_vertices(), 12);
        assert_eq!(g2.edges().len(), 16);
        assert_eq!(g2.anti_edges(1).unwrap().len(), 1);
        assert_eq!(g2.anti_edges(2).unwrap().len(), 4);
    }

    #[test]
    fn vertex_recurrence_matches_construction() {
        // V_k = V_{k-1} + 2 * 4^{k-1}
        let mut expected = 2u128;
        for k in 0..=6 {
            if k > 0 {
                expected += 2 * 4u128.pow(k as u32 - 1);
            }
            assert_eq!(build_diamond(k).unwrap().num_vertices() as u128, expected);
            assert_eq!(vertex_count(k), expected);
        }
    }

    #[test]
    fn counts_up_to_six() {
        for k in 0..=6 {
            let g = build_diamond(k).unwrap();
            for i in 0..=k {
                assert_eq!(g.edges_at(i).unwrap().len(), 4usize.pow(i as u32));
            }
            for i in 1..=k {
                assert_eq!(g.anti_edges(i).unwrap().len(), 4usize.pow(i as u32 - 1));
            }
            assert_eq!(g.num_vertices() as u128, vertex_count(k));
        }
    }

    #[test]
    fn quadrilateral_replacement() {
        let g = build_diamond(3).unwrap();
        for i in 0..3 {
            for (idx, parent) in g.edges_at(i).unwrap().iter().enumerate() {
                let anti = g.anti_edges(i + 1).unwrap()[idx];
                assert_eq!(anti.parent, *parent);
                assert_eq!(anti.level, parent.level + 1);
                let (u, v, a, b) = (parent.u, parent.v, anti.a, anti.b);
                let expected = [
                    LeveledEdge::new(u, a, i + 1),
                    LeveledEdge::new(a, v, i + 1),
                    LeveledEdge::new(v, b, i + 1),
                    LeveledEdge::new(b, u, i + 1),
                ];
                assert_eq!(g.children(i, idx).unwrap(), &expected);
                for c in 0..4 {
                    assert_eq!(g.parent(i + 1, 4 * idx + c).unwrap(), *parent);
                }
            }
        }
    }

    #[test]
    fn child_edges_partition_next_level() {
        let g = build_diamond(4).unwrap();
        for i in 0..4 {
            let mut union: Vec<_> = (0..g.edges_at(i).unwrap().len())
                .flat_map(|idx| g.children(i, idx).unwrap().to_vec())
                .collect();
            let mut next = g.edges_at(i + 1).unwrap().to_vec();
            union.sort();
            next.sort();
            assert_eq!(union, next);
        }
    }

    #[test]
    fn simple_graph_without_parallel_edges() {
        let g = build_diamond(5).unwrap();
        let set: HashSet<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(set.len(), g.edges().len());
        assert!(g.edges().iter().all(|e| e.u < e.v));
    }

    #[test]
    fn prefix_stability() {
        for k in 1..=5 {
            let small = build_diamond(k - 1).unwrap();
            let big = build_diamond(k).unwrap();
            assert!(small.num_vertices() < big.num_vertices());
            for i in 0..k {
                assert_eq!(small.edges_at(i).unwrap(), big.edges_at(i).unwrap());
            }
            for i in 1..k {
                assert_eq!(small.anti_edges(i).unwrap(), big.anti_edges(i).unwrap());
            }
            assert_eq!(build_diamond(k).unwrap(), big);
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(build_diamond(MAX_LEVEL).is_ok());
        assert!(matches!(
            build_diamond(MAX_LEVEL + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn edge_lengths() {
        assert_eq!(edge_length(0), 1.0);
        assert_eq!(edge_length(2), 0.25);
        assert_eq!(edge_length(5), 0.03125);
        assert_eq!(edge_length(52), 2f64.powi(-52));
    }

    #[test]
    fn anti_edge_levels() {
        let g = build_diamond(2).unwrap();
        assert_eq!(g.anti_edges(1).unwrap().len(), 1);
        assert_eq!(g.anti_edges(2).unwrap().len(), 4);
        assert!(build_diamond(1).unwrap().anti_edges(0).is_err());
        assert!(g.anti_edges(3).is_err());
    }

    #[test]
    fn points_to_level() {
        assert_eq!(level_for_points(2).unwrap(), 0);
        assert_eq!(level_for_points(3).unwrap(), 1);
        assert_eq!(level_for_points(4).unwrap(), 1);
        assert_eq!(level_for_points(12).unwrap(), 2);
        assert_eq!(level_for_points(13).unwrap(), 3);
        assert_eq!(level_for_points(44).unwrap(), 3);
        assert!(level_for_points(1).is_err());
        assert!(level_for_points(0).is_err());
        for n in [2u64, 5, 100, 10_000, 1 << 40, u64::MAX] {
            let k = level_for_points(n).unwrap();
            let bound = ((3.0 * n as f64 / 2.0).ln() / 4f64.ln()).ceil() as usize;
            assert!(k <= bound, "n={n}: k={k} > {bound}");
        }
    }

    #[test]
    fn json_round_trip() {
        let g = build_diamond(2).unwrap();
        let doc = g.to_json();
        assert_eq!(doc.edges.len(), 1 + 4 + 16);
        assert_eq!(doc.anti_edges.len(), 1 + 4);
        let text = serde_json::to_string(&doc).unwrap();
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_graph().unwrap(), g);

        let mut bad = doc;
        bad.edges.pop();
        assert!(bad.to_graph().is_err());
    }
}
