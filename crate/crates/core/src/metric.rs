//! Dense finite metrics and the shortest-path metric of `G_k`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::graph::{edge_length, DiamondGraph};

/// Largest diamond level whose metric is materialized densely (`|V(G_6)| = 2732`).
pub const MAX_METRIC_LEVEL: usize = 6;

/// Absolute tolerance used by [`verify_metric`].
pub const METRIC_TOL: f64 = 1e-12;

/// Symmetric `n x n` distance matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricMatrix {
    n: usize,
    d: Vec<f64>,
}

impl MetricMatrix {
    /// Wraps a row-major `n x n` array. Metric axioms are not checked here;
    /// use [`verify_metric`].
    pub fn from_flat(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: d.len(),
            });
        }
        Ok(MetricMatrix { n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            d.extend_from_slice(row);
        }
        Ok(MetricMatrix { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Unordered pairs `i < j` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn num_pairs(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Arithmetic mean over unordered pairs.
    pub fn mean_distance(&self) -> f64 {
        let count = self.num_pairs();
        if count == 0 {
            return 0.0;
        }
        self.pairs().map(|(i, j)| self.get(i, j)).sum::<f64>() / count as f64
    }

    /// Principal submatrix on `points`, in the given order.
    pub fn restrict(&self, points: &[usize]) -> MetricMatrix {
        let m = points.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in points {
            for &j in points {
                d.push(self.get(i, j));
            }
        }
        MetricMatrix { n: m, d }
    }

    /// `i,j,d` rows for every unordered pair, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,d\n");
        for (i, j) in self.pairs() {
            let _ = writeln!(out, "{},{},{}", i, j, sig17(self.get(i, j)));
        }
        out
    }
}

/// Shortest-path metric of `G_k`: breadth-first hop counts scaled by `2^{-k}`.
pub fn shortest_path_metric(g: &DiamondGraph) -> Result<MetricMatrix> {
    let k = g.level();
    if k > MAX_METRIC_LEVEL {
        return Err(Error::Capacity {
            what: "metric level k",
            value: k as u64,
            max: MAX_METRIC_LEVEL as u64,
        });
    }
    let n = g.num_vertices();
    let adj = g.adjacency();
    let unit = edge_length(k);
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(source, row)| {
        let hops = bfs(&adj, source);
        for (slot, h) in row.iter_mut().zip(hops) {
            // hop counts are small integers, so the product is an exact binary fraction
            *slot = h as f64 * unit;
        }
    });
    Ok(MetricMatrix { n, d })
}

fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y] == u32::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// A failed metric axiom.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonFinite { i: usize, j: usize, value: f64 },
    Reflexivity { i: usize, value: f64 },
    Symmetry { i: usize, j: usize, magnitude: f64 },
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(i, k) > d(i, j) + d(j, k)` by `magnitude`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        magnitude: f64,
    },
}

/// Checks every metric axiom; the result is empty iff `m` is a metric
/// (within [`METRIC_TOL`]). The triangle check is cubic in `m.len()`.
pub fn verify_metric(m: &MetricMatrix) -> Vec<Violation> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() {
                out.push(Violation::NonFinite { i, j, value: v });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    for i in 0..n {
        let v = m.get(i, i);
        if v.abs() > METRIC_TOL {
            out.push(Violation::Reflexivity { i, value: v });
        }
    }
    for (i, j) in m.pairs() {
        let (a, b) = (m.get(i, j), m.get(j, i));
        if (a - b).abs() > METRIC_TOL {
            out.push(Violation::Symmetry {
                i,
                j,
                magnitude: (a - b).abs(),
            });
        }
        if a <= 0.0 {
            out.push(Violation::NonPositive { i, j, value: a });
        }
    }
    let triangles: Vec<Violation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for k in i + 1..n {
                let direct = m.get(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let excess = direct - (m.get(i, j) + m.get(j, k));
                    if excess > METRIC_TOL {
                        local.push(Violation::Triangle {
                            i,
                            j,
                            k,
                            magnitude: excess,
                        });
                    }
                }
            }
            local
        })
        .collect();
    out.extend(triangles);
    out
}
