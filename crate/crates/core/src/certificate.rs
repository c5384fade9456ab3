//! Poincaré-type certificate for embeddings of `G_k` into `l_p`.
//!
//! For every map `f` of `G_k` into `l_p`, `1 <= p <= 2`,
//!
//! ```text
//! ||f(s)-f(t)||^2 + (p-1) * sum_{i=1..k} sum_{(x,y) in A_i} ||f(x)-f(y)||^2
//!     <= sum_{(x,y) in E(G_k)} ||f(x)-f(y)||^2
//! ```
//!
//! Applied to a map with expansion `E` and contraction `C`, the left side is at
//! least `(1 + (p-1)k) / C^2` and the right side at most `E^2`, which forces
//! distortion `E * C >= sqrt(1 + (p-1)k)`.

use serde::{Deserialize, Serialize};

use crate::cut::l1_lp_isomorphism_constant;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{DiamondGraph, S, T};
use crate::lp::PExponent;

/// Both sides of the inequality for one embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub lower_bound: f64,
}

impl Certificate {
    pub fn holds(&self, tol_rel: f64) -> bool {
        self.slack >= -tol_rel * self.rhs
    }
}

/// Evaluates both sides for `f` on `g`, summing in level-major edge order.
pub fn poincare_sides(g: &DiamondGraph, f: &Embedding) -> Result<Certificate> {
    if f.len() != g.num_vertices() {
        return Err(Error::MissingCoordinates {
            expected: g.num_vertices(),
            found: f.len(),
        });
    }
    let p = f.p().get();
    let sq = |x: usize, y: usize| {
        let d = f.dist(x, y);
        d * d
    };

    let anti: f64 = g.all_anti_edges().map(|a| sq(a.a, a.b)).sum();
    let lhs = sq(S, T) + (p - 1.0) * anti;
    let rhs: f64 = g.edges().iter().map(|e| sq(e.u, e.v)).sum();

    Ok(Certificate {
        k: g.level(),
        p,
        lhs,
        rhs,
        slack: rhs - lhs,
        lower_bound: certified_lower_bound(g.level(), f.p()),
    })
}

/// `sqrt(1 + (p-1)k)`: no embedding of `G_k` into `l_p` has smaller distortion.
pub fn certified_lower_bound(k: usize, p: PExponent) -> f64 {
    (1.0 + (p.get() - 1.0) * k as f64).sqrt()
}

/// Outcome of the dimension bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimensionBound {
    /// Any `D`-embedding into `l_1^d` needs `d` at least this large.
    AtLeast(f64),
    /// The constraint excludes no finite dimension.
    Unbounded,
}

impl DimensionBound {
    pub fn value(self) -> Option<f64> {
        match self {
            DimensionBound::AtLeast(d) => Some(d),
            DimensionBound::Unbounded => None,
        }
    }
}

/// Smallest `d` compatible with `sqrt(1 + k / log2 d) <= target`, i.e.
/// `d >= 2^{k / (target^2 - 1)}`.
pub fn chain_dimension_bound(k: usize, target: f64) -> DimensionBound {
    let t2 = target * target;
    if t2 <= 1.0 {
        DimensionBound::Unbounded
    } else {
        DimensionBound::AtLeast((k as f64 / (t2 - 1.0)).exp2())
    }
}

/// Dimension lower bound for `D`-embedding the `l_1` image of `G_k` into
/// `l_1^d`, where `c1` is the distortion of `G_k` into `l_1`.
///
/// Composing with the identity `l_1^d -> l_p^d` at `p = 1 + 1/log2 d` (cost at
/// most `2^{1/p} <= 2`) gives an embedding of `G_k` into `l_p` with distortion
/// at most `2 c1 D`, and the certificate then requires
/// `sqrt(1 + k / log2 d) <= 2 c1 D`.
pub fn corollary_dimension_bound(k: usize, distortion: f64, c1: f64) -> Result<DimensionBound> {
    if !(distortion >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "distortion D = {distortion} must be at least 1"
        )));
    }
    if !(c1 >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "l1 constant c1 = {c1} must be at least 1"
        )));
    }
    Ok(chain_dimension_bound(k, 2.0 * c1 * distortion))
}

/// Lower bound on the distortion of any embedding of `G_k` into `l_1^d`:
/// `sqrt(1 + k / log2 d) / 2^{1/p}` with `p = 1 + 1/log2 d`. At `d = 1` the
/// line is isometric to `l_2^1`, so the bound is `sqrt(1 + k)`.
pub fn l1_chain_lower_bound(k: usize, d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::InvalidArgument("dimension must be at least 1".into())),
        1 => Ok(certified_lower_bound(k, PExponent::TWO)),
        _ => {
            let (p, constant) = l1_lp_isomorphism_constant(d)?;
            Ok(certified_lower_bound(k, p) / constant)
        }
    }
}
