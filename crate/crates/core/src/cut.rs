//! Minimum-distortion `l_1` embeddings through the cut cone.
//!
//! A finite metric embeds in `l_1` exactly when it is a nonnegative
//! combination of cut pseudometrics `delta_S`, so the least `l_1` distortion
//! of `m` is the optimum of
//!
//! ```text
//! minimize D  s.t.  d(x,y) <= sum_S lambda_S delta_S(x,y) <= D d(x,y),  lambda >= 0
//! ```
//!
//! over all canonical cuts `S` (those containing point 0).

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::lp::PExponent;
use crate::metric::MetricMatrix;
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Largest point count for exact cut enumeration.
pub const MAX_CUT_POINTS: usize = 14;

/// Weights below this are dropped from a solution.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Relative tolerance of the bracket `d <= sum lambda delta <= D d`.
pub const BRACKET_TOL: f64 = 1e-7;

/// A bipartition of `{0..n-1}` identified by the side containing 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    mask: u64,
}

impl Cut {
    pub fn from_members(members: &[usize], n: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &x in members {
            if x >= n {
                return Err(Error::InvalidArgument(format!("member {x} outside 0..{n}")));
            }
            mask |= 1 << x;
        }
        let full = (1u64 << n) - 1;
        if mask & 1 == 0 || mask == full {
            return Err(Error::InvalidArgument(
                "cut side must contain 0 and be proper".into(),
            ));
        }
        Ok(Cut { mask })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask >> x & 1 == 1
    }

    /// `delta_S(x, y)`: 1 iff the cut separates `x` from `y`.
    pub fn separates(&self, x: usize, y: usize) -> bool {
        self.contains(x) != self.contains(y)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..64).filter(|&x| self.contains(x)).collect()
    }
}

/// All `2^{n-1} - 1` canonical cuts in increasing bitmap order.
pub fn enumerate_cuts(n: usize) -> Result<Vec<Cut>> {
    if n > MAX_CUT_POINTS {
        return Err(Error::Capacity {
            what: "cut enumeration point count",
            value: n as u64,
            max: MAX_CUT_POINTS as u64,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {n}")));
    }
    let full = (1u64 << n) - 1;
    Ok((1..full).step_by(2).map(|mask| Cut { mask }).collect())
}

/// Weighted cuts realizing an `l_1` embedding of `n` points.
#[derive(Clone, Debug, PartialEq)]
pub struct CutSolution {
    pub n: usize,
    pub cuts: Vec<(Cut, f64)>,
    pub distortion: f64,
}

impl CutSolution {
    /// `sum_S lambda_S delta_S` as a dense matrix.
    pub fn realized_metric(&self) -> MetricMatrix {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                d[x * n + y] = self
                    .cuts
                    .iter()
                    .filter(|(c, _)| c.separates(x, y))
                    .map(|(_, w)| w)
                    .sum();
            }
        }
        MetricMatrix::from_flat(n, d).expect("square by construction")
    }

    /// Pairs where `d <= realized <= D d` fails by more than [`BRACKET_TOL`].
    pub fn bracket_violations(&self, m: &MetricMatrix) -> Vec<(usize, usize)> {
        let realized = self.realized_metric();
        m.pairs()
            .filter(|&(x, y)| {
                let target = m.get(x, y);
                let got = realized.get(x, y);
                got < target * (1.0 - BRACKET_TOL) || got > self.distortion * target * (1.0 + BRACKET_TOL)
            })
            .collect()
    }

    pub fn to_json(&self) -> CutSolutionJson {
        CutSolutionJson {
            distortion: self.distortion,
            cuts: self
                .cuts
                .iter()
                .map(|(c, w)| WeightedCutJson {
                    members: c.members(),
                    weight: *w,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSolutionJson {
    pub distortion: f64,
    pub cuts: Vec<WeightedCutJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCutJson {
    pub members: Vec<usize>,
    pub weight: f64,
}

impl CutSolutionJson {
    pub fn to_solution(&self, n: usize) -> Result<CutSolution> {
        let cuts = self
            .cuts
            .iter()
            .map(|c| {
                if !(c.weight >= 0.0 && c.weight.is_finite()) {
                    return Err(Error::InvalidArgument(format!("bad cut weight {}", c.weight)));
                }
                Ok((Cut::from_members(&c.members, n)?, c.weight))
            })
            .collect::<Result<_>>()?;
        Ok(CutSolution {
            n,
            cuts,
            distortion: self.distortion,
        })
    }
}

/// Exact minimum `l_1` distortion of `m` and a cut decomposition attaining it.
pub fn min_distortion_l1(m: &MetricMatrix) -> Result<CutSolution> {
    let n = m.len();
    let cuts = enumerate_cuts(n)?;
    if let Some((x, y)) = m.pairs().find(|&(x, y)| !(m.get(x, y) > 0.0 && m.get(x, y).is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "metric distance d({x},{y}) = {} is not positive and finite",
            m.get(x, y)
        )));
    }

    let vars = cuts.len() + 1;
    let distortion_var = cuts.len();
    let mut objective = vec![0.0; vars];
    objective[distortion_var] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    for (x, y) in m.pairs() {
        let mut row: Vec<f64> = cuts
            .iter()
            .map(|c| if c.separates(x, y) { 1.0 } else { 0.0 })
            .collect();
        row.push(0.0);
        lp.add_constraint(row.clone(), Relation::Ge, m.get(x, y))?;
        row[distortion_var] = -m.get(x, y);
        lp.add_constraint(row, Relation::Le, 0.0)?;
    }

    let solution = match lp.solve()? {
        LpOutcome::Optimal(s) => s,
        other => {
            return Err(Error::Internal(format!(
                "cut LP is always feasible and bounded, solver reported {other:?}"
            )))
        }
    };

    let weighted = cuts
        .into_iter()
        .zip(&solution.x)
        .filter(|(_, &w)| w >= WEIGHT_FLOOR)
        .map(|(c, &w)| (c, w))
        .collect();
    let sol = CutSolution {
        n,
        cuts: weighted,
        distortion: solution.x[distortion_var],
    };
    let bad = sol.bracket_violations(m);
    if !bad.is_empty() {
        return Err(Error::Internal(format!(
            "cut LP solution violates the distortion bracket on pairs {bad:?}"
        )));
    }
    Ok(sol)
}

/// One `l_1` coordinate per cut: point `x` gets `lambda_S` on cut `S` if `x in S`.
pub fn cuts_to_embedding(sol: &CutSolution) -> Result<Embedding> {
    let n = sol.n;
    if sol.cuts.is_empty() {
        return Err(Error::InvalidArgument(
            "a solution without cuts cannot separate any points".into(),
        ));
    }
    let dim = sol.cuts.len();
    let mut coords = Vec::with_capacity(n * dim);
    for x in 0..n {
        coords.extend(
            sol.cuts
                .iter()
                .map(|(c, w)| if c.contains(x) { *w } else { 0.0 }),
        );
    }
    Embedding::new(n, dim, PExponent::ONE, coords)
}

/// Exponent `p = 1 + 1/log2 d` and the constant `d^{1-1/p} = 2^{1/p}` with
/// `||x||_p <= ||x||_1 <= constant * ||x||_p` on `R^d`.
pub fn l1_lp_isomorphism_constant(d: usize) -> Result<(PExponent, f64)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "isomorphism constant needs d >= 2, got {d}"
        )));
    }
    let p = 1.0 + 1.0 / (d as f64).log2();
    Ok((PExponent::new(p)?, (d as f64).powf(1.0 - 1.0 / p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_diamond;
    use crate::metric::{shortest_path_metric, verify_metric};
    use crate::optimizer::evaluate_distortion;

    fn diamond_metric(k: usize) -> MetricMatrix {
        shortest_path_metric(&build_diamond(k).unwrap()).unwrap()
    }

    #[test]
    fn cut_counts() {
        let c2 = enumerate_cuts(2).unwrap();
        assert_eq!(c2.len(), 1);
        assert_eq!(c2[0].members(), vec![0]);
        assert_eq!(enumerate_cuts(3).unwrap().len(), 3);
        assert_eq!(enumerate_cuts(12).unwrap().len(), 2047);
        assert_eq!(enumerate_cuts(14).unwrap().len(), 8191);
        assert!(matches!(enumerate_cuts(15), Err(Error::Capacity { .. })));
        assert!(enumerate_cuts(1).is_err());
        let c5 = enumerate_cuts(5).unwrap();
        assert!(c5.windows(2).all(|w| w[0].mask() < w[1].mask()));
        assert!(c5.iter().all(|c| c.contains(0) && c.mask() != 31));
    }

    #[test]
    fn cut_membership() {
        assert!(Cut::from_members(&[1], 3).is_err());
        assert!(Cut::from_members(&[0, 1, 2], 3).is_err());
        assert!(Cut::from_members(&[0, 5], 3).is_err());
        let c = Cut::from_members(&[0, 2], 3).unwrap();
        assert!(c.separates(0, 1) && c.separates(1, 2) && !c.separates(0, 2));
    }

    #[test]
    fn two_points() {
        let m = diamond_metric(0);
        let sol = min_distortion_l1(&m).unwrap();
        assert!((sol.distortion - 1.0).abs() < 1e-12);
        assert_eq!(sol.cuts.len(), 1);
        assert_eq!(sol.cuts[0].0.members(), vec![0]);
        assert!((sol.cuts[0].1 - 1.0).abs() < 1e-12);
        let f = cuts_to_embedding(&sol).unwrap();
        assert_eq!(f.point(0), &[sol.cuts[0].1]);
        assert_eq!(f.point(1), &[0.0]);
        assert!((f.dist(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_cycle_is_isometric() {
        let m = diamond_metric(1);
        let sol = min_distortion_l1(&m).unwrap();
        assert!((sol.distortion - 1.0).abs() < 1e-6);
        let f = cuts_to_embedding(&sol).unwrap();
        let r = evaluate_distortion(&m, &f).unwrap();
        assert!((r.distortion - sol.distortion).abs() <= 1e-6 * sol.distortion);
    }

    #[test]
    fn empty_solution() {
        let sol = CutSolution {
            n: 3,
            cuts: vec![],
            distortion: 1.0,
        };
        assert!(cuts_to_embedding(&sol).is_err());
    }

    #[test]
    fn combination_is_a_pseudometric() {
        let cuts = enumerate_cuts(5).unwrap();
        let sol = CutSolution {
            n: 5,
            cuts: cuts.iter().enumerate().map(|(i, c)| (*c, 0.1 + i as f64 * 0.07)).collect(),
            distortion: 1.0,
        };
        assert!(verify_metric(&sol.realized_metric()).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let m = diamond_metric(1);
        let sol = min_distortion_l1(&m).unwrap();
        let text = serde_json::to_string(&sol.to_json()).unwrap();
        let back: CutSolutionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_solution(4).unwrap(), sol);
    }

    #[test]
    fn isomorphism_constants() {
        let (p, c) = l1_lp_isomorphism_constant(2).unwrap();
        assert_eq!(p.get(), 2.0);
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
        let (p, c) = l1_lp_isomorphism_constant(1 << 20).unwrap();
        assert!((p.get() - 1.05).abs() < 1e-15);
        // 2^{1/1.05} from a 50-digit evaluation
        assert!((c - 1.9350635570477833).abs() < 1e-12);
        for d in [2usize, 3, 7, 64, 1000, 1 << 30] {
            let (p, c) = l1_lp_isomorphism_constant(d).unwrap();
            assert!((c - (1.0 / p.get()).exp2()).abs() < 1e-12);
            assert!(c <= 2.0);
        }
        assert!(l1_lp_isomorphism_constant(1).is_err());
    }
}
