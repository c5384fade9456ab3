//! Dense two-phase revised simplex with Bland's pivoting rule.
//!
//! Solves `min c^T x` subject to linear rows `a^T x (<=, >=, =) b` and
//! `x >= 0`. Bland's rule (lowest-index entering column, lowest-index leaving
//! basic variable among ratio ties) rules out cycling on the heavily
//! degenerate problems produced by the cut LP.
//!
//! The basis inverse is kept explicitly, updated by elementary row operations
//! after each pivot, and recomputed from the original columns every
//! [`REFACTOR_INTERVAL`] pivots so that round-off cannot accumulate over long
//! degenerate runs.

use crate::error::{Error, Result};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-9;
/// Basic values below this magnitude are treated as exactly zero.
const ZERO_TOL: f64 = 1e-11;
const REFACTOR_INTERVAL: usize = 50;
const MAX_PIVOTS: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// A problem in `objective.len()` nonnegative variables.
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coefficients.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: coefficients.len(),
            });
        }
        if !rhs.is_finite() || coefficients.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite constraint data".into()));
        }
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Solver::new(self).run()
    }
}

struct Solver {
    m: usize,
    structural: usize,
    first_artificial: usize,
    /// Standard-form columns (structural, slack/surplus, artificial), each of length `m`.
    columns: Vec<Vec<f64>>,
    b: Vec<f64>,
    costs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `m x m` inverse of the basis matrix.
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

impl Solver {
    fn new(lp: &LinearProgram) -> Self {
        let structural = lp.num_vars();
        let m = lp.constraints.len();

        // normalize to rhs >= 0
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|x| -x).collect(), rel, -c.rhs)
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs)
                }
            })
            .collect();

        let mut columns: Vec<Vec<f64>> = (0..structural)
            .map(|j| rows.iter().map(|r| r.0[j]).collect())
            .collect();
        let mut basis = vec![usize::MAX; m];
        for (r, row) in rows.iter().enumerate() {
            if row.1 == Relation::Eq {
                continue;
            }
            let mut col = vec![0.0; m];
            col[r] = if row.1 == Relation::Le { 1.0 } else { -1.0 };
            if row.1 == Relation::Le {
                basis[r] = columns.len();
            }
            columns.push(col);
        }
        let first_artificial = columns.len();
        for (r, row) in rows.iter().enumerate() {
            if row.1 == Relation::Le {
                continue;
            }
            let mut col = vec![0.0; m];
            col[r] = 1.0;
            basis[r] = columns.len();
            columns.push(col);
        }

        let n = columns.len();
        let mut costs = vec![0.0; n];
        costs[..structural].copy_from_slice(&lp.objective);
        let mut is_basic = vec![false; n];
        for &j in &basis {
            is_basic[j] = true;
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let b: Vec<f64> = rows.iter().map(|r| r.2).collect();

        Solver {
            m,
            structural,
            first_artificial,
            columns,
            xb: b.clone(),
            b,
            costs,
            basis,
            is_basic,
            binv,
            pivots: 0,
            since_refactor: 0,
        }
    }

    /// `y = c_B^T B^{-1}`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (yi, bi) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *yi += cb * bi;
                }
            }
        }
        y
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = &self.columns[j];
        (0..m)
            .map(|r| {
                self.binv[r * m..(r + 1) * m]
                    .iter()
                    .zip(col)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[f64]) {
        let m = self.m;
        let inv = 1.0 / u[r];
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|x| x * inv).collect();
        let step = self.xb[r] * inv;
        for i in 0..m {
            if i == r || u[i] == 0.0 {
                continue;
            }
            let factor = u[i];
            for (x, p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *x -= factor * p;
            }
            self.xb[i] -= factor * step;
            if self.xb[i].abs() < ZERO_TOL {
                self.xb[i] = 0.0;
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.xb[r] = step;
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_INTERVAL {
            self.refactor();
        }
    }

    /// Recomputes `B^{-1}` and `x_B` from the original columns by Gauss-Jordan
    /// elimination with partial pivoting.
    fn refactor(&mut self) {
        let m = self.m;
        let w = 2 * m;
        let mut aug = vec![0.0; m * w];
        for (c, &j) in self.basis.iter().enumerate() {
            for r in 0..m {
                aug[r * w + c] = self.columns[j][r];
            }
        }
        for r in 0..m {
            aug[r * w + m + r] = 1.0;
        }
        for c in 0..m {
            let (pr, best) = (c..m)
                .map(|r| (r, aug[r * w + c].abs()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best < 1e-14 {
                // singular under round-off; keep the updated inverse
                self.since_refactor = 0;
                return;
            }
            if pr != c {
                for k in 0..w {
                    aug.swap(pr * w + k, c * w + k);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            for k in 0..w {
                aug[c * w + k] *= inv;
            }
            let prow: Vec<f64> = aug[c * w..(c + 1) * w].to_vec();
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = aug[r * w + c];
                if f != 0.0 {
                    for (x, p) in aug[r * w..(r + 1) * w].iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                }
            }
        }
        // row c of the right half is row c of B^{-1}, i.e. basis position c
        for r in 0..m {
            self.binv[r * m..(r + 1) * m].copy_from_slice(&aug[r * w + m..(r + 1) * w]);
        }
        for r in 0..m {
            let v: f64 = self.binv[r * m..(r + 1) * m]
                .iter()
                .zip(&self.b)
                .map(|(a, b)| a * b)
                .sum();
            self.xb[r] = if v.abs() < ZERO_TOL { 0.0 } else { v };
        }
        self.since_refactor = 0;
    }

    /// Bland's rule over columns `0..limit` with costs `cost`. Returns false if
    /// the objective is unbounded below.
    fn optimize(&mut self, cost: &[f64], limit: usize) -> Result<bool> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Internal(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
            let y = self.duals(cost);
            let entering = (0..limit).find(|&j| {
                !self.is_basic[j] && {
                    let reduced: f64 =
                        cost[j] - self.columns[j].iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
                    reduced < -PRICE_TOL
                }
            });
            let Some(j) = entering else {
                return Ok(true);
            };
            let u = self.ftran(j);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if u[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / u[r];
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * lratio.max(1.0);
                            if (tie && self.basis[r] < self.basis[lr]) || (!tie && ratio < lratio) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j, &u),
                None => return Ok(false),
            }
        }
    }

    fn run(mut self) -> Result<LpOutcome> {
        let n = self.columns.len();
        if self.first_artificial < n {
            let mut phase_one = vec![0.0; n];
            phase_one[self.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            if !self.optimize(&phase_one, n)? {
                return Err(Error::Internal("phase one reported unbounded".into()));
            }
            self.refactor();
            let infeasibility: f64 = (0..self.m)
                .filter(|&r| self.basis[r] >= self.first_artificial)
                .map(|r| self.xb[r])
                .sum();
            let scale = self.b.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // drive zero-valued artificials out of the basis where possible
            for r in 0..self.m {
                if self.basis[r] < self.first_artificial {
                    continue;
                }
                let replacement = (0..self.first_artificial)
                    .filter(|&j| !self.is_basic[j])
                    .map(|j| (j, self.ftran(j)))
                    .find(|(_, u)| u[r].abs() > PIVOT_TOL);
                if let Some((j, u)) = replacement {
                    self.xb[r] = 0.0;
                    self.pivot(r, j, &u);
                }
            }
        }

        let costs = self.costs.clone();
        if !self.optimize(&costs, self.first_artificial)? {
            return Ok(LpOutcome::Unbounded);
        }
        self.refactor();

        let mut x = vec![0.0; self.structural];
        for r in 0..self.m {
            if self.basis[r] < self.structural {
                x[self.basis[r]] = self.xb[r].max(0.0);
            }
        }
        let objective = x.iter().zip(&self.costs).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal(LpSolution {
            x,
            objective,
            pivots: self.pivots,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> LpSolution {
        match lp.solve().unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::minimize(vec![-3.0, -5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.add_constraint(vec![0.0, 2.0], Relation::Le, 12.0).unwrap();
        lp.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0).unwrap();
        let s = optimal(&lp);
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y, x + 2y >= 4, 3x + y >= 6, x - y = 0 -> x = y = 1.5
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 2.0], Relation::Ge, 4.0).unwrap();
        lp.add_constraint(vec![3.0, 1.0], Relation::Ge, 6.0).unwrap();
        lp.add_constraint(vec![1.0, -1.0], Relation::Eq, 0.0).unwrap();
        let s = optimal(&lp);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -2 means x >= 2
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add_constraint(vec![-1.0], Relation::Le, -2.0).unwrap();
        let s = optimal(&lp);
        assert!((s.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0).unwrap();
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::minimize(vec![-1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example: cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::minimize(vec![-0.75, 20.0, -0.5, 6.0]);
        lp.add_constraint(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0).unwrap();
        let s = optimal(&lp);
        assert!((s.objective + 1.25).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 2.0).unwrap();
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 4.0).unwrap();
        let s = optimal(&lp);
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn many_pivots_stay_accurate() {
        // min sum x subject to x_i + x_{i+1} >= 1 around an odd cycle: optimum n/2
        let n = 61;
        let mut lp = LinearProgram::minimize(vec![1.0; n]);
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row[(i + 1) % n] = 1.0;
            lp.add_constraint(row, Relation::Ge, 1.0).unwrap();
        }
        let s = optimal(&lp);
        assert!((s.objective - n as f64 / 2.0).abs() < 1e-9);
        assert!(s.pivots > REFACTOR_INTERVAL);
    }

    #[test]
    fn bad_input() {
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        assert!(lp.add_constraint(vec![1.0], Relation::Le, 1.0).is_err());
        assert!(lp.add_constraint(vec![1.0, f64::NAN], Relation::Le, 1.0).is_err());
    }
}
