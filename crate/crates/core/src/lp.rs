//! `l_p` norm kernels for `1 <= p <= 2` and the two quadratic inequalities
//! behind the diamond lower bound, written as gap functions (right side minus
//! left side) so that a negative value is a counterexample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the gap contracts.
pub const GAP_TOL: f64 = 1e-9;

/// An exponent `p` in `[1, 2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PExponent(f64);

impl PExponent {
    pub const ONE: PExponent = PExponent(1.0);
    pub const TWO: PExponent = PExponent(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if (1.0..=2.0).contains(&p) {
            Ok(PExponent(p))
        } else {
            Err(Error::ExponentOutOfRange(p))
        }
    }

    /// Only `p > 1` yields a nontrivial distortion certificate.
    pub fn certifying(p: f64) -> Result<Self> {
        let p = Self::new(p)?;
        if p.0 > 1.0 {
            Ok(p)
        } else {
            Err(Error::InvalidArgument(
                "certificates require p > 1".to_string(),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        PExponent::new(p)
    }
}

impl From<PExponent> for f64 {
    fn from(p: PExponent) -> f64 {
        p.0
    }
}

/// `|x|^p` as `exp(p ln|x|)`, zero at `x = 0`.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (p * x.abs().ln()).exp()
    }
}

/// `sum_i |v_i|^p` without the outer root. Assumes finite entries.
#[inline]
pub fn lp_sum(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    v.map(|x| abs_pow(x, p)).sum()
}

/// `||v||_p` for finite `v`; no validation.
///
/// Entries are divided by the largest magnitude first so that `|v_i|^p`
/// cannot overflow or underflow.
#[inline]
pub fn lp_norm_unchecked(v: &[f64], p: f64) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum = lp_sum(v.iter().map(|x| x / scale), p);
    scale * (sum.ln() / p).exp()
}

/// `||x - y||_p` for equal-length finite slices; no validation.
#[inline]
pub fn lp_dist_unchecked(x: &[f64], y: &[f64], p: f64) -> f64 {
    let scale = x
        .iter()
        .zip(y)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum = lp_sum(x.iter().zip(y).map(|(a, b)| (a - b) / scale), p);
    scale * (sum.ln() / p).exp()
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

fn check_same_dim(first: &[f64], rest: &[&[f64]]) -> Result<()> {
    check_finite(first)?;
    for v in rest {
        if v.len() != first.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: v.len(),
            });
        }
        check_finite(v)?;
    }
    Ok(())
}

/// `(sum_i |v_i|^p)^{1/p}`.
pub fn lp_norm(v: &[f64], p: PExponent) -> Result<f64> {
    check_finite(v)?;
    Ok(lp_norm_unchecked(v, p.get()))
}

fn dist_sq(x: &[f64], y: &[f64], p: f64) -> f64 {
    let d = lp_dist_unchecked(x, y, p);
    d * d
}

/// A gap value together with the scale its tolerance is measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub value: f64,
    pub scale: f64,
}

impl Gap {
    /// `value / scale`, or 0 when both sides vanish.
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.value / self.scale
        }
    }

    pub fn holds(&self, tol_rel: f64) -> bool {
        self.value >= -tol_rel * self.scale
    }
}

/// `2(||a||^2 + ||b||^2) - ||a+b||^2 - (p-1)||a-b||^2`, scale `2(||a||^2 + ||b||^2)`.
pub fn smoothness_gap(a: &[f64], b: &[f64], p: PExponent) -> Result<Gap> {
    check_same_dim(a, &[b])?;
    let p = p.get();
    let na = lp_norm_unchecked(a, p);
    let nb = lp_norm_unchecked(b, p);
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let sum_sq = lp_norm_unchecked(&sum, p).powi(2);
    let diff_sq = dist_sq(a, b, p);
    let scale = 2.0 * (na * na + nb * nb);
    Ok(Gap {
        value: scale - sum_sq - (p - 1.0) * diff_sq,
        scale,
    })
}

/// The quadrilateral inequality with sides `x-y, y-w, w-z, z-x` and
/// diagonals `y-z`, `x-w`:
///
/// `(||x-y||^2 + ||y-w||^2 + ||w-z||^2 + ||z-x||^2) - (||y-z||^2 + (p-1)||x-w||^2)`,
///
/// scale is the side sum.
pub fn diamond_gap(x: &[f64], y: &[f64], z: &[f64], w: &[f64], p: PExponent) -> Result<Gap> {
    check_same_dim(x, &[y, z, w])?;
    let p = p.get();
    let sides = dist_sq(x, y, p) + dist_sq(y, w, p) + dist_sq(w, z, p) + dist_sq(z, x, p);
    let diagonals = dist_sq(y, z, p) + (p - 1.0) * dist_sq(x, w, p);
    Ok(Gap {
        value: sides - diagonals,
        scale: sides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64) -> PExponent {
        PExponent::new(x).unwrap()
    }

    #[test]
    fn exponent_range() {
        assert!(PExponent::new(0.99).is_err());
        assert!(PExponent::new(2.01).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        assert!(PExponent::new(1.0).is_ok());
        assert!(PExponent::certifying(1.0).is_err());
        assert!(PExponent::certifying(1.01).is_ok());
        assert!(serde_json::from_str::<PExponent>("3.0").is_err());
        assert_eq!(serde_json::from_str::<PExponent>("1.5").unwrap(), p(1.5));
    }

    #[test]
    fn norm_examples() {
        assert!((lp_norm(&[3.0, 4.0], p(2.0)).unwrap() - 5.0).abs() < 1e-15);
        let expected = 2f64.powf(2.0 / 3.0);
        assert!((lp_norm(&[1.0, 1.0], p(1.5)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.5874011).abs() < 1e-7);
        for q in [1.0, 1.3, 2.0] {
            assert_eq!(lp_norm(&[0.0, 0.0, 0.0], p(q)).unwrap(), 0.0);
        }
        assert!(matches!(
            lp_norm(&[1.0, f64::INFINITY], p(2.0)),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn extreme_magnitudes() {
        let big = lp_norm(&[1e300, 1e300], p(2.0)).unwrap();
        assert!((big / (2f64.sqrt() * 1e300) - 1.0).abs() < 1e-14);
        let tiny = lp_norm(&[1e-300, 0.0], p(1.1)).unwrap();
        assert!((tiny / 1e-300 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn smoothness_examples() {
        let g = smoothness_gap(&[1.0, 0.0], &[1.0, 0.0], p(1.5)).unwrap();
        assert!(g.value.abs() <= 1e-15);

        let g = smoothness_gap(&[0.3, -1.2, 4.0], &[2.0, 0.1, -0.7], p(2.0)).unwrap();
        assert!(g.value.abs() <= 1e-12 * g.scale);

        // 4 - 1.5 * 2^{4/3}; the reference digits come from a 50-digit evaluation.
        let g = smoothness_gap(&[1.0, 0.0], &[0.0, 1.0], p(1.5)).unwrap();
        let reference = 0.220_236_850_315_380_5;
        assert!((g.value - reference).abs() < 1e-14, "{}", g.value);
        assert!((g.value - (4.0 - 1.5 * 2f64.powf(4.0 / 3.0))).abs() < 1e-14);

        assert!(matches!(
            smoothness_gap(&[1.0], &[1.0, 2.0], p(1.5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diamond_examples() {
        let x = [0.7, -0.2];
        let g = diamond_gap(&x, &x, &x, &x, p(1.3)).unwrap();
        assert_eq!(g.value, 0.0);

        // unit square: x, y, w, z in cyclic order
        let g = diamond_gap(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], p(2.0)).unwrap();
        assert!(g.value.abs() < 1e-15);
        assert_eq!(g.scale, 4.0);

        assert!(diamond_gap(&[0.0], &[0.0], &[0.0, 1.0], &[0.0], p(2.0)).is_err());
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, dim)
    }

    proptest! {
        #[test]
        fn homogeneity(v in vec_strategy(6), c in -50.0f64..50.0, q in 1.0f64..=2.0) {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let lhs = lp_norm(&scaled, p(q)).unwrap();
            let rhs = c.abs() * lp_norm(&v, p(q)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn norms_decrease_in_p(v in vec_strategy(5), a in 1.0f64..=2.0, b in 1.0f64..=2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let n_lo = lp_norm(&v, p(lo)).unwrap();
            let n_hi = lp_norm(&v, p(hi)).unwrap();
            prop_assert!(n_lo >= n_hi * (1.0 - 1e-12));
        }

        #[test]
        fn gaps_translation_invariant(
            x in vec_strategy(4), y in vec_strategy(4), z in vec_strategy(4),
            w in vec_strategy(4), t in vec_strategy(4), q in 1.0f64..=2.0,
        ) {
            let shift = |v: &Vec<f64>| -> Vec<f64> { v.iter().zip(&t).map(|(a, b)| a + b).collect() };
            let g0 = diamond_gap(&x, &y, &z, &w, p(q)).unwrap();
            let g1 = diamond_gap(&shift(&x), &shift(&y), &shift(&z), &shift(&w), p(q)).unwrap();
            prop_assert!((g0.value - g1.value).abs() <= 1e-9 * g0.scale.max(g1.scale));
        }

        #[test]
        fn smoothness_holds(a in vec_strategy(8), b in vec_strategy(8), q in 1.0f64..=2.0) {
            let g = smoothness_gap(&a, &b, p(q)).unwrap();
            prop_assert!(g.holds(GAP_TOL), "{g:?}");
        }

        #[test]
        fn diamond_holds(
            x in vec_strategy(3), y in vec_strategy(3), z in vec_strategy(3),
            w in vec_strategy(3), q in 1.0f64..=2.0,
        ) {
            let g = diamond_gap(&x, &y, &z, &w, p(q)).unwrap();
            prop_assert!(g.holds(GAP_TOL), "{g:?}");
        }
    }
}
