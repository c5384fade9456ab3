//! Finite maps from point ids into `l_p^d`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::lp::{lp_dist_unchecked, PExponent};

/// Coordinates of `n` points in `l_p^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    n: usize,
    dim: usize,
    p: PExponent,
    coords: Vec<f64>,
}

impl Embedding {
    pub fn new(n: usize, dim: usize, p: PExponent, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if coords.len() != n * dim {
            return Err(Error::DimensionMismatch {
                expected: n * dim,
                found: coords.len(),
            });
        }
        if let Some(index) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: coords[index],
            });
        }
        Ok(Embedding { n, dim, p, coords })
    }

    pub fn from_points(points: &[Vec<f64>], p: PExponent) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for pt in points {
            if pt.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: pt.len(),
                });
            }
            coords.extend_from_slice(pt);
        }
        Embedding::new(points.len(), dim, p, coords)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn with_p(mut self, p: PExponent) -> Self {
        self.p = p;
        self
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `||f(i) - f(j)||_p`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        lp_dist_unchecked(self.point(i), self.point(j), self.p.get())
    }

    /// Multiplies every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Embedding {
        Embedding {
            coords: self.coords.iter().map(|x| c * x).collect(),
            ..self.clone()
        }
    }

    /// `vertex,c1,...,cd` rows, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex");
        for c in 1..=self.dim {
            let _ = write!(out, ",c{c}");
        }
        out.push('\n');
        for i in 0..self.n {
            out.push_str(&i.to_string());
            for x in self.point(i) {
                out.push(',');
                out.push_str(&sig17(*x));
            }
            out.push('\n');
        }
        out
    }
}
