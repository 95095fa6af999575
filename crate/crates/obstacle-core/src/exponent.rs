//! Variable-exponent function-space numerics: exponent validation and algebra,
//! modular and Luxemburg norm, and Marcinkiewicz bound estimation.

use alloc::vec::Vec;

use crate::grid::{check_same_grid, Grid, RegionMask, ScalarField};
use crate::math;
use crate::{Error, Result};

/// Cap on the node-pair set scanned by the discrete log-Holder constant in 2D
/// (the full pair set is O(n^4)).
const LOG_HOLDER_PAIR_BUDGET: usize = 1_000_000;

/// Nodal samples of a positive exponent field.
///
/// Construction requires 0 < p everywhere (Marcinkiewicz exponents such as
/// q1 can drop to 1 and below); the growth-theory bound 1 < ess inf p is
/// demanded where the operator theory needs it, at flux construction, and is
/// reported by [`ExponentField::validate`]. `ambient_dim` is the dimension N
/// entering the exponent algebra (the grid dimension); the regime bound
/// ess sup p < N is likewise reported, not enforced, so out-of-regime
/// instances can still be solved and audited.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    grid: Grid,
    p: Vec<f64>,
    ambient_dim: usize,
    p_min: f64,
    p_max: f64,
}

/// Validation summary for an exponent field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    /// Discrete sup of |p(x)-p(y)| * (-ln|x-y|) over node pairs with |x-y| < 1/2.
    pub log_holder_constant: f64,
    /// 1 < ess inf p and ess sup p < N.
    pub bounds_ok: bool,
    /// min over nodes of N p'(x)/(N - p(x)) exceeds sup p' (strictly, with a
    /// 1e-12 margin); the regime in which the operator audits below apply.
    pub conjugate_gap_ok: bool,
    pub p_min: f64,
    pub p_max: f64,
}

/// Pointwise exponent algebra derived from p: Sobolev conjugate, Holder
/// conjugate, and the regularity exponents q0 = p*/sup p', q1 = q0 p/(q0+1).
#[derive(Debug, Clone)]
pub struct DerivedExponents {
    pub p_star: ExponentField,
    pub p_conj: ExponentField,
    pub q0: ExponentField,
    pub q1: ExponentField,
}

impl ExponentField {
    pub fn new(grid: &Grid, p: Vec<f64>) -> Result<Self> {
        if p.len() != grid.node_count() {
            return Err(Error::LengthMismatch { expected: grid.node_count(), got: p.len() });
        }
        let mut p_min = f64::INFINITY;
        let mut p_max = f64::NEG_INFINITY;
        for (index, &v) in p.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if v <= 0.0 {
                return Err(Error::ExponentOutOfRange { value: v, index });
            }
            p_min = p_min.min(v);
            p_max = p_max.max(v);
        }
        Ok(Self { grid: grid.clone(), p, ambient_dim: grid.dim(), p_min, p_max })
    }

    pub fn constant(grid: &Grid, p: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![p; grid.node_count()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let p = (0..grid.node_count())
            .map(|idx| {
                let [x, y] = grid.node_coords(idx);
                f(x, y)
            })
            .collect();
        Self::new(grid, p)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Pointwise rescaling, e.g. 0.95 q0.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(&self.grid, self.p.iter().map(|&v| v * factor).collect())
    }

    /// Discrete log-Holder constant, bound flags, and the strict-regime flag.
    pub fn validate(&self) -> ExponentReport {
        let n = self.ambient_dim as f64;
        let bounds_ok = self.p_min > 1.0 && self.p_max < n;
        let conjugate_gap_ok = if self.p_max < n {
            let sup_conj = self.p_min / (self.p_min - 1.0);
            let mut min_lhs = f64::INFINITY;
            for &p in &self.p {
                let conj = p / (p - 1.0);
                min_lhs = min_lhs.min(n * conj / (n - p));
            }
            min_lhs > sup_conj + 1e-12
        } else {
            false
        };
        ExponentReport {
            log_holder_constant: self.log_holder_constant(),
            bounds_ok,
            conjugate_gap_ok,
            p_min: self.p_min,
            p_max: self.p_max,
        }
    }

    fn log_holder_constant(&self) -> f64 {
        let count = self.grid.node_count();
        let total_pairs = count * (count - 1) / 2;
        // All pairs in 1D; a deterministic strided subsample within the pair
        // budget in 2D.
        let stride = if self.grid.dim() == 1 {
            1
        } else {
            (total_pairs + LOG_HOLDER_PAIR_BUDGET - 1) / LOG_HOLDER_PAIR_BUDGET
        }
        .max(1);
        let mut sup = 0.0f64;
        let mut k = 0usize;
        for a in 0..count {
            let pa = self.p[a];
            let [xa, ya] = self.grid.node_coords(a);
            let mut b = a + 1 + (k % stride);
            while b < count {
                let [xb, yb] = self.grid.node_coords(b);
                let dx = xa - xb;
                let dy = ya - yb;
                let dist = math::sqrt(dx * dx + dy * dy);
                if dist > 0.0 && dist < 0.5 {
                    let modulus = (pa - self.p[b]).abs() * (-math::ln(dist));
                    sup = sup.max(modulus);
                }
                b += stride;
                k += 1;
            }
        }
        sup
    }

    /// Pointwise derived exponents; requires ess sup p < N.
    pub fn derived(&self) -> Result<DerivedExponents> {
        let n = self.ambient_dim as f64;
        if self.p_max >= n {
            return Err(Error::ExponentAboveDimension {
                p_max: self.p_max,
                ambient: self.ambient_dim,
            });
        }
        let sup_conj = self.p_min / (self.p_min - 1.0);
        let p_star: Vec<f64> = self.p.iter().map(|&p| n * p / (n - p)).collect();
        let p_conj: Vec<f64> = self.p.iter().map(|&p| p / (p - 1.0)).collect();
        let q0: Vec<f64> = p_star.iter().map(|&s| s / sup_conj).collect();
        let q1: Vec<f64> = q0
            .iter()
            .zip(&self.p)
            .map(|(&q0, &p)| q0 / (q0 + 1.0) * p)
            .collect();
        Ok(DerivedExponents {
            p_star: ExponentField::new(&self.grid, p_star)?,
            p_conj: ExponentField::new(&self.grid, p_conj)?,
            q0: ExponentField::new(&self.grid, q0)?,
            q1: ExponentField::new(&self.grid, q1)?,
        })
    }

    /// Modular rho(v) = integral of |v(x)|^p(x).
    pub fn modular(&self, v: &ScalarField) -> f64 {
        assert_eq!(&self.grid, v.grid(), "field and exponent on different grids");
        let mut acc = 0.0;
        for (idx, (&val, &p)) in v.values().iter().zip(&self.p).enumerate() {
            let a = val.abs();
            if a > 0.0 {
                acc += math::pow(a, p) * self.grid.quad_weight(idx);
            }
        }
        acc
    }

    /// Luxemburg norm: the smallest lambda with rho(v/lambda) <= 1, located by
    /// geometric bracketing plus bisection to relative width `tol`.
    pub fn luxemburg_norm(&self, v: &ScalarField, tol: f64) -> f64 {
        assert!(tol > 0.0, "tolerance must be positive");
        if v.max_abs() == 0.0 {
            return 0.0;
        }
        let rho = |lambda: f64| {
            let mut acc = 0.0;
            for (idx, (&val, &p)) in v.values().iter().zip(&self.p).enumerate() {
                let a = val.abs() / lambda;
                if a > 0.0 {
                    acc += math::pow(a, p) * self.grid.quad_weight(idx);
                }
            }
            acc
        };
        let (mut lo, mut hi);
        if rho(1.0) > 1.0 {
            hi = 2.0;
            lo = 1.0;
            while rho(hi) > 1.0 {
                lo = hi;
                hi *= 2.0;
            }
        } else {
            lo = 0.5;
            hi = 1.0;
            while rho(lo) <= 1.0 {
                hi = lo;
                lo *= 0.5;
                if lo < f64::MIN_POSITIVE {
                    return 0.0;
                }
            }
        }
        while hi - lo > tol * 0.5 * (hi + lo) {
            let mid = 0.5 * (lo + hi);
            if rho(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// 64 logarithmically spaced truncation levels spanning [1e-3 m, m]; empty for m <= 0.
pub fn default_t_levels(max_abs: f64) -> Vec<f64> {
    t_levels(max_abs, 64)
}

pub fn t_levels(max_abs: f64, count: usize) -> Vec<f64> {
    if !(max_abs > 0.0) || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return alloc::vec![max_abs];
    }
    let span = math::ln(1e-3);
    (0..count)
        .map(|k| max_abs * math::exp(span * (1.0 - k as f64 / (count - 1) as f64)))
        .collect()
}

/// M = max over the levels t of the integral of t^q(x) over {|u| > t}.
pub fn marcinkiewicz_bound(u: &ScalarField, q: &ExponentField, t_levels: &[f64]) -> Result<f64> {
    check_same_grid(u.grid(), q.grid())?;
    let mut prev = 0.0;
    for &t in t_levels {
        assert!(t > 0.0 && t.is_finite() && t > prev, "levels must be increasing and positive");
        prev = t;
    }
    let grid = u.grid();
    let mut bound = 0.0f64;
    for &t in t_levels {
        let mut acc = 0.0;
        for (idx, (&val, &qv)) in u.values().iter().zip(q.values()).enumerate() {
            if val.abs() > t {
                acc += math::pow(t, qv) * grid.quad_weight(idx);
            }
        }
        bound = bound.max(acc);
    }
    Ok(bound)
}

/// Level-set mask {|u| > t}.
pub fn level_set(u: &ScalarField, t: f64) -> RegionMask {
    RegionMask::from_fn(u.grid(), |idx| u.values()[idx].abs() > t)
}
