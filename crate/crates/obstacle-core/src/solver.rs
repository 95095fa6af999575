//! Projected nonlinear Gauss-Seidel for the discrete obstacle problem
//!
//! ```text
//! u >= psi,   (A u - f)_i >= 0,   min(u - psi, A u - f)_i = 0
//! ```
//!
//! Each interior node is visited in lexicographic then reverse order; the
//! scalar residual equation (A u - f)_i = 0 is solved in the node value with
//! neighbors frozen (bracketed secant with bisection safeguards, Illinois
//! update), and the value is projected onto u_i >= psi_i. Convergence is
//! measured by the complementarity residual max |min(u - psi, A u - f)|, not
//! by iterate displacement. Runs are deterministic: identical inputs give
//! bit-identical reports.

use alloc::vec::Vec;

use crate::flux::{flux_scalar, FluxSpec};
use crate::grid::{check_same_grid, Grid, ScalarField};
use crate::math;
use crate::{Error, Result};

/// One instance of the discrete obstacle problem.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    spec: FluxSpec,
    f: ScalarField,
    psi: ScalarField,
}

impl ObstacleProblem {
    /// Validates that all pieces share a grid and that the obstacle is
    /// admissible (psi <= 0 on the boundary, so the constraint set contains
    /// functions vanishing there).
    pub fn new(spec: FluxSpec, f: ScalarField, psi: ScalarField) -> Result<Self> {
        check_same_grid(spec.grid(), f.grid())?;
        check_same_grid(spec.grid(), psi.grid())?;
        let grid = spec.grid();
        for idx in 0..grid.node_count() {
            if grid.is_boundary(idx) && psi.values()[idx] > 0.0 {
                return Err(Error::ObstaclePositiveOnBoundary {
                    node: idx,
                    value: psi.values()[idx],
                });
            }
        }
        Ok(Self { spec, f, psi })
    }

    pub fn spec(&self) -> &FluxSpec {
        &self.spec
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    pub fn grid(&self) -> &Grid {
        self.spec.grid()
    }

    /// Same problem with a different right-hand side.
    pub fn with_f(&self, f: ScalarField) -> Result<Self> {
        Self::new(self.spec.clone(), f, self.psi.clone())
    }
}

/// Solver controls. `tol = None` uses the default 1e-10 (1 + max |f|).
#[derive(Debug, Clone, Copy)]
pub struct SolveParams {
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self { tol: None, max_iter: 1_000_000 }
    }
}

impl SolveParams {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol: Some(tol), max_iter: 1_000_000 }
    }
}

/// Converged iterate and diagnostics of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: ScalarField,
    /// Full symmetric sweeps performed.
    pub iterations: usize,
    pub complementarity_residual: f64,
    pub au: ScalarField,
    pub converged: bool,
    /// Seconds; 0.0 when built without the `std` feature.
    pub wall_time_secs: f64,
    /// The tolerance the run was measured against.
    pub tol: f64,
}

pub fn default_tol(f: &ScalarField) -> f64 {
    1e-10 * (1.0 + f.max_abs())
}

struct Engine<'a> {
    nx: usize,
    dim: usize,
    hx: f64,
    hy: f64,
    delta: f64,
    fpx: Vec<f64>,
    fpy: Vec<f64>,
    f: &'a [f64],
    psi: &'a [f64],
    interior: Vec<usize>,
    bracket_pad: f64,
}

impl<'a> Engine<'a> {
    fn new(prob: &'a ObstacleProblem) -> Self {
        let grid = prob.grid();
        let h_min = if grid.dim() == 2 { grid.h(0).min(grid.h(1)) } else { grid.h(0) };
        Self {
            nx: grid.n(0),
            dim: grid.dim(),
            hx: grid.h(0),
            hy: if grid.dim() == 2 { grid.h(1) } else { 1.0 },
            delta: prob.spec.delta,
            fpx: prob.spec.face_exponents(0),
            fpy: prob.spec.face_exponents(1),
            f: prob.f.values(),
            psi: prob.psi.values(),
            interior: grid.interior_nodes(),
            bracket_pad: prob.f.max_abs() * h_min * h_min + 1.0,
        }
    }

    /// (A u - f) at `idx` with the node value replaced by `s`, neighbors frozen.
    #[inline]
    fn residual(&self, u: &[f64], idx: usize, s: f64) -> f64 {
        let i = idx % self.nx;
        let j = idx / self.nx;
        let gxm = (s - u[idx - 1]) / self.hx;
        let gxp = (u[idx + 1] - s) / self.hx;
        let row = j * (self.nx - 1) + i;
        let mut r = (flux_scalar(self.fpx[row - 1], self.delta, gxm)
            - flux_scalar(self.fpx[row], self.delta, gxp))
            / self.hx;
        if self.dim == 2 {
            let gym = (s - u[idx - self.nx]) / self.hy;
            let gyp = (u[idx + self.nx] - s) / self.hy;
            let col = j * self.nx + i;
            r += (flux_scalar(self.fpy[col - self.nx], self.delta, gym)
                - flux_scalar(self.fpy[col], self.delta, gyp))
                / self.hy;
        }
        r - self.f[idx]
    }

    /// Solve the monotone scalar equation r(s) = 0 and project onto s >= psi.
    /// Returns NaN when a residual evaluation is non-finite.
    fn update_node(&self, u: &[f64], idx: usize, inner_tol: f64) -> f64 {
        let s0 = u[idx];
        let psi = self.psi[idx];
        let r0 = self.residual(u, idx, s0);
        if !r0.is_finite() {
            return f64::NAN;
        }
        if r0.abs() <= inner_tol {
            return s0.max(psi);
        }
        let (mut lo, mut hi, mut rlo, mut rhi);
        let mut step = s0.abs() + self.bracket_pad;
        if r0 > 0.0 {
            // Root below s0; descend geometrically, clipped at the obstacle.
            hi = s0;
            rhi = r0;
            loop {
                let cand = (s0 - step).max(psi);
                let rc = self.residual(u, idx, cand);
                if !rc.is_finite() {
                    return f64::NAN;
                }
                if rc <= 0.0 {
                    lo = cand;
                    rlo = rc;
                    break;
                }
                hi = cand;
                rhi = rc;
                if cand <= psi {
                    // r(psi) > 0: the unconstrained root sits below the obstacle.
                    return psi;
                }
                step *= 2.0;
            }
        } else {
            lo = s0;
            rlo = r0;
            loop {
                let cand = s0 + step;
                let rc = self.residual(u, idx, cand);
                if !rc.is_finite() {
                    return f64::NAN;
                }
                if rc >= 0.0 {
                    hi = cand;
                    rhi = rc;
                    break;
                }
                lo = cand;
                rlo = rc;
                step *= 2.0;
                if step > 1e300 {
                    return f64::NAN;
                }
            }
        }
        // Illinois secant with bisection fallback on [lo, hi], r(lo) <= 0 <= r(hi).
        let mut side = 0i8;
        for _ in 0..200 {
            if rlo == 0.0 {
                return lo.max(psi);
            }
            if rhi == 0.0 {
                return hi.max(psi);
            }
            let denom = rhi - rlo;
            let mut s = if denom.is_finite() && denom > 0.0 {
                (lo * rhi - hi * rlo) / denom
            } else {
                0.5 * (lo + hi)
            };
            if !(s > lo && s < hi) {
                s = 0.5 * (lo + hi);
            }
            let rs = self.residual(u, idx, s);
            if !rs.is_finite() {
                return f64::NAN;
            }
            if rs.abs() <= inner_tol {
                return s.max(psi);
            }
            if rs > 0.0 {
                hi = s;
                rhi = rs;
                if side == 1 {
                    rlo *= 0.5;
                }
                side = 1;
            } else {
                lo = s;
                rlo = rs;
                if side == -1 {
                    rhi *= 0.5;
                }
                side = -1;
            }
            if hi - lo <= 1e-15 * (1.0 + lo.abs() + hi.abs()) {
                break;
            }
        }
        (0.5 * (lo + hi)).max(psi)
    }

    /// max over interior nodes of |min(u - psi, A u - f)|; NaN propagates.
    fn complementarity(&self, u: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &idx in &self.interior {
            let r = self.residual(u, idx, u[idx]);
            let c = (u[idx] - self.psi[idx]).min(r);
            if !c.is_finite() {
                return f64::NAN;
            }
            worst = worst.max(c.abs());
        }
        worst
    }
}

#[cfg(feature = "std")]
type Clock = Option<std::time::Instant>;
#[cfg(not(feature = "std"))]
type Clock = ();

fn clock_start() -> Clock {
    #[cfg(feature = "std")]
    {
        Some(std::time::Instant::now())
    }
}

fn clock_secs(_start: &Clock) -> f64 {
    #[cfg(feature = "std")]
    let secs = _start.map(|s| s.elapsed().as_secs_f64()).unwrap_or(0.0);
    #[cfg(not(feature = "std"))]
    let secs = 0.0;
    secs
}

/// Solve the variational inequality from the default start max(psi, 0).
pub fn solve_vi(prob: &ObstacleProblem, params: SolveParams) -> Result<SolveReport> {
    let grid = prob.grid();
    let psi = prob.psi.values();
    let init: Vec<f64> = (0..grid.node_count())
        .map(|idx| if grid.is_boundary(idx) { 0.0 } else { psi[idx].max(0.0) })
        .collect();
    solve_from(prob, init, params)
}

/// Solve from a caller-supplied start; the iterate is clipped into the
/// constraint set and zeroed on the boundary first.
pub fn solve_vi_with_init(
    prob: &ObstacleProblem,
    init: &ScalarField,
    params: SolveParams,
) -> Result<SolveReport> {
    check_same_grid(prob.grid(), init.grid())?;
    let grid = prob.grid();
    let psi = prob.psi.values();
    let u0: Vec<f64> = (0..grid.node_count())
        .map(|idx| {
            if grid.is_boundary(idx) {
                0.0
            } else {
                init.values()[idx].max(psi[idx])
            }
        })
        .collect();
    solve_from(prob, u0, params)
}

/// Unconstrained solve of A u = f: the obstacle is placed far below any
/// attainable iterate, so the complementarity residual reduces to
/// max |A u - f|.
pub fn solve_unconstrained(
    spec: &FluxSpec,
    f: &ScalarField,
    params: SolveParams,
) -> Result<SolveReport> {
    let grid = spec.grid().clone();
    let f_inf = f.max_abs();
    let length = if grid.dim() == 2 { grid.extent(0).max(grid.extent(1)) } else { grid.extent(0) };
    let p_min = spec.p.p_min();
    // Crude solution bound from flux balance; capped so exponents near 1
    // cannot push the floor out of range.
    let floor =
        (-1e3 * (1.0 + math::pow(1.0 + f_inf * length, 1.0 / (p_min - 1.0)) * length)).max(-1e12);
    let psi = ScalarField::constant(&grid, floor);
    let prob = ObstacleProblem::new(spec.clone(), f.clone(), psi)?;
    solve_from(&prob, alloc::vec![0.0; grid.node_count()], params)
}

fn solve_from(prob: &ObstacleProblem, mut u: Vec<f64>, params: SolveParams) -> Result<SolveReport> {
    let start = clock_start();
    let tol = params.tol.unwrap_or_else(|| default_tol(&prob.f));
    if !(tol > 0.0) {
        return Err(Error::BadParameter("solver tolerance must be > 0"));
    }
    let engine = Engine::new(prob);
    let mut iterations = 0;
    let mut residual = engine.complementarity(&u);
    let mut converged = residual <= tol;
    while !converged && iterations < params.max_iter {
        // Scalar solves only need accuracy proportional to the current
        // complementarity residual; the floor keeps the fixed point well
        // inside the outer tolerance.
        let inner_tol = (1e-3 * residual).max(0.05 * tol);
        // Far from tolerance the residual shrinks slowly, so sampling it
        // every sweep is wasted work.
        let check_every = if residual > 1e4 * tol {
            8
        } else if residual > 1e2 * tol {
            2
        } else {
            1
        };
        for _ in 0..check_every {
            for forward in [true, false] {
                for k in 0..engine.interior.len() {
                    let idx = if forward {
                        engine.interior[k]
                    } else {
                        engine.interior[engine.interior.len() - 1 - k]
                    };
                    let s = engine.update_node(&u, idx, inner_tol);
                    if !s.is_finite() {
                        return Err(Error::SolverNan { iteration: iterations, node: idx });
                    }
                    u[idx] = s;
                }
            }
            iterations += 1;
            if iterations >= params.max_iter {
                break;
            }
        }
        residual = engine.complementarity(&u);
        if residual.is_nan() {
            return Err(Error::SolverNan { iteration: iterations, node: 0 });
        }
        converged = residual <= tol;
    }
    let grid = prob.grid();
    let u_field = ScalarField::new(grid, u)?;
    let au = prob.spec.apply(&u_field)?.au;
    Ok(SolveReport {
        u: u_field,
        iterations,
        complementarity_residual: residual,
        au,
        converged,
        wall_time_secs: clock_secs(&start),
        tol,
    })
}

/// max over interior nodes of |min(u - psi, A u - f)|.
pub fn complementarity_residual(prob: &ObstacleProblem, u: &ScalarField) -> Result<f64> {
    check_same_grid(prob.grid(), u.grid())?;
    let engine = Engine::new(prob);
    let r = engine.complementarity(u.values());
    if r.is_nan() {
        Err(Error::SolverNan { iteration: 0, node: 0 })
    } else {
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentField;
    use crate::grid::Grid;

    fn problem_1d(n: usize, f: f64, psi: f64) -> ObstacleProblem {
        let g = Grid::new(1, n, 1.0).unwrap();
        let spec = FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        ObstacleProblem::new(
            spec,
            ScalarField::constant(&g, f),
            ScalarField::constant(&g, psi),
        )
        .unwrap()
    }

    #[test]
    fn obstacle_admissibility() {
        let g = Grid::new(1, 5, 1.0).unwrap();
        let spec = FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        let f = ScalarField::constant(&g, 0.0);
        let psi = ScalarField::from_fn(&g, |x, _| if x == 0.0 { 0.5 } else { -1.0 }).unwrap();
        assert!(matches!(
            ObstacleProblem::new(spec, f, psi),
            Err(Error::ObstaclePositiveOnBoundary { node: 0, .. })
        ));
    }

    #[test]
    fn negative_load_sticks_to_zero_obstacle() {
        // f = -1, psi = 0: the unconstrained solution -x(1-x)/2 lies below the
        // obstacle everywhere, so u = 0 with full interior contact.
        let prob = problem_1d(41, -1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.u.max_abs() <= 1e-12);
    }

    #[test]
    fn positive_load_never_touches() {
        // f = 1, psi = 0: u(x) = x(1-x)/2 > 0 inside, no contact.
        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        assert!(rep.converged);
        let g = prob.grid();
        for idx in 0..g.node_count() {
            let x = g.node_coords(idx)[0];
            let exact = 0.5 * x * (1.0 - x);
            assert!(
                (rep.u.values()[idx] - exact).abs() < 1e-9,
                "node {idx}: {} vs {exact}",
                rep.u.values()[idx]
            );
        }
    }

    #[test]
    fn analytic_free_boundary() {
        // f = -8, psi = -0.1: contact on [a, 1-a] with a = sqrt(0.2/8),
        // u quadratic with C^1 matching outside.
        let prob = problem_1d(101, -8.0, -0.1);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        assert!(rep.converged);
        let a = (0.2f64 / 8.0).sqrt();
        let exact = |x: f64| -> f64 {
            let x = x.min(1.0 - x);
            if x <= a {
                4.0 * x * x - 8.0 * a * x
            } else {
                -0.1
            }
        };
        let g = prob.grid();
        let mut err = 0.0f64;
        for idx in 0..g.node_count() {
            let x = g.node_coords(idx)[0];
            err = err.max((rep.u.values()[idx] - exact(x)).abs());
        }
        assert!(err < 1e-3, "sup error {err}");
    }

    #[test]
    fn unconstrained_quadratic_and_zero() {
        let g = Grid::new(1, 41, 1.0).unwrap();
        let spec = FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        let f = ScalarField::constant(&g, 2.0);
        let rep = solve_unconstrained(&spec, &f, SolveParams::default()).unwrap();
        assert!(rep.converged);
        for idx in 0..g.node_count() {
            let x = g.node_coords(idx)[0];
            assert!((rep.u.values()[idx] - x * (1.0 - x)).abs() < 1e-9);
        }
        let zero = ScalarField::constant(&g, 0.0);
        let rep = solve_unconstrained(&spec, &zero, SolveParams::default()).unwrap();
        assert!(rep.u.max_abs() <= 1e-12);
    }

    #[test]
    fn complementarity_residual_cases() {
        // u = psi with A psi - f >= 0 everywhere: residual 0.
        let prob = problem_1d(21, -8.0, -0.1);
        let psi = prob.psi().clone();
        assert!(complementarity_residual(&prob, &psi).unwrap().abs() < 1e-12);

        // u dipping 0.3 below the obstacle at one node: residual >= 0.3.
        let g = prob.grid().clone();
        let mut vals = psi.values().to_vec();
        vals[10] -= 0.3;
        let bad = ScalarField::new(&g, vals).unwrap();
        assert!(complementarity_residual(&prob, &bad).unwrap() >= 0.3);
    }

    #[test]
    fn iterates_stay_in_constraint_set() {
        let prob = problem_1d(41, -8.0, -0.1);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let worst = rep
            .u
            .values()
            .iter()
            .zip(prob.psi().values())
            .map(|(u, p)| u - p)
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= 0.0, "projection keeps u >= psi exactly, got {worst}");
        for idx in 0..prob.grid().node_count() {
            if prob.grid().is_boundary(idx) {
                assert_eq!(rep.u.values()[idx], 0.0);
            }
        }
    }

    #[test]
    fn deterministic_reports() {
        let prob = problem_1d(31, -8.0, -0.1);
        let a = solve_vi(&prob, SolveParams::default()).unwrap();
        let b = solve_vi(&prob, SolveParams::default()).unwrap();
        assert_eq!(a.u.values(), b.u.values());
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.complementarity_residual, b.complementarity_residual);
    }

    #[test]
    fn comparison_in_f() {
        // f1 <= f2 implies u1 <= u2 (T-monotonicity of the discrete operator).
        let prob1 = problem_1d(41, -3.0, -0.05);
        let prob2 = prob1.with_f(ScalarField::constant(prob1.grid(), -2.0)).unwrap();
        let u1 = solve_vi(&prob1, SolveParams::default()).unwrap().u;
        let u2 = solve_vi(&prob2, SolveParams::default()).unwrap().u;
        for (a, b) in u1.values().iter().zip(u2.values()) {
            assert!(a <= &(b + 1e-8));
        }
    }

    #[test]
    fn comparison_in_psi() {
        let prob1 = problem_1d(41, -8.0, -0.2);
        let prob2 = ObstacleProblem::new(
            prob1.spec().clone(),
            prob1.f().clone(),
            ScalarField::constant(prob1.grid(), -0.1),
        )
        .unwrap();
        let u1 = solve_vi(&prob1, SolveParams::default()).unwrap().u;
        let u2 = solve_vi(&prob2, SolveParams::default()).unwrap().u;
        for (a, b) in u1.values().iter().zip(u2.values()) {
            assert!(a <= &(b + 1e-8));
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams { tol: Some(1e-15), max_iter: 2 }).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn variable_exponent_2d_smoke() {
        let g = Grid::new(2, 17, 1.0).unwrap();
        let p = ExponentField::from_fn(&g, |x, _| 1.5 + 0.4 * x).unwrap();
        let spec = FluxSpec::p_laplacian(p, 1e-8).unwrap();
        let f = ScalarField::from_fn(&g, |x, _| if x < 0.5 { -6.0 } else { 2.0 }).unwrap();
        let psi = ScalarField::from_fn(&g, |x, y| {
            0.05 - 0.4 * ((x - 0.5) * (x - 0.5) + (y - 0.4) * (y - 0.4))
        })
        .unwrap();
        let prob = ObstacleProblem::new(spec, f, psi).unwrap();
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        assert!(rep.converged, "residual {}", rep.complementarity_residual);
        assert!(rep.complementarity_residual <= rep.tol);
    }
}
