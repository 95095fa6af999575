//! Truncation operators, entropy-inequality certificates, the bounded-data
//! approximation chain, and truncation-energy diagnostics.
//!
//! A solve `u` of the obstacle problem is certified against the truncated
//! inequality
//!
//! ```text
//! sum_faces a(x, grad u) . grad T_t(phi - u) w_f  >=  integral f T_t(phi - u)
//! ```
//!
//! for admissible bounded test functions phi >= psi vanishing on the boundary
//! and all truncation levels t > 0. Unbounded data enters through the
//! truncated sequence f_n = T_n(f), which converges to f in L^1; consecutive
//! solves are compared in measure.

use alloc::vec::Vec;

use crate::exponent::{marcinkiewicz_bound, t_levels};
use crate::grid::{check_same_grid, RegionMask, ScalarField};
use crate::rng::SplitMix64;
use crate::solver::{solve_vi, ObstacleProblem, SolveParams, SolveReport};
use crate::{math, Error, Result};

/// Nodewise truncation T_t(s) = max(-t, min(t, s)).
pub fn truncate(v: &ScalarField, t: f64) -> ScalarField {
    assert!(t > 0.0, "truncation level must be positive");
    v.map(|s| s.clamp(-t, t)).expect("truncation preserves finiteness")
}

/// Bounded approximation of the data: T_n(f).
pub fn approximate_data(f: &ScalarField, n: f64) -> ScalarField {
    truncate(f, n)
}

/// measure of {|u - v| > s}.
pub fn in_measure_distance(u: &ScalarField, v: &ScalarField, s: f64) -> Result<f64> {
    check_same_grid(u.grid(), v.grid())?;
    assert!(s > 0.0, "level must be positive");
    let mask = RegionMask::from_fn(u.grid(), |idx| {
        (u.values()[idx] - v.values()[idx]).abs() > s
    });
    Ok(mask.measure())
}

/// Both sides of the truncated inequality for one (test function, level) pair.
#[derive(Debug, Clone)]
pub struct EntropyCertificate {
    pub test_function: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Margin tolerance used by the verification suites: certificates of a
/// converged solve must satisfy margin >= -tolerance.
pub fn entropy_tolerance(f_l1: f64, t: f64) -> f64 {
    1e-6 * (1.0 + f_l1) * (1.0 + t)
}

/// Evaluate the certificate for every test function and truncation level.
/// Test functions must be admissible: phi >= psi nodewise and phi = 0 on the
/// boundary; the first offender is rejected with its index.
pub fn certify(
    prob: &ObstacleProblem,
    u: &ScalarField,
    test_set: &[ScalarField],
    t_levels: &[f64],
) -> Result<Vec<EntropyCertificate>> {
    let grid = prob.grid();
    check_same_grid(grid, u.grid())?;
    for (index, phi) in test_set.iter().enumerate() {
        check_same_grid(grid, phi.grid())?;
        for idx in 0..grid.node_count() {
            let admissible = if grid.is_boundary(idx) {
                phi.values()[idx] == 0.0
            } else {
                phi.values()[idx] >= prob.psi().values()[idx]
            };
            if !admissible {
                return Err(Error::InadmissibleTestFunction { index, node: idx });
            }
        }
    }
    let flux = prob.spec().apply(u)?.flux;
    let vol = grid.cell_volume();
    let all = RegionMask::all(grid);
    let mut out = Vec::with_capacity(test_set.len() * t_levels.len());
    for (k, phi) in test_set.iter().enumerate() {
        let diff = phi.sub(u)?;
        for &t in t_levels {
            assert!(t > 0.0, "truncation level must be positive");
            let w = truncate(&diff, t);
            let grad_w = w.gradient();
            let mut lhs = 0.0;
            for axis in 0..grid.dim() {
                lhs += flux
                    .component(axis)
                    .iter()
                    .zip(grad_w.component(axis))
                    .map(|(a, g)| a * g * vol)
                    .sum::<f64>();
            }
            let integrand = ScalarField::new(
                grid,
                prob.f()
                    .values()
                    .iter()
                    .zip(w.values())
                    .map(|(fv, wv)| fv * wv)
                    .collect(),
            )?;
            let rhs = integrand.integrate(&all);
            out.push(EntropyCertificate { test_function: k, t, lhs, rhs, margin: lhs - rhs });
        }
    }
    Ok(out)
}

/// Deterministic family of admissible bounded test functions: the obstacle
/// positive part, clipped smooth bumps, and small perturbations of the
/// truncated solve that stay above the obstacle.
pub fn make_test_set(
    prob: &ObstacleProblem,
    u: &ScalarField,
    count: usize,
    seed: u64,
) -> Vec<ScalarField> {
    assert!(count >= 1);
    let grid = prob.grid();
    let psi = prob.psi();
    let mut set = Vec::with_capacity(count);
    let psi_plus = psi.map(|v| v.max(0.0)).expect("positive part stays finite");
    set.push(psi_plus);
    let mut rng = SplitMix64::new(seed);
    let min_extent =
        if grid.dim() == 2 { grid.extent(0).min(grid.extent(1)) } else { grid.extent(0) };
    let height_scale = 1.0 + u.max_abs().max(psi.max_abs());
    let sup_psi_plus = psi.max_value().max(0.0);
    while set.len() < count {
        // Compactly supported smooth bump with interior support.
        let width = rng.range_f64(0.08, 0.2) * min_extent;
        let mut center = [0.0, 0.0];
        for (axis, c) in center.iter_mut().enumerate().take(grid.dim()) {
            *c = rng.range_f64(width + grid.h(axis), grid.extent(axis) - width - grid.h(axis));
        }
        let height = rng.range_f64(0.1, 1.0) * height_scale;
        let bump = ScalarField::from_fn(grid, |x, y| {
            let dx = x - center[0];
            let dy = if grid.dim() == 2 { y - center[1] } else { 0.0 };
            let s2 = (dx * dx + dy * dy) / (width * width);
            if s2 < 1.0 {
                height * math::exp(1.0 - 1.0 / (1.0 - s2))
            } else {
                0.0
            }
        })
        .expect("bump stays finite");
        if set.len() % 2 == 1 {
            // max(psi, bump); equals max(psi, 0) = 0 on the boundary.
            let clipped = ScalarField::new(
                grid,
                psi.values()
                    .iter()
                    .zip(bump.values())
                    .map(|(p, b)| p.max(*b))
                    .collect(),
            )
            .expect("clip stays finite");
            set.push(clipped);
        } else {
            // T_h(u) +/- eps * bump with eps small enough to stay admissible.
            let h_level = (rng.range_f64(0.3, 1.2) * height_scale).max(sup_psi_plus * (1.0 + 1e-12) + 1e-12);
            let tu = truncate(u, h_level);
            let mut eps = f64::INFINITY;
            for idx in 0..grid.node_count() {
                let b = bump.values()[idx];
                if b > 0.0 {
                    eps = eps.min((tu.values()[idx] - psi.values()[idx]) / b);
                }
            }
            let eps = if eps.is_finite() { 0.5 * eps.max(0.0) } else { 0.0 };
            let sign = if rng.next_f64() < 0.5 { 1.0 } else { -1.0 };
            let phi = ScalarField::new(
                grid,
                tu.values()
                    .iter()
                    .zip(bump.values())
                    .map(|(t, b)| t + sign * eps * b)
                    .collect(),
            )
            .expect("perturbation stays finite");
            set.push(phi);
        }
    }
    set
}

/// Energy of the truncated iterate per level: integral over {|u| <= t} of
/// |grad u|^p(x), with face membership requiring both adjacent nodes in the
/// sublevel set (a conservative under-approximation).
pub fn truncation_energy(
    prob: &ObstacleProblem,
    u: &ScalarField,
    t_levels: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let grid = prob.grid();
    check_same_grid(grid, u.grid())?;
    let grad = u.gradient();
    let vol = grid.cell_volume();
    let nx = grid.n(0);
    let mut out = Vec::with_capacity(t_levels.len());
    let mut prev = 0.0;
    for &t in t_levels {
        assert!(t > prev && t > 0.0, "levels must be increasing and positive");
        prev = t;
        let mut acc = 0.0;
        for axis in 0..grid.dim() {
            let fp = prob.spec().face_exponents(axis);
            let (row_len, stride) = if axis == 0 { (nx - 1, 1) } else { (nx, nx) };
            for (face, (&g, &p)) in grad.component(axis).iter().zip(&fp).enumerate() {
                let a = grid.node_index(face % row_len, face / row_len);
                let b = a + stride;
                if u.values()[a].abs() <= t && u.values()[b].abs() <= t && g != 0.0 {
                    acc += math::pow(g.abs(), p) * vol;
                }
            }
        }
        out.push((t, acc));
    }
    Ok(out)
}

/// One level of the bounded-data approximation chain.
#[derive(Debug, Clone)]
pub struct ChainLevel {
    /// Truncation level n of f_n = T_n(f).
    pub n: f64,
    pub f_n: ScalarField,
    pub report: SolveReport,
    /// |f_n - f| in L^1.
    pub l1_data_distance: f64,
    /// measure{|u_prev - u_this| > s}; absent at the first level.
    pub distance_to_prev: Option<f64>,
    /// Modular of u at 0.95 q0; absent outside the exponent regime.
    pub modular_u: Option<f64>,
    /// Modular of |grad u| at 0.95 q1; absent outside the exponent regime.
    pub modular_grad: Option<f64>,
    /// Marcinkiewicz bound of u at 0.95 q0 over the default level sweep.
    pub marcinkiewicz: Option<f64>,
}

/// Solves of the truncated-data problems plus their mutual diagnostics.
#[derive(Debug, Clone)]
pub struct ApproximationChain {
    pub levels: Vec<ChainLevel>,
    /// The in-measure threshold s.
    pub s: f64,
}

/// Run the chain f_n = T_n(f) over increasing levels, solving each obstacle
/// problem and recording in-measure Cauchy distances and the function-space
/// diagnostics (Marcinkiewicz bounds swept over 64 log-spaced levels).
/// Solver non-convergence at any level is an error.
pub fn run_chain(
    prob: &ObstacleProblem,
    levels: &[f64],
    s: f64,
    params: SolveParams,
) -> Result<ApproximationChain> {
    run_chain_with_sweep(prob, levels, s, 64, params)
}

/// As [`run_chain`] with an explicit Marcinkiewicz level-sweep size.
pub fn run_chain_with_sweep(
    prob: &ObstacleProblem,
    levels: &[f64],
    s: f64,
    sweep_count: usize,
    params: SolveParams,
) -> Result<ApproximationChain> {
    assert!(!levels.is_empty());
    let mut prev_level = 0.0;
    for &n in levels {
        assert!(n > prev_level && n > 0.0, "levels must be increasing and positive");
        prev_level = n;
    }
    let derived = prob.spec().p.derived().ok();
    let q0 = derived.as_ref().and_then(|d| d.q0.scale(0.95).ok());
    let q1 = derived.as_ref().and_then(|d| d.q1.scale(0.95).ok());
    let mut out = Vec::with_capacity(levels.len());
    let mut prev_u: Option<ScalarField> = None;
    for (level_index, &n) in levels.iter().enumerate() {
        let f_n = approximate_data(prob.f(), n);
        let l1_data_distance = f_n.l1_distance(prob.f())?;
        let level_prob = prob.with_f(f_n.clone())?;
        let report = solve_vi(&level_prob, params)?;
        if !report.converged {
            return Err(Error::NotConverged {
                level: level_index,
                residual: report.complementarity_residual,
            });
        }
        let distance_to_prev = match &prev_u {
            Some(pu) => Some(in_measure_distance(pu, &report.u, s)?),
            None => None,
        };
        let modular_u = q0.as_ref().map(|q| q.modular(&report.u));
        let grad_mag = report.u.gradient().magnitude_at_nodes();
        let modular_grad = q1.as_ref().map(|q| q.modular(&grad_mag));
        let marcinkiewicz = match &q0 {
            Some(q) => {
                let sweep = t_levels(report.u.max_abs(), sweep_count);
                if sweep.is_empty() {
                    Some(0.0)
                } else {
                    Some(marcinkiewicz_bound(&report.u, q, &sweep)?)
                }
            }
            None => None,
        };
        prev_u = Some(report.u.clone());
        out.push(ChainLevel {
            n,
            f_n,
            report,
            l1_data_distance,
            distance_to_prev,
            modular_u,
            modular_grad,
            marcinkiewicz,
        });
    }
    Ok(ApproximationChain { levels: out, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentField;
    use crate::flux::FluxSpec;
    use crate::grid::Grid;

    #[test]
    fn truncation_definition() {
        let g = Grid::new(1, 5, 1.0).unwrap();
        let v = ScalarField::new(&g, alloc::vec![3.0, -5.0, 0.5, 2.0, -2.0]).unwrap();
        let t2 = truncate(&v, 2.0);
        assert_eq!(t2.values(), &[2.0, -2.0, 0.5, 2.0, -2.0]);
        let t1 = truncate(&v, 1.0);
        assert_eq!(t1.values()[2], 0.5);
        // identity when the field is already within the band
        let small = ScalarField::constant(&g, 0.25);
        assert_eq!(truncate(&small, 1.0).values(), small.values());
    }

    #[test]
    fn approximate_data_properties() {
        let g = Grid::new(1, 33, 1.0).unwrap();
        let f = ScalarField::from_fn(&g, |x, _| 1.0 / (0.01 + (x - 0.4).abs())).unwrap();
        let f10 = approximate_data(&f, 10.0);
        assert!(f10.max_abs() <= 10.0);
        let bounded = ScalarField::constant(&g, 3.0);
        assert_eq!(approximate_data(&bounded, 5.0).values(), bounded.values());
        // L1 distance to f is nonincreasing in n
        let mut prev = f64::INFINITY;
        for n in [1.0, 2.0, 4.0, 8.0, 16.0, 1000.0] {
            let d = approximate_data(&f, n).l1_distance(&f).unwrap();
            assert!(d <= prev + 1e-15);
            prev = d;
        }
    }

    #[test]
    fn in_measure_distance_cases() {
        let g = Grid::new(2, 9, 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |x, y| x * y).unwrap();
        assert_eq!(in_measure_distance(&u, &u, 0.1).unwrap(), 0.0);
        let v = u.map(|a| a + 0.4).unwrap();
        let full = in_measure_distance(&u, &v, 0.2).unwrap();
        assert!((full - 1.0).abs() < 1e-13, "difference 2s everywhere covers the domain");
    }

    fn zero_obstacle_problem(n: usize, f: f64) -> ObstacleProblem {
        let g = Grid::new(1, n, 1.0).unwrap();
        let spec = FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        ObstacleProblem::new(spec, ScalarField::constant(&g, f), ScalarField::constant(&g, 0.0))
            .unwrap()
    }

    #[test]
    fn certificate_with_phi_equal_u_is_zero() {
        let prob = zero_obstacle_problem(33, 1.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let certs = certify(&prob, &rep.u, &[rep.u.clone()], &[0.5, 1.0, 2.0]).unwrap();
        for c in certs {
            assert_eq!(c.lhs, 0.0);
            assert_eq!(c.rhs, 0.0);
        }
    }

    #[test]
    fn certificates_of_converged_solve_are_nonnegative() {
        let prob = zero_obstacle_problem(33, 1.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let psi_plus = prob.psi().map(|v| v.max(0.0)).unwrap();
        let t = rep.u.max_abs() + 1.0;
        let certs = certify(&prob, &rep.u, &[psi_plus], &[t]).unwrap();
        for c in &certs {
            assert!(c.margin >= -1e-8, "margin {}", c.margin);
        }
    }

    #[test]
    fn inadmissible_test_function_is_rejected() {
        let prob = zero_obstacle_problem(17, 1.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let below = ScalarField::constant(prob.grid(), -0.5);
        match certify(&prob, &rep.u, &[below], &[1.0]) {
            Err(Error::InadmissibleTestFunction { index: 0, .. }) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
        // nonzero boundary trace is inadmissible as well
        let shifted = ScalarField::constant(prob.grid(), 0.5);
        assert!(matches!(
            certify(&prob, &rep.u, &[shifted], &[1.0]),
            Err(Error::InadmissibleTestFunction { .. })
        ));
    }

    #[test]
    fn test_set_is_admissible_and_seed_stable() {
        let prob = zero_obstacle_problem(33, -8.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let set = make_test_set(&prob, &rep.u, 7, 99);
        assert_eq!(set.len(), 7);
        // first member is the obstacle positive part
        assert_eq!(set[0].values(), prob.psi().map(|v| v.max(0.0)).unwrap().values());
        for phi in &set {
            for idx in 0..prob.grid().node_count() {
                if prob.grid().is_boundary(idx) {
                    assert_eq!(phi.values()[idx], 0.0);
                } else {
                    assert!(phi.values()[idx] >= prob.psi().values()[idx]);
                }
            }
        }
        let again = make_test_set(&prob, &rep.u, 7, 99);
        for (a, b) in set.iter().zip(&again) {
            assert_eq!(a.values(), b.values());
        }
        let other = make_test_set(&prob, &rep.u, 7, 100);
        assert!(set.iter().zip(&other).any(|(a, b)| a.values() != b.values()));
    }

    #[test]
    fn truncation_energy_monotone_and_saturating() {
        let prob = zero_obstacle_problem(33, 1.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let m = rep.u.max_abs();
        let levels = [0.25 * m, 0.5 * m, m, 2.0 * m];
        let table = truncation_energy(&prob, &rep.u, &levels).unwrap();
        for w in table.windows(2) {
            assert!(w[0].1 <= w[1].1 + 1e-15);
        }
        // saturation at t >= max |u|
        assert!((table[2].1 - table[3].1).abs() < 1e-15);
        // zero field gives an all-zero table
        let zero = ScalarField::constant(prob.grid(), 0.0);
        for (_, e) in truncation_energy(&prob, &zero, &levels).unwrap() {
            assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn chain_constant_once_data_is_bounded() {
        let prob = zero_obstacle_problem(17, 1.0);
        let chain = run_chain(&prob, &[0.5, 2.0, 4.0], 1e-2, SolveParams::default()).unwrap();
        // from the first n >= max |f| the truncation is inactive
        assert_eq!(chain.levels[1].l1_data_distance, 0.0);
        assert_eq!(chain.levels[2].l1_data_distance, 0.0);
        assert_eq!(chain.levels[2].distance_to_prev, Some(0.0));
        // 1D ambient dimension: exponent diagnostics unavailable
        assert!(chain.levels[0].modular_u.is_none());
    }
}
