//! Coincidence-set extraction, Lewy-Stampacchia audits, reconstruction of the
//! discontinuity term, and the contraction/stability checks.
//!
//! The two-sided bound under audit is
//!
//! ```text
//! f <= A u <= f + (A psi - f)^+
//! ```
//!
//! on converged solves; on the coincidence set the discontinuity term
//! beta = -(A psi - f)^+ chi_{u = psi} restores the equation A u + beta = f
//! away from free-boundary collars. For two right-hand sides over the same
//! obstacle, xi_i = f_i - A u_i contract in L^1 and the coincidence sets are
//! stable wherever the data stays uniformly below A psi.

use alloc::vec::Vec;

use crate::flux::FluxSpec;
use crate::grid::{check_same_grid, Grid, RegionMask, ScalarField};
use crate::solver::{solve_vi, ObstacleProblem, SolveParams, SolveReport};
use crate::{Error, Result};

/// Coincidence threshold tied to discretization accuracy: max(10 tol, h^2).
pub fn default_coincidence_eps(grid: &Grid, solver_tol: f64) -> f64 {
    (10.0 * solver_tol).max(grid.h_max() * grid.h_max())
}

/// Interior nodes with u - psi <= eps (boundary nodes are never members).
pub fn coincidence_set(u: &ScalarField, psi: &ScalarField, eps: f64) -> Result<RegionMask> {
    check_same_grid(u.grid(), psi.grid())?;
    assert!(eps >= 0.0);
    let grid = u.grid();
    Ok(RegionMask::from_fn(grid, |idx| {
        !grid.is_boundary(idx) && u.values()[idx] - psi.values()[idx] <= eps
    }))
}

/// Nodes within `width` lattice steps of a contact/non-contact interface.
/// Membership of boundary nodes is decided by the same threshold, so a contact
/// region running into the boundary is collared only where psi detaches.
pub fn free_boundary_collar(
    u: &ScalarField,
    psi: &ScalarField,
    eps: f64,
    width: usize,
) -> Result<RegionMask> {
    check_same_grid(u.grid(), psi.grid())?;
    let grid = u.grid();
    let contact: Vec<bool> = (0..grid.node_count())
        .map(|idx| u.values()[idx] - psi.values()[idx] <= eps)
        .collect();
    let edges = RegionMask::from_fn(grid, |idx| {
        if grid.is_boundary(idx) {
            return false;
        }
        grid.neighbors(idx)[..2 * grid.dim()]
            .iter()
            .any(|&nb| contact[nb] != contact[idx])
    });
    Ok(edges.dilate(width))
}

/// Two-sided inequality audit of one converged solve.
#[derive(Debug, Clone)]
pub struct LsReport {
    /// max(0, max_i (f - A u)_i) over all interior nodes.
    pub lower_violation: f64,
    /// max(0, max_i (A u - f - (A psi - f)^+)_i) over all interior nodes.
    pub upper_violation: f64,
    /// Same quantities with free-boundary collars (width 2) excluded.
    pub lower_violation_off_collar: f64,
    pub upper_violation_off_collar: f64,
    /// Interior nodes excluded by the collar.
    pub collar_nodes: usize,
    pub tolerance: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    /// Exponent-regime flags held (bounds and the strict conjugate gap); when
    /// false the audit still ran but outside the hypotheses it certifies.
    pub within_regime: bool,
}

/// Audit f <= A u <= f + (A psi - f)^+ at the interior nodes. Pass flags use
/// the off-collar violations against `tol`.
pub fn lewy_stampacchia_check(
    prob: &ObstacleProblem,
    u: &ScalarField,
    tol: f64,
) -> Result<LsReport> {
    check_same_grid(prob.grid(), u.grid())?;
    assert!(tol > 0.0);
    let grid = prob.grid();
    let au = prob.spec().apply(u)?.au;
    let apsi = prob.spec().apply(prob.psi())?.au;
    let eps = tol.max(grid.h_max() * grid.h_max());
    let collar = free_boundary_collar(u, prob.psi(), eps, 2)?;
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    let mut lower_off = 0.0f64;
    let mut upper_off = 0.0f64;
    let mut collar_nodes = 0;
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) {
            continue;
        }
        let f = prob.f().values()[idx];
        let lo = f - au.values()[idx];
        let hi = au.values()[idx] - f - (apsi.values()[idx] - f).max(0.0);
        lower = lower.max(lo);
        upper = upper.max(hi);
        if collar.contains(idx) {
            collar_nodes += 1;
        } else {
            lower_off = lower_off.max(lo);
            upper_off = upper_off.max(hi);
        }
    }
    let report = prob.spec().p.validate();
    Ok(LsReport {
        lower_violation: lower.max(0.0),
        upper_violation: upper.max(0.0),
        lower_violation_off_collar: lower_off.max(0.0),
        upper_violation_off_collar: upper_off.max(0.0),
        collar_nodes,
        tolerance: tol,
        lower_pass: lower_off.max(0.0) <= tol,
        upper_pass: upper_off.max(0.0) <= tol,
        within_regime: report.bounds_ok && report.conjugate_gap_ok,
    })
}

/// The discontinuity term and the equation residual it leaves.
#[derive(Debug, Clone)]
pub struct BetaReconstruction {
    /// beta = -(A psi - f)^+ chi_{u = psi}, zero on the boundary.
    pub beta: ScalarField,
    /// max |A u + beta - f| over interior nodes farther than 2h from the
    /// free boundary.
    pub strict_interior_residual: f64,
    /// Interior nodes excluded by the collar.
    pub excluded_nodes: usize,
}

pub fn reconstruct_beta(
    prob: &ObstacleProblem,
    u: &ScalarField,
    eps: f64,
) -> Result<BetaReconstruction> {
    check_same_grid(prob.grid(), u.grid())?;
    let grid = prob.grid();
    let au = prob.spec().apply(u)?.au;
    let apsi = prob.spec().apply(prob.psi())?.au;
    let chi = coincidence_set(u, prob.psi(), eps)?;
    let beta_values: Vec<f64> = (0..grid.node_count())
        .map(|idx| {
            if chi.contains(idx) {
                -(apsi.values()[idx] - prob.f().values()[idx]).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let beta = ScalarField::new(grid, beta_values)?;
    let collar = free_boundary_collar(u, prob.psi(), eps, 2)?;
    let mut residual = 0.0f64;
    let mut excluded = 0;
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) {
            continue;
        }
        if collar.contains(idx) {
            excluded += 1;
            continue;
        }
        residual = residual
            .max((au.values()[idx] + beta.values()[idx] - prob.f().values()[idx]).abs());
    }
    Ok(BetaReconstruction { beta, strict_interior_residual: residual, excluded_nodes: excluded })
}

/// xi = f - A u at interior nodes, zero on the boundary.
pub fn xi_field(prob: &ObstacleProblem, u: &ScalarField) -> Result<ScalarField> {
    check_same_grid(prob.grid(), u.grid())?;
    let grid = prob.grid();
    let au = prob.spec().apply(u)?.au;
    ScalarField::new(
        grid,
        (0..grid.node_count())
            .map(|idx| {
                if grid.is_boundary(idx) {
                    0.0
                } else {
                    prob.f().values()[idx] - au.values()[idx]
                }
            })
            .collect(),
    )
}

/// Contraction and coincidence-set stability diagnostics for a pair of
/// right-hand sides over the same obstacle. The stability block is filled
/// by [`stability_check`] only.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub xi1: ScalarField,
    pub xi2: ScalarField,
    pub l1_data_distance: f64,
    pub l1_xi_distance: f64,
    pub contraction_pass: bool,
    pub lambda: Option<f64>,
    pub d: Option<RegionMask>,
    pub sym_diff_measure: Option<f64>,
    /// |f1 - f2|_1 / lambda.
    pub stability_bound: Option<f64>,
    pub stability_pass: Option<bool>,
}

fn check_paired(prob1: &ObstacleProblem, prob2: &ObstacleProblem) -> Result<()> {
    check_same_grid(prob1.grid(), prob2.grid())?;
    if prob1.psi().values() != prob2.psi().values() {
        return Err(Error::MismatchedProblems("obstacles differ"));
    }
    let s1 = prob1.spec();
    let s2 = prob2.spec();
    if s1.kind != s2.kind
        || s1.delta != s2.delta
        || s1.p.values() != s2.p.values()
        || s1.alpha != s2.alpha
        || s1.gamma != s2.gamma
    {
        return Err(Error::MismatchedProblems("flux specifications differ"));
    }
    Ok(())
}

fn solved(prob: &ObstacleProblem, params: SolveParams, level: usize) -> Result<SolveReport> {
    let rep = solve_vi(prob, params)?;
    if !rep.converged {
        return Err(Error::NotConverged { level, residual: rep.complementarity_residual });
    }
    Ok(rep)
}

/// |xi1 - xi2|_1 <= |f1 - f2|_1 check; only the data may differ between the
/// two problems.
pub fn contraction_check(
    prob1: &ObstacleProblem,
    prob2: &ObstacleProblem,
    check_tol: f64,
    params: SolveParams,
) -> Result<StabilityReport> {
    check_paired(prob1, prob2)?;
    let rep1 = solved(prob1, params, 0)?;
    let rep2 = solved(prob2, params, 1)?;
    let xi1 = xi_field(prob1, &rep1.u)?;
    let xi2 = xi_field(prob2, &rep2.u)?;
    let l1_data = prob1.f().l1_distance(prob2.f())?;
    let l1_xi = xi1.l1_distance(&xi2)?;
    Ok(StabilityReport {
        contraction_pass: l1_xi <= l1_data + check_tol,
        xi1,
        xi2,
        l1_data_distance: l1_data,
        l1_xi_distance: l1_xi,
        lambda: None,
        d: None,
        sym_diff_measure: None,
        stability_bound: None,
        stability_pass: None,
    })
}

/// Coincidence-set stability: meas((I1 sym-diff I2) cap D) <= |f1 - f2|_1 / lambda,
/// valid when f_i - A psi <= -lambda on D for both data. The declared (D, lambda)
/// pair is verified nodewise first and the check refuses with a witness node
/// when the bound fails (a hypothesis violation, not a solver fault).
pub fn stability_check(
    prob1: &ObstacleProblem,
    prob2: &ObstacleProblem,
    d: &RegionMask,
    lambda: f64,
    check_tol: f64,
    params: SolveParams,
) -> Result<StabilityReport> {
    check_paired(prob1, prob2)?;
    check_same_grid(prob1.grid(), d.grid())?;
    if !(lambda > 0.0) {
        return Err(Error::BadParameter("lambda must be positive"));
    }
    let grid = prob1.grid();
    let apsi = prob1.spec().apply(prob1.psi())?.au;
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) || !d.contains(idx) {
            continue;
        }
        for f in [prob1.f().values()[idx], prob2.f().values()[idx]] {
            let value = f - apsi.values()[idx];
            if value > -lambda {
                return Err(Error::NondegeneracyViolated { node: idx, value });
            }
        }
    }
    let rep1 = solved(prob1, params, 0)?;
    let rep2 = solved(prob2, params, 1)?;
    let eps = default_coincidence_eps(grid, rep1.tol.max(rep2.tol));
    let i1 = coincidence_set(&rep1.u, prob1.psi(), eps)?;
    let i2 = coincidence_set(&rep2.u, prob2.psi(), eps)?;
    let sym = i1.symmetric_difference(&i2)?.intersection(d)?.measure();
    let xi1 = xi_field(prob1, &rep1.u)?;
    let xi2 = xi_field(prob2, &rep2.u)?;
    let l1_data = prob1.f().l1_distance(prob2.f())?;
    let l1_xi = xi1.l1_distance(&xi2)?;
    let bound = l1_data / lambda;
    Ok(StabilityReport {
        contraction_pass: l1_xi <= l1_data + check_tol,
        xi1,
        xi2,
        l1_data_distance: l1_data,
        l1_xi_distance: l1_xi,
        lambda: Some(lambda),
        d: Some(d.clone()),
        sym_diff_measure: Some(sym),
        stability_bound: Some(bound),
        stability_pass: Some(sym <= bound + check_tol),
    })
}

/// One row of the coincidence-set convergence table.
#[derive(Debug, Clone, Copy)]
pub struct ChiRow {
    pub index: usize,
    /// |chi_n - chi|_q = meas(I_n sym-diff I)^(1/q).
    pub lq_distance: f64,
    pub sym_diff_measure: f64,
}

/// Coincidence-set convergence along a family (f_n, psi_n) -> (f, psi) in
/// L^q, under the non-degeneracy hypothesis |A psi - f| >= eta at every
/// interior node of the limit problem.
pub fn chi_convergence(
    limit: &ObstacleProblem,
    levels: &[(ScalarField, ScalarField)],
    q: f64,
    eta: f64,
    params: SolveParams,
) -> Result<Vec<ChiRow>> {
    assert!(q >= 1.0, "L^q distance needs q >= 1");
    assert!(eta > 0.0);
    let grid = limit.grid();
    let apsi = limit.spec().apply(limit.psi())?.au;
    let mut degenerate = 0usize;
    let mut first = usize::MAX;
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) {
            continue;
        }
        if (apsi.values()[idx] - limit.f().values()[idx]).abs() < eta {
            degenerate += 1;
            if first == usize::MAX {
                first = idx;
            }
        }
    }
    if degenerate > 0 {
        return Err(Error::DegenerateNodes { count: degenerate, first });
    }
    let rep = solved(limit, params, usize::MAX)?;
    let eps = default_coincidence_eps(grid, rep.tol);
    let chi = coincidence_set(&rep.u, limit.psi(), eps)?;
    let mut rows = Vec::with_capacity(levels.len());
    for (index, (f_n, psi_n)) in levels.iter().enumerate() {
        let prob_n = ObstacleProblem::new(limit.spec().clone(), f_n.clone(), psi_n.clone())?;
        let rep_n = solved(&prob_n, params, index)?;
        let chi_n = coincidence_set(&rep_n.u, psi_n, eps)?;
        let sym = chi_n.symmetric_difference(&chi)?.measure();
        rows.push(ChiRow { index, lq_distance: crate::math::pow(sym, 1.0 / q), sym_diff_measure: sym });
    }
    Ok(rows)
}

/// max |A w1 - A w2| over interior nodes whose full stencil lies in
/// {|w1 - w2| <= eps}; zero when no stencil qualifies.
pub fn locality_check(
    spec: &FluxSpec,
    w1: &ScalarField,
    w2: &ScalarField,
    eps: f64,
) -> Result<f64> {
    check_same_grid(spec.grid(), w1.grid())?;
    check_same_grid(spec.grid(), w2.grid())?;
    assert!(eps >= 0.0);
    let grid = spec.grid();
    let a1 = spec.apply(w1)?.au;
    let a2 = spec.apply(w2)?.au;
    let close: Vec<bool> = (0..grid.node_count())
        .map(|idx| (w1.values()[idx] - w2.values()[idx]).abs() <= eps)
        .collect();
    let mut worst = 0.0f64;
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) || !close[idx] {
            continue;
        }
        let stencil_inside = grid.neighbors(idx)[..2 * grid.dim()].iter().all(|&nb| close[nb]);
        if stencil_inside {
            worst = worst.max((a1.values()[idx] - a2.values()[idx]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentField;
    use crate::grid::Grid;

    fn problem_1d(n: usize, f: f64, psi: f64) -> ObstacleProblem {
        let g = Grid::new(1, n, 1.0).unwrap();
        let spec =
            FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        ObstacleProblem::new(
            spec,
            ScalarField::constant(&g, f),
            ScalarField::constant(&g, psi),
        )
        .unwrap()
    }

    #[test]
    fn coincidence_full_and_empty() {
        let prob = problem_1d(41, -1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let eps = default_coincidence_eps(prob.grid(), rep.tol);
        let mask = coincidence_set(&rep.u, prob.psi(), eps).unwrap();
        assert_eq!(mask.count(), prob.grid().interior_nodes().len(), "full interior contact");

        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let eps = default_coincidence_eps(prob.grid(), rep.tol);
        let mask = coincidence_set(&rep.u, prob.psi(), eps).unwrap();
        assert_eq!(mask.count(), 0, "no contact");
    }

    #[test]
    fn ls_obstacle_is_its_own_solution() {
        // f = 0, psi = x(1-x): u = psi, A u = 2, upper bound f + (A psi - f)^+ = 2.
        let g = Grid::new(1, 41, 1.0).unwrap();
        let spec =
            FluxSpec::p_laplacian(ExponentField::constant(&g, 2.0).unwrap(), 0.0).unwrap();
        let f = ScalarField::constant(&g, 0.0);
        let psi = ScalarField::from_fn(&g, |x, _| 0.25 - (x - 0.5) * (x - 0.5)).unwrap();
        let prob = ObstacleProblem::new(spec, f, psi.clone()).unwrap();
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.u.linf_distance(&psi).unwrap() < 1e-9, "solution rides the obstacle");
        for idx in prob.grid().interior_nodes() {
            assert!((rep.au.values()[idx] - 2.0).abs() < 1e-7);
        }
        let ls = lewy_stampacchia_check(&prob, &rep.u, 1e-6).unwrap();
        assert!(ls.lower_pass && ls.upper_pass, "{ls:?}");
        assert!(ls.lower_violation <= 1e-6 && ls.upper_violation <= 1e-6);
    }

    #[test]
    fn ls_no_contact_and_full_contact() {
        // f = 1, psi = 0: A u = f, margins 0 (lower) and 1 (upper).
        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let ls = lewy_stampacchia_check(&prob, &rep.u, 1e-6).unwrap();
        assert!(ls.lower_pass && ls.upper_pass, "{ls:?}");

        // f = -1, psi = 0: A u = 0, f = -1 <= 0 <= -1 + (0 + 1)^+ = 0, upper tight.
        let prob = problem_1d(41, -1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let ls = lewy_stampacchia_check(&prob, &rep.u, 1e-6).unwrap();
        assert!(ls.lower_pass && ls.upper_pass, "{ls:?}");
        assert!(ls.upper_violation <= 1e-9, "upper inequality is tight, not violated");
    }

    #[test]
    fn beta_reconstruction_examples() {
        // Full contact: beta = -(0 - (-1))^+ = -1 on the interior.
        let prob = problem_1d(41, -1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let eps = default_coincidence_eps(prob.grid(), rep.tol);
        let rec = reconstruct_beta(&prob, &rep.u, eps).unwrap();
        for idx in prob.grid().interior_nodes() {
            assert!((rec.beta.values()[idx] + 1.0).abs() < 1e-9);
        }
        assert!(rec.strict_interior_residual < 1e-8);

        // No contact: beta = 0 and A u = f.
        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let rec = reconstruct_beta(&prob, &rep.u, eps).unwrap();
        assert_eq!(rec.beta.max_abs(), 0.0);
        assert!(rec.strict_interior_residual < 1e-8);
    }

    #[test]
    fn xi_examples() {
        let prob = problem_1d(41, 1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let xi = xi_field(&prob, &rep.u).unwrap();
        assert!(xi.max_abs() < 1e-8, "no contact: xi = 0");

        let prob = problem_1d(41, -1.0, 0.0);
        let rep = solve_vi(&prob, SolveParams::default()).unwrap();
        let xi = xi_field(&prob, &rep.u).unwrap();
        for idx in prob.grid().interior_nodes() {
            assert!((xi.values()[idx] + 1.0).abs() < 1e-9, "full contact: xi = -1");
        }
        // xi <= 0 up to solver tolerance
        assert!(xi.max_value() <= 1e-9);
    }

    #[test]
    fn contraction_trivial_pair() {
        let prob = problem_1d(33, -8.0, -0.1);
        let rep = contraction_check(&prob, &prob.clone(), 1e-10, SolveParams::default()).unwrap();
        assert_eq!(rep.l1_data_distance, 0.0);
        assert!(rep.l1_xi_distance <= 1e-10);
        assert!(rep.contraction_pass);
        assert!(rep.lambda.is_none() && rep.sym_diff_measure.is_none());
    }

    #[test]
    fn contraction_rejects_mismatched_pairs() {
        let prob1 = problem_1d(33, -8.0, -0.1);
        let prob2 = problem_1d(33, -8.0, -0.2);
        assert!(matches!(
            contraction_check(&prob1, &prob2, 1e-8, SolveParams::default()),
            Err(Error::MismatchedProblems(_))
        ));
    }

    #[test]
    fn stability_analytic_pair() {
        // f1 = -8, f2 = -9, psi = -0.1: contact [a_i, 1 - a_i] with
        // a_i = sqrt(0.2 / |f_i|); sym-diff measure = 2 (a_1 - a_2).
        let n = 201;
        let prob1 = problem_1d(n, -8.0, -0.1);
        let prob2 = prob1.with_f(ScalarField::constant(prob1.grid(), -9.0)).unwrap();
        let d = RegionMask::all(prob1.grid());
        let rep =
            stability_check(&prob1, &prob2, &d, 8.0, 1e-8, SolveParams::default()).unwrap();
        let exact = 2.0 * ((0.2f64 / 8.0).sqrt() - (0.2f64 / 9.0).sqrt());
        let sym = rep.sym_diff_measure.unwrap();
        let h = prob1.grid().h(0);
        assert!((sym - exact).abs() <= 2.0 * h, "sym {sym} vs exact {exact}");
        assert_eq!(rep.stability_bound, Some(rep.l1_data_distance / 8.0));
        assert_eq!(rep.stability_pass, Some(true));
        assert!(rep.contraction_pass);
        // |f1 - f2|_1 = 1, so the contraction bound reads |xi1 - xi2|_1 <= 1.
        assert!(rep.l1_xi_distance <= 1.0 + 1e-8);

        // Identical data: empty symmetric difference.
        let same =
            stability_check(&prob1, &prob1.clone(), &d, 8.0, 1e-8, SolveParams::default())
                .unwrap();
        assert_eq!(same.sym_diff_measure, Some(0.0));
    }

    #[test]
    fn stability_refuses_bad_lambda() {
        let prob1 = problem_1d(33, -8.0, -0.1);
        let prob2 = prob1.with_f(ScalarField::constant(prob1.grid(), -9.0)).unwrap();
        let d = RegionMask::all(prob1.grid());
        // A psi = 0, f1 = -8: f - A psi = -8 > -9 violates lambda = 9.
        match stability_check(&prob1, &prob2, &d, 9.0, 1e-8, SolveParams::default()) {
            Err(Error::NondegeneracyViolated { value, .. }) => {
                assert!((value + 8.0).abs() < 1e-12)
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn chi_convergence_trivial_family() {
        let prob = problem_1d(33, -8.0, -0.1);
        let levels: Vec<_> = (0..3).map(|_| (prob.f().clone(), prob.psi().clone())).collect();
        let rows = chi_convergence(&prob, &levels, 2.0, 0.5, SolveParams::default()).unwrap();
        for row in rows {
            assert_eq!(row.sym_diff_measure, 0.0);
            assert_eq!(row.lq_distance, 0.0);
        }
    }

    #[test]
    fn chi_convergence_reports_degeneracy() {
        // f = 0 = A psi everywhere: |A psi - f| < eta at every interior node.
        let prob = problem_1d(17, 0.0, -0.1);
        let levels = alloc::vec![(prob.f().clone(), prob.psi().clone())];
        assert!(matches!(
            chi_convergence(&prob, &levels, 2.0, 0.5, SolveParams::default()),
            Err(Error::DegenerateNodes { .. })
        ));
    }

    #[test]
    fn locality_trivial_and_half_domain() {
        let g = Grid::new(1, 41, 1.0).unwrap();
        let spec =
            FluxSpec::p_laplacian(ExponentField::constant(&g, 1.8).unwrap(), 1e-8).unwrap();
        let w = ScalarField::from_fn(&g, |x, _| x * (1.0 - x)).unwrap();
        assert_eq!(locality_check(&spec, &w, &w, 0.0).unwrap(), 0.0);

        // Agree on the left half, differ smoothly on the right.
        let w2 = ScalarField::from_fn(&g, |x, _| {
            let base = x * (1.0 - x);
            if x > 0.5 {
                base + (x - 0.5) * (x - 0.5)
            } else {
                base
            }
        })
        .unwrap();
        let worst = locality_check(&spec, &w, &w2, 1e-12).unwrap();
        assert!(worst <= 1e-10, "identical stencils on the matched region, got {worst}");
    }
}
