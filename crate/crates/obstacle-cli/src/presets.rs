//! The preset pipelines behind the CLI subcommands. Every preset writes its
//! artifacts plus a manifest.txt into the run directory; the process exit
//! code distinguishes config errors, solver failures, and check failures.

use obstacle_core::entropy;
use obstacle_core::exponent::ExponentField;
use obstacle_core::free_boundary::{
    contraction_check, default_coincidence_eps, lewy_stampacchia_check, reconstruct_beta,
    stability_check, xi_field,
};
use obstacle_core::grid::{RegionMask, ScalarField};
use obstacle_core::rng::SplitMix64;
use obstacle_core::solver::{solve_unconstrained, solve_vi, ObstacleProblem, SolveReport};
use obstacle_core::Error as CoreError;

use crate::table::{write_csv, Cell, Manifest};
use crate::{fieldfile, Experiment, RunError};

/// Preset names and one-line descriptions, in listing order.
pub const PRESETS: [(&str, &str); 10] = [
    ("solve", "solve one obstacle problem and write the solution field"),
    ("ls-audit", "audit the two-sided Lewy-Stampacchia bounds on a converged solve"),
    ("equation-audit", "reconstruct the discontinuity term and check A u + beta = f"),
    ("chain", "bounded-data approximation chain with in-measure and modular diagnostics"),
    ("contraction", "L1 contraction of xi = f - A u over data pairs"),
    ("stability", "coincidence-set stability bound under a declared non-degeneracy margin"),
    ("chi-convergence", "coincidence-set convergence along an obstacle perturbation family"),
    ("exponent-report", "validate the variable exponent and its derived exponents"),
    ("structure-audit", "randomized audit of coercivity, growth, and monotonicity"),
    ("manufactured", "solver order check against a manufactured smooth solution"),
];

pub fn dispatch(name: &str, exp: &Experiment) -> Result<(), RunError> {
    std::fs::create_dir_all(&exp.out_dir)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", exp.out_dir.display())))?;
    match name {
        "solve" => solve_preset(exp),
        "ls-audit" => ls_audit(exp),
        "equation-audit" => equation_audit(exp),
        "chain" => chain(exp),
        "contraction" => contraction(exp),
        "stability" => stability(exp),
        "chi-convergence" => chi_convergence_preset(exp),
        "exponent-report" => exponent_report(exp),
        "structure-audit" => structure_audit(exp),
        "manufactured" => manufactured(exp),
        other => Err(RunError::Config(format!("unknown preset `{other}`"))),
    }
}

fn solve_converged(
    exp: &Experiment,
    prob: &ObstacleProblem,
    manifest: Manifest,
) -> Result<SolveReport, RunError> {
    match solve_vi(prob, exp.params) {
        Ok(rep) if rep.converged => Ok(rep),
        Ok(rep) => {
            let reason = format!(
                "solver stopped after {} iterations with residual {:.3e}",
                rep.iterations, rep.complementarity_residual
            );
            manifest.finish(&exp.out_dir, Some(&reason))?;
            Err(RunError::Solver(reason))
        }
        Err(e) => {
            let reason = e.to_string();
            manifest.finish(&exp.out_dir, Some(&reason))?;
            Err(RunError::Solver(reason))
        }
    }
}

fn solve_preset(exp: &Experiment) -> Result<(), RunError> {
    let manifest = Manifest::new("solve", exp.seed);
    let rep = solve_converged(exp, &exp.problem, manifest)?;
    let mut manifest = Manifest::new("solve", exp.seed);
    fieldfile::write_field(&exp.out_dir.join("u.txt"), &rep.u)?;
    fieldfile::write_field(&exp.out_dir.join("au.txt"), &rep.au)?;
    write_csv(
        &exp.out_dir.join("solve.csv"),
        &[
            "iterations: symmetric Gauss-Seidel sweeps [count]",
            "residual: complementarity residual max |min(u - psi, A u - f)| [data units]",
            "tol: convergence tolerance the run was measured against [data units]",
            "converged: residual <= tol",
        ],
        &["iterations", "residual", "tol", "converged"],
        &[vec![
            Cell::from(rep.iterations),
            Cell::from(rep.complementarity_residual),
            Cell::from(rep.tol),
            Cell::from(rep.converged),
        ]],
    )?;
    manifest.put_check("converged", true);
    manifest.put_f64("detail.residual", rep.complementarity_residual);
    manifest.finish(&exp.out_dir, None)?;
    Ok(())
}

fn ls_audit(exp: &Experiment) -> Result<(), RunError> {
    let manifest = Manifest::new("ls-audit", exp.seed);
    let rep = solve_converged(exp, &exp.problem, manifest)?;
    let tol = exp
        .cfg
        .auto_f64("run.ls_tol")?
        .unwrap_or_else(|| 1e-6 * (1.0 + exp.problem.f().max_abs()));
    let ls = lewy_stampacchia_check(&exp.problem, &rep.u, tol)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    write_csv(
        &exp.out_dir.join("ls_report.csv"),
        &[
            "lower_violation: max(0, max (f - A u)) over interior nodes [data units]",
            "upper_violation: max(0, max (A u - f - (A psi - f)^+)) over interior nodes [data units]",
            "*_off_collar: same with width-2 free-boundary collars excluded",
            "collar_nodes: interior nodes excluded by the collar [count]",
            "tolerance: pass threshold [data units]; within_regime: exponent bounds and strict conjugate gap hold",
        ],
        &[
            "lower_violation",
            "upper_violation",
            "lower_violation_off_collar",
            "upper_violation_off_collar",
            "collar_nodes",
            "tolerance",
            "within_regime",
            "lower_pass",
            "upper_pass",
        ],
        &[vec![
            Cell::from(ls.lower_violation),
            Cell::from(ls.upper_violation),
            Cell::from(ls.lower_violation_off_collar),
            Cell::from(ls.upper_violation_off_collar),
            Cell::from(ls.collar_nodes),
            Cell::from(ls.tolerance),
            Cell::from(ls.within_regime),
            Cell::from(ls.lower_pass),
            Cell::from(ls.upper_pass),
        ]],
    )?;
    let summary = format!(
        "Lewy-Stampacchia audit\n  f <= A u        : violation {:.3e} (off collar {:.3e})\n  A u <= f + (A psi - f)^+ : violation {:.3e} (off collar {:.3e})\n  collar nodes excluded: {}\n  tolerance: {:.3e}\n  exponent regime flags hold: {}\n  verdict: lower {} / upper {}\n",
        ls.lower_violation,
        ls.lower_violation_off_collar,
        ls.upper_violation,
        ls.upper_violation_off_collar,
        ls.collar_nodes,
        ls.tolerance,
        ls.within_regime,
        if ls.lower_pass { "pass" } else { "fail" },
        if ls.upper_pass { "pass" } else { "fail" },
    );
    std::fs::write(exp.out_dir.join("summary.txt"), summary)
        .map_err(|e| RunError::Io(e.to_string()))?;
    let mut manifest = Manifest::new("ls-audit", exp.seed);
    manifest.put_check("lewy_stampacchia_lower", ls.lower_pass);
    manifest.put_check("lewy_stampacchia_upper", ls.upper_pass);
    manifest.put_f64("detail.lower_violation_off_collar", ls.lower_violation_off_collar);
    manifest.put_f64("detail.upper_violation_off_collar", ls.upper_violation_off_collar);
    if ls.lower_pass && ls.upper_pass {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("Lewy-Stampacchia violation above tolerance"))?;
        Err(RunError::Check("Lewy-Stampacchia violation above tolerance".into()))
    }
}

fn equation_audit(exp: &Experiment) -> Result<(), RunError> {
    let manifest = Manifest::new("equation-audit", exp.seed);
    let rep = solve_converged(exp, &exp.problem, manifest)?;
    let eps = exp
        .cfg
        .auto_f64("run.eps")?
        .unwrap_or_else(|| default_coincidence_eps(&exp.grid, rep.tol));
    let rec = reconstruct_beta(&exp.problem, &rep.u, eps)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let xi = xi_field(&exp.problem, &rep.u).map_err(|e| RunError::Solver(e.to_string()))?;
    let scale = 1.0 + exp.problem.f().max_abs();
    let tol = exp.cfg.auto_f64("run.eq_tol")?.unwrap_or(1e-6 * scale);
    let pass = rec.strict_interior_residual <= tol;
    fieldfile::write_field(&exp.out_dir.join("beta.txt"), &rec.beta)?;
    fieldfile::write_field(&exp.out_dir.join("xi.txt"), &xi)?;
    write_csv(
        &exp.out_dir.join("equation_report.csv"),
        &[
            "strict_interior_residual: max |A u + beta - f| beyond 2h of the free boundary [data units]",
            "excluded_nodes: interior nodes inside the collar [count]",
            "coincidence_eps: threshold defining {u = psi} [solution units]",
        ],
        &["strict_interior_residual", "excluded_nodes", "coincidence_eps", "tolerance", "pass"],
        &[vec![
            Cell::from(rec.strict_interior_residual),
            Cell::from(rec.excluded_nodes),
            Cell::from(eps),
            Cell::from(tol),
            Cell::from(pass),
        ]],
    )?;
    let mut manifest = Manifest::new("equation-audit", exp.seed);
    manifest.put_check("equation_residual", pass);
    manifest.put_f64("detail.strict_interior_residual", rec.strict_interior_residual);
    if pass {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("equation residual above tolerance"))?;
        Err(RunError::Check("equation residual above tolerance".into()))
    }
}

fn chain(exp: &Experiment) -> Result<(), RunError> {
    let levels = exp.cfg.f64_list_or("run.chain_levels", &[4.0, 8.0, 16.0, 32.0, 64.0])?;
    let s = exp.cfg.f64_or("run.s", 1e-2)?;
    let sweep = exp.cfg.usize_or("run.t_levels", 64)?;
    let manifest = Manifest::new("chain", exp.seed);
    let chain = match entropy::run_chain_with_sweep(&exp.problem, &levels, s, sweep, exp.params) {
        Ok(c) => c,
        Err(e) => {
            let reason = e.to_string();
            manifest.finish(&exp.out_dir, Some(&reason))?;
            return Err(match e {
                CoreError::NotConverged { .. } | CoreError::SolverNan { .. } => {
                    RunError::Solver(reason)
                }
                _ => RunError::Config(reason),
            });
        }
    };
    let rows: Vec<Vec<Cell>> = chain
        .levels
        .iter()
        .map(|l| {
            vec![
                Cell::from(l.n),
                Cell::from(l.report.iterations),
                Cell::from(l.report.complementarity_residual),
                Cell::from(l.distance_to_prev),
                Cell::from(l.modular_u),
                Cell::from(l.modular_grad),
                Cell::from(l.marcinkiewicz),
            ]
        })
        .collect();
    write_csv(
        &exp.out_dir.join("chain.csv"),
        &[
            "n: data truncation level of f_n = T_n(f) [data units]",
            "iterations: solver sweeps [count]; residual: complementarity residual [data units]",
            &format!("inMeasure: measure of {{|u_prev - u_n| > s}} at s = {s} [domain volume]"),
            "modular_u: integral |u|^(0.95 q0); modular_grad: integral |grad u|^(0.95 q1)",
            "marcinkiewicz_M: sup over the level sweep of integral t^(0.95 q0) over {|u| > t}",
            "nan marks diagnostics unavailable outside the exponent regime",
        ],
        &["n", "iterations", "residual", "inMeasure", "modular_u", "modular_grad", "marcinkiewicz_M"],
        &rows,
    )?;
    if let Some(last) = chain.levels.last() {
        fieldfile::write_field(&exp.out_dir.join("u_final.txt"), &last.report.u)?;
    }
    let distances: Vec<f64> = chain.levels.iter().filter_map(|l| l.distance_to_prev).collect();
    let cauchy = distances.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let mut manifest = Manifest::new("chain", exp.seed);
    manifest.put_check("in_measure_nonincreasing", cauchy);
    manifest.put("detail.levels", &format!("{}", levels.len()));
    if cauchy {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("in-measure distances increased along the chain"))?;
        Err(RunError::Check("in-measure distances increased along the chain".into()))
    }
}

fn contraction(exp: &Experiment) -> Result<(), RunError> {
    let mut pairs: Vec<(String, ScalarField, ScalarField)> = Vec::new();
    if exp.cfg.get("data.f2.kind").is_some() {
        let f2 = crate::expr::Expr::from_config(&exp.cfg, "data.f2", &exp.base_dir)?
            .sample(&exp.grid, "data.f2")?;
        pairs.push(("configured".into(), exp.problem.f().clone(), f2));
    }
    let count = exp.cfg.usize_or("run.count", if pairs.is_empty() { 20 } else { 0 })?;
    let amplitude = exp.cfg.f64_or("run.pair_amplitude", 1.0 + exp.problem.f().max_abs())?;
    let mut rng = SplitMix64::new(exp.seed);
    for k in 0..count {
        let draw = |rng: &mut SplitMix64| {
            ScalarField::new(
                &exp.grid,
                (0..exp.grid.node_count()).map(|_| rng.range_f64(-amplitude, amplitude)).collect(),
            )
            .expect("random field is finite")
        };
        pairs.push((format!("random-{k}"), draw(&mut rng), draw(&mut rng)));
    }
    if pairs.is_empty() {
        return Err(RunError::Config(
            "contraction needs data.f2.* or run.count > 0".into(),
        ));
    }
    let check_tol = exp.cfg.f64_or("run.check_tol", 1e-8)?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for (label, f1, f2) in &pairs {
        let p1 = exp.problem.with_f(f1.clone()).map_err(|e| RunError::Config(e.to_string()))?;
        let p2 = exp.problem.with_f(f2.clone()).map_err(|e| RunError::Config(e.to_string()))?;
        let rep = match contraction_check(&p1, &p2, check_tol, exp.params) {
            Ok(r) => r,
            Err(e) => {
                let reason = format!("pair {label}: {e}");
                Manifest::new("contraction", exp.seed)
                    .finish(&exp.out_dir, Some(&reason))?;
                return Err(RunError::Solver(reason));
            }
        };
        all_pass &= rep.contraction_pass;
        rows.push(vec![
            Cell::Text(label.clone()),
            Cell::from(rep.l1_data_distance),
            Cell::from(rep.l1_xi_distance),
            Cell::from(rep.contraction_pass),
        ]);
    }
    write_csv(
        &exp.out_dir.join("contraction.csv"),
        &[
            "pair: data-pair label",
            "l1_data_distance: |f1 - f2| in L1 [data units * volume]",
            "l1_xi_distance: |xi1 - xi2| in L1 with xi = f - A u [data units * volume]",
            "pass: l1_xi_distance <= l1_data_distance + tolerance",
        ],
        &["pair", "l1_data_distance", "l1_xi_distance", "pass"],
        &rows,
    )?;
    let mut manifest = Manifest::new("contraction", exp.seed);
    manifest.put_check("l1_contraction", all_pass);
    manifest.put("detail.pairs", &pairs.len().to_string());
    if all_pass {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("contraction bound violated"))?;
        Err(RunError::Check("contraction bound violated".into()))
    }
}

fn stability(exp: &Experiment) -> Result<(), RunError> {
    let f2 = crate::expr::Expr::from_config(&exp.cfg, "data.f2", &exp.base_dir)?
        .sample(&exp.grid, "data.f2")?;
    let lambda = exp.cfg.require_f64("run.lambda")?;
    let check_tol = exp.cfg.f64_or("run.check_tol", 1e-8)?;
    let p2 = exp.problem.with_f(f2).map_err(|e| RunError::Config(e.to_string()))?;
    let d = RegionMask::all(&exp.grid);
    let rep = match stability_check(&exp.problem, &p2, &d, lambda, check_tol, exp.params) {
        Ok(r) => r,
        Err(CoreError::NondegeneracyViolated { node, value }) => {
            let reason = format!(
                "declared margin violated: f - A psi = {value} > -{lambda} at node {node}"
            );
            Manifest::new("stability", exp.seed).finish(&exp.out_dir, Some(&reason))?;
            return Err(RunError::Check(reason));
        }
        Err(e) => {
            let reason = e.to_string();
            Manifest::new("stability", exp.seed).finish(&exp.out_dir, Some(&reason))?;
            return Err(RunError::Solver(reason));
        }
    };
    let sym = rep.sym_diff_measure.unwrap_or(f64::NAN);
    let bound = rep.stability_bound.unwrap_or(f64::NAN);
    let pass = rep.stability_pass == Some(true) && rep.contraction_pass;
    write_csv(
        &exp.out_dir.join("stability.csv"),
        &[
            "lambda: declared non-degeneracy margin f - A psi <= -lambda on D [data units]",
            "sym_diff_measure: measure of the coincidence-set symmetric difference within D [volume]",
            "bound: |f1 - f2|_1 / lambda [volume]",
        ],
        &[
            "lambda",
            "l1_data_distance",
            "l1_xi_distance",
            "sym_diff_measure",
            "bound",
            "contraction_pass",
            "stability_pass",
        ],
        &[vec![
            Cell::from(lambda),
            Cell::from(rep.l1_data_distance),
            Cell::from(rep.l1_xi_distance),
            Cell::from(sym),
            Cell::from(bound),
            Cell::from(rep.contraction_pass),
            Cell::from(pass),
        ]],
    )?;
    let summary = format!(
        "coincidence-set stability\n  |f1 - f2|_1 = {:.6e}\n  sym-diff measure within D: {sym:.6e}\n  bound |f1 - f2|_1 / lambda = {bound:.6e}\n  verdict: {}\n",
        rep.l1_data_distance,
        if pass { "pass" } else { "fail" },
    );
    std::fs::write(exp.out_dir.join("summary.txt"), summary)
        .map_err(|e| RunError::Io(e.to_string()))?;
    let mut manifest = Manifest::new("stability", exp.seed);
    manifest.put_check("stability_bound", pass);
    manifest.put_f64("detail.sym_diff_measure", sym);
    manifest.put_f64("detail.bound", bound);
    if pass {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("stability bound violated"))?;
        Err(RunError::Check("stability bound violated".into()))
    }
}

fn chi_convergence_preset(exp: &Experiment) -> Result<(), RunError> {
    let q = exp.cfg.f64_or("run.q", 2.0)?;
    let eta = exp.cfg.f64_or("run.eta", 1e-3)?;
    let levels_n = exp.cfg.f64_list_or("run.chain_levels", &[4.0, 8.0, 16.0, 32.0])?;
    let height = exp.cfg.f64_or("run.bump_height", 0.5 * (1.0 + exp.problem.psi().max_abs()))?;
    // Deterministic wide bump centered in the domain; the perturbed obstacles
    // psi_n = psi + bump / n converge back to psi.
    let ext = [exp.grid.extent(0), if exp.grid.dim() == 2 { exp.grid.extent(1) } else { 0.0 }];
    let bump = ScalarField::from_fn(&exp.grid, |x, y| {
        let sx = (x - 0.5 * ext[0]) / (0.45 * ext[0]);
        let sy = if exp.grid.dim() == 2 { (y - 0.5 * ext[1]) / (0.45 * ext[1]) } else { 0.0 };
        let s2 = sx * sx + sy * sy;
        if s2 < 1.0 {
            height * (1.0 - 1.0 / (1.0 - s2)).exp()
        } else {
            0.0
        }
    })
    .map_err(|e| RunError::Config(e.to_string()))?;
    let family: Vec<(ScalarField, ScalarField)> = levels_n
        .iter()
        .map(|&n| {
            let psi_n = ScalarField::new(
                &exp.grid,
                exp.problem
                    .psi()
                    .values()
                    .iter()
                    .zip(bump.values())
                    .map(|(p, b)| p + b / n)
                    .collect(),
            )
            .expect("perturbed obstacle stays finite");
            (exp.problem.f().clone(), psi_n)
        })
        .collect();
    let rows = match obstacle_core::free_boundary::chi_convergence(
        &exp.problem,
        &family,
        q,
        eta,
        exp.params,
    ) {
        Ok(r) => r,
        Err(CoreError::DegenerateNodes { count, first }) => {
            let reason = format!(
                "|A psi - f| < eta = {eta} at {count} nodes (first: {first}); hypotheses unmet"
            );
            Manifest::new("chi-convergence", exp.seed).finish(&exp.out_dir, Some(&reason))?;
            return Err(RunError::Check(reason));
        }
        Err(e) => {
            let reason = e.to_string();
            Manifest::new("chi-convergence", exp.seed).finish(&exp.out_dir, Some(&reason))?;
            return Err(RunError::Solver(reason));
        }
    };
    let csv_rows: Vec<Vec<Cell>> = rows
        .iter()
        .zip(&levels_n)
        .map(|(row, &n)| {
            vec![Cell::from(n), Cell::from(row.lq_distance), Cell::from(row.sym_diff_measure)]
        })
        .collect();
    write_csv(
        &exp.out_dir.join("chi.csv"),
        &[
            "n: obstacle perturbation level, psi_n = psi + bump / n",
            &format!("lq_distance: |chi_n - chi| in L^q at q = {q} [volume^(1/q)]"),
            "sym_diff_measure: measure of the coincidence-set symmetric difference [volume]",
        ],
        &["n", "lq_distance", "sym_diff_measure"],
        &csv_rows,
    )?;
    let nonincreasing = rows.windows(2).all(|w| w[1].lq_distance <= w[0].lq_distance + 1e-15);
    let mut manifest = Manifest::new("chi-convergence", exp.seed);
    manifest.put_check("chi_distance_nonincreasing", nonincreasing);
    if nonincreasing {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("chi distances increased along the family"))?;
        Err(RunError::Check("chi distances increased along the family".into()))
    }
}

fn exponent_report(exp: &Experiment) -> Result<(), RunError> {
    let p = &exp.problem.spec().p;
    let report = p.validate();
    let derived = p.derived().ok();
    let span = |f: Option<&ExponentField>| -> (Cell, Cell) {
        match f {
            Some(e) => {
                let lo = e.values().iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = e.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (Cell::from(lo), Cell::from(hi))
            }
            None => (Cell::Missing, Cell::Missing),
        }
    };
    let (q0_min, q0_max) = span(derived.as_ref().map(|d| &d.q0));
    let (q1_min, q1_max) = span(derived.as_ref().map(|d| &d.q1));
    write_csv(
        &exp.out_dir.join("exponent_report.csv"),
        &[
            "log_holder_constant: discrete sup of |p(x)-p(y)| (-ln |x-y|) over pairs with |x-y| < 1/2",
            "bounds_ok: 1 < ess inf p and ess sup p < ambient dimension",
            "conjugate_gap_ok: strict gap min N p'/(N - p) > sup p' (the regularity regime)",
            "q0/q1: derived regularity exponent ranges; nan when ess sup p >= N",
        ],
        &[
            "p_min",
            "p_max",
            "log_holder_constant",
            "bounds_ok",
            "conjugate_gap_ok",
            "q0_min",
            "q0_max",
            "q1_min",
            "q1_max",
        ],
        &[vec![
            Cell::from(report.p_min),
            Cell::from(report.p_max),
            Cell::from(report.log_holder_constant),
            Cell::from(report.bounds_ok),
            Cell::from(report.conjugate_gap_ok),
            q0_min,
            q0_max,
            q1_min,
            q1_max,
        ]],
    )?;
    let mut manifest = Manifest::new("exponent-report", exp.seed);
    manifest.put("detail.bounds_ok", &report.bounds_ok.to_string());
    manifest.put("detail.conjugate_gap_ok", &report.conjugate_gap_ok.to_string());
    manifest.finish(&exp.out_dir, None)?;
    Ok(())
}

fn structure_audit(exp: &Experiment) -> Result<(), RunError> {
    let samples = exp.cfg.usize_or("run.count", 10_000)?;
    let audit = exp.problem.spec().audit(samples.max(1), exp.seed);
    // Margins above -rounding are zeros up to pow round-off.
    let coercive = audit.coercivity_margin >= -audit.rounding;
    let growth = audit.growth_margin >= -audit.rounding;
    let monotone = audit.monotonicity_margin > 0.0;
    write_csv(
        &exp.out_dir.join("structure_audit.csv"),
        &[
            "coercivity_margin: min a(x,xi).xi - alpha |xi|^p + delta^p over samples",
            "growth_margin: min gamma (j + |xi|^(p-1)) - |a(x,xi)| over samples",
            "monotonicity_margin: min (a(x,xi)-a(x,xi')).(xi-xi') over sampled distinct pairs",
            "rounding: floating-point allowance; margins above -rounding count as nonnegative",
        ],
        &[
            "samples",
            "seed",
            "alpha",
            "gamma",
            "delta",
            "coercivity_margin",
            "growth_margin",
            "monotonicity_margin",
            "rounding",
        ],
        &[vec![
            Cell::from(audit.samples),
            Cell::Int(audit.seed as i64),
            Cell::from(audit.alpha),
            Cell::from(audit.gamma),
            Cell::from(audit.delta),
            Cell::from(audit.coercivity_margin),
            Cell::from(audit.growth_margin),
            Cell::from(audit.monotonicity_margin),
            Cell::from(audit.rounding),
        ]],
    )?;
    let mut manifest = Manifest::new("structure-audit", exp.seed);
    manifest.put_check("coercivity", coercive);
    manifest.put_check("growth", growth);
    manifest.put_check("strict_monotonicity", monotone);
    if coercive && growth && monotone {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("a structure condition failed on the sample set"))?;
        Err(RunError::Check("a structure condition failed on the sample set".into()))
    }
}

fn manufactured(exp: &Experiment) -> Result<(), RunError> {
    let p = &exp.problem.spec().p;
    if p.p_min() != 2.0 || p.p_max() != 2.0 {
        return Err(RunError::Config(
            "manufactured preset needs constant exponent p = 2 (no closed-form data otherwise)"
                .into(),
        ));
    }
    if exp.grid.dim() != 2 {
        return Err(RunError::Config("manufactured preset is two-dimensional".into()));
    }
    let sizes = exp.cfg.usize_list_or("run.sizes", &[17, 33, 65])?;
    let pi = std::f64::consts::PI;
    let lx = exp.grid.extent(0);
    let ly = exp.grid.extent(1);
    let mut errs: Vec<(usize, f64)> = Vec::new();
    for &n in &sizes {
        let g = obstacle_core::grid::Grid::with_shape(2, [n, n], [lx, ly])
            .map_err(|e| RunError::Config(format!("run.sizes: {e}")))?;
        let p_n = ExponentField::constant(&g, 2.0).expect("constant exponent");
        let spec = obstacle_core::flux::FluxSpec::new(
            exp.problem.spec().kind,
            p_n,
            exp.problem.spec().delta,
            None,
            exp.problem.spec().alpha,
            exp.problem.spec().gamma,
        )
        .map_err(|e| RunError::Config(e.to_string()))?;
        let factor = pi * pi * (1.0 / (lx * lx) + 1.0 / (ly * ly));
        let f = ScalarField::from_fn(&g, |x, y| {
            factor * (pi * x / lx).sin() * (pi * y / ly).sin()
        })
        .expect("smooth data");
        let rep = match solve_unconstrained(&spec, &f, exp.params) {
            Ok(r) if r.converged => r,
            Ok(r) => {
                let reason = format!("n = {n}: residual {:.3e}", r.complementarity_residual);
                Manifest::new("manufactured", exp.seed).finish(&exp.out_dir, Some(&reason))?;
                return Err(RunError::Solver(reason));
            }
            Err(e) => {
                let reason = e.to_string();
                Manifest::new("manufactured", exp.seed).finish(&exp.out_dir, Some(&reason))?;
                return Err(RunError::Solver(reason));
            }
        };
        let exact =
            ScalarField::from_fn(&g, |x, y| (pi * x / lx).sin() * (pi * y / ly).sin())
                .expect("smooth reference");
        errs.push((n, rep.u.linf_distance(&exact).expect("same grid")));
    }
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for (k, &(n, err)) in errs.iter().enumerate() {
        let order = if k == 0 { None } else { Some((errs[k - 1].1 / err).log2()) };
        if let Some(o) = order {
            orders.push(o);
        }
        rows.push(vec![Cell::from(n), Cell::from(err), Cell::from(order)]);
    }
    write_csv(
        &exp.out_dir.join("manufactured.csv"),
        &[
            "n: nodes per axis [count]",
            "sup_error: max |u - u_exact| against the manufactured reference [solution units]",
            "order: log2(previous error / error); nan on the first row",
        ],
        &["n", "sup_error", "order"],
        &rows,
    )?;
    let min_order = exp.cfg.f64_or("run.min_order", 1.8)?;
    let pass = !orders.is_empty() && orders.iter().all(|&o| o >= min_order);
    let mut manifest = Manifest::new("manufactured", exp.seed);
    manifest.put_check("observed_order", pass);
    if let Some(worst) = orders.iter().cloned().reduce(f64::min) {
        manifest.put_f64("detail.min_order", worst);
    }
    if pass {
        manifest.finish(&exp.out_dir, None)?;
        Ok(())
    } else {
        manifest.finish(&exp.out_dir, Some("observed order below threshold"))?;
        Err(RunError::Check("observed order below threshold".into()))
    }
}
