//! Experiment orchestration over the obstacle-problem kernel: flat-file
//! configs, a small expression table, field files, CSV artifacts, and the
//! preset pipelines exposed by the `obstacle` binary.

use std::fmt;
use std::path::{Path, PathBuf};

use obstacle_core::exponent::ExponentField;
use obstacle_core::flux::{FluxKind, FluxSpec};
use obstacle_core::grid::Grid;
use obstacle_core::solver::{ObstacleProblem, SolveParams};

pub mod config;
pub mod expr;
pub mod fieldfile;
pub mod presets;
mod table;

pub use config::Config;

/// Failure classes map directly to process exit codes.
#[derive(Debug, Clone)]
pub enum RunError {
    /// Bad configuration: exit 2.
    Config(String),
    /// Solver did not converge or blew up: exit 3.
    Solver(String),
    /// An inequality/verification check failed: exit 4.
    Check(String),
    /// Artifact IO failed: exit 5.
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Check(_) => 4,
            RunError::Io(_) => 5,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Solver(m) => write!(f, "solver failure: {m}"),
            RunError::Check(m) => write!(f, "check failed: {m}"),
            RunError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Everything a preset needs, assembled from one config.
pub struct Experiment {
    pub grid: Grid,
    pub problem: ObstacleProblem,
    pub params: SolveParams,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cfg: Config,
    pub base_dir: PathBuf,
}

pub fn build_grid(cfg: &Config) -> Result<Grid, RunError> {
    let dim = cfg.usize_or("grid.dim", 2)?;
    let n = cfg.usize_or("grid.n", 65)?;
    let extent = cfg.f64_or("grid.extent", 1.0)?;
    Grid::new(dim, n, extent).map_err(|e| RunError::Config(format!("grid: {e}")))
}

pub fn build_exponent(cfg: &Config, grid: &Grid, base_dir: &Path) -> Result<ExponentField, RunError> {
    match cfg.require("exponent.kind")? {
        "constant" => {
            let p = cfg.require_f64("exponent.value")?;
            ExponentField::constant(grid, p)
                .map_err(|e| RunError::Config(format!("exponent: {e}")))
        }
        "affine" => {
            let base = cfg.require_f64("exponent.base")?;
            let sx = cfg.f64_or("exponent.slope_x", 0.0)?;
            let sy = cfg.f64_or("exponent.slope_y", 0.0)?;
            ExponentField::from_fn(grid, |x, y| base + sx * x + sy * y)
                .map_err(|e| RunError::Config(format!("exponent: {e}")))
        }
        "file" => {
            let rel = cfg.require("exponent.path")?;
            let field = fieldfile::read_field(&base_dir.join(rel))?;
            if field.grid() != grid {
                return Err(RunError::Config(
                    "exponent.path: field file grid does not match the configured grid".into(),
                ));
            }
            ExponentField::new(grid, field.values().to_vec())
                .map_err(|e| RunError::Config(format!("exponent: {e}")))
        }
        other => Err(RunError::Config(format!(
            "key `exponent.kind`: unknown kind `{other}` (constant, affine, file)"
        ))),
    }
}

pub fn build_flux(cfg: &Config, grid: &Grid, base_dir: &Path) -> Result<FluxSpec, RunError> {
    let p = build_exponent(cfg, grid, base_dir)?;
    let delta = cfg
        .auto_f64("flux.delta")?
        .unwrap_or_else(|| 1e-8 * grid.extent(0).max(if grid.dim() == 2 { grid.extent(1) } else { 0.0 }));
    let alpha = cfg.f64_or("flux.alpha", 1.0)?;
    let gamma = cfg.f64_or("flux.gamma", 1.0)?;
    let kind = match cfg.get("flux.kind").unwrap_or("p-laplacian") {
        "p-laplacian" => FluxKind::PLaplacian,
        "perturbed-p-laplacian" => FluxKind::PerturbedPLaplacian,
        other => {
            return Err(RunError::Config(format!(
                "key `flux.kind`: unknown kind `{other}` (p-laplacian, perturbed-p-laplacian)"
            )))
        }
    };
    let j = if kind == FluxKind::PerturbedPLaplacian {
        let e = expr::Expr::from_config(cfg, "flux.j", base_dir)?;
        Some(e.sample(grid, "flux.j")?)
    } else {
        None
    };
    FluxSpec::new(kind, p, delta, j, alpha, gamma)
        .map_err(|e| RunError::Config(format!("flux: {e}")))
}

/// Build the full experiment: grid, flux, data, obstacle, solver controls.
pub fn build_experiment(
    cfg: Config,
    base_dir: &Path,
    out_dir: PathBuf,
    seed_override: Option<u64>,
) -> Result<Experiment, RunError> {
    let grid = build_grid(&cfg)?;
    let spec = build_flux(&cfg, &grid, base_dir)?;
    let f = expr::Expr::from_config(&cfg, "data.f", base_dir)?.sample(&grid, "data.f")?;
    let psi = expr::Expr::from_config(&cfg, "obstacle.psi", base_dir)?
        .sample(&grid, "obstacle.psi")?;
    let problem = ObstacleProblem::new(spec, f, psi)
        .map_err(|e| RunError::Config(format!("problem: {e}")))?;
    let params = SolveParams {
        tol: cfg.auto_f64("solver.tol")?,
        max_iter: cfg.usize_or("solver.max_iter", 1_000_000)?,
    };
    let seed = match seed_override {
        Some(s) => s,
        None => cfg.u64_or("run.seed", 42)?,
    };
    Ok(Experiment { grid, problem, params, seed, out_dir, cfg, base_dir: base_dir.to_path_buf() })
}

/// Output directory precedence: --out flag, `run.out` key, OBSTACLE_OUT
/// environment variable, then ./out.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &Config, base_dir: &Path) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Some(dir) = cfg.get("run.out") {
        return base_dir.join(dir);
    }
    if let Ok(dir) = std::env::var("OBSTACLE_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

/// Run one preset end to end; artifacts land in the experiment's out_dir.
pub fn run_preset(name: &str, exp: &Experiment) -> Result<(), RunError> {
    presets::dispatch(name, exp)
}
