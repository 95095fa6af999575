//! Built-in field expressions, keyed by `<prefix>.kind` in the config.
//! Arbitrary data enters through field files instead of a parser.

use std::path::Path;

use obstacle_core::grid::{Grid, ScalarField};

use crate::config::Config;
use crate::{fieldfile, RunError};

#[derive(Debug, Clone)]
pub enum Expr {
    Constant { value: f64 },
    Affine { base: f64, slope_x: f64, slope_y: f64 },
    /// peak - curvature * |x - center|^2
    QuadraticBump { peak: f64, curvature: f64, center: [f64; 2] },
    /// amplitude * |x - center|^(-exponent)
    RadialPower { amplitude: f64, exponent: f64, center: [f64; 2] },
    /// amplitude * sin(k_x pi x / L_x) * sin(k_y pi y / L_y)
    ProductSines { amplitude: f64, k: [f64; 2] },
    File { path: String },
}

impl Expr {
    pub fn from_config(cfg: &Config, prefix: &str, base_dir: &Path) -> Result<Self, RunError> {
        let key = format!("{prefix}.kind");
        let kind = cfg.require(&key)?;
        let get = |name: &str, default: f64| cfg.f64_or(&format!("{prefix}.{name}"), default);
        let need = |name: &str| cfg.require_f64(&format!("{prefix}.{name}"));
        match kind {
            "constant" => Ok(Expr::Constant { value: need("value")? }),
            "affine" => Ok(Expr::Affine {
                base: need("base")?,
                slope_x: get("slope_x", 0.0)?,
                slope_y: get("slope_y", 0.0)?,
            }),
            "quadratic-bump" => Ok(Expr::QuadraticBump {
                peak: need("peak")?,
                curvature: need("curvature")?,
                center: [need("center_x")?, get("center_y", 0.0)?],
            }),
            "radial-power" => {
                let exponent = need("exponent")?;
                if exponent <= 0.0 {
                    return Err(RunError::Config(format!(
                        "key `{prefix}.exponent` must be positive"
                    )));
                }
                Ok(Expr::RadialPower {
                    amplitude: get("amplitude", 1.0)?,
                    exponent,
                    center: [need("center_x")?, get("center_y", 0.0)?],
                })
            }
            "product-sines" => Ok(Expr::ProductSines {
                amplitude: get("amplitude", 1.0)?,
                k: [get("k_x", 1.0)?, get("k_y", 1.0)?],
            }),
            "file" => {
                let rel = cfg.require(&format!("{prefix}.path"))?;
                let path = base_dir.join(rel);
                if !path.exists() {
                    return Err(RunError::Config(format!(
                        "key `{prefix}.path`: file {} does not exist",
                        path.display()
                    )));
                }
                Ok(Expr::File { path: path.to_string_lossy().into_owned() })
            }
            other => Err(RunError::Config(format!(
                "key `{key}`: unknown expression `{other}` (constant, affine, quadratic-bump, radial-power, product-sines, file)"
            ))),
        }
    }

    pub fn sample(&self, grid: &Grid, key_path: &str) -> Result<ScalarField, RunError> {
        let field = match self {
            Expr::Constant { value } => ScalarField::constant(grid, *value),
            Expr::Affine { base, slope_x, slope_y } => {
                ScalarField::from_fn(grid, |x, y| base + slope_x * x + slope_y * y)
                    .map_err(|e| RunError::Config(format!("{key_path}: {e}")))?
            }
            Expr::QuadraticBump { peak, curvature, center } => {
                ScalarField::from_fn(grid, |x, y| {
                    let dx = x - center[0];
                    let dy = y - center[1];
                    peak - curvature * (dx * dx + dy * dy)
                })
                .map_err(|e| RunError::Config(format!("{key_path}: {e}")))?
            }
            Expr::RadialPower { amplitude, exponent, center } => {
                ScalarField::from_fn(grid, |x, y| {
                    let dx = x - center[0];
                    let dy = y - center[1];
                    amplitude * (dx * dx + dy * dy).powf(-0.5 * exponent)
                })
                .map_err(|_| {
                    RunError::Config(format!(
                        "{key_path}: singular center coincides with a grid node; move it off the lattice"
                    ))
                })?
            }
            Expr::ProductSines { amplitude, k } => {
                let pi = std::f64::consts::PI;
                let lx = grid.extent(0);
                let ly = if grid.dim() == 2 { grid.extent(1) } else { 1.0 };
                ScalarField::from_fn(grid, |x, y| {
                    let sy =
                        if grid.dim() == 2 { (k[1] * pi * y / ly).sin() } else { 1.0 };
                    amplitude * (k[0] * pi * x / lx).sin() * sy
                })
                .map_err(|e| RunError::Config(format!("{key_path}: {e}")))?
            }
            Expr::File { path } => {
                let field = fieldfile::read_field(Path::new(path))?;
                if field.grid() != grid {
                    return Err(RunError::Config(format!(
                        "{key_path}: field file grid does not match the configured grid"
                    )));
                }
                field
            }
        };
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_affine() {
        let g = Grid::new(2, 5, 1.0).unwrap();
        let cfg = Config::parse("f.kind = affine\nf.base = 1.5\nf.slope_x = 0.4\n").unwrap();
        let e = Expr::from_config(&cfg, "f", Path::new(".")).unwrap();
        let field = e.sample(&g, "f").unwrap();
        assert!((field.values()[4] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn singular_center_on_node_is_config_error() {
        let g = Grid::new(2, 5, 1.0).unwrap();
        let cfg = Config::parse(
            "f.kind = radial-power\nf.exponent = 1.5\nf.center_x = 0.5\nf.center_y = 0.5\n",
        )
        .unwrap();
        let e = Expr::from_config(&cfg, "f", Path::new(".")).unwrap();
        assert!(matches!(e.sample(&g, "f"), Err(RunError::Config(_))));
    }

    #[test]
    fn unknown_kind_rejected() {
        let cfg = Config::parse("f.kind = cubic\n").unwrap();
        assert!(matches!(
            Expr::from_config(&cfg, "f", Path::new(".")),
            Err(RunError::Config(_))
        ));
    }
}
