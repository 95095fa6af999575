//! Text field files: line 1 holds `dim n1 [n2] extent1 [extent2]`, then one
//! node value per line in row-major order, 17 significant digits.

use std::io::{BufWriter, Write};
use std::path::Path;

use obstacle_core::grid::{Grid, ScalarField};

use crate::RunError;

pub fn write_field(path: &Path, field: &ScalarField) -> Result<(), RunError> {
    let file = std::fs::File::create(path)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    let g = field.grid();
    let header = if g.dim() == 2 {
        format!("2 {} {} {:.16e} {:.16e}", g.n(0), g.n(1), g.extent(0), g.extent(1))
    } else {
        format!("1 {} {:.16e}", g.n(0), g.extent(0))
    };
    writeln!(out, "{header}").map_err(|e| RunError::Io(e.to_string()))?;
    for v in field.values() {
        writeln!(out, "{v:.16e}").map_err(|e| RunError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ScalarField, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RunError::Io(format!("{}: empty field file", path.display())))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let bad = |what: &str| RunError::Io(format!("{}: {what}", path.display()));
    let dim: usize =
        tokens.first().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad dimension"))?;
    let grid = match (dim, tokens.len()) {
        (1, 3) => {
            let n: usize = tokens[1].parse().map_err(|_| bad("bad node count"))?;
            let extent: f64 = tokens[2].parse().map_err(|_| bad("bad extent"))?;
            Grid::with_shape(1, [n, 1], [extent, 0.0])
        }
        (2, 5) => {
            let n1: usize = tokens[1].parse().map_err(|_| bad("bad node count"))?;
            let n2: usize = tokens[2].parse().map_err(|_| bad("bad node count"))?;
            let e1: f64 = tokens[3].parse().map_err(|_| bad("bad extent"))?;
            let e2: f64 = tokens[4].parse().map_err(|_| bad("bad extent"))?;
            Grid::with_shape(2, [n1, n2], [e1, e2])
        }
        _ => return Err(bad("header must be `dim n1 [n2] extent1 [extent2]`")),
    }
    .map_err(|e| bad(&format!("invalid grid: {e}")))?;
    let mut values = Vec::with_capacity(grid.node_count());
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| bad(&format!("bad value `{line}`")))?);
    }
    ScalarField::new(&grid, values).map_err(|e| bad(&format!("invalid field: {e}")))
}
