//! Raster and report writers.

use std::path::Path;

use mosaic_fields::error::Error;
use mosaic_fields::estimate::fmt17;

/// Plain (ASCII) PGM, maxval 65535, values min-max scaled; a constant
/// raster maps to all zeros. Byte-for-byte deterministic.
pub fn pgm(matrix: &[Vec<f64>]) -> String {
    let height = matrix.len();
    let width = matrix.first().map_or(0, Vec::len);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in matrix.iter().flatten() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let scale = if hi > lo { 65535.0 / (hi - lo) } else { 0.0 };
    let mut out = format!("P2\n{width} {height}\n65535\n");
    let mut on_line = 0;
    for row in matrix {
        for v in row {
            let level = ((v - lo) * scale).round() as u32;
            if on_line == 16 {
                out.push('\n');
                on_line = 0;
            } else if on_line > 0 {
                out.push(' ');
            }
            out.push_str(&level.to_string());
            on_line += 1;
        }
        out.push('\n');
        on_line = 0;
    }
    out
}

/// Raw raster values, row-major, with a `# rows,cols` header.
pub fn raster_csv(matrix: &[Vec<f64>]) -> String {
    let height = matrix.len();
    let width = matrix.first().map_or(0, Vec::len);
    let mut out = format!("# {height},{width}\n");
    for row in matrix {
        let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write to the file, or to stdout when no path is given.
pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
