//! Distance-list parsing for probe designs.

use mosaic_fields::error::{Error, Result};
use mosaic_fields::sets::SetFamily;
use mosaic_fields::space::Space;

/// Parse `d1,d2,...` or a linspace `start:stop:count`.
pub fn parse_distances(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Config(format!("pair spec '{spec}': {msg}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let ds: Vec<f64> = if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        if count < 1 {
            return Err(bad("count must be at least 1"));
        }
        if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("bad distance")))
            .collect::<Result<_>>()?
    } else {
        return Err(bad("expected d1,d2,... or start:stop:count"));
    };
    if ds.is_empty() || ds.iter().any(|d| !(*d >= 0.0)) {
        return Err(bad("distances must be nonnegative"));
    }
    Ok(ds)
}

/// Ten probe distances adapted to the family's interesting range:
/// for compact token families this is the set diameter, otherwise half
/// the space diameter.
pub fn default_distances(space: &Space, sets: &SetFamily) -> Vec<f64> {
    let reach = match sets {
        SetFamily::EuclidBall { a, .. }
        | SetFamily::CylinderBall { a, .. }
        | SetFamily::TorusBall { a, .. } => a * 0.9,
        SetFamily::Hyperrect { a, .. } => 1.8 * a[0],
        _ => 0.5 * space.diameter(),
    };
    let reach = reach.min(0.85 * space.diameter());
    (1..=10).map(|i| reach * i as f64 / 10.0).collect()
}
