//! Monte Carlo estimators: empirical correlations across independent
//! replicates, hit-probability frequencies, and comparison reports
//! against the closed forms.
//!
//! Replicates are keyed by index and evaluated in fixed-size chunks whose
//! outputs are combined in chunk order, so results are bit-identical for
//! any worker count.

use rayon::prelude::*;

use crate::analytics::model_correlation;
use crate::error::{Error, Result};
use crate::field::{realize, FieldModel};
use crate::rng::{Generator, StreamKey};
use crate::sets::{contains, SetFamily};
use crate::space::{Point, Space};

const TAG_REPLICATE: u8 = 21;
const TAG_HIT: u8 = 22;
const CHUNK: u64 = 1024;

/// An anchor point with probe points at prescribed distances.
#[derive(Clone, Debug)]
pub struct PairDesign {
    pub anchor: Point,
    /// `(distance, probe)` pairs; the distance is exact to 1e-9.
    pub probes: Vec<(f64, Point)>,
}

impl PairDesign {
    /// Probes along the canonical direction from the given anchor.
    pub fn from_anchor(space: &Space, anchor: Point, distances: &[f64]) -> Result<Self> {
        space.validate(&anchor)?;
        let probes = distances
            .iter()
            .map(|&d| Ok((d, space.point_at_distance(&anchor, d)?)))
            .collect::<Result<_>>()?;
        Ok(PairDesign { anchor, probes })
    }

    /// Probes from the space's default anchor.
    pub fn along_axis(space: &Space, distances: &[f64]) -> Result<Self> {
        Self::from_anchor(space, space.default_anchor(), distances)
    }
}

/// One row of a correlation validation run.
#[derive(Clone, Copy, Debug)]
pub struct EstimateRow {
    pub d: f64,
    pub rho_hat: f64,
    pub se: f64,
    pub rho_analytic: f64,
    /// `(rho_hat - rho_analytic) / se`; 0 when both error and se vanish.
    pub z: f64,
}

/// Estimate the correlation between the anchor and every probe across `m`
/// independent realizations and compare against the analytic correlation
/// of the model.
///
/// The standard error comes from the delta method with empirical fourth
/// moments: with standardized values `u`, `v`, the influence function of
/// the correlation is `uv - (rho/2)(u^2 + v^2)` and
/// `se^2 = E[(uv - (rho/2)(u^2+v^2))^2] / m`. For bivariate normal data
/// this reduces to the Fisher value `(1-rho^2)/sqrt(m)`; mosaic fields
/// are mixtures with atoms, where the normal-theory error can be off by
/// a factor of two or more, so the moment-based form is used throughout.
pub fn estimate_correlation(
    model: &FieldModel,
    design: &PairDesign,
    m: u64,
    g: &Generator,
) -> Result<Vec<EstimateRow>> {
    if m < 100 {
        return Err(Error::domain(format!(
            "correlation estimation needs m >= 100, got {m}"
        )));
    }
    model.space.validate(&design.anchor)?;
    for (_, p) in &design.probes {
        model.space.validate(p)?;
    }
    let analytic: Vec<f64> = design
        .probes
        .iter()
        .map(|(_, p)| model_correlation(model, &design.anchor, p))
        .collect::<Result<_>>()?;

    let k = design.probes.len();
    let width = k + 1;
    // Chunked evaluation; values are kept (not reduced) so the moment
    // pass below is exact two-pass and independent of the worker count.
    let starts: Vec<u64> = (0..m).step_by(CHUNK as usize).collect();
    let chunks: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(m);
            let mut out = Vec::with_capacity(((end - start) as usize) * width);
            for rep in start..end {
                let rg = g.derive(&StreamKey::new(TAG_REPLICATE).with_u64(rep));
                let r = realize(model, &rg);
                out.push(r.evaluate_unchecked(&design.anchor));
                for (_, p) in &design.probes {
                    out.push(r.evaluate_unchecked(p));
                }
            }
            out
        })
        .collect();
    let values: Vec<f64> = chunks.into_iter().flatten().collect();

    let mf = m as f64;
    let mut means = vec![0.0f64; width];
    for row in values.chunks_exact(width) {
        for (mu, v) in means.iter_mut().zip(row) {
            *mu += v;
        }
    }
    means.iter_mut().for_each(|mu| *mu /= mf);
    let mut vars = vec![0.0f64; width];
    let mut covs = vec![0.0f64; k];
    for row in values.chunks_exact(width) {
        let dx = row[0] - means[0];
        for j in 0..width {
            let dj = row[j] - means[j];
            vars[j] += dj * dj;
            if j > 0 {
                covs[j - 1] += dx * dj;
            }
        }
    }
    vars.iter_mut().for_each(|v| *v /= mf);
    covs.iter_mut().for_each(|c| *c /= mf);

    let mut rows = Vec::with_capacity(k);
    for j in 0..k {
        let d = design.probes[j].0;
        let (var0, varj) = (vars[0], vars[j + 1]);
        if !(var0 > 0.0) || !(varj > 0.0) {
            // Degenerate warning row.
            rows.push(EstimateRow {
                d,
                rho_hat: f64::NAN,
                se: f64::NAN,
                rho_analytic: analytic[j],
                z: f64::NAN,
            });
            continue;
        }
        let rho_hat = (covs[j] / (var0 * varj).sqrt()).clamp(-1.0, 1.0);
        let (s0, sj) = (var0.sqrt(), varj.sqrt());
        let mut psi2 = 0.0f64;
        for row in values.chunks_exact(width) {
            let u = (row[0] - means[0]) / s0;
            let v = (row[j + 1] - means[j + 1]) / sj;
            let psi = u * v - 0.5 * rho_hat * (u * u + v * v);
            psi2 += psi * psi;
        }
        let se = (psi2 / mf).sqrt() / mf.sqrt();
        let diff = rho_hat - analytic[j];
        let z = if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY * diff.signum()
        };
        rows.push(EstimateRow {
            d,
            rho_hat,
            se,
            rho_analytic: analytic[j],
            z,
        });
    }
    Ok(rows)
}

/// Empirical hit probabilities for a pair of points.
#[derive(Clone, Copy, Debug)]
pub struct HitProbEstimate {
    pub p_x: f64,
    pub p_y: f64,
    pub p_xy: f64,
    /// Binomial standard error of `p_xy`.
    pub se_xy: f64,
}

/// Membership frequencies over `m` independently sampled sets.
pub fn estimate_hit_probs(
    family: &SetFamily,
    pairs: &[(Point, Point)],
    m: u64,
    g: &Generator,
) -> Result<Vec<HitProbEstimate>> {
    if m < 1000 {
        return Err(Error::domain(format!(
            "hit probability estimation needs m >= 1000, got {m}"
        )));
    }
    let starts: Vec<u64> = (0..m).step_by(CHUNK as usize).collect();
    let partials: Vec<Vec<[u64; 3]>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(m);
            let mut counts = vec![[0u64; 3]; pairs.len()];
            for rep in start..end {
                let mut sg = g.derive(&StreamKey::new(TAG_HIT).with_u64(rep));
                let inst = family.sample(&mut sg);
                for (c, (x, y)) in counts.iter_mut().zip(pairs) {
                    let hx = contains(&inst, x);
                    let hy = contains(&inst, y);
                    c[0] += hx as u64;
                    c[1] += hy as u64;
                    c[2] += (hx && hy) as u64;
                }
            }
            counts
        })
        .collect();
    let mut totals = vec![[0u64; 3]; pairs.len()];
    for part in &partials {
        for (t, p) in totals.iter_mut().zip(part) {
            t[0] += p[0];
            t[1] += p[1];
            t[2] += p[2];
        }
    }
    let mf = m as f64;
    Ok(totals
        .into_iter()
        .map(|t| {
            let p_xy = t[2] as f64 / mf;
            HitProbEstimate {
                p_x: t[0] as f64 / mf,
                p_y: t[1] as f64 / mf,
                p_xy,
                se_xy: (p_xy * (1.0 - p_xy) / mf).sqrt(),
            }
        })
        .collect())
}

/// Outcome of a calibration run over a set of design points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calibration {
    /// No exceedance.
    Pass,
    /// Exactly one point with |z| > 4: flagged, not failed.
    Flagged,
    /// Two or more exceedances.
    Failed,
}

/// Count |z| > 4 exceedances; degenerate (NaN) rows count as exceedances.
pub fn calibration(rows: &[EstimateRow]) -> Calibration {
    let exceed = rows.iter().filter(|r| !(r.z.abs() <= 4.0)).count();
    match exceed {
        0 => Calibration::Pass,
        1 => Calibration::Flagged,
        _ => Calibration::Failed,
    }
}

/// Format one float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Deterministic CSV for a validation run:
/// header `d,rho_hat,se,rho_analytic,z`, one row per probe.
pub fn compare_report(rows: &[EstimateRow]) -> String {
    let mut out = String::from("d,rho_hat,se,rho_analytic,z\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(r.d),
            fmt17(r.rho_hat),
            fmt17(r.se),
            fmt17(r.rho_analytic),
            fmt17(r.z)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{CountDistribution, ValueDistribution};
    use crate::field::Submodel;

    fn token_model() -> FieldModel {
        FieldModel::new(
            Space::euclid_ball(2, 1.0).unwrap(),
            SetFamily::halfspace(2, 1.0).unwrap(),
            CountDistribution::poisson(4.0).unwrap(),
            ValueDistribution::gaussian(1.0, 1.0).unwrap(),
            Submodel::RandomToken,
        )
        .unwrap()
    }

    #[test]
    fn zero_distance_correlation_is_one() {
        let model = token_model();
        let design = PairDesign::along_axis(&model.space, &[0.0, 0.5]).unwrap();
        let g = Generator::from_seed(41);
        let rows = estimate_correlation(&model, &design, 2000, &g).unwrap();
        assert!((rows[0].rho_hat - 1.0).abs() < 1e-12);
        assert_eq!(rows[0].z, 0.0);
        assert!(rows[1].rho_hat < 1.0);
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let model = token_model();
        let design = PairDesign::along_axis(&model.space, &[0.3, 0.9]).unwrap();
        let g = Generator::from_seed(42);
        let a = estimate_correlation(&model, &design, 3000, &g).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| estimate_correlation(&model, &design, 3000, &g).unwrap());
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.rho_hat.to_bits(), rb.rho_hat.to_bits());
            assert_eq!(ra.se.to_bits(), rb.se.to_bits());
        }
    }

    #[test]
    fn calibrated_model_stays_within_bounds() {
        let model = token_model();
        let ds: Vec<f64> = (1..=10).map(|i| 0.15 * i as f64).collect();
        let design = PairDesign::along_axis(&model.space, &ds).unwrap();
        let g = Generator::from_seed(43);
        let rows = estimate_correlation(&model, &design, 20_000, &g).unwrap();
        assert_ne!(calibration(&rows), Calibration::Failed);
    }

    #[test]
    fn doubling_replicates_shrinks_se() {
        let model = token_model();
        let ds: Vec<f64> = (1..=8).map(|i| 0.2 * i as f64).collect();
        let design = PairDesign::along_axis(&model.space, &ds).unwrap();
        let g = Generator::from_seed(44);
        let median_se = |m: u64| {
            let mut ses: Vec<f64> = estimate_correlation(&model, &design, m, &g)
                .unwrap()
                .iter()
                .map(|r| r.se)
                .collect();
            ses.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ses[ses.len() / 2]
        };
        let ratio = median_se(8000) / median_se(4000);
        let target = 1.0 / 2f64.sqrt();
        assert!((ratio / target - 1.0).abs() < 0.15, "ratio = {ratio}");
    }

    #[test]
    fn degenerate_value_yields_warning_rows() {
        // A single-value cell law makes the field constant while the
        // analytic correlation (count-only) still exists.
        let model = FieldModel {
            value: ValueDistribution::deterministic(3.0),
            submodel: Submodel::SimpleMosaic,
            ..token_model()
        };
        let design = PairDesign::along_axis(&model.space, &[0.4]).unwrap();
        let g = Generator::from_seed(45);
        let rows = estimate_correlation(&model, &design, 500, &g).unwrap();
        assert!(rows[0].rho_hat.is_nan());
        assert!(rows[0].z.is_nan());
    }

    #[test]
    fn hit_prob_estimates_bracket_closed_forms() {
        let fam = SetFamily::halfspace(2, 1.0).unwrap();
        let x = Point(vec![0.05, 0.0]);
        let y = Point(vec![-0.05, 0.0]);
        let g = Generator::from_seed(46);
        let est = estimate_hit_probs(&fam, &[(x.clone(), y.clone())], 1_000_000, &g).unwrap();
        let analytic = fam.hit_prob_pair(&x, &y).unwrap();
        let e = est[0];
        assert!((e.p_x - 0.5).abs() < 4.0 * 5e-4, "p_x = {}", e.p_x);
        assert!((e.p_xy - analytic).abs() < 4.0 * e.se_xy);
    }

    #[test]
    fn report_is_recomputable_and_deterministic() {
        let rows = vec![
            EstimateRow {
                d: 0.25,
                rho_hat: 0.5,
                se: 0.001,
                rho_analytic: 0.501,
                z: -1.0,
            },
            EstimateRow {
                d: 0.5,
                rho_hat: 0.25,
                se: 0.002,
                rho_analytic: 0.24,
                z: 5.0,
            },
        ];
        let csv = compare_report(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "d,rho_hat,se,rho_analytic,z");
        for (line, row) in lines.zip(&rows) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            // 17 significant digits round-trip doubles exactly.
            assert_eq!(cols[0], row.d);
            let z = (cols[1] - cols[3]) / cols[2];
            assert!((z - cols[4]).abs() < 1e-12);
        }
        assert_eq!(compare_report(&[]), "d,rho_hat,se,rho_analytic,z\n");
    }
}
