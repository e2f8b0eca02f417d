//! Catalog of named correlation models: each entry pairs a closed-form
//! correlation function with the field model that realizes it.
//!
//! Rows `e1`..`e10` live on a bounded subset of the plane (contained in
//! the ball of radius `c_m`), rows `s1`..`s11` on the unit 2-sphere. The
//! correlation is a function of distance along the canonical probe
//! direction; `e10` is anisotropic and is evaluated along the first axis.

use std::f64::consts::PI;

use crate::dist::{CountDistribution, RadiusLaw, ValueDistribution};
use crate::error::{Error, Result};
use crate::field::{FieldModel, Submodel};
use crate::sets::{spherical_correlation, tovchigrechko, SetFamily};
use crate::space::Space;

/// Parameters shared by the catalog rows; every row reads the subset it
/// needs. Ranges follow the model constraints and are checked per row.
#[derive(Clone, Debug)]
pub struct CatalogParams {
    /// Tail/shape exponent, in (0, 1].
    pub alpha: f64,
    /// Smoothness-mass parameter of the generalized Cauchy rows, > 0.
    pub beta: f64,
    /// Length scale, > 0.
    pub c: f64,
    /// Scale of the powered-exponential-complement row, >= pi * c_m.
    pub c2: f64,
    /// Trial count of the binomial row, >= 1.
    pub n: u64,
    /// Convex weight, in (0, 1].
    pub lambda1: f64,
    /// Convex weight, in (0, 1).
    pub lambda2: f64,
    /// Ball diameter cutoff, > 0.
    pub a: f64,
    /// Box token half-widths, > 0.
    pub a1: f64,
    pub a2: f64,
    /// Deterministic cap radius, in (0, pi/2].
    pub r: f64,
    /// Bounding radius of the planar index set, > 0.
    pub c_m: f64,
    /// Rate of the rows whose count is Poisson with a free parameter.
    pub poisson: f64,
}

impl Default for CatalogParams {
    fn default() -> Self {
        CatalogParams {
            alpha: 0.5,
            beta: 1.0,
            c: 1.0,
            c2: PI,
            n: 2,
            lambda1: 0.5,
            lambda2: 0.5,
            a: 1.0,
            a1: 0.5,
            a2: 0.5,
            r: 1.0,
            c_m: 1.0,
            poisson: 10.0,
        }
    }
}

/// A catalog entry: correlation function plus generating model.
pub struct CorrelationModel {
    pub id: &'static str,
    /// Human-readable formula, in terms of the distance `d`.
    pub formula: String,
    /// Parameter constraints of the row.
    pub constraints: &'static str,
    pub model: FieldModel,
    rho: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CorrelationModel {
    /// The closed-form correlation at distance `d` (along the first-axis
    /// probe direction for the anisotropic row).
    pub fn rho(&self, d: f64) -> f64 {
        (self.rho)(d)
    }
}

/// Row identifiers, planar rows first.
pub fn list() -> Vec<&'static str> {
    vec![
        "e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9", "e10", "s1", "s2", "s3", "s4", "s5",
        "s6", "s7", "s8", "s9", "s10", "s11",
    ]
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(msg.to_string()))
    }
}

fn check_common(p: &CatalogParams) -> Result<()> {
    check(p.alpha > 0.0 && p.alpha <= 1.0, "alpha must lie in (0, 1]")?;
    check(p.beta > 0.0, "beta must be positive")?;
    check(p.c > 0.0, "c must be positive")?;
    check(p.c_m > 0.0, "c_m must be positive")?;
    check(p.poisson > 0.0, "the Poisson rate must be positive")?;
    check(p.a > 0.0, "a must be positive")?;
    Ok(())
}

/// The compound count `sum_{l <= L} K_l` with the heavy-tailed inner law.
fn compound(outer: CountDistribution, alpha: f64) -> Result<CountDistribution> {
    Ok(CountDistribution::compound(
        outer,
        CountDistribution::power_alpha(alpha)?,
    ))
}

fn plane_space(c_m: f64) -> Result<Space> {
    Space::euclid_ball(2, c_m)
}

fn gauss01() -> ValueDistribution {
    ValueDistribution::gaussian(0.0, 1.0).expect("unit variance")
}

/// Build the catalog row `id` with the given parameters.
pub fn row(id: &str, p: &CatalogParams) -> Result<CorrelationModel> {
    check_common(p)?;
    let geo_count = |lambda1: f64| -> Result<CountDistribution> {
        check(
            lambda1 > 0.0 && lambda1 <= 1.0,
            "lambda1 must lie in (0, 1]",
        )?;
        CountDistribution::geometric(lambda1 / (2.0 * (2.0 - lambda1)))
    };
    let geo_value = || ValueDistribution::gaussian(1.0 / 2f64.sqrt(), 0.5).expect("fixed");
    let mix_value = |lambda2: f64| -> Result<ValueDistribution> {
        check(lambda2 > 0.0 && lambda2 < 1.0, "lambda2 must lie in (0, 1)")?;
        ValueDistribution::gaussian(1.0, lambda2 / (1.0 - lambda2))
    };

    let entry = match id {
        // ---- planar rows: half-spaces -------------------------------
        "e1" => {
            let (alpha, c, c_m) = (p.alpha, p.c, p.c_m);
            let count = compound(
                CountDistribution::poisson((PI * c_m / c).powf(alpha))?,
                alpha,
            )?;
            CorrelationModel {
                id: "e1",
                formula: format!("exp(-(d/{c})^{alpha})"),
                constraints: "alpha in (0,1], c > 0",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (-(d / c).powf(alpha)).exp()),
            }
        }
        "e2" => {
            let (alpha, c2, n, c_m) = (p.alpha, p.c2, p.n, p.c_m);
            check(c2 >= PI * c_m, "c2 must be at least pi * c_m")?;
            check(n >= 1, "n must be at least 1")?;
            let count = compound(
                CountDistribution::binomial(n, (PI * c_m / c2).powf(alpha))?,
                alpha,
            )?;
            CorrelationModel {
                id: "e2",
                formula: format!("(1 - (d/{c2})^{alpha})^{n}"),
                constraints: "alpha in (0,1], c2 >= pi*c_m, n >= 1",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (1.0 - (d / c2).powf(alpha)).powi(n as i32)),
            }
        }
        "e3" => {
            let (alpha, beta, c, c_m) = (p.alpha, p.beta, p.c, p.c_m);
            let w = (PI * c_m / c).powf(alpha);
            let count = compound(
                CountDistribution::negative_binomial(beta / alpha, 1.0 / (1.0 + w))?,
                alpha,
            )?;
            CorrelationModel {
                id: "e3",
                formula: format!("(1 + (d/{c})^{alpha})^(-{beta}/{alpha})"),
                constraints: "alpha in (0,1], beta > 0, c > 0",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (1.0 + (d / c).powf(alpha)).powf(-beta / alpha)),
            }
        }
        "e4" => {
            let (lambda1, c_m) = (p.lambda1, p.c_m);
            CorrelationModel {
                id: "e4",
                formula: format!("{lambda1} (1 - d/(pi {c_m})) + (1 - {lambda1})"),
                constraints: "lambda1 in (0,1]",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    geo_count(lambda1)?,
                    geo_value(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| lambda1 * (1.0 - d / (PI * c_m)) + (1.0 - lambda1)),
            }
        }
        "e5" => {
            let (lambda2, c, c_m) = (p.lambda2, p.c, p.c_m);
            CorrelationModel {
                id: "e5",
                formula: format!(
                    "{lambda2} (1 - d/(pi {c_m})) exp(-d/{c}) + (1 - {lambda2}) (1 - d/(pi {c_m}))"
                ),
                constraints: "lambda2 in (0,1), c > 0",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    CountDistribution::poisson(PI * c_m / c)?,
                    mix_value(lambda2)?,
                    Submodel::Mixture,
                )?,
                rho: Box::new(move |d| {
                    let base = 1.0 - d / (PI * c_m);
                    lambda2 * base * (-d / c).exp() + (1.0 - lambda2) * base
                }),
            }
        }
        "e6" => {
            let (alpha, c_m) = (p.alpha, p.c_m);
            CorrelationModel {
                id: "e6",
                formula: format!(
                    "1 - 2^(1-{alpha}) (d/(pi {c_m})) / (1 + d/(pi {c_m}))^(1-{alpha})"
                ),
                constraints: "alpha in (0,1]",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::halfspace(2, c_m)?,
                    CountDistribution::power_alpha(alpha)?,
                    gauss01(),
                    Submodel::DeadLeaves,
                )?,
                rho: Box::new(move |d| {
                    let u = d / (PI * c_m);
                    1.0 - 2f64.powf(1.0 - alpha) * u / (1.0 + u).powf(1.0 - alpha)
                }),
            }
        }
        // ---- planar rows: balls and boxes, Poisson token fields -----
        "e7" => {
            let (a, c_m, poisson) = (p.a, p.c_m, p.poisson);
            CorrelationModel {
                id: "e7",
                formula: format!(
                    "((2/pi) acos(d/{a}) - (2/(pi {a}^2)) d sqrt({a}^2 - d^2)) for d <= {a}"
                ),
                constraints: "a > 0; Poisson rate arbitrary",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::euclid_ball(2, RadiusLaw::deterministic(a)?, c_m)?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| {
                    if d > a {
                        return 0.0;
                    }
                    2.0 / PI * (d / a).acos()
                        - 2.0 / (PI * a * a) * d * (a * a - d * d).max(0.0).sqrt()
                }),
            }
        }
        "e8" => {
            let (a, c_m, poisson) = (p.a, p.c_m, p.poisson);
            CorrelationModel {
                id: "e8",
                formula: format!("(1 - 3d/(2 {a}) + d^3/(2 {a}^3)) for d <= {a}"),
                constraints: "a > 0; Poisson rate arbitrary",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::euclid_ball(2, RadiusLaw::sironvalle(a)?, c_m)?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| spherical_correlation(a, d)),
            }
        }
        "e9" => {
            let (a, c_m, poisson) = (p.a, p.c_m, p.poisson);
            CorrelationModel {
                id: "e9",
                formula: format!(
                    "((2/pi) acos(d/{a}) - (4/(pi {a}^2)) d sqrt({a}^2-d^2) + (2/(pi {a}^3)) d^3 atanh(sqrt(1-d^2/{a}^2))) for d <= {a}"
                ),
                constraints: "a > 0; Poisson rate arbitrary",
                model: FieldModel::new(
                    plane_space(c_m)?,
                    SetFamily::euclid_ball(2, RadiusLaw::uniform_diameter(a)?, c_m)?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| {
                    if d >= a {
                        return 0.0;
                    }
                    if d == 0.0 {
                        return 1.0;
                    }
                    2.0 / PI * (d / a).acos()
                        - 4.0 / (PI * a * a) * d * (a * a - d * d).sqrt()
                        + 2.0 / (PI * a * a * a)
                            * d.powi(3)
                            * (1.0 - d * d / (a * a)).sqrt().atanh()
                }),
            }
        }
        "e10" => {
            let (a1, a2, poisson, c_m) = (p.a1, p.a2, p.poisson, p.c_m);
            check(a1 > 0.0 && a2 > 0.0, "a1 and a2 must be positive")?;
            // Square index set inscribed in the ball of radius c_m.
            let half = c_m / 2f64.sqrt();
            CorrelationModel {
                id: "e10",
                formula: format!(
                    "(2 {a1} - |x1-y1|)_+ (2 {a2} - |x2-y2|)_+ / (4 {a1} {a2}) (first-axis probes)"
                ),
                constraints: "a1, a2 > 0; Poisson rate arbitrary",
                model: FieldModel::new(
                    Space::euclid_rect(vec![half, half])?,
                    SetFamily::hyperrect(vec![a1, a2], vec![half, half])?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| (2.0 * a1 - d).max(0.0) / (2.0 * a1)),
            }
        }
        // ---- sphere rows: hemispheres -------------------------------
        "s1" => {
            let (alpha, c) = (p.alpha, p.c);
            let count = compound(CountDistribution::poisson((PI / c).powf(alpha))?, alpha)?;
            CorrelationModel {
                id: "s1",
                formula: format!("exp(-(d/{c})^{alpha})"),
                constraints: "alpha in (0,1], c > 0",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::Hemisphere)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (-(d / c).powf(alpha)).exp()),
            }
        }
        "s2" => {
            let (alpha, beta, c) = (p.alpha, p.beta, p.c);
            let w = (PI / c).powf(alpha);
            let count = compound(
                CountDistribution::negative_binomial(beta / alpha, 1.0 / (1.0 + w))?,
                alpha,
            )?;
            CorrelationModel {
                id: "s2",
                formula: format!("(1 + (d/{c})^{alpha})^(-{beta}/{alpha})"),
                constraints: "alpha in (0,1], beta > 0, c > 0",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::Hemisphere)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (1.0 + (d / c).powf(alpha)).powf(-beta / alpha)),
            }
        }
        "s3" => {
            let lambda1 = p.lambda1;
            CorrelationModel {
                id: "s3",
                formula: format!("{lambda1} (1 - d/pi) + (1 - {lambda1})"),
                constraints: "lambda1 in (0,1]",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::Hemisphere)?,
                    geo_count(lambda1)?,
                    geo_value(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| lambda1 * (1.0 - d / PI) + (1.0 - lambda1)),
            }
        }
        "s4" => {
            let (lambda2, c) = (p.lambda2, p.c);
            CorrelationModel {
                id: "s4",
                formula: format!("{lambda2} (1 - d/pi) exp(-d/{c}) + (1 - {lambda2}) (1 - d/pi)"),
                constraints: "lambda2 in (0,1), c > 0",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::Hemisphere)?,
                    CountDistribution::poisson(PI / c)?,
                    mix_value(lambda2)?,
                    Submodel::Mixture,
                )?,
                rho: Box::new(move |d| {
                    let base = 1.0 - d / PI;
                    lambda2 * base * (-d / c).exp() + (1.0 - lambda2) * base
                }),
            }
        }
        "s5" => {
            let alpha = p.alpha;
            CorrelationModel {
                id: "s5",
                formula: format!("1 - 2^(1-{alpha}) (d/pi) / (1 + d/pi)^(1-{alpha})"),
                constraints: "alpha in (0,1]",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::Hemisphere)?,
                    CountDistribution::power_alpha(alpha)?,
                    gauss01(),
                    Submodel::DeadLeaves,
                )?,
                rho: Box::new(move |d| {
                    let u = d / PI;
                    1.0 - 2f64.powf(1.0 - alpha) * u / (1.0 + u).powf(1.0 - alpha)
                }),
            }
        }
        "s6" => {
            let (r, poisson) = (p.r, p.poisson);
            check(r > 0.0 && r <= PI / 2.0, "r must lie in (0, pi/2]")?;
            CorrelationModel {
                id: "s6",
                formula: format!("normalized equal-cap overlap at radius {r} for d <= 2r"),
                constraints: "r in (0, pi/2]; Poisson rate arbitrary",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::deterministic(r)?)?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| {
                    if d == 0.0 {
                        return 1.0;
                    }
                    let px = (1.0 - r.cos()) / 2.0;
                    tovchigrechko(r, d) / px
                }),
            }
        }
        // ---- sphere rows: uniform cos R caps -------------------------
        "s7" => {
            let (alpha, c) = (p.alpha, p.c);
            let count = compound(CountDistribution::poisson((2.0 / c).powf(alpha))?, alpha)?;
            CorrelationModel {
                id: "s7",
                formula: format!("exp(-(sin(d/2)/{c})^{alpha})"),
                constraints: "alpha in (0,1], c > 0",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.5])?)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| (-((0.5 * d).sin() / c).powf(alpha)).exp()),
            }
        }
        "s8" => {
            let (alpha, beta, c) = (p.alpha, p.beta, p.c);
            let w = (2.0 / c).powf(alpha);
            let count = compound(
                CountDistribution::negative_binomial(beta / alpha, 1.0 / (1.0 + w))?,
                alpha,
            )?;
            CorrelationModel {
                id: "s8",
                formula: format!("(1 + ((1/{c}) sin(d/2))^{alpha})^(-{beta}/{alpha})"),
                constraints: "alpha in (0,1], beta > 0, c > 0",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.5])?)?,
                    count,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| {
                    (1.0 + ((0.5 * d).sin() / c).powf(alpha)).powf(-beta / alpha)
                }),
            }
        }
        "s9" => {
            let lambda1 = p.lambda1;
            CorrelationModel {
                id: "s9",
                formula: format!("{lambda1} (1 - sin(d/2)/2) + (1 - {lambda1})"),
                constraints: "lambda1 in (0,1]",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.5])?)?,
                    geo_count(lambda1)?,
                    geo_value(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| lambda1 * (1.0 - 0.5 * (0.5 * d).sin()) + (1.0 - lambda1)),
            }
        }
        "s10" => {
            let poisson = p.poisson;
            CorrelationModel {
                id: "s10",
                formula: "1 - (1/4) sin^3(d/2) - (3/8) sin(d/2) cos^2(d/2)".to_string(),
                constraints: "Poisson rate arbitrary",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.0, 0.5])?)?,
                    CountDistribution::poisson(poisson)?,
                    gauss01(),
                    Submodel::RandomToken,
                )?,
                rho: Box::new(move |d| {
                    let (s, c) = (0.5 * d).sin_cos();
                    1.0 - 0.25 * s * s * s - 0.375 * s * c * c
                }),
            }
        }
        "s11" => {
            let alpha = p.alpha;
            CorrelationModel {
                id: "s11",
                formula: format!("1 - ((1/2) sin(d/2))^{alpha}"),
                constraints: "alpha in (0,1]",
                model: FieldModel::new(
                    Space::sphere(2)?,
                    SetFamily::sphere_cap(2, RadiusLaw::cos_polynomial(vec![0.5])?)?,
                    CountDistribution::power_alpha(alpha)?,
                    gauss01(),
                    Submodel::SimpleMosaic,
                )?,
                rho: Box::new(move |d| 1.0 - (0.5 * (0.5 * d).sin()).powf(alpha)),
            }
        }
        other => {
            return Err(Error::config(format!(
                "unknown catalog row '{other}'; known rows: {}",
                list().join(", ")
            )))
        }
    };
    Ok(entry)
}
