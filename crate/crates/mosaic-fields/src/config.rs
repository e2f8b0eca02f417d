//! TOML run configuration.
//!
//! A run is one archivable file describing the space, the set family, the
//! count and value laws, and the submodel:
//!
//! ```toml
//! seed = 42
//! submodel = "simple"           # simple|token|mixture|dead-leaves|general
//!
//! [space]
//! kind = "euclid-ball"          # euclid-ball|euclid-rect|sphere|cylinder|torus2
//! d = 2
//! c_m = 1.0
//!
//! [sets]
//! kind = "halfspace"            # halfspace|euclid-ball|hyperrect|sphere-cap|
//! c_m = 1.0                     # cylinder-ball|torus-ball
//!
//! [count]
//! kind = "poisson"
//! lambda = 5.0
//!
//! [value]
//! kind = "gaussian"
//! mean = 0.0
//! var = 1.0
//! ```
//!
//! Ball-like set families take a `[sets.radius]` block with
//! `kind = "deterministic"|"sironvalle"|"uniform"|"cos-polynomial"|"hemisphere"`
//! and the matching parameter (`t`, `a`, or `p = [..]`). Compound counts
//! nest `[count.outer]` and `[count.inner]` blocks. The general submodel
//! takes a `[general]` block with `a`, `b`, `c_min`, and
//! `g = "injective"|"constant"|"max-index"`.

use serde::Deserialize;

use crate::dist::{CountDistribution, RadiusLaw, ValueDistribution};
use crate::error::{Error, Result};
use crate::field::{FieldModel, GKind, Submodel};
use crate::sets::SetFamily;
use crate::space::Space;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub submodel: String,
    pub general: Option<GeneralBlock>,
    pub space: SpaceBlock,
    pub sets: SetsBlock,
    pub count: CountBlock,
    pub value: ValueBlock,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralBlock {
    pub a: i64,
    pub b: u64,
    pub c_min: u64,
    pub g: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBlock {
    pub kind: String,
    pub d: Option<u32>,
    pub c_m: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetsBlock {
    pub kind: String,
    pub c_m: Option<f64>,
    /// Hyperrect token half-widths.
    pub a: Option<Vec<f64>>,
    /// Hyperrect bounding half-widths.
    pub bounds: Option<Vec<f64>>,
    pub radius: Option<RadiusBlock>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusBlock {
    pub kind: String,
    pub t: Option<f64>,
    pub a: Option<f64>,
    pub p: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountBlock {
    pub kind: String,
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub n: Option<u64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub pmf: Option<Vec<f64>>,
    pub outer: Option<Box<CountBlock>>,
    pub inner: Option<Box<CountBlock>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueBlock {
    pub kind: String,
    pub mean: Option<f64>,
    pub var: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub p_hi: Option<f64>,
    pub c: Option<f64>,
}

/// Parse a TOML run configuration; syntax errors carry line/column
/// diagnostics from the parser.
pub fn parse(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::config(e.to_string()))
}

fn need<T: Copy>(v: Option<T>, key: &str, ctx: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(format!("{ctx}: missing key '{key}'")))
}

fn need_ref<'a, T>(v: &'a Option<T>, key: &str, ctx: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::config(format!("{ctx}: missing key '{key}'")))
}

impl SpaceBlock {
    pub fn build(&self) -> Result<Space> {
        match self.kind.as_str() {
            "euclid-ball" => Space::euclid_ball(
                need(self.d, "d", "space")?,
                need(self.c_m, "c_m", "space")?,
            ),
            "euclid-rect" => Space::euclid_rect(need_ref(&self.r, "r", "space")?.clone()),
            "sphere" => Space::sphere(need(self.d, "d", "space")?),
            "cylinder" => Space::cylinder(need(self.h, "h", "space")?),
            "torus2" => Ok(Space::torus2()),
            other => Err(Error::config(format!(
                "space: unknown kind '{other}' (expected euclid-ball, euclid-rect, sphere, cylinder, torus2)"
            ))),
        }
    }
}

impl RadiusBlock {
    pub fn build(&self) -> Result<RadiusLaw> {
        match self.kind.as_str() {
            "deterministic" => RadiusLaw::deterministic(need(self.t, "t", "sets.radius")?),
            "sironvalle" => RadiusLaw::sironvalle(need(self.a, "a", "sets.radius")?),
            "uniform" => RadiusLaw::uniform_diameter(need(self.a, "a", "sets.radius")?),
            "cos-polynomial" => {
                RadiusLaw::cos_polynomial(need_ref(&self.p, "p", "sets.radius")?.clone())
            }
            "hemisphere" => Ok(RadiusLaw::Hemisphere),
            other => Err(Error::config(format!(
                "sets.radius: unknown kind '{other}' (expected deterministic, sironvalle, uniform, cos-polynomial, hemisphere)"
            ))),
        }
    }
}

impl SetsBlock {
    pub fn build(&self, space: &Space) -> Result<SetFamily> {
        let d = space.dimension();
        let radius = || -> Result<RadiusLaw> { need_ref(&self.radius, "radius", "sets")?.build() };
        let family = match self.kind.as_str() {
            "halfspace" => SetFamily::halfspace(d, need(self.c_m, "c_m", "sets")?)?,
            "euclid-ball" => {
                SetFamily::euclid_ball(d, radius()?, need(self.c_m, "c_m", "sets")?)?
            }
            "hyperrect" => SetFamily::hyperrect(
                need_ref(&self.a, "a", "sets")?.clone(),
                need_ref(&self.bounds, "bounds", "sets")?.clone(),
            )?,
            "sphere-cap" => SetFamily::sphere_cap(d, radius()?)?,
            "cylinder-ball" => {
                let h = match space {
                    Space::Cylinder { h } => *h,
                    _ => return Err(Error::config("cylinder-ball sets need a cylinder space".to_string())),
                };
                SetFamily::cylinder_ball(radius()?, h)?
            }
            "torus-ball" => SetFamily::torus_ball(radius()?)?,
            other => {
                return Err(Error::config(format!(
                    "sets: unknown kind '{other}' (expected halfspace, euclid-ball, hyperrect, sphere-cap, cylinder-ball, torus-ball)"
                )))
            }
        };
        family.compatible_with(space)?;
        Ok(family)
    }
}

impl CountBlock {
    pub fn build(&self) -> Result<CountDistribution> {
        match self.kind.as_str() {
            "poisson" => CountDistribution::poisson(need(self.lambda, "lambda", "count")?),
            "geometric" => CountDistribution::geometric(need(self.p, "p", "count")?),
            "binomial" => CountDistribution::binomial(
                need(self.n, "n", "count")?,
                need(self.p, "p", "count")?,
            ),
            "negative-binomial" => CountDistribution::negative_binomial(
                need(self.r, "r", "count")?,
                need(self.p, "p", "count")?,
            ),
            "power-alpha" => CountDistribution::power_alpha(need(self.alpha, "alpha", "count")?),
            "compound" => {
                let outer = need_ref(&self.outer, "outer", "count")?.build()?;
                let inner = need_ref(&self.inner, "inner", "count")?.build()?;
                Ok(CountDistribution::compound(outer, inner))
            }
            "deterministic" => Ok(CountDistribution::deterministic(need(self.n, "n", "count")?)),
            "table" => CountDistribution::table(need_ref(&self.pmf, "pmf", "count")?),
            other => Err(Error::config(format!(
                "count: unknown kind '{other}' (expected poisson, geometric, binomial, negative-binomial, power-alpha, compound, deterministic, table)"
            ))),
        }
    }
}

impl ValueBlock {
    pub fn build(&self) -> Result<ValueDistribution> {
        match self.kind.as_str() {
            "gaussian" => ValueDistribution::gaussian(
                need(self.mean, "mean", "value")?,
                need(self.var, "var", "value")?,
            ),
            "uniform" => ValueDistribution::uniform(
                need(self.lo, "lo", "value")?,
                need(self.hi, "hi", "value")?,
            ),
            "two-point" => ValueDistribution::two_point(
                need(self.lo, "lo", "value")?,
                need(self.hi, "hi", "value")?,
                need(self.p_hi, "p_hi", "value")?,
            ),
            "deterministic" => Ok(ValueDistribution::deterministic(need(self.c, "c", "value")?)),
            other => Err(Error::config(format!(
                "value: unknown kind '{other}' (expected gaussian, uniform, two-point, deterministic)"
            ))),
        }
    }
}

impl RunConfig {
    /// Cross-validate and build the field model.
    pub fn build_model(&self) -> Result<FieldModel> {
        let space = self.space.build()?;
        let sets = self.sets.build(&space)?;
        let count = self.count.build()?;
        let value = self.value.build()?;
        let submodel = match self.submodel.as_str() {
            "simple" => Submodel::SimpleMosaic,
            "token" => Submodel::RandomToken,
            "mixture" => Submodel::Mixture,
            "dead-leaves" => Submodel::DeadLeaves,
            "general" => {
                let gb = need_ref(&self.general, "[general]", "config")?;
                let g = match gb.g.as_str() {
                    "injective" => GKind::Injective,
                    "constant" => GKind::Constant,
                    "max-index" => GKind::MaxIndex,
                    other => {
                        return Err(Error::config(format!(
                            "general.g: unknown kind '{other}' (expected injective, constant, max-index)"
                        )))
                    }
                };
                Submodel::GeneralLinear { a: gb.a, b: gb.b, c_min: gb.c_min, g }
            }
            other => {
                return Err(Error::config(format!(
                    "submodel: unknown kind '{other}' (expected simple, token, mixture, dead-leaves, general)"
                )))
            }
        };
        FieldModel::new(space, sets, count, value, submodel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        seed = 7
        submodel = "simple"

        [space]
        kind = "euclid-ball"
        d = 2
        c_m = 1.0

        [sets]
        kind = "halfspace"
        c_m = 1.0

        [count]
        kind = "poisson"
        lambda = 5.0

        [value]
        kind = "gaussian"
        mean = 0.0
        var = 1.0
    "#;

    #[test]
    fn parses_and_builds_a_basic_model() {
        let cfg = parse(BASIC).unwrap();
        assert_eq!(cfg.seed, Some(7));
        let model = cfg.build_model().unwrap();
        assert!(matches!(model.submodel, Submodel::SimpleMosaic));
    }

    #[test]
    fn reports_unknown_keys_with_location() {
        let bad = BASIC.replace("lambda = 5.0", "lambda = 5.0\nrate = 1.0");
        let err = parse(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rate"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn rejects_incompatible_family() {
        let bad = BASIC.replace("kind = \"halfspace\"", "kind = \"sphere-cap\"");
        let cfg = parse(&bad).unwrap();
        assert!(cfg.build_model().is_err());
    }

    #[test]
    fn rejects_out_of_range_parameters_before_sampling() {
        let bad = BASIC.replace("lambda = 5.0", "lambda = -1.0");
        let cfg = parse(&bad).unwrap();
        assert!(cfg.build_model().is_err());
    }

    #[test]
    fn builds_nested_compound_and_cap_family() {
        let text = r#"
            submodel = "simple"

            [space]
            kind = "sphere"
            d = 2

            [sets]
            kind = "sphere-cap"
            radius = { kind = "cos-polynomial", p = [0.5] }

            [count]
            kind = "compound"
            outer = { kind = "poisson", lambda = 2.0 }
            inner = { kind = "power-alpha", alpha = 0.5 }

            [value]
            kind = "uniform"
            lo = 0.0
            hi = 1.0
        "#;
        let cfg = parse(text).unwrap();
        let model = cfg.build_model().unwrap();
        assert!((model.count.pgf(0.5).unwrap() - (-2.0 * 0.5f64.powf(0.5)).exp()).abs() < 1e-12);
    }

    #[test]
    fn builds_general_submodel() {
        let text = BASIC.replace(
            "submodel = \"simple\"",
            "submodel = \"general\"\n[general]\na = 1\nb = 0\nc_min = 0\ng = \"constant\"",
        );
        let cfg = parse(&text).unwrap();
        let model = cfg.build_model().unwrap();
        assert!(matches!(
            model.submodel,
            Submodel::GeneralLinear {
                a: 1,
                b: 0,
                c_min: 0,
                g: GKind::Constant
            }
        ));
    }
}
