//! Random closed set families: sampling, membership, and the closed-form
//! hit probabilities `p_x = P(x in B)` and `p_xy = P(x, y in B)` that feed
//! every correlation formula.

use crate::dist::RadiusLaw;
use crate::error::{Error, Result};
use crate::rng::Generator;
use crate::space::{ball_point, unit_vector, Point, Space};
use crate::special::{gamma_half, incomplete_beta, integrate, sphere_surface_total};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A family of i.i.d. random closed sets.
#[derive(Clone, Debug)]
pub enum SetFamily {
    /// Half-spaces `{z : <z, X> >= R}` with `X` uniform on the unit sphere
    /// of ℝ^d and `R` uniform on `[-c_m, c_m]`; `c_m` bounds the index set.
    Halfspace { d: u32, c_m: f64 },
    /// Euclidean balls of diameter `D ~ law` (support `[0, a]`) centered
    /// uniformly in the ball of radius `c_m + a/2`.
    EuclidBall {
        d: u32,
        law: RadiusLaw,
        a: f64,
        c_m: f64,
    },
    /// Axis-aligned boxes `{z : |z_k - Z_k| <= a[k]}` with `Z_k` uniform on
    /// `[-(r[k] + a[k]), r[k] + a[k]]`.
    Hyperrect { a: Vec<f64>, r: Vec<f64> },
    /// Geodesic caps of radius `R ~ law` centered uniformly on 𝕊^d.
    SphereCap { d: u32, law: RadiusLaw },
    /// Geodesic balls on the cylinder of height `h`, diameter `D ~ law`
    /// with support `[0, a]`, centers uniform on the extended band.
    CylinderBall { law: RadiusLaw, a: f64, h: f64 },
    /// Geodesic balls on the flat 2-torus, diameter support `[0, a]`.
    TorusBall { law: RadiusLaw, a: f64 },
}

/// One sampled set, with everything needed for membership tests.
#[derive(Clone, Debug)]
pub enum SetInstance {
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Hyperrect {
        center: Vec<f64>,
        half_widths: Vec<f64>,
    },
    Cap {
        center: Vec<f64>,
        radius: f64,
    },
    CylinderBall {
        angle: f64,
        height: f64,
        radius: f64,
    },
    TorusBall {
        angles: [f64; 2],
        radius: f64,
    },
}

/// Support bound of a diameter law, where defined.
fn diameter_support(law: &RadiusLaw) -> Result<f64> {
    match law {
        RadiusLaw::Deterministic { t } => Ok(*t),
        RadiusLaw::Sironvalle { a } => Ok(*a),
        RadiusLaw::UniformDiameter { a } => Ok(*a),
        _ => Err(Error::config(
            "this set family needs a deterministic, sironvalle, or uniform diameter law"
                .to_string(),
        )),
    }
}

impl SetFamily {
    pub fn halfspace(d: u32, c_m: f64) -> Result<Self> {
        if d == 0 || !(c_m > 0.0) {
            return Err(Error::config(format!(
                "halfspace: need d >= 1 and c_m > 0, got d = {d}, c_m = {c_m}"
            )));
        }
        Ok(SetFamily::Halfspace { d, c_m })
    }

    pub fn euclid_ball(d: u32, law: RadiusLaw, c_m: f64) -> Result<Self> {
        if d == 0 || !(c_m > 0.0) {
            return Err(Error::config(format!(
                "euclid ball: need d >= 1 and c_m > 0, got d = {d}, c_m = {c_m}"
            )));
        }
        if matches!(law, RadiusLaw::Sironvalle { .. }) && d != 2 {
            return Err(Error::unsupported(
                "the sironvalle diameter law is only available for d = 2".to_string(),
            ));
        }
        let a = diameter_support(&law)?;
        if !(a > 0.0) {
            return Err(Error::config(
                "euclid ball: diameter bound must be positive".to_string(),
            ));
        }
        Ok(SetFamily::EuclidBall { d, law, a, c_m })
    }

    pub fn hyperrect(a: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != r.len() {
            return Err(Error::config(
                "hyperrect: a and r must have equal positive length".to_string(),
            ));
        }
        if a.iter().chain(&r).any(|&x| !(x > 0.0)) {
            return Err(Error::config(
                "hyperrect: all half-widths must be positive".to_string(),
            ));
        }
        Ok(SetFamily::Hyperrect { a, r })
    }

    pub fn sphere_cap(d: u32, law: RadiusLaw) -> Result<Self> {
        if d == 0 {
            return Err(Error::config(
                "sphere cap: dimension must be at least 1".to_string(),
            ));
        }
        match &law {
            RadiusLaw::Deterministic { t } => {
                if !(*t > 0.0 && *t <= PI / 2.0) {
                    return Err(Error::config(format!(
                        "sphere cap: deterministic radius {t} outside (0, pi/2]"
                    )));
                }
            }
            RadiusLaw::Hemisphere | RadiusLaw::CosPolynomial { .. } => {}
            _ => {
                return Err(Error::config(
                    "sphere cap: radius law must be deterministic, hemisphere, or cos-polynomial"
                        .to_string(),
                ))
            }
        }
        Ok(SetFamily::SphereCap { d, law })
    }

    pub fn cylinder_ball(law: RadiusLaw, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::config(format!(
                "cylinder ball: height = {h} must be positive"
            )));
        }
        let a = diameter_support(&law)?;
        if !(a > 0.0 && a <= PI) {
            return Err(Error::config(format!(
                "cylinder ball: diameter bound {a} outside (0, pi] (a ball must not wrap onto itself)"
            )));
        }
        Ok(SetFamily::CylinderBall { law, a, h })
    }

    pub fn torus_ball(law: RadiusLaw) -> Result<Self> {
        let a = diameter_support(&law)?;
        if !(a > 0.0 && a <= PI) {
            return Err(Error::config(format!(
                "torus ball: diameter bound {a} outside (0, pi] (a ball must not wrap onto itself)"
            )));
        }
        Ok(SetFamily::TorusBall { law, a })
    }

    /// Check that this family can live on the given index space.
    pub fn compatible_with(&self, space: &Space) -> Result<()> {
        let fail = |msg: String| Err(Error::config(msg));
        match (self, space) {
            (SetFamily::Halfspace { d, c_m }, _) | (SetFamily::EuclidBall { d, c_m, .. }, _)
                if matches!(space, Space::EuclidBall { .. } | Space::EuclidRect { .. }) =>
            {
                if *d != space.dimension() {
                    return fail(format!(
                        "set family is {d}-dimensional, space is {}-dimensional",
                        space.dimension()
                    ));
                }
                let bound = match space {
                    Space::EuclidBall { c_m, .. } => *c_m,
                    Space::EuclidRect { r } => r.iter().map(|x| x * x).sum::<f64>().sqrt(),
                    _ => unreachable!(),
                };
                if bound > c_m * (1.0 + 1e-12) {
                    return fail(format!(
                        "the index set is not contained in the ball of radius {c_m} used by the set family"
                    ));
                }
                Ok(())
            }
            (SetFamily::Hyperrect { r, a }, Space::EuclidRect { r: space_r }) => {
                if r.len() != space_r.len() || a.len() != space_r.len() {
                    return fail(
                        "hyperrect family and rectangular space disagree on dimension".to_string(),
                    );
                }
                for (rs, rf) in space_r.iter().zip(r) {
                    if *rs > rf * (1.0 + 1e-12) {
                        return fail(
                            "the index set is not contained in the family's bounding box"
                                .to_string(),
                        );
                    }
                }
                Ok(())
            }
            (SetFamily::Hyperrect { r, .. }, Space::EuclidBall { c_m, .. }) => {
                if r.iter().any(|rk| *c_m > rk * (1.0 + 1e-12)) {
                    return fail(
                        "the index set is not contained in the family's bounding box".to_string(),
                    );
                }
                Ok(())
            }
            (SetFamily::SphereCap { d, .. }, Space::Sphere { d: sd }) => {
                if d == sd {
                    Ok(())
                } else {
                    fail(format!(
                        "cap family on sphere dimension {d}, space has {sd}"
                    ))
                }
            }
            (SetFamily::CylinderBall { h, .. }, Space::Cylinder { h: sh }) => {
                if (h - sh).abs() < 1e-12 {
                    Ok(())
                } else {
                    fail(format!(
                        "cylinder family height {h} does not match space height {sh}"
                    ))
                }
            }
            (SetFamily::TorusBall { .. }, Space::Torus2) => Ok(()),
            _ => fail("set family and space kinds are incompatible".to_string()),
        }
    }

    /// Distance used by this family's closed forms.
    fn metric(&self, x: &Point, y: &Point) -> f64 {
        let (a, b) = (x.coords(), y.coords());
        match self {
            SetFamily::Halfspace { .. }
            | SetFamily::EuclidBall { .. }
            | SetFamily::Hyperrect { .. } => a
                .iter()
                .zip(b)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt(),
            SetFamily::SphereCap { .. } => {
                let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                dot.clamp(-1.0, 1.0).acos()
            }
            SetFamily::CylinderBall { .. } => {
                let da = circle_dist(a[0], b[0]);
                let dh = a[1] - b[1];
                (da * da + dh * dh).sqrt()
            }
            SetFamily::TorusBall { .. } => {
                let d0 = circle_dist(a[0], b[0]);
                let d1 = circle_dist(a[1], b[1]);
                (d0 * d0 + d1 * d1).sqrt()
            }
        }
    }

    /// Draw one set.
    pub fn sample(&self, g: &mut Generator) -> SetInstance {
        match self {
            SetFamily::Halfspace { d, c_m } => SetInstance::Halfspace {
                normal: unit_vector(*d as usize, g),
                offset: c_m * (2.0 * g.next_f64() - 1.0),
            },
            SetFamily::EuclidBall { d, law, a, c_m } => SetInstance::Ball {
                center: ball_point(*d as usize, c_m + a / 2.0, g),
                radius: law.sample(g) / 2.0,
            },
            SetFamily::Hyperrect { a, r } => SetInstance::Hyperrect {
                center: a
                    .iter()
                    .zip(r)
                    .map(|(&ak, &rk)| (rk + ak) * (2.0 * g.next_f64() - 1.0))
                    .collect(),
                half_widths: a.clone(),
            },
            SetFamily::SphereCap { d, law } => SetInstance::Cap {
                center: unit_vector(*d as usize + 1, g),
                radius: law.sample(g),
            },
            SetFamily::CylinderBall { law, a, h } => SetInstance::CylinderBall {
                angle: TAU * g.next_f64(),
                height: -a / 2.0 + (h + a) * g.next_f64(),
                radius: law.sample(g) / 2.0,
            },
            SetFamily::TorusBall { law, .. } => SetInstance::TorusBall {
                angles: [TAU * g.next_f64(), TAU * g.next_f64()],
                radius: law.sample(g) / 2.0,
            },
        }
    }

    /// `p_x = P(x in B)`.
    pub fn hit_prob_single(&self, x: &Point) -> Result<f64> {
        match self {
            SetFamily::Halfspace { .. } => Ok(0.5),
            SetFamily::Hyperrect { a, r } => {
                Ok(a.iter().zip(r).map(|(&ak, &rk)| ak / (rk + ak)).product())
            }
            SetFamily::SphereCap { d, law } => match law {
                RadiusLaw::Hemisphere | RadiusLaw::CosPolynomial { .. } => Ok(0.5),
                RadiusLaw::Deterministic { t } => Ok(cap_ratio(*d, *t)),
                _ => unreachable!("constructor rejects other cap laws"),
            },
            _ => self.hit_prob_pair(x, x),
        }
    }

    /// `p_xy = P(x, y in B)`, in closed form.
    pub fn hit_prob_pair(&self, x: &Point, y: &Point) -> Result<f64> {
        let delta = self.metric(x, y);
        match self {
            SetFamily::Halfspace { d, c_m } => {
                // Omega_1 = 4 sqrt(pi) c_m Gamma((d+1)/2) / Gamma(d/2).
                let omega1 = 4.0 * PI.sqrt() * c_m * gamma_half(d + 1) / gamma_half(*d);
                Ok(0.5 - delta / omega1)
            }
            SetFamily::EuclidBall { d, law, a, c_m } => match law {
                RadiusLaw::Deterministic { t } => {
                    if delta > *t {
                        return Ok(0.0);
                    }
                    let front = gamma_half(d + 2) * t.powi(*d as i32)
                        / (PI.sqrt() * (2.0 * c_m + a).powi(*d as i32) * gamma_half(d + 1));
                    let xarg = (1.0 - (delta / t) * (delta / t)).clamp(0.0, 1.0);
                    Ok(front * incomplete_beta(xarg, (*d as f64 + 1.0) / 2.0, 0.5)?)
                }
                RadiusLaw::UniformDiameter { .. } => {
                    let omega2 = (*d as f64 + 1.0)
                        * PI.sqrt()
                        * (2.0 * c_m + a).powi(*d as i32)
                        * gamma_half(d + 1)
                        / gamma_half(d + 2);
                    Ok(uniform_diameter_bracket(*d, *a, delta)? / omega2)
                }
                RadiusLaw::Sironvalle { .. } => {
                    // p_x * spherical correlation; only constructed at d = 2.
                    let px = 2.0 * a * a / (3.0 * (2.0 * c_m + a) * (2.0 * c_m + a));
                    Ok(px * spherical_correlation(*a, delta))
                }
                _ => unreachable!("constructor rejects other ball laws"),
            },
            SetFamily::Hyperrect { a, r } => {
                let mut p = 1.0;
                for ((&ak, &rk), (&xk, &yk)) in
                    a.iter().zip(r).zip(x.coords().iter().zip(y.coords()))
                {
                    p *= (2.0 * ak - (xk - yk).abs()).max(0.0) / (2.0 * (rk + ak));
                }
                Ok(p)
            }
            SetFamily::SphereCap { d, law } => match law {
                RadiusLaw::Hemisphere => Ok(0.5 - delta / TAU),
                RadiusLaw::CosPolynomial { p } => Ok(cos_poly_pair_prob(*d, p, delta)),
                RadiusLaw::Deterministic { t } => cap_pair_prob(*d, *t, delta),
                _ => unreachable!(),
            },
            SetFamily::CylinderBall { law, a, h } => {
                Ok(mean_lens_area(law, *a, delta)? / (TAU * (h + a)))
            }
            SetFamily::TorusBall { law, a } => Ok(mean_lens_area(law, *a, delta)? / (TAU * TAU)),
        }
    }
}

/// Closed-set membership test.
pub fn contains(s: &SetInstance, x: &Point) -> bool {
    let c = x.coords();
    match s {
        SetInstance::Halfspace { normal, offset } => {
            let dot: f64 = normal.iter().zip(c).map(|(n, x)| n * x).sum();
            dot >= *offset
        }
        SetInstance::Ball { center, radius } => {
            let d2: f64 = center.iter().zip(c).map(|(u, v)| (u - v) * (u - v)).sum();
            d2 <= radius * radius
        }
        SetInstance::Hyperrect {
            center,
            half_widths,
        } => center
            .iter()
            .zip(half_widths)
            .zip(c)
            .all(|((&ck, &ak), &xk)| (xk - ck).abs() <= ak),
        SetInstance::Cap { center, radius } => {
            // Compare geodesic distances, not cosines: acos(0) must equal
            // pi/2 exactly so the hemisphere boundary stays inside.
            let dot: f64 = center.iter().zip(c).map(|(u, v)| u * v).sum();
            dot.clamp(-1.0, 1.0).acos() <= *radius
        }
        SetInstance::CylinderBall {
            angle,
            height,
            radius,
        } => {
            let da = circle_dist(*angle, c[0]);
            let dh = height - c[1];
            da * da + dh * dh <= radius * radius
        }
        SetInstance::TorusBall { angles, radius } => {
            let d0 = circle_dist(angles[0], c[0]);
            let d1 = circle_dist(angles[1], c[1]);
            d0 * d0 + d1 * d1 <= radius * radius
        }
    }
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

/// Area of the intersection of two disks of diameter `t` in the plane,
/// centers `delta` apart.
pub fn lens_area(t: f64, delta: f64) -> f64 {
    if delta >= t || t <= 0.0 {
        return 0.0;
    }
    let ratio = (delta / t).clamp(0.0, 1.0);
    0.5 * t * t * ratio.acos() - 0.5 * delta * (t * t - delta * delta).max(0.0).sqrt()
}

/// `E lens_area(D, delta)` for the supported diameter laws on `[0, a]`.
fn mean_lens_area(law: &RadiusLaw, a: f64, delta: f64) -> Result<f64> {
    match law {
        RadiusLaw::Deterministic { t } => Ok(lens_area(*t, delta)),
        RadiusLaw::UniformDiameter { .. } => Ok(uniform_diameter_bracket(2, a, delta)? / 6.0),
        RadiusLaw::Sironvalle { .. } => Ok(PI * a * a / 6.0 * spherical_correlation(a, delta)),
        _ => Err(Error::unsupported(
            "unsupported diameter law for this family".to_string(),
        )),
    }
}

/// The incomplete-beta bracket for a uniform diameter on `[0, a]` in ℝ^d:
/// `a^d B_x((d+1)/2, 1/2) - (delta^{d+1}/a) B_x((d+1)/2, -d/2)` with
/// `x = 1 - delta^2/a^2`; the second term is zero at `delta = 0`.
fn uniform_diameter_bracket(d: u32, a: f64, delta: f64) -> Result<f64> {
    if delta > a {
        return Ok(0.0);
    }
    // Below this the second term is O(delta) and 1 - delta^2/a^2 rounds
    // to 1, which the negative-parameter beta integral cannot take; use
    // the exact coincident-point limit instead.
    let delta = if delta < 1e-7 * a { 0.0 } else { delta };
    let xarg = (1.0 - (delta / a) * (delta / a)).clamp(0.0, 1.0);
    let half_d1 = (d as f64 + 1.0) / 2.0;
    let term1 = a.powi(d as i32) * incomplete_beta(xarg, half_d1, 0.5)?;
    let term2 = if delta == 0.0 {
        0.0
    } else {
        delta.powi(d as i32 + 1) / a * incomplete_beta(xarg, half_d1, -(d as f64) / 2.0)?
    };
    Ok(term1 - term2)
}

/// Spherical correlation `(1 - 3u/2 + u^3/2)` with `u = delta/a`, zero
/// beyond `a`.
pub fn spherical_correlation(a: f64, delta: f64) -> f64 {
    if delta > a {
        return 0.0;
    }
    let u = delta / a;
    1.0 - 1.5 * u + 0.5 * u * u * u
}

/// Fraction of 𝕊^d covered by a cap of radius `r` in `[0, pi]`.
pub fn cap_ratio(d: u32, r: f64) -> f64 {
    if d == 1 {
        return r / PI;
    }
    let e = d as f64 - 1.0;
    let head = integrate(|t| t.sin().powf(e), 0.0, r, 1e-11);
    let total = integrate(|t| t.sin().powf(e), 0.0, PI, 1e-11);
    head / total
}

/// `P(x, y in B_r(X))` for a deterministic cap on 𝕊^d.
fn cap_pair_prob(d: u32, r: f64, delta: f64) -> Result<f64> {
    if delta <= 1e-12 {
        return Ok(cap_ratio(d, r));
    }
    match d {
        1 => Ok((r / PI - delta / TAU).max(0.0)),
        2 => Ok(tovchigrechko(r, delta)),
        _ => Ok(cap_intersection_area(d, r, delta)? / sphere_surface_total(d)),
    }
}

/// Closed form for the normalized intersection of two equal caps on 𝕊²
/// (spherical-trigonometry formula), radius `r` in (0, pi/2], `delta > 0`.
pub fn tovchigrechko(r: f64, delta: f64) -> f64 {
    if delta >= 2.0 * r {
        return 0.0;
    }
    let (cr, sr) = (r.cos(), r.sin());
    let cd = delta.cos();
    let first = ((cr * cr - cd) / (sr * sr)).clamp(-1.0, 1.0).acos() / TAU;
    let second = cr / PI
        * ((cr * (1.0 - cd)) / (sr * delta.sin()))
            .clamp(-1.0, 1.0)
            .acos();
    first - second
}

/// Surface measure of the intersection of two caps of radius `r` on 𝕊^d
/// whose centers are `dist` apart, by the dimension-reduction recursion
///
/// `sigma_d = \int_{-sin r}^{sin r} (1-a^2)^{(d-2)/2} sigma_{d-1}(r(a)) da`
///
/// with `r(a) = arccos(cos r / sqrt(1-a^2))` and the arc-overlap base case
/// `(2r - dist)_+` on the circle.
pub fn cap_intersection_area(d: u32, r: f64, dist: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain(
            "cap intersection: dimension must be at least 1".to_string(),
        ));
    }
    if !(0.0..=PI / 2.0 + 1e-12).contains(&r) {
        return Err(Error::domain(format!(
            "cap intersection: radius {r} outside [0, pi/2]"
        )));
    }
    if !(0.0..=PI + 1e-12).contains(&dist) {
        return Err(Error::domain(format!(
            "cap intersection: distance {dist} outside [0, pi]"
        )));
    }
    Ok(cap_area_level(d, r, dist))
}

fn cap_area_level(d: u32, r: f64, dist: f64) -> f64 {
    if d == 1 {
        return (2.0 * r - dist).max(0.0);
    }
    let s = r.sin();
    if s <= 0.0 {
        return 0.0;
    }
    let cr = r.cos();
    let e = (d as f64 - 2.0) / 2.0;
    // Integrand is even in the integration variable.
    2.0 * integrate(
        |a| {
            let w = (1.0 - a * a).max(0.0);
            if w <= 0.0 {
                return 0.0;
            }
            let inner_r = (cr / w.sqrt()).clamp(-1.0, 1.0).acos();
            w.powf(e) * cap_area_level(d - 1, inner_r, dist)
        },
        0.0,
        s,
        1e-9,
    )
}

/// `P(x, y in B)` for caps whose `cos R` has the polynomial CDF family:
/// `1/2 - sum_{q} sum_{l=1}^{q+1} p_q C_{q,l,d} sin^{2l-1}(delta/2) cos^{2(q-l+1)}(delta/2)`.
fn cos_poly_pair_prob(d: u32, p: &[f64], delta: f64) -> f64 {
    let (s, c) = (0.5 * delta).sin_cos();
    let mut acc = 0.0;
    for (q, &pq) in p.iter().enumerate() {
        if pq == 0.0 {
            continue;
        }
        for l in 1..=(q + 1) {
            acc += pq
                * cos_poly_coeff(q as u32, l as u32, d)
                * s.powi(2 * l as i32 - 1)
                * c.powi(2 * (q + 1 - l) as i32);
        }
    }
    0.5 - acc
}

/// The constant `C_{q,l,d} = 2^{-(2q+1)} Γ(2q+2) Γ((d+1)/2) /
/// (Γ((2l+1)/2) Γ(q-l+2) Γ((2q+d+2)/2))`, via exact half-integer gammas.
pub fn cos_poly_coeff(q: u32, l: u32, d: u32) -> f64 {
    debug_assert!(l >= 1 && l <= q + 1);
    2f64.powi(-(2 * q as i32 + 1)) * gamma_half(2 * (2 * q + 2)) * gamma_half(d + 1)
        / (gamma_half(2 * l + 1) * gamma_half(2 * (q + 2 - l)) * gamma_half(2 * q + d + 2))
}
