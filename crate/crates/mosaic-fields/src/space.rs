//! Index spaces: bounded Euclidean domains, unit spheres, a cylinder,
//! and the flat 2-torus, with their metrics and uniform sampling.

use crate::dist::standard_normal;
use crate::error::{Error, Result};
use crate::rng::Generator;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A point of an index space.
///
/// Interpretation depends on the space: ambient coordinates in ℝ^d for the
/// Euclidean domains, a unit vector in ℝ^{d+1} for 𝕊^d, `(angle, height)`
/// for the cylinder, and `(angle, angle)` for the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// The index set `M` of a field model.
#[derive(Clone, Debug)]
pub enum Space {
    /// Closed ball of radius `c_m` centered at the origin in ℝ^d.
    EuclidBall { d: u32, c_m: f64 },
    /// Closed box `prod_k [-r[k], r[k]]` in ℝ^d.
    EuclidRect { r: Vec<f64> },
    /// Unit sphere 𝕊^d embedded in ℝ^{d+1}, geodesic metric.
    Sphere { d: u32 },
    /// Cylinder `𝕊^1 x [0, h]` of radius 1.
    Cylinder { h: f64 },
    /// Flat torus `𝕊^1 x 𝕊^1`.
    Torus2,
}

/// Distance between two angles on the unit circle.
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Space {
    pub fn euclid_ball(d: u32, c_m: f64) -> Result<Self> {
        if d == 0 || !(c_m > 0.0) {
            return Err(Error::config(format!(
                "euclid ball: need d >= 1 and c_m > 0, got d = {d}, c_m = {c_m}"
            )));
        }
        Ok(Space::EuclidBall { d, c_m })
    }

    pub fn euclid_rect(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::config(
                "euclid rect: all half-widths must be positive".to_string(),
            ));
        }
        Ok(Space::EuclidRect { r })
    }

    pub fn sphere(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::config(
                "sphere: dimension must be at least 1".to_string(),
            ));
        }
        Ok(Space::Sphere { d })
    }

    pub fn cylinder(h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::config(format!(
                "cylinder: height = {h} must be positive"
            )));
        }
        Ok(Space::Cylinder { h })
    }

    pub fn torus2() -> Self {
        Space::Torus2
    }

    /// Dimension of the space as a manifold.
    pub fn dimension(&self) -> u32 {
        match self {
            Space::EuclidBall { d, .. } => *d,
            Space::EuclidRect { r } => r.len() as u32,
            Space::Sphere { d } => *d,
            Space::Cylinder { .. } => 2,
            Space::Torus2 => 2,
        }
    }

    /// Largest distance between two points of the space.
    pub fn diameter(&self) -> f64 {
        match self {
            Space::EuclidBall { c_m, .. } => 2.0 * c_m,
            Space::EuclidRect { r } => 2.0 * norm(r),
            Space::Sphere { .. } => std::f64::consts::PI,
            Space::Cylinder { h } => (std::f64::consts::PI.powi(2) + h * h).sqrt(),
            Space::Torus2 => std::f64::consts::PI * std::f64::consts::SQRT_2,
        }
    }

    /// Check that `x` is a valid point of this space.
    pub fn validate(&self, x: &Point) -> Result<()> {
        let c = x.coords();
        let bad = |msg: String| Err(Error::domain(msg));
        match self {
            Space::EuclidBall { d, c_m } => {
                if c.len() != *d as usize {
                    return bad(format!(
                        "point has {} coordinates, space needs {d}",
                        c.len()
                    ));
                }
                if norm(c) > c_m * (1.0 + 1e-9) {
                    return bad(format!("point lies outside the ball of radius {c_m}"));
                }
            }
            Space::EuclidRect { r } => {
                if c.len() != r.len() {
                    return bad(format!(
                        "point has {} coordinates, space needs {}",
                        c.len(),
                        r.len()
                    ));
                }
                for (k, (&xk, &rk)) in c.iter().zip(r).enumerate() {
                    if xk.abs() > rk * (1.0 + 1e-9) {
                        return bad(format!("coordinate {k} = {xk} outside [-{rk}, {rk}]"));
                    }
                }
            }
            Space::Sphere { d } => {
                if c.len() != *d as usize + 1 {
                    return bad(format!(
                        "point has {} coordinates, sphere needs {}",
                        c.len(),
                        d + 1
                    ));
                }
                if (norm(c) - 1.0).abs() > 1e-9 {
                    return bad(format!("sphere point has norm {}", norm(c)));
                }
            }
            Space::Cylinder { h } => {
                if c.len() != 2 {
                    return bad("cylinder point needs (angle, height)".to_string());
                }
                if !(0.0..TAU).contains(&c[0]) {
                    return bad(format!("angle {} outside [0, 2pi)", c[0]));
                }
                if c[1] < -1e-12 || c[1] > h + 1e-12 {
                    return bad(format!("height {} outside [0, {h}]", c[1]));
                }
            }
            Space::Torus2 => {
                if c.len() != 2 {
                    return bad("torus point needs (angle, angle)".to_string());
                }
                for &a in c {
                    if !(0.0..TAU).contains(&a) {
                        return bad(format!("angle {a} outside [0, 2pi)"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Metric of the space. Errors if either point is not in the space.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Metric without membership validation (hot paths).
    pub fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        if x == y {
            // acos of a rounded inner product would report ~1e-8 here.
            return 0.0;
        }
        let (a, b) = (x.coords(), y.coords());
        match self {
            Space::EuclidBall { .. } | Space::EuclidRect { .. } => a
                .iter()
                .zip(b)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt(),
            Space::Sphere { .. } => {
                let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                dot.clamp(-1.0, 1.0).acos()
            }
            Space::Cylinder { .. } => {
                let da = circle_dist(a[0], b[0]);
                let dh = a[1] - b[1];
                (da * da + dh * dh).sqrt()
            }
            Space::Torus2 => {
                let d0 = circle_dist(a[0], b[0]);
                let d1 = circle_dist(a[1], b[1]);
                (d0 * d0 + d1 * d1).sqrt()
            }
        }
    }

    /// Draw a point uniformly with respect to the volume/surface measure.
    pub fn sample_uniform_point(&self, g: &mut Generator) -> Point {
        match self {
            Space::EuclidBall { d, c_m } => {
                let dir = unit_vector(*d as usize, g);
                let radius = c_m * g.next_f64().powf(1.0 / *d as f64);
                Point(dir.into_iter().map(|x| x * radius).collect())
            }
            Space::EuclidRect { r } => Point(
                r.iter()
                    .map(|&rk| rk * (2.0 * g.next_f64() - 1.0))
                    .collect(),
            ),
            Space::Sphere { d } => Point(unit_vector(*d as usize + 1, g)),
            Space::Cylinder { h } => Point(vec![TAU * g.next_f64(), h * g.next_f64()]),
            Space::Torus2 => Point(vec![TAU * g.next_f64(), TAU * g.next_f64()]),
        }
    }

    /// A point at exactly `dist` from `anchor` along a canonical direction,
    /// used to build probe designs. Errors if the target leaves the space.
    pub fn point_at_distance(&self, anchor: &Point, dist: f64) -> Result<Point> {
        self.validate(anchor)?;
        if dist < 0.0 {
            return Err(Error::domain(format!(
                "distance {dist} must be nonnegative"
            )));
        }
        let p = match self {
            Space::EuclidBall { .. } | Space::EuclidRect { .. } => {
                let mut c = anchor.coords().to_vec();
                c[0] += dist;
                Point(c)
            }
            Space::Sphere { d } => {
                // Rotate along the great circle through anchor and a
                // direction orthogonal to it.
                let a = anchor.coords();
                let mut t = vec![0.0; *d as usize + 1];
                // Pick the axis least aligned with the anchor.
                let k = a
                    .iter()
                    .enumerate()
                    .min_by(|(_, u), (_, v)| u.abs().partial_cmp(&v.abs()).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                t[k] = 1.0;
                let dot: f64 = t.iter().zip(a).map(|(u, v)| u * v).sum();
                let mut orth: Vec<f64> = t.iter().zip(a).map(|(u, v)| u - dot * v).collect();
                let n = norm(&orth);
                orth.iter_mut().for_each(|x| *x /= n);
                Point(
                    a.iter()
                        .zip(&orth)
                        .map(|(&u, &v)| dist.cos() * u + dist.sin() * v)
                        .collect(),
                )
            }
            Space::Cylinder { h } => {
                let a = anchor.coords();
                if a[1] + dist <= *h {
                    Point(vec![a[0], a[1] + dist])
                } else {
                    Point(vec![(a[0] + dist) % TAU, a[1]])
                }
            }
            Space::Torus2 => {
                let a = anchor.coords();
                Point(vec![(a[0] + dist) % TAU, a[1]])
            }
        };
        self.validate(&p).map_err(|_| {
            Error::domain(format!(
                "no probe point at distance {dist} from the chosen anchor stays inside the space"
            ))
        })?;
        let got = self.distance_unchecked(anchor, &p);
        if (got - dist).abs() > 1e-9 * (1.0 + dist) {
            return Err(Error::domain(format!(
                "probe construction off target: wanted {dist}, got {got}"
            )));
        }
        Ok(p)
    }

    /// A canonical anchor with room for probes in every space.
    pub fn default_anchor(&self) -> Point {
        match self {
            Space::EuclidBall { d, c_m } => {
                let mut c = vec![0.0; *d as usize];
                c[0] = -0.9 * c_m;
                Point(c)
            }
            Space::EuclidRect { r } => {
                let mut c = vec![0.0; r.len()];
                c[0] = -0.9 * r[0];
                Point(c)
            }
            Space::Sphere { d } => {
                let mut c = vec![0.0; *d as usize + 1];
                c[*d as usize] = 1.0;
                Point(c)
            }
            Space::Cylinder { .. } => Point(vec![0.0, 0.0]),
            Space::Torus2 => Point(vec![0.0, 0.0]),
        }
    }
}

/// Uniform direction on the unit sphere in ℝ^n via normalized Gaussians.
pub fn unit_vector(n: usize, g: &mut Generator) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| standard_normal(g)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Uniform point in the origin-centered ball of the given radius in ℝ^d.
pub fn ball_point(d: usize, radius: f64, g: &mut Generator) -> Vec<f64> {
    let dir = unit_vector(d, g);
    let r = radius * g.next_f64().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}
