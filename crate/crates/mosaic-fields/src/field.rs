//! Field models and realizations.
//!
//! A realization stores the sampled set count, the set instances, and the
//! value streams needed by its submodel. Evaluation determines the cell
//! containing a query point (the index set of covering sets) and assembles
//! the field value from keyed substreams, so the 2^n cells are never
//! materialized and evaluation order never matters.

use rayon::prelude::*;

use crate::analytics;
use crate::dist::{CountDistribution, ValueDistribution};
use crate::error::{Error, Result};
use crate::rng::{Generator, StreamKey};
use crate::sets::{contains, SetFamily, SetInstance};
use crate::space::{Point, Space};

const TAG_COUNT: u8 = 1;
const TAG_SET: u8 = 2;
const TAG_TOKEN: u8 = 3;
const TAG_LEAF: u8 = 4;
const TAG_CELLS: u8 = 5;
const TAG_CELL_VALUE: u8 = 6;
const TAG_MIX: u8 = 7;
const TAG_LINEAR: u8 = 8;
const TAG_COPY: u8 = 9;

/// How cells are mapped to value-stream groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GKind {
    /// Every cell gets its own group (injective in the index set).
    Injective,
    /// All cells share one group.
    Constant,
    /// Cells are grouped by their highest covering set index (0 if none).
    MaxIndex,
}

/// The value-assembly rule of a mosaic random field.
#[derive(Clone, Debug)]
pub enum Submodel {
    /// One i.i.d. value per cell.
    SimpleMosaic,
    /// Sum of the values attached to the covering sets.
    RandomToken,
    /// Like the token field, but values are redrawn per cell.
    Mixture,
    /// Value of the latest covering set; a background value if none.
    DeadLeaves,
    /// Linear index family: the cell with covering sets `I` sums the
    /// members of a set family with
    /// `|members(I) ∩ members(J)| = a|I∩J| - b|IΔJ| + c_n`,
    /// where `c_n = max(c_min, n*b)`.
    GeneralLinear {
        a: i64,
        b: u64,
        c_min: u64,
        g: GKind,
    },
}

/// A complete field specification.
#[derive(Clone, Debug)]
pub struct FieldModel {
    pub space: Space,
    pub sets: SetFamily,
    pub count: CountDistribution,
    pub value: ValueDistribution,
    pub submodel: Submodel,
}

impl FieldModel {
    pub fn new(
        space: Space,
        sets: SetFamily,
        count: CountDistribution,
        value: ValueDistribution,
        submodel: Submodel,
    ) -> Result<Self> {
        sets.compatible_with(&space)?;
        if let Submodel::GeneralLinear { a, b, .. } = &submodel {
            if *a < -(*b as i64) {
                return Err(Error::config(format!(
                    "general linear family needs a >= -b, got a = {a}, b = {b}"
                )));
            }
        }
        Ok(FieldModel {
            space,
            sets,
            count,
            value,
            submodel,
        })
    }
}

/// Sorted, duplicate-free set of covering-set indices (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet(Vec<u64>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Build from a strictly increasing list.
    pub fn from_sorted(indices: Vec<u64>) -> Result<Self> {
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain(
                "index set must be strictly increasing".to_string(),
            ));
        }
        Ok(IndexSet(indices))
    }

    pub fn indices(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u64) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Highest index, or 0 for the empty set.
    pub fn max_or_zero(&self) -> u64 {
        self.0.last().copied().unwrap_or(0)
    }
}

/// The block construction realizing `|I_I ∩ I_J| = a|I∩J| - b|IΔJ| + c`.
///
/// Member ids are laid out as a shared block `A` of size `c - nb`, blocks
/// `B_i` of size `b` used by cells *not* containing `i`, and blocks `C_i`
/// of size `a + b` used by cells containing `i`.
#[derive(Clone, Debug)]
pub struct BlockFamily {
    n: u64,
    a: i64,
    b: u64,
    c: u64,
}

impl BlockFamily {
    pub fn new(n: u64, a: i64, b: u64, c: u64) -> Result<Self> {
        if a < -(b as i64) {
            return Err(Error::domain(format!(
                "linear family needs a >= -b, got a = {a}, b = {b}"
            )));
        }
        if c < n * b {
            return Err(Error::domain(format!(
                "linear family needs c >= n*b, got c = {c}, n*b = {}",
                n * b
            )));
        }
        Ok(BlockFamily { n, a, b, c })
    }

    /// Width of the per-index `C` blocks.
    fn c_block(&self) -> u64 {
        (self.a + self.b as i64) as u64
    }

    /// Member ids of the index family attached to the cell `idx`.
    pub fn members(&self, idx: &IndexSet) -> Vec<u64> {
        let shared = self.c - self.n * self.b;
        let b_base = shared;
        let c_base = self.c;
        let cb = self.c_block();
        let mut out = Vec::with_capacity(
            (shared + (self.n - idx.len() as u64) * self.b + idx.len() as u64 * cb) as usize,
        );
        out.extend(0..shared);
        for i in 1..=self.n {
            if !idx.contains(i) {
                let start = b_base + (i - 1) * self.b;
                out.extend(start..start + self.b);
            }
        }
        for &i in idx.indices() {
            let start = c_base + (i - 1) * cb;
            out.extend(start..start + cb);
        }
        out
    }

    /// `|members(I)| = a|I| + c`, without materializing the blocks.
    pub fn member_count(&self, idx: &IndexSet) -> u64 {
        (self.a * idx.len() as i64 + self.c as i64) as u64
    }
}

/// One frozen draw of a field model, evaluable at any point.
#[derive(Clone, Debug)]
pub struct Realization<'m> {
    model: &'m FieldModel,
    n: u64,
    instances: Vec<SetInstance>,
    token_values: Vec<f64>,
    leaf_values: Vec<f64>,
    cell_root: Generator,
}

/// Draw a realization. All randomness is derived from `g`'s identity, so
/// the same generator reproduces the same realization.
pub fn realize<'m>(model: &'m FieldModel, g: &Generator) -> Realization<'m> {
    let mut count_g = g.derive(&StreamKey::new(TAG_COUNT));
    let n = model.count.sample(&mut count_g);
    let instances = (1..=n)
        .map(|i| {
            let mut sg = g.derive(&StreamKey::new(TAG_SET).with_u64(i));
            model.sets.sample(&mut sg)
        })
        .collect();
    let token_values = if matches!(model.submodel, Submodel::RandomToken) {
        let mut tg = g.derive(&StreamKey::new(TAG_TOKEN));
        (0..n).map(|_| model.value.sample(&mut tg)).collect()
    } else {
        Vec::new()
    };
    let leaf_values = if matches!(model.submodel, Submodel::DeadLeaves) {
        let mut lg = g.derive(&StreamKey::new(TAG_LEAF));
        (0..=n).map(|_| model.value.sample(&mut lg)).collect()
    } else {
        Vec::new()
    };
    Realization {
        model,
        n,
        instances,
        token_values,
        leaf_values,
        cell_root: g.derive(&StreamKey::new(TAG_CELLS)),
    }
}

impl Realization<'_> {
    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn model(&self) -> &FieldModel {
        self.model
    }

    pub fn instances(&self) -> &[SetInstance] {
        &self.instances
    }

    /// Indices of the sets covering `x`; `x` lies in exactly this cell.
    pub fn membership_set(&self, x: &Point) -> IndexSet {
        IndexSet(
            self.instances
                .iter()
                .enumerate()
                .filter(|(_, s)| contains(s, x))
                .map(|(i, _)| i as u64 + 1)
                .collect(),
        )
    }

    /// Field value at `x`.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.model.space.validate(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    /// Field value at an already-validated point.
    pub fn evaluate_unchecked(&self, x: &Point) -> f64 {
        let idx = self.membership_set(x);
        match &self.model.submodel {
            Submodel::SimpleMosaic => {
                let key = StreamKey::new(TAG_CELL_VALUE).with_indices(idx.indices());
                self.model.value.sample(&mut self.cell_root.derive(&key))
            }
            Submodel::RandomToken => idx
                .indices()
                .iter()
                .map(|&i| self.token_values[(i - 1) as usize])
                .sum(),
            Submodel::Mixture => idx
                .indices()
                .iter()
                .map(|&i| {
                    let key = StreamKey::new(TAG_MIX)
                        .with_indices(idx.indices())
                        .with_u64(i);
                    self.model.value.sample(&mut self.cell_root.derive(&key))
                })
                .sum(),
            Submodel::DeadLeaves => self.leaf_values[idx.max_or_zero() as usize],
            Submodel::GeneralLinear { a, b, c_min, g } => {
                let c_n = (*c_min).max(self.n * b);
                let family = BlockFamily::new(self.n, *a, *b, c_n)
                    .expect("model construction enforces the family hypotheses");
                let group = match g {
                    GKind::Injective => StreamKey::new(TAG_LINEAR).with_indices(idx.indices()),
                    GKind::Constant => StreamKey::new(TAG_LINEAR),
                    GKind::MaxIndex => StreamKey::new(TAG_LINEAR).with_u64(idx.max_or_zero()),
                };
                family
                    .members(&idx)
                    .into_iter()
                    .map(|member| {
                        let key = group.clone().with_u64(member);
                        self.model.value.sample(&mut self.cell_root.derive(&key))
                    })
                    .sum()
            }
        }
    }
}

/// Standardized sum of `m` independent realizations at each point:
/// `(1/sqrt(m)) sum_k (Z_k(x) - mu(x)) / sigma(x)` with the analytic
/// marginal moments. Converges to a unit Gaussian as `m` grows.
pub fn normalized_sum(
    model: &FieldModel,
    m: u64,
    points: &[Point],
    g: &Generator,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::domain("normalized sum needs m >= 1".to_string()));
    }
    let standardize: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            model.space.validate(p)?;
            let (mean, var) = analytics::marginal_moments(model, p)?;
            if !(var > 0.0) || !var.is_finite() {
                return Err(Error::degenerate(format!(
                    "marginal variance {var} does not admit standardization"
                )));
            }
            Ok((mean, var.sqrt()))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0f64; points.len()];
    for k in 1..=m {
        let rg = g.derive(&StreamKey::new(TAG_COPY).with_u64(k));
        let r = realize(model, &rg);
        for (j, p) in points.iter().enumerate() {
            let (mu, sigma) = standardize[j];
            acc[j] += (r.evaluate_unchecked(p) - mu) / sigma;
        }
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok(acc.into_iter().map(|s| s * scale).collect())
}

/// Grid dimensions for rasterization.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
}

/// The grid point at raster position `(row, col)`.
///
/// Euclidean spaces use a Cartesian grid over the box (the inscribed
/// square for a ball), the sphere a longitude/latitude grid, the cylinder
/// an angle/height grid, and the torus the two angles. Cell centers are
/// used so every raster point is interior.
pub fn grid_point(space: &Space, grid: &GridSpec, row: usize, col: usize) -> Result<Point> {
    let fx = (col as f64 + 0.5) / grid.width as f64;
    let fy = (row as f64 + 0.5) / grid.height as f64;
    let tau = 2.0 * std::f64::consts::PI;
    let p = match space {
        Space::EuclidRect { r } => {
            if r.len() != 2 {
                return Err(Error::unsupported(
                    "rasters need a two-dimensional space".to_string(),
                ));
            }
            Point(vec![-r[0] + 2.0 * r[0] * fx, r[1] - 2.0 * r[1] * fy])
        }
        Space::EuclidBall { d, c_m } => {
            if *d != 2 {
                return Err(Error::unsupported(
                    "rasters need a two-dimensional space".to_string(),
                ));
            }
            let s = c_m / std::f64::consts::SQRT_2;
            Point(vec![-s + 2.0 * s * fx, s - 2.0 * s * fy])
        }
        Space::Sphere { d } => {
            if *d != 2 {
                return Err(Error::unsupported(
                    "rasters need the two-sphere".to_string(),
                ));
            }
            let lon = tau * fx;
            let lat = std::f64::consts::FRAC_PI_2 - std::f64::consts::PI * fy;
            Point(vec![
                lat.cos() * lon.cos(),
                lat.cos() * lon.sin(),
                lat.sin(),
            ])
        }
        Space::Cylinder { h } => Point(vec![tau * fx, h * (1.0 - fy)]),
        Space::Torus2 => Point(vec![tau * fx, tau * fy]),
    };
    space.validate(&p)?;
    Ok(p)
}

/// Evaluate one realization of the model on a grid; deterministic in the
/// generator. Returns `height` rows of `width` values.
pub fn raster(model: &FieldModel, grid: &GridSpec, g: &Generator) -> Result<Vec<Vec<f64>>> {
    if grid.width == 0 || grid.height == 0 {
        return Err(Error::config("raster grid must be nonempty".to_string()));
    }
    // Probe one point up front so grid/space mismatches fail early.
    grid_point(&model.space, grid, 0, 0)?;
    let r = realize(model, g);
    (0..grid.height)
        .into_par_iter()
        .map(|row| {
            (0..grid.width)
                .map(|col| {
                    let p = grid_point(&model.space, grid, row, col)?;
                    Ok(r.evaluate_unchecked(&p))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}
