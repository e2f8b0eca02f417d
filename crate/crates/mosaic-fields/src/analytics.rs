//! Closed-form moments and correlation functions, the exact small-n
//! enumeration oracle, and the catalog of named correlation models.
//!
//! All second-order structure of a mosaic field enters through the triple
//! `(p_x, p_y, p_xy)` of hit probabilities, the count law's generating
//! function, and the linear index-family profile `f(i, j) = a i - b j + c`.
//! The closed forms here are exact; the enumeration oracle recomputes the
//! same moments by brute force over all pairs of cells and is the ground
//! truth the closed forms are tested against.

pub mod catalog;

use crate::dist::{CountDistribution, ValueDistribution};
use crate::error::{Error, Result};
use crate::field::{BlockFamily, FieldModel, GKind, IndexSet, Submodel};
use crate::space::Point;

/// Linear index-family profile `f(i, j) = a i - b j + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearF {
    pub a: i64,
    pub b: u64,
    pub c: u64,
}

impl LinearF {
    pub fn new(a: i64, b: u64, c: u64) -> Result<Self> {
        if a < -(b as i64) {
            return Err(Error::domain(format!(
                "linear profile needs a >= -b, got a = {a}, b = {b}"
            )));
        }
        Ok(LinearF { a, b, c })
    }

    /// `f(i, j)`; nonnegative whenever `i + j <= n` and `c >= n b`.
    pub fn eval(&self, i: u64, j: u64) -> i64 {
        self.a * i as i64 - self.b as i64 * j as i64 + self.c as i64
    }
}

/// The `(f, g)` pair realized by each built-in submodel with a constant
/// profile; `None` when the profile depends on the realized count.
pub fn submodel_profile(submodel: &Submodel) -> Option<(LinearF, GKind)> {
    match submodel {
        Submodel::SimpleMosaic => Some((LinearF { a: 0, b: 0, c: 1 }, GKind::Injective)),
        Submodel::RandomToken => Some((LinearF { a: 1, b: 0, c: 0 }, GKind::Constant)),
        Submodel::Mixture => Some((LinearF { a: 1, b: 0, c: 0 }, GKind::Injective)),
        Submodel::DeadLeaves => Some((LinearF { a: 0, b: 0, c: 1 }, GKind::MaxIndex)),
        Submodel::GeneralLinear { a, b, c_min, g } => {
            if *b == 0 {
                Some((
                    LinearF {
                        a: *a,
                        b: 0,
                        c: *c_min,
                    },
                    *g,
                ))
            } else {
                None
            }
        }
    }
}

/// First and second-order moments of a field at a point pair.
#[derive(Clone, Copy, Debug)]
pub struct MomentReport {
    pub mean_x: f64,
    pub mean_y: f64,
    pub mixed_moment: f64,
    pub covariance: f64,
    pub correlation: f64,
}

fn validate_probs(px: f64, py: f64, pxy: f64) -> Result<()> {
    const EPS: f64 = 1e-12;
    if !(0.0..=1.0).contains(&px) || !(0.0..=1.0).contains(&py) {
        return Err(Error::domain(format!(
            "hit probabilities outside [0, 1]: p_x = {px}, p_y = {py}"
        )));
    }
    if pxy > px.min(py) + EPS || pxy < (px + py - 1.0).max(0.0) - EPS {
        return Err(Error::domain(format!(
            "inconsistent hit probabilities: p_xy = {pxy} outside [max(0, p_x+p_y-1), min(p_x, p_y)] for p_x = {px}, p_y = {py}"
        )));
    }
    Ok(())
}

/// pgf argument for the pair `(p_x, p_y, p_xy)`, clamped into [-1, 1].
fn theta(px: f64, py: f64, pxy: f64) -> f64 {
    (1.0 + 2.0 * pxy - px - py).clamp(-1.0, 1.0)
}

/// `E Z(x) = E U (a E N p_x + c)` for the profile `f`.
///
/// Infinite when the count has no mean and `a != 0`.
pub fn mean_general(
    f: &LinearF,
    count: &CountDistribution,
    p_x: f64,
    value: &ValueDistribution,
) -> f64 {
    let base = if f.a == 0 {
        f.c as f64
    } else {
        f.a as f64 * count.mean() * p_x + f.c as f64
    };
    value.mean() * base
}

/// `G_xy` in closed form, per grouping kind. `None` when no closed form
/// applies to this `(f, g)` pair.
fn closed_gxy(
    f: &LinearF,
    g: GKind,
    count: &CountDistribution,
    px: f64,
    py: f64,
    pxy: f64,
) -> Result<Option<f64>> {
    let th = theta(px, py, pxy);
    Ok(match g {
        GKind::Constant => Some(0.0),
        GKind::Injective => {
            // E f(V1, V2+V3) minus the diagonal I = J contribution
            // a p_xy psi'(th) + c psi(th).
            let (a, b, c) = (f.a as f64, f.b as f64, f.c as f64);
            let mut all_pairs = c;
            if f.a != 0 {
                all_pairs += a * count.mean() * pxy;
            }
            if f.b != 0 {
                all_pairs -= b * count.mean() * (px + py - 2.0 * pxy);
            }
            let diag = a * pxy * count.pgf_derivative(th)? + c * count.pgf(th)?;
            if !all_pairs.is_finite() || !diag.is_finite() {
                return Err(Error::degenerate(
                    "the count law has no finite mean; the grouped moment is undefined".to_string(),
                ));
            }
            Some(all_pairs - diag)
        }
        GKind::MaxIndex => {
            if f.a != 0 || f.b != 0 {
                None
            } else {
                // Constant profile c: the same-group mass follows the
                // recursion A_{n+1} = s A_n + p_xy with s = P(x,y not in B).
                let s = (1.0 - px - py + pxy).clamp(0.0, 1.0);
                let denom = px + py - pxy;
                if denom <= 0.0 {
                    return Err(Error::degenerate(
                        "max-index grouping needs p_x + p_y - p_xy > 0".to_string(),
                    ));
                }
                Some(f.c as f64 * (px + py - 2.0 * pxy) * (1.0 - count.pgf(s)?) / denom)
            }
        }
    })
}

/// Closed-form mixed moment `E Z(x) Z(y)`; `None` if the `(f, g)` pair has
/// no closed `G_xy`.
fn closed_mixed(
    f: &LinearF,
    g: GKind,
    count: &CountDistribution,
    px: f64,
    py: f64,
    pxy: f64,
    value: &ValueDistribution,
) -> Result<Option<f64>> {
    let gxy = match closed_gxy(f, g, count, px, py, pxy)? {
        Some(v) => v,
        None => return Ok(None),
    };
    let (a, c) = (f.a as f64, f.c as f64);
    let (eu, var_u) = (value.mean(), value.variance());

    // Var U * E f(V1, V2 + V3): linear in the multinomial components.
    let mut term1 = c;
    if f.a != 0 {
        term1 += a * count.mean() * pxy;
    }
    if f.b != 0 {
        term1 -= f.b as f64 * count.mean() * (px + py - 2.0 * pxy);
    }

    // (E U)^2 * E f(V1+V2, 0) f(V1+V3, 0): bilinear, via the standard
    // multinomial product moments E S_x S_y = E N p_xy + E N(N-1) p_x p_y.
    let mut term2 = c * c;
    if f.a != 0 {
        let en = count.mean();
        let en2 = count.variance() + en * en;
        let cross = en * pxy + (en2 - en) * px * py;
        term2 += a * a * cross + a * c * en * (px + py);
    }
    let total = var_u * term1 + eu * eu * term2 - gxy * var_u;
    if !total.is_finite() {
        return Err(Error::degenerate(
            "the count law lacks the moments required by this profile".to_string(),
        ));
    }
    Ok(Some(total))
}

/// Full moment report for a linear profile and grouping, using closed
/// forms when available and the exact enumeration mixture otherwise.
pub fn mixed_moment_general(
    f: &LinearF,
    g: GKind,
    count: &CountDistribution,
    px: f64,
    py: f64,
    pxy: f64,
    value: &ValueDistribution,
) -> Result<MomentReport> {
    validate_probs(px, py, pxy)?;
    let closed = |px: f64, py: f64, pxy: f64| closed_mixed(f, g, count, px, py, pxy, value);
    let all = (
        closed(px, py, pxy)?,
        closed(px, px, px)?,
        closed(py, py, py)?,
    );
    let (exy, exx, eyy) = match all {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            let mix = oracle_mixture(count, |_| Ok(*f), g, px, py, pxy, value)?;
            return Ok(mix);
        }
    };
    let mean_x = mean_general(f, count, px, value);
    let mean_y = mean_general(f, count, py, value);
    if !mean_x.is_finite() || !mean_y.is_finite() {
        return Err(Error::degenerate(
            "the field mean is not finite".to_string(),
        ));
    }
    Ok(assemble_report(mean_x, mean_y, exy, exx, eyy))
}

fn assemble_report(mean_x: f64, mean_y: f64, exy: f64, exx: f64, eyy: f64) -> MomentReport {
    let covariance = exy - mean_x * mean_y;
    let var_x = exx - mean_x * mean_x;
    let var_y = eyy - mean_y * mean_y;
    let correlation = if var_x > 0.0 && var_y > 0.0 {
        covariance / (var_x * var_y).sqrt()
    } else {
        f64::NAN
    };
    MomentReport {
        mean_x,
        mean_y,
        mixed_moment: exy,
        covariance,
        correlation,
    }
}

/// Correlation of the simple mosaic field:
/// `psi_N(1 + 2 p_xy - p_x - p_y)`.
pub fn corr_simple(px: f64, py: f64, pxy: f64, count: &CountDistribution) -> Result<f64> {
    validate_probs(px, py, pxy)?;
    count.pgf(theta(px, py, pxy))
}

/// Correlation of the random token field:
/// `(a p_xy + b p_x p_y) / sqrt((a + b p_x)(a + b p_y) p_x p_y)` with
/// `a = E U^2 E N` and `b = (E U)^2 (Var N - E N)`.
pub fn corr_token(
    px: f64,
    py: f64,
    pxy: f64,
    count: &CountDistribution,
    value: &ValueDistribution,
) -> Result<f64> {
    validate_probs(px, py, pxy)?;
    let (en, varn) = (count.mean(), count.variance());
    if !en.is_finite() || !varn.is_finite() || en <= 0.0 {
        return Err(Error::degenerate(
            "token correlation needs a count law with finite positive mean and variance"
                .to_string(),
        ));
    }
    let a = value.second_moment() * en;
    let b = value.mean() * value.mean() * (varn - en);
    let denom_sq = (a + b * px) * (a + b * py) * px * py;
    if !(denom_sq > 0.0) {
        return Err(Error::degenerate(
            "token correlation has a vanishing denominator".to_string(),
        ));
    }
    Ok((a * pxy + b * px * py) / denom_sq.sqrt())
}

/// Correlation of the mixture field:
/// the token correlation plus
/// `p_xy (Var U psi_N'(th) - Var U E N) / sqrt((a + b p_x)(a + b p_y) p_x p_y)`.
pub fn corr_mixture(
    px: f64,
    py: f64,
    pxy: f64,
    count: &CountDistribution,
    value: &ValueDistribution,
) -> Result<f64> {
    let token = corr_token(px, py, pxy, count, value)?;
    let en = count.mean();
    let a = value.second_moment() * en;
    let b = value.mean() * value.mean() * (count.variance() - en);
    let denom = ((a + b * px) * (a + b * py) * px * py).sqrt();
    let cvar = value.variance();
    let extra = pxy * (cvar * count.pgf_derivative(theta(px, py, pxy))? - cvar * en) / denom;
    Ok(extra + token)
}

/// Correlation of the dead leaves field:
/// `(p_xy + (p_x + p_y - 2 p_xy) psi_N(1 - p_x - p_y + p_xy)) / (p_x + p_y - p_xy)`.
pub fn corr_deadleaves(px: f64, py: f64, pxy: f64, count: &CountDistribution) -> Result<f64> {
    validate_probs(px, py, pxy)?;
    let denom = px + py - pxy;
    if denom <= 0.0 {
        return Err(Error::degenerate(
            "dead leaves correlation needs p_x + p_y - p_xy > 0".to_string(),
        ));
    }
    let s = (1.0 - px - py + pxy).clamp(0.0, 1.0);
    Ok((pxy + (px + py - 2.0 * pxy) * count.pgf(s)?) / denom)
}

/// Hard cap for the exact enumeration (4^n pairs of cells).
pub const ORACLE_MAX_N: u64 = 14;

/// Exact conditional moments given `N = n`, by summing over all pairs of
/// cells. Ground truth for the closed forms; cost grows as 4^n.
pub fn enumerate_oracle(
    n: u64,
    f: &LinearF,
    g: GKind,
    px: f64,
    py: f64,
    pxy: f64,
    value: &ValueDistribution,
) -> Result<MomentReport> {
    validate_probs(px, py, pxy)?;
    if n > ORACLE_MAX_N {
        return Err(Error::Budget(format!(
            "enumeration needs 4^{n} terms; the cap is n = {ORACLE_MAX_N}"
        )));
    }
    let mean_x = oracle_mean(n, f, px, value);
    let mean_y = oracle_mean(n, f, py, value);
    let exy = oracle_mixed(n, f, g, px, py, pxy, value);
    let exx = oracle_mixed(n, f, g, px, px, px, value);
    let eyy = oracle_mixed(n, f, g, py, py, py, value);
    Ok(assemble_report(mean_x, mean_y, exy, exx, eyy))
}

/// Neumaier compensated accumulator; the enumeration sums up to 4^14
/// terms and plain summation would eat the 1e-12 agreement budget.
#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn oracle_mean(n: u64, f: &LinearF, px: f64, value: &ValueDistribution) -> f64 {
    let n = n as u32;
    let mut acc = Kahan::default();
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as u64;
        let weight = px.powi(k as i32) * (1.0 - px).powi((n as u64 - k) as i32);
        acc.add(weight * f.eval(k, 0) as f64);
    }
    value.mean() * acc.value()
}

fn oracle_mixed(
    n: u64,
    f: &LinearF,
    g: GKind,
    px: f64,
    py: f64,
    pxy: f64,
    value: &ValueDistribution,
) -> f64 {
    let n = n as u32;
    let p1 = pxy.max(0.0);
    let p2 = (px - pxy).max(0.0);
    let p3 = (py - pxy).max(0.0);
    let p4 = (1.0 - px - py + pxy).max(0.0);
    let pow = |base: f64| -> Vec<f64> {
        (0..=n)
            .scan(1.0, |acc, _| {
                let out = *acc;
                *acc *= base;
                Some(out)
            })
            .collect()
    };
    let (t1, t2, t3, t4) = (pow(p1), pow(p2), pow(p3), pow(p4));
    let (eu, eu2) = (value.mean(), value.second_moment());
    let same_group = |i: u32, j: u32| match g {
        GKind::Injective => i == j,
        GKind::Constant => true,
        GKind::MaxIndex => {
            let hi = |m: u32| if m == 0 { 0 } else { 32 - m.leading_zeros() };
            hi(i) == hi(j)
        }
    };
    let mut acc = Kahan::default();
    for i in 0u32..(1 << n) {
        let fi = f.eval(i.count_ones() as u64, 0) as f64;
        for j in 0u32..(1 << n) {
            let both = (i & j).count_ones();
            let only_i = (i & !j).count_ones();
            let only_j = (j & !i).count_ones();
            let neither = n - both - only_i - only_j;
            let weight = t1[both as usize]
                * t2[only_i as usize]
                * t3[only_j as usize]
                * t4[neither as usize];
            if weight == 0.0 {
                continue;
            }
            let fj = f.eval(j.count_ones() as u64, 0) as f64;
            let fij = f.eval(both as u64, (only_i + only_j) as u64) as f64;
            let uu = eu * eu * (fi * fj - fij)
                + if same_group(i, j) {
                    eu2 * fij
                } else {
                    eu * eu * fij
                };
            acc.add(weight * uu);
        }
    }
    acc.value()
}

/// Mixture of enumeration oracles over the count law, truncated at the
/// `1 - 1e-10` quantile. The profile may depend on `n`.
pub fn oracle_mixture(
    count: &CountDistribution,
    profile: impl Fn(u64) -> Result<LinearF>,
    g: GKind,
    px: f64,
    py: f64,
    pxy: f64,
    value: &ValueDistribution,
) -> Result<MomentReport> {
    let max_n = count.quantile(1.0 - 1e-10).ok_or_else(|| {
        Error::Budget("the count law has no practical truncation point for enumeration".to_string())
    })?;
    if max_n > ORACLE_MAX_N {
        return Err(Error::Budget(format!(
            "enumeration mixture would need n up to {max_n}; the cap is {ORACLE_MAX_N}"
        )));
    }
    let (mut mean_x, mut mean_y) = (0.0, 0.0);
    let (mut exy, mut exx, mut eyy) = (0.0, 0.0, 0.0);
    for n in 0..=max_n {
        let w = count.pmf(n)?;
        if w == 0.0 {
            continue;
        }
        let f = profile(n)?;
        mean_x += w * oracle_mean(n, &f, px, value);
        mean_y += w * oracle_mean(n, &f, py, value);
        exy += w * oracle_mixed(n, &f, g, px, py, pxy, value);
        exx += w * oracle_mixed(n, &f, g, px, px, px, value);
        eyy += w * oracle_mixed(n, &f, g, py, py, py, value);
    }
    Ok(assemble_report(mean_x, mean_y, exy, exx, eyy))
}

/// Marginal mean and variance of `Z(x)`.
pub fn marginal_moments(model: &FieldModel, x: &Point) -> Result<(f64, f64)> {
    let px = model.sets.hit_prob_single(x)?;
    let report = pair_moments(model, px, px, px)?;
    Ok((
        report.mean_x,
        report.mixed_moment - report.mean_x * report.mean_x,
    ))
}

/// Moment report for a model at hit probabilities `(p_x, p_y, p_xy)`.
fn pair_moments(model: &FieldModel, px: f64, py: f64, pxy: f64) -> Result<MomentReport> {
    match &model.submodel {
        Submodel::GeneralLinear { a, b, c_min, g } if *b > 0 => {
            // The shared-block size grows with n; only enumeration handles
            // a random count, while a deterministic count stays closed.
            if let CountDistribution::Deterministic { n } = model.count {
                let f = LinearF::new(*a, *b, (*c_min).max(n * b))?;
                mixed_moment_general(&f, *g, &model.count, px, py, pxy, &model.value)
            } else {
                oracle_mixture(
                    &model.count,
                    |n| LinearF::new(*a, *b, (*c_min).max(n * b)),
                    *g,
                    px,
                    py,
                    pxy,
                    &model.value,
                )
            }
        }
        submodel => {
            let (f, g) = submodel_profile(submodel).expect("constant profile");
            mixed_moment_general(&f, g, &model.count, px, py, pxy, &model.value)
        }
    }
}

/// Analytic correlation of a field model between two points, routed
/// through the hit probabilities of its set family.
pub fn model_correlation(model: &FieldModel, x: &Point, y: &Point) -> Result<f64> {
    let px = model.sets.hit_prob_single(x)?;
    let py = model.sets.hit_prob_single(y)?;
    let pxy = model.sets.hit_prob_pair(x, y)?;
    match &model.submodel {
        Submodel::SimpleMosaic => corr_simple(px, py, pxy, &model.count),
        Submodel::RandomToken => corr_token(px, py, pxy, &model.count, &model.value),
        Submodel::Mixture => corr_mixture(px, py, pxy, &model.count, &model.value),
        Submodel::DeadLeaves => corr_deadleaves(px, py, pxy, &model.count),
        Submodel::GeneralLinear { .. } => Ok(pair_moments(model, px, py, pxy)?.correlation),
    }
}

/// Exact intersection sizes from the explicit block construction, for
/// cross-checking the linear profile (test support).
pub fn block_intersection(
    n: u64,
    a: i64,
    b: u64,
    c: u64,
    i: &IndexSet,
    j: &IndexSet,
) -> Result<u64> {
    let fam = BlockFamily::new(n, a, b, c)?;
    let mi = fam.members(i);
    let mj: std::collections::HashSet<u64> = fam.members(j).into_iter().collect();
    Ok(mi.iter().filter(|m| mj.contains(m)).count() as u64)
}
