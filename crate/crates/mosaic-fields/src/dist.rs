//! Count, value, and radius laws.
//!
//! [`CountDistribution`] is the law of the number of random sets and
//! exposes exactly the functionals the closed-form correlation formulas
//! consume: probability generating function, its derivative, mean,
//! variance, and sampling. [`ValueDistribution`] is the law of the i.i.d.
//! value streams. [`RadiusLaw`] covers the set radius/diameter laws that
//! admit closed-form hit probabilities.

use crate::error::{Error, Result};
use crate::rng::Generator;
use crate::special::ln_gamma;

/// Hard cap on tabulated supports (heavy-tailed laws are lumped here).
const TABLE_CAP: usize = 1_000_000;
const TAIL_EPS: f64 = 1e-12;

/// Law of the set count `N` on the nonnegative integers.
#[derive(Clone)]
pub enum CountDistribution {
    /// Poisson with rate `lambda > 0`.
    Poisson { lambda: f64 },
    /// Geometric on {1, 2, ...} (trials until first success), `p` in (0, 1].
    Geometric { p: f64 },
    /// Binomial with `n` trials and success probability `p`.
    Binomial { n: u64, p: f64 },
    /// Negative binomial on {0, 1, ...} with pgf `(p / (1 - (1-p) t))^r`.
    NegativeBinomial { r: f64, p: f64 },
    /// Law on {1, 2, ...} with pgf `1 - (1-t)^alpha`; heavy-tailed for
    /// `alpha < 1`. Sampling uses a truncated inverse-CDF table with the
    /// tail mass lumped into the last bucket.
    PowerAlpha {
        alpha: f64,
        cdf: std::sync::Arc<Vec<f64>>,
    },
    /// `N = sum of L i.i.d. copies of K`; pgf is the composition.
    Compound {
        outer: Box<CountDistribution>,
        inner: Box<CountDistribution>,
    },
    /// Point mass at `n`.
    Deterministic { n: u64 },
    /// Finite table `pmf[k] = P(N = k)`, normalized at construction.
    Table {
        pmf: std::sync::Arc<Vec<f64>>,
        cdf: std::sync::Arc<Vec<f64>>,
    },
}

impl CountDistribution {
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::config(format!(
                "poisson: lambda = {lambda} must be positive"
            )));
        }
        Ok(CountDistribution::Poisson { lambda })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::config(format!("geometric: p = {p} outside (0, 1]")));
        }
        Ok(CountDistribution::Geometric { p })
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("binomial: n must be at least 1".to_string()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::config(format!("binomial: p = {p} outside (0, 1]")));
        }
        Ok(CountDistribution::Binomial { n, p })
    }

    pub fn negative_binomial(r: f64, p: f64) -> Result<Self> {
        if !(r > 0.0) || !(p > 0.0 && p < 1.0) {
            return Err(Error::config(format!(
                "negative binomial: need r > 0 and p in (0, 1), got r = {r}, p = {p}"
            )));
        }
        Ok(CountDistribution::NegativeBinomial { r, p })
    }

    /// Law with pgf `1 - (1-t)^alpha`, `alpha` in (0, 1].
    ///
    /// The pmf is `p_1 = alpha`, `p_{k+1} = p_k (k - alpha) / (k + 1)`.
    pub fn power_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!(
                "power_alpha: alpha = {alpha} outside (0, 1]"
            )));
        }
        let mut cdf = Vec::new();
        let mut p = alpha;
        let mut cum = 0.0f64;
        let mut comp = 0.0f64; // Kahan compensation
        let mut k = 1usize;
        loop {
            let y = p - comp;
            let t = cum + y;
            comp = (t - cum) - y;
            cum = t;
            cdf.push(cum);
            if 1.0 - cum < TAIL_EPS || k >= TABLE_CAP {
                break;
            }
            p *= (k as f64 - alpha) / (k as f64 + 1.0);
            k += 1;
        }
        // Lump the remaining tail into the last bucket.
        *cdf.last_mut().unwrap() = 1.0;
        Ok(CountDistribution::PowerAlpha {
            alpha,
            cdf: std::sync::Arc::new(cdf),
        })
    }

    pub fn compound(outer: CountDistribution, inner: CountDistribution) -> Self {
        CountDistribution::Compound {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn deterministic(n: u64) -> Self {
        CountDistribution::Deterministic { n }
    }

    /// Normalized finite table on {0, ..., len-1}.
    pub fn table(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::config(
                "table: weights must be nonnegative and finite".to_string(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::config("table: weights sum to zero".to_string()));
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut cum = 0.0;
        for &p in &pmf {
            cum += p;
            cdf.push(cum);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(CountDistribution::Table {
            pmf: std::sync::Arc::new(pmf),
            cdf: std::sync::Arc::new(cdf),
        })
    }

    /// Probability generating function `E t^N` for `t` in [-1, 1].
    pub fn pgf(&self, t: f64) -> Result<f64> {
        check_pgf_arg(t)?;
        Ok(self.pgf_unchecked(t))
    }

    fn pgf_unchecked(&self, t: f64) -> f64 {
        match self {
            CountDistribution::Poisson { lambda } => (lambda * (t - 1.0)).exp(),
            CountDistribution::Geometric { p } => p * t / (1.0 - (1.0 - p) * t),
            CountDistribution::Binomial { n, p } => (1.0 - p + p * t).powi(*n as i32),
            CountDistribution::NegativeBinomial { r, p } => (p / (1.0 - (1.0 - p) * t)).powf(*r),
            CountDistribution::PowerAlpha { alpha, .. } => 1.0 - (1.0 - t).powf(*alpha),
            CountDistribution::Compound { outer, inner } => {
                outer.pgf_unchecked(inner.pgf_unchecked(t))
            }
            CountDistribution::Deterministic { n } => t.powi(*n as i32),
            CountDistribution::Table { pmf, .. } => {
                // Horner over the finite support.
                pmf.iter().rev().fold(0.0, |acc, &p| acc * t + p)
            }
        }
    }

    /// Derivative of the pgf; `pgf_derivative(1)` is the mean (possibly
    /// infinite for heavy-tailed laws).
    pub fn pgf_derivative(&self, t: f64) -> Result<f64> {
        check_pgf_arg(t)?;
        Ok(self.pgf_derivative_unchecked(t))
    }

    fn pgf_derivative_unchecked(&self, t: f64) -> f64 {
        match self {
            CountDistribution::Poisson { lambda } => lambda * (lambda * (t - 1.0)).exp(),
            CountDistribution::Geometric { p } => {
                let q = 1.0 - p;
                p / ((1.0 - q * t) * (1.0 - q * t))
            }
            CountDistribution::Binomial { n, p } => {
                *n as f64 * p * (1.0 - p + p * t).powi(*n as i32 - 1)
            }
            CountDistribution::NegativeBinomial { r, p } => {
                let q = 1.0 - p;
                r * q * p.powf(*r) / (1.0 - q * t).powf(r + 1.0)
            }
            CountDistribution::PowerAlpha { alpha, .. } => alpha * (1.0 - t).powf(alpha - 1.0),
            CountDistribution::Compound { outer, inner } => {
                outer.pgf_derivative_unchecked(inner.pgf_unchecked(t))
                    * inner.pgf_derivative_unchecked(t)
            }
            CountDistribution::Deterministic { n } => {
                if *n == 0 {
                    0.0
                } else {
                    *n as f64 * t.powi(*n as i32 - 1)
                }
            }
            CountDistribution::Table { pmf, .. } => pmf
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &p)| acc * t + k as f64 * p),
        }
    }

    /// `E N`; `f64::INFINITY` for heavy-tailed laws.
    pub fn mean(&self) -> f64 {
        match self {
            CountDistribution::Poisson { lambda } => *lambda,
            CountDistribution::Geometric { p } => 1.0 / p,
            CountDistribution::Binomial { n, p } => *n as f64 * p,
            CountDistribution::NegativeBinomial { r, p } => r * (1.0 - p) / p,
            CountDistribution::PowerAlpha { alpha, .. } => {
                if *alpha >= 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            CountDistribution::Compound { outer, inner } => {
                let m = outer.mean();
                if m == 0.0 {
                    0.0
                } else {
                    m * inner.mean()
                }
            }
            CountDistribution::Deterministic { n } => *n as f64,
            CountDistribution::Table { pmf, .. } => {
                pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
            }
        }
    }

    /// `Var N`; `f64::INFINITY` for heavy-tailed laws.
    pub fn variance(&self) -> f64 {
        match self {
            CountDistribution::Poisson { lambda } => *lambda,
            CountDistribution::Geometric { p } => (1.0 - p) / (p * p),
            CountDistribution::Binomial { n, p } => *n as f64 * p * (1.0 - p),
            CountDistribution::NegativeBinomial { r, p } => r * (1.0 - p) / (p * p),
            CountDistribution::PowerAlpha { alpha, .. } => {
                if *alpha >= 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CountDistribution::Compound { outer, inner } => {
                let (ml, vl) = (outer.mean(), outer.variance());
                let (mk, vk) = (inner.mean(), inner.variance());
                if ml == 0.0 && vl == 0.0 {
                    return 0.0;
                }
                ml * vk + vl * mk * mk
            }
            CountDistribution::Deterministic { .. } => 0.0,
            CountDistribution::Table { pmf, .. } => {
                let m: f64 = pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
                let m2: f64 = pmf
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (k as f64) * (k as f64) * p)
                    .sum();
                m2 - m * m
            }
        }
    }

    /// `P(N = k)`. Unavailable for compound laws.
    pub fn pmf(&self, k: u64) -> Result<f64> {
        Ok(match self {
            CountDistribution::Poisson { lambda } => {
                (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
            }
            CountDistribution::Geometric { p } => {
                if k == 0 {
                    0.0
                } else {
                    p * (1.0 - p).powi(k as i32 - 1)
                }
            }
            CountDistribution::Binomial { n, p } => {
                if k > *n {
                    0.0
                } else {
                    let (nf, kf) = (*n as f64, k as f64);
                    let choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
                    choose.exp() * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
                }
            }
            CountDistribution::NegativeBinomial { r, p } => {
                let kf = k as f64;
                (ln_gamma(kf + r) - ln_gamma(*r) - ln_gamma(kf + 1.0)
                    + r * p.ln()
                    + kf * (1.0 - p).ln())
                .exp()
            }
            CountDistribution::PowerAlpha { alpha, .. } => {
                if k == 0 {
                    0.0
                } else {
                    let mut p = *alpha;
                    for j in 1..k {
                        p *= (j as f64 - alpha) / (j as f64 + 1.0);
                    }
                    p
                }
            }
            CountDistribution::Compound { .. } => {
                return Err(Error::unsupported(
                    "pmf of a compound count law is not available in closed form".to_string(),
                ))
            }
            CountDistribution::Deterministic { n } => {
                if k == *n {
                    1.0
                } else {
                    0.0
                }
            }
            CountDistribution::Table { pmf, .. } => pmf.get(k as usize).copied().unwrap_or(0.0),
        })
    }

    /// Smallest `n` with `P(N <= n) >= q`, or `None` when no practical
    /// bound exists (heavy tails, compounds).
    pub fn quantile(&self, q: f64) -> Option<u64> {
        match self {
            CountDistribution::Deterministic { n } => Some(*n),
            CountDistribution::Binomial { n, .. } => Some(*n),
            CountDistribution::Table { pmf, .. } => Some(pmf.len() as u64 - 1),
            CountDistribution::Geometric { p } => {
                if *p >= 1.0 {
                    Some(1)
                } else {
                    Some(((1.0 - q).ln() / (1.0 - p).ln()).ceil().max(1.0) as u64)
                }
            }
            CountDistribution::Poisson { .. } | CountDistribution::NegativeBinomial { .. } => {
                let mut cum = 0.0;
                for k in 0..100_000u64 {
                    cum += self.pmf(k).ok()?;
                    if cum >= q {
                        return Some(k);
                    }
                }
                None
            }
            CountDistribution::PowerAlpha { alpha, cdf } => {
                if *alpha >= 1.0 {
                    return Some(1);
                }
                let pos = cdf.partition_point(|&c| c < q);
                if pos + 1 < cdf.len() {
                    Some(pos as u64 + 1)
                } else {
                    None
                }
            }
            CountDistribution::Compound { .. } => None,
        }
    }

    /// Truncate to {0, ..., max_n} and renormalize into a table law.
    pub fn truncated(&self, max_n: u64) -> Result<CountDistribution> {
        let weights: Vec<f64> = (0..=max_n).map(|k| self.pmf(k)).collect::<Result<_>>()?;
        CountDistribution::table(&weights)
    }

    /// Draw one count.
    pub fn sample(&self, g: &mut Generator) -> u64 {
        match self {
            CountDistribution::Poisson { lambda } => sample_poisson(*lambda, g),
            CountDistribution::Geometric { p } => {
                if *p >= 1.0 {
                    return 1;
                }
                let u = 1.0 - g.next_f64(); // in (0, 1]
                let k = (u.ln() / (1.0 - p).ln()).ceil();
                (k.max(1.0)) as u64
            }
            CountDistribution::Binomial { n, p } => {
                (0..*n).filter(|_| g.next_f64() < *p).count() as u64
            }
            CountDistribution::NegativeBinomial { r, p } => {
                // Gamma-Poisson mixture.
                let scale = (1.0 - p) / p;
                let lambda = sample_gamma(*r, g) * scale;
                sample_poisson(lambda, g)
            }
            CountDistribution::PowerAlpha { cdf, .. } => {
                let u = g.next_f64();
                cdf.partition_point(|&c| c <= u) as u64 + 1
            }
            CountDistribution::Compound { outer, inner } => {
                let l = outer.sample(g);
                (0..l).map(|_| inner.sample(g)).sum()
            }
            CountDistribution::Deterministic { n } => *n,
            CountDistribution::Table { cdf, .. } => {
                let u = g.next_f64();
                cdf.partition_point(|&c| c <= u) as u64
            }
        }
    }
}

impl std::fmt::Debug for CountDistribution {
    /// Tabulated laws print a summary, not their million-entry tables.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountDistribution::Poisson { lambda } => write!(f, "Poisson({lambda})"),
            CountDistribution::Geometric { p } => write!(f, "Geometric({p})"),
            CountDistribution::Binomial { n, p } => write!(f, "Binomial({n}, {p})"),
            CountDistribution::NegativeBinomial { r, p } => {
                write!(f, "NegativeBinomial({r}, {p})")
            }
            CountDistribution::PowerAlpha { alpha, cdf } => {
                write!(f, "PowerAlpha({alpha}, table of {})", cdf.len())
            }
            CountDistribution::Compound { outer, inner } => {
                write!(f, "Compound({outer:?} of {inner:?})")
            }
            CountDistribution::Deterministic { n } => write!(f, "Deterministic({n})"),
            CountDistribution::Table { pmf, .. } => write!(f, "Table(support 0..{})", pmf.len()),
        }
    }
}

fn check_pgf_arg(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::domain(format!(
            "pgf argument t = {t} outside [-1, 1]"
        )));
    }
    Ok(())
}

/// Standard normal draw (Box-Muller, one value per call).
pub fn standard_normal(g: &mut Generator) -> f64 {
    let u1 = 1.0 - g.next_f64(); // (0, 1]
    let u2 = g.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_poisson(lambda: f64, g: &mut Generator) -> u64 {
    // Knuth multiplication below 30; additivity split above to avoid
    // exp underflow for large rates.
    if lambda > 30.0 {
        let parts = (lambda / 30.0).ceil() as u64;
        let each = lambda / parts as f64;
        return (0..parts).map(|_| sample_poisson(each, g)).sum();
    }
    let limit = (-lambda).exp();
    let mut k = 0u64;
    let mut prod = g.next_f64();
    while prod > limit {
        k += 1;
        prod *= g.next_f64();
    }
    k
}

/// Marsaglia-Tsang gamma sampler, shape `a > 0`, unit scale.
fn sample_gamma(a: f64, g: &mut Generator) -> f64 {
    if a < 1.0 {
        // Boost: Gamma(a) = Gamma(a + 1) * U^{1/a}.
        let u = (1.0 - g.next_f64()).max(f64::MIN_POSITIVE);
        return sample_gamma(a + 1.0, g) * u.powf(1.0 / a);
    }
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(g);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = (1.0 - g.next_f64()).max(f64::MIN_POSITIVE);
        if u.ln() < 0.5 * x * x + d - d * v3 + d * v3.ln() {
            return d * v3;
        }
    }
}

/// Law of the i.i.d. cell/token values `U`.
#[derive(Clone, Debug)]
pub enum ValueDistribution {
    Gaussian { mean: f64, var: f64 },
    Uniform { lo: f64, hi: f64 },
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
    Deterministic { c: f64 },
}

impl ValueDistribution {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !(var >= 0.0) || !var.is_finite() {
            return Err(Error::config(format!(
                "gaussian: variance = {var} must be nonnegative"
            )));
        }
        Ok(ValueDistribution::Gaussian { mean, var })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::config(format!(
                "uniform: lo = {lo} exceeds hi = {hi}"
            )));
        }
        Ok(ValueDistribution::Uniform { lo, hi })
    }

    pub fn two_point(lo: f64, hi: f64, p_hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_hi) {
            return Err(Error::config(format!(
                "two_point: p_hi = {p_hi} outside [0, 1]"
            )));
        }
        Ok(ValueDistribution::TwoPoint { lo, hi, p_hi })
    }

    pub fn deterministic(c: f64) -> Self {
        ValueDistribution::Deterministic { c }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ValueDistribution::Gaussian { mean, .. } => *mean,
            ValueDistribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            ValueDistribution::TwoPoint { lo, hi, p_hi } => p_hi * hi + (1.0 - p_hi) * lo,
            ValueDistribution::Deterministic { c } => *c,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ValueDistribution::Gaussian { var, .. } => *var,
            ValueDistribution::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            ValueDistribution::TwoPoint { lo, hi, p_hi } => {
                p_hi * (1.0 - p_hi) * (hi - lo) * (hi - lo)
            }
            ValueDistribution::Deterministic { .. } => 0.0,
        }
    }

    /// `E U^2`.
    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        self.variance() + m * m
    }

    pub fn sample(&self, g: &mut Generator) -> f64 {
        match self {
            ValueDistribution::Gaussian { mean, var } => mean + var.sqrt() * standard_normal(g),
            ValueDistribution::Uniform { lo, hi } => lo + (hi - lo) * g.next_f64(),
            ValueDistribution::TwoPoint { lo, hi, p_hi } => {
                if g.next_f64() < *p_hi {
                    *hi
                } else {
                    *lo
                }
            }
            ValueDistribution::Deterministic { c } => *c,
        }
    }
}

/// Law of a set radius (spherical caps) or diameter (balls).
#[derive(Clone, Debug)]
pub enum RadiusLaw {
    /// Point mass at `t`.
    Deterministic { t: f64 },
    /// Diameter law on [0, a] with CDF `(a - sqrt(a^2 - x^2)) / a`.
    Sironvalle { a: f64 },
    /// Diameter uniform on [0, a].
    UniformDiameter { a: f64 },
    /// Cap radius law determined by `cos R` having CDF
    /// `1/2 + sum_q p_q t^{2q+1}` on [-1, 1]; requires `p_q >= 0` and
    /// `sum p_q = 1/2`. Symmetric under `R <-> pi - R`.
    CosPolynomial { p: Vec<f64> },
    /// Cap radius fixed at `pi/2`.
    Hemisphere,
}

impl RadiusLaw {
    pub fn deterministic(t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::config(format!(
                "radius: t = {t} must be nonnegative"
            )));
        }
        Ok(RadiusLaw::Deterministic { t })
    }

    pub fn sironvalle(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::config(format!(
                "sironvalle: a = {a} must be positive"
            )));
        }
        Ok(RadiusLaw::Sironvalle { a })
    }

    pub fn uniform_diameter(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::config(format!(
                "uniform diameter: a = {a} must be positive"
            )));
        }
        Ok(RadiusLaw::UniformDiameter { a })
    }

    pub fn cos_polynomial(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&q| !(q >= 0.0)) {
            return Err(Error::config(
                "cos polynomial: coefficients must be nonnegative".to_string(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 0.5).abs() > 1e-12 {
            return Err(Error::config(format!(
                "cos polynomial: coefficients sum to {total}, expected 1/2"
            )));
        }
        Ok(RadiusLaw::CosPolynomial { p })
    }

    /// CDF of `cos R` for the polynomial family.
    pub fn cos_poly_cdf(p: &[f64], t: f64) -> f64 {
        if t < -1.0 {
            return 0.0;
        }
        if t > 1.0 {
            return 1.0;
        }
        let mut acc = 0.5;
        for (q, &pq) in p.iter().enumerate() {
            acc += pq * t.powi(2 * q as i32 + 1);
        }
        acc
    }

    /// Density of `cos R` for the polynomial family.
    pub fn cos_poly_density(p: &[f64], t: f64) -> f64 {
        if !(-1.0..=1.0).contains(&t) {
            return 0.0;
        }
        p.iter()
            .enumerate()
            .map(|(q, &pq)| pq * (2.0 * q as f64 + 1.0) * t.powi(2 * q as i32))
            .sum()
    }

    pub fn sample(&self, g: &mut Generator) -> f64 {
        match self {
            RadiusLaw::Deterministic { t } => *t,
            RadiusLaw::Sironvalle { a } => {
                let u = g.next_f64();
                a * (2.0 * u - u * u).sqrt()
            }
            RadiusLaw::UniformDiameter { a } => a * g.next_f64(),
            RadiusLaw::CosPolynomial { p } => {
                let u = g.next_f64();
                invert_cos_poly(p, u).acos()
            }
            RadiusLaw::Hemisphere => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// Solve `F_Q(t) = u` on [-1, 1] by bisection with Newton acceleration.
fn invert_cos_poly(p: &[f64], u: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut t = 2.0 * u - 1.0; // exact for the uniform case
    for _ in 0..200 {
        let f = RadiusLaw::cos_poly_cdf(p, t) - u;
        if f.abs() < 1e-15 {
            return t;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = RadiusLaw::cos_poly_density(p, t);
        let newton = if d > 1e-12 { t - f / d } else { f64::NAN };
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-12 {
            break;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::integrate;

    #[test]
    fn pgf_normalization_at_one() {
        let dists = [
            CountDistribution::poisson(2.0).unwrap(),
            CountDistribution::geometric(0.3).unwrap(),
            CountDistribution::binomial(7, 0.4).unwrap(),
            CountDistribution::negative_binomial(2.5, 0.6).unwrap(),
            CountDistribution::power_alpha(0.5).unwrap(),
            CountDistribution::compound(
                CountDistribution::poisson(1.5).unwrap(),
                CountDistribution::power_alpha(0.7).unwrap(),
            ),
            CountDistribution::deterministic(4),
            CountDistribution::table(&[0.5, 0.25, 0.25]).unwrap(),
        ];
        for d in &dists {
            assert!((d.pgf(1.0).unwrap() - 1.0).abs() < 1e-12, "{d:?}");
        }
        assert!(dists[0].pgf(1.5).is_err());
    }

    #[test]
    fn poisson_pgf_against_series() {
        let d = CountDistribution::poisson(2.0).unwrap();
        let t: f64 = 0.5;
        let series: f64 = (0..200).map(|k| d.pmf(k).unwrap() * t.powi(k as i32)).sum();
        let got = d.pgf(t).unwrap();
        assert!((got - series).abs() < 1e-12);
        assert!((got - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn compound_pgf_is_composition() {
        let lambda = 1.3;
        let alpha = 0.5;
        let d = CountDistribution::compound(
            CountDistribution::poisson(lambda).unwrap(),
            CountDistribution::power_alpha(alpha).unwrap(),
        );
        for &t in &[-1.0f64, 0.0, 0.5, 0.9] {
            let expect = (-lambda * (1.0 - t).powf(alpha)).exp();
            assert!((d.pgf(t).unwrap() - expect).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn pgf_derivative_reference_points() {
        let poi = CountDistribution::poisson(3.0).unwrap();
        assert!((poi.pgf_derivative(1.0).unwrap() - 3.0).abs() < 1e-12);
        let geo = CountDistribution::geometric(0.25).unwrap();
        assert!((geo.pgf_derivative(1.0).unwrap() - 4.0).abs() < 1e-12);
        let pa = CountDistribution::power_alpha(0.5).unwrap();
        assert!((pa.pgf_derivative(0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(pa.pgf_derivative(1.0).unwrap().is_infinite());
    }

    #[test]
    fn pgf_derivative_matches_finite_difference() {
        let dists = [
            CountDistribution::poisson(2.0).unwrap(),
            CountDistribution::geometric(0.3).unwrap(),
            CountDistribution::binomial(7, 0.4).unwrap(),
            CountDistribution::negative_binomial(2.5, 0.6).unwrap(),
            CountDistribution::power_alpha(0.5).unwrap(),
            CountDistribution::compound(
                CountDistribution::poisson(1.5).unwrap(),
                CountDistribution::power_alpha(0.7).unwrap(),
            ),
            CountDistribution::table(&[0.1, 0.3, 0.4, 0.2]).unwrap(),
        ];
        let h = 1e-6;
        for d in &dists {
            for &t in &[-0.5, 0.0, 0.3, 0.7] {
                let fd = (d.pgf(t + h).unwrap() - d.pgf(t - h).unwrap()) / (2.0 * h);
                let an = d.pgf_derivative(t).unwrap();
                assert!((fd - an).abs() <= 1e-5, "{d:?} at t = {t}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn power_alpha_pmf_values() {
        let d = CountDistribution::power_alpha(0.5).unwrap();
        assert!((d.pmf(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.pmf(2).unwrap() - 0.125).abs() < 1e-15);
        assert!((d.pmf(3).unwrap() - 0.0625).abs() < 1e-15);
        // alpha = 1 is the point mass at 1.
        let d1 = CountDistribution::power_alpha(1.0).unwrap();
        let mut g = Generator::from_seed(5);
        for _ in 0..100 {
            assert_eq!(d1.sample(&mut g), 1);
        }
        assert!((d1.pgf(0.0).unwrap()).abs() < 1e-15);
        assert!(CountDistribution::power_alpha(1.5).is_err());
        assert!(CountDistribution::power_alpha(0.0).is_err());
    }

    #[test]
    fn deterministic_sampling() {
        let d = CountDistribution::deterministic(3);
        let mut g = Generator::from_seed(1);
        for _ in 0..10 {
            assert_eq!(d.sample(&mut g), 3);
        }
    }

    #[test]
    fn power_alpha_table_is_normalized_and_matches_pgf() {
        for &alpha in &[0.3, 0.5, 0.9] {
            let d = CountDistribution::power_alpha(alpha).unwrap();
            let cdf = match &d {
                CountDistribution::PowerAlpha { cdf, .. } => cdf.clone(),
                _ => unreachable!(),
            };
            assert_eq!(*cdf.last().unwrap(), 1.0);
            // pgf from the table (with the tail mass lumped into the last
            // bucket) against the closed form on a grid.
            for i in 0..10 {
                let t = -0.9 + 1.89 * i as f64 / 9.0;
                let mut series = 0.0;
                let mut prev = 0.0;
                let mut tk = 1.0;
                for &c in cdf.iter() {
                    tk *= t;
                    series += (c - prev) * tk;
                    prev = c;
                    if tk.abs() < 1e-18 {
                        break;
                    }
                }
                let analytic = d.pgf(t).unwrap();
                assert!(
                    (series - analytic).abs() < 1e-10,
                    "alpha = {alpha}, t = {t}: {series} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn sironvalle_sample_mean() {
        // E D = integral of the survival function = a * pi / 4; verified
        // here against quadrature of 1 - F rather than the closed form.
        let a = 2.0;
        let law = RadiusLaw::sironvalle(a).unwrap();
        let expect = integrate(|x| 1.0 - (a - (a * a - x * x).sqrt()) / a, 0.0, a, 1e-12);
        assert!((expect - a * std::f64::consts::PI / 4.0).abs() < 1e-10);
        let n = 1_000_000;
        let mut g = Generator::from_seed(11);
        let sum: f64 = (0..n).map(|_| law.sample(&mut g)).sum();
        let mean = sum / n as f64;
        // Var D = a^2(1 - pi^2/16)... bounded by a^2; 3 s.e. with s.e. <= a/sqrt(n).
        let se = a / (n as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean = {mean}, expect = {expect}"
        );
    }

    #[test]
    fn cos_polynomial_uniform_case() {
        // Q = 0, p0 = 1/2: cos R uniform on [-1, 1]. KS on 1e6 draws.
        let law = RadiusLaw::cos_polynomial(vec![0.5]).unwrap();
        let n = 1_000_000usize;
        let mut g = Generator::from_seed(3);
        let mut xs: Vec<f64> = (0..n).map(|_| law.sample(&mut g).cos()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = (1.0 + x) / 2.0;
            ks = ks
                .max((cdf - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - cdf).abs());
        }
        assert!(ks < 0.002, "ks = {ks}");
    }

    #[test]
    fn cos_polynomial_cdf_is_valid() {
        for p in [
            vec![0.5],
            vec![0.0, 0.5],
            vec![0.25, 0.25],
            vec![0.1, 0.2, 0.2],
        ] {
            let _law = RadiusLaw::cos_polynomial(p.clone()).unwrap();
            assert!(RadiusLaw::cos_poly_cdf(&p, -1.0).abs() < 1e-12);
            assert!((RadiusLaw::cos_poly_cdf(&p, 1.0) - 1.0).abs() < 1e-12);
            let mut prev = 0.0;
            for i in 0..=10_000 {
                let t = -1.0 + 2.0 * i as f64 / 10_000.0;
                let v = RadiusLaw::cos_poly_cdf(&p, t);
                assert!(v >= prev - 1e-14);
                prev = v;
            }
        }
        assert!(RadiusLaw::cos_polynomial(vec![0.3]).is_err());
    }

    #[test]
    fn count_samplers_match_their_moments() {
        // Covers the large-rate Poisson split, geometric inversion, and
        // the gamma-Poisson negative binomial (both gamma shape regimes).
        let cases = [
            CountDistribution::poisson(100.0).unwrap(),
            CountDistribution::geometric(0.23).unwrap(),
            CountDistribution::negative_binomial(2.5, 0.55).unwrap(),
            CountDistribution::negative_binomial(0.8, 0.35).unwrap(),
            CountDistribution::binomial(11, 0.3).unwrap(),
        ];
        let n = 200_000;
        let mut g = Generator::from_seed(29);
        for d in &cases {
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut g) as f64).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            let se_mean = (d.variance() / n as f64).sqrt();
            assert!(
                (mean - d.mean()).abs() < 4.0 * se_mean,
                "{d:?}: mean {mean} vs {}",
                d.mean()
            );
            assert!(
                (var - d.variance()).abs() / d.variance() < 0.06,
                "{d:?}: var {var} vs {}",
                d.variance()
            );
        }
    }

    #[test]
    fn compound_sampler_mean() {
        // Mean of the compound is E L * E K.
        let outer = CountDistribution::poisson(2.0).unwrap();
        let inner = CountDistribution::geometric(0.5).unwrap();
        let d = CountDistribution::compound(outer, inner);
        let expect = 2.0 * 2.0;
        let n = 1_000_000;
        let mut g = Generator::from_seed(17);
        let sum: f64 = (0..n).map(|_| d.sample(&mut g) as f64).sum();
        let mean = sum / n as f64;
        let se = (d.variance() / n as f64).sqrt();
        assert!((mean - expect).abs() < 4.0 * se, "mean = {mean}");
    }

    #[test]
    fn table_roundtrip_and_moments() {
        let d = CountDistribution::table(&[1.0, 2.0, 1.0]).unwrap();
        assert!((d.pmf(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.mean() - 1.0).abs() < 1e-15);
        assert!((d.variance() - 0.5).abs() < 1e-15);
        let tr = CountDistribution::poisson(2.0)
            .unwrap()
            .truncated(30)
            .unwrap();
        assert!((tr.mean() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn value_distributions_moments_and_sampling() {
        let mut g = Generator::from_seed(23);
        let cases = [
            ValueDistribution::gaussian(1.5, 2.0).unwrap(),
            ValueDistribution::uniform(-1.0, 3.0).unwrap(),
            ValueDistribution::two_point(0.0, 1.0, 0.3).unwrap(),
        ];
        let n = 200_000;
        for v in &cases {
            let xs: Vec<f64> = (0..n).map(|_| v.sample(&mut g)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            let se_mean = (v.variance() / n as f64).sqrt();
            assert!((mean - v.mean()).abs() < 5.0 * se_mean, "{v:?}");
            assert!((var - v.variance()).abs() / v.variance() < 0.05, "{v:?}");
        }
        let c = ValueDistribution::deterministic(2.5);
        assert_eq!(c.sample(&mut g), 2.5);
        assert_eq!(c.variance(), 0.0);
    }
}
