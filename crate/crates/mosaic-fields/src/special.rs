//! Special functions and numerical quadrature.
//!
//! The hit-probability formulas need the gamma function at integer and
//! half-integer arguments, the (unnormalized) incomplete beta function
//! including negative second parameter, and a generic adaptive quadrature
//! for the spherical-cap recursion.

use crate::error::{Error, Result};

/// Lanczos approximation of `ln Γ(x)` (g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for general `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Exact `Γ(k/2)` for positive half-integer arguments.
///
/// `Γ(m) = (m−1)!` and `Γ(m + 1/2) = (2m)! √π / (4^m m!)`, evaluated by
/// a product so the result is exact up to rounding. All the closed-form
/// constants in the hit-probability formulas use only such arguments.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "gamma_half needs a positive argument");
    if k % 2 == 0 {
        let m = k / 2;
        (1..m).map(|i| i as f64).product()
    } else {
        // Γ(1/2) = √π, then Γ(x+1) = x Γ(x).
        let mut acc = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x + 1.0 <= k as f64 / 2.0 {
            acc *= x;
            x += 1.0;
        }
        acc
    }
}

/// Total surface measure of the unit sphere 𝕊^d embedded in ℝ^{d+1}:
/// `2 π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn sphere_surface_total(d: u32) -> f64 {
    assert!(d >= 1);
    let pi = std::f64::consts::PI;
    2.0 * pi.powf((d as f64 + 1.0) / 2.0) / gamma_half(d + 1)
}

// Gauss-Kronrod 7-15 node pair on [-1, 1], at the full published
// precision (rounds to the nearest double).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

/// One Gauss-Kronrod 7-15 panel: returns (K15 estimate, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

const MAX_DEPTH: u32 = 64;
const ABS_FLOOR: f64 = 1e-14;

fn refine<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (est, err) = gk15(f, lo, hi);
    if err <= tol || depth >= MAX_DEPTH || hi - lo < 1e-15 * (1.0 + lo.abs()) {
        return est;
    }
    let mid = 0.5 * (lo + hi);
    refine(f, lo, mid, 0.5 * tol, depth + 1) + refine(f, mid, hi, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[lo, hi]` with relative
/// tolerance `rtol` and absolute floor 1e-14.
///
/// The tolerance budget is set from a first whole-interval estimate and the
/// refinement is repeated once if that estimate was badly off (sharply
/// peaked integrands).
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let (rough, _) = gk15(&f, lo, hi);
    let mut tol = ABS_FLOOR.max(rtol * rough.abs());
    let mut value = refine(&f, lo, hi, tol, 0);
    for _ in 0..2 {
        let better = ABS_FLOOR.max(rtol * value.abs());
        if better >= tol * 0.5 {
            break;
        }
        tol = better;
        value = refine(&f, lo, hi, tol, 0);
    }
    value
}

/// Unnormalized incomplete beta function
/// `B_x(a, b) = ∫_0^x t^{a-1} (1-t)^{b-1} dt`.
///
/// Requires `a > 0`; for `b <= 0` the integrand is not integrable at 1, so
/// `x < 1` is required there. Evaluated by adaptive quadrature (relative
/// tolerance 1e-10); for `b > 0` the point `x = 1` reproduces
/// `Γ(a)Γ(b)/Γ(a+b)`.
///
/// Integrable endpoint singularities (`a < 1` at 0, `b < 1` at 1) defeat
/// plain bisection, so those ends are integrated after the substitutions
/// `v = t^a` resp. `u = (1-t)^b`, which make the integrand bounded.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "incomplete_beta: x = {x} outside [0, 1]"
        )));
    }
    if a <= 0.0 {
        return Err(Error::domain(format!(
            "incomplete_beta: a = {a} must be positive"
        )));
    }
    if b <= 0.0 && x >= 1.0 {
        return Err(Error::domain(
            "incomplete_beta: x = 1 with b <= 0 diverges".to_string(),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    const RTOL: f64 = 1e-11;
    let m = x.min(0.5);
    let lower = if a >= 1.0 {
        integrate(|t| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), 0.0, m, RTOL)
    } else {
        // t = v^{1/a}: dB = (1/a) (1 - v^{1/a})^{b-1} dv, bounded at v = 0.
        let inv_a = 1.0 / a;
        (1.0 / a)
            * integrate(
                |v| (1.0 - v.powf(inv_a)).max(0.0).powf(b - 1.0),
                0.0,
                m.powf(a),
                RTOL,
            )
    };
    let upper = if x <= 0.5 {
        0.0
    } else if b > 0.0 {
        // 1 - t = u^{1/b}: dB = (1/b) (1 - u^{1/b})^{a-1} du, bounded at
        // u = 0 (that is, t = 1).
        let inv_b = 1.0 / b;
        (1.0 / b)
            * integrate(
                |u| (1.0 - u.powf(inv_b)).max(0.0).powf(a - 1.0),
                (1.0 - x).powf(b),
                0.5f64.powf(b),
                RTOL,
            )
    } else {
        // x < 1 here: the integrand is bounded on [1/2, x], merely peaked.
        integrate(|t| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), 0.5, x, RTOL)
    };
    Ok(lower + upper)
}

/// Error function, Abramowitz & Stegun 7.1.26 (|error| < 1.5e-7).
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736
                + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_known_values() {
        let pi = std::f64::consts::PI;
        assert!((gamma(0.5) - pi.sqrt()).abs() < 1e-12);
        assert!((gamma(1.0) - 1.0).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(2.5) - 1.5 * 0.5 * pi.sqrt()).abs() < 1e-12);
        for k in 1..24 {
            let rel = (gamma_half(k) - gamma(k as f64 / 2.0)).abs() / gamma_half(k);
            assert!(rel < 1e-12, "k = {k}, rel = {rel}");
        }
    }

    #[test]
    fn sphere_surface_known_values() {
        let pi = std::f64::consts::PI;
        assert!((sphere_surface_total(1) - 2.0 * pi).abs() < 1e-12);
        assert!((sphere_surface_total(2) - 4.0 * pi).abs() < 1e-12);
        assert!((sphere_surface_total(3) - 2.0 * pi * pi).abs() < 1e-12);
    }

    #[test]
    fn quadrature_on_smooth_integrands() {
        let v = integrate(|t| t.cos(), 0.0, 1.0, 1e-12);
        assert!((v - 1.0f64.sin()).abs() < 1e-12);
        let v = integrate(|t| (-t * t).exp(), -5.0, 5.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn incomplete_beta_simple_cases() {
        // B_{0.5}(1, 1) is just the length of [0, 0.5].
        assert!((incomplete_beta(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        // Complete case against the gamma identity.
        let exact = (ln_gamma(1.5) + ln_gamma(0.5) - ln_gamma(2.0)).exp();
        let got = incomplete_beta(1.0, 1.5, 0.5).unwrap();
        assert!((got - exact).abs() < 1e-9, "got {got}, exact {exact}");
        assert!((exact - std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_negative_b_against_simpson() {
        // Brute-force Simpson oracle with 1e6 panels.
        let (x, a, b) = (0.75, 1.5, -1.0);
        let f = |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
        let n = 1_000_000usize;
        let h = x / n as f64;
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        let simpson = s * h / 3.0;
        let got = incomplete_beta(x, a, b).unwrap();
        assert!((got - simpson).abs() < 1e-8, "got {got}, simpson {simpson}");
    }

    #[test]
    fn incomplete_beta_domain_errors() {
        assert!(incomplete_beta(1.0, 1.5, -0.5).is_err());
        assert!(incomplete_beta(1.5, 1.0, 1.0).is_err());
        assert!(incomplete_beta(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn incomplete_beta_monotone_in_x_both_signs_of_b() {
        for &b in &[0.5, -1.0] {
            let mut prev = 0.0;
            for i in 1..40 {
                let x = 0.98 * i as f64 / 40.0;
                let v = incomplete_beta(x, 1.5, b).unwrap();
                assert!(v >= prev - 1e-12, "b = {b}, x = {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn incomplete_beta_head_plus_tail() {
        // For b > 0: B_x(a,b) + int_x^1 = B_1(a,b). The tail is computed
        // by direct quadrature, so keep b >= 1 (bounded integrand).
        for &(a, b) in &[(2.5, 1.75), (1.5, 1.0), (0.75, 2.0)] {
            let total = incomplete_beta(1.0, a, b).unwrap();
            for &x in &[0.1, 0.4, 0.9] {
                let head = incomplete_beta(x, a, b).unwrap();
                let tail = integrate(|t| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), x, 1.0, 1e-11);
                assert!((head + tail - total).abs() < 1e-9, "a={a}, b={b}, x={x}");
            }
        }
    }

    #[test]
    fn erf_reference_points() {
        assert!(erf(0.0).abs() < 1e-12);
        assert!((erf(1.0) - 0.842_700_792_949_715).abs() < 2e-7);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 2e-7);
    }
}
