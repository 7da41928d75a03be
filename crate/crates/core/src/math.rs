//! Numerical building blocks: adaptive quadrature, bracketing root finders,
//! log-space helpers and the goodness-of-fit statistics used by the reports.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

pub const LN_2: f64 = core::f64::consts::LN_2;

/// `log(1 - exp(x))` for `x < 0`.
pub fn log1mexp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log(exp(y) - 1)` for `y > 0`, stable for tiny and huge `y`.
pub fn log_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Upper tail of the standard normal.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// `log P(N > x)` for a standard normal, accurate far into the upper tail.
pub fn ln_normal_sf(x: f64) -> f64 {
    if x < 25.0 {
        return normal_sf(x).ln();
    }
    // Mills ratio continued fraction, good to machine precision for x >= 25.
    let mut frac = x;
    for k in (1..=40).rev() {
        frac = x + k as f64 / frac;
    }
    -0.5 * x * x - 0.5 * (2.0 * core::f64::consts::PI).ln() - frac.ln()
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt()
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature on a finite interval.
///
/// Bisects the interval with the largest error estimate until the total error
/// falls below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    segs.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    for _ in 0..2000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (i, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, v0, e0) = segs.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    if !total.is_finite() {
        return Err(Error::numeric("quadrature produced a non-finite value"));
    }
    // Re-sum to shed accumulated rounding in the running totals.
    let total: f64 = segs.iter().map(|s| s.2).sum();
    let err: f64 = segs.iter().map(|s| s.3).sum();
    if err <= 10.0 * abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::numeric("quadrature did not converge"))
    }
}

/// Integral over `[a, inf)` via `x = a + u / (1 - u)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - u;
            let v = f(a + u / w) / (w * w);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

/// Bisection for an increasing function on a bracket `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`. Stops when the bracket is narrower than
/// `tol * (1 + |mid|)` or after `max_iter` halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() || flo > 0.0 || fhi < 0.0 {
        return Err(Error::numeric("root not bracketed"));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::numeric("NaN during bisection"));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grows `hi` geometrically from `start` until `f(hi) >= 0`.
pub fn bracket_up<F: FnMut(f64) -> f64>(mut f: F, start: f64, limit: f64) -> Result<f64> {
    let mut hi = start.max(1e-300);
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > limit || !hi.is_finite() {
            return Err(Error::numeric("bracket search exceeded its limit"));
        }
    }
    Ok(hi)
}

/// Kolmogorov limiting survival function `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test. `samples` is sorted in place.
/// Returns `(D, p)` with Stephens' finite-sample correction.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// Two-sample Kolmogorov-Smirnov test; both slices are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// Upper tail of the chi-square law through the Wilson-Hilferty cube-root
/// normal approximation.
pub fn chi2_sf(x: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    let k = dof as f64;
    let z = ((x / k).cbrt() - (1.0 - 2.0 / (9.0 * k))) / (2.0 / (9.0 * k)).sqrt();
    normal_sf(z)
}

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gumbel location/scale from probability-weighted moments.
pub fn gumbel_pwm(samples: &mut [f64]) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let b0 = samples.iter().sum::<f64>() / n;
    let b1 = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| x * i as f64 / (n - 1.0))
        .sum::<f64>()
        / n;
    let scale = (2.0 * b1 - b0) / LN_2;
    (b0 - EULER_GAMMA * scale, scale)
}

pub fn gumbel_cdf(x: f64, loc: f64, scale: f64) -> f64 {
    (-(-(x - loc) / scale).exp()).exp()
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_gaussian() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12, 0.0).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let g = integrate_to_inf(normal_pdf, 0.0, 1e-12, 0.0).unwrap();
        assert!((g - 0.5).abs() < 1e-11);
    }

    #[test]
    fn quadrature_kink() {
        let v = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-10, 0.0).unwrap();
        let exact = 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn normal_tail_continuity() {
        let a = normal_sf(24.999).ln();
        let b = ln_normal_sf(24.999);
        assert!((a - b).abs() < 1e-9);
        let c = ln_normal_sf(25.0);
        let d = normal_sf(25.0).ln();
        assert!((c - d).abs() < 1e-9);
    }

    #[test]
    fn log_helpers() {
        assert!((log1mexp(-1e-20) - (1e-20f64).ln()).abs() < 1e-9);
        assert!((log1mexp(-50.0) + (-50.0f64).exp()).abs() < 1e-30);
        assert!((log_expm1(1e-10) - (1e-10f64).ln()).abs() < 1e-9);
        assert!((log_expm1(800.0) - 800.0).abs() < 1e-12);
        assert!((log_add_exp(0.0, 0.0) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x, 1.0, 2.0, 1e-12, 10).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.36) ~ 0.049, P(K > 1.63) ~ 0.0098
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
    }

    #[test]
    fn chi2_approximation_is_close() {
        // 99th percentile of chi2(10) is 23.209
        assert!((chi2_sf(23.209, 10) - 0.01).abs() < 1e-3);
    }
}
