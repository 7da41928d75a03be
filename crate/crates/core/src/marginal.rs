//! Univariate marginal laws.
//!
//! Every built-in law is symmetric about zero and is described by the log of
//! its upper tail on `[0, inf)`. Working with `log(1 - F(t))` directly keeps
//! the far tails exact: meta maps routinely need tail probabilities well
//! below `1e-300`.
//!
//! Heavy laws ([`HeavyMarginal`]) have regularly varying tails with index
//! `lambda`. Light laws ([`LightMarginal`]) have tails `1 - G(s) = e^{-psi(s)}/2`
//! with a von Mises exponent `psi` and scale function `a = 1/psi'`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::math::{self, LN_2};
use crate::{Error, Result};

/// A continuous law on the real line, symmetric about zero.
///
/// Implementors supply the upper tail in log space and its inverse; the
/// remaining evaluators are derived from those with care near `p = 0` and
/// `p = 1`.
pub trait SymmetricLaw: Send + Sync {
    /// `log(1 - F(t))` for `t >= 0`.
    fn ln_tail(&self, t: f64) -> f64;

    /// The `t >= 0` with `ln_tail(t) = ln_q`, for `ln_q <= -ln 2`.
    fn tail_inverse(&self, ln_q: f64) -> Result<f64>;

    fn density(&self, t: f64) -> f64;

    /// `ln_tail` evaluated at `t = exp(ln_t)`, usable past `f64::MAX`.
    fn ln_tail_at_ln(&self, ln_t: f64) -> f64 {
        self.ln_tail(ln_t.exp())
    }

    /// `log` of [`SymmetricLaw::tail_inverse`], usable past `f64::MAX`.
    fn ln_tail_inverse(&self, ln_q: f64) -> Result<f64> {
        Ok(self.tail_inverse(ln_q)?.ln())
    }

    fn cdf(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(format!("cdf argument {t} is not finite")));
        }
        Ok(if t >= 0.0 {
            -self.ln_tail(t).exp_m1()
        } else {
            self.ln_tail(-t).exp()
        })
    }

    /// `log(1 - F(t))` on the whole line.
    fn ln_sf(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.ln_tail(t)
        } else {
            math::log1mexp(self.ln_tail(-t))
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("probability {p} outside (0, 1)")));
        }
        if p == 0.5 {
            Ok(0.0)
        } else if p < 0.5 {
            Ok(-self.tail_inverse(p.ln())?)
        } else {
            self.tail_inverse((1.0 - p).ln())
        }
    }

    /// Inverse survival function from `log q`, `q = 1 - F(t)`.
    fn isf_ln(&self, ln_q: f64) -> Result<f64> {
        if ln_q.is_nan() || ln_q >= 0.0 {
            return Err(Error::domain("log tail probability must be negative"));
        }
        if ln_q <= -LN_2 {
            self.tail_inverse(ln_q)
        } else {
            Ok(-self.tail_inverse(math::log1mexp(ln_q))?)
        }
    }
}

/// Families of heavy-tailed marginals.
#[derive(Debug, Clone, Copy)]
pub enum HeavyFamily {
    /// `1 - F(t) = (1 + t)^{-lambda} / 2` for `t >= 0`.
    ParetoType,
    /// Student t with `lambda` degrees of freedom; tail by quadrature.
    StudentT,
    /// User supplied upper tail on `[0, inf)`, equal to `1/2` at zero.
    CustomTail(fn(f64) -> f64),
}

#[derive(Debug, Clone, Copy)]
pub struct HeavyMarginal {
    lambda: f64,
    family: HeavyFamily,
    ln_norm: f64,
}

impl HeavyMarginal {
    pub fn new(lambda: f64, family: HeavyFamily) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameters(format!("tail index {lambda} must be positive")));
        }
        let ln_norm = match family {
            HeavyFamily::StudentT => {
                math::ln_gamma(0.5 * (lambda + 1.0))
                    - math::ln_gamma(0.5 * lambda)
                    - 0.5 * (lambda * core::f64::consts::PI).ln()
            }
            _ => 0.0,
        };
        Ok(Self {
            lambda,
            family,
            ln_norm,
        })
    }

    pub fn pareto(lambda: f64) -> Result<Self> {
        Self::new(lambda, HeavyFamily::ParetoType)
    }

    pub fn student_t(dof: f64) -> Result<Self> {
        Self::new(dof, HeavyFamily::StudentT)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn family(&self) -> HeavyFamily {
        self.family
    }

    fn student_ln_density_ln(&self, ln_x: f64) -> f64 {
        // log f(x) with x = exp(ln_x), stable for huge x
        let nu = self.lambda;
        let a = 2.0 * ln_x - nu.ln();
        let l1p = if a > 0.0 {
            a + (-a).exp().ln_1p()
        } else {
            a.exp().ln_1p()
        };
        self.ln_norm - 0.5 * (nu + 1.0) * l1p
    }

    fn student_ln_tail_ln(&self, ln_t: f64) -> f64 {
        let nu = self.lambda;
        if ln_t <= 0.0 {
            let t = ln_t.exp();
            let head =
                math::integrate(|x| self.student_ln_density_ln(x.ln()).exp(), 0.0, t, 1e-14, 0.0).unwrap_or(f64::NAN);
            return (0.5 - head).ln();
        }
        // Substitute x = t / u, u = w^(1/nu): the integrand becomes smooth
        // and O(1) after factoring out its t^-nu scale.
        let l0 = self.ln_norm + 0.5 * (nu + 1.0) * nu.ln() - nu * ln_t;
        let inner = math::integrate(
            |w| {
                if w <= 0.0 {
                    return (1.0 / nu) * 1.0;
                }
                let ln_u = w.ln() / nu;
                let ln_x = ln_t - ln_u;
                let v = self.student_ln_density_ln(ln_x) + ln_t - 2.0 * ln_u - l0 + (1.0 / nu - 1.0) * w.ln() - nu.ln();
                v.exp()
            },
            0.0,
            1.0,
            1e-14,
            0.0,
        )
        .unwrap_or(f64::NAN);
        l0 + inner.ln()
    }

    fn solve_tail(&self, ln_q: f64) -> Result<f64> {
        // Work in u = ln(1 + t); ln_tail is decreasing in u.
        if ln_q == -LN_2 {
            return Ok(0.0);
        }
        let f = |u: f64| ln_q - self.ln_tail_at_ln(u.exp_m1().ln());
        // past f64::MAX, as the closed forms do
        let cap = f64::MAX.ln();
        if f(cap) < 0.0 {
            return Ok(f64::INFINITY);
        }
        let hi = {
            let mut hi = (-ln_q / self.lambda).clamp(1.0, cap);
            let mut k = 0;
            while f(hi) < 0.0 {
                hi = (2.0 * hi).min(cap);
                k += 1;
                if k > 60 {
                    return Err(Error::numeric("heavy tail bracket failed"));
                }
            }
            hi
        };
        let u = math::bisect(f, 0.0, hi, 1e-15, 300)?;
        Ok(u.exp_m1())
    }
}

impl SymmetricLaw for HeavyMarginal {
    fn ln_tail(&self, t: f64) -> f64 {
        match self.family {
            HeavyFamily::ParetoType => -LN_2 - self.lambda * t.ln_1p(),
            HeavyFamily::StudentT => {
                if t == 0.0 {
                    -LN_2
                } else {
                    self.student_ln_tail_ln(t.ln())
                }
            }
            HeavyFamily::CustomTail(f) => f(t).ln(),
        }
    }

    fn ln_tail_at_ln(&self, ln_t: f64) -> f64 {
        match self.family {
            HeavyFamily::ParetoType => {
                // ln(1 + t) = ln t + ln(1 + 1/t)
                let l1p = if ln_t > 0.0 {
                    ln_t + (-ln_t).exp().ln_1p()
                } else {
                    ln_t.exp().ln_1p()
                };
                -LN_2 - self.lambda * l1p
            }
            HeavyFamily::StudentT => {
                if ln_t == f64::NEG_INFINITY {
                    -LN_2
                } else {
                    self.student_ln_tail_ln(ln_t)
                }
            }
            HeavyFamily::CustomTail(_) => self.ln_tail(ln_t.exp()),
        }
    }

    fn tail_inverse(&self, ln_q: f64) -> Result<f64> {
        if !(ln_q <= -LN_2) {
            return Err(Error::domain("tail probability must not exceed 1/2"));
        }
        match self.family {
            HeavyFamily::ParetoType => Ok(((-LN_2 - ln_q) / self.lambda).exp_m1()),
            _ => self.solve_tail(ln_q),
        }
    }

    fn ln_tail_inverse(&self, ln_q: f64) -> Result<f64> {
        if !(ln_q <= -LN_2) {
            return Err(Error::domain("tail probability must not exceed 1/2"));
        }
        match self.family {
            HeavyFamily::ParetoType => Ok(math::log_expm1((-LN_2 - ln_q) / self.lambda)),
            HeavyFamily::StudentT if ln_q < -600.0 => {
                // Beyond double range: solve in ln t against the log tail.
                let nu = self.lambda;
                let guess = (self.ln_norm + 0.5 * (nu + 1.0) * nu.ln() - nu.ln() - ln_q) / nu;
                let f = |lt: f64| ln_q - self.ln_tail_at_ln(lt);
                math::bisect(f, guess - 5.0, guess + 5.0, 1e-15, 300)
            }
            _ => Ok(self.tail_inverse(ln_q)?.ln()),
        }
    }

    fn density(&self, t: f64) -> f64 {
        let x = t.abs();
        match self.family {
            HeavyFamily::ParetoType => 0.5 * self.lambda * (1.0 + x).powf(-self.lambda - 1.0),
            HeavyFamily::StudentT => self.student_ln_density_ln(x.ln()).exp(),
            HeavyFamily::CustomTail(f) => {
                let h = 1e-6 * (1.0 + x);
                let lo = (x - h).max(0.0);
                (f(lo) - f(x + h)) / (x + h - lo)
            }
        }
    }
}

/// Tail exponents `psi` of the light families, `1 - G(s) = e^{-psi(s)} / 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum TailExponent {
    /// `psi(s) = s^theta`; `theta = 1` is the Laplace law.
    Power { theta: f64 },
    /// `psi(s) = (1 + s)^theta - 1`; positive continuous density for every theta.
    ShiftedPower { theta: f64 },
    /// Standard normal, `psi(s) = -log(2 (1 - Phi(s)))`.
    Gaussian,
    /// `psi(s) = psi_base(s) + b(s)` with `b` piecewise linear on a grid.
    Lighter {
        base: Box<TailExponent>,
        grid: Vec<f64>,
        bump: Vec<f64>,
    },
}

impl TailExponent {
    pub fn psi(&self, s: f64) -> f64 {
        match self {
            TailExponent::Power { theta } => s.powf(*theta),
            TailExponent::ShiftedPower { theta } => (1.0 + s).powf(*theta) - 1.0,
            TailExponent::Gaussian => -LN_2 - math::ln_normal_sf(s),
            TailExponent::Lighter { base, grid, bump } => base.psi(s) + interp(grid, bump, s),
        }
    }

    pub fn psi_prime(&self, s: f64) -> f64 {
        match self {
            TailExponent::Power { theta } => theta * s.powf(theta - 1.0),
            TailExponent::ShiftedPower { theta } => theta * (1.0 + s).powf(theta - 1.0),
            TailExponent::Gaussian => (math::normal_pdf(s).ln() - math::ln_normal_sf(s)).exp(),
            TailExponent::Lighter { base, grid, bump } => base.psi_prime(s) + interp_slope(grid, bump, s),
        }
    }

    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::domain("tail exponent value must be non-negative"));
        }
        match self {
            TailExponent::Power { theta } => Ok(y.powf(1.0 / theta)),
            TailExponent::ShiftedPower { theta } => Ok((y.ln_1p() / theta).exp_m1()),
            _ => {
                let hi = math::bracket_up(|s| self.psi(s) - y, 1.0, 1e300)?;
                math::bisect(|s| self.psi(s) - y, 0.0, hi, 1e-15, 300)
            }
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            TailExponent::Power { theta } | TailExponent::ShiftedPower { theta } => *theta,
            TailExponent::Gaussian => 2.0,
            TailExponent::Lighter { base, .. } => base.theta(),
        }
    }
}

fn interp(grid: &[f64], vals: &[f64], s: f64) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    if s <= grid[0] {
        return vals[0] * (s / grid[0]).max(0.0);
    }
    let last = grid.len() - 1;
    if s >= grid[last] {
        return vals[last];
    }
    let i = grid.partition_point(|&g| g <= s) - 1;
    let w = (s - grid[i]) / (grid[i + 1] - grid[i]);
    vals[i] + w * (vals[i + 1] - vals[i])
}

fn interp_slope(grid: &[f64], vals: &[f64], s: f64) -> f64 {
    if grid.is_empty() || s >= grid[grid.len() - 1] {
        return 0.0;
    }
    if s < grid[0] {
        return vals[0] / grid[0];
    }
    let i = grid.partition_point(|&g| g <= s) - 1;
    (vals[i + 1] - vals[i]) / (grid[i + 1] - grid[i])
}

/// A symmetric light-tailed marginal in the Gumbel domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LightMarginal {
    tail: TailExponent,
}

impl LightMarginal {
    pub fn new(tail: TailExponent) -> Result<Self> {
        match &tail {
            TailExponent::Power { theta } | TailExponent::ShiftedPower { theta }
                if !(*theta > 0.0 && theta.is_finite()) =>
            {
                Err(Error::Parameters(format!("theta {theta} must be positive")))
            }
            _ => Ok(Self { tail }),
        }
    }

    /// `1 - G(s) = e^{-s}/2`.
    pub fn laplace() -> Self {
        Self {
            tail: TailExponent::Power { theta: 1.0 },
        }
    }

    pub fn power(theta: f64) -> Result<Self> {
        Self::new(TailExponent::Power { theta })
    }

    pub fn shifted_power(theta: f64) -> Result<Self> {
        Self::new(TailExponent::ShiftedPower { theta })
    }

    pub fn gaussian() -> Self {
        Self {
            tail: TailExponent::Gaussian,
        }
    }

    pub fn tail_exponent(&self) -> &TailExponent {
        &self.tail
    }

    pub fn theta(&self) -> f64 {
        self.tail.theta()
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.tail.psi(s)
    }

    /// Scale function `a(s) = 1 / psi'(s)`.
    pub fn scale_function_at(&self, s: f64) -> Result<f64> {
        let d = self.tail.psi_prime(s);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("psi'({s}) = {d} is not positive")));
        }
        Ok(1.0 / d)
    }
}

impl SymmetricLaw for LightMarginal {
    fn ln_tail(&self, t: f64) -> f64 {
        match self.tail {
            TailExponent::Gaussian => math::ln_normal_sf(t),
            _ => -LN_2 - self.tail.psi(t),
        }
    }

    fn tail_inverse(&self, ln_q: f64) -> Result<f64> {
        if !(ln_q <= -LN_2) {
            return Err(Error::domain("tail probability must not exceed 1/2"));
        }
        match self.tail {
            TailExponent::Gaussian => {
                let g = |s: f64| ln_q - math::ln_normal_sf(s);
                let hi = math::bracket_up(g, 1.0, 1e160)?;
                math::bisect(g, 0.0, hi, 1e-15, 300)
            }
            _ => self.tail.psi_inverse((-LN_2 - ln_q).max(0.0)),
        }
    }

    fn density(&self, t: f64) -> f64 {
        let s = t.abs();
        match self.tail {
            TailExponent::Gaussian => math::normal_pdf(s),
            _ => 0.5 * self.tail.psi_prime(s) * (-self.tail.psi(s)).exp(),
        }
    }
}

/// Which normalization a [`ScalingSchedule`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    /// `1 - F(c_n) = 1/n` for a heavy marginal.
    HeavyTail,
    /// `-log(1 - G(b_n)) = log n` for a light marginal.
    LightTail,
    /// `psi(r_n) = log n` for a light marginal.
    Psi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSchedule {
    pub kind: ScalingKind,
    pub entries: Vec<(u64, f64)>,
}

impl ScalingSchedule {
    pub fn scale_at(&self, n: u64) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == n).map(|e| e.1)
    }
}

/// Scaling constants for the sample sizes `ns` (increasing, each at least 2).
pub fn scaling_constants(law: &dyn SymmetricLaw, kind: ScalingKind, ns: &[u64]) -> Result<ScalingSchedule> {
    let mut entries = Vec::with_capacity(ns.len());
    let mut prev = 0u64;
    for &n in ns {
        if n < 2 {
            return Err(Error::domain(format!("sample size {n} must be at least 2")));
        }
        if n <= prev {
            return Err(Error::domain("sample sizes must be increasing"));
        }
        prev = n;
        let ln_n = (n as f64).ln();
        let scale = match kind {
            ScalingKind::HeavyTail | ScalingKind::LightTail => law.tail_inverse(-ln_n)?,
            ScalingKind::Psi => {
                // psi(r) = ln_tail^-1 shifted: ln_tail = -ln 2 - psi
                law.tail_inverse(-LN_2 - ln_n)?
            }
        };
        entries.push((n, scale));
    }
    Ok(ScalingSchedule { kind, entries })
}

/// Same as [`scaling_constants`] with `ScalingKind::Psi`, for any light law.
pub fn psi_scaling(m: &LightMarginal, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("sample size must be at least 2"));
    }
    m.tail.psi_inverse((n as f64).ln())
}

/// `M_n(s) = psi(s) - psi(s - s/n)`.
pub fn m_n(m: &LightMarginal, n: u32, s: f64) -> f64 {
    let nf = n as f64;
    m.psi(s) - m.psi(s - s / nf)
}

/// Result of the lighter-marginal construction: the bump `b = M*/2` on the
/// grid and the lighter law `psi_1 = psi + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LighterMarginal {
    pub grid: Vec<f64>,
    pub m_star: Vec<f64>,
    pub bump: Vec<f64>,
    pub law: LightMarginal,
}

impl LighterMarginal {
    /// `g1(s) / g(s) = e^{-b(s)}` on the tail-exponent scale.
    pub fn ratio_same_point(&self, s: f64) -> f64 {
        (-interp(&self.grid, &self.bump, s)).exp()
    }

    /// `g1(c s) / g(s) = exp(psi(s) - psi(c s) - b(c s))`.
    pub fn ratio_shrunk_point(&self, c: f64, s: f64) -> f64 {
        let base = match self.law.tail_exponent() {
            TailExponent::Lighter { base, .. } => base,
            other => return (other.psi(s) - self.law.psi(c * s)).exp(),
        };
        (base.psi(s) - base.psi(c * s) - interp(&self.grid, &self.bump, c * s)).exp()
    }
}

/// Builds a symmetric law whose tails are lighter than `m` while its
/// `c`-shrunk tails stay heavier: `g1(s)/g(s) -> 0` and `g1(cs)/g(s) -> inf`.
///
/// `M_n^*(s)` is the suffix minimum of `M_n` over grid points `>= s`. The
/// increasing envelope `M^*` follows `M_n^*` on the band where
/// `M_n^* in [n, n+1]` and is held at `n + 1` until the next band starts;
/// ties go to the smallest `n`.
pub fn build_lighter_marginal(m: &LightMarginal, grid: &[f64]) -> Result<LighterMarginal> {
    if grid.len() < 3 {
        return Err(Error::numeric("grid needs at least three points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::domain("grid must be positive and strictly increasing"));
    }
    let len = grid.len();
    // Suffix minima of M_n for the n values needed, built lazily.
    let suffix_min = |n: u32| -> Vec<f64> {
        let mut out = alloc::vec![0.0; len];
        let mut cur = f64::INFINITY;
        for i in (0..len).rev() {
            cur = cur.min(m_n(m, n, grid[i]));
            out[i] = cur;
        }
        out
    };
    let mut n: u32 = 2;
    let mut current = suffix_min(n);
    let mut m_star = Vec::with_capacity(len);
    for i in 0..len {
        let mut steps = 0;
        while current[i] > (n + 1) as f64 {
            n += 1;
            current = suffix_min(n);
            steps += 1;
            if steps > 1 && current[i] > (n + 1) as f64 {
                return Err(Error::numeric(format!(
                    "grid too coarse: band {n} skipped near s = {}",
                    grid[i]
                )));
            }
        }
        let lower = if n == 2 { f64::NEG_INFINITY } else { n as f64 };
        let v = current[i].max(lower).min((n + 1) as f64);
        let prev = m_star.last().copied().unwrap_or(f64::NEG_INFINITY);
        m_star.push(v.max(prev));
    }
    let offset = m_star[0].min(0.0);
    let bump: Vec<f64> = m_star.iter().map(|v| 0.5 * (v - offset)).collect();
    let law = LightMarginal {
        tail: TailExponent::Lighter {
            base: Box::new(m.tail.clone()),
            grid: grid.to_vec(),
            bump: bump.clone(),
        },
    };
    Ok(LighterMarginal {
        grid: grid.to_vec(),
        m_star,
        bump,
        law,
    })
}

/// Either kind of built-in marginal, for places that take one at runtime.
#[derive(Debug, Clone)]
pub enum Marginal {
    Heavy(HeavyMarginal),
    Light(LightMarginal),
}

impl Marginal {
    fn law(&self) -> &dyn SymmetricLaw {
        match self {
            Marginal::Heavy(m) => m,
            Marginal::Light(m) => m,
        }
    }
}

impl SymmetricLaw for Marginal {
    fn ln_tail(&self, t: f64) -> f64 {
        self.law().ln_tail(t)
    }

    fn tail_inverse(&self, ln_q: f64) -> Result<f64> {
        self.law().tail_inverse(ln_q)
    }

    fn density(&self, t: f64) -> f64 {
        self.law().density(t)
    }

    fn ln_tail_at_ln(&self, ln_t: f64) -> f64 {
        self.law().ln_tail_at_ln(ln_t)
    }

    fn ln_tail_inverse(&self, ln_q: f64) -> Result<f64> {
        self.law().ln_tail_inverse(ln_q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn pareto_cdf_and_quantile() {
        let m = HeavyMarginal::pareto(1.0).unwrap();
        assert_eq!(m.cdf(0.0).unwrap(), 0.5);
        assert!(close(m.cdf(1.0).unwrap(), 0.75, 1e-15));
        assert_eq!(m.quantile(0.5).unwrap(), 0.0);
        assert!(close(m.quantile(0.75).unwrap(), 1.0, 1e-14));
        assert!(m.cdf(f64::NAN).is_err());
        assert!(m.quantile(1.0).is_err());
        assert!(m.quantile(0.0).is_err());
    }

    #[test]
    fn laplace_cdf_and_quantile() {
        let g = LightMarginal::laplace();
        assert!(close(g.cdf(2f64.ln()).unwrap(), 0.75, 1e-15));
        let p = 1.0 - (-2.0f64).exp() / 2.0;
        assert!(close(g.quantile(p).unwrap(), 2.0, 1e-12));
    }

    #[test]
    fn scale_function_examples() {
        assert!(close(
            LightMarginal::power(1.0).unwrap().scale_function_at(10.0).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            LightMarginal::power(2.0).unwrap().scale_function_at(2.0).unwrap(),
            0.25,
            1e-15
        ));
        assert!(close(
            LightMarginal::power(0.5).unwrap().scale_function_at(4.0).unwrap(),
            4.0,
            1e-15
        ));
        assert!(LightMarginal::power(2.0).unwrap().scale_function_at(0.0).is_err());
    }

    #[test]
    fn scaling_constant_examples() {
        let p1 = HeavyMarginal::pareto(1.0).unwrap();
        let s = scaling_constants(&p1, ScalingKind::HeavyTail, &[10, 100]).unwrap();
        assert!(close(s.scale_at(10).unwrap(), 4.0, 1e-13));
        assert!(close(s.scale_at(100).unwrap(), 49.0, 1e-13));
        let p2 = HeavyMarginal::pareto(2.0).unwrap();
        let s = scaling_constants(&p2, ScalingKind::HeavyTail, &[10_000]).unwrap();
        assert!(close(s.entries[0].1, 5000f64.sqrt() - 1.0, 1e-13));
        let g = LightMarginal::laplace();
        let s = scaling_constants(&g, ScalingKind::LightTail, &[100]).unwrap();
        assert!(close(s.entries[0].1, 50f64.ln(), 1e-13));
        let s = scaling_constants(&g, ScalingKind::Psi, &[100]).unwrap();
        assert!(close(s.entries[0].1, 100f64.ln(), 1e-13));
        assert!(close(psi_scaling(&g, 100).unwrap(), 100f64.ln(), 1e-13));
        assert!(scaling_constants(&g, ScalingKind::LightTail, &[1]).is_err());
        assert!(scaling_constants(&g, ScalingKind::LightTail, &[10, 5]).is_err());
    }

    #[test]
    fn student_t_matches_cauchy_closed_form() {
        let c = HeavyMarginal::student_t(1.0).unwrap();
        for &t in &[0.1, 0.7, 1.0, 3.0, 50.0, 1e4, 1e9] {
            let exact = 0.5 - libm::atan(t) / core::f64::consts::PI;
            let got = c.ln_tail(t).exp();
            assert!(close(got, exact, 1e-11), "t={t}: {got} vs {exact}");
        }
        // far beyond double range: tail ~ 1/(pi t)
        let lt = 1000.0;
        let got = c.ln_tail_at_ln(lt);
        assert!((got - (-(core::f64::consts::PI).ln() - lt)).abs() < 1e-10);
    }

    #[test]
    fn student_t_nu3_closed_form() {
        // F(t) for nu = 3: 1/2 + (atan(t/sqrt3) + sqrt3 t/(3 + t^2)) / pi
        let m = HeavyMarginal::student_t(3.0).unwrap();
        for &t in &[0.5, 2.0, 10.0, 300.0] {
            let r3 = 3f64.sqrt();
            let tail = 0.5 - (libm::atan(t / r3) + r3 * t / (3.0 + t * t)) / core::f64::consts::PI;
            assert!(close(m.ln_tail(t).exp(), tail, 1e-9), "t={t}");
        }
    }

    #[test]
    fn quantile_round_trip_and_symmetry() {
        let laws: [&dyn SymmetricLaw; 6] = [
            &HeavyMarginal::pareto(1.0).unwrap(),
            &HeavyMarginal::pareto(2.5).unwrap(),
            &HeavyMarginal::student_t(1.0).unwrap(),
            &LightMarginal::laplace(),
            &LightMarginal::shifted_power(2.0).unwrap(),
            &LightMarginal::gaussian(),
        ];
        for law in laws {
            for k in 0..=24 {
                let lp = -12.0 + k as f64 * 0.5;
                for &p in &[10f64.powf(lp), 1.0 - 10f64.powf(lp)] {
                    if !(p > 0.0 && p < 1.0) {
                        continue;
                    }
                    let q = law.quantile(p).unwrap();
                    let c = law.cdf(q).unwrap();
                    assert!((c - p).abs() <= 1e-10, "p={p} q={q} cdf={c}");
                    if p < 0.5 {
                        assert_eq!(law.quantile(p).unwrap(), -law.tail_inverse(p.ln()).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn heavy_tail_index_by_local_slope() {
        for law in [
            HeavyMarginal::pareto(1.0).unwrap(),
            HeavyMarginal::student_t(1.0).unwrap(),
        ] {
            let t = law.quantile(1.0 - 1e-8).unwrap();
            let slope = (law.ln_tail(10.0 * t) - law.ln_tail(t)) / 10f64.ln();
            assert!((slope + law.lambda()).abs() < 0.01, "slope {slope}");
        }
    }

    #[test]
    fn von_mises_scale_derivative_small() {
        for (m, bound) in [
            (LightMarginal::laplace(), 0.05),
            (LightMarginal::shifted_power(2.0).unwrap(), 0.05),
            (LightMarginal::gaussian(), 0.05),
            (LightMarginal::power(0.5).unwrap(), 0.5),
        ] {
            let s = m.quantile(1.0 - 1e-8).unwrap();
            let h = 1e-4 * s;
            let da = (m.scale_function_at(s + h).unwrap() - m.scale_function_at(s - h).unwrap()) / (2.0 * h);
            assert!(da.abs() < bound, "a'({s}) = {da}");
        }
    }

    #[test]
    fn lighter_marginal_examples() {
        let m = LightMarginal::power(2.0).unwrap();
        assert!(close(m_n(&m, 2, 10.0), 75.0, 1e-14));
        let grid: Vec<f64> = (1..=4000).map(|i| i as f64 * 0.01).collect();
        let l = build_lighter_marginal(&m, &grid).unwrap();
        let r: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&s| l.ratio_same_point(s)).collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
        let r: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&s| l.ratio_shrunk_point(0.5, s))
            .collect();
        assert!(r[0] < r[1] && r[1] < r[2]);
        // The lighter law is a valid law: cdf increasing, quantile round trip.
        let q = l.law.quantile(1.0 - 1e-6).unwrap();
        assert!((l.law.cdf(q).unwrap() - (1.0 - 1e-6)).abs() < 1e-10);
        assert!(l.m_star.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lighter_marginal_coarse_grid_errors() {
        let m = LightMarginal::power(2.0).unwrap();
        let grid = [1.0, 50.0, 100.0];
        assert!(build_lighter_marginal(&m, &grid).is_err());
    }
}
