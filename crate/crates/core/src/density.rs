//! Homothetic densities `f(z) = f_*(n_D(z)) / Z`.
//!
//! For such a density the gauge radius `n_D(Z)` and the direction
//! `Z / n_D(Z)` are independent: the radius has density proportional to
//! `r^{d-1} f_*(r)` and the direction is the cone measure on the boundary,
//! obtained by normalizing a uniform point of `D`. Both parts are sampled
//! exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma};

use crate::marginal::{SymmetricLaw, TailExponent};
use crate::math;
use crate::star::StarSet;
use crate::{Error, Result};

/// Radial profiles `f_*`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialGenerator {
    /// `(1 + r)^{-(lambda + d)}`.
    HeavyShifted { lambda: f64 },
    /// `(1 + r^2 / nu)^{-(nu + d)/2}`; on the ball this is the spherical t law
    /// whose marginals are Student t with `nu` degrees of freedom.
    StudentT { nu: f64 },
    /// `r^kappa e^{-r^theta}`.
    PowerExp { theta: f64, kappa: f64 },
    /// `r^kappa e^{-r^2/2}`.
    Gauss { kappa: f64 },
    /// `r^kappa e^{-psi(r)}` for any light tail exponent; sampled from a
    /// tabulated cdf.
    Tabulated { psi: TailExponent, kappa: f64 },
}

impl RadialGenerator {
    /// `log f_*(r)` in dimension `d`.
    pub fn ln_value(&self, r: f64, d: usize) -> f64 {
        let d = d as f64;
        match *self {
            RadialGenerator::HeavyShifted { lambda } => -(lambda + d) * r.ln_1p(),
            RadialGenerator::StudentT { nu } => -0.5 * (nu + d) * (r * r / nu).ln_1p(),
            RadialGenerator::PowerExp { theta, kappa } => kappa_term(kappa, r) - r.powf(theta),
            RadialGenerator::Gauss { kappa } => kappa_term(kappa, r) - 0.5 * r * r,
            RadialGenerator::Tabulated { ref psi, kappa } => kappa_term(kappa, r) - psi.psi(r),
        }
    }

    pub fn is_heavy(&self) -> bool {
        matches!(
            self,
            RadialGenerator::HeavyShifted { .. } | RadialGenerator::StudentT { .. }
        )
    }

    /// Tail index `lambda` of a heavy generator.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            RadialGenerator::HeavyShifted { lambda } => Some(lambda),
            RadialGenerator::StudentT { nu } => Some(nu),
            _ => None,
        }
    }

    fn kappa(&self) -> f64 {
        match *self {
            RadialGenerator::PowerExp { kappa, .. }
            | RadialGenerator::Gauss { kappa }
            | RadialGenerator::Tabulated { kappa, .. } => kappa,
            _ => 0.0,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let ok = match *self {
            RadialGenerator::HeavyShifted { lambda } => lambda > 0.0,
            RadialGenerator::StudentT { nu } => nu > 0.0,
            RadialGenerator::PowerExp { theta, .. } => theta > 0.0,
            RadialGenerator::Gauss { .. } | RadialGenerator::Tabulated { .. } => true,
        };
        if !ok || !(d as f64 + self.kappa() > 0.0) {
            return Err(Error::Parameters(format!(
                "invalid generator {self:?} in dimension {d}"
            )));
        }
        Ok(())
    }

    /// `log int_0^inf r^{d-1} f_*(r) dr`, closed form where available.
    fn ln_radial_mass(&self, d: usize) -> Result<f64> {
        let df = d as f64;
        Ok(match *self {
            RadialGenerator::HeavyShifted { lambda } => ln_beta(df, lambda),
            RadialGenerator::StudentT { nu } => {
                0.5 * df * nu.ln() + ln_beta(0.5 * df, 0.5 * nu) - core::f64::consts::LN_2
            }
            RadialGenerator::PowerExp { theta, kappa } => math::ln_gamma((df + kappa) / theta) - theta.ln(),
            RadialGenerator::Gauss { kappa } => {
                let a = 0.5 * (df + kappa);
                (a - 1.0) * core::f64::consts::LN_2 + math::ln_gamma(a)
            }
            RadialGenerator::Tabulated { .. } => {
                let v = math::integrate_to_inf(|r| radial_integrand(self, r, d), 0.0, 1e-12, 0.0)?;
                v.ln()
            }
        })
    }
}

fn kappa_term(kappa: f64, r: f64) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        kappa * r.ln()
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    math::ln_gamma(a) + math::ln_gamma(b) - math::ln_gamma(a + b)
}

fn radial_integrand(g: &RadialGenerator, r: f64, d: usize) -> f64 {
    if r <= 0.0 {
        return if d == 1 && g.kappa() == 0.0 { 1.0 } else { 0.0 };
    }
    ((d as f64 - 1.0) * r.ln() + g.ln_value(r, d)).exp()
}

/// `z |-> f_*(n_D(z)) / Z` with its exact sampler.
#[derive(Debug, Clone)]
pub struct HomotheticDensity {
    generator: RadialGenerator,
    shape: StarSet,
    dim: usize,
    volume: f64,
    ln_radial_mass: f64,
    ln_z: f64,
    acceptance: f64,
    // (cdf, r) knots for generators without a closed radial sampler
    table: Option<Vec<(f64, f64)>>,
}

/// Number of uniform points used to estimate `|D|` when no closed form exists.
const VOLUME_MC_POINTS: usize = 1 << 22;

impl HomotheticDensity {
    pub fn new(generator: RadialGenerator, shape: StarSet) -> Result<Self> {
        let dim = shape.dim();
        generator.validate(dim)?;
        let volume = match shape.exact_volume() {
            Some(v) => v,
            None if dim == 2 => shape.sector_area(0.0, 2.0 * core::f64::consts::PI)?,
            None => {
                let mut rng = rand::rngs::SmallRng::seed_from_u64(0x5eed);
                let (frac, _) = crate::star::mc_volume_fraction(&shape, VOLUME_MC_POINTS, &mut rng)?;
                frac * (2.0 * shape.box_radius()).powi(dim as i32)
            }
        };
        let acceptance = volume / (2.0 * shape.box_radius()).powi(dim as i32);
        if !(acceptance >= 1e-4) {
            return Err(Error::Parameters(format!(
                "rejection acceptance {acceptance:e} too low: shape and bounding box mismatch"
            )));
        }
        let ln_radial_mass = generator.ln_radial_mass(dim)?;
        let ln_z = (dim as f64).ln() + volume.ln() + ln_radial_mass;
        let table = match &generator {
            RadialGenerator::Tabulated { psi, .. } => {
                Some(build_table(&generator, dim, psi.psi_inverse(691.0)?, ln_radial_mass)?)
            }
            _ => None,
        };
        Ok(Self {
            generator,
            shape,
            dim,
            volume,
            ln_radial_mass,
            ln_z,
            acceptance,
            table,
        })
    }

    pub fn generator(&self) -> &RadialGenerator {
        &self.generator
    }

    pub fn shape(&self) -> &StarSet {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|D|`, exact or numeric.
    pub fn shape_volume(&self) -> f64 {
        self.volume
    }

    pub fn ln_normalization(&self) -> f64 {
        self.ln_z
    }

    /// Normalized generator: the density value on the level set `{n_D = r}`.
    pub fn level_value(&self, r: f64) -> f64 {
        (self.generator.ln_value(r, self.dim) - self.ln_z).exp()
    }

    pub fn density_at(&self, x: &[f64]) -> f64 {
        self.level_value(self.shape.gauge(x))
    }

    pub fn ln_density_at(&self, x: &[f64]) -> f64 {
        self.generator.ln_value(self.shape.gauge(x), self.dim) - self.ln_z
    }

    /// `P(n_D(Z) <= r)`.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Ok(0.0);
        }
        let g = &self.generator;
        let d = self.dim;
        let mass = self.ln_radial_mass.exp();
        let head = math::integrate(|s| radial_integrand(g, s, d), 0.0, r, 1e-12, 0.0)?;
        if head <= 0.5 * mass {
            return Ok(head / mass);
        }
        let tail = math::integrate_to_inf(|s| radial_integrand(g, s, d), r, 1e-12, 0.0)?;
        Ok(1.0 - tail / mass)
    }

    /// `log P(n_D(Z) > r)`.
    pub fn ln_radial_sf(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Ok(0.0);
        }
        if let Some(v) = self.closed_ln_radial_sf(r) {
            return Ok(v);
        }
        self.numeric_ln_radial_sf(r)
    }

    // Closed forms: the shifted heavy generator, and Student t in even d.
    fn closed_ln_radial_sf(&self, r: f64) -> Option<f64> {
        if let RadialGenerator::HeavyShifted { lambda } = self.generator {
            // R / (1 + R) ~ Beta(d, lambda); finite sum for integer d
            let y = r / (1.0 + r);
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..self.dim {
                term *= (lambda + (j - 1) as f64) / j as f64 * y;
                sum += term;
            }
            return Some(-lambda * r.ln_1p() + sum.ln());
        }
        if let (&RadialGenerator::StudentT { nu }, true) = (&self.generator, self.dim % 2 == 0) {
            // R^2 / (nu + R^2) ~ Beta(d/2, nu/2)
            let r2 = r * r;
            let y = r2 / (nu + r2);
            let b = 0.5 * nu;
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..self.dim / 2 {
                term *= (b + (j - 1) as f64) / j as f64 * y;
                sum += term;
            }
            return Some(b * (nu.ln() - (nu + r2).ln()) + sum.ln());
        }
        None
    }

    fn ln_radial_integrand(&self, s: f64) -> f64 {
        (self.dim as f64 - 1.0) * s.ln() + self.generator.ln_value(s, self.dim)
    }

    fn numeric_ln_radial_sf(&self, r: f64) -> Result<f64> {
        // int_r^inf e^{l(s) - l(r)} ds over chunks growing geometrically from
        // the local decay length, so the far tail never underflows
        let l = |s: f64| self.ln_radial_integrand(s);
        let l0 = l(r);
        let delta = 1e-6 * r.max(1.0);
        let slope = (l(r + delta) - l0) / delta;
        let mut h = (1.0 / (-slope).max(1e-6)).min(r.max(1.0));
        let mut a = r;
        let mut sum = 0.0;
        for _ in 0..4000 {
            let part = math::integrate(|s| (l(s) - l0).exp(), a, a + h, 1e-10, 0.0)?;
            sum += part;
            a += h;
            h *= 1.5;
            if part <= 1e-17 * sum || !a.is_finite() {
                break;
            }
        }
        Ok(l0 + sum.ln() - self.ln_radial_mass)
    }

    fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.dim as f64;
        match self.generator {
            RadialGenerator::HeavyShifted { lambda } => {
                // beta prime: ratio of independent gammas
                gamma(rng, d) / gamma(rng, lambda)
            }
            RadialGenerator::StudentT { nu } => (nu * gamma(rng, 0.5 * d) / gamma(rng, 0.5 * nu)).sqrt(),
            RadialGenerator::PowerExp { theta, kappa } => gamma(rng, (d + kappa) / theta).powf(1.0 / theta),
            RadialGenerator::Gauss { kappa } => (2.0 * gamma(rng, 0.5 * (d + kappa))).sqrt(),
            RadialGenerator::Tabulated { .. } => {
                let t = self.table.as_deref().unwrap_or(&[]);
                invert_table(t, rng.random::<f64>())
            }
        }
    }

    /// A point of the cone measure: `W / n_D(W)` with `W` uniform in `D`.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let r = self.shape.box_radius();
        loop {
            for v in out.iter_mut() {
                *v = rng.random_range(-r..r);
            }
            let g = self.shape.gauge(out);
            if g < 1.0 && g > 0.0 {
                for v in out.iter_mut() {
                    *v /= g;
                }
                return;
            }
        }
    }

    /// One exact draw written to `out` (length `d`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.sample_direction(rng, out);
        let radius = self.sample_radius(rng);
        for v in out.iter_mut() {
            *v *= radius;
        }
    }

    /// `n` draws, row-major.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = alloc::vec![0.0; n * self.dim];
        for row in out.chunks_exact_mut(self.dim) {
            self.sample_into(rng, row);
        }
        out
    }

    /// Fraction of box proposals accepted by the direction sampler.
    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }

    /// Marginal density of coordinate `axis` at `t` (d = 2).
    pub fn numeric_marginal(&self, axis: usize, t: f64) -> Result<f64> {
        if self.dim != 2 || axis > 1 {
            return Err(Error::Unsupported("numeric marginals need d = 2".into()));
        }
        let at = |y: f64| {
            let p = if axis == 0 { [t, y] } else { [y, t] };
            self.density_at(&p)
        };
        let f = |y: f64| at(y) + at(-y);
        let knee = t.abs().max(1e-300);
        let head = math::integrate(f, 0.0, knee, 1e-12, 0.0)?;
        let tail = math::integrate_to_inf(f, knee, 1e-12, 0.0)?;
        Ok(head + tail)
    }
}

/// The common coordinate law of a symmetric homothetic density in `d = 2`.
///
/// `1 - F(t) = int S_R(t / (rho(phi) cos phi)) rho(phi)^2 / (2 |D|) dphi`
/// over `|phi| < pi/2`, with `rho` the boundary radius of `D` and `S_R` the
/// survival function of the gauge radius. Tabulated in `u = log(1 + t)`;
/// extrapolated as a power of `t` past the last knot.
#[derive(Debug, Clone)]
pub struct HomotheticMarginal {
    // (log t, u, log tail)
    knots: Vec<(f64, f64, f64)>,
    end_slope: f64,
}

const MARGINAL_KNOTS: usize = 1500;
const MARGINAL_T_MAX: f64 = 1e15;

impl HomotheticMarginal {
    pub fn new(h: &HomotheticDensity) -> Result<Self> {
        if h.dim() != 2 {
            return Err(Error::Unsupported("homothetic marginals need d = 2".into()));
        }
        let table = match h.closed_ln_radial_sf(1.0) {
            Some(_) => None,
            None => Some(RadialSfTable::new(h)?),
        };
        let u_max = MARGINAL_T_MAX.ln_1p();
        let mut knots = Vec::with_capacity(MARGINAL_KNOTS + 1);
        knots.push((f64::NEG_INFINITY, 0.0, -core::f64::consts::LN_2));
        for k in 1..=MARGINAL_KNOTS {
            let u = u_max * k as f64 / MARGINAL_KNOTS as f64;
            let t = u.exp_m1();
            let l = ln_coordinate_tail(h, table.as_ref(), t)?;
            if !l.is_finite() {
                break;
            }
            knots.push((t.ln(), u, l));
        }
        if knots.len() < 3 {
            return Err(Error::numeric("marginal tail vanishes immediately"));
        }
        let [.., a, b] = knots[..] else { unreachable!() };
        let end_slope = (b.2 - a.2) / (b.0 - a.0);
        if !(end_slope < 0.0) {
            return Err(Error::numeric("marginal tail is not decreasing"));
        }
        Ok(Self { knots, end_slope })
    }

    fn last(&self) -> (f64, f64, f64) {
        self.knots[self.knots.len() - 1]
    }
}

/// `log S_R` on a uniform grid, for generators without a closed form.
struct RadialSfTable {
    step: f64,
    ln_sf: Vec<f64>,
}

const RADIAL_SEGMENTS: usize = 20_000;

impl RadialSfTable {
    fn new(h: &HomotheticDensity) -> Result<Self> {
        let l = |s: f64| h.ln_radial_integrand(s);
        // extend until the integrand is 800 nats below its running maximum
        let mut r_end = 1.0;
        let mut top = f64::NEG_INFINITY;
        loop {
            for k in 1..=200 {
                top = top.max(l(r_end * k as f64 / 200.0));
            }
            if l(r_end) < top - 800.0 {
                break;
            }
            r_end *= 2.0;
            if r_end > 1e12 {
                return Err(Error::Unsupported("radial law too heavy to tabulate".into()));
            }
        }
        let step = r_end / RADIAL_SEGMENTS as f64;
        let mut seg = Vec::with_capacity(RADIAL_SEGMENTS);
        for k in 0..RADIAL_SEGMENTS {
            let (a, b) = (k as f64 * step, (k + 1) as f64 * step);
            let m = l(0.5 * (a + b));
            let v = math::integrate(|s| (l(s) - m).exp(), a, b, 1e-9, 0.0)?;
            seg.push(m + v.ln());
        }
        let mut ln_sf = vec![f64::NEG_INFINITY; RADIAL_SEGMENTS + 1];
        for k in (0..RADIAL_SEGMENTS).rev() {
            ln_sf[k] = math::log_add_exp(ln_sf[k + 1], seg[k]);
        }
        let total = ln_sf[0];
        for v in ln_sf.iter_mut() {
            *v -= total;
        }
        Ok(Self { step, ln_sf })
    }

    fn eval(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        let x = r / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.ln_sf.len() {
            return f64::NEG_INFINITY;
        }
        let w = x - i as f64;
        let (a, b) = (self.ln_sf[i], self.ln_sf[i + 1]);
        if b == f64::NEG_INFINITY {
            return if w == 0.0 { a } else { f64::NEG_INFINITY };
        }
        a + w * (b - a)
    }
}

fn ln_coordinate_tail(h: &HomotheticDensity, table: Option<&RadialSfTable>, t: f64) -> Result<f64> {
    let sf = |r: f64| -> Result<f64> {
        match table {
            Some(tb) => Ok(tb.eval(r)),
            None => h.ln_radial_sf(r),
        }
    };
    let base = sf(t)?;
    if base == f64::NEG_INFINITY {
        return Ok(base);
    }
    let scale = 1.0 / (2.0 * h.shape_volume());
    let shape = h.shape();
    let mut err = None;
    let mut f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        if c <= 0.0 {
            return 0.0;
        }
        let rho = 1.0 / shape.gauge(&[c, s]);
        match sf(t / (rho * c)) {
            Ok(l) => (l - base).exp() * rho * rho * scale,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    };
    let h8 = core::f64::consts::FRAC_PI_8;
    let mut sum = 0.0;
    for k in -4..4 {
        sum += math::integrate(&mut f, k as f64 * h8, (k + 1) as f64 * h8, 1e-10, 0.0)?;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(base + sum.ln())
}

impl SymmetricLaw for HomotheticMarginal {
    fn ln_tail(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        let u = t.max(0.0).ln_1p();
        let (lt, ul, ll) = self.last();
        if u >= ul {
            return ll + self.end_slope * (t.ln() - lt);
        }
        let i = self.knots.partition_point(|k| k.1 <= u).clamp(1, self.knots.len() - 1);
        let (_, u0, l0) = self.knots[i - 1];
        let (_, u1, l1) = self.knots[i];
        l0 + (u - u0) / (u1 - u0) * (l1 - l0)
    }

    fn ln_tail_at_ln(&self, ln_t: f64) -> f64 {
        let (lt, _, ll) = self.last();
        if ln_t >= lt {
            ll + self.end_slope * (ln_t - lt)
        } else {
            self.ln_tail(ln_t.exp())
        }
    }

    fn tail_inverse(&self, ln_q: f64) -> Result<f64> {
        Ok(self.ln_tail_inverse(ln_q)?.exp())
    }

    fn ln_tail_inverse(&self, ln_q: f64) -> Result<f64> {
        if !(ln_q <= -core::f64::consts::LN_2 + 1e-15) {
            return Err(Error::domain("log tail probability must be at most -ln 2"));
        }
        let (lt, _, ll) = self.last();
        if ln_q <= ll {
            return Ok(lt + (ln_q - ll) / self.end_slope);
        }
        // knots decrease in log tail
        let i = self
            .knots
            .partition_point(|k| k.2 > ln_q)
            .clamp(1, self.knots.len() - 1);
        let (_, u0, l0) = self.knots[i - 1];
        let (_, u1, l1) = self.knots[i];
        let u = if l1 < l0 {
            u0 + (ln_q - l0) / (l1 - l0) * (u1 - u0)
        } else {
            u0
        };
        Ok(u.exp_m1().ln())
    }

    fn density(&self, t: f64) -> f64 {
        let a = t.abs();
        let u = a.ln_1p();
        let (_, ul, _) = self.last();
        let slope_u = if u >= ul {
            self.end_slope * (1.0 + a) / a
        } else {
            let i = self.knots.partition_point(|k| k.1 <= u).clamp(1, self.knots.len() - 1);
            let (_, u0, l0) = self.knots[i - 1];
            let (_, u1, l1) = self.knots[i];
            (l1 - l0) / (u1 - u0)
        };
        -slope_u / (1.0 + a) * self.ln_tail(a).exp()
    }
}

fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    Gamma::new(shape, 1.0)
        .expect("gamma shape validated at construction")
        .sample(rng)
}

const TABLE_KNOTS: usize = 8192;

// Truncated at psi(r_end) = 691, where e^{-psi} < 1e-300.
fn build_table(g: &RadialGenerator, d: usize, r_end: f64, ln_mass: f64) -> Result<Vec<(f64, f64)>> {
    let r_max = r_end + 1.0;
    let mass = ln_mass.exp();
    let mut out = Vec::with_capacity(TABLE_KNOTS + 1);
    out.push((0.0, 0.0));
    let mut acc = 0.0;
    for k in 1..=TABLE_KNOTS {
        // quadratic spacing puts more knots near the mode
        let a = r_max * ((k - 1) as f64 / TABLE_KNOTS as f64).powi(2);
        let b = r_max * (k as f64 / TABLE_KNOTS as f64).powi(2);
        acc += math::integrate(|s| radial_integrand(g, s, d), a, b, 1e-12, 0.0)?;
        out.push(((acc / mass).min(1.0), b));
    }
    Ok(out)
}

fn invert_table(t: &[(f64, f64)], u: f64) -> f64 {
    let i = t.partition_point(|k| k.0 < u).clamp(1, t.len() - 1);
    let (c0, r0) = t[i - 1];
    let (c1, r1) = t[i];
    if c1 > c0 {
        r0 + (u - c0) / (c1 - c0) * (r1 - r0)
    } else {
        r0
    }
}

/// `h(w) = 1 / n_D(w)^{lambda + d}`.
pub fn limit_intensity_h(lambda: f64, shape: &StarSet, w: &[f64]) -> Result<f64> {
    let g = shape.gauge(w);
    if !(g > 0.0) {
        return Err(Error::domain("limit intensity has a pole at the origin"));
    }
    Ok(g.powf(-(lambda + shape.dim() as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star::Shape;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn level_set_examples() {
        let h = HomotheticDensity::new(RadialGenerator::HeavyShifted { lambda: 1.0 }, StarSet::ball(2)).unwrap();
        assert!(rel(h.density_at(&[3.0, 4.0]), h.density_at(&[5.0, 0.0])) < 1e-15);
        let c = HomotheticDensity::new(RadialGenerator::PowerExp { theta: 1.0, kappa: 0.0 }, StarSet::cube(2)).unwrap();
        let r = c.density_at(&[0.5, 0.5]) / c.density_at(&[1.0, 1.0]);
        assert!(rel(r, 0.5f64.exp()) < 1e-14);
        assert_eq!(c.density_at(&[0.0, 0.0]), c.level_value(0.0));
    }

    #[test]
    fn densities_integrate_to_one() {
        for (g, s) in [
            (RadialGenerator::HeavyShifted { lambda: 1.0 }, StarSet::ball(2)),
            (RadialGenerator::StudentT { nu: 3.0 }, StarSet::cube(2)),
            (
                RadialGenerator::PowerExp { theta: 1.0, kappa: 0.0 },
                StarSet::diamond(2),
            ),
            (RadialGenerator::Gauss { kappa: 1.0 }, StarSet::ball(2)),
            (
                RadialGenerator::Tabulated {
                    psi: TailExponent::ShiftedPower { theta: 2.0 },
                    kappa: 1.0,
                },
                StarSet::limit_set(2, 1.0, 1.0).unwrap(),
            ),
        ] {
            let h = HomotheticDensity::new(g.clone(), s).unwrap();
            // integrate the marginal over the line
            let m = math::integrate(|t| h.numeric_marginal(0, t).unwrap(), -60.0, 60.0, 1e-8, 0.0).unwrap();
            let tail = if g.is_heavy() {
                2.0 * math::integrate_to_inf(|t| h.numeric_marginal(0, t).unwrap(), 60.0, 1e-8, 0.0).unwrap()
            } else {
                0.0
            };
            assert!((m + tail - 1.0).abs() < 1e-6, "{g:?}: {}", m + tail);
        }
    }

    #[test]
    fn gaussian_marginal_is_normal() {
        let h = HomotheticDensity::new(RadialGenerator::Gauss { kappa: 0.0 }, StarSet::ball(2)).unwrap();
        for t in [0.0, 0.5, 1.7, 4.0] {
            assert!((h.numeric_marginal(1, t).unwrap() - math::normal_pdf(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn cube_exponential_marginal_asymptotics() {
        // marginal(t) ~ 2 t g(t) for the cube with g(r) = c e^{-r}
        let h = HomotheticDensity::new(RadialGenerator::PowerExp { theta: 1.0, kappa: 0.0 }, StarSet::cube(2)).unwrap();
        let ratio = |t: f64| h.numeric_marginal(0, t).unwrap() / (2.0 * t * h.level_value(t));
        let rs = [ratio(5.0), ratio(8.0), ratio(10.0)];
        // exact ratio is 1 + 1/t
        for (r, t) in rs.iter().zip([5.0, 8.0, 10.0]) {
            assert!(rel(*r, 1.0 + 1.0 / t) < 1e-8);
        }
        assert!((h.numeric_marginal(0, 2.5).unwrap() - h.numeric_marginal(0, -2.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn intensity_examples() {
        assert!(rel(limit_intensity_h(1.0, &StarSet::ball(2), &[2.0, 0.0]).unwrap(), 0.125) < 1e-15);
        assert!(rel(limit_intensity_h(2.0, &StarSet::cube(2), &[0.5, 0.25]).unwrap(), 16.0) < 1e-15);
        assert!(limit_intensity_h(1.0, &StarSet::cube(2), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn heavy_limit_relation() {
        let h = HomotheticDensity::new(RadialGenerator::StudentT { nu: 1.0 }, StarSet::ball(2)).unwrap();
        let w = [0.3, -0.4];
        let r = 1e4;
        let x = [r * w[0], r * w[1]];
        let got = h.density_at(&x) / h.level_value(r);
        assert!(rel(got, 0.5f64.powf(-3.0)) < 0.02);
    }

    #[test]
    fn radial_law_matches_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (g, s) in [
            (RadialGenerator::HeavyShifted { lambda: 1.0 }, StarSet::cube(2)),
            (RadialGenerator::StudentT { nu: 2.0 }, StarSet::ball(2)),
            (RadialGenerator::Gauss { kappa: -1.0 }, StarSet::diamond(2)),
            (
                RadialGenerator::Tabulated {
                    psi: TailExponent::ShiftedPower { theta: 1.5 },
                    kappa: 0.0,
                },
                StarSet::ball(2),
            ),
        ] {
            let h = HomotheticDensity::new(g.clone(), s.clone()).unwrap();
            let mut radii: Vec<f64> = (0..20_000)
                .map(|_| {
                    let mut p = [0.0; 2];
                    h.sample_into(&mut rng, &mut p);
                    s.gauge(&p)
                })
                .collect();
            let (dist, _) = math::ks_one_sample(&mut radii, |r| h.radial_cdf(r).unwrap());
            assert!(dist < 0.015, "{g:?}: KS {dist}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let thin = StarSet::new(2, Shape::Ellipse(alloc::vec![1.0, 1e-6])).unwrap();
        assert!(HomotheticDensity::new(RadialGenerator::Gauss { kappa: 0.0 }, thin).is_err());
        assert!(HomotheticDensity::new(RadialGenerator::Gauss { kappa: -2.0 }, StarSet::ball(2)).is_err());
    }

    #[test]
    fn homothetic_marginal_matches_direct_integration() {
        for (g, shape) in [
            (
                RadialGenerator::HeavyShifted { lambda: 1.0 },
                StarSet::limit_set(2, 1.0, 1.0).unwrap(),
            ),
            (RadialGenerator::HeavyShifted { lambda: 2.0 }, StarSet::cube(2)),
            (RadialGenerator::StudentT { nu: 1.5 }, StarSet::ball(2)),
        ] {
            let h = HomotheticDensity::new(g.clone(), shape).unwrap();
            let m = HomotheticMarginal::new(&h).unwrap();
            assert!((m.ln_tail(0.0) + core::f64::consts::LN_2).abs() < 1e-9);
            for t in [0.3, 2.0, 17.0, 250.0] {
                let direct = math::integrate_to_inf(|s| h.numeric_marginal(0, s).unwrap(), t, 1e-7, 0.0).unwrap();
                let rel = (m.ln_tail(t).exp() / direct - 1.0).abs();
                assert!(rel < 1e-4, "{g:?} t={t}: {rel}");
            }
            for ln_q in [-1.0, -5.0, -30.0, -200.0] {
                let t = m.tail_inverse(ln_q).unwrap();
                assert!((m.ln_tail(t) - ln_q).abs() < 1e-8 * ln_q.abs());
            }
        }
    }
}
