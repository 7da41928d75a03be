//! Sample clouds and their diagnostics.
//!
//! A cloud is `n` draws divided by a scaling constant. The reports check
//! convergence onto a limit set (outside fractions and coverage of grid
//! points), Poisson intensities of heavy clouds, coordinatewise maxima and
//! the high-risk scenario normalization of light clouds.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::RngCore;

use crate::marginal::{LightMarginal, ScalingSchedule};
use crate::math;
use crate::meta::MetaMap;
use crate::partition::Space;
use crate::perturb::Model;
use crate::star::{StarSet, Target};
use crate::{Error, Result};

/// `n` points divided by `scale`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    points: Vec<f64>,
    dim: usize,
    scale: f64,
    pub model_id: String,
    pub seed: u64,
    pub space: Space,
}

impl SampleCloud {
    /// Divides raw draws by `scale`.
    pub fn from_raw(
        mut raw: Vec<f64>,
        dim: usize,
        scale: f64,
        model_id: String,
        seed: u64,
        space: Space,
    ) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Parameters("cloud scale must be positive".into()));
        }
        if dim == 0 || raw.is_empty() || raw.len() % dim != 0 {
            return Err(Error::domain("cloud needs n > 0 points of dimension d > 0"));
        }
        for (i, row) in raw.chunks_exact_mut(dim).enumerate() {
            for v in row.iter_mut() {
                *v /= scale;
                if !v.is_finite() {
                    return Err(Error::domain("non-finite point").at(i));
                }
            }
        }
        Ok(Self {
            points: raw,
            dim,
            scale,
            model_id,
            seed,
            space,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }
}

/// `n` draws from `model` on one stream, divided by the schedule's scale at `n`.
pub fn generate_cloud(
    model: &Model,
    n: usize,
    scaling: &ScalingSchedule,
    seed: u64,
    rng: &mut dyn RngCore,
    space: Space,
) -> Result<SampleCloud> {
    let scale = scaling
        .scale_at(n as u64)
        .ok_or_else(|| Error::Parameters(alloc::format!("no scale for n = {n}")))?;
    let raw = model.sample(n, rng)?;
    SampleCloud::from_raw(raw, model.dim(), scale, "model".into(), seed, space)
}

/// Outside fractions and coverage counts over an `eps` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OntoSetReport {
    pub eps: Vec<f64>,
    /// Fraction of points outside the `eps`-enlarged target.
    pub outside_frac: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    /// `coverage[i][k]`: points within Euclidean distance `eps[i]` of `grid[k]`.
    pub coverage: Vec<Vec<u64>>,
    pub n: usize,
}

impl OntoSetReport {
    pub fn min_coverage(&self, i: usize) -> u64 {
        self.coverage[i].iter().copied().min().unwrap_or(0)
    }

    fn index_of(&self, eps: f64) -> Result<usize> {
        self.eps
            .iter()
            .position(|&e| (e - eps).abs() <= 1e-12)
            .ok_or_else(|| Error::domain(alloc::format!("eps {eps} not in the report grid")))
    }

    /// Outside fraction at `eps` at most `max_outside` and every grid point
    /// covered by at least `min_count` points.
    pub fn verdict(&self, eps: f64, max_outside: f64, min_count: u64) -> Result<bool> {
        let i = self.index_of(eps)?;
        Ok(self.outside_frac[i] <= max_outside && self.min_coverage(i) >= min_count)
    }

    /// Outside fractions non-increasing and coverage non-decreasing in `eps`.
    pub fn is_monotone(&self) -> bool {
        self.outside_frac.windows(2).all(|w| w[1] <= w[0])
            && self
                .coverage
                .windows(2)
                .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b >= a))
    }
}

/// Onto-set diagnostics for a cloud. `eps` must be increasing. The
/// coverage grid is the target's, with `directions` planar directions.
pub fn onto_set_report(cloud: &SampleCloud, target: &Target, eps: &[f64], directions: usize) -> Result<OntoSetReport> {
    let grid = target.coverage_grid(directions)?;
    onto_set_report_with_grid(cloud, target, eps, grid)
}

pub fn onto_set_report_with_grid(
    cloud: &SampleCloud,
    target: &Target,
    eps: &[f64],
    grid: Vec<Vec<f64>>,
) -> Result<OntoSetReport> {
    if cloud.dim() != target.dim() {
        return Err(Error::domain("cloud and target dimensions differ"));
    }
    if eps.is_empty() || !eps.windows(2).all(|w| w[1] > w[0]) || !(eps[0] >= 0.0) {
        return Err(Error::domain("eps grid must be non-negative and increasing"));
    }
    let (set, cross) = match target {
        Target::Set(s) => (Some(s), None),
        Target::Cross(c) => (None, Some(c)),
        Target::SetAndCross(s, c) => (Some(s), Some(c)),
    };
    let m = eps.len();
    let mut outside = vec![0u64; m];
    // first eps index at which each point counts, then prefix sums
    let mut first_hit = vec![vec![0u64; grid.len()]; m];
    let e_max2 = eps[m - 1] * eps[m - 1];
    let eps2: Vec<f64> = eps.iter().map(|e| e * e).collect();
    for x in cloud.rows() {
        let g = set.map(|s| s.gauge(x));
        let dist = cross.map(|c| c.distance(x));
        // outside for all eps below the threshold where it gets inside
        for (i, &e) in eps.iter().enumerate() {
            let out_set = g.map_or(true, |g| g > 1.0 + e);
            let out_cross = dist.map_or(true, |d| d > e);
            if out_set && out_cross {
                outside[i] += 1;
            } else {
                break;
            }
        }
        for (k, p) in grid.iter().enumerate() {
            let d2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= e_max2 {
                let i = eps2.partition_point(|&e2| e2 < d2);
                first_hit[i][k] += 1;
            }
        }
    }
    for i in 1..m {
        let (done, rest) = first_hit.split_at_mut(i);
        for (c, p) in rest[0].iter_mut().zip(&done[i - 1]) {
            *c += p;
        }
    }
    let n = cloud.len();
    Ok(OntoSetReport {
        eps: eps.to_vec(),
        outside_frac: outside.iter().map(|&c| c as f64 / n as f64).collect(),
        grid,
        coverage: first_hit,
        n,
    })
}

/// One (possibly merged) bin of an intensity report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityBin {
    /// Gauge radius range; `r_hi` may be infinite.
    pub r_lo: f64,
    pub r_hi: f64,
    pub sector: usize,
    pub observed: u64,
    pub expected: f64,
    pub chi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityReport {
    pub bins: Vec<IntensityBin>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// `1 / rho{w_1 > 1}` for `rho` with density `h(w) = n_D(w)^{-(lambda + 2)}`.
pub fn intensity_normalization(shape: &StarSet, lambda: f64) -> Result<f64> {
    if shape.dim() != 2 {
        return Err(Error::Unsupported("intensity reports need d = 2".into()));
    }
    let f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        if c <= 0.0 {
            return 0.0;
        }
        let rho = 1.0 / shape.gauge(&[c, s]);
        rho.powf(lambda + 2.0) * c.powf(lambda)
    };
    let h8 = core::f64::consts::FRAC_PI_8;
    let mut v = 0.0;
    for k in -4..4 {
        v += math::integrate(f, k as f64 * h8, (k + 1) as f64 * h8, 1e-10, 0.0)?;
    }
    Ok(lambda / v)
}

/// `rho(bin)` for gauge radii in `[a, b)` and angles in `[phi0, phi1)`.
pub fn limit_mass(shape: &StarSet, lambda: f64, norm: f64, a: f64, b: f64, phi0: f64, phi1: f64) -> Result<f64> {
    let area = shape.sector_area(phi0, phi1)?;
    let radial = (a.powf(-lambda) - if b.is_finite() { b.powf(-lambda) } else { 0.0 }) / lambda;
    Ok(norm * 2.0 * area * radial)
}

/// Observed counts of a heavy cloud (scaled so that `n (1 - F_0(c_n)) = 1`)
/// against the limit Poisson intensity, binned by gauge radius (`radii`,
/// increasing, the last bin open) and `sectors` equal angular sectors.
pub fn intensity_report(
    cloud: &SampleCloud,
    shape: &StarSet,
    lambda: f64,
    radii: &[f64],
    sectors: usize,
) -> Result<IntensityReport> {
    if cloud.dim() != 2 || shape.dim() != 2 {
        return Err(Error::Unsupported("intensity reports need d = 2".into()));
    }
    if radii.is_empty() || !(radii[0] > 0.0) || !radii.windows(2).all(|w| w[1] > w[0]) || sectors == 0 {
        return Err(Error::domain("radii must be positive and increasing, sectors > 0"));
    }
    let norm = intensity_normalization(shape, lambda)?;
    let nr = radii.len();
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut counts = vec![0u64; nr * sectors];
    for x in cloud.rows() {
        let g = shape.gauge(x);
        if g < radii[0] {
            continue;
        }
        let j = radii.partition_point(|&r| r <= g) - 1;
        let mut phi = x[1].atan2(x[0]);
        if phi < 0.0 {
            phi += two_pi;
        }
        let s = ((phi / two_pi * sectors as f64) as usize).min(sectors - 1);
        counts[s * nr + j] += 1;
    }
    let mut bins = Vec::new();
    for s in 0..sectors {
        let phi0 = two_pi * s as f64 / sectors as f64;
        let phi1 = two_pi * (s + 1) as f64 / sectors as f64;
        let mut raw = Vec::with_capacity(nr);
        for j in 0..nr {
            let hi = radii.get(j + 1).copied().unwrap_or(f64::INFINITY);
            let e = limit_mass(shape, lambda, norm, radii[j], hi, phi0, phi1)?;
            raw.push((radii[j], hi, counts[s * nr + j], e));
        }
        // merge from the open outer bin inward until expected >= 5
        let mut merged: Vec<(f64, f64, u64, f64)> = Vec::new();
        let mut cur: Option<(f64, f64, u64, f64)> = None;
        for &(lo, hi, o, e) in raw.iter().rev() {
            cur = Some(match cur {
                None => (lo, hi, o, e),
                Some((_, h, o2, e2)) => (lo, h, o + o2, e + e2),
            });
            if let Some(c) = cur {
                if c.3 >= 5.0 {
                    merged.push(c);
                    cur = None;
                }
            }
        }
        if let Some((lo, _, o, e)) = cur {
            match merged.last_mut() {
                Some(last) => {
                    last.0 = lo;
                    last.2 += o;
                    last.3 += e;
                }
                None => merged.push((lo, f64::INFINITY, o, e)),
            }
        }
        for (lo, hi, o, e) in merged.into_iter().rev() {
            bins.push(IntensityBin {
                r_lo: lo,
                r_hi: hi,
                sector: s,
                observed: o,
                expected: e,
                chi2: (o as f64 - e) * (o as f64 - e) / e,
            });
        }
    }
    let chi2: f64 = bins.iter().map(|b| b.chi2).sum();
    let dof = bins.len();
    Ok(IntensityReport {
        bins,
        chi2,
        dof,
        p_value: math::chi2_sf(chi2, dof),
    })
}

/// Variance-to-mean ratio of counts.
pub fn dispersion_index(counts: &[u64]) -> f64 {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (m, sd) = math::mean_and_sd(&xs);
    sd * sd / m
}

/// Componentwise maxima of one replicate in both spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMaxima {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    /// `K(max X) == max K(X)` bitwise in every coordinate.
    pub commutes: bool,
}

/// Maxima of heavy draws `z` and of their preimages `x = K^{-1}(z)`.
pub fn rep_maxima(z: &[f64], d: usize, map: &MetaMap) -> Result<RepMaxima> {
    if d == 0 || z.is_empty() || z.len() % d != 0 {
        return Err(Error::domain("replicate needs n > 0 points of dimension d"));
    }
    let mut zm = vec![f64::NEG_INFINITY; d];
    let mut xm = vec![f64::NEG_INFINITY; d];
    let mut kxm = vec![f64::NEG_INFINITY; d];
    for (i, row) in z.chunks_exact(d).enumerate() {
        for j in 0..d {
            let x = map.inverse(row[j]).map_err(|e| e.at(i))?;
            let kx = map.forward(x).map_err(|e| e.at(i))?;
            zm[j] = zm[j].max(row[j]);
            xm[j] = xm[j].max(x);
            kxm[j] = kxm[j].max(kx);
        }
    }
    let mut commutes = true;
    for j in 0..d {
        commutes &= map.forward(xm[j])? == kxm[j];
    }
    Ok(RepMaxima { z: zm, x: xm, commutes })
}

/// Location-scale Gumbel fit by probability-weighted moments, then KS
/// against the fitted law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelFit {
    pub loc: f64,
    pub scale: f64,
    pub ks: f64,
    pub p_value: f64,
}

pub fn fit_gumbel(samples: &[f64]) -> GumbelFit {
    let mut v = samples.to_vec();
    let (loc, scale) = math::gumbel_pwm(&mut v);
    let (ks, p_value) = math::ks_one_sample(&mut v, |x| math::gumbel_cdf(x, loc, scale));
    GumbelFit {
        loc,
        scale,
        ks,
        p_value,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximaReport {
    pub reps: usize,
    pub commutes: bool,
    /// Rank vectors of the maxima across replicates agree in both spaces.
    pub ranks_equal: bool,
    /// Per coordinate: Gumbel fit of `log(max Z / c_n)`; a Frechet law with
    /// index `lambda` gives scale `1 / lambda`.
    pub frechet: Vec<GumbelFit>,
    /// Per coordinate: Gumbel fit of `(max X - b_n) / a(b_n)`.
    pub gumbel: Vec<GumbelFit>,
}

fn ranks(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut r = vec![0; v.len()];
    for (k, &i) in idx.iter().enumerate() {
        r[i] = k;
    }
    r
}

pub fn coordinatewise_maxima(reps: &[RepMaxima], c_n: f64, b_n: f64, a_bn: f64) -> Result<MaximaReport> {
    let d = reps
        .first()
        .map(|r| r.z.len())
        .ok_or(Error::TooFewSamples { got: 0, need: 1 })?;
    let mut frechet = Vec::with_capacity(d);
    let mut gumbel = Vec::with_capacity(d);
    let mut ranks_equal = true;
    for j in 0..d {
        let z: Vec<f64> = reps.iter().map(|r| r.z[j]).collect();
        let x: Vec<f64> = reps.iter().map(|r| r.x[j]).collect();
        ranks_equal &= ranks(&z) == ranks(&x);
        let lz: Vec<f64> = z.iter().map(|v| (v / c_n).ln()).collect();
        let nx: Vec<f64> = x.iter().map(|v| (v - b_n) / a_bn).collect();
        frechet.push(fit_gumbel(&lz));
        gumbel.push(fit_gumbel(&nx));
    }
    Ok(MaximaReport {
        reps: reps.len(),
        commutes: reps.iter().all(|r| r.commutes),
        ranks_equal,
        frechet,
        gumbel,
    })
}

/// Points of a planar light cloud with `y >= t`, mapped by
/// `(x, y) -> (x / t, (y - t) / a(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HighRiskSample {
    pub t: f64,
    pub a_t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Size of the raw sample.
    pub n: usize,
}

/// Minimum number of exceedances for [`extract_high_risk`].
pub const MIN_EXCEEDANCES: usize = 500;

pub fn extract_high_risk(pts: &[f64], t: f64, light: &LightMarginal) -> Result<HighRiskSample> {
    if pts.len() % 2 != 0 {
        return Err(Error::Unsupported("high-risk extraction needs d = 2".into()));
    }
    if !(t > 0.0) {
        return Err(Error::domain("threshold must be positive"));
    }
    let a_t = light.scale_function_at(t)?;
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for p in pts.chunks_exact(2) {
        if p[1] >= t {
            u.push(p[0] / t);
            v.push((p[1] - t) / a_t);
        }
    }
    if u.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewSamples {
            got: u.len(),
            need: MIN_EXCEEDANCES,
        });
    }
    Ok(HighRiskSample {
        t,
        a_t,
        u,
        v,
        n: pts.len() / 2,
    })
}

impl HighRiskSample {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Fraction of exceedances with `|u - center| < half_width`, with its
    /// binomial standard error.
    pub fn window_mass(&self, center: f64, half_width: f64) -> (f64, f64) {
        let k = self.u.iter().filter(|&&u| (u - center).abs() < half_width).count();
        binomial(k, self.len())
    }

    /// KS test of `V` against the standard exponential law.
    pub fn v_exponential_ks(&self) -> (f64, f64) {
        let mut v = self.v.clone();
        math::ks_one_sample(&mut v, |x| if x > 0.0 { -(-x).exp_m1() } else { 0.0 })
    }
}

fn binomial(k: usize, n: usize) -> (f64, f64) {
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Fractions of heavy exceedances `{y >= t}` with `x < -delta y`,
/// `|x| <= delta y` and `x > delta y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWeights {
    pub p_minus: f64,
    pub p_zero: f64,
    pub p_plus: f64,
    pub stderr: [f64; 3],
    pub exceedances: usize,
    /// Some class has fewer than 30 points.
    pub sparse: bool,
}

pub fn spectral_weights(pts: &[f64], t: f64, delta: f64) -> Result<SpectralWeights> {
    if pts.len() % 2 != 0 {
        return Err(Error::Unsupported("spectral weights need d = 2".into()));
    }
    let mut c = [0usize; 3];
    for p in pts.chunks_exact(2) {
        if p[1] >= t {
            let k = if p[0] < -delta * p[1] {
                0
            } else if p[0] > delta * p[1] {
                2
            } else {
                1
            };
            c[k] += 1;
        }
    }
    let n: usize = c.iter().sum();
    if n == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let w = c.map(|k| binomial(k, n));
    Ok(SpectralWeights {
        p_minus: w[0].0,
        p_zero: w[1].0,
        p_plus: w[2].0,
        stderr: [w[0].1, w[1].1, w[2].1],
        exceedances: n,
        sparse: c.iter().any(|&k| k < 30),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{HomotheticDensity, RadialGenerator};
    use crate::marginal::{scaling_constants, HeavyMarginal, Marginal, ScalingKind, SymmetricLaw};
    use crate::perturb::{standard_heavy, DiagonalLaw};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e11() -> StarSet {
        StarSet::limit_set(2, 1.0, 1.0).unwrap()
    }

    fn standard() -> Model {
        let h = HomotheticDensity::new(RadialGenerator::HeavyShifted { lambda: 1.0 }, e11()).unwrap();
        standard_heavy(h, HeavyMarginal::pareto(1.0).unwrap()).unwrap()
    }

    fn cloud_of(pts: Vec<f64>, scale: f64) -> SampleCloud {
        SampleCloud::from_raw(pts, 2, scale, "test".into(), 0, Space::Z).unwrap()
    }

    #[test]
    fn uniform_cloud_in_e_is_never_outside() {
        let e = e11();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut pts = Vec::new();
        while pts.len() < 40_000 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if e.gauge(&x) <= 1.0 {
                pts.extend_from_slice(&x);
            }
        }
        let c = cloud_of(pts, 1.0);
        let r = onto_set_report(&c, &Target::Set(e), &[0.0, 0.05, 0.15], 64).unwrap();
        assert!(r.outside_frac.iter().all(|&f| f == 0.0));
        assert!(r.is_monotone());
        assert!(r.verdict(0.15, 1e-3, 1).unwrap());
    }

    #[test]
    fn scale_for_ten_points() {
        let p = HeavyMarginal::pareto(1.0).unwrap();
        let s = scaling_constants(&p, ScalingKind::HeavyTail, &[10]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = HomotheticDensity::new(RadialGenerator::HeavyShifted { lambda: 1.0 }, StarSet::ball(2)).unwrap();
        let c = generate_cloud(&h.into(), 10, &s, 1, &mut rng, Space::Z).unwrap();
        assert_eq!(c.len(), 10);
        assert!((c.scale() - 4.0).abs() < 1e-12);
    }

    fn heavy_cloud(n: usize, seed: u64) -> SampleCloud {
        let p = HeavyMarginal::pareto(1.0).unwrap();
        let c_n = p.tail_inverse(-(n as f64).ln()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        cloud_of(standard().sample(n, &mut rng).unwrap(), c_n)
    }

    #[test]
    fn intensity_matches_the_limit() {
        let c = heavy_cloud(200_000, 11);
        let radii: Vec<f64> = (0..8).map(|j| 0.01 * 2f64.powi(j)).collect();
        let r = intensity_report(&c, &e11(), 1.0, &radii, 8).unwrap();
        assert!(r.bins.iter().all(|b| b.expected >= 5.0));
        assert!(r.p_value > 1e-3, "{r:?}");
        // rho(2A) = rho(A) / 2 for an annulus A
        let count = |lo: f64, hi: f64| {
            c.rows()
                .filter(|x| {
                    let g = e11().gauge(x);
                    g >= lo && g < hi
                })
                .count() as f64
        };
        let (a, b) = (count(0.02, 0.04), count(0.04, 0.08));
        let se = (b + a / 4.0).sqrt();
        assert!((b - a / 2.0).abs() <= 3.0 * se, "{a} {b}");
    }

    #[test]
    fn maxima_commute_and_fit() {
        let p = HeavyMarginal::pareto(1.0).unwrap();
        let lap = LightMarginal::laplace();
        let map = MetaMap::new(p, lap.clone());
        let n = 2000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = standard();
        let reps: Vec<RepMaxima> = (0..400)
            .map(|_| rep_maxima(&m.sample(n, &mut rng).unwrap(), 2, &map).unwrap())
            .collect();
        let c_n = p.tail_inverse(-(n as f64).ln()).unwrap();
        let b_n = lap.tail_inverse(-(n as f64).ln()).unwrap();
        let r = coordinatewise_maxima(&reps, c_n, b_n, lap.scale_function_at(b_n).unwrap()).unwrap();
        assert!(r.commutes && r.ranks_equal);
        for f in &r.frechet {
            assert!((f.scale - 1.0).abs() < 0.15 && f.p_value > 0.01, "{f:?}");
        }
        for g in &r.gumbel {
            assert!(
                g.loc.abs() < 0.2 && (g.scale - 1.0).abs() < 0.15 && g.p_value > 0.01,
                "{g:?}"
            );
        }
    }

    #[test]
    fn high_risk_on_the_diagonals() {
        let lap = LightMarginal::laplace();
        let m = Model::Diagonal(DiagonalLaw {
            law: Marginal::Light(lap.clone()),
            dim: 2,
            random_signs: true,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = m.sample(200_000, &mut rng).unwrap();
        assert!(matches!(
            extract_high_risk(&pts, 20.0, &lap),
            Err(Error::TooFewSamples { need: 500, .. })
        ));
        let t = lap.quantile(1.0 - 1e-2).unwrap();
        let h = extract_high_risk(&pts, t, &lap).unwrap();
        let (pm, sm) = h.window_mass(-1.0, 0.1);
        let (pp, sp) = h.window_mass(1.0, 0.1);
        // on the diagonals u = +-(1 + v / t) with v ~ Exp(1)
        let want = 0.5 * -(-0.1 * t).exp_m1();
        assert!(
            (pm - want).abs() <= 3.0 * sm && (pp - want).abs() <= 3.0 * sp,
            "{pm} {pp} {want}"
        );
        assert!(h.v_exponential_ks().1 > 0.01);
        let w = spectral_weights(&pts, t, 0.05).unwrap();
        assert!((w.p_minus + w.p_zero + w.p_plus - 1.0).abs() < 1e-12);
        assert_eq!(w.p_zero, 0.0);
    }

    #[test]
    fn dispersion_of_poisson_counts() {
        let counts = [3u64, 5, 4, 6, 2, 4, 5, 3];
        let d = dispersion_index(&counts);
        assert!(d > 0.0 && d.is_finite());
    }
}
