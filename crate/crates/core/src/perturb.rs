//! Perturbed samplers: the counterexample constructions built on a base model.
//!
//! Every edit leaves the density untouched far out except on the edited
//! region, and restores total mass on a bounded set near the origin:
//!
//! * [`delete_axis_blocks`] removes the blocks hugging the coordinate planes
//!   and raises the density on the central block by a constant `c > 1`;
//! * [`concentrate_diagonal`] replaces the base on a union of diagonal cubes
//!   `U` by a law living on the diagonals, and rescales the base on a central
//!   box;
//! * [`mix_with_light`] adds a light-tailed homothetic component in `x`-space
//!   and scales everything down on a central box.
//!
//! Compensation constants come from a pilot sample with a fixed seed, so
//! constructions are reproducible.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_traits::Float;
use rand::rngs::SmallRng;
use rand::{Rng, RngCore, SeedableRng};

use crate::density::{HomotheticDensity, HomotheticMarginal, RadialGenerator};
use crate::marginal::{build_lighter_marginal, HeavyMarginal, LightMarginal, Marginal, SymmetricLaw};
use crate::math::LN_2;
use crate::meta::{Direction, MetaMap};
use crate::partition::{BlockPartition, Prs4Term};
use crate::star::StarSet;
use crate::{Error, Result};

/// Consecutive rejections after which a sampler gives up.
pub const MAX_REJECTIONS: u32 = 10_000;

/// Pilot sample size for compensation constants.
pub const PILOT: usize = 1 << 18;

const PILOT_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// A user-supplied sampler, e.g. a general `rho`-tilde replacement.
pub trait PointSampler: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()>;
}

/// Image of a symmetric marginal under `t -> t e`, optionally with an
/// independent random sign per coordinate so that every orthant diagonal is
/// charged equally. Univariate marginals equal the input law either way.
#[derive(Debug, Clone)]
pub struct DiagonalLaw {
    pub law: Marginal,
    pub dim: usize,
    pub random_signs: bool,
}

impl DiagonalLaw {
    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
        // |t| has upper tail 2 (1 - F(t))
        let u: f64 = 1.0 - rng.random::<f64>();
        let a = self.law.tail_inverse(u.ln() - LN_2)?;
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for v in out.iter_mut() {
            let sign = if self.random_signs {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                s
            };
            *v = sign * a;
        }
        Ok(())
    }
}

/// `U`: points whose coordinates are all nonzero and whose magnitudes fit in
/// one cube `[t_{k}, t_{k+2}]^d`, reflected into every orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalCubes {
    /// `log t_k`, increasing.
    pub ln_t: Vec<f64>,
}

impl DiagonalCubes {
    pub fn from_terms(terms: &[Prs4Term]) -> Result<Self> {
        let ln_t: Vec<f64> = terms.iter().map(|t| t.ln_t).collect();
        if ln_t.len() < 3 || !ln_t.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::domain("need at least three increasing terms"));
        }
        Ok(Self { ln_t })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in x {
            let l = v.abs().ln();
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if lo == f64::NEG_INFINITY {
            return false;
        }
        let k = self.ln_t.partition_point(|&l| l <= lo);
        if k == 0 {
            return false;
        }
        // k - 1 is the largest index with log t <= log min |x_i|
        self.ln_t.get(k + 1).is_some_and(|&top| hi <= top)
    }
}

#[derive(Debug, Clone)]
pub struct AxisDeletion {
    pub base: Model,
    pub partition: Arc<BlockPartition>,
    /// Density factor `c` on the central block.
    pub boost: f64,
    /// Base mass of the deleted region.
    pub deleted_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisRegion {
    Central,
    Deleted,
    Kept,
}

impl AxisDeletion {
    fn region(&self, x: &[f64]) -> Result<AxisRegion> {
        match self.partition.locate(x) {
            Ok(id) => match id.ring.and_then(|n| self.partition.ring(n)) {
                None => Ok(AxisRegion::Central),
                Some(ring) => {
                    let cut = ring.base[0];
                    Ok(if x.iter().any(|v| v.abs().ln() <= cut) {
                        AxisRegion::Deleted
                    } else {
                        AxisRegion::Kept
                    })
                }
            },
            // beyond the ring window the base is left alone
            Err(Error::OutOfRange) => Ok(AxisRegion::Kept),
            Err(e) => Err(e),
        }
    }

    pub fn is_deleted(&self, x: &[f64]) -> Result<bool> {
        Ok(self.region(x)? == AxisRegion::Deleted)
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalSplice {
    pub base: Model,
    pub replacement: Model,
    pub cubes: DiagonalCubes,
    /// `log` of the half-width of the central box `B`.
    pub ln_box: f64,
    /// Density factor on `B`.
    pub box_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpliceRegion {
    Box,
    Cubes,
    Rest,
}

impl DiagonalSplice {
    fn region(&self, x: &[f64]) -> SpliceRegion {
        let m = x.iter().fold(f64::NEG_INFINITY, |a, v| a.max(v.abs().ln()));
        if m <= self.ln_box {
            SpliceRegion::Box
        } else if self.cubes.contains(x) {
            SpliceRegion::Cubes
        } else {
            SpliceRegion::Rest
        }
    }
}

/// `base + kappa g` off the central box `|x|_inf <= half_width`, scaled by
/// `box_weight < 1` on it. `light` is a normalized density, so `kappa` is
/// the added mass before compensation.
#[derive(Debug, Clone)]
pub struct LightAugment {
    pub base: Model,
    pub light: Model,
    pub kappa: f64,
    pub half_width: f64,
    pub box_weight: f64,
}

impl LightAugment {
    fn in_box(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.half_width)
    }

    fn propose(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
        if rng.random::<f64>() * (1.0 + self.kappa) < 1.0 {
            self.base.sample_into(rng, out)
        } else {
            self.light.sample_into(rng, out)
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Homothetic(Arc<HomotheticDensity>),
    Diagonal(DiagonalLaw),
    DeleteAxisBlocks(Box<AxisDeletion>),
    Splice(Box<DiagonalSplice>),
    Augment(Box<LightAugment>),
    /// Components with weights summing to one.
    Mixture(Vec<(f64, Model)>),
    /// Coordinatewise quantile transform `to^{-1}(from(v))` of draws of
    /// `inner`, giving exact `to` marginals.
    Quantile {
        inner: Box<Model>,
        from: Arc<HomotheticMarginal>,
        to: Marginal,
    },
    /// Coordinatewise `K` or `K^{-1}` applied to draws of `inner`.
    Push {
        inner: Box<Model>,
        map: MetaMap,
        dir: Direction,
    },
    Custom(Arc<dyn PointSampler>),
}

impl From<HomotheticDensity> for Model {
    fn from(h: HomotheticDensity) -> Self {
        Model::Homothetic(Arc::new(h))
    }
}

fn give_up() -> Error {
    Error::Parameters(format!(
        "sampler acceptance below 1e-3: {MAX_REJECTIONS} consecutive rejections"
    ))
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Homothetic(h) => h.dim(),
            Model::Diagonal(l) => l.dim,
            Model::DeleteAxisBlocks(e) => e.base.dim(),
            Model::Splice(e) => e.base.dim(),
            Model::Augment(e) => e.base.dim(),
            Model::Mixture(c) => c.first().map_or(0, |(_, m)| m.dim()),
            Model::Push { inner, .. } | Model::Quantile { inner, .. } => inner.dim(),
            Model::Custom(s) => s.dim(),
        }
    }

    /// One draw into `out` (length `d`).
    pub fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
        match self {
            Model::Homothetic(h) => {
                h.sample_into(rng, out);
                Ok(())
            }
            Model::Diagonal(l) => l.sample_into(rng, out),
            Model::DeleteAxisBlocks(e) => {
                let keep = 1.0 / e.boost;
                for _ in 0..MAX_REJECTIONS {
                    e.base.sample_into(rng, out)?;
                    match e.region(out)? {
                        AxisRegion::Central => return Ok(()),
                        AxisRegion::Deleted => {}
                        AxisRegion::Kept => {
                            if rng.random::<f64>() < keep {
                                return Ok(());
                            }
                        }
                    }
                }
                Err(give_up())
            }
            Model::Splice(e) => {
                // proposal: half base, half replacement
                let top = e.box_weight.max(1.0);
                for _ in 0..MAX_REJECTIONS {
                    let from_base = rng.random::<bool>();
                    let w = if from_base {
                        e.base.sample_into(rng, out)?;
                        match e.region(out) {
                            SpliceRegion::Box => e.box_weight,
                            SpliceRegion::Cubes => 0.0,
                            SpliceRegion::Rest => 1.0,
                        }
                    } else {
                        e.replacement.sample_into(rng, out)?;
                        match e.region(out) {
                            SpliceRegion::Cubes => 1.0,
                            _ => 0.0,
                        }
                    };
                    if w > 0.0 && rng.random::<f64>() * top < w {
                        return Ok(());
                    }
                }
                Err(give_up())
            }
            Model::Augment(e) => {
                // proposal (base + kappa g) / (1 + kappa): exact off the box
                for _ in 0..MAX_REJECTIONS {
                    e.propose(rng, out)?;
                    if !e.in_box(out) || rng.random::<f64>() < e.box_weight {
                        return Ok(());
                    }
                }
                Err(give_up())
            }
            Model::Mixture(c) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, m) in c {
                    acc += w;
                    if u < acc {
                        return m.sample_into(rng, out);
                    }
                }
                match c.last() {
                    Some((_, m)) => m.sample_into(rng, out),
                    None => Err(Error::Parameters("empty mixture".into())),
                }
            }
            Model::Push { inner, map, dir } => {
                inner.sample_into(rng, out)?;
                for v in out.iter_mut() {
                    *v = match dir {
                        Direction::Forward => map.forward(*v)?,
                        Direction::Inverse => map.inverse(*v)?,
                    };
                }
                Ok(())
            }
            Model::Quantile { inner, from, to } => {
                inner.sample_into(rng, out)?;
                for v in out.iter_mut() {
                    *v = to.tail_inverse(from.ln_tail(v.abs()))?.copysign(*v);
                }
                Ok(())
            }
            Model::Custom(s) => s.sample_into(rng, out),
        }
    }

    /// `n` draws, row-major.
    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![0.0; n * d];
        for (i, row) in out.chunks_exact_mut(d).enumerate() {
            self.sample_into(rng, row).map_err(|e| e.at(i))?;
        }
        Ok(out)
    }

    /// Normalized density where one exists: `None` on singular parts and
    /// for pushed or custom models.
    pub fn density_at(&self, x: &[f64]) -> Option<f64> {
        match self {
            Model::Homothetic(h) => Some(h.density_at(x)),
            Model::Diagonal(_) | Model::Push { .. } | Model::Quantile { .. } | Model::Custom(_) => None,
            Model::DeleteAxisBlocks(e) => {
                let f = e.base.density_at(x)?;
                match e.region(x).ok()? {
                    AxisRegion::Central => Some(e.boost * f),
                    AxisRegion::Deleted => Some(0.0),
                    AxisRegion::Kept => Some(f),
                }
            }
            Model::Splice(e) => match e.region(x) {
                SpliceRegion::Box => Some(e.box_weight * e.base.density_at(x)?),
                SpliceRegion::Cubes => e.replacement.density_at(x),
                SpliceRegion::Rest => e.base.density_at(x),
            },
            Model::Augment(e) => {
                let f = e.base.density_at(x)? + e.kappa * e.light.density_at(x)?;
                Some(if e.in_box(x) { e.box_weight * f } else { f })
            }
            Model::Mixture(c) => c.iter().map(|(w, m)| m.density_at(x).map(|f| w * f)).sum(),
        }
    }
}

/// The homothetic density `h` with its marginals carried onto `heavy`
/// exactly (d = 2).
pub fn standard_heavy(h: HomotheticDensity, heavy: HeavyMarginal) -> Result<Model> {
    let from = Arc::new(HomotheticMarginal::new(&h)?);
    Ok(Model::Quantile {
        inner: Box::new(h.into()),
        from,
        to: Marginal::Heavy(heavy),
    })
}

fn pilot_rng() -> SmallRng {
    SmallRng::seed_from_u64(PILOT_SEED)
}

/// Deletes the mass of every block that meets a coordinate plane:
/// `{x : some |x_i| <= t_{n1}}` in ring `n`. The central block keeps its
/// shape and its density is raised by `c = 1 + P(deleted) / P(central)`.
pub fn delete_axis_blocks(base: Model, partition: Arc<BlockPartition>) -> Result<Model> {
    if partition.dim != base.dim() {
        return Err(Error::domain("partition and model dimensions differ"));
    }
    let mut e = AxisDeletion {
        base,
        partition,
        boost: 1.0,
        deleted_mass: 0.0,
    };
    let mut rng = pilot_rng();
    let mut x = vec![0.0; e.base.dim()];
    let (mut central, mut deleted) = (0usize, 0usize);
    for _ in 0..PILOT {
        e.base.sample_into(&mut rng, &mut x)?;
        match e.region(&x)? {
            AxisRegion::Central => central += 1,
            AxisRegion::Deleted => deleted += 1,
            AxisRegion::Kept => {}
        }
    }
    if central == 0 {
        return Err(Error::Parameters("central block has no pilot mass".into()));
    }
    e.deleted_mass = deleted as f64 / PILOT as f64;
    e.boost = 1.0 + deleted as f64 / central as f64;
    let acceptance = (central as f64 + (PILOT - central - deleted) as f64 / e.boost) / PILOT as f64;
    if acceptance < 1e-3 {
        return Err(Error::Parameters(format!("acceptance {acceptance:e} below 1e-3")));
    }
    Ok(Model::DeleteAxisBlocks(Box::new(e)))
}

/// Replaces the base on the diagonal cubes `U` by `replacement`, keeps it
/// elsewhere and rescales it on the central box `|x|_inf <= e^{ln_box}`
/// to restore total mass. `ln_box` defaults to the first term.
pub fn concentrate_diagonal(base: Model, replacement: Model, terms: &[Prs4Term], ln_box: Option<f64>) -> Result<Model> {
    if base.dim() != replacement.dim() {
        return Err(Error::domain("replacement has the wrong dimension"));
    }
    let cubes = DiagonalCubes::from_terms(terms)?;
    let ln_box = ln_box.unwrap_or(cubes.ln_t[0]);
    let mut e = DiagonalSplice {
        base,
        replacement,
        cubes,
        ln_box,
        box_weight: 1.0,
    };
    let mut rng = pilot_rng();
    let mut x = vec![0.0; e.base.dim()];
    let (mut in_box, mut rest) = (0usize, 0usize);
    for _ in 0..PILOT {
        e.base.sample_into(&mut rng, &mut x)?;
        match e.region(&x) {
            SpliceRegion::Box => in_box += 1,
            SpliceRegion::Rest => rest += 1,
            SpliceRegion::Cubes => {}
        }
    }
    let mut on_cubes = 0usize;
    for _ in 0..PILOT {
        e.replacement.sample_into(&mut rng, &mut x)?;
        on_cubes += (e.region(&x) == SpliceRegion::Cubes) as usize;
    }
    let n = PILOT as f64;
    let (fb, fr, fu) = (in_box as f64 / n, rest as f64 / n, on_cubes as f64 / n);
    let c = (1.0 - fr - fu) / fb;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameters(format!(
            "no mass left for the central box (box {fb}, rest {fr}, cubes {fu}); enlarge it"
        )));
    }
    e.box_weight = c;
    let acceptance = 0.5 * (c * fb + fr + fu) / c.max(1.0);
    if acceptance < 1e-3 {
        return Err(Error::Parameters(format!("acceptance {acceptance:e} below 1e-3")));
    }
    Ok(Model::Splice(Box::new(e)))
}

/// Adds `kappa g_*(n_A(x)) / c_A` to an `x`-space model and restores
/// total mass by scaling both on the central box `|x|_inf <= half_width`.
/// Without an explicit box, its half-width is the pilot quantile putting
/// half the final mass outside.
pub fn mix_with_light(
    base_meta: Model,
    a: StarSet,
    kappa: f64,
    generator: RadialGenerator,
    half_width: Option<f64>,
) -> Result<Model> {
    if a.box_radius() > 1.0 + 1e-12 {
        return Err(Error::domain("A must lie inside the cube [-1, 1]^d"));
    }
    if a.dim() != base_meta.dim() {
        return Err(Error::domain("A and the base model have different dimensions"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Parameters("added mass must be positive".into()));
    }
    let light: Model = HomotheticDensity::new(generator, a)?.into();
    let mut e = LightAugment {
        base: base_meta,
        light,
        kappa,
        half_width: 0.0,
        box_weight: 1.0,
    };
    let mut rng = pilot_rng();
    let mut x = vec![0.0; e.base.dim()];
    let mut sup = Vec::with_capacity(PILOT);
    for _ in 0..PILOT {
        e.propose(&mut rng, &mut x)?;
        sup.push(x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    sup.sort_unstable_by(f64::total_cmp);
    e.half_width = match half_width {
        Some(h) if h > 0.0 => h,
        Some(_) => return Err(Error::domain("box half-width must be positive")),
        None => {
            let level = 1.0 - 0.5 / (1.0 + kappa);
            sup[((level * PILOT as f64) as usize).min(PILOT - 1)]
        }
    };
    let outside = PILOT - sup.partition_point(|&m| m <= e.half_width);
    let q = (1.0 + kappa) * outside as f64 / PILOT as f64;
    if !(q < 1.0) {
        return Err(Error::Parameters(format!(
            "mass {q} outside the box exceeds one; enlarge the box"
        )));
    }
    e.box_weight = (1.0 - q) / (1.0 + kappa - q);
    let acceptance = (q + e.box_weight * (1.0 + kappa - q)) / (1.0 + kappa);
    if acceptance < 1e-3 {
        return Err(Error::Parameters(format!("acceptance {acceptance:e} below 1e-3")));
    }
    Ok(Model::Augment(Box::new(e)))
}

/// `e^{-psi_1(r)}` with `psi_1 = psi + b` the lighter exponent built from
/// `light` on `grid`, so that the component's marginals are lighter than
/// `light` itself.
pub fn lighter_generator(light: &LightMarginal, grid: &[f64]) -> Result<RadialGenerator> {
    let l = build_lighter_marginal(light, grid)?;
    Ok(RadialGenerator::Tabulated {
        psi: l.law.tail_exponent().clone(),
        kappa: 0.0,
    })
}

/// Estimated `(1 - F_j)(q) / (1 - level)` with `q` the reference quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRatio {
    pub coord: usize,
    pub level: f64,
    pub ratio: f64,
    /// Binomial standard error of `ratio`.
    pub stderr: f64,
    pub exceedances: u64,
    /// Fewer than 100 exceedances: the standard error is unreliable.
    pub few_samples: bool,
}

impl TailRatio {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.ratio >= lo && self.ratio <= hi
    }
}

pub fn tail_ratio_report(
    pts: &[f64],
    d: usize,
    reference: &dyn SymmetricLaw,
    levels: &[f64],
) -> Result<Vec<TailRatio>> {
    if d == 0 || pts.len() % d != 0 || pts.is_empty() {
        return Err(Error::domain("cloud length is not a positive multiple of d"));
    }
    let n = (pts.len() / d) as f64;
    let mut out = Vec::with_capacity(levels.len() * d);
    for &level in levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("level {level} outside (0, 1)")));
        }
        let q = reference.quantile(level)?;
        let p0 = 1.0 - level;
        for j in 0..d {
            let k = pts.iter().skip(j).step_by(d).filter(|&&v| v > q).count() as u64;
            let p = k as f64 / n;
            out.push(TailRatio {
                coord: j,
                level,
                ratio: p / p0,
                stderr: (p.max(1.0 / n) * (1.0 - p) / n).sqrt() / p0,
                exceedances: k,
                few_samples: k < 100,
            });
        }
    }
    Ok(out)
}

/// Samples `n` points of `model` and reports tail ratios against `reference`.
pub fn marginal_tail_ratio_check(
    model: &Model,
    reference: &dyn SymmetricLaw,
    levels: &[f64],
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<TailRatio>> {
    let pts = model.sample(n, rng)?;
    tail_ratio_report(&pts, model.dim(), reference, levels)
}

/// Per ring of a window: `t_{n1}/t_n` on the heavy side and `s_{n1}/s_n`
/// on the light side of the axis deletion.
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionDuality {
    pub rings: Vec<u32>,
    pub heavy_ratio: Vec<f64>,
    pub light_ratio: Vec<f64>,
    /// `heavy_ratio` non-increasing and `light_ratio` non-decreasing.
    pub monotone: bool,
}

pub fn deletion_duality(
    z: &BlockPartition,
    x: &BlockPartition,
    window: core::ops::RangeInclusive<u32>,
) -> Result<DeletionDuality> {
    let mut rings = Vec::new();
    let mut heavy_ratio = Vec::new();
    let mut light_ratio = Vec::new();
    for r in z.rings.iter().filter(|r| window.contains(&r.n)) {
        let Some(xr) = x.ring(r.n) else { continue };
        rings.push(r.n);
        heavy_ratio.push((r.base[0] - r.ln_inner).exp());
        light_ratio.push((xr.base[0] - xr.ln_inner).exp());
    }
    if rings.is_empty() {
        return Err(Error::domain("partitions share no rings"));
    }
    let monotone = heavy_ratio.windows(2).all(|w| w[1] <= w[0]) && light_ratio.windows(2).all(|w| w[1] >= w[0]);
    Ok(DeletionDuality {
        rings,
        heavy_ratio,
        light_ratio,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_quantile_partition, prs4_sequence, Space};
    use rand_chacha::ChaCha8Rng;

    fn raw() -> HomotheticDensity {
        HomotheticDensity::new(
            RadialGenerator::HeavyShifted { lambda: 1.0 },
            StarSet::limit_set(2, 1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn pareto() -> HeavyMarginal {
        HeavyMarginal::pareto(1.0).unwrap()
    }

    fn standard() -> Model {
        standard_heavy(raw(), pareto()).unwrap()
    }

    fn z_partition() -> Arc<BlockPartition> {
        Arc::new(build_quantile_partition(&pareto(), Space::Z, 2, 400).unwrap())
    }

    #[test]
    fn diagonal_cubes_membership() {
        // log t = 0, 1, 3, 10
        let u = DiagonalCubes {
            ln_t: vec![0.0, 1.0, 3.0, 10.0],
        };
        let e = |a: f64, b: f64| [a.exp(), -(b.exp())];
        assert!(u.contains(&e(0.5, 2.9)));
        assert!(!u.contains(&e(0.5, 3.1)));
        assert!(u.contains(&e(1.5, 9.0)));
        assert!(!u.contains(&e(-0.1, 0.5)));
        assert!(!u.contains(&[0.0, 5.0]));
        assert!(!u.contains(&e(3.5, 3.6)));
        assert!(u.contains(&e(2.0, 2.0)));
    }

    #[test]
    fn unperturbed_ratios_are_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = marginal_tail_ratio_check(&standard(), &pareto(), &[0.9, 0.99, 0.999], 200_000, &mut rng).unwrap();
        for t in r {
            assert!((t.ratio - 1.0).abs() <= 3.0 * t.stderr, "{t:?}");
        }
    }

    #[test]
    fn deletion_keeps_density_off_the_edit() {
        let base: Model = raw().into();
        let m = delete_axis_blocks(base.clone(), z_partition()).unwrap();
        let Model::DeleteAxisBlocks(e) = &m else { unreachable!() };
        assert!(e.boost > 1.0 && e.deleted_mass > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = base.sample(10_000, &mut rng).unwrap();
        let (mut kept, mut central) = (0, 0);
        for x in pts.chunks_exact(2) {
            let f = base.density_at(x).unwrap();
            let g = m.density_at(x).unwrap();
            match e.region(x).unwrap() {
                AxisRegion::Kept => {
                    kept += 1;
                    assert_eq!(f, g);
                }
                AxisRegion::Deleted => assert_eq!(g, 0.0),
                AxisRegion::Central => {
                    central += 1;
                    assert_eq!(g, e.boost * f);
                }
            }
        }
        assert!(kept > 0 && central > 0);
        // no draw lands in a deleted block
        let out = m.sample(20_000, &mut rng).unwrap();
        assert!(out.chunks_exact(2).all(|x| !e.is_deleted(x).unwrap()));
    }

    #[test]
    fn deletion_marginal_tail_ratio() {
        let m = delete_axis_blocks(standard(), z_partition()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = marginal_tail_ratio_check(&m, &pareto(), &[0.999], 400_000, &mut rng).unwrap();
        for t in r {
            assert!(t.within(0.8, 1.25), "{t:?}");
        }
    }

    #[test]
    fn deletion_duality_is_monotone() {
        let x = build_quantile_partition(&LightMarginal::laplace(), Space::X, 2, 400).unwrap();
        let r = deletion_duality(&z_partition(), &x, 50..=400).unwrap();
        assert!(r.monotone);
        assert!(*r.heavy_ratio.last().unwrap() <= 0.05);
        // s_{n1}/s_n = (sqrt n - log 2n) / (sqrt n - log 2)
        for (&n, &v) in r.rings.iter().zip(&r.light_ratio) {
            let q = (n as f64).sqrt();
            let want = (q - (2.0 * n as f64).ln()) / (q - LN_2);
            assert!((v / want - 1.0).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn splice_concentrates_on_the_diagonal() {
        let terms = prs4_sequence(0.5, 2..=12, None).unwrap();
        let diag = Model::Diagonal(DiagonalLaw {
            law: Marginal::Heavy(pareto()),
            dim: 2,
            random_signs: true,
        });
        let m = concentrate_diagonal(standard(), diag, &terms, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = m.sample(400_000, &mut rng).unwrap();
        for t in tail_ratio_report(&pts, 2, &pareto(), &[0.999]).unwrap() {
            assert!(t.within(0.8, 1.25), "{t:?}");
        }
        // extremes: norm beyond the 1 - 1e-3 quantile
        let q = pareto().quantile(0.999).unwrap();
        let (mut big, mut near) = (0, 0);
        for x in pts.chunks_exact(2) {
            let n = x[0].abs().max(x[1].abs());
            if n > q {
                big += 1;
                near += ((x[0].abs() - x[1].abs()).abs() <= 0.1 * n) as u32;
            }
        }
        assert!(near as f64 >= 0.9 * big as f64, "{near}/{big}");
    }

    #[test]
    fn mixture_preconditions() {
        let base = Model::Diagonal(DiagonalLaw {
            law: Marginal::Light(LightMarginal::laplace()),
            dim: 2,
            random_signs: true,
        });
        let g = RadialGenerator::PowerExp { theta: 1.0, kappa: 0.0 };
        let big = StarSet::scaled(StarSet::cube(2), 2.0).unwrap();
        assert!(matches!(
            mix_with_light(base.clone(), big, 0.5, g.clone(), None),
            Err(Error::Domain(_))
        ));
        assert!(mix_with_light(base.clone(), StarSet::cube(2), 0.0, g.clone(), None).is_err());
        // a tiny box cannot absorb the added mass
        assert!(mix_with_light(base.clone(), StarSet::cube(2), 0.5, g.clone(), Some(1e-3)).is_err());
        let m = mix_with_light(base, StarSet::cube(2), 0.5, g, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(m.sample(100, &mut rng).unwrap().len(), 200);
    }

    #[test]
    fn augment_is_exact_off_the_box() {
        let base: Model = HomotheticDensity::new(RadialGenerator::Gauss { kappa: 0.0 }, StarSet::ball(2))
            .unwrap()
            .into();
        let g = RadialGenerator::PowerExp { theta: 1.0, kappa: 0.0 };
        let light: Model = HomotheticDensity::new(g.clone(), StarSet::cube(2)).unwrap().into();
        let m = mix_with_light(base.clone(), StarSet::cube(2), 0.5, g, None).unwrap();
        let Model::Augment(e) = &m else { unreachable!() };
        assert!(e.box_weight > 0.0 && e.box_weight < 1.0);
        let x = [e.half_width + 0.3, 0.2];
        let want = base.density_at(&x).unwrap() + 0.5 * light.density_at(&x).unwrap();
        assert_eq!(m.density_at(&x).unwrap(), want);
        // P(x_1 > 1.5 h) = P_base + kappa P_light
        let cut = 1.5 * e.half_width;
        let n = 200_000;
        let frac = |m: &Model, seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = m.sample(n, &mut rng).unwrap();
            pts.chunks_exact(2).filter(|x| x[0] > cut).count() as f64 / n as f64
        };
        let (pm, pb, pl) = (frac(&m, 11), frac(&base, 12), frac(&light, 13));
        let want = pb + 0.5 * pl;
        let se = ((pm + pb + 0.25 * pl) / n as f64).sqrt();
        assert!((pm - want).abs() < 4.0 * se, "{pm} vs {want}");
    }

    #[test]
    fn lighter_component_tail_ratio_decreases() {
        let lap = LightMarginal::laplace();
        let grid: Vec<f64> = (1..=400).map(|k| k as f64 * 0.5).collect();
        let g = lighter_generator(&lap, &grid).unwrap();
        let h = HomotheticDensity::new(g, StarSet::cube(2)).unwrap();
        let m = HomotheticMarginal::new(&h).unwrap();
        // (1 - F^o)/(1 - G_0) along a quantile grid, eventually decreasing to 0
        let r: Vec<f64> = [20.0, 50.0, 100.0, 180.0]
            .iter()
            .map(|&s| (m.ln_tail(s) - lap.ln_tail(s)).exp())
            .collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
        assert!(r[3] < 0.2, "{r:?}");
    }

    #[test]
    fn hopeless_deletion_is_rejected() {
        #[derive(Debug)]
        struct OnAxis;
        impl PointSampler for OnAxis {
            fn dim(&self) -> usize {
                2
            }
            fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
                out[0] = 1e6 * (1.0 + rng.random::<f64>());
                out[1] = 0.0;
                Ok(())
            }
        }
        let r = delete_axis_blocks(Model::Custom(Arc::new(OnAxis)), z_partition());
        assert!(matches!(r, Err(Error::Parameters(_))));
    }
}
