//! Bounded star-shaped sets described by their gauge `n_D`, the limit set
//! `E(lambda, theta)` and the diagonal cross.
//!
//! `D = {n_D < 1}` and `n_D(c x) = c n_D(x)` for `c >= 0`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, RngCore};

use crate::math;
use crate::{Error, Result};

/// Parameters of `E = {u : |u_1|^theta + ... + |u_d|^theta + lambda >= (lambda + d) |u|_inf^theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSetSpec {
    pub lambda: f64,
    pub theta: f64,
}

impl LimitSetSpec {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && theta > 0.0 && lambda.is_finite() && theta.is_finite()) {
            return Err(Error::Parameters(format!(
                "limit set needs lambda > 0 and theta > 0, got ({lambda}, {theta})"
            )));
        }
        Ok(Self { lambda, theta })
    }

    /// The defining inequality, evaluated directly.
    pub fn contains(&self, u: &[f64]) -> bool {
        let d = u.len() as f64;
        let (s, m) = self.sums(u);
        s + self.lambda >= (self.lambda + d) * m
    }

    // (sum |u_i|^theta, |u|_inf^theta)
    fn sums(&self, u: &[f64]) -> (f64, f64) {
        let m = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let s = u.iter().map(|x| x.abs().powf(self.theta)).sum();
        (s, m.powf(self.theta))
    }

    /// Closed-form gauge: `((lambda + d) m^theta - S)^{1/theta} / lambda^{1/theta}`.
    pub fn gauge(&self, u: &[f64]) -> f64 {
        let m = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 {
            return 0.0;
        }
        // Normalize by m so the powers stay in range.
        let d = u.len() as f64;
        let s: f64 = u.iter().map(|x| (x.abs() / m).powf(self.theta)).sum();
        let inner = ((self.lambda + d - s) / self.lambda).max(0.0);
        m * inner.powf(1.0 / self.theta)
    }

    /// Boundary point on the ray through `dir`, by bisection on the
    /// defining inequality.
    pub fn boundary_by_bisection(&self, dir: &[f64]) -> Result<Vec<f64>> {
        let m = dir.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(m > 0.0) {
            return Err(Error::Invariant("zero direction".into()));
        }
        // E lies in the unit cube, so the crossing is at t <= 1/m.
        let (mut lo, mut hi) = (0.0f64, 1.0 / m);
        let mut buf = dir.to_vec();
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            for (b, x) in buf.iter_mut().zip(dir) {
                *b = mid * x;
            }
            if self.contains(&buf) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        Ok(dir.iter().map(|x| t * x).collect())
    }
}

/// Shapes understood by [`StarSet`].
#[derive(Debug, Clone)]
pub enum Shape {
    /// `[-1, 1]^d`, gauge `|x|_inf`.
    Cube,
    /// Euclidean unit ball.
    Ball,
    /// `l^1` unit ball.
    Diamond,
    /// `l^p` unit ball, `p > 0` (star-shaped but not convex for `p < 1`).
    Lp(f64),
    /// Axis-aligned ellipsoid with semi-axes `a_i`.
    Ellipse(Vec<f64>),
    LimitSet(LimitSetSpec),
    /// Union of two positive-volume sets: gauge is the pointwise minimum.
    Union(Box<StarSet>, Box<StarSet>),
    /// `c D` for `c > 0`: gauge `n_D(x) / c`.
    Scaled(Box<StarSet>, f64),
    /// User-supplied gauge with a sup-norm bound on the set.
    Custom {
        gauge: fn(&[f64]) -> f64,
        radius: f64,
    },
}

/// A bounded star-shaped set in `R^d` with `0` in its interior.
#[derive(Debug, Clone)]
pub struct StarSet {
    dim: usize,
    shape: Shape,
}

impl StarSet {
    pub fn new(dim: usize, shape: Shape) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameters("dimension must be positive".into()));
        }
        match &shape {
            Shape::Lp(p) if !(*p > 0.0) => return Err(Error::Parameters(format!("l^p exponent {p} must be positive"))),
            Shape::Ellipse(a) if a.len() != dim => {
                return Err(Error::Parameters("ellipse needs one semi-axis per coordinate".into()))
            }
            Shape::Ellipse(a) if a.iter().any(|v| !(*v >= 0.0 && v.is_finite())) => {
                return Err(Error::Parameters("semi-axes must be finite and non-negative".into()))
            }
            Shape::Union(a, b) if a.dim != dim || b.dim != dim => {
                return Err(Error::Parameters("union of sets of different dimension".into()))
            }
            Shape::Scaled(s, c) if s.dim != dim || !(*c >= 0.0 && c.is_finite()) => {
                return Err(Error::Parameters("bad scaled set".into()))
            }
            Shape::Custom { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                return Err(Error::Parameters("custom set needs a positive bound".into()))
            }
            _ => {}
        }
        Ok(Self { dim, shape })
    }

    pub fn cube(dim: usize) -> Self {
        Self {
            dim,
            shape: Shape::Cube,
        }
    }

    pub fn ball(dim: usize) -> Self {
        Self {
            dim,
            shape: Shape::Ball,
        }
    }

    pub fn diamond(dim: usize) -> Self {
        Self {
            dim,
            shape: Shape::Diamond,
        }
    }

    pub fn limit_set(dim: usize, lambda: f64, theta: f64) -> Result<Self> {
        Self::new(dim, Shape::LimitSet(LimitSetSpec::new(lambda, theta)?))
    }

    pub fn scaled(self, c: f64) -> Result<Self> {
        let dim = self.dim;
        Self::new(dim, Shape::Scaled(Box::new(self), c))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Cube => x.iter().fold(0.0, |a: f64, v| a.max(v.abs())),
            Shape::Ball => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Shape::Diamond => x.iter().map(|v| v.abs()).sum(),
            Shape::Lp(p) => {
                let m = x.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(*p)).sum::<f64>().powf(1.0 / p)
            }
            Shape::Ellipse(a) => x
                .iter()
                .zip(a)
                .map(|(v, s)| if *v == 0.0 { 0.0 } else { (v / s) * (v / s) })
                .sum::<f64>()
                .sqrt(),
            Shape::LimitSet(e) => e.gauge(x),
            Shape::Union(a, b) => a.gauge(x).min(b.gauge(x)),
            Shape::Scaled(s, c) => s.gauge(x) / c,
            Shape::Custom { gauge, .. } => gauge(x),
        }
    }

    /// `R` with `D` inside `[-R, R]^d`.
    pub fn box_radius(&self) -> f64 {
        match &self.shape {
            Shape::Cube | Shape::Ball | Shape::Diamond | Shape::Lp(_) | Shape::LimitSet(_) => 1.0,
            Shape::Ellipse(a) => a.iter().fold(0.0, |m: f64, v| m.max(*v)),
            Shape::Union(a, b) => a.box_radius().max(b.box_radius()),
            Shape::Scaled(s, c) => s.box_radius() * c,
            Shape::Custom { radius, .. } => *radius,
        }
    }

    /// Exact `d`-volume when known in closed form.
    pub fn exact_volume(&self) -> Option<f64> {
        let d = self.dim as f64;
        match &self.shape {
            Shape::Cube => Some(2f64.powf(d)),
            Shape::Ball => Some(ball_volume(d)),
            Shape::Diamond => Some(2f64.powf(d) / math::ln_gamma(d + 1.0).exp()),
            Shape::Lp(p) => {
                Some((d * (2.0f64).ln() + d * math::ln_gamma(1.0 + 1.0 / p) - math::ln_gamma(1.0 + d / p)).exp())
            }
            Shape::Ellipse(a) => Some(ball_volume(d) * a.iter().product::<f64>()),
            Shape::Scaled(s, c) => s.exact_volume().map(|v| v * c.powf(d)),
            _ => None,
        }
    }

    /// True when the set is known to be degenerate (zero volume).
    pub fn is_degenerate(&self) -> bool {
        match &self.shape {
            Shape::Ellipse(a) => a.contains(&0.0),
            Shape::Scaled(s, c) => *c == 0.0 || s.is_degenerate(),
            Shape::Union(a, b) => a.is_degenerate() && b.is_degenerate(),
            _ => false,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::LimitSet(e) => e.contains(x),
            _ => self.gauge(x) <= 1.0,
        }
    }

    /// The boundary point `dir / n_D(dir)` on the ray through `dir`.
    pub fn boundary_point(&self, dir: &[f64]) -> Result<Vec<f64>> {
        if let Shape::LimitSet(e) = &self.shape {
            return e.boundary_by_bisection(dir);
        }
        let g = self.gauge(dir);
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Invariant(format!("gauge {g} along direction")));
        }
        Ok(dir.iter().map(|v| v / g).collect())
    }

    /// Area of `D` inside the planar sector `phi0 <= angle <= phi1` (d = 2).
    pub fn sector_area(&self, phi0: f64, phi1: f64) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::Unsupported("sector areas need d = 2".into()));
        }
        math::integrate(
            |phi| {
                let g = self.gauge(&[phi.cos(), phi.sin()]);
                0.5 / (g * g)
            },
            phi0,
            phi1,
            1e-10,
            1e-14,
        )
    }
}

fn ball_volume(d: f64) -> f64 {
    (0.5 * d * core::f64::consts::PI.ln() - math::ln_gamma(0.5 * d + 1.0)).exp()
}

/// Union of two positive-volume star sets (gauge = pointwise minimum).
pub fn union_gauge(a: &StarSet, b: &StarSet) -> Result<StarSet> {
    if a.dim != b.dim {
        return Err(Error::Parameters("union of sets of different dimension".into()));
    }
    if a.is_degenerate() || b.is_degenerate() {
        return Err(Error::ZeroVolume);
    }
    StarSet::new(a.dim, Shape::Union(Box::new(a.clone()), Box::new(b.clone())))
}

/// Monte Carlo estimate of `|S| / (2R)^d` with its standard error.
pub fn mc_volume_fraction(s: &StarSet, n: usize, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let r = s.box_radius();
    let mut x = alloc::vec![0.0; s.dim];
    let mut hits = 0usize;
    for _ in 0..n {
        for v in x.iter_mut() {
            *v = rng.random_range(-r..=r);
        }
        if s.contains(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok((p, (p * (1.0 - p) / n as f64).sqrt()))
}

/// The diagonal cross `{r delta : 0 <= r <= 1, delta in {-1, 1}^d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalCross {
    pub dim: usize,
}

impl DiagonalCross {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    /// Euclidean distance to the nearest segment `[0, delta]`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let mut best = f64::INFINITY;
        for delta in sign_vectors(x.len()) {
            let dot: f64 = x.iter().zip(&delta).map(|(a, b)| a * b).sum();
            let tau = (dot / d).clamp(0.0, 1.0);
            let dist2: f64 = x.iter().zip(&delta).map(|(a, b)| (a - tau * b) * (a - tau * b)).sum();
            best = best.min(dist2);
        }
        best.sqrt()
    }

    /// The points `r delta` for all `2^d` sign vectors.
    pub fn grid(&self, r: f64) -> Vec<Vec<f64>> {
        sign_vectors(self.dim)
            .map(|s| s.into_iter().map(|v| r * v).collect())
            .collect()
    }
}

/// All `2^d` vectors in `{-1, 1}^d`, in binary order with bit `i` set
/// meaning coordinate `i` is negative.
pub fn sign_vectors(d: usize) -> impl Iterator<Item = Vec<f64>> {
    (0u64..(1u64 << d)).map(move |bits| (0..d).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
}

/// The set a cloud should converge onto.
#[derive(Debug, Clone)]
pub enum Target {
    Set(StarSet),
    Cross(DiagonalCross),
    /// `A` together with the diagonal cross; membership is by distance for
    /// the cross part.
    SetAndCross(StarSet, DiagonalCross),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Set(s) | Target::SetAndCross(s, _) => s.dim,
            Target::Cross(c) => c.dim,
        }
    }

    /// Union of two targets. Positive-volume parts combine through their
    /// gauges; a cross part is carried along and measured by distance.
    pub fn union(self, other: Target) -> Result<Target> {
        if self.dim() != other.dim() {
            return Err(Error::Parameters("union of targets of different dimension".into()));
        }
        Ok(match (self, other) {
            (Target::Set(a), Target::Set(b)) => Target::Set(union_gauge(&a, &b)?),
            (Target::Set(a), Target::Cross(c)) | (Target::Cross(c), Target::Set(a)) => Target::SetAndCross(a, c),
            (Target::Cross(c), Target::Cross(_)) => Target::Cross(c),
            (Target::SetAndCross(a, c), Target::Set(b)) | (Target::Set(b), Target::SetAndCross(a, c)) => {
                Target::SetAndCross(union_gauge(&a, &b)?, c)
            }
            (Target::SetAndCross(a, c), Target::Cross(_)) | (Target::Cross(_), Target::SetAndCross(a, c)) => {
                Target::SetAndCross(a, c)
            }
            (Target::SetAndCross(a, c), Target::SetAndCross(b, _)) => Target::SetAndCross(union_gauge(&a, &b)?, c),
        })
    }

    /// Whether `x` lies outside the `eps`-enlargement: gauge above `1 + eps`
    /// for the set part, distance above `eps` for the cross part.
    pub fn outside(&self, x: &[f64], eps: f64) -> bool {
        match self {
            Target::Set(s) => s.gauge(x) > 1.0 + eps,
            Target::Cross(c) => c.distance(x) > eps,
            Target::SetAndCross(s, c) => s.gauge(x) > 1.0 + eps && c.distance(x) > eps,
        }
    }

    /// Coverage grid: boundary points in `directions` equispaced planar
    /// directions (d = 2) or the signed unit vectors and vertices otherwise,
    /// plus the same points at half gauge. The cross contributes `r delta`
    /// for `r in {0.5, 1}`.
    pub fn coverage_grid(&self, directions: usize) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        let add_set = |s: &StarSet, out: &mut Vec<Vec<f64>>| -> Result<()> {
            let dirs: Vec<Vec<f64>> = if s.dim == 2 {
                (0..directions)
                    .map(|k| {
                        let phi = 2.0 * core::f64::consts::PI * k as f64 / directions as f64;
                        alloc::vec![phi.cos(), phi.sin()]
                    })
                    .collect()
            } else {
                let mut v: Vec<Vec<f64>> = sign_vectors(s.dim).collect();
                for i in 0..s.dim {
                    for sg in [1.0, -1.0] {
                        let mut e = alloc::vec![0.0; s.dim];
                        e[i] = sg;
                        v.push(e);
                    }
                }
                v
            };
            for dir in &dirs {
                let p = s.boundary_point(dir)?;
                let half: Vec<f64> = p.iter().map(|v| 0.5 * v).collect();
                out.push(p);
                out.push(half);
            }
            Ok(())
        };
        match self {
            Target::Set(s) => add_set(s, &mut out)?,
            Target::Cross(c) => {
                out.extend(c.grid(0.5));
                out.extend(c.grid(1.0));
            }
            Target::SetAndCross(s, c) => {
                add_set(s, &mut out)?;
                out.extend(c.grid(0.5));
                out.extend(c.grid(1.0));
            }
        }
        Ok(out)
    }
}

/// Statistical check of a gauge on random rays: positivity, finiteness and
/// homogeneity.
pub fn check_gauge(s: &StarSet, rays: usize, rng: &mut dyn RngCore) -> Result<()> {
    let mut x = alloc::vec![0.0; s.dim];
    for _ in 0..rays {
        for v in x.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let g = s.gauge(&x);
        let c: f64 = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let gc = s.gauge(&scaled);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Invariant(format!("gauge {g} at a nonzero point")));
        }
        if (gc - c * g).abs() > 1e-9 * (1.0 + gc) {
            return Err(Error::Invariant("gauge is not positively homogeneous".into()));
        }
        if x.iter().any(|v| v.abs() / g > s.box_radius() * (1.0 + 1e-9)) {
            return Err(Error::Invariant("set exceeds its declared bound".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauge_examples() {
        assert_eq!(StarSet::cube(2).gauge(&[0.5, -0.25]), 0.5);
        assert_eq!(StarSet::ball(2).gauge(&[3.0, 4.0]), 5.0);
        assert!((StarSet::diamond(2).gauge(&[0.3, 0.2]) - 0.5).abs() < 1e-15);
        assert_eq!(StarSet::cube(3).gauge(&[0.0; 3]), 0.0);
    }

    #[test]
    fn limit_set_boundary_examples() {
        let e11 = StarSet::limit_set(2, 1.0, 1.0).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let p = e11.boundary_point(&[s, s]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-10 && (p[1] - 1.0).abs() < 1e-10);
        let p = e11.boundary_point(&[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-10 && p[1] == 0.0);
        let e12 = StarSet::limit_set(2, 1.0, 2.0).unwrap();
        let p = e12.boundary_point(&[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn closed_gauge_agrees_with_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(l, t, d) in &[(1.0, 1.0, 2), (2.0, 2.0, 2), (0.5, 3.0, 3), (3.0, 0.5, 2)] {
            let e = LimitSetSpec::new(l, t).unwrap();
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let b = e.boundary_by_bisection(&x).unwrap();
                let ratio = b[0] / x[0];
                assert!((e.gauge(&x) * ratio - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cross_distance_examples() {
        let c = DiagonalCross::new(2);
        assert_eq!(c.distance(&[0.5, 0.5]), 0.0);
        assert!((c.distance(&[1.0, 0.0]) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn union_examples() {
        let cube = StarSet::cube(2);
        let disk2 = StarSet::ball(2).scaled(2.0).unwrap();
        let u = union_gauge(&cube, &disk2).unwrap();
        assert_eq!(u.gauge(&[0.0, 1.5]), 0.75);
        let e = StarSet::limit_set(2, 1.0, 1.0).unwrap();
        let u = union_gauge(&e, &cube).unwrap();
        assert!((u.gauge(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        let flat = StarSet::new(2, Shape::Ellipse(alloc::vec![1.0, 0.0])).unwrap();
        assert!(matches!(union_gauge(&cube, &flat), Err(Error::ZeroVolume)));
        let t = Target::Set(cube.clone())
            .union(Target::Cross(DiagonalCross::new(2)))
            .unwrap();
        assert!(matches!(t, Target::SetAndCross(..)));
    }

    #[test]
    fn volume_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (v, se) = mc_volume_fraction(&StarSet::cube(2), 1000, &mut rng).unwrap();
        assert_eq!((v, se), (1.0, 0.0));
        let (v, se) = mc_volume_fraction(&StarSet::ball(2), 1_000_000, &mut rng).unwrap();
        assert!((v - core::f64::consts::FRAC_PI_4).abs() < 3.0 * se);
        assert!(mc_volume_fraction(&StarSet::ball(2), 0, &mut rng).is_err());
        let vol = StarSet::ball(2).exact_volume().unwrap();
        assert!((vol - core::f64::consts::PI).abs() < 1e-13);
        let vol = StarSet::new(2, Shape::Lp(1.0)).unwrap().exact_volume().unwrap();
        assert!((vol - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sector_area_of_disk() {
        let a = StarSet::ball(2).sector_area(0.0, 1.0).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        let a = StarSet::cube(2).sector_area(0.0, 2.0 * core::f64::consts::PI).unwrap();
        assert!((a - 4.0).abs() < 1e-9);
    }

    #[test]
    fn gauge_checks_pass_for_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in [
            StarSet::cube(2),
            StarSet::ball(3),
            StarSet::diamond(2),
            StarSet::limit_set(2, 2.0, 2.0).unwrap(),
            StarSet::new(2, Shape::Lp(0.5)).unwrap(),
        ] {
            check_gauge(&s, 500, &mut rng).unwrap();
        }
    }
}
