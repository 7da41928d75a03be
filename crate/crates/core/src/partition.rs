//! Block partitions built from nested cubes `s_n C`.
//!
//! Ring `n` is `s_{n+1} C \ s_n C`. Each coordinate of the ring is cut at
//! `+-s_{nj}`, `j = 1..m_n` (`s_{n m_n} = s_n`) and at `+-s_{n+1}`; the blocks
//! of the ring are the products of these intervals that leave `s_n C`.
//! Everything is stored as logarithms of magnitudes so that radii such as
//! `n^{n^{sqrt n}}` stay representable.
//!
//! Points on a cut belong to the lower-index block: the inner ring, and the
//! left interval in each coordinate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;
use num_traits::Float;

use crate::marginal::SymmetricLaw;
use crate::meta::MetaMap;
use crate::{Error, Result};

/// Which side of the meta map a partition lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Light-tailed side.
    X,
    /// Heavy-tailed side.
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    pub n: u32,
    /// `log s_n`.
    pub ln_inner: f64,
    /// `log s_{n+1}`.
    pub ln_outer: f64,
    /// `log s_{n1} < ... < log s_{n m_n}`.
    pub base: Vec<f64>,
    /// Positive cut magnitudes actually used, ascending, ending at `log s_{n+1}`.
    pub cuts: Vec<f64>,
    /// Whether `0` is a cut as well.
    pub zero_cut: bool,
}

impl Ring {
    fn base_cuts(&self) -> Vec<f64> {
        let mut v = self.base.clone();
        v.push(self.ln_outer);
        v
    }

    /// Number of intervals of the one-dimensional partition.
    pub fn cells(&self) -> u32 {
        (2 * self.cuts.len() + self.zero_cut as usize - 1) as u32
    }

    pub fn cell_of(&self, x: f64) -> u32 {
        cell_in(&self.cuts, self.zero_cut, x)
    }

    /// Signed endpoints of interval `c` as `(sign, log magnitude)`; a zero
    /// endpoint has log magnitude `-inf`.
    pub fn interval(&self, c: u32) -> [(f64, f64); 2] {
        [
            signed_point(&self.cuts, self.zero_cut, c as usize),
            signed_point(&self.cuts, self.zero_cut, c as usize + 1),
        ]
    }

    // A point strictly inside interval c.
    fn representative(&self, c: u32) -> f64 {
        let [(s0, l0), (s1, l1)] = self.interval(c);
        if s0 != s1 {
            return 0.0;
        }
        if l0 == f64::NEG_INFINITY {
            return s1 * 0.5 * l1.exp();
        }
        if l1 == f64::NEG_INFINITY {
            return s0 * 0.5 * l0.exp();
        }
        s0 * (0.5 * (l0 + l1)).exp()
    }

    /// Largest gap of `0 < s_{n1} < ... < s_n` (refined cuts included)
    /// relative to `s_n`.
    pub fn max_gap_ratio(&self) -> f64 {
        let mut prev = f64::NEG_INFINITY;
        let mut best = 0.0f64;
        for &c in self.cuts.iter().filter(|&&c| c <= self.ln_inner) {
            let gap = (c - self.ln_inner).exp() - (prev - self.ln_inner).exp();
            best = best.max(gap);
            prev = c;
        }
        best
    }
}

fn cell_in(cuts: &[f64], zero_cut: bool, x: f64) -> u32 {
    let k = cuts.len();
    let lx = x.abs().ln();
    if x > 0.0 {
        let below = cuts.partition_point(|&c| c < lx);
        (k + zero_cut as usize + below - 1) as u32
    } else if x < 0.0 {
        let at_most = cuts.partition_point(|&c| c <= lx);
        (k - 1).saturating_sub(at_most) as u32
    } else {
        (k - 1) as u32
    }
}

fn signed_point(cuts: &[f64], zero_cut: bool, i: usize) -> (f64, f64) {
    let k = cuts.len();
    if i < k {
        (-1.0, cuts[k - 1 - i])
    } else if zero_cut && i == k {
        (1.0, f64::NEG_INFINITY)
    } else {
        (1.0, cuts[i - k - zero_cut as usize])
    }
}

/// Index of a block: ring `None` is the central cube.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub ring: Option<u32>,
    pub cells: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub dim: usize,
    pub space: Space,
    /// `log` of the central cube radius.
    pub ln_central: f64,
    pub rings: Vec<Ring>,
    /// How the radii were produced, for dumps.
    pub rule: String,
}

/// Smallest `n >= 2` from which `n e^{-sqrt n} < 1/2` holds for all later `n`,
/// so that every `s_{n1}` of the quantile partition is positive.
pub fn quantile_start() -> u32 {
    let mut n = 64u32;
    while n > 2 && ((n - 1) as f64) * (-((n - 1) as f64).sqrt()).exp() < 0.5 {
        n -= 1;
    }
    n
}

impl BlockPartition {
    /// General constructor from `log s_n` and `log s_{nj}` (`j = 1..m_n`).
    pub fn from_fn(
        dim: usize,
        space: Space,
        rings: core::ops::RangeInclusive<u32>,
        mut ln_radius: impl FnMut(u32) -> Result<f64>,
        mut ln_division: impl FnMut(u32, u32) -> Result<f64>,
        mut m: impl FnMut(u32) -> u32,
        rule: String,
    ) -> Result<Self> {
        if dim == 0 || rings.is_empty() {
            return Err(Error::domain("partition needs d >= 1 and a ring"));
        }
        let start = *rings.start();
        let ln_central = ln_radius(start)?;
        let mut out = Vec::new();
        let mut inner = ln_central;
        for n in rings {
            let outer = ln_radius(n + 1)?;
            let mn = m(n);
            let mut base = Vec::with_capacity(mn as usize);
            for j in 1..=mn {
                base.push(if j == mn { inner } else { ln_division(n, j)? });
            }
            let ok = base.windows(2).all(|w| w[1] > w[0])
                && outer > inner
                && base.iter().all(|v| v.is_finite())
                && outer.is_finite();
            if !ok {
                return Err(Error::numeric(alloc::format!(
                    "ring {n}: radii are not strictly increasing or not finite"
                )));
            }
            let mut cuts = base.clone();
            cuts.push(outer);
            out.push(Ring {
                n,
                ln_inner: inner,
                ln_outer: outer,
                base,
                cuts,
                zero_cut: false,
            });
            inner = outer;
        }
        Ok(Self {
            dim,
            space,
            ln_central,
            rings: out,
            rule,
        })
    }

    pub fn ring(&self, n: u32) -> Option<&Ring> {
        let first = self.rings.first()?.n;
        self.rings.get(n.checked_sub(first)? as usize)
    }

    /// `log s_n` for ring index `n` (and `n + 1` of the last ring).
    pub fn ln_radius(&self, n: u32) -> Option<f64> {
        if let Some(r) = self.ring(n) {
            return Some(r.ln_inner);
        }
        let last = self.rings.last()?;
        (n == last.n + 1).then_some(last.ln_outer)
    }

    /// `log s_{nj}`.
    pub fn ln_division(&self, n: u32, j: u32) -> Option<f64> {
        self.ring(n)?.base.get(j.checked_sub(1)? as usize).copied()
    }

    pub fn locate(&self, x: &[f64]) -> Result<BlockId> {
        if x.len() != self.dim {
            return Err(Error::domain("point has the wrong dimension"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("point is not finite"));
        }
        let m = x.iter().fold(f64::NEG_INFINITY, |a, v| a.max(v.abs().ln()));
        if m <= self.ln_central {
            return Ok(BlockId {
                ring: None,
                cells: alloc::vec![0; self.dim],
            });
        }
        let i = self.rings.partition_point(|r| r.ln_outer < m);
        let ring = self.rings.get(i).ok_or(Error::OutOfRange)?;
        Ok(BlockId {
            ring: Some(ring.n),
            cells: x.iter().map(|&v| ring.cell_of(v)).collect(),
        })
    }

    /// Text dump: a header, then one line per ring with the ring index,
    /// `log s_n`, `log s_{n+1}` and the positive division log-points.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# block partition d={} space={:?} rule={}",
            self.dim, self.space, self.rule
        );
        let _ = writeln!(s, "# central log_radius {:e}", self.ln_central);
        let _ = writeln!(s, "# ring log_s_n log_s_n+1 zero_cut division_log_points...");
        for r in &self.rings {
            let _ = write!(s, "{} {:e} {:e} {}", r.n, r.ln_inner, r.ln_outer, r.zero_cut as u8);
            for c in &r.cuts[..r.cuts.len() - 1] {
                let _ = write!(s, " {c:e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Quantile partition: `m_n = n`, `p_n = e^{-sqrt n}`, `1 - F(s_n) = p_n` and
/// `1 - F(s_{nj}) = n p_n / j`. Rings start at [`quantile_start`].
pub fn build_quantile_partition(
    law: &dyn SymmetricLaw,
    space: Space,
    dim: usize,
    n_max: u32,
) -> Result<BlockPartition> {
    let start = quantile_start();
    if n_max < start {
        return Err(Error::domain(alloc::format!("need at least {start} rings")));
    }
    let ln_q = |n: u32, j: u32| (n as f64).ln() - (n as f64).sqrt() - (j as f64).ln();
    BlockPartition::from_fn(
        dim,
        space,
        start..=n_max,
        |n| law.ln_tail_inverse(-(n as f64).sqrt()),
        |n, j| law.ln_tail_inverse(ln_q(n, j)),
        |n| n,
        "quantile m_n=n p_n=exp(-sqrt n)".into(),
    )
}

/// `s_{n+1}/s_n` and `Delta_n/s_n` over a window of rings.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub rings: Vec<u32>,
    pub growth: Vec<f64>,
    pub gap: Vec<f64>,
    /// Both sequences monotone toward 1 and 0 over the second half.
    pub regular_trending: bool,
}

pub fn regularity_report(p: &BlockPartition, window: core::ops::RangeInclusive<u32>) -> Result<RegularityReport> {
    let mut rings = Vec::new();
    let mut growth = Vec::new();
    let mut gap = Vec::new();
    for n in window {
        let r = p.ring(n).ok_or(Error::OutOfRange)?;
        rings.push(n);
        growth.push((r.ln_outer - r.ln_inner).exp());
        gap.push(r.max_gap_ratio());
    }
    let half = rings.len() / 2;
    let non_increasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let regular_trending = !rings.is_empty() && non_increasing(&growth[half..]) && non_increasing(&gap[half..]);
    Ok(RegularityReport {
        rings,
        growth,
        gap,
        regular_trending,
    })
}

/// Adds the cuts `k s_{n1}/n`, `k = 0..n-1`, to every ring (d = 2). The
/// four axis blocks of ring `n` are split into `2n` congruent cells.
pub fn biregular_refine(p: &BlockPartition) -> Result<BlockPartition> {
    if p.dim != 2 {
        return Err(Error::Unsupported("biregular refinement needs d = 2".into()));
    }
    let mut out = p.clone();
    for r in out.rings.iter_mut() {
        if r.zero_cut {
            continue;
        }
        let n = r.n as f64;
        let s1 = r.base[0];
        let mut extra: Vec<f64> = (1..r.n).map(|k| s1 + (k as f64 / n).ln()).collect();
        extra.extend_from_slice(&r.cuts);
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        r.cuts = extra;
        r.zero_cut = true;
    }
    out.rule.push_str(" + biregular");
    Ok(out)
}

/// The partition `K(P)`: every cut is mapped by the meta map (or its inverse
/// for a `Z`-space partition) in log space.
pub fn image_under_k(p: &BlockPartition, map: &MetaMap) -> Result<BlockPartition> {
    let f = |v: f64| -> Result<f64> {
        let out = match p.space {
            Space::X => map.forward_ln(v.exp())?,
            Space::Z => map.inverse_ln(v)?.ln(),
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::numeric("image point outside the representable log range"))
        }
    };
    let mut out = p.clone();
    out.space = match p.space {
        Space::X => Space::Z,
        Space::Z => Space::X,
    };
    out.ln_central = f(p.ln_central)?;
    for r in out.rings.iter_mut() {
        r.ln_inner = f(r.ln_inner)?;
        r.ln_outer = f(r.ln_outer)?;
        for v in r.base.iter_mut().chain(r.cuts.iter_mut()) {
            *v = f(*v)?;
        }
    }
    out.rule.push_str(" mapped by K");
    Ok(out)
}

/// Compass labels of the C, D and O regions (d = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    CE,
    CN,
    CW,
    CS,
    DNE,
    DSE,
    DSW,
    DNW,
    O,
}

impl RegionLabel {
    pub fn is_c(self) -> bool {
        matches!(
            self,
            RegionLabel::CE | RegionLabel::CN | RegionLabel::CW | RegionLabel::CS
        )
    }

    pub fn is_d(self) -> bool {
        matches!(
            self,
            RegionLabel::DNE | RegionLabel::DSE | RegionLabel::DSW | RegionLabel::DNW
        )
    }
}

impl BlockPartition {
    /// Label of a block. C: axis blocks of rings `n >= n0`. D: blocks whose
    /// intervals all lie beyond `s_{n j_n}`, `j_n = floor(sqrt n)`, in
    /// magnitude (both endpoints have index `j > j_n`). O: the rest,
    /// including the central block.
    pub fn label(&self, id: &BlockId, n0: u32) -> Result<RegionLabel> {
        if self.dim != 2 {
            return Err(Error::Unsupported("region labels need d = 2".into()));
        }
        let Some(n) = id.ring else {
            return Ok(RegionLabel::O);
        };
        let ring = self.ring(n).ok_or(Error::OutOfRange)?;
        let x = ring.representative(id.cells[0]);
        let y = ring.representative(id.cells[1]);
        let base = ring.base_cuts();
        let mid = (base.len() - 1) as u32;
        let bx = cell_in(&base, false, x);
        let by = cell_in(&base, false, y);
        if n >= n0 && (bx == mid || by == mid) {
            return Ok(if by == mid {
                if x > 0.0 {
                    RegionLabel::CE
                } else {
                    RegionLabel::CW
                }
            } else if y > 0.0 {
                RegionLabel::CN
            } else {
                RegionLabel::CS
            });
        }
        let jn = (n as f64).sqrt().floor() as usize;
        // lower magnitude endpoint index of a base interval: for the interval
        // [s_{nj}, s_{n,j+1}] that index is j
        let lower = |b: u32| (b as i64 - mid as i64).unsigned_abs() as usize;
        if lower(bx) > jn && lower(by) > jn {
            return Ok(match (x > 0.0, y > 0.0) {
                (true, true) => RegionLabel::DNE,
                (true, false) => RegionLabel::DSE,
                (false, false) => RegionLabel::DSW,
                (false, true) => RegionLabel::DNW,
            });
        }
        Ok(RegionLabel::O)
    }

    /// Labels of every block in every ring, plus the central block.
    pub fn classify_regions(&self, n0: u32) -> Result<Vec<(BlockId, RegionLabel)>> {
        if self.dim != 2 {
            return Err(Error::Unsupported("region labels need d = 2".into()));
        }
        let central = BlockId {
            ring: None,
            cells: alloc::vec![0, 0],
        };
        let mut out = alloc::vec![(central, RegionLabel::O)];
        for r in &self.rings {
            let last = r.cells() - 1;
            for cx in 0..=last {
                for cy in 0..=last {
                    if cx != 0 && cx != last && cy != 0 && cy != last {
                        continue;
                    }
                    let id = BlockId {
                        ring: Some(r.n),
                        cells: alloc::vec![cx, cy],
                    };
                    let l = self.label(&id, n0)?;
                    out.push((id, l));
                }
            }
        }
        Ok(out)
    }
}

/// One term of `t_n = n^{n^{n^{1-eps}}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prs4Term {
    pub n: u32,
    /// `log log t_n = n^{1-eps} log n + log log n`.
    pub ln_ln_t: f64,
    /// `log t_n = n^{n^{1-eps}} log n`; infinite once it leaves `f64`.
    pub ln_t: f64,
    /// `s_n = K_0^{-1}(t_n)` when a map was given and `log t_n` is finite.
    pub s: Option<f64>,
}

pub fn prs4_sequence(eps: f64, ns: core::ops::RangeInclusive<u32>, map: Option<&MetaMap>) -> Result<Vec<Prs4Term>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps must lie in (0, 1)"));
    }
    if *ns.start() < 2 {
        return Err(Error::domain("the sequence starts at n = 2"));
    }
    ns.map(|n| {
        let nf = n as f64;
        let ln_ln_t = nf.powf(1.0 - eps) * nf.ln() + nf.ln().ln();
        let ln_t = ln_ln_t.exp();
        let s = match map {
            Some(m) if ln_t.is_finite() => Some(m.inverse_ln(ln_t)?),
            _ => None,
        };
        Ok(Prs4Term { n, ln_ln_t, ln_t, s })
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::{HeavyMarginal, LightMarginal};

    fn heavy() -> BlockPartition {
        build_quantile_partition(&HeavyMarginal::pareto(1.0).unwrap(), Space::Z, 2, 420).unwrap()
    }

    fn light() -> BlockPartition {
        build_quantile_partition(&LightMarginal::laplace(), Space::X, 2, 420).unwrap()
    }

    #[test]
    fn start_index() {
        assert_eq!(quantile_start(), 7);
    }

    #[test]
    fn quantile_partition_examples() {
        let z = heavy();
        let t16 = z.ln_radius(16).unwrap().exp();
        assert!((t16 - (4f64.exp() / 2.0 - 1.0)).abs() < 1e-12 * t16);
        let ratio = (z.ln_division(100, 1).unwrap() - z.ln_radius(100).unwrap()).exp();
        assert!((ratio - 0.01).abs() < 0.05 * 0.01);
        let x = light();
        let n = 400f64;
        let s1 = x.ln_division(400, 1).unwrap().exp();
        let sn = x.ln_radius(400).unwrap().exp();
        assert!((s1 - (n.sqrt() - (2.0 * n).ln())).abs() < 1e-12 * s1);
        assert!((sn - (n.sqrt() - 2f64.ln())).abs() < 1e-12 * sn);
    }

    #[test]
    fn regularity_verdicts() {
        let z = regularity_report(&heavy(), 50..=200).unwrap();
        assert!(z.regular_trending);
        let i = z.rings.iter().position(|&n| n == 100).unwrap();
        assert!(z.gap[i] <= 0.05);
        let x = regularity_report(&light(), 50..=200).unwrap();
        assert!(!x.regular_trending);
        let toy = BlockPartition::from_fn(
            2,
            Space::X,
            1..=100,
            |n| Ok((n as f64).ln()),
            |_, j| Ok((j as f64).ln()),
            |n| n,
            "toy".into(),
        )
        .unwrap();
        assert!(regularity_report(&toy, 10..=100).unwrap().regular_trending);
    }

    #[test]
    fn biregular_is_regular_on_both_sides() {
        let map = MetaMap::new(HeavyMarginal::pareto(1.0).unwrap(), LightMarginal::laplace());
        let x = biregular_refine(&light()).unwrap();
        let z = image_under_k(&x, &map).unwrap();
        assert!(regularity_report(&x, 50..=200).unwrap().regular_trending);
        assert!(regularity_report(&z, 50..=200).unwrap().regular_trending);
        let r = x.ring(100).unwrap();
        assert!((r.base[0] - (100f64).ln() - r.ln_inner).exp() <= 0.02);
    }

    #[test]
    fn image_matches_heavy_side() {
        let map = MetaMap::new(HeavyMarginal::pareto(1.0).unwrap(), LightMarginal::laplace());
        let img = image_under_k(&light(), &map).unwrap();
        let z = heavy();
        for (a, b) in img.rings.iter().zip(&z.rings) {
            for (u, v) in a.cuts.iter().zip(&b.cuts) {
                assert!((u - v).abs() <= 1e-6 * v.abs());
            }
        }
    }

    #[test]
    fn locate_rules() {
        let x = light();
        assert_eq!(x.locate(&[0.0, 0.0]).unwrap().ring, None);
        let r = x.ring(20).unwrap().clone();
        let s1 = r.base[0].exp();
        let outer = r.ln_outer.exp();
        // on the cut +s_{n1}: left interval is the middle one
        let id = x.locate(&[outer, s1]).unwrap();
        assert_eq!(id.ring, Some(20));
        assert_eq!(id.cells[1], r.cuts.len() as u32 - 1);
        // on the outer cube boundary: inner ring
        let id = x.locate(&[r.ln_inner.exp(), 0.0]).unwrap();
        assert_eq!(id.ring, Some(19));
        assert!(x.locate(&[1e300, 0.0]).is_err());
    }

    #[test]
    fn labels() {
        let x = biregular_refine(&light()).unwrap();
        let r = x.ring(100).unwrap();
        let p = [0.5 * (r.ln_inner.exp() + r.ln_outer.exp()), 0.1];
        let id = x.locate(&p).unwrap();
        assert_eq!(x.label(&id, 10).unwrap(), RegionLabel::CE);
        let q = [-p[0], -p[0]];
        assert_eq!(x.label(&x.locate(&q).unwrap(), 10).unwrap(), RegionLabel::DSW);
        assert_eq!(x.label(&x.locate(&[0.0, 0.0]).unwrap(), 10).unwrap(), RegionLabel::O);
        let all = x.classify_regions(10).unwrap();
        assert!(all.iter().any(|(_, l)| l.is_c()));
        assert!(all.iter().any(|(id, l)| *l == RegionLabel::O && id.ring.is_some()));
        assert!(all.iter().any(|(_, l)| l.is_d()));
    }

    #[test]
    fn prs4_examples() {
        let t = prs4_sequence(0.5, 2..=6, None).unwrap();
        assert!((t[2].ln_t - 16.0 * 4f64.ln()).abs() < 1e-12);
        assert!(t.windows(2).all(|w| w[1].ln_t > w[0].ln_t));
        let big = prs4_sequence(0.5, 1000..=1010, None).unwrap();
        let inc: Vec<f64> = big
            .windows(2)
            .map(|w| (w[1].ln_ln_t - w[0].ln_ln_t) / w[0].ln_ln_t)
            .collect();
        assert!(inc.iter().all(|v| *v < 0.01));
    }
}
