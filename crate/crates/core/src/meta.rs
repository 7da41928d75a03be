//! The componentwise meta transformation `K` and the exponent-measure link.
//!
//! `K_0 = F_0^{-1} o G_0` carries the light marginal `G_0` onto the heavy
//! marginal `F_0`. Both laws are symmetric, so `K_0` is odd and is evaluated
//! on `[0, inf)` by composing log tails: `K_0(s) = F_0^{-1}(1 - q)` with
//! `log q = log(1 - G_0(s))`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::marginal::{HeavyFamily, HeavyMarginal, LightMarginal, SymmetricLaw};
use crate::{Error, Result};

/// Direction of a cloud push.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Light (`x`) to heavy (`z`): `z = K(x)`.
    Forward,
    /// Heavy to light: `x = K^{-1}(z)`.
    Inverse,
}

#[derive(Debug, Clone)]
pub struct MetaMap {
    heavy: HeavyMarginal,
    light: LightMarginal,
}

impl MetaMap {
    pub fn new(heavy: HeavyMarginal, light: LightMarginal) -> Self {
        Self { heavy, light }
    }

    pub fn heavy(&self) -> &HeavyMarginal {
        &self.heavy
    }

    pub fn light(&self) -> &LightMarginal {
        &self.light
    }

    /// Whether a closed form is registered. With the Pareto-type heavy
    /// marginal, `K_0(s) = e^{psi(s)/lambda} - 1` for any light law written
    /// as `1 - G_0 = e^{-psi}/2`.
    pub fn has_closed_form(&self) -> bool {
        matches!(self.heavy.family(), HeavyFamily::ParetoType)
    }

    /// `K_0(s)`, closed form when registered.
    pub fn forward(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::domain("meta map argument is not finite"));
        }
        let a = s.abs();
        let t = if self.has_closed_form() {
            (self.light.psi(a) / self.heavy.lambda()).exp_m1()
        } else {
            self.heavy.tail_inverse(self.light.ln_tail(a))?
        };
        Ok(t.copysign(s))
    }

    /// `K_0(s)` through the generic log-tail composition only.
    pub fn forward_numeric(&self, s: f64) -> Result<f64> {
        let t = self.heavy.tail_inverse(self.light.ln_tail(s.abs()))?;
        Ok(t.copysign(s))
    }

    /// `log K_0(s)` for `s > 0`, valid when `K_0(s)` overflows.
    pub fn forward_ln(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("log of the meta map needs s > 0"));
        }
        if self.has_closed_form() {
            return Ok(crate::math::log_expm1(self.light.psi(s) / self.heavy.lambda()));
        }
        self.heavy.ln_tail_inverse(self.light.ln_tail(s))
    }

    /// `K_0^{-1}(t)`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain("meta map argument is not finite"));
        }
        let a = t.abs();
        let s = if self.has_closed_form() {
            self.light
                .tail_exponent()
                .psi_inverse(self.heavy.lambda() * a.ln_1p())?
        } else {
            self.light.tail_inverse(self.heavy.ln_tail(a))?
        };
        Ok(s.copysign(t))
    }

    /// `K_0^{-1}(e^{ln_t})` for arguments beyond `f64` range.
    pub fn inverse_ln(&self, ln_t: f64) -> Result<f64> {
        self.light.tail_inverse(self.heavy.ln_tail_at_ln(ln_t))
    }

    /// Applies `K` or `K^{-1}` to every coordinate of a row-major cloud.
    pub fn push_cloud(&self, pts: &[f64], d: usize, dir: Direction) -> Result<Vec<f64>> {
        let mut out = pts.to_vec();
        self.push_in_place(&mut out, d, dir)?;
        Ok(out)
    }

    pub fn push_in_place(&self, pts: &mut [f64], d: usize, dir: Direction) -> Result<()> {
        if d == 0 || pts.len() % d != 0 {
            return Err(Error::domain("cloud length is not a multiple of the dimension"));
        }
        for (i, row) in pts.chunks_exact_mut(d).enumerate() {
            for v in row.iter_mut() {
                *v = match dir {
                    Direction::Forward => self.forward(*v),
                    Direction::Inverse => self.inverse(*v),
                }
                .map_err(|e| e.at(i))?;
            }
        }
        Ok(())
    }
}

/// `u |-> e^{u / lambda}` per coordinate, mapping exponent-measure
/// coordinates of the light side onto those of the heavy side. Not odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMap {
    pub lambda: f64,
}

pub fn exp_link_map(lambda: f64) -> Result<LinkMap> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameters("link map needs lambda > 0".into()));
    }
    Ok(LinkMap { lambda })
}

impl LinkMap {
    pub fn forward(&self, u: f64) -> f64 {
        (u / self.lambda).exp()
    }

    pub fn inverse(&self, w: f64) -> f64 {
        self.lambda * w.ln()
    }
}

/// Componentwise quantile transform `x_j |-> target^{-1}(achieved_j(x_j))`,
/// computed through log tails on each side of zero.
pub fn standardize_marginals(
    pts: &[f64],
    achieved: &[&dyn SymmetricLaw],
    target: &dyn SymmetricLaw,
) -> Result<Vec<f64>> {
    let d = achieved.len();
    if d == 0 || pts.len() % d != 0 {
        return Err(Error::domain("cloud length is not a multiple of the dimension"));
    }
    let mut out = pts.to_vec();
    for (i, row) in out.chunks_exact_mut(d).enumerate() {
        for (v, law) in row.iter_mut().zip(achieved) {
            if !v.is_finite() {
                return Err(Error::domain("non-finite coordinate").at(i));
            }
            let t = target.tail_inverse(law.ln_tail(v.abs())).map_err(|e| e.at(i))?;
            *v = t.copysign(*v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> MetaMap {
        MetaMap::new(HeavyMarginal::pareto(1.0).unwrap(), LightMarginal::laplace())
    }

    #[test]
    fn closed_form_examples() {
        let m = pair();
        assert!((m.forward(1.0).unwrap() - (core::f64::consts::E - 1.0)).abs() < 1e-14);
        assert_eq!(m.forward(0.0).unwrap(), 0.0);
        assert!((m.forward(3f64.ln()).unwrap() - 2.0).abs() < 1e-14);
        assert!((m.forward_numeric(3f64.ln()).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn numeric_matches_closed_form() {
        let m = pair();
        for k in 0..=400 {
            let s = k as f64 * 0.05;
            let a = m.forward(s).unwrap();
            let b = m.forward_numeric(s).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "s={s}");
        }
    }

    #[test]
    fn log_space_forward_and_inverse() {
        let m = pair();
        // K_0(s) = e^s - 1 overflows past s ~ 709
        let lt = m.forward_ln(2000.0).unwrap();
        assert!((lt - 2000.0).abs() < 1e-12);
        assert!((m.inverse_ln(lt).unwrap() - 2000.0).abs() < 1e-9);
        let t = MetaMap::new(HeavyMarginal::student_t(1.0).unwrap(), LightMarginal::laplace());
        let lt = t.forward_ln(2000.0).unwrap();
        assert!((t.inverse_ln(lt).unwrap() - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn odd_and_round_trip() {
        for m in [
            pair(),
            MetaMap::new(HeavyMarginal::student_t(2.0).unwrap(), LightMarginal::gaussian()),
            MetaMap::new(
                HeavyMarginal::pareto(0.5).unwrap(),
                LightMarginal::shifted_power(2.0).unwrap(),
            ),
        ] {
            for k in -60..=60 {
                let s = k as f64 * 0.25;
                let t = m.forward(s).unwrap();
                assert!((t + m.forward(-s).unwrap()).abs() <= 1e-9 * (1.0 + t.abs()));
                assert!((m.inverse(t).unwrap() - s).abs() <= 1e-8 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn link_examples() {
        assert_eq!(exp_link_map(1.0).unwrap().forward(0.0), 1.0);
        assert!((exp_link_map(2.0).unwrap().forward(2.0) - core::f64::consts::E).abs() < 1e-15);
        // t^{-lambda} = e^{-s} at t = 2, lambda = 1
        assert!((exp_link_map(1.0).unwrap().inverse(2.0) - 2f64.ln()).abs() < 1e-15);
        assert!(exp_link_map(0.0).is_err());
    }

    #[test]
    fn standardize_identity_and_ranks() {
        let p = HeavyMarginal::pareto(1.0).unwrap();
        let pts = [0.3, -2.0, 150.0, 7.5, -0.01, 1e6];
        let out = standardize_marginals(&pts, &[&p, &p], &p).unwrap();
        for (a, b) in pts.iter().zip(&out) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
        let t = HeavyMarginal::student_t(1.0).unwrap();
        let out = standardize_marginals(&pts, &[&t, &t], &p).unwrap();
        // Cauchy to Pareto(1): K(t)/t -> pi/2 constant ratio, ranks kept
        let col: Vec<f64> = out.iter().step_by(2).copied().collect();
        assert!(col[2] < col[0] && col[0] < col[1]);
    }

    #[test]
    fn push_reports_point_index() {
        let m = pair();
        let pts = [0.0, 1.0, f64::NAN, 2.0];
        match m.push_cloud(&pts, 2, Direction::Forward) {
            Err(Error::AtPoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }
}
