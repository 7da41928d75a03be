//! Models of the experiments, built from a config.

use std::sync::Arc;

use metacloud_core::density::{HomotheticDensity, RadialGenerator};
use metacloud_core::marginal::{
    scaling_constants, HeavyMarginal, LightMarginal, Marginal, ScalingKind, ScalingSchedule,
};
use metacloud_core::meta::{Direction, MetaMap};
use metacloud_core::partition::{build_quantile_partition, prs4_sequence, BlockPartition, Space};
use metacloud_core::perturb::{
    concentrate_diagonal, delete_axis_blocks, lighter_generator, mix_with_light, standard_heavy, DiagonalLaw, Model,
};
use metacloud_core::star::{DiagonalCross, Shape, StarSet, Target};

use crate::config::{ExperimentConfig, HeavyKind, LightKind, MixGenerator, ShapeKind};
use crate::error::Result;

/// Marginals, meta map and sets shared by every experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub heavy: HeavyMarginal,
    pub light: LightMarginal,
    pub map: MetaMap,
    /// Level set `D` of the heavy density.
    pub shape: StarSet,
    /// `E(lambda, theta)`.
    pub limit: StarSet,
}

pub fn star(kind: ShapeKind, cfg: &ExperimentConfig) -> Result<StarSet> {
    Ok(match kind {
        ShapeKind::Cube => StarSet::cube(2),
        ShapeKind::Ball => StarSet::ball(2),
        ShapeKind::Diamond => StarSet::diamond(2),
        ShapeKind::LimitSet => StarSet::limit_set(2, cfg.lambda, cfg.theta)?,
        ShapeKind::Lp => StarSet::new(2, Shape::Lp(cfg.shape_p))?,
    })
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let heavy = match cfg.heavy {
            HeavyKind::Pareto => HeavyMarginal::pareto(cfg.lambda)?,
            HeavyKind::StudentT => HeavyMarginal::student_t(cfg.lambda)?,
        };
        let light = match cfg.light {
            LightKind::Power => LightMarginal::power(cfg.theta)?,
            LightKind::ShiftedPower => LightMarginal::shifted_power(cfg.theta)?,
            LightKind::Gaussian => LightMarginal::gaussian(),
        };
        Ok(Self {
            map: MetaMap::new(heavy, light.clone()),
            heavy,
            light,
            shape: star(cfg.shape, cfg)?,
            limit: StarSet::limit_set(2, cfg.lambda, light_theta(cfg))?,
        })
    }

    pub fn generator(&self) -> RadialGenerator {
        match self.heavy.family() {
            metacloud_core::marginal::HeavyFamily::StudentT => RadialGenerator::StudentT {
                nu: self.heavy.lambda(),
            },
            _ => RadialGenerator::HeavyShifted {
                lambda: self.heavy.lambda(),
            },
        }
    }

    /// Heavy homothetic density with exact `F_0` marginals.
    pub fn standard(&self) -> Result<Model> {
        let h = HomotheticDensity::new(self.generator(), self.shape.clone())?;
        Ok(standard_heavy(h, self.heavy)?)
    }

    pub fn z_partition(&self, rings: u32) -> Result<Arc<BlockPartition>> {
        Ok(Arc::new(build_quantile_partition(&self.heavy, Space::Z, 2, rings)?))
    }

    pub fn x_partition(&self, rings: u32) -> Result<BlockPartition> {
        Ok(build_quantile_partition(&self.light, Space::X, 2, rings)?)
    }

    /// Standard model with the axis blocks deleted.
    pub fn axis_deleted(&self, rings: u32) -> Result<Model> {
        Ok(delete_axis_blocks(self.standard()?, self.z_partition(rings)?)?)
    }

    /// Standard model with the diagonal cubes carrying `t e`, random signs.
    pub fn diagonal_spliced(&self, eps: f64) -> Result<Model> {
        let terms = prs4_sequence(eps, 2..=12, None)?;
        let diag = Model::Diagonal(DiagonalLaw {
            law: Marginal::Heavy(self.heavy),
            dim: 2,
            random_signs: true,
        });
        Ok(concentrate_diagonal(self.standard()?, diag, &terms, None)?)
    }

    /// `x = K^{-1}(z)`.
    pub fn meta(&self, z: Model) -> Model {
        Model::Push {
            inner: Box::new(z),
            map: self.map.clone(),
            dir: Direction::Inverse,
        }
    }

    /// `z = K(x)`.
    pub fn heavy_image(&self, x: Model) -> Model {
        Model::Push {
            inner: Box::new(x),
            map: self.map.clone(),
            dir: Direction::Forward,
        }
    }

    /// Meta of the axis-deleted model plus a light component on `A`.
    pub fn light_mixture(&self, cfg: &ExperimentConfig) -> Result<Model> {
        let base = self.meta(self.axis_deleted(cfg.rings)?);
        let generator = match cfg.mix_generator {
            MixGenerator::Lighter => lighter_generator(&self.light, &lighter_grid())?,
            MixGenerator::Base => match cfg.light {
                LightKind::Gaussian => RadialGenerator::Gauss { kappa: 0.0 },
                LightKind::Power => RadialGenerator::PowerExp {
                    theta: cfg.theta,
                    kappa: 0.0,
                },
                LightKind::ShiftedPower => RadialGenerator::Tabulated {
                    psi: self.light.tail_exponent().clone(),
                    kappa: 0.0,
                },
            },
        };
        let a = star(cfg.mix_shape, cfg)?;
        Ok(mix_with_light(base, a, cfg.mix_mass, generator, None)?)
    }

    /// `psi(r_n) = log n`.
    pub fn x_scaling(&self, n: usize) -> Result<ScalingSchedule> {
        Ok(scaling_constants(&self.light, ScalingKind::Psi, &[n as u64])?)
    }

    /// `n (1 - F_0(c_n)) = 1`.
    pub fn z_scaling(&self, n: usize) -> Result<ScalingSchedule> {
        Ok(scaling_constants(&self.heavy, ScalingKind::HeavyTail, &[n as u64])?)
    }
}

fn light_theta(cfg: &ExperimentConfig) -> f64 {
    match cfg.light {
        LightKind::Gaussian => 2.0,
        _ => cfg.theta,
    }
}

/// Grid of the lighter-marginal construction.
pub fn lighter_grid() -> Vec<f64> {
    (1..=400).map(|k| k as f64 * 0.5).collect()
}

pub fn cross() -> DiagonalCross {
    DiagonalCross::new(2)
}

/// Disk, square and diamond with generators `e^{-r^2/2}`, `e^{-r^2/2}/r`
/// and `r e^{-r^2/2}`, weights 1/3: all three have normal-like marginal
/// tails.
pub fn three_density_mixture() -> Result<Model> {
    let parts = [
        (StarSet::ball(2), 0.0),
        (StarSet::cube(2), -1.0),
        (StarSet::diamond(2), 1.0),
    ];
    let comps = parts
        .into_iter()
        .map(|(s, kappa)| {
            Ok((
                1.0 / 3.0,
                HomotheticDensity::new(RadialGenerator::Gauss { kappa }, s)?.into(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Model::Mixture(comps))
}

/// Onto-set target of the meta clouds of an experiment.
pub fn mixture_target(a: StarSet) -> Result<Target> {
    Ok(Target::Set(a).union(Target::Cross(cross()))?)
}
