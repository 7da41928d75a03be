//! Experiment runner: builds the model of a config, draws clouds, writes
//! reports and evaluates the gates.

use std::path::{Path, PathBuf};
use std::time::Instant;

use metacloud_core::cloud::{
    extract_high_risk, intensity_report, onto_set_report, IntensityReport, OntoSetReport, SampleCloud,
};
use metacloud_core::marginal::{LightMarginal, SymmetricLaw};
use metacloud_core::meta::Direction;
use metacloud_core::partition::{biregular_refine, prs4_sequence, quantile_start, Space};
use metacloud_core::perturb::{tail_ratio_report, Model, TailRatio};
use metacloud_core::star::Target;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::generate;
use crate::models::{self, Setup};
use crate::report::{self, fmt_g};
use crate::svg::{Overlay, Plot};

/// Tail-ratio window of the "same asymptotics" checks.
pub const RATIO_BAND: (f64, f64) = (0.8, 1.25);
pub const RATIO_LEVEL: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Gate {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub gates: Vec<Gate>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

/// Output directory plus the list of files written, in order.
struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.dir.join(name);
        report::write_file(&p, text.as_bytes())?;
        self.files.push(p);
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: Experiment,
    seed: u64,
    seeds: u32,
    n: usize,
    version: &'a str,
    threads: usize,
    wall_time_s: f64,
    passed: bool,
    gates: &'a [Gate],
}

/// Runs `cfg`, writing into `out` (created if missing).
pub fn run(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<Outcome> {
    let start = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut art = Artifacts {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let setup = Setup::new(cfg)?;
    let pool = generate::pool(threads)?;
    let mut gates = Vec::new();
    for k in 0..cfg.seeds {
        let seed = cfg.seed + k as u64;
        let g = pool.install(|| run_seed(cfg, &setup, seed, &mut art))?;
        gates.extend(g);
    }
    let manifest = Manifest {
        experiment: cfg.experiment,
        seed: cfg.seed,
        seeds: cfg.seeds,
        n: cfg.n,
        version: env!("CARGO_PKG_VERSION"),
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        passed: gates.iter().all(|g: &Gate| g.pass),
        gates: &gates,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Usage(e.to_string()))?;
    art.write("manifest.toml", &text)?;
    Ok(Outcome {
        gates,
        files: art.files,
    })
}

fn run_seed(cfg: &ExperimentConfig, setup: &Setup, seed: u64, art: &mut Artifacts) -> Result<Vec<Gate>> {
    let tag = format!("seed{seed}");
    match cfg.experiment {
        Experiment::Standard => {
            let z = setup.standard()?;
            let target = Target::Set(setup.limit.clone());
            meta_run(cfg, setup, &z, &target, seed, art, &tag, true, false)
        }
        Experiment::Thc2Cross => {
            let z = setup.axis_deleted(cfg.rings)?;
            let target = Target::Cross(models::cross());
            meta_run(cfg, setup, &z, &target, seed, art, &tag, true, false)
        }
        Experiment::Thc1Diagonal => {
            let z = setup.diagonal_spliced(cfg.prs4_eps)?;
            let target = Target::Set(setup.limit.clone());
            meta_run(cfg, setup, &z, &target, seed, art, &tag, false, true)
        }
        Experiment::Thmix => thmix_run(cfg, setup, seed, art, &tag),
        Experiment::Mixture3 => mixture3_run(cfg, seed, art, &tag),
        Experiment::Fig1Partition => fig1_run(cfg, setup, seed, art, &tag),
    }
}

/// Heavy model `z`: its meta cloud against `target`, optionally the
/// intensity of the heavy cloud and the marginal tail ratios.
#[allow(clippy::too_many_arguments)]
fn meta_run(
    cfg: &ExperimentConfig,
    setup: &Setup,
    z: &Model,
    target: &Target,
    seed: u64,
    art: &mut Artifacts,
    tag: &str,
    intensity: bool,
    tails: bool,
) -> Result<Vec<Gate>> {
    let raw = generate::sample(z, cfg.n, seed)?;
    let mut gates = Vec::new();
    if intensity {
        let c_n = scale(&setup.z_scaling(cfg.n)?, cfg.n)?;
        let zc = SampleCloud::from_raw(raw.clone(), 2, c_n, "z".into(), seed, Space::Z)?;
        let r = intensity_stage(cfg, setup, &zc)?;
        art.write(&format!("intensity_{tag}.csv"), &report::intensity_csv(&r))?;
        gates.push(intensity_gate(cfg, &r, tag));
    }
    if tails {
        let t = tail_ratio_report(&raw, 2, &setup.heavy, &[RATIO_LEVEL])?;
        art.write(&format!("tails_{tag}.csv"), &tails_csv(&t))?;
        gates.push(tail_gate(&t, tag));
    }
    let x = setup.map.push_cloud(&raw, 2, Direction::Inverse)?;
    drop(raw);
    let r_n = scale(&setup.x_scaling(cfg.n)?, cfg.n)?;
    let xc = SampleCloud::from_raw(x, 2, r_n, "x".into(), seed, Space::X)?;
    gates.push(onto_stage(cfg, &xc, target, art, tag)?);
    let mut overlays = vec![Overlay::Boundary {
        set: setup.limit.clone(),
        color: "#000000",
    }];
    if matches!(target, Target::Cross(_)) {
        overlays.push(Overlay::Cross);
    }
    plot_cloud(cfg, &xc, overlays, art, tag)?;
    Ok(gates)
}

fn thmix_run(cfg: &ExperimentConfig, setup: &Setup, seed: u64, art: &mut Artifacts, tag: &str) -> Result<Vec<Gate>> {
    let x_model = setup.light_mixture(cfg)?;
    let a = models::star(cfg.mix_shape, cfg)?;
    let target = models::mixture_target(a.clone())?;
    let raw = generate::sample(&x_model, cfg.n, seed)?;
    let z = setup.map.push_cloud(&raw, 2, Direction::Forward)?;
    let t = tail_ratio_report(&z, 2, &setup.heavy, &[RATIO_LEVEL])?;
    drop(z);
    art.write(&format!("tails_{tag}.csv"), &tails_csv(&t))?;
    let mut gates = vec![tail_gate(&t, tag)];
    let r_n = scale(&setup.x_scaling(cfg.n)?, cfg.n)?;
    let xc = SampleCloud::from_raw(raw, 2, r_n, "x".into(), seed, Space::X)?;
    gates.push(onto_stage(cfg, &xc, &target, art, tag)?);
    let overlays = vec![
        Overlay::Boundary {
            set: a,
            color: "#000000",
        },
        Overlay::Cross,
    ];
    plot_cloud(cfg, &xc, overlays, art, tag)?;
    Ok(gates)
}

/// Three light densities with normal-like marginals: mass of `U` near 0.
fn mixture3_run(cfg: &ExperimentConfig, seed: u64, art: &mut Artifacts, tag: &str) -> Result<Vec<Gate>> {
    let model = models::three_density_mixture()?;
    let g0 = LightMarginal::gaussian();
    let t = g0.quantile(1.0 - cfg.high_risk_tail)?;
    let hr = high_risk(&model, cfg.n, seed, t, &g0)?;
    let (m0, se0) = hr.window_mass(0.0, 0.05);
    let (ks, ks_p) = hr.v_exponential_ks();
    let rows = vec![
        row("t", t, 0.0),
        row("a_t", hr.a_t, 0.0),
        row("exceedances", hr.len() as f64, 0.0),
        row("mass_u_near_0", m0, se0),
        row("v_ks", ks, 0.0),
        row("v_ks_p", ks_p, 0.0),
    ];
    art.write(
        &format!("high_risk_{tag}.csv"),
        &report::table_csv(&["quantity", "value", "stderr"], &rows),
    )?;
    let z = (m0 - 2.0 / 3.0) / se0.max(f64::MIN_POSITIVE);
    Ok(vec![Gate::new(
        format!("{tag}: U-mass in |u|<0.05 vs 2/3"),
        z.abs() <= 5.0,
        format!("{} +- {} ({} exceedances)", fmt_g(m0), fmt_g(se0), hr.len()),
    )])
}

fn row(name: &str, v: f64, se: f64) -> Vec<String> {
    vec![name.into(), fmt_g(v), fmt_g(se)]
}

/// Streams `n` draws and keeps the planar points with `y >= t`.
pub fn high_risk(
    model: &Model,
    n: usize,
    seed: u64,
    t: f64,
    light: &LightMarginal,
) -> Result<metacloud_core::cloud::HighRiskSample> {
    let parts = generate::map_chunks(model, n, seed, |_, pts| {
        Ok(pts
            .chunks_exact(2)
            .filter(|p| p[1] >= t)
            .flatten()
            .copied()
            .collect::<Vec<f64>>())
    })?;
    let mut hr = extract_high_risk(&parts.concat(), t, light)?;
    hr.n = n;
    Ok(hr)
}

/// Diagonal cubes of the splice in `x`-space and the C/D/O regions of the partition.
fn fig1_run(cfg: &ExperimentConfig, setup: &Setup, seed: u64, art: &mut Artifacts, tag: &str) -> Result<Vec<Gate>> {
    let terms = prs4_sequence(cfg.prs4_eps, 2..=8, None)?;
    let rows: Vec<Vec<String>> = terms
        .iter()
        .map(|t| vec![t.n.to_string(), fmt_g(t.ln_t), fmt_g(t.ln_ln_t)])
        .collect();
    art.write("prs4.csv", &report::table_csv(&["n", "s_n", "ln_s_n"], &rows))?;
    // with K_0(s) = e^s the cube [t_{k-1}, t_{k+1}]^2 maps onto [s_{k-1}, s_{k+1}]^2
    let s: Vec<f64> = terms.iter().map(|t| t.ln_t).collect();
    let extent = 1.1 * s[3];
    let mut lines = Vec::new();
    for w in s.windows(3).filter(|w| w[0] < extent) {
        let (a, b) = (w[0], w[2].min(extent));
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            let c = [(a, a), (b, a), (b, b), (a, b), (a, a)];
            for e in c.windows(2) {
                lines.push([sx * e[0].0, sy * e[0].1, sx * e[1].0, sy * e[1].1]);
            }
        }
    }
    let z = setup.diagonal_spliced(cfg.prs4_eps)?;
    let x = setup
        .map
        .push_cloud(&generate::sample(&z, cfg.n, seed)?, 2, Direction::Inverse)?;
    let plot = Plot {
        points: &x,
        dim: 2,
        classes: None,
        extent,
        overlays: vec![Overlay::Segments {
            lines,
            color: "#d62728",
        }],
        seed,
        title: "diagonal cubes U in x-space".into(),
    };
    art.write(&format!("fig1_{tag}.svg"), &plot.render()?)?;

    // regions C (1), D (2), O (0) of the biregular x-space partition
    let std_x = setup.map.push_cloud(
        &generate::sample(&setup.standard()?, cfg.n, seed)?,
        2,
        Direction::Inverse,
    )?;
    let part = biregular_refine(&setup.x_partition(cfg.rings)?)?;
    let n0 = quantile_start();
    let classes: Vec<u8> = std_x
        .chunks_exact(2)
        .map(|p| match part.locate(p).and_then(|id| part.label(&id, n0)) {
            Ok(l) if l.is_c() => 1,
            Ok(l) if l.is_d() => 2,
            Ok(_) => 0,
            Err(_) => 3,
        })
        .collect();
    let counts: Vec<String> = (0..4u8)
        .map(|c| classes.iter().filter(|&&k| k == c).count().to_string())
        .collect();
    art.write(
        &format!("regions_{tag}.csv"),
        &report::table_csv(&["o", "c", "d", "outside"], &[counts]),
    )?;
    let extent = std_x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let plot = Plot {
        points: &std_x,
        dim: 2,
        classes: Some(&classes),
        extent,
        overlays: Vec::new(),
        seed,
        title: "C/D/O regions of the biregular partition".into(),
    };
    art.write(&format!("regions_{tag}.svg"), &plot.render()?)?;
    Ok(Vec::new())
}

fn scale(s: &metacloud_core::marginal::ScalingSchedule, n: usize) -> Result<f64> {
    s.scale_at(n as u64)
        .ok_or_else(|| Error::Usage(format!("no scale for n = {n}")))
}

pub fn intensity_stage(cfg: &ExperimentConfig, setup: &Setup, zc: &SampleCloud) -> Result<IntensityReport> {
    Ok(intensity_report(
        zc,
        &setup.shape,
        setup.heavy.lambda(),
        &cfg.intensity_radii,
        cfg.intensity_sectors,
    )?)
}

pub fn intensity_gate(cfg: &ExperimentConfig, r: &IntensityReport, tag: &str) -> Gate {
    Gate::new(
        format!("{tag}: intensity chi2"),
        r.p_value >= cfg.min_p_value,
        format!("chi2 {} on {} bins, p {}", fmt_g(r.chi2), r.dof, fmt_g(r.p_value)),
    )
}

pub fn tail_gate(t: &[TailRatio], tag: &str) -> Gate {
    let pass = t.iter().all(|r| r.within(RATIO_BAND.0, RATIO_BAND.1));
    let detail: Vec<String> = t.iter().map(|r| fmt_g(r.ratio)).collect();
    Gate::new(
        format!("{tag}: marginal tail ratios at {RATIO_LEVEL}"),
        pass,
        detail.join(" "),
    )
}

pub fn tails_csv(t: &[TailRatio]) -> String {
    let rows: Vec<Vec<String>> = t
        .iter()
        .map(|r| {
            vec![
                r.coord.to_string(),
                fmt_g(r.level),
                fmt_g(r.ratio),
                fmt_g(r.stderr),
                r.exceedances.to_string(),
            ]
        })
        .collect();
    report::table_csv(&["coord", "level", "ratio", "stderr", "exceedances"], &rows)
}

fn onto_stage(
    cfg: &ExperimentConfig,
    xc: &SampleCloud,
    target: &Target,
    art: &mut Artifacts,
    tag: &str,
) -> Result<Gate> {
    let r = onto_set_report(xc, target, &cfg.eps, cfg.directions)?;
    art.write(&format!("onto_{tag}.csv"), &report::onto_csv(&r))?;
    art.write(&format!("coverage_{tag}.csv"), &report::coverage_csv(&r))?;
    onto_gate(cfg, &r, tag)
}

pub fn onto_gate(cfg: &ExperimentConfig, r: &OntoSetReport, tag: &str) -> Result<Gate> {
    let i = r
        .eps
        .iter()
        .position(|&e| (e - cfg.gate_eps).abs() <= 1e-12)
        .ok_or_else(|| Error::Usage("gate_eps not in eps".into()))?;
    let pass = r.verdict(cfg.gate_eps, cfg.max_outside, cfg.min_coverage)?;
    let uncovered = r.coverage[i].iter().filter(|&&c| c < cfg.min_coverage).count();
    Ok(Gate::new(
        format!("{tag}: onto-set at eps {}", fmt_g(cfg.gate_eps)),
        pass,
        format!(
            "outside {} (max {}), {uncovered} of {} grid points below {}",
            fmt_g(r.outside_frac[i]),
            fmt_g(cfg.max_outside),
            r.grid.len(),
            cfg.min_coverage
        ),
    ))
}

fn plot_cloud(
    cfg: &ExperimentConfig,
    xc: &SampleCloud,
    overlays: Vec<Overlay>,
    art: &mut Artifacts,
    tag: &str,
) -> Result<()> {
    if cfg.dump_cloud {
        let p = art.dir.join(format!("cloud_{tag}.bin"));
        report::dump_cloud(&p, xc)?;
        art.files.push(p);
    }
    if cfg.svg {
        let plot = Plot {
            points: xc.points(),
            dim: xc.dim(),
            classes: None,
            extent: 1.3,
            overlays,
            seed: xc.seed,
            title: format!("scaled {} cloud, n = {}", xc.model_id, xc.len()),
        };
        art.write(&format!("cloud_{tag}.svg"), &plot.render()?)?;
    }
    Ok(())
}
