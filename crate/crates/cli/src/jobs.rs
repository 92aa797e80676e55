//! Sweep construction (including the shipped figure presets) and per-point
//! evaluation, analytic and simulated.

use rayon::prelude::*;

use telequeue::laplace::{phase_conditioned_mean, phase_weights, DisciplineId};
use telequeue::markov::DoubleQueueConfig;
use telequeue::qmath::{curve_epr, curve_request, DephasingParams, FidelityCurve, PureQubit};
use telequeue::repeater::RepeaterConfig;
use telequeue::sim::{
    estimate_mean_fidelity, estimate_service_probability, fmt_sig, run, Kind, PolicySpec,
};

use crate::config::{DisciplineKind, GridScale, Settings};
use crate::CliError;

/// What the x axis means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// `x` is the load; `lambda_r = x * lambda_e`.
    Load,
    /// `x` is the buffer size on both sides (rounded to an integer).
    Buffer,
    /// `x` is the repeater generation rate `mu`.
    Mu,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "load" => Ok(Self::Load),
            "buffer" => Ok(Self::Buffer),
            "mu" => Ok(Self::Mu),
            other => Err(CliError::validation(format!(
                "unknown sweep parameter `{other}` (expected load, buffer, mu)"
            ))),
        }
    }
}

/// One curve of a sweep: a discipline pair (and possibly its own buffer
/// size, for presets that overlay several).
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub label: String,
    pub disc_r: DisciplineKind,
    pub disc_e: DisciplineKind,
    pub buf_e: usize,
    pub buf_r: usize,
}

/// A fully resolved sweep: jobs x grid.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub jobs: Vec<SweepJob>,
    pub settings: Settings,
}

fn pair_label(disc_r: DisciplineKind, disc_e: DisciplineKind) -> String {
    format!("{}/{}", disc_r.name(), disc_e.name())
}

impl Sweep {
    pub fn from_settings(settings: &Settings, param: SweepParam) -> Result<Self, CliError> {
        settings.validate()?;
        if param == SweepParam::Buffer {
            if settings.grid_min < 1.0 {
                return Err(CliError::validation("buffer sweep needs grid_min >= 1".into()));
            }
            for kind in [settings.disc_r, settings.disc_e] {
                if matches!(kind, DisciplineKind::Fifo | DisciplineKind::Lifo) {
                    return Err(CliError::validation(
                        "buffer sweep needs finite (pushout) disciplines".into(),
                    ));
                }
            }
        }
        let job = SweepJob {
            label: pair_label(settings.disc_r, settings.disc_e),
            disc_r: settings.disc_r,
            disc_e: settings.disc_e,
            buf_e: settings.buf_e,
            buf_r: settings.buf_r,
        };
        Ok(Self { param, grid: settings.grid(), jobs: vec![job], settings: settings.clone() })
    }

    /// The shipped figure presets. Presets override the swept grid, the
    /// discipline pairs, and the buffer overlays; rates and gamma come from
    /// the settings (whose defaults are the captions' values).
    pub fn preset(name: &str, settings: &Settings) -> Result<Self, CliError> {
        let mut s = settings.clone();
        let pairs_and_buffers: (Vec<(DisciplineKind, DisciplineKind)>, Vec<usize>) = match name {
            "fig3" => {
                s.grid_min = 0.05;
                s.grid_max = 1.0;
                s.grid_points = 20;
                s.grid_scale = GridScale::Linear;
                (
                    vec![
                        (DisciplineKind::FifoPo, DisciplineKind::LifoPo),
                        (DisciplineKind::LifoPo, DisciplineKind::LifoPo),
                        (DisciplineKind::FifoPo, DisciplineKind::FifoPo),
                    ],
                    vec![10],
                )
            }
            "fig4" => {
                s.grid_min = 0.05;
                s.grid_max = 1.95;
                s.grid_points = 39;
                s.grid_scale = GridScale::Linear;
                (
                    vec![
                        (DisciplineKind::LifoPo, DisciplineKind::LifoPo),
                        (DisciplineKind::LifoPo, DisciplineKind::FifoPo),
                    ],
                    vec![2, 5, 10],
                )
            }
            "fig5" => {
                s.grid_min = 0.05;
                s.grid_max = 1.95;
                s.grid_points = 39;
                s.grid_scale = GridScale::Linear;
                (vec![(DisciplineKind::LifoPo, DisciplineKind::LifoPo)], vec![2, 5, 10])
            }
            "fig6" => {
                s.grid_min = 0.1;
                s.grid_max = 100.0;
                s.grid_points = 25;
                s.grid_scale = GridScale::Log;
                (vec![(DisciplineKind::LifoPo, DisciplineKind::LifoPo)], vec![2, 5, 10])
            }
            other => {
                return Err(CliError::validation(format!(
                    "unknown preset `{other}` (expected fig3, fig4, fig5, fig6)"
                )))
            }
        };
        let (pairs, buffers) = pairs_and_buffers;
        let tag_buffers = buffers.len() > 1;
        let mut jobs = Vec::new();
        for &(dr, de) in &pairs {
            for &b in &buffers {
                let label = if tag_buffers {
                    format!("{}:B{}", pair_label(dr, de), b)
                } else {
                    pair_label(dr, de)
                };
                jobs.push(SweepJob { label, disc_r: dr, disc_e: de, buf_e: b, buf_r: b });
            }
        }
        let param = if name == "fig6" { SweepParam::Mu } else { SweepParam::Load };
        s.validate()?;
        Ok(Self { param, grid: s.grid(), jobs, settings: s })
    }
}

/// Analytic or simulated values at one grid point; `None` marks an
/// unstable/unavailable point (reported per row, never fatal).
#[derive(Debug, Clone)]
pub struct PointResult {
    pub x: f64,
    pub label: String,
    pub mean_fidelity: Option<f64>,
    pub mean_fidelity_stderr: Option<f64>,
    pub p_serve_r: Option<f64>,
    pub p_serve_r_stderr: Option<f64>,
    pub p_serve_e: Option<f64>,
    pub p_serve_e_stderr: Option<f64>,
}

struct PointSpec {
    x: f64,
    label: String,
    cfg: DoubleQueueConfig,
    disc_r: DisciplineId,
    disc_e: DisciplineId,
    curve_r: FidelityCurve,
    curve_e: FidelityCurve,
    seed: u64,
}

fn build_points(sweep: &Sweep) -> Result<Vec<PointSpec>, CliError> {
    let s = &sweep.settings;
    let gamma = DephasingParams::new(s.gamma).map_err(CliError::from_core)?;
    let qubit = PureQubit::plus();
    let mut points = Vec::new();
    for (job_idx, job) in sweep.jobs.iter().enumerate() {
        for (pt_idx, &x) in sweep.grid.iter().enumerate() {
            let (lambda_e, lambda_r, buf_e, buf_r) = match sweep.param {
                SweepParam::Load => (s.lambda_e, x * s.lambda_e, job.buf_e, job.buf_r),
                SweepParam::Buffer => {
                    let b = x.round() as usize;
                    (s.lambda_e, s.lambda_r, b, b)
                }
                SweepParam::Mu => (x, x, job.buf_e, job.buf_r),
            };
            let (disc_r, buf_r) = job.disc_r.with_buffer(buf_r);
            let (disc_e, buf_e) = job.disc_e.with_buffer(buf_e);
            let x_out = match sweep.param {
                SweepParam::Buffer => buf_r.finite().unwrap_or(0) as f64,
                _ => x,
            };
            let cfg = DoubleQueueConfig::new(lambda_e, lambda_r, buf_e, buf_r, s.gamma, s.gamma)
                .map_err(CliError::from_core)?;
            points.push(PointSpec {
                x: x_out,
                label: job.label.clone(),
                cfg,
                disc_r,
                disc_e,
                curve_r: curve_request(&qubit, &gamma),
                curve_e: curve_epr(&qubit, &gamma),
                seed: s.seed.wrapping_add((job_idx as u64) << 32).wrapping_add(pt_idx as u64),
            });
        }
    }
    Ok(points)
}

fn empty_result(p: &PointSpec) -> PointResult {
    PointResult {
        x: p.x,
        label: p.label.clone(),
        mean_fidelity: None,
        mean_fidelity_stderr: None,
        p_serve_r: None,
        p_serve_r_stderr: None,
        p_serve_e: None,
        p_serve_e_stderr: None,
    }
}

/// Evaluates the sweep analytically. Grid points run in parallel; rows come
/// back in grid order.
pub fn analyze(sweep: &Sweep) -> Result<Vec<PointResult>, CliError> {
    let points = build_points(sweep)?;
    Ok(points
        .par_iter()
        .map(|p| {
            let mut row = empty_result(p);
            if let Ok(w) = phase_weights(&p.cfg) {
                row.p_serve_r = Some(w.ps_r);
                row.p_serve_e = Some(w.ps_e);
            }
            if let Ok(mean) =
                phase_conditioned_mean(&p.cfg, p.disc_r, p.disc_e, &p.curve_r, &p.curve_e)
            {
                row.mean_fidelity = Some(mean);
            }
            row
        })
        .collect())
}

/// Evaluates the sweep by simulation. Deterministic for a given base seed;
/// each point derives its own stream.
pub fn simulate(sweep: &Sweep) -> Result<Vec<PointResult>, CliError> {
    let points = build_points(sweep)?;
    let events = sweep.settings.events;
    Ok(points
        .par_iter()
        .map(|p| {
            let mut row = empty_result(p);
            let policy = PolicySpec::from_disciplines(p.disc_r, p.disc_e);
            let trace = run(&p.cfg, policy, events, p.seed);
            if trace.capped {
                return row; // unstable: ran into the occupancy guard
            }
            if let Ok((m, se)) = estimate_mean_fidelity(&trace, &p.curve_r, &p.curve_e) {
                row.mean_fidelity = Some(m);
                row.mean_fidelity_stderr = Some(se);
            }
            if let Ok((p_r, se)) = estimate_service_probability(&trace, Kind::Request) {
                row.p_serve_r = Some(p_r);
                row.p_serve_r_stderr = Some(se);
            }
            if let Ok((p_e, se)) = estimate_service_probability(&trace, Kind::Epr) {
                row.p_serve_e = Some(p_e);
                row.p_serve_e_stderr = Some(se);
            }
            row
        })
        .collect())
}

/// Repeater sweep rows: `mu,buffer,mean_infidelity,p_serve`.
pub fn repeater_rows(sweep: &Sweep) -> Result<Vec<(f64, usize, f64, f64)>, CliError> {
    if sweep.param != SweepParam::Mu {
        return Err(CliError::validation("repeater sweeps run over mu".into()));
    }
    let gamma = sweep.settings.gamma;
    let mut specs = Vec::new();
    for job in &sweep.jobs {
        if job.buf_e != job.buf_r {
            return Err(CliError::validation("repeater buffers are symmetric".into()));
        }
        for &mu in &sweep.grid {
            specs.push((mu, job.buf_r));
        }
    }
    specs
        .par_iter()
        .map(|&(mu, buf)| {
            let rc = RepeaterConfig::lifo_po(mu, gamma, buf).map_err(CliError::from_core)?;
            let infid = telequeue::repeater::mean_infidelity(&rc).map_err(CliError::from_core)?;
            let ps = telequeue::repeater::service_probability(&rc).map_err(CliError::from_core)?;
            Ok((mu, buf, infid, ps))
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_else(|| "nan".into())
}

/// CSV for `analyze`: `x,discipline_pair,mean_fidelity,p_serve_r,p_serve_e`.
pub fn analyze_csv(rows: &[PointResult]) -> String {
    let mut out = String::from("x,discipline_pair,mean_fidelity,p_serve_r,p_serve_e\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(r.x),
            r.label,
            fmt_opt(r.mean_fidelity),
            fmt_opt(r.p_serve_r),
            fmt_opt(r.p_serve_e),
        ));
    }
    out
}

/// CSV for `simulate`: the analyze columns plus standard errors.
pub fn simulate_csv(rows: &[PointResult]) -> String {
    let mut out = String::from(
        "x,discipline_pair,mean_fidelity,mean_fidelity_stderr,p_serve_r,p_serve_r_stderr,p_serve_e,p_serve_e_stderr\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_sig(r.x),
            r.label,
            fmt_opt(r.mean_fidelity),
            fmt_opt(r.mean_fidelity_stderr),
            fmt_opt(r.p_serve_r),
            fmt_opt(r.p_serve_r_stderr),
            fmt_opt(r.p_serve_e),
            fmt_opt(r.p_serve_e_stderr),
        ));
    }
    out
}

/// CSV for `repeater`: `mu,buffer,mean_infidelity,p_serve`.
pub fn repeater_csv(rows: &[(f64, usize, f64, f64)]) -> String {
    let mut out = String::from("mu,buffer,mean_infidelity,p_serve\n");
    for &(mu, buf, infid, ps) in rows {
        out.push_str(&format!("{},{},{},{}\n", fmt_sig(mu), buf, fmt_sig(infid), fmt_sig(ps)));
    }
    out
}
