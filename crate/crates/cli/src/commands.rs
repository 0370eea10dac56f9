//! Subcommand bodies. Each writes its artifact and returns the process exit code.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sweepkit_core::analysis::{detect_singularity, theta_sample, DetectOptions, LsiReport, Verdict};
use sweepkit_core::envelope::{build_seeds, eval_envelope_jet, ProceduralEnvelope};
use sweepkit_core::funnel::{sample_funnel, trace_slice, SampleOptions};
use sweepkit_core::sweep::SweepScene;
use sweepkit_core::Vec3;

use crate::config::{LoadedScene, SceneConfig};
use crate::error::CliError;

/// Fixed-width scientific notation with 17 significant digits, so output is byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(values: &[f64]) -> String {
    values.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

fn sample_options(cfg: &SceneConfig, scene: &SweepScene, nt: Option<usize>, step: Option<f64>) -> SampleOptions {
    let mut opts = SampleOptions::new(nt.unwrap_or(cfg.analysis.nt), step.unwrap_or_else(|| cfg.step(scene)));
    opts.grid = cfg.analysis.seed_grid;
    opts
}

/// `curve,u,v,t,x,y,z` rows of every contact curve at time `t`.
pub fn trace(ls: &LoadedScene, t: f64, step: Option<f64>, out: &mut dyn Write) -> Result<u8, CliError> {
    let opts = sample_options(&ls.config, &ls.scene, Some(1), step);
    let slice = trace_slice(&ls.scene, t, &opts);
    if let Some(e) = slice.errors.first() {
        return Err(e.clone().into());
    }
    writeln!(out, "curve,u,v,t,x,y,z")?;
    for (k, c) in slice.curves.iter().enumerate() {
        for (p, x) in c.points.iter().zip(&c.image) {
            writeln!(out, "{k},{}", row(&[p.u(), p.v(), p.t(), x.x, x.y, x.z]))?;
        }
    }
    Ok(0)
}

/// θ and its two cross-checks at every sampled funnel point.
pub fn theta_field(
    ls: &LoadedScene,
    nt: Option<usize>,
    step: Option<f64>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let sample = sample_funnel(&ls.scene, &sample_options(&ls.config, &ls.scene, nt, step))?;
    for s in &sample.slices {
        if let Some(e) = s.errors.first() {
            return Err(e.clone().into());
        }
    }
    writeln!(out, "u,v,t,theta,lambdaDdot,detD")?;
    for fp in sample.points() {
        let s = theta_sample(&ls.scene, fp)?;
        writeln!(
            out,
            "{}",
            row(&[fp.u(), fp.v(), fp.t(), s.theta, s.lambda_ddot, s.det_d])
        )?;
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolInfo = ToolInfo {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdReport {
    pub eps_theta: f64,
    pub eps_lambda: f64,
    pub clearance_halfwidth: f64,
    pub clearance_samples: usize,
}

/// JSON form of a detection run. Timing goes to stderr so reports stay byte-identical.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport<'a> {
    pub schema: u32,
    pub tool: ToolInfo,
    pub scene_id: &'a str,
    pub verdict: Verdict,
    pub samples: usize,
    pub min_theta: Option<f64>,
    pub max_theta: Option<f64>,
    pub median_abs_theta: Option<f64>,
    pub thresholds: ThresholdReport,
    pub excised: &'a sweepkit_core::analysis::Excision,
    pub boundary_points: usize,
    pub min_boundary_lambda: Option<f64>,
    pub slices: &'a [sweepkit_core::analysis::SliceSummary],
    pub diagnostics: &'a [String],
    pub config: &'a SceneConfig,
}

fn median_abs(report: &LsiReport) -> Option<f64> {
    let mut v: Vec<f64> = report.samples.iter().map(|s| s.theta.abs()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn run_detect(ls: &LoadedScene, nt: Option<usize>, step: Option<f64>) -> Result<LsiReport, CliError> {
    let cfg = &ls.config;
    let sample = sample_funnel(&ls.scene, &sample_options(cfg, &ls.scene, nt, step))?;
    let opts = DetectOptions {
        halfwidth: cfg.analysis.clearance_halfwidth,
        samples: cfg.analysis.clearance_samples,
        refine: cfg.analysis.refine,
    };
    Ok(detect_singularity(&ls.scene, &sample, &opts))
}

pub fn detect(ls: &LoadedScene, nt: Option<usize>, step: Option<f64>, out: &mut dyn Write) -> Result<u8, CliError> {
    let report = run_detect(ls, nt, step)?;
    let run = RunReport {
        schema: 1,
        tool: TOOL,
        scene_id: &report.scene_id,
        verdict: report.verdict,
        samples: report.samples.len(),
        min_theta: report.min_theta,
        max_theta: report.max_theta,
        median_abs_theta: median_abs(&report),
        thresholds: ThresholdReport {
            eps_theta: report.thresholds.eps_theta,
            eps_lambda: report.thresholds.eps_lambda,
            clearance_halfwidth: report.thresholds.halfwidth,
            clearance_samples: report.thresholds.samples,
        },
        excised: &report.excised,
        boundary_points: report.boundary_points,
        min_boundary_lambda: report.min_boundary_lambda,
        slices: &report.slices,
        diagnostics: &report.diagnostics,
        config: &ls.config,
    };
    serde_json::to_writer_pretty(&mut *out, &run).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(report.verdict.exit_code() as u8)
}

fn envelopes(ls: &LoadedScene) -> Result<Vec<ProceduralEnvelope>, CliError> {
    let a = &ls.config.analysis;
    let scene = match a.envelope_window {
        Some([t0, t1]) => ls.scene.clone().with_time_window(t0, t1)?,
        None => ls.scene.clone(),
    };
    let seeds = build_seeds(&scene, a.seed_nt, a.seed_np, ls.config.step(&scene))?;
    Ok(seeds
        .into_iter()
        .map(|s| ProceduralEnvelope::new(scene.clone(), s))
        .collect())
}

/// Tessellates every envelope face on an `nt × np` grid: OBJ with `# theta` comments after each
/// vertex, plus a sidecar CSV of per-vertex θ next to the OBJ.
pub fn mesh(ls: &LoadedScene, nt: Option<usize>, np: Option<usize>, obj_path: &Path) -> Result<u8, CliError> {
    let (nt, np) = (nt.unwrap_or(32), np.unwrap_or(32));
    if nt < 2 || np < 2 {
        return Err(CliError::Usage("mesh needs --nt and --np of at least 2".into()));
    }
    let faces = envelopes(ls)?;
    let mut obj = Vec::new();
    let mut csv = Vec::new();
    writeln!(
        obj,
        "# {} envelope, {} face(s), {nt} x {np} vertices each",
        ls.config.id,
        faces.len()
    )?;
    writeln!(csv, "face,p,t,u,v,x,y,z,theta")?;
    let mut base = 1;
    for (k, env) in faces.iter().enumerate() {
        let closed = env.seed().closed();
        let [t0, t1] = env.scene().window();
        // closed faces wrap in p, so the p = 1 column would repeat p = 0
        let p_at = |j: usize| {
            if closed {
                j as f64 / np as f64
            } else {
                j as f64 / (np - 1) as f64
            }
        };
        writeln!(obj, "g face{k}")?;
        let mut normals: Vec<Vec3> = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let t = t0 + (t1 - t0) * i as f64 / (nt - 1) as f64;
            for j in 0..np {
                let p = p_at(j);
                let e = eval_envelope_jet(env, p, t)?;
                let theta = sweepkit_core::sweep::evaluate_unchecked(&ls.scene, e.u, e.v, t)?.theta();
                writeln!(obj, "v {} {} {}", num(e.point.x), num(e.point.y), num(e.point.z))?;
                writeln!(obj, "# theta {}", num(theta))?;
                writeln!(
                    csv,
                    "{k},{}",
                    row(&[p, t, e.u, e.v, e.point.x, e.point.y, e.point.z, theta])
                )?;
                normals.push(e.normal);
            }
        }
        for n in &normals {
            writeln!(obj, "vn {} {} {}", num(n.x), num(n.y), num(n.z))?;
        }
        let id = |i: usize, j: usize| base + i * np + j % np;
        let cols = if closed { np } else { np - 1 };
        for i in 0..nt - 1 {
            for j in 0..cols {
                let q = [id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j)];
                writeln!(obj, "f {}", q.map(|v| format!("{v}//{v}")).join(" "))?;
            }
        }
        base += nt * np;
    }
    std::fs::write(obj_path, obj).map_err(|e| CliError::Io(format!("{}: {e}", obj_path.display())))?;
    let sidecar = obj_path.with_extension("theta.csv");
    std::fs::write(&sidecar, csv).map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
    Ok(0)
}

/// One line `x,y,z,Ep_x,Ep_y,Ep_z,Et_x,Et_y,Et_z` for face `face` at `(p, t)`.
pub fn eval(ls: &LoadedScene, p: f64, t: f64, face: usize, out: &mut dyn Write) -> Result<u8, CliError> {
    let faces = envelopes(ls)?;
    let env = faces
        .get(face)
        .ok_or_else(|| CliError::Usage(format!("face {face} does not exist; the envelope has {}", faces.len())))?;
    let j = eval_envelope_jet(env, p, t)?;
    let (ep, et) = (j.ep.expect("jet has derivatives"), j.et.expect("jet has derivatives"));
    writeln!(
        out,
        "{}",
        row(&[j.point.x, j.point.y, j.point.z, ep.x, ep.y, ep.z, et.x, et.y, et.z])
    )?;
    Ok(0)
}
