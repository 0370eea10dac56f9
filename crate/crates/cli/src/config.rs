//! Scene files: one TOML document per scene.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sweepkit_core::kinematics::{
    AxisRotation, CircularTranslation, Composition, Keyframe, KeyframeTrajectory, LinearTranslation, Stationary,
    Trajectory,
};
use sweepkit_core::surface::{
    BSplinePatch, Cylinder, Domain, Ellipsoid, ParametricSurface, Plane, Surface, Torus, DEFAULT_POLE_MARGIN,
};
use sweepkit_core::sweep::SweepScene;
use sweepkit_core::{Mat3, Vec3};

use crate::error::CliError;

type V3 = [f64; 3];

fn v3(a: V3) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub id: String,
    pub surface: SurfaceConfig,
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// Use `-(S_u × S_v)` as the outward normal.
    #[serde(default)]
    pub flip_normal: bool,
    pub shape: ShapeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Plane {
        origin: V3,
        du: V3,
        dv: V3,
        u: [f64; 2],
        v: [f64; 2],
    },
    Sphere {
        center: V3,
        radius: f64,
        #[serde(default = "default_pole_margin")]
        pole_margin: f64,
    },
    Ellipsoid {
        center: V3,
        radii: V3,
        #[serde(default = "default_pole_margin")]
        pole_margin: f64,
    },
    Cylinder {
        center: V3,
        radius: f64,
        axial: [f64; 2],
    },
    Torus {
        center: V3,
        major: f64,
        minor: f64,
    },
    Bspline {
        degree_u: usize,
        degree_v: usize,
        knots_u: Vec<f64>,
        knots_v: Vec<f64>,
        /// Control points, `v` index fastest.
        control: Vec<Vec<V3>>,
    },
}

fn default_pole_margin() -> f64 {
    DEFAULT_POLE_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Stationary,
    LinearTranslation {
        velocity: V3,
        #[serde(default)]
        acceleration: V3,
    },
    CircularTranslation {
        radius: f64,
        rate: f64,
        e1: V3,
        e2: V3,
    },
    AxisRotation {
        axis: V3,
        pivot: V3,
        rate: f64,
        #[serde(default)]
        angular_acceleration: f64,
        /// Translation along the axis per radian.
        #[serde(default)]
        advance: f64,
    },
    /// Stages applied in order: the first moves the body, each later one moves the result.
    Composition {
        stages: Vec<TrajectoryConfig>,
    },
    Keyframes {
        frames: Vec<KeyframeConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeConfig {
    pub time: f64,
    /// Row-major rotation matrix.
    pub rotation: [V3; 3],
    pub position: V3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Time slices traced by `detect` and `theta-field`.
    pub nt: usize,
    /// Absolute trace step in parameter space; defaults to 1% of the domain diagonal.
    pub step: Option<f64>,
    /// Sign-change grid used to find every contact component.
    pub seed_grid: usize,
    /// Restricts the sweep to `[t0, t1] ⊂ [0, 1]`.
    pub time_window: Option<[f64; 2]>,
    /// Half width of the clearance window around each boundary point.
    pub clearance_halfwidth: f64,
    pub clearance_samples: usize,
    /// Locate θ minima and zeros between samples.
    pub refine: bool,
    /// Seed slices and points per slice for envelope evaluation.
    pub seed_nt: usize,
    pub seed_np: usize,
    /// Time range meshed and evaluated by the envelope commands; defaults to the sweep window.
    pub envelope_window: Option<[f64; 2]>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            nt: 10,
            step: None,
            seed_grid: sweepkit_core::funnel::DEFAULT_SEED_GRID,
            time_window: None,
            clearance_halfwidth: sweepkit_core::analysis::Thresholds::DEFAULT_HALFWIDTH,
            clearance_samples: sweepkit_core::analysis::Thresholds::DEFAULT_SAMPLES,
            refine: true,
            seed_nt: 8,
            seed_np: 32,
            envelope_window: None,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("analysis.{m}")));
        if self.nt < 1 {
            return bad("nt must be at least 1");
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return bad("step must be positive");
            }
        }
        if self.seed_grid < 2 {
            return bad("seed_grid must be at least 2");
        }
        if !(self.clearance_halfwidth > 0.0 && self.clearance_halfwidth.is_finite()) || self.clearance_samples < 3 {
            return bad("clearance window needs a positive halfwidth and at least 3 samples");
        }
        if self.seed_nt < 2 || self.seed_np < 4 {
            return bad("seed needs seed_nt >= 2 and seed_np >= 4");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Default destinations, used when `--out` is absent. Relative paths resolve against the scene file.
    pub trace: Option<PathBuf>,
    pub theta_field: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
}

impl ShapeConfig {
    fn build(&self) -> Result<Arc<dyn ParametricSurface>, CliError> {
        let s: Arc<dyn ParametricSurface> = match self {
            ShapeConfig::Plane { origin, du, dv, u, v } => {
                Arc::new(Plane::new(v3(*origin), v3(*du), v3(*dv), Domain::new(*u, *v)?)?)
            }
            ShapeConfig::Sphere {
                center,
                radius,
                pole_margin,
            } => Arc::new(Ellipsoid::new(v3(*center), Vec3::repeat(*radius), *pole_margin)?),
            ShapeConfig::Ellipsoid {
                center,
                radii,
                pole_margin,
            } => Arc::new(Ellipsoid::new(v3(*center), v3(*radii), *pole_margin)?),
            ShapeConfig::Cylinder { center, radius, axial } => Arc::new(Cylinder::new(v3(*center), *radius, *axial)?),
            ShapeConfig::Torus { center, major, minor } => Arc::new(Torus::new(v3(*center), *major, *minor)?),
            ShapeConfig::Bspline {
                degree_u,
                degree_v,
                knots_u,
                knots_v,
                control,
            } => {
                let n_u = control.len();
                let n_v = control.first().map_or(0, Vec::len);
                if control.iter().any(|row| row.len() != n_v) {
                    return Err(CliError::Config("surface.shape.control rows differ in length".into()));
                }
                let ctrl = control.iter().flatten().map(|p| v3(*p)).collect();
                Arc::new(BSplinePatch::new(
                    *degree_u,
                    *degree_v,
                    knots_u.clone(),
                    knots_v.clone(),
                    n_u,
                    n_v,
                    ctrl,
                )?)
            }
        };
        Ok(s)
    }
}

impl TrajectoryConfig {
    pub fn build(&self) -> Result<Arc<dyn Trajectory>, CliError> {
        let t: Arc<dyn Trajectory> = match self {
            TrajectoryConfig::Stationary => Arc::new(Stationary),
            TrajectoryConfig::LinearTranslation { velocity, acceleration } => Arc::new(LinearTranslation {
                velocity: v3(*velocity),
                acceleration: v3(*acceleration),
            }),
            TrajectoryConfig::CircularTranslation { radius, rate, e1, e2 } => {
                Arc::new(CircularTranslation::new(*radius, *rate, v3(*e1), v3(*e2))?)
            }
            TrajectoryConfig::AxisRotation {
                axis,
                pivot,
                rate,
                angular_acceleration,
                advance,
            } => Arc::new(
                AxisRotation::screw(v3(*axis), v3(*pivot), *rate, *advance)?
                    .with_angular_acceleration(*angular_acceleration),
            ),
            TrajectoryConfig::Composition { stages } => Arc::new(Composition::new(
                stages.iter().map(|s| s.build()).collect::<Result<_, _>>()?,
            )?),
            TrajectoryConfig::Keyframes { frames } => {
                let frames: Vec<Keyframe> = frames
                    .iter()
                    .map(|f| Keyframe {
                        time: f.time,
                        rotation: Mat3::from_row_slice(&f.rotation.concat()),
                        position: v3(f.position),
                    })
                    .collect();
                Arc::new(KeyframeTrajectory::new(&frames)?)
            }
        };
        Ok(t)
    }
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: SceneConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.analysis.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene configs serialize")
    }

    /// Builds and validates the scene: SO(3) checks on the motion and a regularity scan of the surface.
    pub fn build(&self) -> Result<SweepScene, CliError> {
        let surface = Surface::new(self.surface.shape.build()?, self.surface.flip_normal);
        let trajectory = self.trajectory.build()?;
        let scene = SweepScene::new(self.id.clone(), surface, trajectory)?;
        Ok(match self.analysis.time_window {
            Some([t0, t1]) => scene.with_time_window(t0, t1)?,
            None => scene,
        })
    }

    /// Trace step: configured, or 1% of the parameter domain diagonal.
    pub fn step(&self, scene: &SweepScene) -> f64 {
        self.analysis.step.unwrap_or(0.01 * scene.scales().param_diag)
    }
}

/// A parsed scene file and the scene it describes.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub path: PathBuf,
    pub config: SceneConfig,
    pub scene: SweepScene,
}

impl LoadedScene {
    /// Resolves an output path from the config relative to the scene file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

pub fn load_scene(path: &Path) -> Result<LoadedScene, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = SceneConfig::parse(&text).map_err(|e| e.in_file(path))?;
    let scene = config.build().map_err(|e| e.in_file(path))?;
    Ok(LoadedScene {
        path: path.to_path_buf(),
        config,
        scene,
    })
}
