//! Reference scenes shared by tests, the acceptance suite and the bundled configs.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::kinematics::{AxisRotation, CircularTranslation, Composition, LinearTranslation, Trajectory};
use crate::surface::{Cylinder, Ellipsoid, Surface, DEFAULT_POLE_MARGIN};
use crate::sweep::SweepScene;
use crate::Vec3;

/// Cylinder of radius 2 around the y axis, rolling about x while its center runs a
/// quarter circle of radius 3.
pub fn cylinder_example1() -> SweepScene {
    let surface = Surface::new(
        Arc::new(Cylinder::new(Vec3::zeros(), 2.0, [-1.25, 1.25]).unwrap()),
        true,
    );
    SweepScene::new("cylinder_example1", surface, example_trajectory(true)).unwrap()
}

/// Ellipsoid with semi-axes (3, 1, 1) translated along the same quarter circle.
pub fn ellipsoid_example2() -> SweepScene {
    let surface = Surface::new(
        Arc::new(Ellipsoid::new(Vec3::zeros(), Vec3::new(3.0, 1.0, 1.0), DEFAULT_POLE_MARGIN).unwrap()),
        true,
    );
    SweepScene::new("ellipsoid_example2", surface, example_trajectory(false)).unwrap()
}

/// Quarter circle of radius 3 in the xy plane, optionally preceded by a roll about x at 0.1π.
pub fn example_trajectory(roll: bool) -> Arc<dyn Trajectory> {
    let circle: Arc<dyn Trajectory> = Arc::new(CircularTranslation::new(3.0, 0.5 * PI, Vec3::x(), Vec3::y()).unwrap());
    if !roll {
        return circle;
    }
    let spin: Arc<dyn Trajectory> = Arc::new(AxisRotation::new(Vec3::x(), Vec3::zeros(), 0.1 * PI).unwrap());
    Arc::new(Composition::new(vec![spin, circle]).unwrap())
}

fn unit_sphere(center: Vec3) -> Surface {
    Surface::new(Arc::new(Ellipsoid::sphere(center, 1.0).unwrap()), true)
}

/// Unit sphere moving at unit speed along its pole axis (y).
pub fn translating_sphere() -> SweepScene {
    SweepScene::new(
        "translating_sphere",
        unit_sphere(Vec3::zeros()),
        Arc::new(LinearTranslation::uniform(Vec3::y())),
    )
    .unwrap()
}

/// Unit sphere whose center runs an eighth of a circle of radius 3; the envelope is a torus patch.
pub fn circular_sphere() -> SweepScene {
    SweepScene::new("circular_sphere", unit_sphere(Vec3::zeros()), Arc::new(circular_path())).unwrap()
}

/// Path of [`circular_sphere`]: radius 3, an eighth turn per unit time in the xy plane.
pub fn circular_path() -> CircularTranslation {
    CircularTranslation::new(3.0, 0.25 * PI, Vec3::x(), Vec3::y()).unwrap()
}

/// Unit sphere centered at (1, 0, 0) rotating about the z axis, which touches it at the origin.
pub fn tangent_sphere() -> SweepScene {
    SweepScene::new(
        "tangent_sphere",
        unit_sphere(Vec3::x()),
        Arc::new(AxisRotation::new(Vec3::z(), Vec3::zeros(), 0.5 * PI).unwrap()),
    )
    .unwrap()
}

/// Every corpus scene by id.
pub fn all() -> Vec<(&'static str, SweepScene)> {
    vec![
        ("cylinder_example1", cylinder_example1()),
        ("ellipsoid_example2", ellipsoid_example2()),
        ("translating_sphere", translating_sphere()),
        ("circular_sphere", circular_sphere()),
        ("tangent_sphere", tangent_sphere()),
    ]
}
