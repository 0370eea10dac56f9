mod common;

use sweepkit_core::analysis::{theta, Thresholds};
use sweepkit_core::corpus;
use sweepkit_core::funnel::{find_seed, sample_funnel, trace_pcurve, trace_slice, SampleOptions, TraceOptions};

#[test]
fn traced_curves_match_dense_grid_contours() {
    for (id, scene) in corpus::all() {
        let step = 0.01;
        let sample = sample_funnel(&scene, &SampleOptions::new(4, step)).unwrap();
        let dom = scene.surface().domain();
        for slice in &sample.slices {
            assert!(slice.errors.is_empty(), "{id} t={}: {:?}", slice.t, slice.errors);
            let contour = common::grid_zero_contour(&scene, slice.t, 400);
            let h = common::hausdorff(&slice.curves, &contour, &dom);
            assert!(h <= 2.0 * step, "{id} t={}: {h}", slice.t);
        }
    }
}

#[test]
fn every_traced_point_is_on_the_funnel() {
    for (id, scene) in corpus::all() {
        let sample = sample_funnel(&scene, &SampleOptions::new(3, 0.02)).unwrap();
        for p in sample.points() {
            assert!(p.eval().f.abs() <= scene.eps_fun(), "{id}");
        }
    }
}

#[test]
fn slices_are_deterministic() {
    let scene = corpus::ellipsoid_example2();
    let a = trace_slice(&scene, 0.8, &SampleOptions::new(2, 0.01));
    let b = trace_slice(&scene, 0.8, &SampleOptions::new(2, 0.01));
    assert_eq!(a.curves.len(), b.curves.len());
    for (x, y) in a.curves.iter().zip(&b.curves) {
        assert_eq!(x.uv(), y.uv());
    }
}

// Largest θ jump between a fine point and the nearest point of the coarser trace.
fn theta_gap(scene: &sweepkit_core::sweep::SweepScene, t: f64, step: f64) -> f64 {
    let seed = find_seed(scene, t).unwrap();
    let coarse = trace_pcurve(scene, t, &seed, &TraceOptions::new(step)).unwrap();
    let fine = trace_pcurve(scene, t, &seed, &TraceOptions::new(0.5 * step)).unwrap();
    let dom = scene.surface().domain();
    let mut worst: f64 = 0.0;
    for q in &fine.points {
        let near = coarse
            .points
            .iter()
            .min_by(|a, b| {
                let da = dom.min_image(a.uv() - q.uv()).norm();
                let db = dom.min_image(b.uv() - q.uv()).norm();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        worst = worst.max((theta(scene, q).unwrap() - theta(scene, near).unwrap()).abs());
    }
    worst
}

#[test]
fn theta_varies_continuously_along_curves() {
    let scene = corpus::ellipsoid_example2();
    let g1 = theta_gap(&scene, 0.8, 0.04);
    let g2 = theta_gap(&scene, 0.8, 0.02);
    let g3 = theta_gap(&scene, 0.8, 0.01);
    assert!(g2 < g1 && g3 < g2, "{g1} {g2} {g3}");
    let _ = Thresholds::DEFAULT_SAMPLES;
}
