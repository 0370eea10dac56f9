#![allow(dead_code)]

use sweepkit_core::analysis::ClearanceProfile;
use sweepkit_core::funnel::ContactCurve;
use sweepkit_core::surface::Domain;
use sweepkit_core::sweep::{evaluate, SweepScene};
use sweepkit_core::Vec2;

/// Zero crossings of `f` on the edges of an `n × n` node grid, linearly interpolated.
pub fn grid_zero_contour(scene: &SweepScene, t: f64, n: usize) -> Vec<Vec2> {
    let dom = scene.surface().domain();
    let node = |i: usize, j: usize| {
        Vec2::new(
            dom.u[0] + (dom.u[1] - dom.u[0]) * i as f64 / (n - 1) as f64,
            dom.v[0] + (dom.v[1] - dom.v[0]) * j as f64 / (n - 1) as f64,
        )
    };
    let mut f = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = node(i, j);
            f[i * n + j] = evaluate(scene, p.x, p.y, t).unwrap().f;
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a = f[i * n + j];
            if a == 0.0 {
                out.push(node(i, j));
                continue;
            }
            for (ii, jj) in [(i + 1, j), (i, j + 1)] {
                if ii >= n || jj >= n {
                    continue;
                }
                let b = f[ii * n + jj];
                if b != 0.0 && (a > 0.0) != (b > 0.0) {
                    let s = a / (a - b);
                    out.push(node(i, j) + (node(ii, jj) - node(i, j)) * s);
                }
            }
        }
    }
    out
}

fn point_segment(p: Vec2, a: Vec2, b: Vec2, dom: &Domain) -> f64 {
    let a_rel = dom.min_image(a - p);
    let d = b - a;
    let a = a_rel;
    let len2 = d.norm_squared();
    let s = if len2 > 0.0 {
        (-a.dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * s).norm()
}

/// Symmetric parameter-space Hausdorff distance between traced polylines and contour points.
pub fn hausdorff(curves: &[ContactCurve], contour: &[Vec2], dom: &Domain) -> f64 {
    let segs: Vec<(Vec2, Vec2)> = curves
        .iter()
        .flat_map(|c| {
            let uv = c.uv();
            let mut s: Vec<(Vec2, Vec2)> = uv.windows(2).map(|w| (w[0], w[1])).collect();
            if c.closed && uv.len() > 1 {
                let last = uv[uv.len() - 1];
                s.push((last, last + dom.min_image(uv[0] - last)));
            }
            if uv.len() == 1 {
                s.push((uv[0], uv[0]));
            }
            s
        })
        .collect();
    let mut worst: f64 = 0.0;
    for p in contour {
        let d = segs
            .iter()
            .map(|(a, b)| point_segment(*p, *a, *b, dom))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    for c in curves {
        for q in c.uv() {
            let d = contour
                .iter()
                .map(|p| dom.min_image(q - p).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

/// Five-point second difference of λ about the center of a profile sampled at spacing `h`.
pub fn lambda_second_difference(profile: &ClearanceProfile) -> Option<f64> {
    let n = profile.ts.len();
    let c = profile.ts.iter().position(|t| *t == profile.t0)?;
    if c < 2 || c + 2 >= n {
        return None;
    }
    let l = |k: usize| profile.lambdas[k];
    let h = profile.ts[c + 1] - profile.ts[c];
    Some((-l(c - 2)? + 16.0 * l(c - 1)? - 30.0 * l(c)? + 16.0 * l(c + 1)? - l(c + 2)?) / (12.0 * h * h))
}
