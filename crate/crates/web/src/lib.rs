//! Browser bindings for the demo page. Each wraps one library routine and
//! returns flat `f64` arrays.

use std::f64::consts::PI;

use extremal::flux::wave_speeds;
use extremal::mcf::{mcf_step, mean_radius, EmbeddingField};
use extremal::solver::{
    cfl_dt, initial_state, rk4_step, Augmented, FourierMode, Grid, GridField, InitialData, StencilOrder,
};
use extremal::state::{constraint_residuals, StateLayout};
use wasm_bindgen::prelude::*;

/// Height frames of a string in the plane, followed by the constraint norm
/// of each frame: `frames × points` heights, then `frames` norms.
pub fn string_frames(
    points: usize,
    amplitude: f64,
    velocity: f64,
    t_end: f64,
    frames: usize,
) -> extremal::Result<Vec<f64>> {
    if frames < 2 {
        return Err(extremal::Error::Config("at least two frames are needed".into()));
    }
    let grid = Grid::uniform(1, points, 2.0 * PI)?;
    let data = InitialData {
        height: vec![FourierMode { component: 1, wave: vec![1], amplitude, phase: 0.0 }],
        velocity: vec![FourierMode { component: 1, wave: vec![2], amplitude: velocity, phase: 0.0 }],
        ..Default::default()
    };
    let aug = Augmented::new(1, 1, StencilOrder::Second)?.with_heights();
    let layout = aug.layout().clone();
    let dim = layout.dim();
    let init = initial_state(&layout, &grid, &data)?;
    let mut field = GridField::from_fn(&grid, dim + 1, |p, out| {
        out[..dim].copy_from_slice(init.w.point(p));
        out[dim] = init.heights.point(p)[0];
    });

    let per_frame = t_end / (frames - 1) as f64;
    let substeps = if per_frame > 0.0 { (per_frame / cfl_dt(&init.w, &layout, 0.4)?).ceil() as usize } else { 0 };
    let dt = if substeps > 0 { per_frame / substeps as f64 } else { 0.0 };
    let mut heights = Vec::with_capacity(frames * points);
    let mut norms = Vec::with_capacity(frames);
    for frame in 0..frames {
        if frame > 0 {
            for k in 0..substeps {
                field = rk4_step(&field, (frame - 1) as f64 * per_frame + k as f64 * dt, dt, |f| aug.rhs(f))?;
            }
        }
        let mut worst: f64 = 0.0;
        for p in 0..points {
            let w = field.point(p);
            heights.push(w[dim]);
            let r = constraint_residuals(&w[..dim], &layout);
            worst = worst.max(r.lambda_abs()).max(r.omega_max());
        }
        norms.push(worst);
    }
    heights.extend(norms);
    Ok(heights)
}

/// Sorted eigenvalues of `Σ ν_j A_j(W)`.
pub fn speeds(m: usize, n: usize, w: &[f64], nu: &[f64]) -> extremal::Result<Vec<f64>> {
    wave_speeds(w, nu, &StateLayout::new(m, n)?)
}

/// `(θ, measured radius, √(R² − 2θ))` triples for a circle of radius
/// `radius` shrinking until `fraction` of its lifetime.
pub fn circle_track(points: usize, radius: f64, fraction: f64, samples: usize) -> extremal::Result<Vec<f64>> {
    if !(fraction > 0.0 && fraction < 1.0) || samples == 0 {
        return Err(extremal::Error::Config("fraction in (0, 1) and samples ≥ 1 are required".into()));
    }
    let mut e = EmbeddingField::circle(points, radius, StencilOrder::Second)?;
    let du = e.grid().spacing(1);
    let theta_end = fraction * radius * radius / 2.0;
    let per_sample = theta_end / samples as f64;
    let substeps = (per_sample / (0.1 * du * du)).ceil() as usize;
    let dtheta = per_sample / substeps as f64;
    let mut out = vec![0.0, radius, radius];
    for s in 1..=samples {
        for _ in 0..substeps {
            e = mcf_step(&e, dtheta)?;
        }
        let theta = s as f64 * per_sample;
        out.extend([theta, mean_radius(&e), (radius * radius - 2.0 * theta).sqrt()]);
    }
    Ok(out)
}

fn js(e: extremal::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = stringFrames)]
pub fn string_frames_js(points: usize, amplitude: f64, velocity: f64, t_end: f64, frames: usize) -> Result<Vec<f64>, JsError> {
    string_frames(points, amplitude, velocity, t_end, frames).map_err(js)
}

#[wasm_bindgen(js_name = characteristicSpeeds)]
pub fn speeds_js(m: usize, n: usize, w: Vec<f64>, nu: Vec<f64>) -> Result<Vec<f64>, JsError> {
    speeds(m, n, &w, &nu).map_err(js)
}

#[wasm_bindgen(js_name = circleTrack)]
pub fn circle_track_js(points: usize, radius: f64, fraction: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    circle_track(points, radius, fraction, samples).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_frames_layout() {
        let out = string_frames(32, 0.1, 0.1, 0.5, 3).unwrap();
        assert_eq!(out.len(), 3 * 32 + 3);
        assert!(out[3 * 32..].iter().all(|x| *x < 1e-3));
        assert!(string_frames(32, 0.1, 0.1, 0.5, 1).is_err());
    }

    #[test]
    fn flat_speeds() {
        let s = speeds(1, 1, &[1.0, 0.0, 0.0, 0.0], &[1.0]).unwrap();
        for (x, y) in s.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_follows_the_exact_radius() {
        let track = circle_track(64, 1.0, 0.5, 4).unwrap();
        for row in track.chunks(3) {
            assert!((row[1] - row[2]).abs() < 1e-2 * row[2]);
        }
    }
}
