//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point takes configuration overrides as newline-separated `key.path=value` lines
//! applied to the demonstrator, and returns a JSON string for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sarrus_core::analysis::{find_equilibria, phase_portrait, Equilibrium, PortraitSpec, PortraitStatus};
use sarrus_core::config::RunConfig;
use sarrus_core::dynamics::{summarise, JumpSummary};
use sarrus_core::geometry::LegAngleInterval;
use sarrus_core::thrust::thrust_profile;

/// Most points sent to the page per curve.
const MAX_POINTS: usize = 600;

fn config(overrides: &str) -> Result<RunConfig, String> {
    let lines: Vec<String> = overrides
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    RunConfig::demonstrator_with(&lines).map_err(|e| e.to_string())
}

fn thin<T: Copy>(items: &[T]) -> Vec<T> {
    let stride = items.len().div_ceil(MAX_POINTS).max(1);
    let mut out: Vec<T> = items.iter().step_by(stride).copied().collect();
    if let Some(&last) = items.last() {
        if items.len() > 1 && (items.len() - 1) % stride != 0 {
            out.push(last);
        }
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ProfileView {
    theta: Vec<f64>,
    h: Vec<f64>,
    thrust: Vec<f64>,
    drive_force: Vec<f64>,
}

pub fn thrust_profile_view(overrides: &str, samples: usize) -> Result<String, String> {
    let cfg = config(overrides)?;
    let interval = LegAngleInterval::new(0.01, 1.56).map_err(|e| e.to_string())?;
    let p = thrust_profile(&cfg.geometry, &cfg.model(), &interval, samples, cfg.options.derivative)
        .map_err(|e| e.to_string())?;
    to_json(&ProfileView {
        theta: p.samples.iter().map(|s| s.theta).collect(),
        h: p.samples.iter().map(|s| s.h).collect(),
        thrust: p.samples.iter().map(|s| s.thrust).collect(),
        drive_force: p.samples.iter().map(|s| s.drive_force).collect(),
    })
}

#[derive(Serialize)]
struct JumpView {
    summary: JumpSummary,
    t: Vec<f64>,
    h: Vec<f64>,
    h_dot: Vec<f64>,
    ground_reaction: Vec<f64>,
}

pub fn simulate_view(overrides: &str) -> Result<String, String> {
    let cfg = config(overrides)?;
    let d = cfg.dynamics();
    let traj = d.integrate(&cfg.options).map_err(|e| e.to_string())?;
    let summary = summarise(&d, &traj);
    let rows = thin(&traj.rows);
    to_json(&JumpView {
        summary,
        t: rows.iter().map(|r| r.t).collect(),
        h: rows.iter().map(|r| r.h).collect(),
        h_dot: rows.iter().map(|r| r.h_dot).collect(),
        ground_reaction: rows.iter().map(|r| r.ground_reaction).collect(),
    })
}

#[derive(Serialize)]
struct Curve {
    theta0: f64,
    status: PortraitStatus,
    theta: Vec<f64>,
    theta_dot: Vec<f64>,
}

#[derive(Serialize)]
struct PortraitView {
    equilibria: Vec<Equilibrium>,
    curves: Vec<Curve>,
}

pub fn phase_portrait_view(overrides: &str, angles: &[f64], damped: bool) -> Result<String, String> {
    let cfg = config(overrides)?;
    let d = cfg.dynamics();
    let spec = PortraitSpec {
        release_angles: angles.to_vec(),
        duration: 0.15,
        step: 5e-5,
        damped,
    };
    let curves = phase_portrait(&d, &spec)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|t| {
            let pts = thin(&t.points);
            Curve {
                theta0: t.theta0,
                status: t.status,
                theta: pts.iter().map(|p| p.theta).collect(),
                theta_dot: pts.iter().map(|p| p.theta_dot).collect(),
            }
        })
        .collect();
    to_json(&PortraitView {
        equilibria: find_equilibria(&d, &LegAngleInterval::full()),
        curves,
    })
}

/// Thrust and drive force against leg angle.
#[wasm_bindgen(js_name = thrustProfile)]
pub fn thrust_profile_js(overrides: &str, samples: usize) -> Result<String, JsValue> {
    thrust_profile_view(overrides, samples).map_err(|e| JsValue::from_str(&e))
}

/// One jump: summary plus a thinned head trajectory.
#[wasm_bindgen(js_name = simulateJump)]
pub fn simulate_js(overrides: &str) -> Result<String, JsValue> {
    simulate_view(overrides).map_err(|e| JsValue::from_str(&e))
}

/// Release curves in the (θ, θ̇) plane and the rest points.
#[wasm_bindgen(js_name = phasePortrait)]
pub fn phase_portrait_js(overrides: &str, angles: Vec<f64>, damped: bool) -> Result<String, JsValue> {
    phase_portrait_view(overrides, &angles, damped).map_err(|e| JsValue::from_str(&e))
}
