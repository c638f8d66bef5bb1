//! Browser bindings for three interactive views: compartment impulse
//! responses, Landau relaxation, and the steady-state/susceptibility curves.
//!
//! Each binding is a thin wrapper over a plain function returning
//! `Result<_, String>`, so the numerics are testable off the browser.

use wasm_bindgen::prelude::*;

use monephase::compartment::{chi, cpi_irf, phi_irf, r_response, steady_state_phi, x_response, CompartmentParams, CouplingParams, LogisticControl, Rates};
use monephase::landau::{free_energy, lk_trajectory, stability_limit, stationary_points, susceptibility, LandauParams};

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn evenly(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Responses at integer horizons `0..=horizon`, one vector per series.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct IrfPaths {
    r: Vec<f64>,
    x: Vec<f64>,
    phi: Vec<f64>,
    pi: Vec<f64>,
    chi: f64,
}

#[wasm_bindgen]
impl IrfPaths {
    #[wasm_bindgen(getter)]
    pub fn r(&self) -> Vec<f64> {
        self.r.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn phi(&self) -> Vec<f64> {
        self.phi.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pi(&self) -> Vec<f64> {
        self.pi.clone()
    }
    /// CPI coupling at `phi_bar`; negative above the critical point.
    #[wasm_bindgen(getter)]
    pub fn chi(&self) -> f64 {
        self.chi
    }
}

#[allow(clippy::too_many_arguments)]
pub fn irf_paths(a: f64, b: f64, delta: f64, gamma: f64, eta: f64, kappa: f64, phi_bar: f64, s_pi: f64, phi_c: f64, horizon: usize) -> Result<IrfPaths, String> {
    let p = CompartmentParams { a, b, delta, gamma, eta };
    p.validate().map_err(|e| e.to_string())?;
    let c = CouplingParams { s_pi, phi_c };
    let mut out = IrfPaths {
        r: Vec::with_capacity(horizon + 1),
        x: Vec::with_capacity(horizon + 1),
        phi: Vec::with_capacity(horizon + 1),
        pi: Vec::with_capacity(horizon + 1),
        chi: chi(phi_bar, phi_c).map_err(|e| e.to_string())?,
    };
    for h in 0..=horizon {
        let h = h as f64;
        let e = |err: monephase::error::Error| err.to_string();
        out.r.push(r_response(h, &p).map_err(e)?);
        out.x.push(x_response(h, &p).map_err(e)?);
        out.phi.push(phi_irf(h, &p, phi_bar, kappa).map_err(e)?);
        out.pi.push(cpi_irf(h, &p, &c, phi_bar).map_err(e)?);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = irfPaths)]
#[allow(clippy::too_many_arguments)]
pub fn irf_paths_js(a: f64, b: f64, delta: f64, gamma: f64, eta: f64, kappa: f64, phi_bar: f64, s_pi: f64, phi_c: f64, horizon: usize) -> Result<IrfPaths, JsValue> {
    js(irf_paths(a, b, delta, gamma, eta, kappa, phi_bar, s_pi, phi_c, horizon))
}

/// Free energy on `n` points of `[-m_range, m_range]` and the stationary
/// points in ascending order.
pub fn landau_profile(a: f64, b: f64, h: f64, m_range: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), String> {
    let p = LandauParams::new(a, b, h, 1.0, 0.0).map_err(|e| e.to_string())?;
    let f = evenly(-m_range, m_range, n).into_iter().map(|m| free_energy(m, &p)).collect();
    let roots = stationary_points(&p).map_err(|e| e.to_string())?;
    Ok((f, roots.points.iter().map(|s| s.m).collect()))
}

#[wasm_bindgen(js_name = landauPotential)]
pub fn landau_potential_js(a: f64, b: f64, h: f64, m_range: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    js(landau_profile(a, b, h, m_range, n).map(|(f, _)| f))
}

#[wasm_bindgen(js_name = stationaryPoints)]
pub fn stationary_points_js(a: f64, b: f64, h: f64) -> Result<Vec<f64>, JsValue> {
    js(landau_profile(a, b, h, 1.0, 2).map(|(_, r)| r))
}

/// Relaxation path over `t_end` time units. The step is half the explicit
/// stability limit, so any starting point is safe.
#[allow(clippy::too_many_arguments)]
pub fn relaxation(m0: f64, a: f64, b: f64, h: f64, tau: f64, noise_sd: f64, t_end: f64, seed: u64) -> Result<Vec<f64>, String> {
    let p = LandauParams::new(a, b, h, tau, 0.0).map_err(|e| e.to_string())?;
    let roots = stationary_points(&p).map_err(|e| e.to_string())?;
    let m_max = roots.points.iter().map(|s| s.m.abs()).fold(m0.abs(), f64::max);
    let dt = 0.5 * stability_limit(&p, m_max);
    let steps = ((t_end / dt).ceil() as usize).clamp(1, 200_000);
    lk_trajectory(m0, &p, noise_sd, dt, steps, seed).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = relaxation)]
#[allow(clippy::too_many_arguments)]
pub fn relaxation_js(m0: f64, a: f64, b: f64, h: f64, tau: f64, noise_sd: f64, t_end: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    js(relaxation(m0, a, b, h, tau, noise_sd, t_end, seed as u64))
}

/// `phi*` over `n` control values in `[theta_min, theta_max]`.
#[allow(clippy::too_many_arguments)]
pub fn steady_state_curve(lambda: f64, theta_c: f64, delta: f64, gamma: f64, eta: f64, theta_min: f64, theta_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let ctrl = LogisticControl { lambda, theta_c };
    let rates = Rates { delta, gamma, eta };
    evenly(theta_min, theta_max, n)
        .into_iter()
        .map(|t| steady_state_phi(t, ctrl, rates, 1.0).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen(js_name = steadyStateCurve)]
#[allow(clippy::too_many_arguments)]
pub fn steady_state_curve_js(lambda: f64, theta_c: f64, delta: f64, gamma: f64, eta: f64, theta_min: f64, theta_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    js(steady_state_curve(lambda, theta_c, delta, gamma, eta, theta_min, theta_max, n))
}

/// Susceptibility on `n` points of `[0, 1]`.
pub fn susceptibility_curve(phi_c: f64, epsilon: f64, n: usize) -> Result<Vec<f64>, String> {
    evenly(0.0, 1.0, n)
        .into_iter()
        .map(|phi| susceptibility(phi, phi_c, epsilon).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen(js_name = susceptibilityCurve)]
pub fn susceptibility_curve_js(phi_c: f64, epsilon: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    js(susceptibility_curve(phi_c, epsilon, n))
}
