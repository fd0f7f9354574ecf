//! Two-parameter WKB for −ħ²f″ + Vf = Ef: turning points, barrier and phase
//! actions, the Langer variable, and comparison of e^{−S/ħ} with exact transmission.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::{adaptive_gk, integrate_to_infinity};
use crate::potential::PotentialModel;
use crate::scattering::transmission_reflection;

const QUAD_TOL: f64 = 1e-12;
const MAX_INTERVALS: usize = 4000;

/// V₀ = V + (ħ²/4)⟨x⟩⁻², or V itself when `corrected` is false.
pub fn corrected_potential(model: &PotentialModel, hbar: f64, corrected: bool, x: f64) -> f64 {
    let v = model.evaluate(x);
    if corrected { v + 0.25 * hbar * hbar / (1.0 + x * x) } else { v }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbData {
    pub e: f64,
    pub hbar: f64,
    pub x2: f64,
    pub x1: f64,
    /// Location of the barrier maximum.
    pub x_c: f64,
    pub s: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub t_total: f64,
    /// e^{−S/ħ}
    pub sigma11_abs: f64,
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangerChart {
    pub e: f64,
    pub hbar: f64,
    pub x1: f64,
    pub x: Vec<f64>,
    pub zeta: Vec<f64>,
    /// −Q₀/ζ with Q₀ = V₀ − E; equals ζ′².
    pub q: Vec<f64>,
}

fn check_args(e: f64, hbar: f64) -> Result<()> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::InvalidArgument(format!("energy must be positive, got {e}")));
    }
    if !(hbar > 0.0 && hbar < 1.0) {
        return Err(Error::InvalidArgument(format!("hbar must lie in (0, 1), got {hbar}")));
    }
    Ok(())
}

/// Location and height of the barrier maximum of V₀.
pub fn barrier_top(model: &PotentialModel, hbar: f64, corrected: bool) -> (f64, f64) {
    let v0 = |x: f64| corrected_potential(model, hbar, corrected, x);
    let step = 0.02;
    let (mut best, mut vbest) = (0.0, v0(0.0));
    for k in -5000..=5000 {
        let x = k as f64 * step;
        let v = v0(x);
        if v > vbest {
            best = x;
            vbest = v;
        }
    }
    // golden-section refinement
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best - step, best + step);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if v0(c) > v0(d) { b = d } else { a = c }
    }
    let x = 0.5 * (a + b);
    (x, v0(x).max(vbest))
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() < f(b).abs() { a } else { b }
}

/// Walks outward from the barrier top; more than one crossing per side is refused.
fn side_root(model: &PotentialModel, e: f64, hbar: f64, corrected: bool, xc: f64, dir: f64) -> Result<f64> {
    let f = |x: f64| corrected_potential(model, hbar, corrected, x) - e;
    let mut roots = Vec::new();
    let mut d = 0.0;
    let mut step = 1e-2;
    let mut prev = f(xc);
    let mut limit = 1e9;
    while d < limit {
        let nd = d + step;
        let cur = f(xc + dir * nd);
        if (cur > 0.0) != (prev > 0.0) {
            roots.push(bisect(&f, xc + dir * d, xc + dir * nd));
            limit = (100.0 * nd).clamp(1e3, 1e9);
        }
        prev = cur;
        d = nd;
        step = (step * 1.02).min(0.05 * d.max(1.0));
    }
    match roots.len() {
        1 => {
            let r = roots[0];
            let residual = f(r).abs();
            if residual > 1e-10 {
                return Err(Error::AccuracyFailure(format!("turning point residual {residual:e}")));
            }
            Ok(r)
        }
        0 => Err(Error::NotInRegime(format!("no turning point on the {} side", if dir > 0.0 { "right" } else { "left" }))),
        n => Err(Error::NotInRegime(format!("{n} turning points on one side"))),
    }
}

/// (x2, x1) with V₀(x_i) = E and x2 < x_c < x1.
pub fn turning_points(model: &PotentialModel, e: f64, hbar: f64, corrected: bool) -> Result<(f64, f64)> {
    check_args(e, hbar)?;
    let (xc, vmax) = barrier_top(model, hbar, corrected);
    if vmax <= 0.0 {
        return Err(Error::NotInRegime("potential has no positive barrier".into()));
    }
    if e >= vmax {
        return Err(Error::NotInRegime(format!("E = {e} is not below the barrier maximum {vmax}")));
    }
    let x2 = side_root(model, e, hbar, corrected, xc, -1.0)?;
    let x1 = side_root(model, e, hbar, corrected, xc, 1.0)?;
    Ok((x2, x1))
}

fn quad<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    adaptive_gk(f, a, b, QUAD_TOL, QUAD_TOL, MAX_INTERVALS)
        .map(|r| r.value)
        .map_err(|e| Error::AccuracyFailure(e.to_string()))
}

/// ∫ √|Q| from the turning point `tp` a distance `len` in direction `dir`, with x = tp + dir·u².
fn from_turning_point<F: Fn(f64) -> f64>(q: &F, tp: f64, dir: f64, len: f64) -> Result<f64> {
    if len <= 0.0 {
        return Ok(0.0);
    }
    quad(|u: f64| 2.0 * u * q(tp + dir * u * u).abs().sqrt(), 0.0, len.sqrt())
}

pub fn action_integrals(model: &PotentialModel, e: f64, hbar: f64, corrected: bool) -> Result<WkbData> {
    let (x2, x1) = turning_points(model, e, hbar, corrected)?;
    let (xc, _) = barrier_top(model, hbar, corrected);
    let q = |x: f64| corrected_potential(model, hbar, corrected, x) - e;
    let m = 0.5 * (x1 + x2);
    let s = from_turning_point(&q, x2, 1.0, m - x2)? + from_turning_point(&q, x1, -1.0, x1 - m)?;

    let se = e.sqrt();
    let phase = |x: f64| (e - corrected_potential(model, hbar, corrected, x)).max(0.0).sqrt() - se;
    let mut t = [0.0; 2];
    for (k, (tp, dir)) in [(x1, 1.0), (x2, -1.0)].into_iter().enumerate() {
        let d = (dir * (tp - xc)).max(1.0);
        let near = quad(|u: f64| 2.0 * u * phase(tp + dir * u * u), 0.0, d.sqrt())?;
        let far = integrate_to_infinity(|y| phase(tp + dir * y), d, QUAD_TOL, QUAD_TOL)
            .map_err(|e| Error::AccuracyFailure(e.to_string()))?
            .value;
        t[k] = dir * tp * se - near - far;
    }
    Ok(WkbData {
        e,
        hbar,
        x2,
        x1,
        x_c: xc,
        s,
        t_plus: t[0],
        t_minus: t[1],
        t_total: t[0] + t[1],
        sigma11_abs: (-s / hbar).exp(),
        corrected,
    })
}

pub fn langer_variable(model: &PotentialModel, e: f64, hbar: f64, x_grid: &[f64], corrected: bool) -> Result<LangerChart> {
    if x_grid.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidArgument("the Langer chart is built on x >= 0".into()));
    }
    let (_, x1) = turning_points(model, e, hbar, corrected)?;
    let q = |x: f64| corrected_potential(model, hbar, corrected, x) - e;
    let near = x1.abs().max(1.0);
    let dq = {
        let h = 1e-5 * near;
        (q(x1 + h) - q(x1 - h)) / (2.0 * h)
    };
    let slope_sq = (-dq).max(0.0).powf(2.0 / 3.0);
    let mut zeta = Vec::with_capacity(x_grid.len());
    let mut qs = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let integral = if x >= x1 {
            let d = (x - x1).min(near);
            let mut v = from_turning_point(&q, x1, 1.0, d)?;
            if x > x1 + d {
                v += quad(|y| q(y).abs().sqrt(), x1 + d, x)?;
            }
            v
        } else {
            from_turning_point(&q, x1, -1.0, x1 - x)?
        };
        let z = (1.5 * integral).powf(2.0 / 3.0) * if x >= x1 { 1.0 } else { -1.0 };
        zeta.push(z);
        qs.push(if z.abs() < 1e-6 * near { slope_sq } else { -q(x) / z });
    }
    Ok(LangerChart { e, hbar, x1, x: x_grid.to_vec(), zeta, q: qs })
}

/// The exact problem −ħ²f″ + Vf = Ef is −f″ + (V/ħ²)f = λ²f with λ = √E/ħ.
/// Returns (|Σ₁₁| ≈ e^{−S/ħ}, exact |T|, relative deviation).
pub fn wkb_vs_exact(model: &PotentialModel, e: f64, hbar: f64, corrected: bool) -> Result<(f64, f64, f64)> {
    let data = action_integrals(model, e, hbar, corrected)?;
    let scaled = model.scaled(1.0 / (hbar * hbar))?;
    let exact = transmission_reflection(&scaled, e.sqrt() / hbar)?.t.norm();
    Ok((data.sigma11_abs, exact, (data.sigma11_abs - exact).abs() / exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barrier() -> PotentialModel {
        PotentialModel::inverse_square_barrier(2.0).unwrap()
    }

    #[test]
    fn turning_point_closed_form() {
        // strength 2 − ħ²/4 makes V₀ = 2/⟨x⟩² exactly
        let hbar: f64 = 0.1;
        let m = PotentialModel::inverse_square_barrier(2.0 - hbar * hbar / 4.0).unwrap();
        let (x2, x1) = turning_points(&m, 0.5, hbar, true).unwrap();
        assert!((x1 - 3f64.sqrt()).abs() < 1e-10);
        assert!((x2 + x1).abs() < 1e-10);
        for x in [x1, x2] {
            assert!((corrected_potential(&m, hbar, true, x) - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn above_barrier_is_refused() {
        assert!(matches!(turning_points(&barrier(), 2.5, 0.05, true), Err(Error::NotInRegime(_))));
        assert!(matches!(turning_points(&PotentialModel::free(), 0.1, 0.05, true), Err(Error::NotInRegime(_))));
    }

    #[test]
    fn golden_action() {
        // adaptive reference quadrature at 1e-13
        let d = action_integrals(&barrier(), 0.25, 0.05, true).unwrap();
        assert!((d.s - 3.816581498348542).abs() < 1e-9, "{}", d.s);
        assert!((d.t_total - d.t_plus - d.t_minus).abs() < 1e-14);
        assert!((d.t_plus - d.t_minus).abs() < 1e-9);
    }

    #[test]
    fn action_log_asymptotics() {
        // S = 2ν|log √E| + O(1): the ratio decreases to 1 and the offset settles
        let nu = 2f64.sqrt();
        let mut prev = f64::INFINITY;
        let mut offsets = Vec::new();
        for e in [1e-2, 1e-4, 1e-6] {
            let d = action_integrals(&barrier(), e, 0.05, true).unwrap();
            let lead = 2.0 * nu * e.sqrt().ln().abs();
            let ratio = d.s / lead;
            assert!(ratio > 1.0 && ratio < prev, "E={e}: {ratio}");
            prev = ratio;
            offsets.push(d.s - lead);
        }
        assert!((offsets[2] - offsets[1]).abs() < 1e-2 && (offsets[1] - offsets[0]).abs() < 2e-2, "{offsets:?}");
        // reference quadrature at 1e-13
        assert!((prev - 1.1062887791984246).abs() < 1e-9);
    }

    #[test]
    fn action_vanishes_at_barrier_top() {
        let (_, top) = barrier_top(&barrier(), 0.05, true);
        let d = action_integrals(&barrier(), top * (1.0 - 1e-6), 0.05, true).unwrap();
        assert!(d.s < 1e-5);
    }

    #[test]
    fn langer_chart_properties() {
        let m = barrier();
        let (e, hbar) = (0.05, 0.05);
        let (_, x1) = turning_points(&m, e, hbar, true).unwrap();
        let xs: Vec<f64> = (0..200).map(|k| k as f64 * 0.1 * x1).chain([x1]).collect();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let chart = langer_variable(&m, e, hbar, &sorted, true).unwrap();
        for w in chart.zeta.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for (x, z) in chart.x.iter().zip(&chart.zeta) {
            if *x == x1 {
                assert_eq!(*z, 0.0);
            } else {
                assert_eq!(z.signum(), (x - x1).signum());
            }
        }
        assert!(chart.q.iter().all(|q| *q > 0.0));
        // no kink at the turning point
        let h = 1e-3;
        let c = langer_variable(&m, e, hbar, &[x1 - h, x1, x1 + h], true).unwrap();
        let second = (c.zeta[0] - 2.0 * c.zeta[1] + c.zeta[2]) / (h * h);
        let slope = (c.zeta[2] - c.zeta[0]) / (2.0 * h);
        assert!(second.abs() < 10.0 * slope, "{second} vs {slope}");
        // far field: (2/3)ζ^{3/2} ≈ √E(x − x1) + √c(1 − π/2) with c = E·x1²
        let far = langer_variable(&m, e, hbar, &[10.0 * x1], true).unwrap();
        let lhs = 2.0 / 3.0 * far.zeta[0].powf(1.5);
        let rhs = e.sqrt() * 9.0 * x1 + e.sqrt() * x1 * (1.0 - std::f64::consts::FRAC_PI_2);
        assert!((lhs / rhs - 1.0).abs() < 1e-2, "{lhs} vs {rhs}");
    }

    #[test]
    fn wkb_tracks_exact_transmission() {
        let m = barrier();
        let (_, _, dev) = wkb_vs_exact(&m, 0.5, 0.05, true).unwrap();
        assert!(dev < 0.1, "{dev}");
    }
}
