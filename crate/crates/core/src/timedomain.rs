//! Leapfrog finite differences for ψ_tt = ψ_xx − Vψ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolution::{Propagator, SourceData, WaveField};
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    CausalTruncation,
    Sommerfeld,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    /// Domain half-width; `None` picks the smallest causal value.
    #[serde(default)]
    pub half_width: Option<f64>,
    pub h: f64,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    pub t_final: f64,
    /// Update the whole grid every step and record the discrete energy.
    #[serde(default)]
    pub record_energy: bool,
}

fn default_courant() -> f64 {
    0.9
}

fn default_boundary() -> Boundary {
    Boundary::CausalTruncation
}

impl FdConfig {
    pub fn new(h: f64, t_final: f64) -> Self {
        Self {
            half_width: None,
            h,
            courant: default_courant(),
            boundary: Boundary::CausalTruncation,
            t_final,
            record_energy: false,
        }
    }

    /// Smallest half-width for which boundary effects cannot reach the stations by t_final.
    pub fn causal_half_width(&self, stations: &[f64], data_radius: f64) -> f64 {
        let reach = stations.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        reach + self.t_final + data_radius + 10.0 * self.h
    }

    fn validate(&self, stations: &[f64], data_radius: f64) -> Result<f64> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidFdConfig(format!("spatial step {} must be positive", self.h)));
        }
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return Err(Error::InvalidFdConfig(format!("Courant ratio {} must lie in (0, 1]", self.courant)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidFdConfig(format!("final time {} must be non-negative", self.t_final)));
        }
        let needed = self.causal_half_width(stations, data_radius);
        let l = self.half_width.unwrap_or(needed);
        if self.boundary == Boundary::CausalTruncation && l < needed - 10.0 * self.h {
            return Err(Error::InvalidFdConfig(format!(
                "half-width {l} is below max|station| + T + data radius = {}",
                needed - 10.0 * self.h
            )));
        }
        if stations.iter().any(|x| x.abs() > l - 2.0 * self.h) {
            return Err(Error::InvalidFdConfig("station outside the domain".into()));
        }
        if l / self.h > 5e7 {
            return Err(Error::InvalidFdConfig("grid too large".into()));
        }
        Ok(l)
    }
}

/// Initial value f and velocity g; either may be absent (zero).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdData {
    #[serde(default)]
    pub value: Option<SourceData>,
    #[serde(default)]
    pub velocity: Option<SourceData>,
}

impl FdData {
    pub fn velocity(g: SourceData) -> Self {
        Self { value: None, velocity: Some(g) }
    }

    pub fn value(f: SourceData) -> Self {
        Self { value: Some(f), velocity: None }
    }

    fn radius(&self) -> f64 {
        [self.value, self.velocity]
            .iter()
            .flatten()
            .map(|d| {
                let (a, b) = d.support();
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    }

    fn propagator(&self) -> Propagator {
        match (self.value.is_some(), self.velocity.is_some()) {
            (true, true) => Propagator::Mixed,
            (true, false) => Propagator::Cosine,
            _ => Propagator::Sinc,
        }
    }
}

const GROWTH_LIMIT: f64 = 1e6;

/// Station series at every time step. Stations off the grid use 4-point Lagrange interpolation.
pub fn fd_evolve(model: &PotentialModel, data: &FdData, cfg: &FdConfig, stations: &[f64]) -> Result<WaveField> {
    if stations.is_empty() {
        return Err(Error::InvalidArgument("at least one station is required".into()));
    }
    for d in [data.value, data.velocity].iter().flatten() {
        d.validate()?;
    }
    let l = cfg.validate(stations, data.radius())?;
    let mut run = leapfrog(model, data, cfg, l, stations)?;
    if cfg.boundary == Boundary::Sommerfeld {
        run.diagnostics.insert("sommerfeld_reflection".to_string(), sommerfeld_reflection(cfg.h, cfg.courant)?);
    }
    Ok(run)
}

fn leapfrog(model: &PotentialModel, data: &FdData, cfg: &FdConfig, l: f64, stations: &[f64]) -> Result<WaveField> {
    let h = cfg.h;
    // the step is shortened so that the last step lands on t_final
    let steps = (cfg.t_final / (cfg.courant * h) - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps > 0 { cfg.t_final / steps as f64 } else { cfg.courant * h };
    let n_half = (l / h).ceil() as i64;
    let nx = (2 * n_half + 1) as usize;
    let xs: Vec<f64> = (0..nx).map(|i| (i as i64 - n_half) as f64 * h).collect();
    let v: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let y = model.evaluate(x);
            if y.abs() < 1e-300 { 0.0 } else { y }
        })
        .collect();
    if v.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidModel("potential is not finite on the grid".into()));
    }
    let eval = |d: &Option<SourceData>| -> Vec<f64> {
        match d {
            Some(s) => xs.iter().map(|&x| s.eval(x)).collect(),
            None => vec![0.0; nx],
        }
    };
    let f = eval(&data.value);
    let g = eval(&data.velocity);
    let r2 = (dt / h).powi(2);
    let lap = |u: &[f64], i: usize| u[i - 1] - 2.0 * u[i] + u[i + 1];

    // Taylor start: u¹ = f + Δt g + Δt²/2 (f'' − Vf) + Δt³/6 (g'' − Vg)
    let mut prev = f.clone();
    let mut cur = vec![0.0; nx];
    for i in 1..nx - 1 {
        let af = lap(&f, i) / (h * h) - v[i] * f[i];
        let ag = lap(&g, i) / (h * h) - v[i] * g[i];
        cur[i] = f[i] + dt * g[i] + 0.5 * dt * dt * af + dt * dt * dt / 6.0 * ag;
    }

    // station stencils
    let stencils: Vec<(usize, [f64; 4])> = stations
        .iter()
        .map(|&x| {
            let s = (x - xs[0]) / h;
            let i0 = (s.floor() as usize).clamp(1, nx - 3) - 1;
            let u = s - i0 as f64;
            let mut w = [0.0; 4];
            for (k, wk) in w.iter_mut().enumerate() {
                *wk = (0..4)
                    .filter(|&m| m != k)
                    .map(|m| (u - m as f64) / (k as f64 - m as f64))
                    .product();
            }
            (i0, w)
        })
        .collect();
    let sample = |u: &[f64]| -> Vec<Complex64> {
        stencils
            .iter()
            .map(|(i0, w)| Complex64::new((0..4).map(|k| w[k] * u[i0 + k]).sum(), 0.0))
            .collect()
    };

    let norm = |u: &[f64]| (u.iter().map(|y| y * y).sum::<f64>() * h).sqrt();
    let baseline = norm(&f).max(norm(&g) * dt).max(norm(&cur)).max(1e-300);
    let mut times = vec![0.0];
    let mut values = vec![sample(&prev)];
    if steps >= 1 {
        times.push(dt);
        values.push(sample(&cur));
    }

    let i_st_lo = stencils.iter().map(|s| s.0).min().unwrap();
    let i_st_hi = stencils.iter().map(|s| s.0 + 3).max().unwrap();
    let sommerfeld = cfg.boundary == Boundary::Sommerfeld;
    let shrink = !cfg.record_energy && !sommerfeld;
    let mut energies = Vec::new();
    let energy = |a: &[f64], b: &[f64]| -> f64 {
        // staggered energy between levels a (older) and b
        let mut e = 0.0;
        for i in 0..nx - 1 {
            let ut = (b[i] - a[i]) / dt;
            let ux = ((b[i + 1] - b[i]) * (a[i + 1] - a[i])) / (h * h);
            e += ut * ut + ux + v[i] * a[i] * b[i];
        }
        0.5 * e * h
    };
    if cfg.record_energy && steps >= 1 {
        energies.push(energy(&prev, &cur));
    }
    let mut next = vec![0.0; nx];
    for n in 1..steps {
        let remaining = steps - n;
        let (lo, hi) = if shrink {
            (i_st_lo.saturating_sub(remaining + 1).max(1), (i_st_hi + remaining + 1).min(nx - 2))
        } else {
            (1, nx - 2)
        };
        for i in lo..=hi {
            next[i] = 2.0 * cur[i] - prev[i] + r2 * lap(&cur, i) - dt * dt * v[i] * cur[i];
        }
        if sommerfeld {
            let k = dt / h;
            next[0] = cur[0] + k * (cur[1] - cur[0]);
            next[nx - 1] = cur[nx - 1] - k * (cur[nx - 1] - cur[nx - 2]);
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        let t = (n + 1) as f64 * dt;
        times.push(t);
        values.push(sample(&cur));
        if cfg.record_energy {
            energies.push(energy(&prev, &cur));
        }
        if n % 64 == 0 || n + 1 == steps {
            let growth = norm(&cur) / baseline;
            if !(growth <= GROWTH_LIMIT) {
                return Err(Error::Unstable { t, growth });
            }
        }
    }

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("h".to_string(), h);
    diagnostics.insert("dt".to_string(), dt);
    diagnostics.insert("half_width".to_string(), l);
    diagnostics.insert("steps".to_string(), steps as f64);
    if let (Some(e0), true) = (energies.first(), cfg.record_energy) {
        let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
        let rise = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        diagnostics.insert("energy_initial".to_string(), *e0);
        diagnostics.insert("energy_max_drift".to_string(), drift);
        diagnostics.insert("energy_max_step_increase".to_string(), rise);
    }
    if sommerfeld {
        diagnostics.insert("boundary_potential".to_string(), v[0].abs().max(v[nx - 1].abs()));
    }
    Ok(WaveField {
        propagator: data.propagator(),
        t: times,
        x: stations.to_vec(),
        values,
        diagnostics,
        provenance: format!("leapfrog finite differences; model {:?}; config {:?}", model.spec(), cfg),
    })
}

/// Reflected/incident amplitude of a free unit-width pulse hitting a Sommerfeld boundary.
pub fn sommerfeld_reflection(h: f64, courant: f64) -> Result<f64> {
    let free = PotentialModel::free();
    // right-moving pulse: f = G(x), g = −G'(x); the doublet is a multiple of G'
    let center = -10.0;
    let data = FdData {
        value: Some(SourceData::gaussian(center, 1.0, 1.0)),
        velocity: Some(SourceData::doublet(center, 1.0, 2.0)),
    };
    let cfg = FdConfig {
        half_width: Some(20.0),
        h,
        courant,
        boundary: Boundary::Sommerfeld,
        t_final: 60.0,
        record_energy: false,
    };
    let run = leapfrog(&free, &data, &cfg, 20.0, &[0.0])?;
    let peak = |keep: &dyn Fn(f64) -> bool| {
        run.values.iter().zip(&run.t).filter(|(_, t)| keep(**t)).map(|(v, _)| v[0].norm()).fold(0.0, f64::max)
    };
    Ok(peak(&|t| t > 40.0) / peak(&|t| t < 20.0))
}

/// (max_rel_err, weighted_L2_err) of `a` against `b` on their common (t, x) points.
/// The relative error is measured against max|b|; the L2 error uses weights ⟨x⟩^{−s}.
pub fn compare_fields(a: &WaveField, b: &WaveField, s: f64) -> Result<(f64, f64)> {
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1.0);
    let match_index = |from: &[f64], to: &[f64]| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, p) in from.iter().enumerate() {
            if let Some(j) = to.iter().position(|q| close(*p, *q)) {
                out.push((i, j));
            }
        }
        out
    };
    let tm = match_index(&a.t, &b.t);
    let xm = match_index(&a.x, &b.x);
    if tm.is_empty() || xm.is_empty() {
        return Err(Error::DisjointGrids);
    }
    let mut peak: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    let (mut num, mut den) = (0.0, 0.0);
    for &(ia, ib) in &tm {
        for &(ja, jb) in &xm {
            let (va, vb) = (a.values[ia][ja], b.values[ib][jb]);
            let w = (1.0 + a.x[ja] * a.x[ja]).powf(-s / 2.0);
            peak = peak.max(vb.norm());
            max_abs = max_abs.max((va - vb).norm());
            num += w * (va - vb).norm_sqr();
            den += w * vb.norm_sqr();
        }
    }
    let rel = if peak > 0.0 { max_abs / peak } else { max_abs };
    let l2 = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok((rel, l2))
}
