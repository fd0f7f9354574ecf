//! Jost solutions, Wronskians, scattering coefficients, the spectral kernel and
//! zero-energy resonance diagnostics for H = −∂ₓ² + V.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::bessel::{asymptotic_threshold, outgoing_hankel_form};
use crate::numerics::ode::{Dopri5, OdeOptions};
use crate::numerics::quad::integrate_to_infinity;
use crate::potential::{PotentialModel, Side, TailClass, TailKind};

pub const LAMBDA_MIN: f64 = 1e-4;
pub const RESONANCE_THRESHOLD: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostOptions {
    pub rtol: f64,
    pub lambda_min: f64,
    /// Bound on the neglected tail correction at the initialization point.
    pub tail_tol: f64,
    /// Smallest admissible |x| of the initialization point.
    pub x_inf_min: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, lambda_min: LAMBDA_MIN, tail_tol: 1e-9, x_inf_min: 60.0 }
    }
}

/// Outgoing solution f± sampled on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JostSolution {
    pub side: Side,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub f: Vec<Complex64>,
    pub df: Vec<Complex64>,
    pub x_infinity: f64,
}

/// Initial data Φ(r), Φ'(r) at distance r from the origin toward `side`,
/// normalized so that Φ ~ e^{iλr} at infinity.
struct Start {
    r: f64,
    g: Complex64,
    dg_r: Complex64,
}

fn local_wavenumber(lambda: f64, v: f64) -> f64 {
    (lambda * lambda - v).max(0.0).sqrt()
}

fn asymptotic_start(
    model: &PotentialModel,
    tail: &TailClass,
    lambda: f64,
    side: Side,
    reach: f64,
    opts: &JostOptions,
) -> Result<Start> {
    let s = side.sign();
    let mut r = opts.x_inf_min.max(30.0 / lambda).max(reach + 1.0);
    if let Some(nu) = tail.nu() {
        r = r.max(asymptotic_threshold(nu) / lambda);
    }
    let exact = tail.exact_beyond.map(|e| s * e);
    let delta = |r: f64| (model.evaluate(s * r) - tail.reference_potential(r)).abs();
    let corrected = match exact {
        Some(e) => {
            r = r.max(e);
            false
        }
        None => {
            let mut tries = 0;
            while delta(r) / (4.0 * lambda * lambda) > opts.tail_tol {
                r *= 1.5;
                tries += 1;
                if tries > 200 {
                    return Err(Error::AccuracyFailure(format!(
                        "no initialization point meets the tail tolerance at lambda = {lambda}"
                    )));
                }
            }
            true
        }
    };

    let z = lambda * r;
    let (m, dm) = match tail.kind {
        TailKind::InverseSquare => {
            let (f, df) = outgoing_hankel_form(tail.coefficient, z)?;
            // strip the carrier e^{iz}; it is reinstated with the same phase
            let e = Complex64::new(0.0, -z).exp();
            (f * e, (df - I * f) * e)
        }
        _ => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    // g(r) = m e^{iθ}; Φ = e^{iλr} g, Φ' = e^{iλr}(g' + iλg)
    let (theta, dtheta) = if corrected {
        let dk = |r: f64| {
            let v = model.evaluate(s * r);
            let vr = tail.reference_potential(r);
            (vr - v) / (local_wavenumber(lambda, v) + local_wavenumber(lambda, vr))
        };
        let q = integrate_to_infinity(dk, r, 1e-15, 1e-12)?;
        (-q.value, dk(r))
    } else {
        (0.0, 0.0)
    };
    let rot = Complex64::new(0.0, theta).exp();
    let mut g = m * rot;
    let mut dg = (lambda * dm + I * dtheta * m) * rot;
    // flux Im(Φ'Φ̄) must equal λ
    let flux = ((dg + I * lambda * g) * g.conj()).im;
    if !(flux > 0.0) {
        return Err(Error::AccuracyFailure(format!("non-positive flux at the initialization point (lambda = {lambda})")));
    }
    let norm = (lambda / flux).sqrt();
    g *= norm;
    dg *= norm;
    Ok(Start { r, g, dg_r: dg })
}

/// Jost solution on `grid` (sorted ascending).
pub fn compute_jost(
    model: &PotentialModel,
    lambda: f64,
    side: Side,
    grid: &[f64],
    opts: &JostOptions,
) -> Result<JostSolution> {
    if !(lambda >= opts.lambda_min) {
        return Err(Error::BelowFloor { lambda, floor: opts.lambda_min });
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be non-empty and sorted".into()));
    }
    let tail = model.tail(side)?;
    let s = side.sign();
    let reach = grid.iter().map(|x| s * x).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let start = asymptotic_start(model, &tail, lambda, side, reach, opts)?;

    // g = f e^{−isλx} obeys g'' = −2isλ g' + V g; in x, g' = s·dg/dr
    let x0 = s * start.r;
    let y0 = [start.g.re, start.g.im, s * start.dg_r.re, s * start.dg_r.im];
    let two_sl = 2.0 * s * lambda;
    let mut rhs = |x: f64, y: &[f64; 4]| {
        let v = model.evaluate(x);
        [y[2], y[3], two_sl * y[3] + v * y[0], -two_sl * y[2] + v * y[1]]
    };
    let ode = OdeOptions { rtol: opts.rtol, ..Default::default() };
    let h0 = (0.01 * start.r).min(0.5 / lambda).max(1e-6);
    let mut stepper = Dopri5::new(x0, y0, h0, ode);
    let n = grid.len();
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut df = vec![Complex64::new(0.0, 0.0); n];
    let order: Vec<usize> = match side {
        Side::Plus => (0..n).rev().collect(),
        Side::Minus => (0..n).collect(),
    };
    for i in order {
        stepper.advance_to(&mut rhs, grid[i])?;
        let y = stepper.y;
        let g = Complex64::new(y[0], y[1]);
        let dg = Complex64::new(y[2], y[3]);
        let carrier = Complex64::new(0.0, s * lambda * grid[i]).exp();
        f[i] = g * carrier;
        df[i] = (dg + I * s * lambda * g) * carrier;
    }
    Ok(JostSolution { side, lambda, grid: grid.to_vec(), f, df, x_infinity: x0 })
}

fn wronskian_at(f: Complex64, df: Complex64, g: Complex64, dg: Complex64) -> Complex64 {
    f * dg - df * g
}

/// Up to nine indices spread over the interior of a grid of length n.
fn sample_indices(n: usize) -> Vec<usize> {
    if n <= 9 {
        return (0..n).collect();
    }
    let lo = 1;
    let hi = n - 2;
    (0..9).map(|k| lo + k * (hi - lo) / 8).collect()
}

fn mean_and_spread(values: &[Complex64]) -> (Complex64, f64) {
    let mean = values.iter().sum::<Complex64>() / values.len() as f64;
    let mut spread: f64 = 0.0;
    for a in values {
        for b in values {
            spread = spread.max((a - b).norm());
        }
    }
    (mean, spread)
}

/// W(f₊, f₋) = f₊f₋′ − f₊′f₋, averaged over interior points of the common grid.
pub fn wronskian(fp: &JostSolution, fm: &JostSolution) -> Result<Complex64> {
    let (w, spread) = wronskian_with_spread(fp, fm)?;
    let bound = 1e-8 * w.norm();
    if !(spread <= bound) {
        return Err(Error::WronskianInconsistent { spread, bound });
    }
    Ok(w)
}

/// Mean Wronskian and the largest pairwise difference among the sampled points.
pub fn wronskian_with_spread(fp: &JostSolution, fm: &JostSolution) -> Result<(Complex64, f64)> {
    if fp.side != Side::Plus || fm.side != Side::Minus {
        return Err(Error::InvalidArgument("wronskian expects (plus, minus) Jost solutions".into()));
    }
    if (fp.lambda - fm.lambda).abs() > 1e-15 * fp.lambda {
        return Err(Error::InvalidArgument("Jost solutions at different lambda".into()));
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < fp.grid.len() && j < fm.grid.len() {
        if fp.grid[i] == fm.grid[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if fp.grid[i] < fm.grid[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    if pairs.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "Jost grids share {} points; at least 5 are needed",
            pairs.len()
        )));
    }
    let values: Vec<Complex64> = sample_indices(pairs.len())
        .into_iter()
        .map(|k| {
            let (i, j) = pairs[k];
            wronskian_at(fp.f[i], fp.df[i], fm.f[j], fm.df[j])
        })
        .collect();
    Ok(mean_and_spread(&values))
}

/// Both Jost solutions on one grid together with their Wronskian.
#[derive(Debug, Clone)]
pub struct JostPair {
    pub lambda: f64,
    pub plus: JostSolution,
    pub minus: JostSolution,
    pub w: Complex64,
}

impl JostPair {
    pub fn new(model: &PotentialModel, lambda: f64, grid: &[f64], opts: &JostOptions) -> Result<Self> {
        let plus = compute_jost(model, lambda, Side::Plus, grid, opts)?;
        let minus = compute_jost(model, lambda, Side::Minus, grid, opts)?;
        let w = wronskian(&plus, &minus)?;
        Ok(Self { lambda, plus, minus, w })
    }

    /// μ(λ; x_i, x_j) for grid indices i, j.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if self.plus.grid[i] >= self.plus.grid[j] { (i, j) } else { (j, i) };
        2.0 * self.lambda / PI * div(self.plus.f[hi] * self.minus.f[lo], self.w).im
    }
}

/// A grid spanning the region where a model's potential is not yet asymptotic.
pub fn default_grid(model: &PotentialModel) -> Vec<f64> {
    let half = match model.spec() {
        crate::potential::ModelSpec::ReggeWheeler { mass, .. } => 10.0 * mass.max(1.0),
        _ => 10.0,
    };
    (0..=20).map(|k| -half + k as f64 * half / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringCoefficients {
    pub lambda: f64,
    pub t: Complex64,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub w: Complex64,
}

impl ScatteringCoefficients {
    /// max(| |T|²+|R₊|²−1 |, | |T|²+|R₋|²−1 |).
    pub fn unitarity_defect(&self) -> f64 {
        let t2 = self.t.norm_sqr();
        (t2 + self.r_plus.norm_sqr() - 1.0).abs().max((t2 + self.r_minus.norm_sqr() - 1.0).abs())
    }
}

/// a/b without forming |b|², which overflows once |b| passes 1e154.
fn div(a: Complex64, b: Complex64) -> Complex64 {
    let n = b.norm();
    a * (b.conj() / n) / n
}

pub fn scattering_from_pair(pair: &JostPair) -> ScatteringCoefficients {
    let lambda = pair.lambda;
    let t = div(-2.0 * I * lambda, pair.w);
    let idx = sample_indices(pair.plus.grid.len());
    let avg = |f: &dyn Fn(usize) -> Complex64| idx.iter().map(|&k| f(k)).sum::<Complex64>() / idx.len() as f64;
    let (p, m) = (&pair.plus, &pair.minus);
    // T f₊ = f̄₋ + R₋ f₋ and T f₋ = f̄₊ + R₊ f₊
    let w_p_mbar = avg(&|k| wronskian_at(p.f[k], p.df[k], m.f[k].conj(), m.df[k].conj()));
    let w_pbar_m = avg(&|k| wronskian_at(p.f[k].conj(), p.df[k].conj(), m.f[k], m.df[k]));
    let r_minus = t * w_p_mbar / (2.0 * I * lambda);
    let r_plus = t * w_pbar_m / (2.0 * I * lambda);
    ScatteringCoefficients { lambda, t, r_plus, r_minus, w: pair.w }
}

pub fn transmission_reflection(model: &PotentialModel, lambda: f64) -> Result<ScatteringCoefficients> {
    transmission_reflection_with(model, lambda, &default_grid(model), &JostOptions::default())
}

pub fn transmission_reflection_with(
    model: &PotentialModel,
    lambda: f64,
    grid: &[f64],
    opts: &JostOptions,
) -> Result<ScatteringCoefficients> {
    let pair = JostPair::new(model, lambda, grid, opts)?;
    Ok(scattering_from_pair(&pair))
}

/// μ(λ; x, y) = (2λ/π)·Im[f₊(x∨y) f₋(x∧y)/W] on a λ grid; `values[k][i][j]`
/// pairs λ_k with x_i and y_j.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralKernel {
    pub lambdas: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
}

/// Pads a grid so that Wronskian checks always have interior points.
pub(crate) fn with_probe_points(grid: &[f64]) -> Vec<f64> {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min).min(-1.0);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(1.0);
    let mut out: Vec<f64> = grid.to_vec();
    out.extend((0..=8).map(|k| lo + (hi - lo) * k as f64 / 8.0));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub fn spectral_kernel(
    model: &PotentialModel,
    lambdas: &[f64],
    xs: &[f64],
    ys: &[f64],
    opts: &JostOptions,
) -> Result<SpectralKernel> {
    let mut points = xs.to_vec();
    points.extend_from_slice(ys);
    let grid = with_probe_points(&points);
    let xi: Vec<usize> = xs.iter().map(|x| grid.partition_point(|a| a < x)).collect();
    let yi: Vec<usize> = ys.iter().map(|y| grid.partition_point(|a| a < y)).collect();
    let values = lambdas
        .par_iter()
        .map(|&lambda| {
            let pair = JostPair::new(model, lambda, &grid, opts)?;
            Ok(xi.iter().map(|&i| yi.iter().map(|&j| pair.kernel(i, j)).collect()).collect())
        })
        .collect::<Result<Vec<Vec<Vec<f64>>>>>()?;
    Ok(SpectralKernel { lambdas: lambdas.to_vec(), x: xs.to_vec(), y: ys.to_vec(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub resonant: bool,
    /// Wronskian of the two end-subordinate zero-energy solutions at x = 0,
    /// normalized by the Euclidean norms of their Cauchy data there.
    pub matching_wronskian: f64,
    pub threshold: f64,
}

/// Integrates f'' = V f from the subordinate branch at `side` to x = 0 and
/// returns (f(0), f'(0)).
fn zero_energy_subordinate(model: &PotentialModel, side: Side) -> Result<(f64, f64)> {
    let tail = model.tail(side)?;
    let s = side.sign();
    // Cauchy data in r = s·x: (f, df/dr)
    let (r0, f0, df0) = match tail.kind {
        TailKind::Zero => {
            let r = tail.exact_beyond.map(|e| (s * e).max(0.0)).unwrap_or(1e3);
            (r, 1.0, 0.0)
        }
        TailKind::Exponential => {
            let mut r = 10.0;
            while model.evaluate(s * r).abs() * r * r > 1e-18 {
                r *= 1.5;
                if r > 1e6 {
                    return Err(Error::Unsupported("exponential tail does not decay".into()));
                }
            }
            (r, 1.0, 0.0)
        }
        TailKind::InverseCube => {
            let c = tail.coefficient;
            let r = 1e6;
            (r, 1.0 + c / (2.0 * r), -c / (2.0 * r * r))
        }
        TailKind::InverseSquare => {
            let nu = tail.coefficient;
            if nu < 1e-12 {
                return Err(Error::Unsupported("nu = 0 tail has logarithmic subordinacy".into()));
            }
            let r: f64 = 1e10;
            let p = 0.5 - nu;
            (r, r.powf(p), p * r.powf(p - 1.0))
        }
    };
    if r0 <= 0.0 {
        return Ok((f0, s * df0));
    }
    let mut rhs = |x: f64, y: &[f64; 2]| [y[1], model.evaluate(x) * y[0]];
    let ode = OdeOptions { rtol: 1e-12, ..Default::default() };
    let mut stepper = Dopri5::new(s * r0, [f0, s * df0], 1e-3 * r0, ode);
    stepper.advance_to(&mut rhs, 0.0)?;
    Ok((stepper.y[0], stepper.y[1]))
}

pub fn detect_zero_resonance(model: &PotentialModel) -> Result<ResonanceReport> {
    detect_zero_resonance_with(model, RESONANCE_THRESHOLD)
}

pub fn detect_zero_resonance_with(model: &PotentialModel, threshold: f64) -> Result<ResonanceReport> {
    let (fl, dfl) = zero_energy_subordinate(model, Side::Minus)?;
    let (fr, dfr) = zero_energy_subordinate(model, Side::Plus)?;
    let w = fl * dfr - dfl * fr;
    let norm = fl.hypot(dfl) * fr.hypot(dfr);
    let matching_wronskian = w.abs() / norm;
    Ok(ResonanceReport { resonant: matching_wronskian < threshold, matching_wronskian, threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallLambdaFit {
    pub c: f64,
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub abs_w: Vec<f64>,
}

/// Exponent predicted for |W(λ)| ~ c·λ^p: p = 1 − ν₋ − ν₊, where ends
/// decaying faster than inverse-square count as ν = ½.
pub fn predicted_smalllambda_exponent(model: &PotentialModel) -> Result<f64> {
    let (l, r) = model.tails()?;
    let nu = |t: TailClass| t.nu().unwrap_or(0.5);
    Ok(1.0 - nu(l) - nu(r))
}

/// Least-squares fit of log|W| against log λ.
pub fn wronskian_smalllambda_fit(model: &PotentialModel, lambdas: &[f64]) -> Result<SmallLambdaFit> {
    if lambdas.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 lambda samples".into()));
    }
    if detect_zero_resonance(model)?.resonant {
        return Err(Error::ResonantModel);
    }
    smalllambda_fit_unchecked(model, lambdas)
}

/// The fit without the resonance gate; at a resonance the fitted law differs
/// from [`predicted_smalllambda_exponent`] (the free case gives p = 1).
pub fn smalllambda_fit_unchecked(model: &PotentialModel, lambdas: &[f64]) -> Result<SmallLambdaFit> {
    if lambdas.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 lambda samples".into()));
    }
    let grid = default_grid(model);
    let opts = JostOptions::default();
    let abs_w = lambdas
        .par_iter()
        .map(|&l| Ok(JostPair::new(model, l, &grid, &opts)?.w.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let n = lambdas.len() as f64;
    let lx: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ly: Vec<f64> = abs_w.iter().map(|w| w.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let c = (my - p * mx).exp();
    Ok(SmallLambdaFit { c, p, lambdas: lambdas.to_vec(), abs_w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel::hankel1;

    fn grid() -> Vec<f64> {
        (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect()
    }

    #[test]
    fn free_jost_is_plane_wave() {
        let m = PotentialModel::free();
        let opts = JostOptions::default();
        for side in [Side::Plus, Side::Minus] {
            let j = compute_jost(&m, 1.0, side, &grid(), &opts).unwrap();
            for (x, f) in j.grid.iter().zip(&j.f) {
                let e = Complex64::new(0.0, side.sign() * x).exp();
                assert!((f - e).norm() < 1e-12);
            }
        }
        let pair = JostPair::new(&m, 0.25, &grid(), &opts).unwrap();
        assert!((pair.w - Complex64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn inverse_square_model_matches_hankel_on_the_right() {
        let m = PotentialModel::inverse_square_model(1.0).unwrap();
        let lambda = 0.5;
        let g: Vec<f64> = (0..=20).map(|k| 1.0 + 0.5 * k as f64).collect();
        let j = compute_jost(&m, lambda, Side::Plus, &g, &JostOptions::default()).unwrap();
        let beta = (PI / 2.0).sqrt() * Complex64::new(0.0, 3.0 * PI / 4.0).exp();
        for (x, f) in j.grid.iter().zip(&j.f) {
            let z = lambda * x;
            let expect = beta * z.sqrt() * hankel1(1.0, z).unwrap();
            assert!((f - expect).norm() < 1e-8, "x={x}: {f} vs {expect}");
        }
    }

    #[test]
    fn regge_wheeler_left_plane_wave() {
        let m = PotentialModel::regge_wheeler(1.0, 0, 1).unwrap();
        let lambda = 0.3;
        let j = compute_jost(&m, lambda, Side::Minus, &[-60.0, -30.0, 0.0], &JostOptions::default()).unwrap();
        // f₋ ~ e^{−iλx}
        let defect = (j.f[0] * Complex64::new(0.0, lambda * -60.0).exp() - 1.0).norm();
        assert!(defect < 1e-6, "{defect}");
    }

    #[test]
    fn ode_residual_is_small() {
        // collocation check of −f'' + V f = λ² f via differences of f'
        let m = PotentialModel::regge_wheeler(1.0, 1, 1).unwrap();
        let lambda = 0.4;
        let h = 1e-3;
        let g = [2.0 - h, 2.0, 2.0 + h];
        let j = compute_jost(&m, lambda, Side::Plus, &g, &JostOptions::default()).unwrap();
        let f2 = (j.df[2] - j.df[0]) / (2.0 * h);
        let res = (-f2 + (m.evaluate(2.0) - lambda * lambda) * j.f[1]).norm() / j.f[1].norm();
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn below_floor_is_refused() {
        let e = compute_jost(&PotentialModel::free(), 1e-5, Side::Plus, &grid(), &JostOptions::default());
        assert!(matches!(e, Err(Error::BelowFloor { .. })));
    }

    #[test]
    fn unitarity_and_wronskian_relation() {
        for m in [
            PotentialModel::regge_wheeler(1.0, 1, 1).unwrap(),
            PotentialModel::inverse_square_model(0.7).unwrap(),
            PotentialModel::surface_of_revolution(1).unwrap(),
        ] {
            for lambda in [0.01, 0.2, 1.0, 3.0] {
                let sc = transmission_reflection(&m, lambda).unwrap();
                assert!(sc.unitarity_defect() < 1e-8, "{:?} lambda={lambda}: {}", m.family(), sc.unitarity_defect());
                let w = -2.0 * I * lambda / sc.t;
                assert!((w - sc.w).norm() < 1e-8 * sc.w.norm());
            }
        }
    }

    #[test]
    fn conjugate_wronskian() {
        let m = PotentialModel::surface_of_revolution(1).unwrap();
        let lambda = 0.7;
        let j = compute_jost(&m, lambda, Side::Plus, &grid(), &JostOptions::default()).unwrap();
        for k in 0..j.grid.len() {
            let w = wronskian_at(j.f[k], j.df[k], j.f[k].conj(), j.df[k].conj());
            assert!((w - Complex64::new(0.0, -2.0 * lambda)).norm() < 1e-8 * lambda, "x={}", j.grid[k]);
        }
    }

    #[test]
    fn free_kernel_identity_and_symmetry() {
        let xs = [-3.0, -1.0, 0.0, 1.0, 2.5];
        let lambdas = [0.01, 0.5, 1.0, 4.0, 11.0];
        let k = spectral_kernel(&PotentialModel::free(), &lambdas, &xs, &xs, &JostOptions::default()).unwrap();
        for (a, l) in lambdas.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in xs.iter().enumerate() {
                    let expect = (l * (x - y)).cos() / PI;
                    assert!((k.values[a][i][j] - expect).abs() < 1e-10);
                    assert_eq!(k.values[a][i][j], k.values[a][j][i]);
                }
            }
        }
    }

    #[test]
    fn hankel_tail_in_asymmetric_kernel_is_symmetric() {
        let m = PotentialModel::regge_wheeler(1.0, 1, 1).unwrap();
        let xs = [-5.0, 0.0, 3.0, 10.0];
        let ys = [10.0, -5.0, 3.0];
        let k = spectral_kernel(&m, &[0.3], &xs, &ys, &JostOptions::default()).unwrap();
        // x = 10 vs y = −5 and x = −5 vs y = 10
        assert_eq!(k.values[0][3][1], k.values[0][0][0]);
    }

    #[test]
    fn inverse_square_model_wronskian_golden() {
        // tight-tolerance ODE solve through the bridge from the exact Hankel data at x = 1
        let m = PotentialModel::inverse_square_model(0.7).unwrap();
        let w = JostPair::new(&m, 0.1, &default_grid(&m), &JostOptions::default()).unwrap().w;
        let golden = Complex64::new(1.140517259691985, 0.11914079227950791);
        assert!((w - golden).norm() < 1e-9 * golden.norm(), "{w}");
    }

    #[test]
    fn smalllambda_exponents() {
        let ls: Vec<f64> = (0..=8).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
        let fit = smalllambda_fit_unchecked(&PotentialModel::free(), &ls).unwrap();
        assert!((fit.p - 1.0).abs() < 1e-9);
        assert!(matches!(wronskian_smalllambda_fit(&PotentialModel::free(), &ls), Err(Error::ResonantModel)));
        let m = PotentialModel::inverse_square_model(0.7).unwrap();
        let fit = wronskian_smalllambda_fit(&m, &ls).unwrap();
        assert!((fit.p - predicted_smalllambda_exponent(&m).unwrap()).abs() < 0.1, "p={}", fit.p);
    }

    #[test]
    fn resonance_table() {
        let check = |m: PotentialModel, expect: bool| {
            let r = detect_zero_resonance(&m).unwrap();
            assert_eq!(r.resonant, expect, "{:?}: {}", m.spec(), r.matching_wronskian);
            r.matching_wronskian
        };
        assert!(check(PotentialModel::free(), true) < 1e-8);
        for (l, s) in [(0, 0), (0, -3), (1, -3)] {
            assert!(check(PotentialModel::regge_wheeler(1.0, l, s).unwrap(), true) < 1e-8);
        }
        for (l, s) in [(0, 1), (1, 1), (2, 1)] {
            assert!(check(PotentialModel::regge_wheeler(1.0, l, s).unwrap(), false) > 1e-4);
        }
    }
}
