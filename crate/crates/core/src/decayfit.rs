//! Local power-law decay exponents from station time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::potential::{ModelSpec, PotentialModel};

pub const MIN_ENVELOPE_POINTS: usize = 8;
pub const MIN_POINTS_PER_DECADE: f64 = 3.0;
pub const LOW_CONFIDENCE_R2: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryExponent {
    /// `None` when the theorem gives decay faster than any power.
    pub exponent: Option<f64>,
    pub source: String,
    pub exceptional: bool,
    /// The sharp Price exponent where it differs from the proven one.
    pub sharp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub station: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub alpha: f64,
    pub r2: f64,
    pub envelope_points: usize,
    pub low_confidence: bool,
    pub theory: Option<TheoryExponent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Ringdown exclusion: windows never start before this time.
    pub min_t_lo: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_t_lo: 50.0 }
    }
}

/// Non-increasing upper envelope of |ψ|: right-records among the local maxima,
/// or among all points when there are fewer than eight maxima.
pub fn envelope(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let a: Vec<(f64, f64)> = series.iter().map(|(t, v)| (*t, v.abs())).collect();
    let n = a.len();
    let mut cand: Vec<(f64, f64)> = (0..n)
        .filter(|&i| {
            let left = i == 0 || a[i].1 > a[i - 1].1;
            let right = i + 1 == n || a[i].1 >= a[i + 1].1;
            left && right
        })
        .map(|i| a[i])
        .collect();
    if cand.len() < MIN_ENVELOPE_POINTS {
        cand = a;
    }
    let mut out = Vec::with_capacity(cand.len());
    let mut running = f64::NEG_INFINITY;
    for p in cand.into_iter().rev() {
        if p.1 >= running {
            running = p.1;
            out.push(p);
        }
    }
    out.reverse();
    out
}

/// Least-squares slope of log y against log t, each point weighted by its share of log t.
/// Returns (slope, intercept, r²).
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} positive points")));
    }
    let w: Vec<f64> = (0..n)
        .map(|i| {
            let lo = if i == 0 { pts[0].0 } else { 0.5 * (pts[i - 1].0 + pts[i].0) };
            let hi = if i + 1 == n { pts[n - 1].0 } else { 0.5 * (pts[i].0 + pts[i + 1].0) };
            (hi - lo).max(1e-12)
        })
        .collect();
    let sw: f64 = w.iter().sum();
    let mx = pts.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = pts.iter().zip(&w).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all points at one time".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    Ok((slope, my - slope * mx, r2))
}

pub fn fit_power_law(series: &[(f64, f64)], station: f64, window: (f64, f64), opts: &FitOptions) -> Result<DecayReport> {
    let (mut t_lo, t_hi) = window;
    t_lo = t_lo.max(opts.min_t_lo);
    if !(t_hi > t_lo) {
        return Err(Error::InvalidArgument(format!("empty window [{t_lo}, {t_hi}]")));
    }
    let (first, last) = match (series.first(), series.last()) {
        (Some(f), Some(l)) => (f.0, l.0),
        _ => return Err(Error::InsufficientData("empty series".into())),
    };
    if t_lo < first || t_hi > last * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("window [{t_lo}, {t_hi}] outside series [{first}, {last}]")));
    }
    let inside: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= t_lo && *t <= t_hi).collect();
    if inside.iter().all(|(_, v)| *v == 0.0) {
        return Err(Error::InsufficientData("series vanishes on the window".into()));
    }
    let env: Vec<(f64, f64)> = envelope(&inside).into_iter().filter(|p| p.1 > 0.0).collect();
    let decades = (t_hi / t_lo).log10();
    let needed = MIN_ENVELOPE_POINTS.max((MIN_POINTS_PER_DECADE * decades).ceil() as usize);
    if env.len() < needed {
        return Err(Error::InsufficientData(format!("{} envelope points, need {needed}", env.len())));
    }
    let (slope, _, r2) = loglog_fit(&env)?;
    Ok(DecayReport {
        station,
        t_lo,
        t_hi,
        alpha: -slope,
        r2,
        envelope_points: env.len(),
        low_confidence: r2 < LOW_CONFIDENCE_R2,
        theory: None,
    })
}

/// The proven local-decay exponent for the model and propagator.
pub fn theory_exponent(model: &PotentialModel, propagator: Propagator, data_mean_zero: bool) -> Result<TheoryExponent> {
    let sinc = match propagator {
        Propagator::Sinc => true,
        Propagator::Cosine => false,
        _ => return Err(Error::TheoremNotApplicable(format!("{propagator:?} propagator"))),
    };
    let te = |exponent: Option<f64>, source: &str, exceptional: bool, sharp: Option<f64>| TheoryExponent {
        exponent,
        source: source.to_string(),
        exceptional,
        sharp,
    };
    match model.spec() {
        ModelSpec::Free {} => {
            if sinc && !data_mean_zero {
                Ok(te(Some(0.0), "free d'Alembert: ψ → ½∫g", false, None))
            } else {
                Ok(te(None, "free d'Alembert: compact data leaves compact sets", false, None))
            }
        }
        ModelSpec::ReggeWheeler { ell, sigma, .. } => {
            if matches!((*ell, *sigma), (0, 0) | (0, -3) | (1, -3)) {
                return Err(Error::TheoremNotApplicable(format!(
                    "(ℓ, σ) = ({ell}, {sigma}) has a zero-energy resonance"
                )));
            }
            let l = *ell as f64;
            let sharp = Some(2.0 * l + 3.0);
            if *ell == 0 {
                // inverse-cube far field without zero resonance: t^{-3} for both propagators
                Ok(te(Some(3.0), "inverse-cube tail, no bound state or zero resonance", false, None))
            } else if sinc {
                Ok(te(Some(2.0 * l + 2.0), "Regge-Wheeler weighted decay, sine propagator", false, sharp))
            } else {
                Ok(te(Some(2.0 * l + 3.0), "Regge-Wheeler weighted decay, cosine propagator", false, None))
            }
        }
        ModelSpec::InverseSquareModel { a } => {
            let exceptional = *a >= 0.5 && ((a - 0.5) - (a - 0.5).round()).abs() < 1e-12;
            let rate = if sinc { 2.0 * a + 1.0 } else { 2.0 * a + 2.0 };
            if exceptional {
                Ok(te(None, "inverse-square model, half-integer a: faster than any power", true, None))
            } else {
                Ok(te(Some(rate), "inverse-square model, small-energy Watson asymptotics", false, None))
            }
        }
        _ => Err(Error::TheoremNotApplicable(format!("no decay theorem for the {:?} family", model.family()))),
    }
}
