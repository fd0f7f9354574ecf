//! Quadrature rules: Gauss–Legendre panels and adaptive Gauss–Kronrod (7, 15).

use crate::error::NumericsError;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A fixed rule mapped onto [a, b].
#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Panel {
    pub fn new(a: f64, b: f64, reference: &(Vec<f64>, Vec<f64>)) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            a,
            b,
            nodes: reference.0.iter().map(|t| mid + half * t).collect(),
            weights: reference.1.iter().map(|w| half * w).collect(),
        }
    }
}

/// Composite Gauss–Legendre over `n_panels` equal panels.
pub fn composite_gl(a: f64, b: f64, n_panels: usize, order: usize) -> Vec<Panel> {
    let reference = gauss_legendre(order);
    let w = (b - a) / n_panels as f64;
    (0..n_panels)
        .map(|k| Panel::new(a + k as f64 * w, a + (k + 1) as f64 * w, &reference))
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over [a, b].
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult, NumericsError> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if pieces.len() >= max_intervals {
            return Err(NumericsError::QuadratureNotConverged { value: total, error: err });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, pv, pe) = pieces.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, m);
        let (v2, e2) = gk15(&mut f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        pieces.push((pa, m, v1, e1));
        pieces.push((m, pb, v2, e2));
        if (pb - pa).abs() < 1e-14 * pa.abs().max(pb.abs()).max(1e-300) {
            // cannot split further; recompute sums to shed drift and stop
            break;
        }
    }
    // resum to avoid accumulated cancellation in the running totals
    let value = pieces.iter().map(|p| p.2).sum();
    let error = pieces.iter().map(|p| p.3).sum();
    Ok(QuadResult { value, error, intervals: pieces.len() })
}

/// Integral of `f` over [a, ∞) for a > 0 through the substitution y = a / s.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult, NumericsError> {
    assert!(a > 0.0, "lower limit must be positive");
    adaptive_gk(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let y = a / s;
            let v = f(y) * a / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        2000,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 12, 24] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // even power deg-1 (odd deg): exact integral 2/deg
            assert!((approx - 2.0 / deg as f64).abs() < 1e-13, "n={n}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = adaptive_gk(|x| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 500).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_inverse_square() {
        let r = integrate_to_infinity(|y| 1.0 / (y * y), 3.0, 1e-14, 1e-13).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-13);
        let r = integrate_to_infinity(|y| (-y).exp(), 1.0, 1e-15, 1e-13).unwrap();
        assert!((r.value - (-1f64).exp()).abs() < 1e-12);
    }
}
