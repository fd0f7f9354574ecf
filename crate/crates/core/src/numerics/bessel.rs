//! Hankel functions of the first kind for real order ν ≥ 0 and real argument.
//!
//! Small arguments use the ascending series for J_ν and Y_ν; large arguments
//! use the Hankel asymptotic expansion. The two agree to ~1e-10 on the
//! overlap window [`SERIES_MAX`, `SERIES_MAX` + 2] for ν ≤ 3.

use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::NumericsError;

/// Largest argument at which the ascending series is trusted.
pub const SERIES_MAX: f64 = 12.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn is_integer(nu: f64) -> Option<u32> {
    let r = nu.round();
    if (nu - r).abs() < 1e-12 && r >= 0.0 {
        Some(r as u32)
    } else {
        None
    }
}

/// J_ν(z) from the ascending series; ν may be negative and non-integer.
fn bessel_j_series(nu: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let lead = (0.5 * z).powf(nu);
    // term_k = q^k / (k! Γ(k+ν+1)); recurrence avoids repeated gamma calls
    let mut term = 1.0 / gamma(nu + 1.0);
    if !term.is_finite() {
        term = 0.0;
    }
    let mut sum = term;
    let mut k = 0usize;
    // negative non-integer ν: 1/Γ(ν+1) finite, recurrence stays valid
    loop {
        k += 1;
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k > 2 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    lead * sum
}

fn bessel_y_integer(n: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let nf = n as f64;
    let mut finite = 0.0;
    if n > 0 {
        // Σ_{k<n} (n-k-1)!/k! (z²/4)^k
        let mut fact_nk1 = (1..n).map(|j| j as f64).product::<f64>(); // (n-1)!
        let mut k_fact = 1.0;
        let mut pow = 1.0;
        for k in 0..n {
            if k > 0 {
                k_fact *= k as f64;
                fact_nk1 /= (n - k) as f64;
                pow *= half * half;
            }
            finite += fact_nk1 / k_fact * pow;
        }
        finite *= -half.powf(-nf) / PI;
    }
    let jn = bessel_j_series(nf, z);
    let log_part = 2.0 / PI * half.ln() * jn;
    // ψ(k+1) + ψ(n+k+1)
    let mut psi_k = -EULER_GAMMA;
    let mut psi_nk = -EULER_GAMMA + (1..=n).map(|j| 1.0 / j as f64).sum::<f64>();
    let q = -half * half;
    let mut term = 1.0 / (1..=n).map(|j| j as f64).product::<f64>(); // 1/(0! n!)
    let mut sum = (psi_k + psi_nk) * term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        psi_k += 1.0 / k as f64;
        psi_nk += 1.0 / (k + n) as f64;
        let add = (psi_k + psi_nk) * term;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() && k > 2 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    finite + log_part - half.powf(nf) / PI * sum
}

fn hankel_series(nu: f64, z: f64) -> Complex64 {
    let j = bessel_j_series(nu, z);
    let y = match is_integer(nu) {
        Some(n) => bessel_y_integer(n, z),
        None => {
            let (s, c) = (nu * PI).sin_cos();
            (j * c - bessel_j_series(-nu, z)) / s
        }
    };
    Complex64::new(j, y)
}

/// Coefficients of the large-argument expansion: a_k(ν) (real; the i^k factor is applied by callers).
fn asymptotic_coefficients(nu: f64, z: f64) -> Vec<f64> {
    let mu = 4.0 * nu * nu;
    let mut out = vec![1.0];
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if a == 0.0 {
            break;
        }
        if a.abs() > prev {
            // asymptotic series started to diverge
            break;
        }
        prev = a.abs();
        out.push(a);
        if a.abs() < 1e-18 {
            break;
        }
    }
    out
}

/// e^{-iz}·sqrt(πz/2)·e^{i(2ν+1)π/4}·H⁺_ν(z) and its z-derivative, from the
/// asymptotic series. Returns (m, m') where the outgoing form is e^{iz}·m(z).
pub fn outgoing_modulation(nu: f64, z: f64) -> (Complex64, Complex64) {
    let coeffs = asymptotic_coefficients(nu, z);
    let mut m = Complex64::new(0.0, 0.0);
    let mut dm = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for (k, a) in coeffs.iter().enumerate() {
        // a already carries z^{-k}
        m += ik * *a;
        dm += ik * (-(k as f64) * a / z);
        ik *= i;
    }
    (m, dm)
}

/// Smallest argument at which [`outgoing_modulation`] is accurate to ~1e-15.
pub fn asymptotic_threshold(nu: f64) -> f64 {
    30.0f64.max(2.0 * nu * nu)
}

/// H⁺_ν(z) = J_ν(z) + i Y_ν(z) for ν ≥ 0, z > 0.
pub fn hankel1(nu: f64, z: f64) -> Result<Complex64, NumericsError> {
    if nu < 0.0 || z <= 0.0 {
        return Err(NumericsError::OutOfDomain(format!("hankel1(nu={nu}, z={z})")));
    }
    if z <= SERIES_MAX {
        return Ok(hankel_series(nu, z));
    }
    if z < nu * nu {
        return Err(NumericsError::OutOfDomain(format!(
            "hankel1(nu={nu}, z={z}): neither expansion is accurate"
        )));
    }
    let (m, _) = outgoing_modulation(nu, z);
    let phase = Complex64::new(0.0, z - (2.0 * nu + 1.0) * PI / 4.0).exp();
    Ok(phase * m * (2.0 / (PI * z)).sqrt())
}

/// The free inverse-square outgoing solution sqrt(πz/2)·e^{i(2ν+1)π/4}·H⁺_ν(z)
/// (→ e^{iz}) and its z-derivative.
pub fn outgoing_hankel_form(nu: f64, z: f64) -> Result<(Complex64, Complex64), NumericsError> {
    if z > SERIES_MAX {
        if z < nu * nu {
            return Err(NumericsError::OutOfDomain(format!(
                "outgoing_hankel_form(nu={nu}, z={z}): neither expansion is accurate"
            )));
        }
        let (m, dm) = outgoing_modulation(nu, z);
        let e = Complex64::new(0.0, z).exp();
        return Ok((e * m, e * (dm + Complex64::new(0.0, 1.0) * m)));
    }
    let beta = (PI / 2.0).sqrt() * Complex64::new(0.0, (2.0 * nu + 1.0) * PI / 4.0).exp();
    let h = hankel1(nu, z)?;
    // H'_ν = H_{ν-1} - (ν/z) H_ν, with H_{-μ} = e^{iμπ} H_μ
    let h_prev = if nu >= 1.0 {
        hankel1(nu - 1.0, z)?
    } else {
        let mu = 1.0 - nu;
        Complex64::new(0.0, mu * PI).exp() * hankel1(mu, z)?
    };
    let dh = h_prev - h * (nu / z);
    let sz = z.sqrt();
    Ok((beta * sz * h, beta * (h / (2.0 * sz) + sz * dh)))
}
