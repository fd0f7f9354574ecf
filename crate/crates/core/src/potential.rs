//! Potential families, the Schwarzschild tortoise coordinate, and tail classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which spatial infinity a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    /// +1 for the right end, −1 for the left.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Free,
    ReggeWheeler,
    InverseSquareModel,
    SurfaceOfRevolution,
    InverseSquareBarrier,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Zero,
    Exponential,
    InverseSquare,
    InverseCube,
}

/// Asymptotic class of one end of a potential.
///
/// `coefficient` holds ν for inverse-square tails (V ~ (ν²−¼)/x²), the decay
/// rate κ for exponential tails, c for inverse-cube tails (V ~ c/|x|³) and 0
/// for zero tails. `exact_beyond`, when present, is the abscissa past which
/// the potential coincides with its tail form exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailClass {
    pub kind: TailKind,
    pub coefficient: f64,
    pub exact_beyond: Option<f64>,
}

impl TailClass {
    pub fn zero(exact_beyond: Option<f64>) -> Self {
        Self { kind: TailKind::Zero, coefficient: 0.0, exact_beyond }
    }

    pub fn inverse_square(nu: f64, exact_beyond: Option<f64>) -> Self {
        Self { kind: TailKind::InverseSquare, coefficient: nu, exact_beyond }
    }

    pub fn nu(&self) -> Option<f64> {
        (self.kind == TailKind::InverseSquare).then_some(self.coefficient)
    }

    /// The part of the potential absorbed into the closed-form asymptotic solution.
    pub fn reference_potential(&self, x: f64) -> f64 {
        match self.kind {
            TailKind::InverseSquare => {
                let nu = self.coefficient;
                (nu * nu - 0.25) / (x * x)
            }
            _ => 0.0,
        }
    }

    fn scaled(self, factor: f64) -> Self {
        match self.kind {
            TailKind::InverseSquare => {
                let nu = self.coefficient;
                let c = factor * (nu * nu - 0.25);
                Self { coefficient: (c + 0.25).max(0.0).sqrt(), ..self }
            }
            TailKind::InverseCube => Self { coefficient: self.coefficient * factor, ..self },
            _ => self,
        }
    }
}

/// Schwarzschild tortoise coordinate x = r + 2M·log(r/2M − 1), inverted for r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TortoiseMap {
    pub mass: f64,
    /// Relative tolerance of the root-find in the variable u = log(r/2M − 1).
    pub tol: f64,
}

impl TortoiseMap {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { mass, tol: 1e-15 })
    }

    /// Solves e^u + u = c. Newton started from an upper bound of this convex,
    /// increasing function converges monotonically; the bracket catches any
    /// step that would leave it.
    fn solve_u(&self, c: f64) -> (f64, bool) {
        let (mut lo, mut hi) = if c <= 1.0 {
            (c - c.exp(), c)
        } else {
            ((c - c.ln()).ln(), c.ln())
        };
        let mut u = hi;
        for _ in 0..200 {
            let eu = u.exp();
            let h = eu + u - c;
            if h > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let mut next = u - h / (eu + 1.0);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let du = (next - u).abs();
            u = next;
            if du <= self.tol * u.abs().max(1.0) || hi - lo <= self.tol * u.abs().max(1.0) {
                return (u, true);
            }
        }
        (u, false)
    }

    /// r/(2M) − 1 at tortoise coordinate x, accurate even where r − 2M underflows
    /// relative to r.
    pub fn excess(&self, x: f64) -> Result<f64> {
        let (u, ok) = self.solve_u(x / (2.0 * self.mass) - 1.0);
        if !ok {
            return Err(Error::RootNotConverged { x });
        }
        Ok(u.exp())
    }

    pub fn radius(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.mass * (1.0 + self.excess(x)?))
    }

    /// Forward map r ↦ r_*.
    pub fn tortoise(&self, r: f64) -> f64 {
        r + 2.0 * self.mass * (r / (2.0 * self.mass) - 1.0).ln()
    }
}

pub fn tortoise_radius(map: &TortoiseMap, x: f64) -> Result<f64> {
    map.radius(x)
}

fn default_neck_sq() -> f64 {
    0.5
}

/// Serializable description of a potential family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Free {},
    ReggeWheeler {
        mass: f64,
        ell: u32,
        sigma: i32,
    },
    /// V = 0 for x ≤ −1, (a²−¼)/x² for x ≥ 1, quintic bridge in between.
    InverseSquareModel {
        a: f64,
    },
    /// Surface of revolution with profile r(ξ) = sqrt(ξ²/2 + b²) in arclength ξ.
    SurfaceOfRevolution {
        ell: u32,
        #[serde(default = "default_neck_sq")]
        neck_sq: f64,
    },
    /// V = strength/⟨x⟩².
    InverseSquareBarrier {
        strength: f64,
    },
    Tabulated {
        x: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct Table {
    x: Vec<f64>,
    v: Vec<f64>,
    slope: Vec<f64>,
    left: Extrapolation,
    right: Extrapolation,
}

/// v_end·(ρ(x)/ρ_end)^{−p} beyond the table.
#[derive(Debug, Clone, Copy)]
struct Extrapolation {
    p: f64,
    /// `true`: ρ = |x|; `false`: ρ = 1 + |x − x_end|.
    radial: bool,
}

#[derive(Debug, Clone)]
enum Kernel {
    Free,
    ReggeWheeler { map: TortoiseMap, l2: f64, sigma: f64 },
    Bridge { c: f64, coeffs: [f64; 3] },
    Surface { l2: f64, b2: f64 },
    Barrier { strength: f64 },
    Table(Table),
}

/// An immutable potential with classified tails.
#[derive(Debug, Clone)]
pub struct PotentialModel {
    spec: ModelSpec,
    scale: f64,
    kernel: Kernel,
    tails: std::result::Result<(TailClass, TailClass), String>,
}

impl PotentialModel {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let (kernel, tails) = match &spec {
            ModelSpec::Free {} => (
                Kernel::Free,
                Ok((TailClass::zero(Some(0.0)), TailClass::zero(Some(0.0)))),
            ),
            ModelSpec::ReggeWheeler { mass, ell, sigma } => {
                if ![1, 0, -3].contains(sigma) {
                    return Err(Error::InvalidModel(format!("sigma must be 1, 0 or -3, got {sigma}")));
                }
                let map = TortoiseMap::new(*mass)?;
                let l2 = (*ell as f64) * (*ell as f64 + 1.0);
                let tails = if *ell == 0 && *sigma == 0 {
                    (TailClass::zero(Some(0.0)), TailClass::zero(Some(0.0)))
                } else {
                    let left = TailClass {
                        kind: TailKind::Exponential,
                        coefficient: 1.0 / (2.0 * mass),
                        exact_beyond: None,
                    };
                    let right = if *ell > 0 {
                        TailClass::inverse_square(*ell as f64 + 0.5, None)
                    } else {
                        TailClass {
                            kind: TailKind::InverseCube,
                            coefficient: 2.0 * mass * *sigma as f64,
                            exact_beyond: None,
                        }
                    };
                    (left, right)
                };
                (Kernel::ReggeWheeler { map, l2, sigma: *sigma as f64 }, Ok(tails))
            }
            ModelSpec::InverseSquareModel { a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidModel(format!("a must be positive, got {a}")));
                }
                let c = a * a - 0.25;
                (
                    Kernel::Bridge { c, coeffs: [38.0 * c, -67.0 * c, 30.0 * c] },
                    Ok((TailClass::zero(Some(-1.0)), TailClass::inverse_square(*a, Some(1.0)))),
                )
            }
            ModelSpec::SurfaceOfRevolution { ell, neck_sq } => {
                if !(*neck_sq > 0.0 && neck_sq.is_finite()) {
                    return Err(Error::InvalidModel(format!("neck_sq must be positive, got {neck_sq}")));
                }
                let nu = std::f64::consts::SQRT_2 * *ell as f64;
                let t = TailClass::inverse_square(nu, None);
                (Kernel::Surface { l2: (*ell as f64).powi(2), b2: *neck_sq }, Ok((t, t)))
            }
            ModelSpec::InverseSquareBarrier { strength } => {
                if !(*strength >= -0.25 && strength.is_finite()) {
                    return Err(Error::InvalidModel(format!("strength must be >= -1/4, got {strength}")));
                }
                let t = TailClass::inverse_square((strength + 0.25).sqrt(), None);
                (Kernel::Barrier { strength: *strength }, Ok((t, t)))
            }
            ModelSpec::Tabulated { x, v } => {
                let table = Table::new(x, v)?;
                let tails = match (classify_table_side(x, v, Side::Minus), classify_table_side(x, v, Side::Plus)) {
                    (Ok(l), Ok(r)) => Ok((l, r)),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                };
                (Kernel::Table(table), tails)
            }
        };
        Ok(Self { spec, scale: 1.0, kernel, tails })
    }

    pub fn free() -> Self {
        Self::new(ModelSpec::Free {}).expect("free model is valid")
    }

    pub fn regge_wheeler(mass: f64, ell: u32, sigma: i32) -> Result<Self> {
        Self::new(ModelSpec::ReggeWheeler { mass, ell, sigma })
    }

    pub fn inverse_square_model(a: f64) -> Result<Self> {
        Self::new(ModelSpec::InverseSquareModel { a })
    }

    pub fn surface_of_revolution(ell: u32) -> Result<Self> {
        Self::new(ModelSpec::SurfaceOfRevolution { ell, neck_sq: default_neck_sq() })
    }

    pub fn inverse_square_barrier(strength: f64) -> Result<Self> {
        Self::new(ModelSpec::InverseSquareBarrier { strength })
    }

    pub fn tabulated(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(ModelSpec::Tabulated { x, v })
    }

    /// The same model multiplied by `factor` (e.g. V/ħ²).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidModel(format!("scale must be positive, got {factor}")));
        }
        let mut out = self.clone();
        out.scale *= factor;
        Ok(out)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn family(&self) -> Family {
        match self.spec {
            ModelSpec::Free {} => Family::Free,
            ModelSpec::ReggeWheeler { .. } => Family::ReggeWheeler,
            ModelSpec::InverseSquareModel { .. } => Family::InverseSquareModel,
            ModelSpec::SurfaceOfRevolution { .. } => Family::SurfaceOfRevolution,
            ModelSpec::InverseSquareBarrier { .. } => Family::InverseSquareBarrier,
            ModelSpec::Tabulated { .. } => Family::Tabulated,
        }
    }

    /// Coefficients (A, B, C) of the bridge c·t³(A + Bt + Ct²)/c, t = (x+1)/2,
    /// for the inverse-square model.
    pub fn bridge_coefficients(&self) -> Option<[f64; 3]> {
        match self.kernel {
            Kernel::Bridge { coeffs, .. } => Some(coeffs.map(|k| k * self.scale)),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let v = match &self.kernel {
            Kernel::Free => 0.0,
            Kernel::ReggeWheeler { map, l2, sigma } => {
                // the bracketed solve always lands on the root to rounding
                let s = map.excess(x).unwrap_or_else(|_| map.solve_u(x / (2.0 * map.mass) - 1.0).0.exp());
                let r = 2.0 * map.mass * (1.0 + s);
                s / (1.0 + s) * (l2 / (r * r) + 2.0 * map.mass * sigma / (r * r * r))
            }
            Kernel::Bridge { c, coeffs } => {
                if x <= -1.0 {
                    0.0
                } else if x >= 1.0 {
                    c / (x * x)
                } else {
                    let t = 0.5 * (x + 1.0);
                    t * t * t * (coeffs[0] + t * (coeffs[1] + t * coeffs[2]))
                }
            }
            Kernel::Surface { l2, b2 } => {
                let r2 = 0.5 * x * x + b2;
                let r = r2.sqrt();
                let dr = 0.5 * x / r;
                let ddr = 0.5 / r - 0.25 * x * x / (r2 * r);
                l2 / r2 + ddr / (2.0 * r) - dr * dr / (4.0 * r2)
            }
            Kernel::Barrier { strength } => strength / (1.0 + x * x),
            Kernel::Table(t) => t.eval(x),
        };
        v * self.scale
    }

    pub fn tails(&self) -> Result<(TailClass, TailClass)> {
        match &self.tails {
            Ok((l, r)) => Ok((l.scaled(self.scale), r.scaled(self.scale))),
            Err(e) => Err(Error::ClassificationUnavailable(e.clone())),
        }
    }

    pub fn tail(&self, side: Side) -> Result<TailClass> {
        let (l, r) = self.tails()?;
        Ok(match side {
            Side::Minus => l,
            Side::Plus => r,
        })
    }
}

pub fn evaluate_potential(model: &PotentialModel, x: f64) -> f64 {
    model.evaluate(x)
}

pub fn classify_tails(model: &PotentialModel) -> Result<(TailClass, TailClass)> {
    model.tails()
}

impl Table {
    fn new(x: &[f64], v: &[f64]) -> Result<Self> {
        if x.len() != v.len() || x.len() < 4 {
            return Err(Error::InvalidModel("tabulated model needs >= 4 (x, v) pairs of equal length".into()));
        }
        if x.iter().chain(v).any(|a| !a.is_finite()) {
            return Err(Error::InvalidModel("tabulated values must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel("tabulated grid must be strictly increasing".into()));
        }
        let n = x.len();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let d0 = (v[i] - v[i - 1]) / h0;
            let d1 = (v[i + 1] - v[i]) / h1;
            slope[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
        }
        let left = Extrapolation::fit(x[1], v[1], x[0], v[0], x[0] <= -1.0);
        let right = Extrapolation::fit(x[n - 2], v[n - 2], x[n - 1], v[n - 1], x[n - 1] >= 1.0);
        slope[0] = left.end_slope(x[0], v[0], -1.0);
        slope[n - 1] = right.end_slope(x[n - 1], v[n - 1], 1.0);
        Ok(Self { x: x.to_vec(), v: v.to_vec(), slope, left, right })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.left.eval(self.x[0], self.v[0], x);
        }
        if x >= self.x[n - 1] {
            return self.right.eval(self.x[n - 1], self.v[n - 1], x);
        }
        let i = self.x.partition_point(|&xi| xi <= x) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[i] + h10 * h * self.slope[i] + h01 * self.v[i + 1] + h11 * h * self.slope[i + 1]
    }
}

impl Extrapolation {
    /// Power law through the last two samples, exponent clamped to [2, 8].
    fn fit(x_in: f64, v_in: f64, x_end: f64, v_end: f64, radial: bool) -> Self {
        let p = if radial && v_in * v_end > 0.0 {
            ((v_in / v_end).ln() / (x_end.abs() / x_in.abs()).ln()).clamp(2.0, 8.0)
        } else {
            2.0
        };
        Self { p, radial }
    }

    fn rho(&self, x_end: f64, x: f64) -> (f64, f64) {
        if self.radial {
            (x.abs(), x_end.abs())
        } else {
            (1.0 + (x - x_end).abs(), 1.0)
        }
    }

    fn eval(&self, x_end: f64, v_end: f64, x: f64) -> f64 {
        let (rho, rho_end) = self.rho(x_end, x);
        v_end * (rho / rho_end).powf(-self.p)
    }

    /// dV/dx at the table end; `outward` is the sign of the outward direction.
    fn end_slope(&self, x_end: f64, v_end: f64, outward: f64) -> f64 {
        let (_, rho_end) = self.rho(x_end, x_end);
        -self.p * v_end / rho_end * outward
    }
}

/// Classifies one end of a tabulated potential from its far-field samples.
fn classify_table_side(x: &[f64], v: &[f64], side: Side) -> std::result::Result<TailClass, String> {
    let s = side.sign();
    let reach = x.iter().map(|xi| s * xi).fold(f64::NEG_INFINITY, f64::max);
    let far: Vec<(f64, f64)> = x
        .iter()
        .zip(v)
        .filter(|(xi, _)| s * **xi >= 0.5 * reach && s * **xi >= 1.0)
        .map(|(xi, vi)| (s * xi, *vi))
        .collect();
    if far.len() < 6 {
        return Err(format!(
            "{side:?} end has {} far-field samples with |x| >= 1 in the outer half of the table; need 6",
            far.len()
        ));
    }
    let edge = far.iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|p| s * p.0);
    let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if far.iter().all(|(_, vi)| vi.abs() <= 1e-14 * vmax.max(f64::MIN_POSITIVE)) {
        return Ok(TailClass::zero(edge));
    }
    let sign = far[0].1.signum();
    if far.iter().any(|(_, vi)| vi.signum() != sign || *vi == 0.0) {
        return Err(format!("{side:?} far field changes sign"));
    }
    let logs: Vec<(f64, f64, f64)> = far.iter().map(|(r, vi)| (*r, r.ln(), vi.abs().ln())).collect();
    let (p_pow, res_pow) = line_fit(logs.iter().map(|(_, lr, lv)| (*lr, *lv)));
    let (k_exp, res_exp) = line_fit(logs.iter().map(|(r, _, lv)| (*r, *lv)));
    if res_exp < res_pow && k_exp < 0.0 {
        return Ok(TailClass { kind: TailKind::Exponential, coefficient: -k_exp, exact_beyond: None });
    }
    let n = far.len() as f64;
    if (p_pow + 2.0).abs() < 0.25 {
        let c = far.iter().map(|(r, vi)| vi * r * r).sum::<f64>() / n;
        if c < -0.25 {
            return Err(format!("{side:?} inverse-square coefficient {c} below -1/4"));
        }
        return Ok(TailClass::inverse_square((c + 0.25).sqrt(), None));
    }
    if (p_pow + 3.0).abs() < 0.25 {
        let c = far.iter().map(|(r, vi)| vi * r * r * r).sum::<f64>() / n;
        return Ok(TailClass { kind: TailKind::InverseCube, coefficient: c, exact_beyond: None });
    }
    Err(format!("{side:?} far-field exponent {:.3} matches no supported class", -p_pow))
}

/// Least-squares slope and residual RMS of y on x.
fn line_fit(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let res = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, res)
}
