//! Dielectric response at imaginary frequencies.
//!
//! Every mirror model reduces to a real, positive dielectric function
//! ε(iξ) ≥ 1 evaluated along the imaginary frequency axis ω = iξ. On that
//! axis the response of any causal, passive medium is smooth and monotone,
//! which is what makes the scattering integrals numerically benign.
//!
//! Besides the analytic models (plasma, Drude, single oscillator) the module
//! ingests tabulated absorption data ε''(ω) measured on the real axis and
//! carries it to the imaginary axis through the standard causality integral
//!
//! ```text
//! ε(iξ) = 1 + (2/π) ∫ dω ω ε''(ω) / (ω² + ξ²)
//! ```

use crate::constants::{omega_from_ev, omega_from_wavelength};
use crate::quad::{self, QuadTarget};
use std::path::Path;
use thiserror::Error;

/// Angular frequency along the imaginary axis, rad/s. Non-negative and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ImaginaryFrequency(f64);

impl ImaginaryFrequency {
    pub fn new(xi: f64) -> Result<Self, MaterialError> {
        if xi.is_finite() && xi >= 0.0 {
            Ok(Self(xi))
        } else {
            Err(MaterialError::InvalidFrequency { xi })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("imaginary frequency must be finite and >= 0, got {xi}")]
    InvalidFrequency { xi: f64 },
    #[error("dielectric model diverges at xi = 0; use the analytic zero-frequency limit of the reflection amplitudes instead")]
    ZeroFrequency,
    #[error("invalid model parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("optical data: {0}")]
    OpticalData(String),
    #[error("optical data line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error reading optical data: {0}")]
    Io(#[from] std::io::Error),
    #[error("causality transform failed: {0}")]
    Transform(#[from] quad::QuadError),
}

/// Plasma-model permittivity 1 + ω_P²/ξ².
pub fn eps_plasma(xi: ImaginaryFrequency, omega_p: f64) -> Result<f64, MaterialError> {
    if omega_p <= 0.0 || !omega_p.is_finite() {
        return Err(MaterialError::InvalidParameter {
            name: "omega_p",
            value: omega_p,
        });
    }
    let x = xi.value();
    if x == 0.0 {
        return Err(MaterialError::ZeroFrequency);
    }
    Ok(1.0 + (omega_p / x) * (omega_p / x))
}

/// Drude-model permittivity 1 + ω_P²/(ξ(ξ+γ)); γ = 0 recovers the plasma model.
pub fn eps_drude(xi: ImaginaryFrequency, omega_p: f64, gamma: f64) -> Result<f64, MaterialError> {
    if omega_p <= 0.0 || !omega_p.is_finite() {
        return Err(MaterialError::InvalidParameter {
            name: "omega_p",
            value: omega_p,
        });
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(MaterialError::InvalidParameter {
            name: "gamma",
            value: gamma,
        });
    }
    let x = xi.value();
    if x == 0.0 {
        return Err(MaterialError::ZeroFrequency);
    }
    Ok(1.0 + omega_p * omega_p / (x * (x + gamma)))
}

/// Single-oscillator permittivity 1 + (ε₀−1)ω₀²/(ω₀²+ξ²).
///
/// Finite at ξ = 0, transparent above ω₀; the default silicon-like mirror.
pub fn eps_oscillator(
    xi: ImaginaryFrequency,
    eps_static: f64,
    omega_0: f64,
) -> Result<f64, MaterialError> {
    if eps_static < 1.0 || !eps_static.is_finite() {
        return Err(MaterialError::InvalidParameter {
            name: "eps_static",
            value: eps_static,
        });
    }
    if omega_0 <= 0.0 || !omega_0.is_finite() {
        return Err(MaterialError::InvalidParameter {
            name: "omega_0",
            value: omega_0,
        });
    }
    let x = xi.value();
    Ok(1.0 + (eps_static - 1.0) * omega_0 * omega_0 / (omega_0 * omega_0 + x * x))
}

/// One column layout of an optical data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrequencyColumn {
    OmegaEv,
    LambdaUm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AbsorptionColumns {
    /// refractive index pair (n, k); ε'' = 2nk
    Nk,
    /// ε'' directly
    Eps2,
}

/// Tabulated absorptive response on the real frequency axis.
///
/// Rows are strictly increasing in ω (rad/s) with ε''(ω) ≥ 0.
#[derive(Debug, Clone)]
pub struct OpticalDataTable {
    omega: Vec<f64>,
    eps2: Vec<f64>,
    pub provenance: String,
}

impl OpticalDataTable {
    /// Build a table from parallel arrays of ω (rad/s) and ε''(ω).
    pub fn new(
        omega: Vec<f64>,
        eps2: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self, MaterialError> {
        if omega.len() != eps2.len() {
            return Err(MaterialError::OpticalData(
                "frequency and absorption arrays differ in length".into(),
            ));
        }
        if omega.len() < 2 {
            return Err(MaterialError::OpticalData(
                "at least 2 rows are required".into(),
            ));
        }
        for (i, w) in omega.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(MaterialError::OpticalData(format!(
                    "row {i}: frequency must be finite and positive, got {w}"
                )));
            }
            if i > 0 && omega[i] <= omega[i - 1] {
                return Err(MaterialError::OpticalData(format!(
                    "row {i}: frequencies must be strictly increasing"
                )));
            }
        }
        for (i, e) in eps2.iter().enumerate() {
            if !e.is_finite() || *e < 0.0 {
                return Err(MaterialError::OpticalData(format!(
                    "row {i}: eps'' must be finite and >= 0, got {e}"
                )));
            }
        }
        Ok(Self {
            omega,
            eps2,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn eps2(&self) -> &[f64] {
        &self.eps2
    }

    /// ε'' inside the tabulated support: log-log interpolation (exact for
    /// power-law data, the generic shape of absorption spectra over wide
    /// frequency ranges), falling back to linear where a sample is zero.
    fn eps2_at(&self, w: f64) -> f64 {
        let omega = &self.omega;
        match omega.binary_search_by(|x| x.partial_cmp(&w).unwrap()) {
            Ok(i) => self.eps2[i],
            Err(0) => self.eps2[0],
            Err(i) if i >= omega.len() => *self.eps2.last().unwrap(),
            Err(i) => {
                let (w0, w1) = (omega[i - 1], omega[i]);
                let (e0, e1) = (self.eps2[i - 1], self.eps2[i]);
                if e0 > 0.0 && e1 > 0.0 {
                    let t = (w / w0).ln() / (w1 / w0).ln();
                    (e0.ln() * (1.0 - t) + e1.ln() * t).exp()
                } else {
                    let t = (w - w0) / (w1 - w0);
                    e0 * (1.0 - t) + e1 * t
                }
            }
        }
    }

    /// Parameters of the low-frequency Drude tail ε'' = c / (ω(ω²+γ²))
    /// fitted to the two lowest rows. Falls back to a pure 1/ω tail when the
    /// two-point fit has no positive solution for γ².
    fn low_tail(&self) -> (f64, f64) {
        let (w1, e1) = (self.omega[0], self.eps2[0]);
        let (w2, e2) = (self.omega[1], self.eps2[1]);
        if e1 <= 0.0 || e2 <= 0.0 {
            return (0.0, 0.0);
        }
        let denom = e1 * w1 - e2 * w2;
        if denom.abs() > 0.0 {
            let gamma2 = (e2 * w2 * w2 * w2 - e1 * w1 * w1 * w1) / denom;
            if gamma2.is_finite() && gamma2 > 0.0 {
                let c = e1 * w1 * (w1 * w1 + gamma2);
                return (c, gamma2);
            }
        }
        // 1/omega tail through the lowest point
        (e1 * w1, 0.0)
    }

    /// Coefficient of the high-frequency ε'' = d/ω³ tail through the last row.
    fn high_tail(&self) -> f64 {
        let n = self.omega.len() - 1;
        self.eps2[n] * self.omega[n].powi(3)
    }
}

/// (1 - atan(u)/u)/u², stable for small u.
fn one_minus_atan_over_u_over_u2(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        // series of (1 - atan(u)/u)/u^2
        let u2 = u * u;
        1.0 / 3.0 - u2 / 5.0 + u2 * u2 / 7.0
    } else {
        (1.0 - u.atan() / u) / (u * u)
    }
}

/// Causality transform of tabulated absorption data to the imaginary axis.
///
/// The integral over the tabulated support is evaluated with the adaptive
/// engine segment by segment; the declared low- and high-frequency
/// extrapolation tails are added on top (the high tail in closed form).
pub fn kk_transform(
    table: &OpticalDataTable,
    xi: ImaginaryFrequency,
    target: QuadTarget,
) -> Result<f64, MaterialError> {
    let x = xi.value();
    if x == 0.0 {
        return Err(MaterialError::ZeroFrequency);
    }
    let two_over_pi = std::f64::consts::FRAC_2_PI;

    // tabulated support, integrated per segment so interpolation kinks never
    // straddle a panel
    let mut core = 0.0;
    let mut evals = 0usize;
    let seg_target = QuadTarget::new(target.rel_tol, 0.0, target.max_evals);
    for seg in table.omega.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let r = quad::integrate(
            |w| w * table.eps2_at(w) / (w * w + x * x),
            a,
            b,
            seg_target,
        )?;
        core += r.value;
        evals += r.evals;
        if evals > target.max_evals {
            return Err(MaterialError::Transform(quad::QuadError::NonConvergence {
                estimate: core,
                error: f64::NAN,
                evals,
            }));
        }
    }

    // low-frequency Drude tail: integrand c / ((w^2+gamma^2)(w^2+xi^2))
    let (c_low, gamma2) = table.low_tail();
    let low = if c_low > 0.0 {
        let w1 = table.omega[0];
        quad::integrate(
            |w| c_low / ((w * w + gamma2) * (w * w + x * x)),
            0.0,
            w1,
            seg_target,
        )?
        .value
    } else {
        0.0
    };

    // high-frequency d/w^3 tail in closed form:
    // ∫_W^∞ d/(w^2 (w^2+xi^2)) dw = (d/W^3) * (1 - atan(u)/u)/u^2, u = xi/W
    let d_high = table.high_tail();
    let wn = *table.omega.last().unwrap();
    let high = d_high / (wn * wn * wn) * one_minus_atan_over_u_over_u2(x / wn);

    Ok(1.0 + two_over_pi * (core + low + high))
}

/// A dielectric function ε(iξ), the material half of a mirror description.
#[derive(Debug, Clone)]
pub enum DielectricModel {
    /// ε ≡ 1
    Vacuum,
    /// lossless conduction electrons, ε = 1 + ω_P²/ξ²
    Plasma { omega_p: f64 },
    /// conduction electrons with relaxation, ε = 1 + ω_P²/(ξ(ξ+γ))
    Drude { omega_p: f64, gamma: f64 },
    /// bound-charge resonance, ε = 1 + (ε₀−1)ω₀²/(ω₀²+ξ²)
    Oscillator { eps_static: f64, omega_0: f64 },
    /// ε(iξ) sampled on a strictly increasing ξ grid
    Tabulated(TabulatedEps),
}

impl DielectricModel {
    /// Plasma model specified by its plasma wavelength λ_P = 2πc/ω_P.
    pub fn plasma_from_wavelength(lambda_p: f64) -> Self {
        DielectricModel::Plasma {
            omega_p: omega_from_wavelength(lambda_p),
        }
    }

    /// Silicon-like single oscillator specified by the cutoff wavelength
    /// λ₀ = 2πc/ω₀ and the static permittivity.
    pub fn oscillator_from_wavelength(eps_static: f64, lambda_0: f64) -> Self {
        DielectricModel::Oscillator {
            eps_static,
            omega_0: omega_from_wavelength(lambda_0),
        }
    }

    /// Evaluate ε(iξ).
    pub fn eps(&self, xi: ImaginaryFrequency) -> Result<f64, MaterialError> {
        match self {
            DielectricModel::Vacuum => Ok(1.0),
            DielectricModel::Plasma { omega_p } => eps_plasma(xi, *omega_p),
            DielectricModel::Drude { omega_p, gamma } => eps_drude(xi, *omega_p, *gamma),
            DielectricModel::Oscillator {
                eps_static,
                omega_0,
            } => eps_oscillator(xi, *eps_static, *omega_0),
            DielectricModel::Tabulated(t) => t.eps(xi),
        }
    }

    /// Short text form used in output headers and cache keys.
    pub fn describe(&self) -> String {
        match self {
            DielectricModel::Vacuum => "vacuum".into(),
            DielectricModel::Plasma { omega_p } => format!("plasma(omega_p={omega_p:.9e})"),
            DielectricModel::Drude { omega_p, gamma } => {
                format!("drude(omega_p={omega_p:.9e},gamma={gamma:.9e})")
            }
            DielectricModel::Oscillator {
                eps_static,
                omega_0,
            } => format!("oscillator(eps0={eps_static:.9e},omega_0={omega_0:.9e})"),
            DielectricModel::Tabulated(t) => {
                format!("tabulated(n={},provenance={})", t.xi.len(), t.provenance)
            }
        }
    }
}

/// ε(iξ) on a log grid, with power-law extrapolation outside it.
///
/// Inside the grid, ln(ε−1) is interpolated linearly in ln ξ. Above the
/// grid the last point continues as a plasma-like (ξ_N/ξ)² decay so that
/// ε → 1 at high frequency; below it the first segment's log-log slope is
/// continued when it is negative, otherwise the boundary value is held.
#[derive(Debug, Clone)]
pub struct TabulatedEps {
    xi: Vec<f64>,
    ln_xi: Vec<f64>,
    ln_em1: Vec<f64>,
    low_slope: f64,
    pub provenance: String,
}

impl TabulatedEps {
    pub fn new(
        xi: Vec<f64>,
        eps: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self, MaterialError> {
        if xi.len() != eps.len() || xi.len() < 2 {
            return Err(MaterialError::OpticalData(
                "tabulated eps needs >= 2 matched (xi, eps) rows".into(),
            ));
        }
        for (i, x) in xi.iter().enumerate() {
            if !x.is_finite() || *x <= 0.0 || (i > 0 && xi[i] <= xi[i - 1]) {
                return Err(MaterialError::OpticalData(format!(
                    "row {i}: xi grid must be finite, positive, strictly increasing"
                )));
            }
            if !eps[i].is_finite() || eps[i] < 1.0 {
                return Err(MaterialError::OpticalData(format!(
                    "row {i}: eps(i xi) must be finite and >= 1, got {}",
                    eps[i]
                )));
            }
        }
        let ln_xi: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
        // a grid point with eps exactly 1 pins ln(eps-1) at -inf; clamp far
        // below any physical response instead
        let ln_em1: Vec<f64> = eps.iter().map(|e| (e - 1.0).max(1e-300).ln()).collect();
        let low_slope = {
            let s = (ln_em1[1] - ln_em1[0]) / (ln_xi[1] - ln_xi[0]);
            if s < 0.0 {
                s
            } else {
                0.0
            }
        };
        Ok(Self {
            xi,
            ln_xi,
            ln_em1,
            low_slope,
            provenance: provenance.into(),
        })
    }

    /// Sample a causality transform of `table` on `n` log-spaced points
    /// covering [xi_min, xi_max].
    pub fn from_kk_transform(
        table: &OpticalDataTable,
        xi_min: f64,
        xi_max: f64,
        n: usize,
        target: QuadTarget,
    ) -> Result<Self, MaterialError> {
        if !(xi_min > 0.0 && xi_max > xi_min && n >= 2) {
            return Err(MaterialError::OpticalData(
                "invalid sampling grid for the causality transform".into(),
            ));
        }
        let mut xi = Vec::with_capacity(n);
        let mut eps = Vec::with_capacity(n);
        let ratio = (xi_max / xi_min).ln() / (n - 1) as f64;
        for i in 0..n {
            let x = xi_min * ((i as f64) * ratio).exp();
            let e = kk_transform(table, ImaginaryFrequency::new(x)?, target)?;
            xi.push(x);
            eps.push(e.max(1.0));
        }
        Self::new(xi, eps, table.provenance.clone())
    }

    fn eps(&self, xi: ImaginaryFrequency) -> Result<f64, MaterialError> {
        let x = xi.value();
        if x == 0.0 {
            return Err(MaterialError::ZeroFrequency);
        }
        let n = self.xi.len();
        let lx = x.ln();
        let em1 = if x <= self.xi[0] {
            (self.ln_em1[0] + self.low_slope * (lx - self.ln_xi[0])).exp()
        } else if x >= self.xi[n - 1] {
            // plasma-like decay keeps eps -> 1 as xi -> infinity
            let r = self.xi[n - 1] / x;
            self.ln_em1[n - 1].exp() * r * r
        } else {
            let i = match self
                .ln_xi
                .binary_search_by(|v| v.partial_cmp(&lx).unwrap())
            {
                Ok(i) => return Ok(1.0 + self.ln_em1[i].exp()),
                Err(i) => i,
            };
            let t = (lx - self.ln_xi[i - 1]) / (self.ln_xi[i] - self.ln_xi[i - 1]);
            (self.ln_em1[i - 1] * (1.0 - t) + self.ln_em1[i] * t).exp()
        };
        Ok(1.0 + em1)
    }
}

/// Parse an optical data file.
///
/// Format: `#` starts a comment; the first non-comment line is a header
/// naming the columns, whitespace- or comma-separated, chosen from
/// `omega_eV`, `lambda_um`, `n`, `k`, `eps2`. Exactly one frequency-like
/// column and either `eps2` or the pair `n k` must be present. Data rows
/// follow in the same column order. Rows must be strictly monotone in the
/// frequency column (wavelength files run in increasing wavelength, i.e.
/// decreasing frequency, and are reversed on ingestion).
pub fn load_optical_data(path: &Path) -> Result<OpticalDataTable, MaterialError> {
    let text = std::fs::read_to_string(path)?;
    parse_optical_data(&text, &path.display().to_string())
}

pub fn parse_optical_data(
    text: &str,
    provenance: &str,
) -> Result<OpticalDataTable, MaterialError> {
    let mut freq_col: Option<(usize, FrequencyColumn)> = None;
    let mut abs_cols: Option<(usize, Option<usize>, AbsorptionColumns)> = None;
    let mut header_seen = false;
    let mut rows: Vec<(usize, f64, f64)> = Vec::new(); // (line, omega, eps2)

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if !header_seen {
            header_seen = true;
            let mut n_col = None;
            let mut k_col = None;
            for (i, f) in fields.iter().enumerate() {
                match *f {
                    "omega_eV" => freq_col = Some((i, FrequencyColumn::OmegaEv)),
                    "lambda_um" => freq_col = Some((i, FrequencyColumn::LambdaUm)),
                    "n" => n_col = Some(i),
                    "k" => k_col = Some(i),
                    "eps2" => abs_cols = Some((i, None, AbsorptionColumns::Eps2)),
                    other => {
                        return Err(MaterialError::Parse {
                            line: lineno,
                            message: format!("unknown column name '{other}'"),
                        })
                    }
                }
            }
            if abs_cols.is_none() {
                match (n_col, k_col) {
                    (Some(ni), Some(ki)) => abs_cols = Some((ni, Some(ki), AbsorptionColumns::Nk)),
                    _ => {
                        return Err(MaterialError::Parse {
                            line: lineno,
                            message: "header must declare eps2 or both n and k".into(),
                        })
                    }
                }
            }
            if freq_col.is_none() {
                return Err(MaterialError::Parse {
                    line: lineno,
                    message: "header must declare omega_eV or lambda_um".into(),
                });
            }
            continue;
        }

        let (fi, fkind) = freq_col.unwrap();
        let (ai, ki, akind) = abs_cols.unwrap();
        let need = 1 + if ki.is_some() { 2 } else { 1 };
        if fields.len() < need {
            return Err(MaterialError::Parse {
                line: lineno,
                message: format!("expected {need} numeric columns, found {}", fields.len()),
            });
        }
        let parse = |i: usize| -> Result<f64, MaterialError> {
            fields
                .get(i)
                .ok_or_else(|| MaterialError::Parse {
                    line: lineno,
                    message: format!("missing column {i}"),
                })?
                .parse::<f64>()
                .map_err(|_| MaterialError::Parse {
                    line: lineno,
                    message: format!("'{}' is not a number", fields[i]),
                })
        };
        let fraw = parse(fi)?;
        if fraw <= 0.0 || !fraw.is_finite() {
            return Err(MaterialError::Parse {
                line: lineno,
                message: format!("frequency column must be positive, got {fraw}"),
            });
        }
        let omega = match fkind {
            FrequencyColumn::OmegaEv => omega_from_ev(fraw),
            FrequencyColumn::LambdaUm => omega_from_wavelength(fraw * 1e-6),
        };
        let eps2 = match akind {
            AbsorptionColumns::Eps2 => parse(ai)?,
            AbsorptionColumns::Nk => {
                let n = parse(ai)?;
                let k = parse(ki.unwrap())?;
                2.0 * n * k
            }
        };
        if eps2 < 0.0 || !eps2.is_finite() {
            return Err(MaterialError::Parse {
                line: lineno,
                message: format!("eps'' must be >= 0, got {eps2}"),
            });
        }
        rows.push((lineno, omega, eps2));
    }

    if rows.len() < 2 {
        return Err(MaterialError::OpticalData(format!(
            "{provenance}: at least 2 data rows are required"
        )));
    }

    // establish direction from the first pair, then enforce strict
    // monotonicity, reporting the offending line
    let increasing = rows[1].1 > rows[0].1;
    for w in rows.windows(2) {
        let ((_, w0, _), (l1, w1, _)) = (w[0], w[1]);
        let ok = if increasing { w1 > w0 } else { w1 < w0 };
        if !ok {
            return Err(MaterialError::Parse {
                line: l1,
                message: "frequency column is not strictly monotone".into(),
            });
        }
    }
    if !increasing {
        rows.reverse();
    }
    let omega: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let eps2: Vec<f64> = rows.iter().map(|r| r.2).collect();
    OpticalDataTable::new(omega, eps2, provenance)
}

/// A synthetic Drude absorption table, used as the reference data set for
/// exercising the tabulated-data path end to end.
pub fn synthetic_drude_table(
    omega_p: f64,
    gamma: f64,
    omega_min: f64,
    omega_max: f64,
    n: usize,
) -> OpticalDataTable {
    let ratio = (omega_max / omega_min).ln() / (n - 1) as f64;
    let mut omega = Vec::with_capacity(n);
    let mut eps2 = Vec::with_capacity(n);
    for i in 0..n {
        let w = omega_min * ((i as f64) * ratio).exp();
        omega.push(w);
        eps2.push(omega_p * omega_p * gamma / (w * (w * w + gamma * gamma)));
    }
    OpticalDataTable::new(omega, eps2, "synthetic-drude").unwrap()
}
