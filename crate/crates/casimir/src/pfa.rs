//! Proximity-force averaging over deformed surfaces.
//!
//! The proximity-force approximation treats a gently deformed cavity as a
//! distribution of local plane-plane separations ℓ(r) = L − h₁(r) − h₂(r)
//! and averages the plane-plane energy over it. The module provides the
//! exact average, its second-order expansion in the profiles, surface
//! spectra normalised so that
//!
//! ```text
//! ∫ d²r/A h_i h_j = ∫ d²k/(2π)² h_i[k] h_j[−k]
//! ```
//!
//! holds on the grid (Parseval), and the plane-sphere mapping
//! F_PS = 2πR · E_PP/A valid for L ≪ R.

use crate::quad::{self, QuadTarget};
use rustfft::{num_complex::Complex64, FftPlanner};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PfaError {
    #[error("surfaces touch: local separation {ell:e} m at sample {index}")]
    Contact { ell: f64, index: usize },
    #[error("profile grids are incompatible: {0}")]
    GridMismatch(String),
    #[error("profile grid is invalid: {0}")]
    BadGrid(String),
    #[error("plane-sphere mapping needs L < R, got L/R = {aspect}")]
    NotASphereGap { aspect: f64 },
    #[error("profile file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error reading profile: {0}")]
    Io(#[from] std::io::Error),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] quad::QuadError),
}

/// Height samples on a uniform rectangular grid with periodic continuation.
#[derive(Debug, Clone)]
pub struct ProfileGrid {
    pub nx: usize,
    pub ny: usize,
    /// sample spacing, m
    pub dx: f64,
    pub dy: f64,
    /// row-major heights, m, zero mean
    heights: Vec<f64>,
}

impl ProfileGrid {
    /// Build a grid profile; the mean height is subtracted so the stored
    /// profile always has zero spatial average.
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, mut heights: Vec<f64>) -> Result<Self, PfaError> {
        if nx < 1 || ny < 1 || heights.len() != nx * ny {
            return Err(PfaError::BadGrid(format!(
                "{nx} x {ny} grid with {} samples",
                heights.len()
            )));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(PfaError::BadGrid("sample spacing must be positive".into()));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(PfaError::BadGrid("non-finite height sample".into()));
        }
        let mean = heights.iter().sum::<f64>() / heights.len() as f64;
        for h in &mut heights {
            *h -= mean;
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            heights,
        })
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn area(&self) -> f64 {
        self.nx as f64 * self.dx * self.ny as f64 * self.dy
    }

    fn at(&self, ix: usize, iy: usize) -> f64 {
        self.heights[iy * self.nx + ix]
    }
}

/// A mirror surface profile with zero spatial average.
#[derive(Debug, Clone)]
pub enum SurfaceProfile {
    Flat,
    /// h(x, y) = amplitude · cos(2πx/wavelength − phase), uniaxial along x
    Cosine {
        amplitude: f64,
        wavelength: f64,
        phase: f64,
    },
    Grid(ProfileGrid),
}

impl SurfaceProfile {
    pub fn cosine(amplitude: f64, wavelength: f64, phase: f64) -> Self {
        assert!(amplitude >= 0.0 && wavelength > 0.0);
        SurfaceProfile::Cosine {
            amplitude,
            wavelength,
            phase,
        }
    }

    /// Root-mean-square height.
    pub fn rms(&self) -> f64 {
        match self {
            SurfaceProfile::Flat => 0.0,
            SurfaceProfile::Cosine { amplitude, .. } => amplitude / 2f64.sqrt(),
            SurfaceProfile::Grid(g) => {
                (g.heights.iter().map(|h| h * h).sum::<f64>() / g.heights.len() as f64).sqrt()
            }
        }
    }

    /// Lateral correlation scale of the profile: the wavelength for a
    /// cosine, 2π/k_rms for a grid, infinite for a flat surface. Used for
    /// the ℓ_C/L validity indicator.
    pub fn correlation_length(&self) -> f64 {
        match self {
            SurfaceProfile::Flat => f64::INFINITY,
            SurfaceProfile::Cosine { wavelength, .. } => *wavelength,
            SurfaceProfile::Grid(g) => {
                let spec = spectrum_of_grid(g);
                let mut num = 0.0;
                let mut den = 0.0;
                for line in &spec.lines {
                    num += line.k * line.k * line.power;
                    den += line.power;
                }
                if den == 0.0 || num == 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * std::f64::consts::PI / (num / den).sqrt()
                }
            }
        }
    }
}

/// PFA result with the validity diagnostics the approximation depends on.
#[derive(Debug, Clone, Copy)]
pub struct PfaEnergy {
    /// averaged energy, J
    pub value: f64,
    /// smallest local separation encountered, m
    pub min_separation: f64,
    /// ℓ_C / L; the approximation assumes this is large
    pub validity_ratio: f64,
}

fn pair_correlation_ratio(h1: &SurfaceProfile, h2: &SurfaceProfile, l: f64) -> f64 {
    (h1.correlation_length().min(h2.correlation_length())) / l
}

/// Average of the plane-plane energy over the local separations of two
/// deformed surfaces: the proximity-force approximation.
///
/// `epp` maps a separation to the plane-plane energy of the undeformed
/// cavity. Exact for flat profiles and for energies linear in ℓ.
pub fn pfa_energy<F: Fn(f64) -> f64>(
    h1: &SurfaceProfile,
    h2: &SurfaceProfile,
    epp: F,
    l: f64,
) -> Result<PfaEnergy, PfaError> {
    use SurfaceProfile::*;
    assert!(l > 0.0);
    let validity_ratio = pair_correlation_ratio(h1, h2, l);

    // flat pairs shortcut
    if matches!((h1, h2), (Flat, Flat)) {
        return Ok(PfaEnergy {
            value: epp(l),
            min_separation: l,
            validity_ratio,
        });
    }

    // pure cosine content (possibly plus flat) averages over a single period
    if let Some((amps, phases, lambda)) = cosine_pair(h1, h2) {
        let depth = |x: f64| {
            let k = 2.0 * std::f64::consts::PI / lambda;
            l - amps[0] * (k * x - phases[0]).cos() - amps[1] * (k * x - phases[1]).cos()
        };
        let min_sep = l - amps[0] - amps[1];
        if min_sep <= 0.0 {
            return Err(PfaError::Contact {
                ell: min_sep,
                index: 0,
            });
        }
        let target = QuadTarget::new(1e-10, 0.0, 10_000_000);
        let r = quad::integrate(|x| epp(depth(x)), 0.0, lambda, target)?;
        return Ok(PfaEnergy {
            value: r.value / lambda,
            min_separation: min_sep,
            validity_ratio,
        });
    }

    // otherwise sample on a grid
    let (grid, other) = match (h1, h2) {
        (Grid(g), o) | (o, Grid(g)) => (g, o),
        _ => unreachable!("cosine/flat pairs handled above"),
    };
    let mut sum = 0.0;
    let mut min_sep = f64::INFINITY;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let x = ix as f64 * grid.dx;
            let other_h = match other {
                Flat => 0.0,
                Cosine {
                    amplitude,
                    wavelength,
                    phase,
                } => amplitude * (2.0 * std::f64::consts::PI * x / wavelength - phase).cos(),
                Grid(g2) => {
                    if g2.nx != grid.nx || g2.ny != grid.ny || g2.dx != grid.dx || g2.dy != grid.dy
                    {
                        return Err(PfaError::GridMismatch(
                            "grid profiles must share nx, ny, dx, dy".into(),
                        ));
                    }
                    g2.at(ix, iy)
                }
            };
            let ell = l - grid.at(ix, iy) - other_h;
            if ell <= 0.0 {
                return Err(PfaError::Contact {
                    ell,
                    index: iy * grid.nx + ix,
                });
            }
            min_sep = min_sep.min(ell);
            sum += epp(ell);
        }
    }
    Ok(PfaEnergy {
        value: sum / (grid.nx * grid.ny) as f64,
        min_separation: min_sep,
        validity_ratio,
    })
}

fn cosine_pair(
    h1: &SurfaceProfile,
    h2: &SurfaceProfile,
) -> Option<([f64; 2], [f64; 2], f64)> {
    use SurfaceProfile::*;
    match (h1, h2) {
        (
            Cosine {
                amplitude: a1,
                wavelength: l1,
                phase: p1,
            },
            Cosine {
                amplitude: a2,
                wavelength: l2,
                phase: p2,
            },
        ) if (l1 - l2).abs() < 1e-12 * l1 => Some(([*a1, *a2], [*p1, *p2], *l1)),
        (
            Cosine {
                amplitude,
                wavelength,
                phase,
            },
            Flat,
        )
        | (
            Flat,
            Cosine {
                amplitude,
                wavelength,
                phase,
            },
        ) => Some(([*amplitude, 0.0], [*phase, 0.0], *wavelength)),
        _ => None,
    }
}

/// Surface average of (h₁+h₂)².
pub fn mean_square_sum(h1: &SurfaceProfile, h2: &SurfaceProfile) -> Result<f64, PfaError> {
    use SurfaceProfile::*;
    Ok(match (h1, h2) {
        (Flat, Flat) => 0.0,
        (Flat, p) | (p, Flat) => p.rms().powi(2),
        (
            Cosine {
                amplitude: a1,
                wavelength: l1,
                phase: p1,
            },
            Cosine {
                amplitude: a2,
                wavelength: l2,
                phase: p2,
            },
        ) => {
            let direct = 0.5 * (a1 * a1 + a2 * a2);
            if (l1 - l2).abs() < 1e-12 * l1 {
                direct + a1 * a2 * (p1 - p2).cos()
            } else {
                direct
            }
        }
        (Grid(g), o) | (o, Grid(g)) => {
            let mut sum = 0.0;
            for iy in 0..g.ny {
                for ix in 0..g.nx {
                    let x = ix as f64 * g.dx;
                    let other_h = match o {
                        Flat => 0.0,
                        Cosine {
                            amplitude,
                            wavelength,
                            phase,
                        } => {
                            amplitude
                                * (2.0 * std::f64::consts::PI * x / wavelength - phase).cos()
                        }
                        Grid(g2) => {
                            if g2.nx != g.nx
                                || g2.ny != g.ny
                                || g2.dx != g.dx
                                || g2.dy != g.dy
                            {
                                return Err(PfaError::GridMismatch(
                                    "grid profiles must share nx, ny, dx, dy".into(),
                                ));
                            }
                            g2.at(ix, iy)
                        }
                    };
                    let s = g.at(ix, iy) + other_h;
                    sum += s * s;
                }
            }
            sum / (g.nx * g.ny) as f64
        }
    })
}

/// Second-order expansion of the proximity-force average,
/// E_PP + ½ E_PP'' ⟨(h₁+h₂)²⟩. The first-order term vanishes because
/// profiles carry zero spatial average.
pub fn pfa_second_order(
    h1: &SurfaceProfile,
    h2: &SurfaceProfile,
    epp_at_l: f64,
    epp_curvature: f64,
    _l: f64,
) -> Result<f64, PfaError> {
    Ok(epp_at_l + 0.5 * epp_curvature * mean_square_sum(h1, h2)?)
}

/// One isotropic spectral line: wavevector modulus and the integrated
/// spectral weight it carries (already including the d²k/(2π)² measure),
/// so that summing `power` over lines gives the mean-square height.
#[derive(Debug, Clone, Copy)]
pub struct SpectralLine {
    /// rad/m
    pub k: f64,
    /// m²
    pub power: f64,
}

/// Discrete surface spectrum grouped by wavevector modulus.
#[derive(Debug, Clone)]
pub struct ProfileSpectrum {
    /// lines sorted by increasing k, k = 0 excluded (profiles are zero mean)
    pub lines: Vec<SpectralLine>,
    /// plate area the spectrum was measured on, m²
    pub area: f64,
}

impl ProfileSpectrum {
    /// Σ power = mean-square height (the grid Parseval identity).
    pub fn total_mean_square(&self) -> f64 {
        self.lines.iter().map(|l| l.power).sum()
    }

    pub fn max_k(&self) -> f64 {
        self.lines.last().map(|l| l.k).unwrap_or(0.0)
    }

    /// Spectrum of a single cosine of amplitude a: one line of power a²/2.
    pub fn single_line(k: f64, mean_square: f64, area: f64) -> Self {
        Self {
            lines: vec![SpectralLine {
                k,
                power: mean_square,
            }],
            area,
        }
    }
}

fn spectrum_of_grid(g: &ProfileGrid) -> ProfileSpectrum {
    let (nx, ny) = (g.nx, g.ny);
    let mut data: Vec<Complex64> = g
        .heights
        .iter()
        .map(|&h| Complex64::new(h, 0.0))
        .collect();

    // 2-D DFT: rows then columns
    let mut planner = FftPlanner::new();
    let fft_x = planner.plan_fft_forward(nx);
    for row in data.chunks_exact_mut(nx) {
        fft_x.process(row);
    }
    let fft_y = planner.plan_fft_forward(ny);
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for ix in 0..nx {
        for iy in 0..ny {
            col[iy] = data[iy * nx + ix];
        }
        fft_y.process(&mut col);
        for iy in 0..ny {
            data[iy * nx + ix] = col[iy];
        }
    }

    // per-mode weight: |H|^2/(N nx ny) sums to the mean square height
    let n_total = (nx * ny) as f64;
    let dkx = 2.0 * std::f64::consts::PI / (nx as f64 * g.dx);
    let dky = 2.0 * std::f64::consts::PI / (ny as f64 * g.dy);
    let mut modes: Vec<(f64, f64)> = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let my = if iy <= ny / 2 {
            iy as f64
        } else {
            iy as f64 - ny as f64
        };
        for ix in 0..nx {
            if ix == 0 && iy == 0 {
                continue; // zero-mean profile carries no DC weight
            }
            let mx = if ix <= nx / 2 {
                ix as f64
            } else {
                ix as f64 - nx as f64
            };
            let k = ((mx * dkx).powi(2) + (my * dky).powi(2)).sqrt();
            let w = data[iy * nx + ix].norm_sqr() / (n_total * n_total);
            modes.push((k, w));
        }
    }
    modes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // merge numerically equal moduli
    let mut lines: Vec<SpectralLine> = Vec::new();
    for (k, w) in modes {
        match lines.last_mut() {
            Some(last) if (k - last.k).abs() <= 1e-9 * k.max(last.k) => last.power += w,
            _ => lines.push(SpectralLine { k, power: w }),
        }
    }
    ProfileSpectrum {
        lines,
        area: g.area(),
    }
}

/// Discrete spectrum of a profile, normalised so the grid Parseval identity
/// holds: the summed line powers equal the surface mean-square height.
pub fn profile_spectrum(profile: &SurfaceProfile) -> Result<ProfileSpectrum, PfaError> {
    match profile {
        SurfaceProfile::Flat => Ok(ProfileSpectrum {
            lines: Vec::new(),
            area: f64::INFINITY,
        }),
        SurfaceProfile::Cosine {
            amplitude,
            wavelength,
            ..
        } => Ok(ProfileSpectrum::single_line(
            2.0 * std::f64::consts::PI / wavelength,
            0.5 * amplitude * amplitude,
            f64::INFINITY,
        )),
        SurfaceProfile::Grid(g) => Ok(spectrum_of_grid(g)),
    }
}

/// Plane-sphere force through the proximity-force mapping F = 2πR·|E_PP|/A.
#[derive(Debug, Clone, Copy)]
pub struct PlaneSphereForce {
    /// attraction magnitude, N
    pub value: f64,
    /// L/R; the mapping assumes this is small and warns above 0.1
    pub aspect: f64,
    pub aspect_warning: bool,
}

/// Map a plane-plane energy per unit area onto the sphere-plane force of a
/// sphere of radius `r` at closest approach `l`.
///
/// `epp_per_area` returns the signed (negative) plane-plane energy per m²;
/// the returned force is the positive magnitude of the attraction.
pub fn plane_sphere_force<F: Fn(f64) -> f64>(
    r: f64,
    l: f64,
    epp_per_area: F,
) -> Result<PlaneSphereForce, PfaError> {
    assert!(r > 0.0 && l > 0.0);
    let aspect = l / r;
    if aspect >= 1.0 {
        return Err(PfaError::NotASphereGap { aspect });
    }
    let value = 2.0 * std::f64::consts::PI * r * (-epp_per_area(l));
    Ok(PlaneSphereForce {
        value,
        aspect,
        aspect_warning: aspect >= 0.1,
    })
}

/// Plane-plane energy memoised on an adaptive log grid.
///
/// The proximity-force average makes thousands of energy calls; when each
/// call is a full scattering quadrature this table makes the averaging
/// practical. Interpolation is cubic in (ln ℓ, ln|E|), refined until probe
/// points match direct evaluation within `rel_tol`.
pub struct MemoizedEnergy {
    ln_l: Vec<f64>,
    ln_mag: Vec<f64>,
    second: Vec<f64>,
    sign: f64,
}

impl MemoizedEnergy {
    pub fn build<F: Fn(f64) -> f64>(
        f: F,
        l_min: f64,
        l_max: f64,
        rel_tol: f64,
    ) -> Result<Self, PfaError> {
        assert!(l_min > 0.0 && l_max > l_min);
        let mut n = 17usize;
        loop {
            let table = Self::build_n(&f, l_min, l_max, n);
            // probe mid-points of the grid for interpolation error
            let mut worst: f64 = 0.0;
            for i in 0..(n - 1).min(24) {
                let t = (i as f64 + 0.5) / ((n - 1).min(24) as f64);
                let l = l_min * (l_max / l_min).powf(t);
                let direct = f(l);
                if direct != 0.0 {
                    worst = worst.max(((table.eval(l) - direct) / direct).abs());
                }
            }
            if worst <= rel_tol || n >= 2049 {
                return Ok(table);
            }
            n = 2 * n - 1;
        }
    }

    fn build_n<F: Fn(f64) -> f64>(f: &F, l_min: f64, l_max: f64, n: usize) -> Self {
        let mut ln_l = Vec::with_capacity(n);
        let mut ln_mag = Vec::with_capacity(n);
        let mut sign = 0.0;
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let l = l_min * (l_max / l_min).powf(t);
            let e = f(l);
            if sign == 0.0 && e != 0.0 {
                sign = e.signum();
            }
            ln_l.push(l.ln());
            ln_mag.push(e.abs().max(1e-300).ln());
        }
        let second = natural_spline_second_derivatives(&ln_l, &ln_mag);
        Self {
            ln_l,
            ln_mag,
            second,
            sign: if sign == 0.0 { 1.0 } else { sign },
        }
    }

    /// Interpolated energy at separation `l` (clamped to the table range).
    pub fn eval(&self, l: f64) -> f64 {
        let x = l.ln();
        let n = self.ln_l.len();
        let x = x.clamp(self.ln_l[0], self.ln_l[n - 1]);
        let mut hi = match self
            .ln_l
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.sign * self.ln_mag[i].exp(),
            Err(i) => i,
        };
        hi = hi.clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.ln_l[hi] - self.ln_l[lo];
        let a = (self.ln_l[hi] - x) / h;
        let b = (x - self.ln_l[lo]) / h;
        let y = a * self.ln_mag[lo]
            + b * self.ln_mag[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h
                / 6.0;
        self.sign * y.exp()
    }
}

/// Second derivatives of a natural cubic spline through (x, y).
fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut u = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * m[i - 1] + 2.0;
        m[i] = (sig - 1.0) / p;
        u[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * u[i] / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    for i in (1..n - 1).rev() {
        m[i] = m[i] * m[i + 1] + u[i];
    }
    m
}

/// Parse a profile grid file: `#` comments, a header row `nx ny dx dy`
/// (spacings in m), then nx·ny row-major height samples in m, whitespace
/// separated across any number of lines.
pub fn load_profile(path: &Path) -> Result<ProfileGrid, PfaError> {
    let text = std::fs::read_to_string(path)?;
    parse_profile(&text)
}

pub fn parse_profile(text: &str) -> Result<ProfileGrid, PfaError> {
    let mut header: Option<(usize, usize, f64, f64)> = None;
    let mut heights: Vec<f64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if header.is_none() {
            if fields.len() != 4 {
                return Err(PfaError::Parse {
                    line: lineno,
                    message: "header must be: nx ny dx dy".into(),
                });
            }
            let nx = fields[0].parse::<usize>().map_err(|_| PfaError::Parse {
                line: lineno,
                message: "nx must be an integer".into(),
            })?;
            let ny = fields[1].parse::<usize>().map_err(|_| PfaError::Parse {
                line: lineno,
                message: "ny must be an integer".into(),
            })?;
            let dx = fields[2].parse::<f64>().map_err(|_| PfaError::Parse {
                line: lineno,
                message: "dx must be a number".into(),
            })?;
            let dy = fields[3].parse::<f64>().map_err(|_| PfaError::Parse {
                line: lineno,
                message: "dy must be a number".into(),
            })?;
            header = Some((nx, ny, dx, dy));
            continue;
        }
        for f in fields {
            heights.push(f.parse::<f64>().map_err(|_| PfaError::Parse {
                line: lineno,
                message: format!("'{f}' is not a number"),
            })?);
        }
    }
    let (nx, ny, dx, dy) = header.ok_or(PfaError::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    ProfileGrid::new(nx, ny, dx, dy, heights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ideal_epp_per_area(l: f64) -> f64 {
        // shape of the perfect-mirror energy; prefactor irrelevant to ratios
        -1.0 / (l * l * l)
    }

    #[test]
    fn flat_pair_returns_plane_plane_energy() {
        let e = pfa_energy(&SurfaceProfile::Flat, &SurfaceProfile::Flat, ideal_epp_per_area, 1e-6)
            .unwrap();
        assert_eq!(e.value, ideal_epp_per_area(1e-6));
        assert!(e.validity_ratio.is_infinite());
    }

    #[test]
    fn linear_energy_averages_exactly() {
        // zero-mean profiles kill the first order entirely
        let h1 = SurfaceProfile::cosine(5e-9, 1e-6, 0.3);
        let h2 = SurfaceProfile::cosine(3e-9, 1e-6, 1.1);
        let e = pfa_energy(&h1, &h2, |l| 7.0 * l - 2.0e-6, 1e-6).unwrap();
        assert_relative_eq!(e.value, 7.0 * 1e-6 - 2.0e-6, max_relative = 1e-10);
    }

    #[test]
    fn cosine_average_matches_dense_sampling_oracle() {
        let a = 1e-8;
        let l = 1e-6;
        let lambda = 0.8e-6;
        let h1 = SurfaceProfile::cosine(a, lambda, 0.0);
        let e = pfa_energy(&h1, &SurfaceProfile::Flat, ideal_epp_per_area, l)
            .unwrap()
            .value;
        // oracle: dense 1-D trapezoid over one period
        let n = 2_000_001usize;
        let mut acc = 0.0;
        for i in 0..n {
            let x = lambda * i as f64 / n as f64;
            acc += ideal_epp_per_area(l - a * (2.0 * PI * x / lambda).cos());
        }
        let oracle = acc / n as f64;
        assert_relative_eq!(e, oracle, max_relative = 1e-6);
    }

    #[test]
    fn contact_is_detected() {
        let h1 = SurfaceProfile::cosine(0.6e-6, 1e-6, 0.0);
        let err = pfa_energy(&h1, &SurfaceProfile::Flat, ideal_epp_per_area, 0.5e-6).unwrap_err();
        assert!(matches!(err, PfaError::Contact { .. }));
    }

    #[test]
    fn second_order_flat_is_plane_plane() {
        let e = pfa_second_order(
            &SurfaceProfile::Flat,
            &SurfaceProfile::Flat,
            -3.0,
            100.0,
            1e-6,
        )
        .unwrap();
        assert_eq!(e, -3.0);
    }

    #[test]
    fn in_phase_sinusoid_correction() {
        // identical in-phase cosines of amplitude a: <(h1+h2)^2> = 2a^2,
        // correction = E'' a^2
        let a = 2e-9;
        let h = SurfaceProfile::cosine(a, 1e-6, 0.0);
        let curv = 5.0e8;
        let e = pfa_second_order(&h, &h, 0.0, curv, 1e-6).unwrap();
        assert_relative_eq!(e, curv * a * a, max_relative = 1e-12);
    }

    #[test]
    fn expansion_error_shrinks_cubically() {
        // halving the amplitude must shrink the disagreement with the full
        // average by at least 8x on a smooth energy law
        let l: f64 = 1e-6;
        let lambda = 2e-6;
        // second derivative of the model law -1/l^3
        let curv = -12.0 / l.powi(5);
        let gap = |a: f64| {
            let h1 = SurfaceProfile::cosine(a, lambda, 0.0);
            let h2 = SurfaceProfile::cosine(0.7 * a, lambda, 0.9);
            let full = pfa_energy(&h1, &h2, ideal_epp_per_area, l).unwrap().value;
            let second =
                pfa_second_order(&h1, &h2, ideal_epp_per_area(l), curv, l).unwrap();
            (full - second).abs()
        };
        let a = 1e-8; // a/L = 1e-2
        let coarse = gap(a);
        let fine = gap(0.5 * a);
        assert!(
            coarse / fine >= 8.0 * 0.9,
            "third-order scaling violated: {coarse:e} vs {fine:e}"
        );
    }

    #[test]
    fn cosine_spectrum_is_a_single_line() {
        let a = 3e-9;
        let lambda = 1.2e-6;
        // on-grid cosine: 64 samples over exactly two periods
        let nx = 64;
        let dx = 2.0 * lambda / nx as f64;
        let heights: Vec<f64> = (0..nx * 8)
            .map(|i| {
                let ix = i % nx;
                a * (2.0 * PI * (ix as f64 * dx) / lambda).cos()
            })
            .collect();
        let g = ProfileGrid::new(nx, 8, dx, dx, heights).unwrap();
        let spec = profile_spectrum(&SurfaceProfile::Grid(g)).unwrap();
        let total = spec.total_mean_square();
        assert_relative_eq!(total, 0.5 * a * a, max_relative = 1e-10);
        // all weight sits at k_C
        let kc = 2.0 * PI / lambda;
        let at_kc: f64 = spec
            .lines
            .iter()
            .filter(|l| (l.k - kc).abs() < 1e-6 * kc)
            .map(|l| l.power)
            .sum();
        assert_relative_eq!(at_kc, total, max_relative = 1e-10);
    }

    #[test]
    fn zero_profile_has_zero_spectrum() {
        let g = ProfileGrid::new(16, 16, 1e-8, 1e-8, vec![0.0; 256]).unwrap();
        let spec = profile_spectrum(&SurfaceProfile::Grid(g)).unwrap();
        assert!(spec.total_mean_square() < 1e-30);
    }

    #[test]
    fn white_noise_satisfies_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (nx, ny) = (48, 40);
        let heights: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-1e-9..1e-9)).collect();
        let g = ProfileGrid::new(nx, ny, 2e-8, 3e-8, heights).unwrap();
        let ms_direct =
            g.heights().iter().map(|h| h * h).sum::<f64>() / (nx * ny) as f64;
        let spec = profile_spectrum(&SurfaceProfile::Grid(g)).unwrap();
        assert_relative_eq!(spec.total_mean_square(), ms_direct, max_relative = 1e-12);
    }

    #[test]
    fn plane_sphere_reference_value() {
        // |E/A| = 4.3338e-10 J/m^2 at L = 1 um for perfect mirrors maps to
        // 2.723e-13 N for R = 100 um
        let epp = crate::lifshitz::casimir_ideal_energy(1.0, 1e-6);
        let f = plane_sphere_force(100e-6, 1e-6, |_| epp).unwrap();
        assert_relative_eq!(f.value, 2.0 * PI * 100e-6 * 4.3338e-10, max_relative = 1e-4);
        assert!(!f.aspect_warning);
    }

    #[test]
    fn plane_sphere_scales_linearly_in_radius() {
        let f1 = plane_sphere_force(50e-6, 1e-6, ideal_epp_per_area).unwrap();
        let f2 = plane_sphere_force(100e-6, 1e-6, ideal_epp_per_area).unwrap();
        assert_relative_eq!(f2.value, 2.0 * f1.value, max_relative = 1e-12);
    }

    #[test]
    fn plane_sphere_warns_or_rejects_bad_aspect() {
        let w = plane_sphere_force(5e-6, 1e-6, ideal_epp_per_area).unwrap();
        assert!(w.aspect_warning);
        assert!(matches!(
            plane_sphere_force(1e-6, 2e-6, ideal_epp_per_area),
            Err(PfaError::NotASphereGap { .. })
        ));
    }

    #[test]
    fn memoized_energy_tracks_the_function() {
        let f = |l: f64| -2.3 / (l * l * l) * (1.0 + 0.05 * (l * 1e6).sin());
        let table = MemoizedEnergy::build(f, 0.3e-6, 3e-6, 1e-7).unwrap();
        for i in 0..47 {
            let l = 0.35e-6 * 1.045f64.powi(i);
            assert!(l <= 3e-6);
            assert_relative_eq!(table.eval(l), f(l), max_relative = 1e-6);
        }
    }

    #[test]
    fn profile_file_round_trip() {
        let text = "# roughness map\n4 2 1e-8 2e-8\n0 1e-9 2e-9 3e-9\n3e-9 2e-9 1e-9 0 # trailing\n";
        let g = parse_profile(text).unwrap();
        assert_eq!((g.nx, g.ny), (4, 2));
        assert_relative_eq!(g.area(), 4.0 * 1e-8 * 2.0 * 2e-8, max_relative = 1e-12);
        // mean was removed (up to rounding at the sample scale)
        let residual: f64 = g.heights().iter().sum();
        assert!(residual.abs() < 1e-23);
    }

    #[test]
    fn profile_file_errors_name_lines() {
        let err = parse_profile("4 2 1e-8 2e-8\n0 1 2 x\n").unwrap_err();
        match err {
            PfaError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_profile("4 2 1e-8\n").unwrap_err();
        assert!(matches!(err, PfaError::Parse { line: 1, .. }));
    }
}
