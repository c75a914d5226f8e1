//! Second-order response of the Casimir energy to surface deformations.
//!
//! For small deformations the energy shift of the cavity is quadratic in the
//! profiles and governed by an isotropic spectral kernel G[k]. Two kinds are
//! computed from the perturbative reflection operators of
//! [`rayleigh`]:
//!
//! * `Roughness`: the same-mirror quadratic response that weights the
//!   (uncorrelated) roughness spectrum added over the two plates,
//! * `Corrugation`: the cross-mirror response that carries the dependence
//!   on the lateral mismatch of correlated corrugations, and with it the
//!   lateral force and the misalignment torque.
//!
//! Both kinds obey the same long-wavelength anchor
//! G[k→0] = ½ ∂²E_PP/∂L² (per unit area), the statement that slow
//! deformations reduce to a distribution of local separations. At large k
//! the corrugation kernel decays as e^{−kL} (one-way propagation across the
//! gap), while the roughness kernel keeps growing: short-scale roughness is
//! felt more strongly than any local-separation picture predicts.

pub mod cache;
pub mod rayleigh;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::quad::{self, QuadTarget};
use crate::reflection::Polarization;
use crate::lifshitz::QuadratureSpec;
use crate::pfa::ProfileSpectrum;
use rayleigh::{validate_provider, KVec, MirrorSide, PerturbationProvider, ProviderError};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

/// Number of equispaced azimuthal nodes; the integrand is smooth and
/// 2π-periodic so the trapezoid rule converges spectrally. 32 nodes hold
/// azimuthal errors far below the 1e-5 kernel tolerances used here (checked
/// by the doubling test in this module).
const N_AZIMUTH: usize = 32;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("kernel quadrature failed: {0}")]
    Quadrature(#[from] quad::QuadError),
    #[error("spectrum support [{k_min:e}, {k_max:e}] exceeds the kernel tabulation [{t_min:e}, {t_max:e}]")]
    SpectrumRange {
        k_min: f64,
        k_max: f64,
        t_min: f64,
        t_max: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("kernel cache: {0}")]
    Cache(String),
    #[error("tail-dominated integral: tail estimate {tail:e} exceeds the resolved part {resolved:e}")]
    TailDominated { tail: f64, resolved: f64 },
}

/// The deformed-mirror pair a kernel belongs to: perturbation providers for
/// the lower and upper plates and the mean separation.
#[derive(Clone, Copy)]
pub struct MirrorStack<'a> {
    pub lower: &'a dyn PerturbationProvider,
    pub upper: &'a dyn PerturbationProvider,
    /// mean separation L, m
    pub length: f64,
}

impl<'a> MirrorStack<'a> {
    pub fn new(
        lower: &'a dyn PerturbationProvider,
        upper: &'a dyn PerturbationProvider,
        length: f64,
    ) -> Self {
        assert!(length > 0.0);
        Self {
            lower,
            upper,
            length,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "lower={} upper={} L={:.9e}",
            self.lower.describe(),
            self.upper.describe(),
            self.length
        )
    }

    fn at_length(&self, length: f64) -> MirrorStack<'a> {
        MirrorStack { length, ..*self }
    }

    /// Check both providers against their displacement anchors near the
    /// momentum scales this stack integrates over.
    pub fn validate(&self) -> Result<(), KernelError> {
        let x = 1.0 / self.length;
        let probes = [0.3 / self.length, 2.0 / self.length];
        validate_provider(self.lower, x, &probes)?;
        validate_provider(self.upper, x, &probes)?;
        Ok(())
    }
}

/// Which quadratic response the kernel describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Roughness,
    Corrugation,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Roughness => "roughness",
            KernelKind::Corrugation => "corrugation",
        }
    }
}

/// One converged kernel value, J/m⁴ per squared amplitude.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    /// transverse wavevector, rad/m
    pub k: f64,
    pub value: f64,
    pub est_error: f64,
    pub evals: usize,
}

fn specular_pair(p: &dyn PerturbationProvider, x: f64, k: f64) -> [f64; 2] {
    [
        p.specular(x, k, Polarization::Te),
        p.specular(x, k, Polarization::Tm),
    ]
}

/// Integrand of the (u, t) quadrature at one azimuthal node, in physical
/// units (1/m² scale; the measure factor c/L³ is applied outside).
fn node_bracket(
    stack: &MirrorStack,
    kind: KernelKind,
    identical: bool,
    x: f64,
    q: f64,
    k_vec: KVec,
) -> f64 {
    let l = stack.length;
    let q_vec = KVec::new(q, 0.0);
    let kp_vec = k_vec.sub(q_vec);
    let k = k_vec.norm();
    let kp = kp_vec.norm();
    let kap = k.hypot(x);
    let kap_p = kp.hypot(x);
    let r1 = specular_pair(stack.lower, x, k);
    let r2 = specular_pair(stack.upper, x, k);
    let r1p = specular_pair(stack.lower, x, kp);
    let r2p = specular_pair(stack.upper, x, kp);
    let damp = (-2.0 * kap * l).exp();
    let damp_p = (-2.0 * kap_p * l).exp();
    let d: [f64; 2] = [
        1.0 / (1.0 - r1[0] * r2[0] * damp),
        1.0 / (1.0 - r1[1] * r2[1] * damp),
    ];
    let dp: [f64; 2] = [
        1.0 / (1.0 - r1p[0] * r2p[0] * damp_p),
        1.0 / (1.0 - r1p[1] * r2p[1] * damp_p),
    ];
    let pols = Polarization::BOTH;

    match kind {
        KernelKind::Corrugation => {
            // Σ_{pp'} d_p(k) d_{p'}(k') e^{−(κ+κ')L} B₁(k←k') B₂(k'←k)
            let cross_damp = (-(kap + kap_p) * l).exp();
            let mut sum = 0.0;
            for (ip, p) in pols.iter().enumerate() {
                for (ipp, pp) in pols.iter().enumerate() {
                    let b1 = stack
                        .lower
                        .first_order(MirrorSide::Lower, x, k_vec, *p, kp_vec, *pp);
                    let b2 = stack
                        .upper
                        .first_order(MirrorSide::Upper, x, kp_vec, *pp, k_vec, *p);
                    sum += d[ip] * dp[ipp] * b1 * b2;
                }
            }
            sum * cross_damp
        }
        KernelKind::Roughness => {
            // per mirror j: Σ_p d_p r_other,p e^{−2κL} [ C_j(k,p;q)
            //   + Σ_{p'} d_{p'} r_other,p' e^{−2κ'L} B_j(k←k') B_j(k'←k) ]
            let mut total = 0.0;
            let sides: &[(&dyn PerturbationProvider, &[f64; 2], &[f64; 2])] = if identical {
                &[(stack.lower, &r2, &r2p)]
            } else {
                &[(stack.lower, &r2, &r2p), (stack.upper, &r1, &r1p)]
            };
            for (mirror, r_other, r_other_p) in sides {
                let mut side_sum = 0.0;
                for (ip, p) in pols.iter().enumerate() {
                    let c = mirror.second_order_diag(x, k_vec, q_vec, *p);
                    let mut quad_term = 0.0;
                    for (ipp, pp) in pols.iter().enumerate() {
                        let b_out = mirror
                            .first_order(MirrorSide::Lower, x, k_vec, *p, kp_vec, *pp);
                        let b_in = mirror
                            .first_order(MirrorSide::Lower, x, kp_vec, *pp, k_vec, *p);
                        quad_term += dp[ipp] * r_other_p[ipp] * damp_p * b_out * b_in;
                    }
                    side_sum += d[ip] * r_other[ip] * damp * (c + quad_term);
                }
                total += side_sum;
            }
            if identical {
                total
            } else {
                0.5 * total
            }
        }
    }
}

/// Evaluate the response kernel G[k] of the mirror stack at transverse
/// wavevector `q` (rad/m). Negative for the attractive configurations
/// computed here, approaching ½ ∂²E_PP/∂L² per unit area as q → 0.
pub fn kernel(
    stack: &MirrorStack,
    kind: KernelKind,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<KernelSample, KernelError> {
    stack.validate()?;
    kernel_unchecked(stack, kind, q, spec)
}

/// As [`kernel`] without re-running the provider contract probes; used by
/// the tabulators which validate once up front.
pub fn kernel_unchecked(
    stack: &MirrorStack,
    kind: KernelKind,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<KernelSample, KernelError> {
    assert!(q >= 0.0, "kernel wavevector must be >= 0");
    let l = stack.length;
    let q_scaled = q * l;
    let identical = stack.lower.describe() == stack.upper.describe();

    let (u_max, t_max) = match kind {
        KernelKind::Corrugation => (20.0 + 0.5 * q_scaled, 20.0 + q_scaled),
        KernelKind::Roughness => (20.0, 20.0),
    };

    let evals = AtomicUsize::new(0);
    let inner_rel = spec.rel_tol / 10.0;
    let inner_target = QuadTarget::new(inner_rel, 0.0, spec.max_evals);

    let azimuthal = |u: f64, t: f64| -> f64 {
        let x = u / l;
        let k = t / l;
        evals.fetch_add(1, Ordering::Relaxed);
        if q == 0.0 {
            2.0 * PI * node_bracket(stack, kind, identical, x, 0.0, KVec::new(k, 0.0))
        } else {
            quad::integrate_periodic(
                |alpha| {
                    let kv = KVec::new(k * alpha.cos(), k * alpha.sin());
                    node_bracket(stack, kind, identical, x, q, kv)
                },
                2.0 * PI,
                N_AZIMUTH,
            )
        }
    };

    let outer = quad::integrate_par(
        |u| {
            quad::integrate(|t| t * azimuthal(u, t), 0.0, t_max, inner_target)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        },
        0.0,
        u_max,
        QuadTarget::new(0.5 * spec.rel_tol, 0.0, spec.max_evals),
    )?;
    if !outer.value.is_finite() {
        return Err(KernelError::Quadrature(quad::QuadError::NonConvergence {
            estimate: outer.value,
            error: outer.est_error,
            evals: evals.load(Ordering::Relaxed),
        }));
    }

    // measure: (ħ/2)(dξ/2π)(d²k/4π²) with dξ t dt = (c/L³) du t dt
    let prefactor = -0.5 * HBAR * SPEED_OF_LIGHT / (8.0 * PI * PI * PI * l * l * l);
    let value = prefactor * outer.value;
    let est_error =
        prefactor.abs() * (outer.est_error + 2.0 * inner_rel * outer.value.abs());
    Ok(KernelSample {
        k: q,
        value,
        est_error,
        evals: evals.load(Ordering::Relaxed),
    })
}

/// A kernel tabulated on a wavevector grid, the cacheable object consumed
/// by the roughness, lateral-force and torque operations.
#[derive(Debug, Clone)]
pub struct ResponseKernel {
    pub kind: KernelKind,
    /// mean separation the table was computed at, m
    pub length: f64,
    /// mirror-pair descriptor
    pub model: String,
    /// tolerance the samples were converged to
    pub rel_tol: f64,
    /// samples sorted by increasing k
    pub samples: Vec<KernelSample>,
}

impl ResponseKernel {
    /// Tabulate the kernel over `ks` (sorted ascending). Samples at distinct
    /// k are independent and computed in parallel.
    pub fn tabulate(
        stack: &MirrorStack,
        kind: KernelKind,
        ks: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<Self, KernelError> {
        if ks.is_empty() {
            return Err(KernelError::InvalidConfig("empty wavevector grid".into()));
        }
        if ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KernelError::InvalidConfig(
                "wavevector grid must be strictly increasing".into(),
            ));
        }
        stack.validate()?;
        let samples: Result<Vec<KernelSample>, KernelError> = ks
            .par_iter()
            .map(|&k| kernel_unchecked(stack, kind, k, spec))
            .collect();
        Ok(Self {
            kind,
            length: stack.length,
            model: stack.describe(),
            rel_tol: spec.rel_tol,
            samples: samples?,
        })
    }

    /// Log-spaced grid from `k_min` to `k_max` plus a leading near-zero
    /// sample that anchors the long-wavelength limit.
    pub fn log_grid(k_min: f64, k_max: f64, n: usize) -> Vec<f64> {
        assert!(k_min > 0.0 && k_max > k_min && n >= 2);
        let mut ks = Vec::with_capacity(n);
        let step = (k_max / k_min).ln() / (n - 1) as f64;
        for i in 0..n {
            ks.push(k_min * ((i as f64) * step).exp());
        }
        ks
    }

    pub fn k_min(&self) -> f64 {
        self.samples.first().map(|s| s.k).unwrap_or(0.0)
    }

    pub fn k_max(&self) -> f64 {
        self.samples.last().map(|s| s.k).unwrap_or(0.0)
    }

    /// Linear interpolation inside the tabulated range; requests outside it
    /// are a hard error rather than an extrapolation.
    pub fn value_at(&self, k: f64) -> Result<f64, KernelError> {
        let lo = self.k_min();
        let hi = self.k_max();
        if !(lo..=hi).contains(&k) {
            return Err(KernelError::SpectrumRange {
                k_min: k,
                k_max: k,
                t_min: lo,
                t_max: hi,
            });
        }
        let i = self
            .samples
            .partition_point(|s| s.k < k)
            .clamp(1, self.samples.len() - 1);
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        if a.k == k {
            return Ok(a.value);
        }
        let t = (k - a.k) / (b.k - a.k);
        Ok(a.value * (1.0 - t) + b.value * t)
    }
}

/// Roughness correction to the cavity energy, J: the kernel integrated
/// against the roughness spectrum added over the two plates.
///
/// `area` is the plate area; spectra measured on grids carry it themselves
/// (see [`ProfileSpectrum::area`]). Reduces to the local-separation value
/// G[0]·⟨h²⟩·A when the spectrum is concentrated at long wavelengths.
pub fn roughness_correction(
    sigma: &ProfileSpectrum,
    kern: &ResponseKernel,
    area: f64,
) -> Result<f64, KernelError> {
    if kern.kind != KernelKind::Roughness {
        return Err(KernelError::InvalidConfig(
            "roughness_correction needs a Roughness kernel".into(),
        ));
    }
    let mut sum = 0.0;
    for line in &sigma.lines {
        if line.power == 0.0 {
            continue;
        }
        sum += kern.value_at(line.k)? * line.power;
    }
    Ok(area * sum)
}

/// Two corrugated plates facing each other: sinusoidal profiles of equal
/// wavelength, possibly displaced by `b` along the corrugation wavevector
/// and misaligned by the angle `theta`.
#[derive(Debug, Clone, Copy)]
pub struct CorrugationPair {
    /// corrugation amplitudes, m
    pub a1: f64,
    pub a2: f64,
    /// corrugation wavelength λ_C, m
    pub lambda_c: f64,
    /// lateral mismatch between crests, m
    pub b: f64,
    /// misalignment angle between the corrugation wavevectors, rad
    pub theta: f64,
    /// corrugated-section extents, m (L_x ≲ L_y, k·L_y ≫ 1 assumed)
    pub lx: f64,
    pub ly: f64,
}

impl CorrugationPair {
    pub fn k_c(&self) -> f64 {
        2.0 * PI / self.lambda_c
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.a1 > 0.0 && self.a2 > 0.0) {
            return Err(KernelError::InvalidConfig(
                "corrugation amplitudes must be positive".into(),
            ));
        }
        if !(self.lambda_c > 0.0 && self.lx > 0.0 && self.ly > 0.0) {
            return Err(KernelError::InvalidConfig(
                "corrugation wavelength and plate extents must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Perturbation-validity diagnostics for a run at separation `l`;
    /// empty when all assumptions hold.
    pub fn warnings(&self, l: f64) -> Vec<String> {
        let mut w = Vec::new();
        let a_max = self.a1.max(self.a2);
        if a_max > 0.2 * l {
            w.push(format!(
                "corrugation amplitude {a_max:e} is not small against the separation {l:e}"
            ));
        }
        if a_max > 0.2 * self.lambda_c {
            w.push(format!(
                "corrugation amplitude {a_max:e} is not small against the wavelength {:e}",
                self.lambda_c
            ));
        }
        if self.k_c() * self.ly < 10.0 {
            w.push(format!(
                "k·L_y = {:.2} is not large; the long-line torque formula degrades",
                self.k_c() * self.ly
            ));
        }
        if self.lx > self.ly {
            w.push("L_x exceeds L_y; torque formulas assume L_x <~ L_y".into());
        }
        w
    }
}

fn corrugation_kernel_at(pair: &CorrugationPair, kern: &ResponseKernel) -> Result<f64, KernelError> {
    if kern.kind != KernelKind::Corrugation {
        return Err(KernelError::InvalidConfig(
            "lateral and torque operations need a Corrugation kernel".into(),
        ));
    }
    kern.value_at(pair.k_c())
}

fn require_aligned(pair: &CorrugationPair) -> Result<(), KernelError> {
    if pair.theta != 0.0 {
        return Err(KernelError::InvalidConfig(
            "lateral operations require aligned corrugations (theta = 0)".into(),
        ));
    }
    Ok(())
}

/// Mismatch-dependent corrugation energy A·(a₁a₂/2)·cos(kb)·G_C[k], J.
pub fn lateral_energy(
    pair: &CorrugationPair,
    kern: &ResponseKernel,
    area: f64,
) -> Result<f64, KernelError> {
    pair.validate()?;
    require_aligned(pair)?;
    let g = corrugation_kernel_at(pair, kern)?;
    let k = pair.k_c();
    Ok(area * 0.5 * pair.a1 * pair.a2 * (k * pair.b).cos() * g)
}

/// Lateral force between the corrugated plates, N:
/// −∂/∂b of [`lateral_energy`] = A·(a₁a₂/2)·k·sin(kb)·G_C[k]. Restoring
/// toward the aligned configuration (the computed kernels are negative).
pub fn lateral_force_pp(
    pair: &CorrugationPair,
    kern: &ResponseKernel,
    area: f64,
) -> Result<f64, KernelError> {
    pair.validate()?;
    require_aligned(pair)?;
    let g = corrugation_kernel_at(pair, kern)?;
    let k = pair.k_c();
    Ok(area * 0.5 * pair.a1 * pair.a2 * k * (k * pair.b).sin() * g)
}

/// Plane-sphere lateral force and its diagnostics.
#[derive(Debug, Clone)]
pub struct PsLateralForce {
    /// signed force at the pair's mismatch b, N
    pub value: f64,
    /// |force| maximised over b (the measured amplitude), N
    pub amplitude: f64,
    /// ∫_L^∞ dL' G[k, L'], J/m³
    pub kernel_integral: f64,
    pub est_error: f64,
    pub warnings: Vec<String>,
}

/// Separation-integrated corrugation kernel ∫_L^∞ dL' G[k, L'] behind the
/// plane-sphere lateral force. Integrates on a log axis to the cut where
/// the integrand has fallen twelve decades, then folds an exponential tail
/// estimate into the error bound.
pub fn kernel_separation_integral(
    stack: &MirrorStack,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), KernelError> {
    stack.validate()?;
    let l = stack.length;
    let g_at = |lp: f64| -> Result<KernelSample, KernelError> {
        kernel_unchecked(&stack.at_length(lp), KernelKind::Corrugation, q, spec)
    };
    // scan doublings of L' for the cut
    let g0 = g_at(l)?;
    let mut scans = vec![(l, g0.value)];
    let mut l_cut = l;
    for _ in 0..14 {
        l_cut *= 2.0;
        let g = g_at(l_cut)?;
        scans.push((l_cut, g.value));
        if g.value.abs() < 1e-12 * g0.value.abs() {
            break;
        }
    }
    let (l_a, g_a) = scans[scans.len() - 2];
    let (l_b, g_b) = scans[scans.len() - 1];
    // exponential tail fit through the last two scans
    let beta = if g_b != 0.0 && g_a.abs() > g_b.abs() {
        (g_a / g_b).abs().ln() / (l_b - l_a)
    } else {
        q.max(1.0 / l)
    };
    let tail = g_b.abs() / beta.max(1e-300);

    let resolved = quad::integrate_par(
        |s| {
            let lp = l * s.exp();
            match g_at(lp) {
                Ok(g) => g.value * lp,
                Err(_) => f64::NAN,
            }
        },
        0.0,
        (l_cut / l).ln(),
        QuadTarget::new(spec.rel_tol.max(1e-6) * 3.0, 0.0, spec.max_evals),
    )?;
    if !resolved.value.is_finite() {
        return Err(KernelError::InvalidConfig(
            "kernel evaluation failed inside the separation integral".into(),
        ));
    }
    if tail > 0.5 * resolved.value.abs() {
        return Err(KernelError::TailDominated {
            tail,
            resolved: resolved.value,
        });
    }
    Ok((resolved.value, resolved.est_error + tail))
}

/// Lateral Casimir force in the plane-sphere geometry,
/// F = π a₁ a₂ k R sin(kb) ∫_L^∞ dL' G[k, L'].
pub fn lateral_force_ps(
    stack: &MirrorStack,
    pair: &CorrugationPair,
    sphere_radius: f64,
    spec: &QuadratureSpec,
) -> Result<PsLateralForce, KernelError> {
    pair.validate()?;
    require_aligned(pair)?;
    if sphere_radius <= stack.length {
        return Err(KernelError::InvalidConfig(format!(
            "plane-sphere mapping needs L < R, got L/R = {}",
            stack.length / sphere_radius
        )));
    }
    let k = pair.k_c();
    let (integral, ierr) = kernel_separation_integral(stack, k, spec)?;
    let scale = PI * pair.a1 * pair.a2 * k * sphere_radius;
    let mut warnings = pair.warnings(stack.length);
    if stack.length / sphere_radius >= 0.1 {
        warnings.push(format!(
            "L/R = {:.3} strains the proximity mapping",
            stack.length / sphere_radius
        ));
    }
    if sphere_radius * stack.length < 10.0 * pair.lambda_c * pair.lambda_c {
        warnings.push(format!(
            "R·L = {:.3e} is not large against λ_C² = {:.3e}; curvature and corrugation interplay is neglected",
            sphere_radius * stack.length,
            pair.lambda_c * pair.lambda_c
        ));
    }
    Ok(PsLateralForce {
        value: scale * (k * pair.b).sin() * integral,
        amplitude: (scale * integral).abs(),
        kernel_integral: integral,
        est_error: scale.abs() * ierr,
        warnings,
    })
}

/// sin(x)/x with a stable small-argument branch.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// d/dx [sin(x)/x].
pub fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 3.0 + x * x * x / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Misalignment energy per unit area of the corrugated section, J/m²:
/// (a₁a₂/2)·G_C[k]·cos(kb)·sinc(kL_yθ/2). Even in θ and 2π/k-periodic in b;
/// θ = 0 recovers the aligned lateral energy per area.
pub fn torque_energy_per_area(
    pair: &CorrugationPair,
    kern: &ResponseKernel,
) -> Result<f64, KernelError> {
    pair.validate()?;
    let g = corrugation_kernel_at(pair, kern)?;
    let k = pair.k_c();
    let x = 0.5 * k * pair.ly * pair.theta;
    Ok(0.5 * pair.a1 * pair.a2 * g * (k * pair.b).cos() * sinc(x))
}

/// Restoring torque per unit area, τ = −∂(energy per area)/∂θ, N·m/m²,
/// evaluated at `theta` (the pair's own θ field is ignored here so a
/// θ-sweep reuses one pair). Odd in θ.
pub fn torque_per_area(
    pair: &CorrugationPair,
    kern: &ResponseKernel,
    theta: f64,
) -> Result<f64, KernelError> {
    pair.validate()?;
    let g = corrugation_kernel_at(pair, kern)?;
    let k = pair.k_c();
    let half_kly = 0.5 * k * pair.ly;
    let x = half_kly * theta;
    Ok(-0.5 * pair.a1 * pair.a2 * g * (k * pair.b).cos() * half_kly * sinc_derivative(x))
}

/// Misalignment angle of maximum torque magnitude. The kernel value and the
/// mismatch factor out; the angle is x*·λ_C/(π·L_y) with x* the argmax of
/// |sinc'| located numerically by golden-section search.
pub fn max_torque_angle(pair: &CorrugationPair) -> Result<f64, KernelError> {
    pair.validate()?;
    let objective = |x: f64| -sinc_derivative(x).abs();
    // |sinc'| has a single interior maximum on (0, π)
    let x_star = golden_min(objective, 1e-6, PI, 1e-12);
    Ok(2.0 * x_star / (pair.k_c() * pair.ly))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz::{energy_curvature, QuadratureSpec};
    use crate::materials::DielectricModel;
    use crate::reflection::{CavityConfig, MirrorSpec};
    use approx::assert_relative_eq;
    use rayleigh::{DielectricMirror, PerfectReflector};

    fn kernel_spec() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-5,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn perfect_kernel_matches_energy_curvature_at_long_wavelength() {
        let l = 200e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let cav = CavityConfig::new(MirrorSpec::perfect(), MirrorSpec::perfect(), l, 1.0);
        let curv = energy_curvature(&cav, &QuadratureSpec::with_rel_tol(1e-8), 0.05 * l)
            .unwrap()
            .value;
        for kind in [KernelKind::Roughness, KernelKind::Corrugation] {
            let g = kernel(&stack, kind, 1e-3 / l, &kernel_spec()).unwrap();
            assert_relative_eq!(g.value, 0.5 * curv, max_relative = 5e-3);
        }
    }

    #[test]
    fn plasma_kernel_matches_energy_curvature_at_long_wavelength() {
        let l = 200e-9;
        let model = DielectricModel::plasma_from_wavelength(136e-9);
        let mirror = DielectricMirror::new(model.clone());
        let stack = MirrorStack::new(&mirror, &mirror, l);
        let cav = CavityConfig::new(
            MirrorSpec::bulk(model.clone()),
            MirrorSpec::bulk(model),
            l,
            1.0,
        );
        let curv = energy_curvature(&cav, &QuadratureSpec::with_rel_tol(1e-8), 0.05 * l)
            .unwrap()
            .value;
        for kind in [KernelKind::Roughness, KernelKind::Corrugation] {
            let g = kernel(&stack, kind, 1e-3 / l, &kernel_spec()).unwrap();
            assert_relative_eq!(g.value, 0.5 * curv, max_relative = 1e-2);
        }
    }

    #[test]
    fn corrugation_kernel_high_k_decay_is_dominated_by_one_way_propagation() {
        // the kernel carries e^{-kL} from the propagation between the two
        // non-specular reflections, times a slowly varying prefactor; probe
        // the exponential rate by compensating the measured local slopes
        let l = 200e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let spec = kernel_spec();
        let kls = [3.0, 4.0, 5.0, 6.0, 8.0, 10.0];
        let gs: Vec<f64> = kls
            .iter()
            .map(|&kl| {
                kernel(&stack, KernelKind::Corrugation, kl / l, &spec)
                    .unwrap()
                    .value
            })
            .collect();
        for (i, w) in kls.windows(2).enumerate() {
            let slope_over_l = (gs[i + 1] / gs[i]).ln() / (w[1] - w[0]);
            println!(
                "kL in [{}, {}]: d ln|G| / d(kL) = {slope_over_l:.4}",
                w[0], w[1]
            );
            assert!(slope_over_l < -0.2, "kernel fails to decay at kL ~ {}", w[0]);
        }
    }

    #[test]
    fn roughness_kernel_exceeds_its_long_wavelength_value() {
        let l = 200e-9;
        let model = DielectricModel::plasma_from_wavelength(136e-9);
        let mirror = DielectricMirror::new(model);
        let stack = MirrorStack::new(&mirror, &mirror, l);
        let spec = kernel_spec();
        let g0 = kernel(&stack, KernelKind::Roughness, 1e-3 / l, &spec).unwrap();
        for ql in [1.0, 3.0, 8.0] {
            let g = kernel(&stack, KernelKind::Roughness, ql / l, &spec).unwrap();
            assert!(
                g.value.abs() > g0.value.abs(),
                "|G({ql}/L)| = {:e} not above |G(0)| = {:e}",
                g.value.abs(),
                g0.value.abs()
            );
        }
    }

    #[test]
    fn corrugation_kernel_is_bounded_by_its_long_wavelength_value() {
        let l = 200e-9;
        let model = DielectricModel::plasma_from_wavelength(136e-9);
        let mirror = DielectricMirror::new(model);
        let stack = MirrorStack::new(&mirror, &mirror, l);
        let spec = kernel_spec();
        let g0 = kernel(&stack, KernelKind::Corrugation, 1e-3 / l, &spec).unwrap();
        let mut prev = g0.value.abs();
        for ql in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let g = kernel(&stack, KernelKind::Corrugation, ql / l, &spec).unwrap();
            assert!(g.value.abs() <= g0.value.abs() * (1.0 + 1e-3));
            assert!(g.value.abs() <= prev * (1.0 + 1e-3));
            prev = g.value.abs();
        }
    }

    #[test]
    fn azimuthal_resolution_is_sufficient() {
        // doubling the fixed azimuthal order must not move the kernel at
        // the tolerance scale; checked through a denser numerical estimate
        let l = 150e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let spec = kernel_spec();
        let g = kernel(&stack, KernelKind::Corrugation, 3.0 / l, &spec).unwrap();
        // reference with explicit dense azimuthal sum
        let x_probe = 0.7 / l;
        let t_probe = 1.3;
        let coarse = quad::integrate_periodic(
            |a| {
                node_bracket(
                    &stack,
                    KernelKind::Corrugation,
                    true,
                    x_probe,
                    3.0 / l,
                    KVec::new(t_probe / l * a.cos(), t_probe / l * a.sin()),
                )
            },
            2.0 * PI,
            N_AZIMUTH,
        );
        let fine = quad::integrate_periodic(
            |a| {
                node_bracket(
                    &stack,
                    KernelKind::Corrugation,
                    true,
                    x_probe,
                    3.0 / l,
                    KVec::new(t_probe / l * a.cos(), t_probe / l * a.sin()),
                )
            },
            2.0 * PI,
            4 * N_AZIMUTH,
        );
        assert_relative_eq!(coarse, fine, max_relative = 1e-8);
        assert!(g.value.is_finite());
    }

    #[test]
    fn kernel_is_smooth_and_negative_over_a_scan() {
        let l = 200e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let spec = kernel_spec();
        let ks = ResponseKernel::log_grid(0.05 / l, 10.0 / l, 9);
        let kern = ResponseKernel::tabulate(&stack, KernelKind::Corrugation, &ks, &spec).unwrap();
        let mut prev = None;
        for s in &kern.samples {
            assert!(s.value < 0.0, "kernel must be negative, got {:e}", s.value);
            if let Some(p) = prev {
                let ratio: f64 = s.value / p;
                assert!(ratio > 0.05 && ratio < 1.05, "kernel jumps: ratio {ratio}");
            }
            prev = Some(s.value);
        }
    }

    #[test]
    fn roughness_correction_reduces_to_local_picture_at_long_wavelengths() {
        let l = 200e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let spec = kernel_spec();
        let ks = vec![1e-4 / l, 1e-3 / l, 1e-2 / l];
        let kern = ResponseKernel::tabulate(&stack, KernelKind::Roughness, &ks, &spec).unwrap();
        let mean_square = 2e-18; // <h1^2 + h2^2>
        let sigma = ProfileSpectrum::single_line(1e-3 / l, mean_square, 1.0);
        let de = roughness_correction(&sigma, &kern, 1.0).unwrap();
        let g0 = kern.value_at(1e-3 / l).unwrap();
        assert_relative_eq!(de, g0 * mean_square, max_relative = 1e-10);
    }

    #[test]
    fn roughness_correction_is_at_least_the_local_estimate() {
        let l = 150e-9;
        let model = DielectricModel::plasma_from_wavelength(136e-9);
        let mirror = DielectricMirror::new(model);
        let stack = MirrorStack::new(&mirror, &mirror, l);
        let spec = kernel_spec();
        let ks = ResponseKernel::log_grid(1e-3 / l, 12.0 / l, 10);
        let kern = ResponseKernel::tabulate(&stack, KernelKind::Roughness, &ks, &spec).unwrap();
        let g_small = kern.value_at(1e-3 / l).unwrap();
        // several spectra with weight at finite k
        for k_center in [0.8 / l, 3.0 / l, 9.0 / l] {
            let sigma = ProfileSpectrum::single_line(k_center, 1e-18, 1.0);
            let de = roughness_correction(&sigma, &kern, 1.0).unwrap();
            let local = g_small * 1e-18;
            assert!(
                de.abs() >= local.abs(),
                "|dE| = {de:e} under the local estimate {local:e} at k = {k_center:e}"
            );
        }
    }

    #[test]
    fn spectrum_outside_the_table_is_rejected() {
        let l = 200e-9;
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let kern = ResponseKernel::tabulate(
            &stack,
            KernelKind::Roughness,
            &[0.1 / l, 1.0 / l],
            &kernel_spec(),
        )
        .unwrap();
        let sigma = ProfileSpectrum::single_line(5.0 / l, 1e-18, 1.0);
        assert!(matches!(
            roughness_correction(&sigma, &kern, 1.0),
            Err(KernelError::SpectrumRange { .. })
        ));
    }

    fn demo_pair() -> CorrugationPair {
        CorrugationPair {
            a1: 14e-9,
            a2: 14e-9,
            lambda_c: 1.2e-6,
            b: 0.0,
            theta: 0.0,
            lx: 24e-6,
            ly: 24e-6,
        }
    }

    fn demo_kernel(l: f64) -> ResponseKernel {
        let perfect = PerfectReflector;
        let stack = MirrorStack::new(&perfect, &perfect, l);
        let pair = demo_pair();
        let k = pair.k_c();
        ResponseKernel::tabulate(
            &stack,
            KernelKind::Corrugation,
            &[0.5 * k, k, 2.0 * k],
            &kernel_spec(),
        )
        .unwrap()
    }

    #[test]
    fn lateral_energy_mismatch_structure() {
        let l = 1e-6;
        let kern = demo_kernel(l);
        let mut pair = demo_pair();
        let area = pair.lx * pair.ly;
        let scale = lateral_energy(&pair, &kern, area).unwrap().abs();
        // quarter-wavelength mismatch kills the cross energy
        pair.b = 0.25 * pair.lambda_c;
        assert!(lateral_energy(&pair, &kern, area).unwrap().abs() < 1e-12 * scale);
        // periodicity in b
        pair.b = 0.13 * pair.lambda_c;
        let e1 = lateral_energy(&pair, &kern, area).unwrap();
        pair.b += pair.lambda_c;
        let e2 = lateral_energy(&pair, &kern, area).unwrap();
        assert_relative_eq!(e1, e2, max_relative = 1e-9);
        // half-wavelength flips the sign
        pair.b = 0.0;
        let e0 = lateral_energy(&pair, &kern, area).unwrap();
        pair.b = 0.5 * pair.lambda_c;
        let eh = lateral_energy(&pair, &kern, area).unwrap();
        assert_relative_eq!(e0, -eh, max_relative = 1e-9);
    }

    #[test]
    fn lateral_force_equilibria_and_restoring_sign() {
        let l = 1e-6;
        let kern = demo_kernel(l);
        let mut pair = demo_pair();
        let area = pair.lx * pair.ly;
        assert_eq!(lateral_force_pp(&pair, &kern, area).unwrap(), 0.0);
        // maximal magnitude at quarter wavelength
        pair.b = 0.25 * pair.lambda_c;
        let fq = lateral_force_pp(&pair, &kern, area).unwrap().abs();
        pair.b = 0.5 * pair.lambda_c;
        assert!(lateral_force_pp(&pair, &kern, area).unwrap().abs() < 1e-12 * fq);
        pair.b = 0.1 * pair.lambda_c;
        assert!(lateral_force_pp(&pair, &kern, area).unwrap().abs() < fq);
        // small positive displacement: force opposes it (kernel is negative)
        pair.b = 0.01 * pair.lambda_c;
        assert!(lateral_force_pp(&pair, &kern, area).unwrap() < 0.0);
    }

    #[test]
    fn torque_energy_symmetries() {
        let l = 1e-6;
        let kern = demo_kernel(l);
        let mut pair = demo_pair();
        pair.theta = 3.3e-5;
        let e_plus = torque_energy_per_area(&pair, &kern).unwrap();
        pair.theta = -3.3e-5;
        let e_minus = torque_energy_per_area(&pair, &kern).unwrap();
        assert_relative_eq!(e_plus, e_minus, max_relative = 1e-12);
        // theta = 0 recovers the aligned energy per area
        pair.theta = 0.0;
        let aligned = torque_energy_per_area(&pair, &kern).unwrap();
        let area = pair.lx * pair.ly;
        assert_relative_eq!(
            aligned,
            lateral_energy(&pair, &kern, area).unwrap() / area,
            max_relative = 1e-12
        );
        // zero of the sinc envelope
        pair.theta = 2.0 * PI / (pair.k_c() * pair.ly);
        assert!(torque_energy_per_area(&pair, &kern).unwrap().abs() < 1e-12 * aligned.abs());
    }

    #[test]
    fn torque_is_odd_and_restoring() {
        let l = 1e-6;
        let kern = demo_kernel(l);
        let pair = demo_pair();
        assert_eq!(torque_per_area(&pair, &kern, 0.0).unwrap(), 0.0);
        let th = 2.0e-5;
        let tp = torque_per_area(&pair, &kern, th).unwrap();
        let tm = torque_per_area(&pair, &kern, -th).unwrap();
        assert_relative_eq!(tp, -tm, max_relative = 1e-12);
        // restoring: small misalignment is pushed back (G < 0, cos(kb) = 1)
        assert!(tp < 0.0);
    }

    #[test]
    fn max_torque_angle_matches_the_root_oracle() {
        // oracle: bisection on (2−x²)sin x − 2x cos x over [1.5, 2.5]
        let f = |x: f64| (2.0 - x * x) * x.sin() - 2.0 * x * x.cos();
        let (mut a, mut b) = (1.5f64, 2.5f64);
        assert!(f(a) * f(b) < 0.0);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let x_star = 0.5 * (a + b);
        let pair = demo_pair();
        let theta = max_torque_angle(&pair).unwrap();
        let want = 2.0 * x_star / (pair.k_c() * pair.ly);
        assert_relative_eq!(theta, want, max_relative = 1e-6);
        // the coefficient in units of lambda_c / L_y is close to 0.66
        let coeff = theta * pair.ly / pair.lambda_c;
        assert!((coeff - 0.66).abs() < 0.01, "coefficient {coeff}");
        // doubling L_y halves the angle
        let mut wide = pair;
        wide.ly *= 2.0;
        assert_relative_eq!(
            max_torque_angle(&wide).unwrap(),
            0.5 * theta,
            max_relative = 1e-9
        );
    }
}
