//! Specular reflection amplitudes on the imaginary frequency axis.
//!
//! Bulk mirrors follow the Fresnel laws at the vacuum-medium interface,
//! finite slabs a Fabry-Perot combination of the two interface reflections,
//! and perfect reflectors the ε → ∞ limit (r_TE = −1, r_TM = +1). All
//! amplitudes are real on the imaginary axis and bounded by one in magnitude
//! for any passive medium, which guarantees convergence of the scattering
//! integrals downstream.

use crate::constants::SPEED_OF_LIGHT;
use crate::materials::{DielectricModel, ImaginaryFrequency, MaterialError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReflectionError {
    #[error("kappa is undefined at xi = k = 0")]
    ZeroMode,
    #[error("field ratio g is singular at rho = 1")]
    ResonantCavity,
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Field polarization, conserved in specular scattering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];
}

/// A specular field mode: transverse wavevector modulus, imaginary
/// frequency and polarization.
#[derive(Debug, Clone, Copy)]
pub struct TransverseMode {
    /// transverse wavevector modulus, rad/m
    pub k: f64,
    pub xi: ImaginaryFrequency,
    pub p: Polarization,
}

/// Longitudinal wavevector κ = sqrt(k² + ξ²/c²) on the imaginary axis.
pub fn kappa(xi: ImaginaryFrequency, k: f64) -> Result<f64, ReflectionError> {
    let x = xi.value();
    if x == 0.0 && k == 0.0 {
        return Err(ReflectionError::ZeroMode);
    }
    Ok((k * k + (x / SPEED_OF_LIGHT) * (x / SPEED_OF_LIGHT)).sqrt())
}

/// Core Fresnel form shared by the physical and dimensionless paths.
///
/// `w` = sqrt(ξ²(ε−1) + c²κ²) and `ck` = cκ, in any common unit.
pub(crate) fn fresnel_from_w(p: Polarization, w: f64, ck: f64, eps: f64) -> f64 {
    match p {
        Polarization::Te => -(w - ck) / (w + ck),
        Polarization::Tm => -(w - ck * eps) / (w + ck * eps),
    }
}

/// Bulk Fresnel reflection amplitude at imaginary frequency.
pub fn fresnel(mode: TransverseMode, eps: f64) -> Result<f64, ReflectionError> {
    let x = mode.xi.value();
    let kap = kappa(mode.xi, mode.k)?;
    let ck = SPEED_OF_LIGHT * kap;
    let w = (x * x * (eps - 1.0) + ck * ck).sqrt();
    Ok(fresnel_from_w(mode.p, w, ck, eps))
}

/// Slab optical depth exponent handling: e^{-2δ} flushed to zero once the
/// exponent would underflow, so the slab ratio never produces NaN.
pub(crate) fn exp_neg_two_delta(delta: f64) -> f64 {
    if delta > 350.0 {
        0.0
    } else {
        (-2.0 * delta).exp()
    }
}

pub(crate) fn slab_from_bulk(r: f64, delta: f64) -> f64 {
    let e = exp_neg_two_delta(delta);
    r * (1.0 - e) / (1.0 - r * r * e)
}

/// Reflection amplitude of a slab of thickness `d` (m) through the
/// Fabry-Perot combination of its two interfaces.
pub fn slab_amplitude(mode: TransverseMode, eps: f64, d: f64) -> Result<f64, ReflectionError> {
    let x = mode.xi.value();
    let kap = kappa(mode.xi, mode.k)?;
    let ck = SPEED_OF_LIGHT * kap;
    let w = (x * x * (eps - 1.0) + ck * ck).sqrt();
    let r = fresnel_from_w(mode.p, w, ck, eps);
    let delta = d / SPEED_OF_LIGHT * w;
    Ok(slab_from_bulk(r, delta))
}

/// Perfect-reflector amplitudes, the ε → ∞ limit of the Fresnel laws.
pub fn perfect_amplitude(p: Polarization) -> f64 {
    match p {
        Polarization::Te => -1.0,
        Polarization::Tm => 1.0,
    }
}

/// Mirror thickness: optically thick bulk or a slab of thickness D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thickness {
    Bulk,
    Slab { d: f64 },
}

/// One mirror of the cavity: a dielectric model plus its thickness, or a
/// perfect reflector.
#[derive(Debug, Clone)]
pub struct MirrorSpec {
    material: Option<(DielectricModel, Thickness)>,
}

impl MirrorSpec {
    pub fn perfect() -> Self {
        Self { material: None }
    }

    pub fn bulk(model: DielectricModel) -> Self {
        Self {
            material: Some((model, Thickness::Bulk)),
        }
    }

    pub fn slab(model: DielectricModel, d: f64) -> Self {
        assert!(d > 0.0, "slab thickness must be positive");
        Self {
            material: Some((model, Thickness::Slab { d })),
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.material.is_none()
    }

    pub fn model(&self) -> Option<&DielectricModel> {
        self.material.as_ref().map(|(m, _)| m)
    }

    pub fn thickness(&self) -> Option<Thickness> {
        self.material.as_ref().map(|(_, t)| *t)
    }

    /// Reflection amplitude of this mirror for the given mode.
    pub fn amplitude(&self, mode: TransverseMode) -> Result<f64, ReflectionError> {
        match &self.material {
            None => Ok(perfect_amplitude(mode.p)),
            Some((model, thick)) => {
                let eps = model.eps(mode.xi)?;
                match thick {
                    Thickness::Bulk => fresnel(mode, eps),
                    Thickness::Slab { d } => slab_amplitude(mode, eps, *d),
                }
            }
        }
    }

    /// Amplitude in the scaled variables used by the quadrature engine:
    /// u = ξL/c, v = κL, with `length_scale` = L.
    pub(crate) fn amplitude_scaled(
        &self,
        p: Polarization,
        u: f64,
        v: f64,
        eps: Option<f64>,
        length_scale: f64,
    ) -> f64 {
        match &self.material {
            None => perfect_amplitude(p),
            Some((_, thick)) => {
                let eps = eps.expect("material mirror requires eps");
                let w = (u * u * (eps - 1.0) + v * v).sqrt();
                let r = fresnel_from_w(p, w, v, eps);
                match thick {
                    Thickness::Bulk => r,
                    Thickness::Slab { d } => slab_from_bulk(r, d / length_scale * w),
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.material {
            None => "perfect".into(),
            Some((m, Thickness::Bulk)) => format!("bulk[{}]", m.describe()),
            Some((m, Thickness::Slab { d })) => format!("slab[D={d:.9e},{}]", m.describe()),
        }
    }
}

/// The plane-plane Fabry-Perot cavity: two mirrors, separation and area.
#[derive(Debug, Clone)]
pub struct CavityConfig {
    pub mirror1: MirrorSpec,
    pub mirror2: MirrorSpec,
    /// separation, m
    pub length: f64,
    /// mirror area, m² (assumed large against L²)
    pub area: f64,
}

impl CavityConfig {
    pub fn new(mirror1: MirrorSpec, mirror2: MirrorSpec, length: f64, area: f64) -> Self {
        assert!(length > 0.0, "separation must be positive");
        assert!(area > 0.0, "area must be positive");
        Self {
            mirror1,
            mirror2,
            length,
            area,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "mirror1={} mirror2={} L={:.9e} A={:.9e}",
            self.mirror1.describe(),
            self.mirror2.describe(),
            self.length,
            self.area
        )
    }
}

/// Open-loop function ρ = r₁ r₂ e^{−2κL} of the cavity for one mode.
pub fn open_loop_rho(cavity: &CavityConfig, mode: TransverseMode) -> Result<f64, ReflectionError> {
    let r1 = cavity.mirror1.amplitude(mode)?;
    let r2 = cavity.mirror2.amplitude(mode)?;
    let kap = kappa(mode.xi, mode.k)?;
    Ok(r1 * r2 * (-2.0 * kap * cavity.length).exp())
}

/// Intracavity-to-free field energy ratio g = (1−|ρ|²)/|1−ρ|² for a
/// real-frequency open-loop value. Diagnostic only.
pub fn field_ratio_g(rho: Complex64) -> Result<f64, ReflectionError> {
    let denom = (Complex64::new(1.0, 0.0) - rho).norm_sqr();
    if denom == 0.0 {
        return Err(ReflectionError::ResonantCavity);
    }
    Ok((1.0 - rho.norm_sqr()) / denom)
}
