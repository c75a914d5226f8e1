//! Perturbative reflection operators of gently deformed mirrors.
//!
//! A mirror whose surface is z = h(r) scatters a plane wave (k, p) into
//! (k', p') with an amplitude that is, to first order, linear in the profile
//! Fourier component ĥ[k'−k]. This module supplies those first-order
//! amplitudes per unit ĥ, together with the diagonal second-order response
//! (two profile insertions ±q returning to the same mode), for two mirror
//! families: the perfect reflector and a dielectric described by any ε(iξ).
//!
//! Both follow from expanding the exact boundary conditions at the deformed
//! surface order by order in h (a Rayleigh expansion). The first-order
//! amplitudes are written in closed form; the second order is assembled and
//! solved numerically from the same mode tables, which keeps one source of
//! truth for the boundary algebra. Everything is evaluated on the imaginary
//! frequency axis where the amplitudes are real.
//!
//! Two exact anchors pin the normalization and are enforced by
//! [`validate_provider`]:
//! * specular limit: B(k,p ← k,p) = 2κ r_p(k), the derivative of the
//!   specular amplitude under a rigid displacement of the mirror;
//! * second order diagonal: C(k,p; q→0) = 4κ² r_p(k), the matching
//!   second-order term of the same displacement.

use crate::materials::{DielectricModel, ImaginaryFrequency};
use crate::reflection::Polarization;
use num_complex::Complex64;
use thiserror::Error;

/// Transverse wavevector in the mirror plane, rad/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KVec {
    pub x: f64,
    pub y: f64,
}

impl KVec {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn add(self, o: KVec) -> KVec {
        KVec::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: KVec) -> KVec {
        KVec::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, s: f64) -> KVec {
        KVec::new(s * self.x, s * self.y)
    }

    /// Unit direction; the x axis by convention for the zero vector, where
    /// the polarization basis is degenerate and any consistent choice gives
    /// the same polarization-summed observables.
    fn hat(self) -> (f64, f64) {
        let n = self.norm();
        if n < 1e-280 {
            (1.0, 0.0)
        } else {
            (self.x / n, self.y / n)
        }
    }
}

/// Which side of the cavity the mirror closes.
///
/// The upper mirror is the lower one rotated by π about an in-plane axis;
/// that proper rotation reverses the sense of azimuthal angles, so its
/// polarization-mixing amplitudes carry the opposite sign of sinφ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorSide {
    Lower,
    Upper,
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider '{provider}' violates its specular-limit contract: {detail}")]
    ContractViolation { provider: String, detail: String },
}

/// First- and second-order non-specular response of one mirror.
///
/// All wavevectors are physical (rad/m); `x` is ξ/c. Implementations must
/// satisfy the displacement anchors checked by [`validate_provider`].
pub trait PerturbationProvider: Sync {
    /// Identifier recorded in headers and cache keys.
    fn describe(&self) -> String;

    /// Specular amplitude r_p(k) at imaginary frequency.
    fn specular(&self, x: f64, k: f64, p: Polarization) -> f64;

    /// First-order amplitude for (inc_k, inc_p) → (out_k, out_p) per unit
    /// profile Fourier amplitude.
    fn first_order(
        &self,
        side: MirrorSide,
        x: f64,
        out_k: KVec,
        out_p: Polarization,
        inc_k: KVec,
        inc_p: Polarization,
    ) -> f64;

    /// Diagonal second-order response C(k, p; q): the coefficient of
    /// ĥ_q ĥ_{−q} in the specular amplitude of the deformed mirror.
    fn second_order_diag(&self, x: f64, k: KVec, q: KVec, p: Polarization) -> f64;
}

/// cos and sin of (incident azimuth − outgoing azimuth).
fn azimuth_pair(out_hat: (f64, f64), inc_hat: (f64, f64)) -> (f64, f64) {
    let cos = out_hat.0 * inc_hat.0 + out_hat.1 * inc_hat.1;
    let sin = out_hat.0 * inc_hat.1 - out_hat.1 * inc_hat.0;
    (cos, sin)
}

fn kappa_of(x: f64, k: f64) -> f64 {
    k.hypot(x)
}

// ---------------------------------------------------------------------------
// perfect reflector
// ---------------------------------------------------------------------------

/// The ε → ∞ mirror: r_TE = −1, r_TM = +1 and the corresponding
/// boundary-perturbation amplitudes.
#[derive(Debug, Clone, Default)]
pub struct PerfectReflector;

impl PerturbationProvider for PerfectReflector {
    fn describe(&self) -> String {
        "perfect-reflector".into()
    }

    fn specular(&self, _x: f64, _k: f64, p: Polarization) -> f64 {
        match p {
            Polarization::Te => -1.0,
            Polarization::Tm => 1.0,
        }
    }

    fn first_order(
        &self,
        side: MirrorSide,
        x: f64,
        out_k: KVec,
        out_p: Polarization,
        inc_k: KVec,
        inc_p: Polarization,
    ) -> f64 {
        let k_in = inc_k.norm();
        let k_out = out_k.norm();
        let kap_in = kappa_of(x, k_in);
        let kap_out = kappa_of(x, k_out);
        let (cphi, mut sphi) = azimuth_pair(out_k.hat(), inc_k.hat());
        if side == MirrorSide::Upper {
            sphi = -sphi;
        }
        match (out_p, inc_p) {
            (Polarization::Te, Polarization::Te) => -2.0 * kap_in * cphi,
            (Polarization::Tm, Polarization::Te) => 2.0 * kap_in * x * sphi / kap_out,
            (Polarization::Te, Polarization::Tm) => 2.0 * x * sphi,
            (Polarization::Tm, Polarization::Tm) => {
                2.0 * (k_in * k_out + x * x * cphi) / kap_out
            }
        }
    }

    fn second_order_diag(&self, x: f64, k: KVec, q: KVec, p: Polarization) -> f64 {
        // Assemble the order-h² tangential-field condition at the flat
        // reference plane. Only vacuum modes exist; for the perfect mirror
        // the second z-derivative of the zeroth field's tangential part
        // vanishes, so the sources are built from the first-order fields
        // alone. All factors of i cancel on the imaginary axis, leaving
        // real arithmetic.
        let k_hat = k.hat();
        let e_te_hat = (-k_hat.1, k_hat.0); // ẑ × k̂
        let kap = kappa_of(x, k.norm());

        let mut source = [0.0f64; 2]; // tangential components (x, y)
        let mut ez_weighted = 0.0f64; // Σ_s (−s) Ez¹(s) · (combined with q below)
        for s in [1.0f64, -1.0] {
            let ks = k.add(q.scale(s));
            let ks_norm = ks.norm();
            let ks_hat = ks.hat();
            let kap_s = kappa_of(x, ks_norm);
            let b_te = self.first_order(MirrorSide::Lower, x, ks, Polarization::Te, k, p);
            let b_tm = self.first_order(MirrorSide::Lower, x, ks, Polarization::Tm, k, p);
            // − Σ_s ∂_z E¹(s)_tan  →  + Σ_s κ_s [b_TE ê_TE + b_TM (κ_s/x) k̂_s]
            let te_hat_s = (-ks_hat.1, ks_hat.0);
            source[0] += kap_s * (b_te * te_hat_s.0 + b_tm * (kap_s / x) * ks_hat.0);
            source[1] += kap_s * (b_te * te_hat_s.1 + b_tm * (kap_s / x) * ks_hat.1);
            // E¹(s)_z carries −k_s/K per unit TM amplitude; the i's of the
            // gradient and of 1/K cancel into the real combination below
            ez_weighted += s * ks_norm * b_tm;
        }
        // − i q (E¹(−)_z − E¹(+)_z) → −(q/x) (k₊ b₊ − k₋ b₋) along q̂
        source[0] -= q.x * ez_weighted / x;
        source[1] -= q.y * ez_weighted / x;

        match p {
            Polarization::Te => source[0] * e_te_hat.0 + source[1] * e_te_hat.1,
            Polarization::Tm => (x / kap) * (source[0] * k_hat.0 + source[1] * k_hat.1),
        }
    }
}

// ---------------------------------------------------------------------------
// dielectric mirror
// ---------------------------------------------------------------------------

/// A bulk mirror with the dielectric response `model`, matched across the
/// deformed vacuum-medium interface.
#[derive(Debug, Clone)]
pub struct DielectricMirror {
    pub model: DielectricModel,
}

impl DielectricMirror {
    pub fn new(model: DielectricModel) -> Self {
        Self { model }
    }

    fn eps(&self, x: f64) -> f64 {
        let xi = ImaginaryFrequency::new(x * crate::constants::SPEED_OF_LIGHT)
            .expect("x must be finite and positive");
        self.model
            .eps(xi)
            .expect("dielectric model must be evaluable at xi > 0")
    }

    fn kappa_m(x: f64, k: f64, eps: f64) -> f64 {
        (k * k + eps * x * x).sqrt()
    }

    fn specular_with_eps(x: f64, k: f64, eps: f64, p: Polarization) -> f64 {
        let kap = kappa_of(x, k);
        let kap_m = Self::kappa_m(x, k, eps);
        match p {
            Polarization::Te => (kap - kap_m) / (kap + kap_m),
            Polarization::Tm => (eps * kap - kap_m) / (eps * kap + kap_m),
        }
    }
}

impl PerturbationProvider for DielectricMirror {
    fn describe(&self) -> String {
        format!("dielectric-mirror[{}]", self.model.describe())
    }

    fn specular(&self, x: f64, k: f64, p: Polarization) -> f64 {
        Self::specular_with_eps(x, k, self.eps(x), p)
    }

    fn first_order(
        &self,
        side: MirrorSide,
        x: f64,
        out_k: KVec,
        out_p: Polarization,
        inc_k: KVec,
        inc_p: Polarization,
    ) -> f64 {
        let eps = self.eps(x);
        let k_in = inc_k.norm();
        let k_out = out_k.norm();
        let kap_m_in = Self::kappa_m(x, k_in, eps);
        let kap_out = kappa_of(x, k_out);
        let kap_m_out = Self::kappa_m(x, k_out, eps);
        let (cphi, mut sphi) = azimuth_pair(out_k.hat(), inc_k.hat());
        if side == MirrorSide::Upper {
            sphi = -sphi;
        }
        let em1 = eps - 1.0;
        match (out_p, inc_p) {
            (Polarization::Te, Polarization::Te) => {
                let one_plus_r =
                    1.0 + Self::specular_with_eps(x, k_in, eps, Polarization::Te);
                -one_plus_r * em1 * x * x * cphi / (kap_out + kap_m_out)
            }
            (Polarization::Tm, Polarization::Te) => {
                let one_plus_r =
                    1.0 + Self::specular_with_eps(x, k_in, eps, Polarization::Te);
                one_plus_r * em1 * x * kap_m_out * sphi / (kap_m_out + eps * kap_out)
            }
            (Polarization::Te, Polarization::Tm) => {
                let one_plus_r =
                    1.0 + Self::specular_with_eps(x, k_in, eps, Polarization::Tm);
                one_plus_r * em1 * kap_m_in * x * sphi / (eps * (kap_out + kap_m_out))
            }
            (Polarization::Tm, Polarization::Tm) => {
                let one_plus_r =
                    1.0 + Self::specular_with_eps(x, k_in, eps, Polarization::Tm);
                one_plus_r * em1 * (k_in * k_out + kap_m_in * kap_m_out * cphi / eps)
                    / (eps * kap_out + kap_m_out)
            }
        }
    }

    fn second_order_diag(&self, x: f64, k: KVec, q: KVec, p: Polarization) -> f64 {
        let eps = self.eps(x);
        let solver = BoundarySolver::new(x, eps);
        solver.second_order_diag(k, q, p)
    }
}

// ---------------------------------------------------------------------------
// numeric boundary-condition assembly (shared by validation and order 2)
// ---------------------------------------------------------------------------

type C64 = Complex64;

/// Tangential/normal field components of one plane-wave mode per unit
/// amplitude, with the z-dependence factor dz: fields ∝ e^{i·kz_signed·z},
/// so each ∂_z multiplies by dz = i·kz_signed.
#[derive(Clone, Copy)]
struct ModeFields {
    e_tan: [C64; 2],
    e_z: C64,
    h_tan: [C64; 2],
    h_z: C64,
    dz: C64,
}

#[derive(Clone, Copy)]
enum Medium {
    Vacuum,
    Dielectric,
}

#[derive(Clone, Copy)]
enum Direction {
    Up,
    Down,
}

/// Order-by-order boundary matcher for a flat dielectric interface,
/// evaluated on the imaginary axis through k_z = iκ, K = i·x.
struct BoundarySolver {
    x: f64,
    eps: f64,
    big_k: C64,    // vacuum wavenumber ω/c continued to i·x
    n_med: f64,    // √ε
}

impl BoundarySolver {
    fn new(x: f64, eps: f64) -> Self {
        Self {
            x,
            eps,
            big_k: C64::new(0.0, x),
            n_med: eps.sqrt(),
        }
    }

    fn kz(&self, k: f64, medium: Medium, dir: Direction) -> C64 {
        let kap = match medium {
            Medium::Vacuum => kappa_of(self.x, k),
            Medium::Dielectric => DielectricMirror::kappa_m(self.x, k, self.eps),
        };
        let kz = C64::new(0.0, kap);
        match dir {
            Direction::Up => kz,
            Direction::Down => -kz,
        }
    }

    fn mode(&self, kv: KVec, medium: Medium, dir: Direction, p: Polarization) -> ModeFields {
        let k = kv.norm();
        let (hx, hy) = kv.hat();
        let te_hat = (-hy, hx);
        let kz_signed = self.kz(k, medium, dir);
        let n = match medium {
            Medium::Vacuum => 1.0,
            Medium::Dielectric => self.n_med,
        };
        let nk = self.big_k * n;
        match p {
            Polarization::Te => ModeFields {
                e_tan: [C64::new(te_hat.0, 0.0), C64::new(te_hat.1, 0.0)],
                e_z: C64::new(0.0, 0.0),
                h_tan: [-kz_signed * hx, -kz_signed * hy],
                h_z: C64::new(k, 0.0),
                dz: C64::new(0.0, 1.0) * kz_signed,
            },
            Polarization::Tm => {
                let et = kz_signed / nk;
                ModeFields {
                    e_tan: [et * hx, et * hy],
                    e_z: -C64::new(k, 0.0) / nk,
                    h_tan: [nk * te_hat.0, nk * te_hat.1],
                    h_z: C64::new(0.0, 0.0),
                    dz: C64::new(0.0, 1.0) * kz_signed,
                }
            }
        }
    }

    /// Specular pair (r_p, t_p) feeding the zeroth-order bundles.
    fn zeroth_amplitudes(&self, k: f64, p: Polarization) -> (f64, f64) {
        let r = DielectricMirror::specular_with_eps(self.x, k, self.eps, p);
        let t = match p {
            Polarization::Te => 1.0 + r,
            Polarization::Tm => (1.0 + r) / self.n_med,
        };
        (r, t)
    }

    /// Solve the tangential matching at outgoing mode `kv` for given source
    /// vectors; returns (b_TE, b_TM, c_TE, c_TM): vacuum-up and medium-down
    /// amplitudes.
    fn solve(&self, kv: KVec, src_e: [C64; 2], src_h: [C64; 2]) -> [C64; 4] {
        let k = kv.norm();
        let (hx, hy) = kv.hat();
        let te_hat = (-hy, hx);
        let kz = self.kz(k, Medium::Vacuum, Direction::Up);
        let kzm = -self.kz(k, Medium::Dielectric, Direction::Down); // +iκ_m
        let se_t = src_e[0] * te_hat.0 + src_e[1] * te_hat.1;
        let se_k = src_e[0] * hx + src_e[1] * hy;
        let sh_t = src_h[0] * te_hat.0 + src_h[1] * te_hat.1;
        let sh_k = src_h[0] * hx + src_h[1] * hy;

        // TE pair: b − c = se_t ; −b·kz − c·kzm = sh_k
        let b_te = (se_t * kzm - sh_k) / (kz + kzm);
        let c_te = b_te - se_t;
        // TM pair: b·kz/K + c·kzm/(√εK) = se_k ; b·K − c·√εK = sh_t
        let eps = C64::new(self.eps, 0.0);
        let b_tm = (eps * self.big_k * se_k + kzm * sh_t / self.big_k) / (eps * kz + kzm);
        let c_tm = (b_tm * self.big_k - sh_t) / (self.big_k * self.n_med);
        [b_te, b_tm, c_te, c_tm]
    }

    /// First-order amplitudes for incident (k, p) and transfer `q_signed`
    /// (outgoing mode k + q_signed), solved from the numeric assembly.
    fn first_order_all(&self, k: KVec, p: Polarization, q_signed: KVec) -> [C64; 4] {
        let kn = k.norm();
        let (r, t) = self.zeroth_amplitudes(kn, p);
        let inc = self.mode(k, Medium::Vacuum, Direction::Down, p);
        let refl = self.mode(k, Medium::Vacuum, Direction::Up, p);
        let tran = self.mode(k, Medium::Dielectric, Direction::Down, p);

        // Δ of h·∂_z(tangential) and of E_z, H_z at z = 0
        let mut d_dz_e = [C64::new(0.0, 0.0); 2];
        let mut d_dz_h = [C64::new(0.0, 0.0); 2];
        let mut d_ez = C64::new(0.0, 0.0);
        let mut d_hz = C64::new(0.0, 0.0);
        let above: [(&ModeFields, f64); 2] = [(&inc, 1.0), (&refl, r)];
        for (m, a) in above {
            for i in 0..2 {
                d_dz_e[i] += m.dz * m.e_tan[i] * a;
                d_dz_h[i] += m.dz * m.h_tan[i] * a;
            }
            d_ez += m.e_z * a;
            d_hz += m.h_z * a;
        }
        for i in 0..2 {
            d_dz_e[i] -= tran.dz * tran.e_tan[i] * t;
            d_dz_h[i] -= tran.dz * tran.h_tan[i] * t;
        }
        d_ez -= tran.e_z * t;
        d_hz -= tran.h_z * t;

        // sources: −h Δ∂_z T_tan − ΔT_z ∇h, with ĥ = 1 and ∇h = i q_signed
        let grad = [
            C64::new(0.0, q_signed.x),
            C64::new(0.0, q_signed.y),
        ];
        let src_e = [-d_dz_e[0] - d_ez * grad[0], -d_dz_e[1] - d_ez * grad[1]];
        let src_h = [-d_dz_h[0] - d_hz * grad[0], -d_dz_h[1] - d_hz * grad[1]];
        self.solve(k.add(q_signed), src_e, src_h)
    }

    /// Diagonal second-order specular response per ĥ_q ĥ_{−q}.
    fn second_order_diag(&self, k: KVec, q: KVec, p: Polarization) -> f64 {
        let kn = k.norm();
        let (r, t) = self.zeroth_amplitudes(kn, p);
        let inc = self.mode(k, Medium::Vacuum, Direction::Down, p);
        let refl = self.mode(k, Medium::Vacuum, Direction::Up, p);
        let tran = self.mode(k, Medium::Dielectric, Direction::Down, p);

        // Δ ∂_z² of the zeroth tangential fields
        let mut d2_e = [C64::new(0.0, 0.0); 2];
        let mut d2_h = [C64::new(0.0, 0.0); 2];
        let above: [(&ModeFields, f64); 2] = [(&inc, 1.0), (&refl, r)];
        for (m, a) in above {
            let w = m.dz * m.dz * a;
            for i in 0..2 {
                d2_e[i] += w * m.e_tan[i];
                d2_h[i] += w * m.h_tan[i];
            }
        }
        let wt = tran.dz * tran.dz * t;
        for i in 0..2 {
            d2_e[i] -= wt * tran.e_tan[i];
            d2_h[i] -= wt * tran.h_tan[i];
        }

        let mut src_e = [-d2_e[0], -d2_e[1]];
        let mut src_h = [-d2_h[0], -d2_h[1]];

        // first-order fields at k ± q contribute −Σ_s Δ∂_z T¹(s)_tan and the
        // gradient term −i q (T¹(−)_z − T¹(+)_z)
        for s in [1.0f64, -1.0] {
            let qs = q.scale(s);
            let ks = k.add(qs);
            let amps = self.first_order_all(k, p, qs);
            let up_te = self.mode(ks, Medium::Vacuum, Direction::Up, Polarization::Te);
            let up_tm = self.mode(ks, Medium::Vacuum, Direction::Up, Polarization::Tm);
            let dn_te = self.mode(ks, Medium::Dielectric, Direction::Down, Polarization::Te);
            let dn_tm = self.mode(ks, Medium::Dielectric, Direction::Down, Polarization::Tm);
            let stack: [(&ModeFields, C64, f64); 4] = [
                (&up_te, amps[0], 1.0),
                (&up_tm, amps[1], 1.0),
                (&dn_te, amps[2], -1.0),
                (&dn_tm, amps[3], -1.0),
            ];
            let mut d_ez = C64::new(0.0, 0.0);
            let mut d_hz = C64::new(0.0, 0.0);
            for (m, a, sign) in stack {
                let w = a * sign;
                for i in 0..2 {
                    src_e[i] -= m.dz * m.e_tan[i] * w;
                    src_h[i] -= m.dz * m.h_tan[i] * w;
                }
                d_ez += m.e_z * w;
                d_hz += m.h_z * w;
            }
            // Σ_s (−s) ΔT¹(s)_z × (−i q) accumulated per s
            let minus_iq = [C64::new(0.0, -q.x), C64::new(0.0, -q.y)];
            for i in 0..2 {
                src_e[i] += minus_iq[i] * d_ez * (-s);
                src_h[i] += minus_iq[i] * d_hz * (-s);
            }
        }

        let sol = self.solve(k, src_e, src_h);
        let val = match p {
            Polarization::Te => sol[0],
            Polarization::Tm => sol[1],
        };
        val.re
    }
}

/// Probe a provider against the rigid-displacement anchors. Returns an
/// error when either the first-order specular limit 2κ r_p or the diagonal
/// second-order limit 4κ² r_p is violated beyond 0.5%.
pub fn validate_provider(
    provider: &dyn PerturbationProvider,
    x: f64,
    k_probe: &[f64],
) -> Result<(), ProviderError> {
    let tol = 5e-3;
    for &k in k_probe {
        let kv = KVec::new(k, 0.0);
        let kap = kappa_of(x, k);
        let tiny = KVec::new(1e-7 * (k + x), 0.0);
        for p in Polarization::BOTH {
            let r = provider.specular(x, k, p);
            let want_b = 2.0 * kap * r;
            let got_b = provider.first_order(MirrorSide::Lower, x, kv.add(tiny), p, kv, p);
            if (got_b - want_b).abs() > tol * want_b.abs().max(1e-300) {
                return Err(ProviderError::ContractViolation {
                    provider: provider.describe(),
                    detail: format!(
                        "first order at k={k:e}, {p:?}: got {got_b:e}, displacement demands {want_b:e}"
                    ),
                });
            }
            let want_c = 4.0 * kap * kap * r;
            let got_c = provider.second_order_diag(x, kv, tiny, p);
            if (got_c - want_c).abs() > tol * want_c.abs().max(1e-300) {
                return Err(ProviderError::ContractViolation {
                    provider: provider.describe(),
                    detail: format!(
                        "second order at k={k:e}, {p:?}: got {got_c:e}, displacement demands {want_c:e}"
                    ),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gold() -> DielectricMirror {
        DielectricMirror::new(DielectricModel::plasma_from_wavelength(136e-9))
    }

    #[test]
    fn perfect_specular_limits_match_displacement() {
        let p = PerfectReflector;
        validate_provider(&p, 3.3e6, &[1e5, 2e6, 9e6]).unwrap();
    }

    #[test]
    fn plasma_specular_limits_match_displacement() {
        let p = gold();
        validate_provider(&p, 3.3e6, &[1e5, 2e6, 9e6]).unwrap();
        validate_provider(&p, 4.1e7, &[1e6, 3e7]).unwrap();
    }

    #[test]
    fn oscillator_specular_limits_match_displacement() {
        let p = DielectricMirror::new(DielectricModel::oscillator_from_wavelength(
            11.87, 286e-9,
        ));
        validate_provider(&p, 5e6, &[1e5, 5e6, 2e7]).unwrap();
    }

    #[test]
    fn closed_form_first_order_matches_numeric_solver() {
        // the closed forms must agree with a direct numeric solve of the
        // same boundary conditions, polarization mixing and signs included
        let mirror = gold();
        let x = 2.7e6;
        let eps = mirror.eps(x);
        let solver = BoundarySolver::new(x, eps);
        let cases = [
            (KVec::new(3e6, 1e6), KVec::new(1.2e6, -2.0e6)),
            (KVec::new(5e5, -4e6), KVec::new(2.5e6, 3.1e6)),
            (KVec::new(1e6, 0.0), KVec::new(0.0, 2e6)),
        ];
        for (k, q) in cases {
            for inc_p in Polarization::BOTH {
                let amps = solver.first_order_all(k, inc_p, q);
                let out = k.add(q);
                for (slot, out_p) in [(0usize, Polarization::Te), (1, Polarization::Tm)] {
                    let closed =
                        mirror.first_order(MirrorSide::Lower, x, out, out_p, k, inc_p);
                    let numeric = amps[slot];
                    assert!(
                        numeric.im.abs() <= 1e-9 * numeric.re.abs().max(1e-12),
                        "spurious imaginary part {numeric:?}"
                    );
                    assert_relative_eq!(closed, numeric.re, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn perfect_is_the_large_eps_limit_of_dielectric() {
        let perfect = PerfectReflector;
        let big = DielectricMirror::new(DielectricModel::Oscillator {
            eps_static: 1e8,
            omega_0: 1e30, // effectively constant huge eps over the probe range
        });
        let x = 4e6;
        let k = KVec::new(2e6, 5e5);
        let q = KVec::new(1.5e6, -8e5);
        let out = k.add(q);
        for inc_p in Polarization::BOTH {
            for out_p in Polarization::BOTH {
                let a = perfect.first_order(MirrorSide::Lower, x, out, out_p, k, inc_p);
                let b = big.first_order(MirrorSide::Lower, x, out, out_p, k, inc_p);
                assert_relative_eq!(a, b, max_relative = 2e-3);
            }
            let ca = perfect.second_order_diag(x, k, q, inc_p);
            let cb = big.second_order_diag(x, k, q, inc_p);
            assert_relative_eq!(ca, cb, max_relative = 2e-3);
        }
    }

    #[test]
    fn upper_side_flips_polarization_mixing_only() {
        let mirror = gold();
        let x = 3e6;
        let k = KVec::new(2e6, 1e6);
        let out = KVec::new(3e6, -1e6);
        for (ip, op) in [
            (Polarization::Te, Polarization::Te),
            (Polarization::Tm, Polarization::Tm),
        ] {
            let lo = mirror.first_order(MirrorSide::Lower, x, out, op, k, ip);
            let up = mirror.first_order(MirrorSide::Upper, x, out, op, k, ip);
            assert_eq!(lo.to_bits(), up.to_bits());
        }
        for (ip, op) in [
            (Polarization::Te, Polarization::Tm),
            (Polarization::Tm, Polarization::Te),
        ] {
            let lo = mirror.first_order(MirrorSide::Lower, x, out, op, k, ip);
            let up = mirror.first_order(MirrorSide::Upper, x, out, op, k, ip);
            assert_relative_eq!(lo, -up, max_relative = 1e-14);
        }
    }

    #[test]
    fn second_order_is_symmetric_in_q() {
        let mirror = gold();
        let x = 2e6;
        let k = KVec::new(1e6, 2e6);
        let q = KVec::new(3e6, -5e5);
        for p in Polarization::BOTH {
            let a = mirror.second_order_diag(x, k, q, p);
            let b = mirror.second_order_diag(x, k, q.scale(-1.0), p);
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn broken_provider_is_rejected() {
        struct Scaled(PerfectReflector);
        impl PerturbationProvider for Scaled {
            fn describe(&self) -> String {
                "scaled".into()
            }
            fn specular(&self, x: f64, k: f64, p: Polarization) -> f64 {
                self.0.specular(x, k, p)
            }
            fn first_order(
                &self,
                side: MirrorSide,
                x: f64,
                out_k: KVec,
                out_p: Polarization,
                inc_k: KVec,
                inc_p: Polarization,
            ) -> f64 {
                1.07 * self.0.first_order(side, x, out_k, out_p, inc_k, inc_p)
            }
            fn second_order_diag(&self, x: f64, k: KVec, q: KVec, p: Polarization) -> f64 {
                self.0.second_order_diag(x, k, q, p)
            }
        }
        let err = validate_provider(&Scaled(PerfectReflector), 1e6, &[1e6]).unwrap_err();
        assert!(matches!(err, ProviderError::ContractViolation { .. }));
    }
}
