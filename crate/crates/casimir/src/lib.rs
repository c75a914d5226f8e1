//! Casimir forces and energies between real mirrors.
//!
//! The crate evaluates the scattering (Lifshitz) integrals for the Casimir
//! force and energy between plane mirrors with arbitrary dielectric response,
//! covers finite-thickness slabs, proximity-force averaging over deformed
//! surfaces, and the second-order response kernels that govern roughness
//! corrections, the lateral force and the torque between corrugated plates.
//!
//! A guided tour with runnable examples lives in the `book/` directory of the
//! repository; the same snippets are compiled and executed as doc-tests (see
//! [`book`]).

pub mod constants;
pub mod lifshitz;
pub mod materials;
pub mod nonspecular;
pub mod pfa;
pub mod quad;
pub mod reflection;

pub use lifshitz::{
    casimir_energy, casimir_force, casimir_ideal_energy, casimir_ideal_force, energy_curvature,
    eta_factors, CasimirResult, CurvatureResult, EtaFactors, LifshitzError, QuadratureSpec,
};
pub use materials::{
    eps_drude, eps_oscillator, eps_plasma, kk_transform, load_optical_data, parse_optical_data,
    DielectricModel, ImaginaryFrequency, MaterialError, OpticalDataTable, TabulatedEps,
};
pub use nonspecular::rayleigh::{
    DielectricMirror, KVec, MirrorSide, PerfectReflector, PerturbationProvider, ProviderError,
};
pub use nonspecular::{
    kernel, lateral_energy, lateral_force_pp, lateral_force_ps, max_torque_angle,
    roughness_correction, torque_energy_per_area, torque_per_area, CorrugationPair, KernelError,
    KernelKind, KernelSample, MirrorStack, PsLateralForce, ResponseKernel,
};
pub use pfa::{
    load_profile, mean_square_sum, parse_profile, pfa_energy, pfa_second_order, plane_sphere_force,
    profile_spectrum, MemoizedEnergy, PfaEnergy, PfaError, PlaneSphereForce, ProfileGrid,
    ProfileSpectrum, SpectralLine, SurfaceProfile,
};
pub use quad::{QuadError, QuadResult, QuadTarget};
pub use reflection::{
    field_ratio_g, fresnel, kappa, open_loop_rho, perfect_amplitude, slab_amplitude, CavityConfig,
    MirrorSpec, Polarization, ReflectionError, Thickness, TransverseMode};
