//! Adaptive one-dimensional quadrature on finite intervals.
//!
//! The rule is the embedded 7-point Gauss / 15-point Kronrod pair familiar
//! from QUADPACK, driven by greedy bisection of the interval with the largest
//! error estimate. All nodes are interior, so integrands may be singular (or
//! merely undefined) at the endpoints as long as the integral converges.
//!
//! Determinism: interval selection breaks ties on insertion order and the
//! weighted sums run in fixed node order, so a given integrand always yields
//! bitwise identical results. The `*_par` entry point evaluates the fifteen
//! nodes of each interval through rayon but reduces them in index order,
//! which keeps results independent of the worker count.

use rayon::prelude::*;
use thiserror::Error;

/// Kronrod abscissae for the interval [-1, 1], positive half (x7 = 0).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (odd Kronrod nodes).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Identifier of the quadrature rule, recorded in output headers.
pub const SCHEME: &str = "adaptive-gauss-kronrod-7-15";

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge within {evals} evaluations; best estimate {estimate:e} with error bound {error:e}")]
    NonConvergence {
        estimate: f64,
        error: f64,
        evals: usize,
    },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

/// Converged integral value with an error bound and the evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub evals: usize,
}

/// Requested accuracy for an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadTarget {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl QuadTarget {
    pub fn new(rel_tol: f64, abs_tol: f64, max_evals: usize) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_evals,
        }
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadTarget {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evals: 20_000_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One G7K15 evaluation over [a, b] from pre-computed node values.
///
/// `fv[i]` must hold f at the nodes ordered: 7 negative-abscissa points
/// (outermost first), the centre, then the 7 positive points (innermost
/// first). `node_points` produces exactly this layout.
fn kronrod_sums(a: f64, b: f64, fv: &[f64; 15]) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mut resk = WGK[7] * fv[7];
    let mut resg = WG[3] * fv[7];
    let mut resabs = WGK[7] * fv[7].abs();
    for j in 0..7 {
        let flo = fv[j];
        let fhi = fv[14 - j];
        resk += WGK[j] * (flo + fhi);
        resabs += WGK[j] * (flo.abs() + fhi.abs());
        if j % 2 == 1 {
            // odd Kronrod indices carry the embedded Gauss nodes
            resg += WG[j / 2] * (flo + fhi);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fv[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = resk * half;
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    // QUADPACK error-scaling heuristic
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round = f64::EPSILON * 50.0 * resabs * half.abs();
    (value, err.max(round))
}

/// Physical node coordinates of the 15-point rule on [a, b].
fn node_points(a: f64, b: f64) -> [f64; 15] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut pts = [0.0; 15];
    for j in 0..7 {
        pts[j] = mid - half * XGK[j];
        pts[14 - j] = mid + half * XGK[j];
    }
    pts[7] = mid;
    pts
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let pts = node_points(a, b);
    let mut fv = [0.0; 15];
    for (v, x) in fv.iter_mut().zip(pts.iter()) {
        *v = f(*x);
    }
    let (value, error) = kronrod_sums(a, b, &fv);
    Panel { a, b, value, error }
}

fn eval_panel_par<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64) -> Panel {
    let pts = node_points(a, b);
    let vals: Vec<f64> = pts.par_iter().map(|&x| f(x)).collect();
    let mut fv = [0.0; 15];
    fv.copy_from_slice(&vals);
    let (value, error) = kronrod_sums(a, b, &fv);
    Panel { a, b, value, error }
}

fn run_adaptive(
    mut panels: Vec<Panel>,
    target: QuadTarget,
    mut evals: usize,
    mut split: impl FnMut(f64, f64) -> Panel,
) -> Result<QuadResult, QuadError> {
    let mut best_error = f64::INFINITY;
    let mut stagnant = 0usize;
    loop {
        // fixed-order reduction keeps the sum bitwise reproducible
        let mut value = 0.0;
        let mut error = 0.0;
        for p in &panels {
            value += p.value;
            error += p.error;
        }
        if error <= target.tolerance_for(value) {
            return Ok(QuadResult {
                value,
                est_error: error,
                evals,
            });
        }
        // refinement that stops paying off at all means the roundoff floor
        // has been reached; further splitting cannot certify a tighter
        // bound. Genuine convergence improves the bound every split, if
        // only by a sliver, so demand any strict decrease below the best.
        if error < best_error * (1.0 - 1e-12) {
            best_error = error;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if evals + 30 > target.max_evals || stagnant > 500 {
            return Err(QuadError::NonConvergence {
                estimate: value,
                error,
                evals,
            });
        }
        // deterministic worst-panel selection: strict > keeps first on ties
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval exhausted at machine precision; accept what we have
            let mut value = 0.0;
            let mut error = 0.0;
            for p in &panels {
                value += p.value;
                error += p.error;
            }
            return Ok(QuadResult {
                value,
                est_error: error,
                evals,
            });
        }
        let left = split(a, mid);
        let right = split(mid, b);
        evals += 30;
        panels[worst] = left;
        panels.push(right);
    }
}

/// Adaptively integrate `f` over `[a, b]` to the requested accuracy.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    target: QuadTarget,
) -> Result<QuadResult, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(QuadError::BadInterval { a, b });
    }
    let first = eval_panel(&f, a, b);
    run_adaptive(vec![first], target, 15, |lo, hi| eval_panel(&f, lo, hi))
}

/// As [`integrate`], but the fifteen node evaluations of every panel run in
/// parallel. Only worthwhile when each evaluation is itself expensive (an
/// inner integral, say); the reduction order is fixed so results are
/// identical to the serial path.
pub fn integrate_par<F: Fn(f64) -> f64 + Sync>(
    f: F,
    a: f64,
    b: f64,
    target: QuadTarget,
) -> Result<QuadResult, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(QuadError::BadInterval { a, b });
    }
    let first = eval_panel_par(&f, a, b);
    run_adaptive(vec![first], target, 15, |lo, hi| eval_panel_par(&f, lo, hi))
}

/// Fixed-order trapezoidal rule over one full period of a periodic function.
///
/// For smooth 2π-periodic integrands the equispaced trapezoid rule converges
/// spectrally, which makes it the right tool for azimuthal averages.
pub fn integrate_periodic<F: Fn(f64) -> f64>(f: F, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += f(i as f64 * h);
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn target() -> QuadTarget {
        QuadTarget::new(1e-12, 0.0, 1_000_000)
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x, 0.0, 1.0, target()).unwrap();
        assert_relative_eq!(r.value, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_bump() {
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, target()).unwrap();
        assert_relative_eq!(r.value, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn endpoint_log_singularity() {
        // integral of ln x over (0, 1] is -1; nodes never touch x = 0
        let r = integrate(|x| x.ln(), 0.0, 1.0, target()).unwrap();
        assert_relative_eq!(r.value, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, target()).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| (-2.0 * x).exp() * x * x * x, 0.0, 40.0, target()).unwrap();
        // integral of x^3 e^{-2x} over the half line = 6/16
        assert_relative_eq!(r.value, 0.375, max_relative = 1e-12);
    }

    #[test]
    fn error_bound_is_honest() {
        let loose = integrate(
            |x| (5.0 * x).sin() / (x + 0.1),
            0.0,
            3.0,
            QuadTarget::new(1e-6, 0.0, 1_000_000),
        )
        .unwrap();
        let fine = integrate(|x| (5.0 * x).sin() / (x + 0.1), 0.0, 3.0, target()).unwrap();
        assert!((loose.value - fine.value).abs() <= loose.est_error.max(1e-13));
    }

    #[test]
    fn unreachable_tolerance_fails_fast() {
        let demand = QuadTarget::new(1e-16, 0.0, 100_000_000);
        let err = integrate(|x| (5.0 * x).sin() / (x + 0.1), 0.0, 3.0, demand).unwrap_err();
        match err {
            QuadError::NonConvergence { evals, .. } => {
                assert!(evals < 10_000_000, "stagnation bailout did not engage")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn eval_budget_enforced() {
        let tight = QuadTarget::new(1e-15, 0.0, 60);
        let err = integrate(|x| x.ln(), 0.0, 1.0, tight).unwrap_err();
        match err {
            QuadError::NonConvergence { estimate, .. } => {
                assert!((estimate + 1.0).abs() < 0.5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let f = |x: f64| (-x).exp() * (3.0 * x).cos();
        let serial = integrate(f, 0.0, 10.0, target()).unwrap();
        let par = integrate_par(f, 0.0, 10.0, target()).unwrap();
        assert_eq!(serial.value.to_bits(), par.value.to_bits());
        assert_eq!(serial.est_error.to_bits(), par.est_error.to_bits());
    }

    #[test]
    fn periodic_rule_is_spectral() {
        // closed form: integral over a period of 1/(2 + cos x) = 2*pi/sqrt(3)
        let v = integrate_periodic(|x| 1.0 / (2.0 + x.cos()), 2.0 * PI, 64);
        assert_relative_eq!(v, 2.0 * PI / 3.0_f64.sqrt(), max_relative = 1e-12);
    }
}
