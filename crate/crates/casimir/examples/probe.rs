use casimir::nonspecular::{kernel, kernel_separation_integral, KernelKind, MirrorStack};
use casimir::*;

fn main() {
    let spec = QuadratureSpec {
        rel_tol: 1e-5,
        ..QuadratureSpec::default()
    };

    // 1. perfect-mirror corrugation kernel decay at L = 200 nm
    let l = 200e-9;
    let perfect = PerfectReflector;
    let stack = MirrorStack::new(&perfect, &perfect, l);
    println!("# perfect corrugation kernel, L = 200 nm");
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..25 {
        let kl = 0.5 * (i as f64 + 1.0);
        let g = kernel(&stack, KernelKind::Corrugation, kl / l, &spec).unwrap();
        let slope = prev.map(|(pkl, pg)| ((g.value / pg).ln()) / (kl - pkl));
        println!(
            "kL = {kl:5.2}  G = {:+.6e}  local dln|G|/d(kL) = {}",
            g.value,
            slope.map(|s| format!("{s:+.3}")).unwrap_or_default()
        );
        prev = Some((kl, g.value));
    }

    // 2. plane-sphere lateral force profile, experimental scales
    let l = 221e-9;
    let gold = DielectricMirror::new(DielectricModel::plasma_from_wavelength(136e-9));
    let stack = MirrorStack::new(&gold, &gold, l);
    println!("\n# plasma lateral-force profile k * |int G dL'|, L = 221 nm");
    for i in 0..15 {
        let kl = 0.6 + 0.25 * i as f64;
        let k = kl / l;
        let (integral, err) = kernel_separation_integral(&stack, k, &spec).unwrap();
        println!(
            "kL = {kl:5.2}  k|I| = {:.6e}  (err {:.1e})",
            k * integral.abs(),
            k * err
        );
    }

    // 3. torque configuration: plasma at L = 1 um, peak of k|G(k)|
    let l = 1e-6;
    let stack = MirrorStack::new(&gold, &gold, l);
    println!("\n# plasma torque profile k*|G|, L = 1 um");
    let g0 = kernel(&stack, KernelKind::Corrugation, 1e-3 / l, &spec).unwrap();
    let mut best = (0.0, 0.0);
    for i in 0..16 {
        let kl = 0.4 + 0.3 * i as f64;
        let k = kl / l;
        let g = kernel(&stack, KernelKind::Corrugation, k, &spec).unwrap();
        let t = k * g.value.abs();
        if t > best.1 {
            best = (kl, t);
        }
        println!(
            "kL = {kl:5.2}  k|G| = {:.6e}  G0/G = {:.3}",
            t,
            g0.value / g.value
        );
    }
    println!("peak of k|G| at kL = {:.2}", best.0);
    let gp = kernel(&stack, KernelKind::Corrugation, best.0 / l, &spec).unwrap();
    println!("PFA/kernel ratio at peak = {:.3}", g0.value / gp.value);

    // perfect-reflector comparison at the same k
    let stack_p = MirrorStack::new(&perfect, &perfect, l);
    let gpp = kernel(&stack_p, KernelKind::Corrugation, best.0 / l, &spec).unwrap();
    println!(
        "perfect vs plasma kernel at peak k: {:+.4e} vs {:+.4e}",
        gpp.value, gp.value
    );
}
