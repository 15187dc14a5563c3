//! Built-in oracle checks: quick quadrature and property suites over the
//! numeric kernels, independent of `cargo test`. Each suite prints one
//! PASS/FAIL line; the process exits nonzero if anything fails.

use phasemix_core::dirstat::{
    bessel_ratio, cmvm, convolve_wrapped_gaussian, inverse_bessel_ratio, log_bessel_i0,
    tikhonov_kl, wrapped_gaussian_pdf, TikhonovComponent, WrappedGaussianStep,
};
use phasemix_core::dp_baseline::{build_transition_kernel, circular_convolve_direct};
use phasemix_core::harness::{run_experiment, Algorithm, CodeSource, ExperimentConfig};
use phasemix_core::ldpc::{peg_construct, write_alist, PegConfig};
use phasemix_core::mixture::{ReductionConfig, TikhonovMixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;
use std::process::ExitCode;

pub fn run() -> ExitCode {
    let suites: &[(&str, fn() -> Result<String, String>)] = &[
        ("log-bessel-series", check_log_bessel),
        ("moment-ratio-roundtrip", check_ratio_roundtrip),
        ("kl-closed-form-vs-quadrature", check_kl_quadrature),
        ("cmvm-moment-preservation", check_cmvm_moment),
        ("wiener-convolution-approximation", check_convolution),
        ("mixture-reduction-properties", check_reduction),
        ("dp-kernel-and-convolution", check_dp_kernel),
        ("harness-determinism", check_determinism),
    ];
    let mut failures = 0;
    for (name, f) in suites {
        match f() {
            Ok(detail) => println!("selftest {name}: PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("selftest {name}: FAIL ({detail})");
            }
        }
    }
    if failures == 0 {
        println!("selftest: all suites passed");
        ExitCode::SUCCESS
    } else {
        println!("selftest: {failures} suite(s) failed");
        ExitCode::from(1)
    }
}

fn quad<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn rand_component(rng: &mut ChaCha12Rng, max_kappa: f64) -> TikhonovComponent {
    TikhonovComponent::from_polar(rng.gen::<f64>() * max_kappa, rng.gen::<f64>() * 2.0 * PI - PI)
}

fn check_log_bessel() -> Result<String, String> {
    let mut worst = 0.0f64;
    for &x in &[0.5f64, 1.0, 5.0, 19.0, 21.0, 120.0, 690.0] {
        // linear-domain power series, valid while I0(x) fits in an f64
        let q = 0.25 * x * x;
        let (mut term, mut sum, mut m) = (1.0f64, 1.0f64, 1.0f64);
        while term > sum * 1e-19 {
            term *= q / (m * m);
            sum += term;
            m += 1.0;
        }
        let want = sum.ln();
        let got = log_bessel_i0(x).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    if worst < 1e-10 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("relative error {worst:.2e} exceeds 1e-10"))
    }
}

fn check_ratio_roundtrip() -> Result<String, String> {
    let mut worst = 0.0f64;
    for i in 0..=30 {
        let kappa = 10f64.powf(-1.0 + 5.0 * i as f64 / 30.0);
        let rho = bessel_ratio(kappa).map_err(|e| e.to_string())?;
        let back = inverse_bessel_ratio(rho).map_err(|e| e.to_string())?;
        worst = worst.max((back - kappa).abs() / kappa.max(1.0));
    }
    if worst < 1e-6 {
        Ok(format!("max roundtrip error {worst:.2e} over kappa in [0.1, 1e4]"))
    } else {
        Err(format!("roundtrip error {worst:.2e} exceeds 1e-6"))
    }
}

fn check_kl_quadrature() -> Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = rand_component(&mut rng, 100.0);
        let q = rand_component(&mut rng, 100.0);
        let numeric = quad(
            |t| {
                let lp = p.log_density(t);
                lp.exp() * (lp - q.log_density(t))
            },
            4096,
        );
        worst = worst.max((tikhonov_kl(p, q) - numeric).abs());
    }
    if worst < 1e-8 {
        Ok(format!("max |closed − quadrature| = {worst:.2e}"))
    } else {
        Err(format!("mismatch {worst:.2e} exceeds 1e-8"))
    }
}

fn check_cmvm_moment() -> Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let order = 2 + rng.gen_range(0..4);
        let comps: Vec<TikhonovComponent> =
            (0..order).map(|_| rand_component(&mut rng, 30.0)).collect();
        let mut weights: Vec<f64> = (0..order).map(|_| rng.gen::<f64>() + 0.01).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let merged = cmvm(&weights, &comps).map_err(|e| e.to_string())?;
        let want: num_complex::Complex64 = weights
            .iter()
            .zip(&comps)
            .map(|(&w, c)| w * c.circular_moment())
            .sum();
        worst = worst.max((merged.circular_moment() - want).norm());
    }
    if worst < 1e-8 {
        Ok(format!("max moment error {worst:.2e}"))
    } else {
        Err(format!("moment error {worst:.2e} exceeds 1e-8"))
    }
}

fn check_convolution() -> Result<String, String> {
    let mut worst = 0.0f64;
    for &(kappa, sigma) in &[(20.0, 0.1), (80.0, 0.15), (200.0, 0.1)] {
        let c = TikhonovComponent::from_polar(kappa, 0.7);
        let approx = convolve_wrapped_gaussian(c, WrappedGaussianStep::new(sigma).unwrap());
        let n = 2048;
        let h = 2.0 * PI / n as f64;
        let numeric: Vec<f64> = (0..n)
            .map(|i| {
                let theta = (i as f64 + 0.5) * h;
                (0..n)
                    .map(|j| {
                        let phi = (j as f64 + 0.5) * h;
                        c.density(phi) * wrapped_gaussian_pdf(theta - phi, sigma).unwrap()
                    })
                    .sum::<f64>()
                    * h
            })
            .collect();
        let kl: f64 = numeric
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let theta = (i as f64 + 0.5) * h;
                if p > 0.0 {
                    p * (p.ln() - approx.log_density(theta))
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            * h;
        worst = worst.max(kl);
    }
    if worst <= 0.01 {
        Ok(format!("max KL(numeric ‖ approx) = {worst:.2e}"))
    } else {
        Err(format!("KL {worst:.2e} exceeds 0.01"))
    }
}

fn check_reduction() -> Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(303);
    for _ in 0..20 {
        let order = 2 + rng.gen_range(0..10);
        let comps: Vec<TikhonovComponent> =
            (0..order).map(|_| rand_component(&mut rng, 40.0)).collect();
        let logw: Vec<f64> = (0..order).map(|_| rng.gen::<f64>() * 3.0 - 1.5).collect();
        let m = TikhonovMixture::new(comps, logw).unwrap().normalized().unwrap();
        let n_max = 1 + rng.gen_range(0..5);
        let out = m.reduce(&ReductionConfig::new(0.2, n_max).unwrap());
        if out.order() > n_max.min(order) {
            return Err("order cap violated".into());
        }
        let mass: f64 = out.log_weights().iter().map(|lw| lw.exp()).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(format!("mass {mass} not preserved"));
        }
        let collapsed = m.reduce(&ReductionConfig::collapse_to_one());
        if collapsed.order() != 1 {
            return Err("collapse-to-one failed".into());
        }
    }
    Ok("order cap, mass conservation, full collapse".into())
}

fn check_dp_kernel() -> Result<String, String> {
    let k = build_transition_kernel(8, 0.1).map_err(|e| e.to_string())?;
    let sum: f64 = k.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(format!("kernel sum {sum}"));
    }
    for d in 1..8 {
        if (k[d] - k[8 - d]).abs() > 1e-15 {
            return Err("kernel asymmetric".into());
        }
    }
    // direct convolution identity against a delta kernel
    let delta = build_transition_kernel(16, 0.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    let x: Vec<f64> = (0..16).map(|_| rng.gen()).collect();
    let y = circular_convolve_direct(&x, &delta);
    let max_err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if max_err > 1e-15 {
        return Err(format!("delta convolution error {max_err:.2e}"));
    }
    Ok("kernel normalized, symmetric; delta convolution exact".into())
}

fn check_determinism() -> Result<String, String> {
    let code = peg_construct(&PegConfig { n: 80, n_checks: 20, var_degree: 3, seed: 11 })
        .map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::defaults(
        Algorithm::MultiHyp,
        CodeSource::AlistText(write_alist(&code)),
        vec![7.0],
    );
    cfg.pilot_period = Some(10);
    cfg.max_frames = 3;
    cfg.n_outer = 4;
    let a = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let b = run_experiment(&cfg).map_err(|e| e.to_string())?;
    for (pa, pb) in a.points.iter().zip(&b.points) {
        if pa.frames != pb.frames
            || pa.frame_errors != pb.frame_errors
            || pa.bit_errors != pb.bit_errors
            || pa.ops != pb.ops
        {
            return Err("repeated run diverged".into());
        }
    }
    Ok("two seeded micro-runs identical".into())
}
