//! Acceptance suite: one PASS/FAIL line per criterion. Each criterion is made of
//! named parts; the run fails if any part fails that is not listed in
//! `EXPECTED_FAILURES` (see the README for the analysis behind each entry).

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use difftransform::experiments::*;
use difftransform::kernels::{fractional_poisson_kernel, gauss_weierstrass, KernelPoint};
use difftransform::quadrature::{
    contour_identity_check, integrate_semi_infinite_scaled, subordinate_heat, subordinate_heat_rform,
    QuadratureRule,
};
use difftransform::sequences::*;
use difftransform::transforms::*;
use difftransform::verify::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parts that fail for reasons recorded in the README.
const EXPECTED_FAILURES: &[(u32, &str)] = &[(9, "B1 alpha 0.25"), (9, "B1 alpha 0.5"), (9, "B1 alpha 0.75")];

const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

struct Part {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Parts(Vec<Part>);

impl Parts {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.0.push(Part { name: name.into(), ok, detail: detail.into() });
    }
}

type Check = fn(&mut Parts) -> Result<(), difftransform::Error>;

fn alternating(lo: i64, hi: i64) -> MultiplierSequence {
    MultiplierSequence::from_fn(lo, hi, |j| if j % 2 != 0 { -1.0 } else { 1.0 }).unwrap()
}

/// `a_j = 2^j` on `[lo, hi + 1]`, `v_j = (-1)^j` on `[lo, hi]`.
fn dyadic_spec(alpha: f64, n1: i64, n2: i64, lo: i64, hi: i64) -> TransformSpec {
    let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, lo, hi + 1).unwrap();
    TransformSpec::new(alpha, n1, n2, a, alternating(lo, hi)).unwrap()
}

fn masses(out: &mut Parts) -> Result<(), difftransform::Error> {
    let rule = QuadratureRule::adaptive(1e-13, 1e-12);
    let mut worst = 0.0f64;
    for tau in [0.01f64, 1.0, 50.0] {
        let line = 2.0 * integrate_semi_infinite_scaled(|y: f64| gauss_weierstrass(&[y], tau).unwrap(), tau.sqrt(), &rule)?.value;
        let plane = integrate_semi_infinite_scaled(
            |r: f64| 2.0 * PI * r * gauss_weierstrass(&[r, 0.0], tau).unwrap(),
            tau.sqrt(),
            &rule,
        )?
        .value;
        worst = worst.max((line - 1.0).abs()).max((plane - 1.0).abs());
    }
    out.check("heat kernel mass", worst < 1e-6, format!("max |mass - 1| = {worst:.2e}"));

    let inner = QuadratureRule::adaptive(1e-14, 1e-12);
    let outer = QuadratureRule::adaptive(1e-12, 1e-10);
    let mut worst = 0.0f64;
    for tau in [0.3, 1.0, 4.0] {
        for alpha in ALPHAS {
            let mass = integrate_semi_infinite_scaled(
                |s: f64| {
                    let k = |y: f64| fractional_poisson_kernel(&KernelPoint::new(vec![y], s, tau), alpha).unwrap();
                    2.0 * integrate_semi_infinite_scaled(k, s.sqrt(), &inner).unwrap().value
                },
                tau * tau,
                &outer,
            )?
            .value;
            worst = worst.max((mass - 1.0).abs());
        }
    }
    out.check("fractional Poisson mass, 9 pairs", worst < 1e-6, format!("max |mass - 1| = {worst:.2e}"));

    let mut worst = 0.0f64;
    for alpha in ALPHAS {
        worst = worst.max(multiplier_value(&[0.0], 0.0, &dyadic_spec(alpha, -5, 5, -5, 5))?.norm());
    }
    out.check("multiplier at the origin", worst < 1e-6, format!("max |K(0,0)| = {worst:.2e}"));
    Ok(())
}

fn subordination(out: &mut Parts) -> Result<(), difftransform::Error> {
    let profiles: [fn(f64) -> f64; 10] = [
        |_| 1.0,
        |s| (-s).exp(),
        |s| (-0.1 * s).exp(),
        |s| 1.0 / (1.0 + s),
        |s| 1.0 / (1.0 + s).powi(2),
        |s| 1.0 / (1.0 + s * s),
        |s| (1.0 + s).powf(-0.5),
        |s| (-s * s).exp(),
        |s| s.cos() * (-s).exp(),
        |s| s / (1.0 + s * s) + (-3.0 * s).exp(),
    ];
    let rule = QuadratureRule::adaptive(1e-13, 1e-12);
    let mut worst = 0.0f64;
    for h in profiles {
        for tau in [0.5, 1.0, 2.0] {
            for alpha in ALPHAS {
                let a = subordinate_heat(h, tau, alpha, &rule)?;
                let b = subordinate_heat_rform(h, tau, alpha, &rule)?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    out.check("two subordination forms, 90 cases", worst < 1e-8, format!("max gap {worst:.2e}"));

    let rule = QuadratureRule::adaptive(1e-12, 1e-10);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, r) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        for (k, theta) in [-PI / 4.0 + 1e-3, -PI / 8.0, 0.0, PI / 8.0, PI / 4.0 - 1e-3].into_iter().enumerate() {
            let alpha = ALPHAS[(i + k) % 3];
            let gap = match contour_identity_check(Complex64::from_polar(r, theta), alpha, &rule) {
                Ok(c) => c.gap,
                Err(e) => {
                    out.check(format!("contour at r = {r}, arg = {theta:.4}"), false, e.to_string());
                    f64::INFINITY
                }
            };
            worst = worst.max(gap);
            count += 1;
        }
    }
    out.check(format!("contour identity, {count} sector samples"), worst < 1e-6, format!("max gap {worst:.2e}"));
    Ok(())
}

fn telescoping_slope(out: &mut Parts) -> Result<(), difftransform::Error> {
    let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -20, 20)?;
    let s: Vec<f64> = (0..200).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0)).collect();
    for alpha in ALPHAS {
        let r = check_telescoping_mass(&a, alpha, &s)?;
        let slope = r.slope_fit.map_or(f64::NAN, |f| f.slope);
        out.check(format!("alpha {alpha}"), (slope - alpha).abs() <= 0.05, format!("slope {slope:.4}"));
    }
    Ok(())
}

fn kernel_decay(out: &mut Parts) -> Result<(), difftransform::Error> {
    let (lo, hi) = (2f64.powi(-8), 2f64.powi(9));
    let grid = kernel_sample_grid(1, lo, hi, 60, 20);
    let fine = kernel_sample_grid(1, lo, hi, 120, 40);
    for alpha in ALPHAS {
        let narrow = dyadic_spec(alpha, -2, 2, -8, 8);
        let wide = dyadic_spec(alpha, -8, 8, -8, 8);
        let (gn, sn) = check_kernel_gradients(&narrow, &grid)?;
        let (gw, sw) = check_kernel_gradients(&wide, &grid)?;
        let (gf, sf) = check_kernel_gradients(&wide, &fine)?;
        let scans = [
            ("size", check_kernel_size(&narrow, &grid)?, check_kernel_size(&wide, &grid)?, check_kernel_size(&wide, &fine)?),
            ("y-gradient", gn, gw, gf),
            ("s-derivative", sn, sw, sf),
        ];
        for (name, n, w, f) in scans {
            let widen = (w.max_ratio / n.max_ratio - 1.0).abs();
            let growth = w.refinement_growth(&f);
            let ok = w.max_ratio.is_finite() && f.max_ratio.is_finite() && w.refinement_stable(&f) && widen < 0.05;
            out.check(
                format!("{name} alpha {alpha}"),
                ok,
                format!("max_ratio {:.4e}, x2 sampling {:+.2}%, widening N {:.2}%", w.max_ratio, 100.0 * growth, 100.0 * widen),
            );
        }
    }
    Ok(())
}

fn multiplier(out: &mut Parts) -> Result<(), difftransform::Error> {
    for alpha in ALPHAS {
        let spec = dyadic_spec(alpha, -5, 5, -5, 5);
        let coarse = scan_multiplier_bound(&spec, &multiplier_samples(1, 1000, 1))?;
        let fine = scan_multiplier_bound(&spec, &multiplier_samples(1, 2000, 1))?;
        let ok = !coarse.fail && !fine.fail && coarse.refinement_stable(&fine);
        out.check(
            format!("scan alpha {alpha}"),
            ok,
            format!("sup {:.4} -> {:.4}", coarse.max_ratio, fine.max_ratio),
        );
    }
    let mut worst = 0.0f64;
    for (alpha, xi, rho) in [(0.5, vec![1.0], 1.0), (0.25, vec![0.6, 0.8], -2.0), (0.75, vec![2.0], 0.5)] {
        let spec = dyadic_spec(alpha, -1, 1, -1, 1);
        let f = multiplier_value(&xi, rho, &spec)?;
        let p = multiplier_value_physical(&xi, rho, &spec)?;
        worst = worst.max((f - p).norm());
    }
    out.check("frequency vs physical space", worst < 1e-3, format!("max gap {worst:.2e}"));
    Ok(())
}

fn lemma33(out: &mut Parts) -> Result<(), difftransform::Error> {
    let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -20, 20)?;
    let v = alternating(-20, 19);
    for alpha in ALPHAS {
        let u = lemma33_uniform_bound(&a, &v, alpha, (-5, 5), 10, 200)?;
        out.check(format!("(i) alpha {alpha}"), u.max_ratio.is_finite(), format!("constant {:.4e}", u.max_ratio));
        let d = lemma33_decay(&a, &v, alpha, (-5, 5), 15, 6, 40)?;
        let slope = d.slope_fit.map_or(f64::NAN, |f| f.slope);
        let bound = -2.0 * alpha * 2f64.ln() + 0.1;
        out.check(format!("(ii) alpha {alpha}"), slope <= bound, format!("slope {slope:.4} vs {bound:.4}"));
    }
    Ok(())
}

fn normalization(out: &mut Parts) -> Result<(), difftransform::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grid = GridParams { n: 1, x_extent: 3.0, nx: 24, t_range: (-3.0, 3.0), nt: 24 };
    let opts = ApplyOptions::default().without_mask();
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let (a, v) = if case == 0 {
            (make_lacunary(SequenceKind::Geometric(8.0), 2.0, 0, 2)?, MultiplierSequence::new(0, vec![0.7, -1.3], None)?)
        } else {
            let len = rng.gen_range(2..5usize);
            let mut vals = vec![rng.gen_range(0.1..0.6)];
            for _ in 0..len {
                let r = rng.gen_range(2.0..12.0);
                vals.push(vals.last().unwrap() * r);
            }
            let weights = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
            (LacunarySequence::from_values(0, vals, 2.0)?, MultiplierSequence::new(0, weights, None)?)
        };
        let n2 = v.j_max();
        let norm = normalize_lacunary(&a, &v)?;
        let (m1, m2) = norm.index_map.map_window(0, n2);
        let alpha = rng.gen_range(0.1..0.9);
        let before = TransformSpec::new(alpha, 0, n2, a, v)?;
        let after = TransformSpec::new(alpha, m1, m2, norm.eta, norm.theta)?;
        let f = band_limited_input(&grid, case, 4)?;
        let x = apply_diff_transform_with(&f, &before, &opts)?;
        let y = apply_diff_transform_with(&f, &after, &opts)?;
        let gap = x.values().iter().zip(y.values()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    out.check("100 random grids", worst < 1e-8, format!("max gap {worst:.2e}"));
    Ok(())
}

fn cotlar(out: &mut Parts) -> Result<(), difftransform::Error> {
    let grid = GridParams { n: 1, x_extent: 4.0, nx: 64, t_range: (-4.0, 4.0), nt: 64 };
    let fine_grid = grid.refined();
    let m = 3;
    let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -m, m + 1)?;
    let fam = TransformFamily::new(0.5, a, alternating(-m, m))?;
    let (mut c, mut c_fine) = (0.0f64, 0.0f64);
    for seed in 1..=20 {
        c = c.max(check_cotlar(&band_limited_input(&grid, seed, 4)?, &fam, m, 2.0)?.max_ratio);
        c_fine = c_fine.max(check_cotlar(&band_limited_input(&fine_grid, seed, 4)?, &fam, m, 2.0)?.max_ratio);
    }
    let drift = (c_fine / c - 1.0).abs();
    out.check(
        "20 inputs, q = 2, M = 3",
        c.is_finite() && c > 0.0 && drift < 0.1,
        format!("C = {c:.4} on 64x64, {c_fine:.4} on 127x127, drift {:.2}%", 100.0 * drift),
    );
    Ok(())
}

fn convergence(out: &mut Parts) -> Result<(), difftransform::Error> {
    let bump = TestBump { radius: 0.9, amplitude: 1.0 };
    let l_list: Vec<i64> = (4..=12).collect();
    for alpha in ALPHAS {
        let tpl = RateTemplate { alpha, base: 2.0, alternating: false };
        let r = convergence_rates(&bump, &tpl, &l_list, 16)?;
        let claimed = tpl.claimed_exponents();
        for ((name, term), want) in [("A", &r.a_term), ("B1", &r.b1_term), ("B2", &r.b2_term)].into_iter().zip(claimed) {
            let slope = term.slope_fit.map_or(f64::NAN, |f| f.slope);
            out.check(format!("{name} alpha {alpha}"), !term.fail, format!("exponent {slope:.4} vs {want:.4}"));
        }
    }
    Ok(())
}

fn divergence(out: &mut Parts) -> Result<(), difftransform::Error> {
    let grid = ExperimentConfig::new(ExperimentKind::Divergence, 0.5).grid;
    for alpha in ALPHAS {
        let choice = choose_base_a(alpha, (1.25, 100.0))?;
        let ex = build_divergence_example(choice.a, &grid, (0, 11))?;
        let windows: Vec<usize> = (0..=12).collect();
        let r = divergence_growth(&ex, alpha, &choice, &windows, &divergence_probes(&choice, 0, 9))?;
        let fit = r.fit.unwrap_or(SlopeFit { slope: f64::NAN, intercept: f64::NAN, r2: f64::NAN });
        out.check(
            format!("alpha {alpha} linear growth"),
            r.growth_ok(),
            format!("a = {}, slope {:.4}, r2 {:.4}", choice.a, fit.slope, fit.r2),
        );
        out.check(
            format!("alpha {alpha} increments"),
            r.increments_ok(),
            format!("min {:.4} vs threshold {:.4}", r.min_increment, r.threshold),
        );
    }
    Ok(())
}

fn growth(out: &mut Parts) -> Result<(), difftransform::Error> {
    let big_m = 80;
    for alpha in [0.5, 0.75] {
        let (a, _) = choose_growth_base(alpha, (1.5, 100.0))?;
        let radii = auto_radii(a, big_m);
        let grid = ExperimentConfig::new(ExperimentKind::GrowthLowerLinf, alpha).grid;
        for (label, preset) in [
            ("(c)", GrowthPreset::LowerLinf),
            ("(b) p = 2, eps = 0.5", GrowthPreset::LowerLp { p: 2.0, epsilon: 0.5 }),
            ("(a) p = 1", GrowthPreset::Upper { p: 1.0 }),
        ] {
            let ex = build_growth_example_2d(a, preset, big_m, &grid, 0)?;
            let r = growth_experiment(&ex, alpha, &radii, 8)?;
            let beta = r.beta().unwrap_or(f64::NAN);
            out.check(
                format!("{label} alpha {alpha}"),
                r.pass(),
                format!("a = {a}, beta {beta:.3} in [{:.3}, {:.3}]", r.band.0, r.band.1),
            );
        }
    }
    Ok(())
}

fn bump(x: &[f64], t: f64) -> f64 {
    let r2 = x[0] * x[0] + (t + 1.0) * (t + 1.0);
    if r2 < 4.0 {
        (-1.0 / (4.0 - r2)).exp() * 50.0
    } else {
        0.0
    }
}

fn dual_path(out: &mut Parts) -> Result<(), difftransform::Error> {
    let f = SpaceTimeGrid::from_fn(1, 6.0, 64, (-6.0, 6.0), 64, bump)?;
    let rule = QuadratureRule { max_evals: 2_000_000, ..QuadratureRule::adaptive(1e-12, 1e-10) };
    for alpha in ALPHAS {
        let spec = dyadic_spec(alpha, -2, 2, -2, 2);
        let fast = apply_diff_transform(&f, &spec)?;
        let mut worst = 0.0f64;
        for (i, k) in [(32usize, 36usize), (28, 45), (36, 60), (24, 52)] {
            let direct = diff_transform_kernel_path(&f, &spec, &[i], k, &rule)?;
            worst = worst.max((fast.get(&[i], k) - direct).abs());
        }
        out.check(format!("alpha {alpha}"), worst < 1e-5, format!("max gap {worst:.2e}"));
    }
    Ok(())
}

fn brute_force(out: &mut Parts) -> Result<(), difftransform::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise: Vec<f64> = (0..64 * 64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = SpaceTimeGrid::new(1, 6.0, 64, (-6.0, 6.0), 64, noise)?;
    let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -3, 4)?;
    let fam = TransformFamily::new(0.5, a, alternating(-3, 3))?;
    let opts = ApplyOptions::default().without_mask();
    let star = maximal_transform_with(&f, &fam, 3, &opts)?;
    let mut brute = vec![0.0f64; star.values().len()];
    let mut pairs = 0;
    for n1 in -3..=3 {
        for n2 in n1 + 1..=3 {
            let t = apply_diff_transform_with(&f, &fam.spec(n1, n2)?, &opts)?;
            for (b, v) in brute.iter_mut().zip(t.values()) {
                *b = b.max(v.abs());
            }
            pairs += 1;
        }
    }
    out.check("maximal transform", pairs == 21 && star.values() == &brute[..], format!("{pairs} windows"));

    // small integers keep every window sum exact, so the comparison is bitwise
    let ints: Vec<f64> = (0..64 * 64).map(|_| rng.gen_range(-8..=8) as f64).collect();
    let g = SpaceTimeGrid::new(1, 1.0, 64, (0.0, 1.0), 64, ints)?;
    let root = |v: f64, q: f64| if q == 1.0 { v } else { v.powf(1.0 / q) };
    let pow = |v: f64, q: f64| if q == 1.0 { v.abs() } else { v.abs().powf(q) };
    for q in [1.0, 2.0] {
        let hl = hl_maximal(&g, q)?;
        let back = backward_maximal(&g, q)?;
        let (mut hl_ok, mut back_ok) = (true, true);
        for k in 0..64 {
            let row: Vec<f64> = g.slice(k).iter().map(|v| pow(*v, q)).collect();
            for i in 0..64 {
                let mut best = 0.0f64;
                for i0 in 0..=i {
                    for i1 in i..64 {
                        let sum: f64 = row[i0..=i1].iter().sum();
                        best = best.max(sum / (i1 - i0 + 1) as f64);
                    }
                }
                hl_ok &= hl.get(&[i], k) == root(best, q);
            }
        }
        for i in 0..64 {
            let col: Vec<f64> = (0..64).map(|k| pow(g.get(&[i], k), q)).collect();
            for k in 0..64 {
                let best = (0..=k).map(|k0| col[k0..=k].iter().rev().sum::<f64>() / (k - k0 + 1) as f64).fold(0.0, f64::max);
                back_ok &= back.get(&[i], k) == root(best, q);
            }
        }
        out.check(format!("hl_maximal q = {q}"), hl_ok, "64-point grid");
        out.check(format!("backward_maximal q = {q}"), back_ok, "64-point grid");
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Check); 13] = [
        (1, "mass and identity suite", masses),
        (2, "subordination duality", subordination),
        (3, "telescoping mass slope", telescoping_slope),
        (4, "kernel decay scans", kernel_decay),
        (5, "multiplier scan", multiplier),
        (6, "tail-sum constants and decay", lemma33),
        (7, "normalization exactness", normalization),
        (8, "Cotlar inequality", cotlar),
        (9, "convergence rates", convergence),
        (10, "divergence partial sums", divergence),
        (11, "growth exponents", growth),
        (12, "dual-path agreement", dual_path),
        (13, "brute-force oracles", brute_force),
    ];
    // `cargo test --test acceptance -- 2 8` runs only the listed criteria
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (id, title, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut parts = Parts::default();
        if let Err(e) = run(&mut parts) {
            parts.check("run", false, e.to_string());
        }
        let ok = parts.0.iter().all(|p| p.ok);
        println!("criterion {id:2} {}: {title} ({:.1} s)", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        for p in &parts.0 {
            let expected = !p.ok && EXPECTED_FAILURES.contains(&(id, p.name.as_str()));
            if !p.ok && !expected {
                unexpected += 1;
            }
            let tag = match (p.ok, expected) {
                (true, _) => "ok",
                (false, true) => "FAIL (expected)",
                (false, false) => "FAIL",
            };
            println!("    {}: {} [{tag}]", p.name, p.detail);
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
