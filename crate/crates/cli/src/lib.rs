//! Command-line runner for the difftransform experiments.
//!
//! Exit codes: 0 when every check passes, 1 on a FAIL or a runtime error,
//! 2 on a usage, configuration or output-path error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use difftransform::error::{Error, Result};
use difftransform::experiments::*;
use difftransform::sequences::{make_lacunary, MultiplierSequence, SequenceKind};
use difftransform::transforms::{maximal_transform, SpaceTimeGrid, TransformFamily, TransformSpec};
use difftransform::verify::{
    check_cotlar, check_kernel_gradients, check_kernel_size, check_telescoping_mass, convergence_rates,
    kernel_sample_grid, multiplier_samples, scan_multiplier_bound, BoundReport, RateTemplate, TestBump,
};

#[derive(Parser, Debug)]
#[command(name = "difftransform-lab", version, about = "Runs the difftransform experiments and writes CSV reports")]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partial sums of the divergence example against the window size
    Divergence(Flags),
    /// Log-growth of the maximal transform for l^p multipliers (upper law)
    GrowthUpper(Flags),
    /// Log-growth lower law for l^p multipliers
    GrowthLowerLp(Flags),
    /// Log-growth lower law for bounded multipliers
    GrowthLowerLinf(Flags),
    /// Cotlar inequality on random band-limited inputs
    Cotlar(Flags),
    /// Sup of the multiplier over random frequencies
    Multiplier(Flags),
    /// Kernel size, gradient and telescoping scans
    KernelDecay(Flags),
    /// Decay rates of the convergence tail terms
    Convergence(Flags),
}

impl Command {
    fn split(self) -> (ExperimentKind, Flags) {
        use ExperimentKind as K;
        match self {
            Self::Divergence(f) => (K::Divergence, f),
            Self::GrowthUpper(f) => (K::GrowthUpper, f),
            Self::GrowthLowerLp(f) => (K::GrowthLowerLp, f),
            Self::GrowthLowerLinf(f) => (K::GrowthLowerLinf, f),
            Self::Cotlar(f) => (K::Cotlar, f),
            Self::Multiplier(f) => (K::Multiplier, f),
            Self::KernelDecay(f) => (K::KernelDecay, f),
            Self::Convergence(f) => (K::Convergence, f),
        }
    }
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Fractional order in (0, 1) (required here or in the config file)
    #[arg(long)]
    alpha: Option<f64>,
    /// Base of the lacunary sequence (searched when omitted)
    #[arg(long = "a-base")]
    a_base: Option<f64>,
    /// Lacunarity ratio for the rho^j families
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Truncation level M
    #[arg(long = "M")]
    big_m: Option<i64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Half-width of the spatial box
    #[arg(long = "X")]
    x_extent: Option<f64>,
    #[arg(long = "T0", allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long = "T1", allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Comma-separated, strictly decreasing radii
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
}

/// What a runner hands back for writing.
struct Outcome {
    csv: Vec<u8>,
    summary: String,
    pass: bool,
    snapshots: Vec<(&'static str, SpaceTimeGrid)>,
}

/// Parses `argv` (program name first), runs the experiment and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (kind, flags) = cli.experiment.split();
    let cfg = match build_config(kind, &flags) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    if let Err(e) = prepare_out_dir(&cfg.out) {
        eprintln!("error: output directory {}: {e}", cfg.out.display());
        return 2;
    }
    let outcome = match thread_pool() {
        Ok(pool) => pool.install(|| run_experiment(&cfg)),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let _ = fs::write(cfg.out.join("summary.txt"), format!("{}: error: {e}\nFAIL\n", cfg.experiment));
            return 1;
        }
    };
    if let Err(e) = write_outputs(&cfg, &outcome) {
        eprintln!("error: writing reports: {e}");
        return 1;
    }
    print!("{}", outcome.summary);
    if outcome.pass {
        0
    } else {
        1
    }
}

fn build_config(kind: ExperimentKind, flags: &Flags) -> std::result::Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::new(kind, f64::NAN);
    let mut have_alpha = false;
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        let pairs = parse_key_values(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
        for (k, v) in &pairs {
            if k == "experiment" {
                let named: ExperimentKind = v.parse().map_err(|e: Error| e.to_string())?;
                if named != kind {
                    return Err(format!("config names experiment '{named}' but the subcommand is '{kind}'"));
                }
                continue;
            }
            cfg.set(k, v).map_err(|e| format!("config {}: {e}", path.display()))?;
            have_alpha |= k == "alpha";
        }
    }
    if let Some(a) = flags.alpha {
        cfg.alpha = a;
        have_alpha = true;
    }
    if !have_alpha {
        return Err("missing required flag --alpha (or `alpha = ...` in the config file)".into());
    }
    if flags.a_base.is_some() {
        cfg.a_base = flags.a_base;
    }
    macro_rules! take {
        ($($src:ident => $dst:expr),* $(,)?) => {
            $(if let Some(v) = flags.$src.clone() { $dst = v; })*
        };
    }
    take!(
        rho => cfg.rho,
        p => cfg.p,
        epsilon => cfg.epsilon,
        big_m => cfg.big_m,
        nx => cfg.grid.nx,
        nt => cfg.grid.nt,
        x_extent => cfg.grid.x_extent,
        t0 => cfg.grid.t_range.0,
        t1 => cfg.grid.t_range.1,
        radii => cfg.radii,
        seed => cfg.seed,
        out => cfg.out,
    );
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn prepare_out_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    // probe that the directory accepts files before spending time on the run
    let probe = dir.join(".dtlab-write-probe");
    File::create(&probe)?;
    fs::remove_file(probe)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("DTLAB_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Format(format!("DTLAB_THREADS must be a non-negative integer, got '{s}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

fn write_outputs(cfg: &ExperimentConfig, o: &Outcome) -> Result<()> {
    fs::write(cfg.out.join(format!("{}.csv", cfg.experiment)), &o.csv)?;
    let mut text = format!("experiment {} alpha {}\n", cfg.experiment, cfg.alpha);
    text.push_str(&o.summary);
    text.push_str(if o.pass { "PASS\n" } else { "FAIL\n" });
    fs::write(cfg.out.join("summary.txt"), text)?;
    for (name, grid) in &o.snapshots {
        let mut w = BufWriter::new(File::create(cfg.out.join(name))?);
        grid.write_binary(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    use ExperimentKind as K;
    match cfg.experiment {
        K::Divergence => run_divergence(cfg),
        K::GrowthUpper | K::GrowthLowerLp | K::GrowthLowerLinf => run_growth(cfg),
        K::Cotlar => run_cotlar(cfg),
        K::Multiplier => run_multiplier(cfg),
        K::KernelDecay => run_kernel_decay(cfg),
        K::Convergence => run_convergence(cfg),
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_divergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let choice = match cfg.a_base {
        Some(a) => base_choice_for(a, cfg.alpha)?,
        None => choose_base_a(cfg.alpha, (1.25, 100.0))?,
    };
    let ex = build_divergence_example(choice.a, &cfg.grid, (0, cfg.big_m - 1))?;
    let windows: Vec<usize> = (0..=cfg.big_m as usize).collect();
    let probes = divergence_probes(&choice, 0, 9);
    let report = divergence_growth(&ex, cfg.alpha, &choice, &windows, &probes)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let summary = format!(
        "base a = {} C1 = {:.6} eta0 = {:.2}\n{}",
        choice.a,
        choice.c1,
        choice.eta0,
        report.summary()
    );
    Ok(Outcome { csv, summary, pass: report.pass(), snapshots: vec![("f.dtlg", ex.f)] })
}

fn run_growth(cfg: &ExperimentConfig) -> Result<Outcome> {
    let preset = match cfg.experiment {
        ExperimentKind::GrowthUpper => GrowthPreset::Upper { p: cfg.p },
        ExperimentKind::GrowthLowerLp => GrowthPreset::LowerLp { p: cfg.p, epsilon: cfg.epsilon },
        _ => GrowthPreset::LowerLinf,
    };
    let a = match cfg.a_base {
        Some(a) => a,
        None => choose_growth_base(cfg.alpha, (1.5, 100.0))?.0,
    };
    let ex = build_growth_example_2d(a, preset, cfg.big_m, &cfg.grid, 0)?;
    let radii = if cfg.radii.is_empty() { auto_radii(a, cfg.big_m) } else { cfg.radii.clone() };
    let report = growth_experiment(&ex, cfg.alpha, &radii, 8)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let tmax = ex.maximal_snapshot(cfg.alpha)?;
    let summary = format!("base a = {a} M = {}\n{}", cfg.big_m, report.summary());
    Ok(Outcome { csv, summary, pass: report.pass(), snapshots: vec![("f.dtlg", ex.f), ("tmax.dtlg", tmax)] })
}

/// `a_j = rho^j` on `[-M, M + 1]`, `v_j = (-1)^j` on `[-M, M]`.
fn rho_family(cfg: &ExperimentConfig) -> Result<TransformFamily> {
    let m = cfg.big_m;
    let a = make_lacunary(SequenceKind::Geometric(cfg.rho), cfg.rho, -m, m + 1)?;
    let v = MultiplierSequence::from_fn(-m, m, |j| if j % 2 != 0 { -1.0 } else { 1.0 })?;
    TransformFamily::new(cfg.alpha, a, v)
}

const COTLAR_INPUTS: u64 = 20;
const COTLAR_MODES: usize = 4;
const COTLAR_DRIFT: f64 = 0.1;

fn run_cotlar(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fam = rho_family(cfg)?;
    let fine_grid = cfg.grid.refined();
    let mut rows = Vec::new();
    for i in 0..COTLAR_INPUTS {
        let seed = cfg.seed.wrapping_add(i);
        let coarse = check_cotlar(&band_limited_input(&cfg.grid, seed, COTLAR_MODES)?, &fam, cfg.big_m, 2.0)?;
        let fine = check_cotlar(&band_limited_input(&fine_grid, seed, COTLAR_MODES)?, &fam, cfg.big_m, 2.0)?;
        rows.push((seed, coarse.max_ratio, fine.max_ratio));
    }
    let c_coarse = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let c_fine = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let drift = (c_fine / c_coarse - 1.0).abs();
    let ok = c_coarse.is_finite() && c_fine.is_finite() && drift < COTLAR_DRIFT;

    let mut csv = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut csv);
        w.write_record(["seed", "coarse_max_ratio", "fine_max_ratio"])?;
        for (s, a, b) in &rows {
            w.write_record([s.to_string(), a.to_string(), b.to_string()])?;
        }
        w.flush()?;
    }
    let summary = format!(
        "fitted C over {COTLAR_INPUTS} inputs: {c_coarse:.6} (grid {}x{}), {c_fine:.6} (grid {}x{}), drift {:.2}% {}\n",
        cfg.grid.nx,
        cfg.grid.nt,
        fine_grid.nx,
        fine_grid.nt,
        100.0 * drift,
        mark(ok)
    );
    let f = band_limited_input(&cfg.grid, cfg.seed, COTLAR_MODES)?;
    let tmax = maximal_transform(&f, &fam, cfg.big_m)?;
    Ok(Outcome { csv, summary, pass: ok, snapshots: vec![("f.dtlg", f), ("tmax.dtlg", tmax)] })
}

fn rho_spec(cfg: &ExperimentConfig, n1: i64, n2: i64) -> Result<TransformSpec> {
    rho_family(cfg)?.spec(n1, n2)
}

fn run_multiplier(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = rho_spec(cfg, -cfg.big_m, cfg.big_m)?;
    let n = cfg.grid.n;
    let coarse = scan_multiplier_bound(&spec, &multiplier_samples(n, 1000, cfg.seed))?;
    let fine = scan_multiplier_bound(&spec, &multiplier_samples(n, 2000, cfg.seed))?;
    let ok = !coarse.fail && !fine.fail && coarse.refinement_stable(&fine);
    let mut csv = Vec::new();
    let coords: Vec<String> = (0..n).map(|i| format!("xi{i}")).chain(["rho".to_string()]).collect();
    let names: Vec<&str> = coords.iter().map(String::as_str).collect();
    fine.write_csv(&mut csv, &names)?;
    let summary = format!(
        "1000 samples: {}\n2000 samples: {}\nrefinement growth {:.2}% {}\n",
        coarse.summary(),
        fine.summary(),
        100.0 * coarse.refinement_growth(&fine),
        mark(ok)
    );
    Ok(Outcome { csv, summary, pass: ok, snapshots: Vec::new() })
}

fn scan_line(name: &str, coarse: &BoundReport, fine: &BoundReport) -> (String, bool) {
    let ok = !coarse.fail && !fine.fail && coarse.max_ratio.is_finite() && coarse.refinement_stable(fine);
    let line = format!(
        "{name}: max_ratio {:.6e} -> {:.6e} under x2 sampling ({} samples) {}\n",
        coarse.max_ratio,
        fine.max_ratio,
        fine.n_samples,
        mark(ok)
    );
    (line, ok)
}

fn run_kernel_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let m = cfg.big_m;
    let spec = rho_spec(cfg, -m, m)?;
    let (a_min, a_max) = (cfg.rho.powi(-m as i32), cfg.rho.powi(m as i32 + 1));
    let n = cfg.grid.n;
    let grid = kernel_sample_grid(n, a_min, a_max, 60, 20);
    let fine = kernel_sample_grid(n, a_min, a_max, 120, 40);

    let size = check_kernel_size(&spec, &grid)?;
    let size_fine = check_kernel_size(&spec, &fine)?;
    let (grad, ds) = check_kernel_gradients(&spec, &grid)?;
    let (grad_fine, ds_fine) = check_kernel_gradients(&spec, &fine)?;
    let s: Vec<f64> = (0..200).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0)).collect();
    let tele = check_telescoping_mass(spec.a(), cfg.alpha, &s)?;

    let mut summary = String::new();
    let mut pass = true;
    for (name, c, f) in [("size", &size, &size_fine), ("y-gradient", &grad, &grad_fine), ("s-derivative", &ds, &ds_fine)] {
        let (line, ok) = scan_line(name, c, f);
        summary.push_str(&line);
        pass &= ok;
    }
    summary.push_str(&format!("telescoping mass: {} {}\n", tele.summary(), mark(!tele.fail)));
    pass &= !tele.fail;

    let mut csv = Vec::new();
    let coords: Vec<String> = (0..n).map(|i| format!("y{i}")).chain(["s".to_string()]).collect();
    let names: Vec<&str> = coords.iter().map(String::as_str).collect();
    size_fine.write_csv(&mut csv, &names)?;
    Ok(Outcome { csv, summary, pass, snapshots: Vec::new() })
}

fn run_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.big_m < 6 {
        return Err(Error::Domain(format!("convergence needs M >= 6, got {}", cfg.big_m)));
    }
    let tpl = RateTemplate { alpha: cfg.alpha, base: cfg.rho, alternating: false };
    let l_list: Vec<i64> = (4..=cfg.big_m - 4).collect();
    let bump = TestBump { radius: 0.9, amplitude: 1.0 };
    let report = convergence_rates(&bump, &tpl, &l_list, cfg.big_m)?;
    let terms = [("A", &report.a_term), ("B1", &report.b1_term), ("B2", &report.b2_term)];

    let mut csv = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut csv);
        w.write_record(["term", "L", "kappa", "value", "ratio"])?;
        for (name, r) in terms {
            for s in &r.samples {
                let kappa = s.point.get(1).map_or(String::new(), |k| k.to_string());
                w.write_record([name.to_string(), s.point[0].to_string(), kappa, s.value.to_string(), s.ratio.to_string()])?;
            }
        }
        w.flush()?;
    }
    let claimed = tpl.claimed_exponents();
    let mut summary = String::new();
    for ((name, r), want) in terms.iter().zip(claimed) {
        let slope = r.slope_fit.map_or(f64::NAN, |f| f.slope);
        summary.push_str(&format!("{name}: fitted exponent {slope:.4} vs {want:.4} {}\n", mark(!r.fail)));
    }
    Ok(Outcome { csv, summary, pass: report.all_within_tolerance(), snapshots: Vec::new() })
}
