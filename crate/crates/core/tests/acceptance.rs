//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use acc_specgram::discretize::{
    assemble_operator, build_grid, build_grid_spacing, build_grid_with_cap, spectral_decompose, spectral_eigenvalues, EvalGrid,
    DEFAULT_NODE_CAP,
};
use acc_specgram::geometry::{lens_volume_exact, lens_volume_series, LensSpec};
use acc_specgram::spectrogram::{analyze, default_margin, inequality_report, l1_study_step, strictly_decreasing, ResolutionPolicy};
use acc_specgram::variance::{asymptotic_constant, fit_asymptotics, log_spaced, variance_radial, variance_spectral};
use acc_specgram::{Kernel, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTAS: [f64; 3] = [0.1, 0.25, 0.5];
const TRACE_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let secs = t.elapsed().as_secs_f64();
    let pass = out.pass && secs < budget_s;
    println!(
        "criterion {id} {:<24} {}  {}  ({secs:.2}s, budget {budget_s}s)",
        name,
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn lens_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        for k in 0..50 {
            let r = 2.2 * k as f64 / 49.0;
            let spec = LensSpec::new(d, r, 1.0).unwrap();
            let s = lens_volume_series(spec, 1e-12).unwrap();
            worst = worst.max((s - lens_volume_exact(spec)).abs());
        }
    }
    let circle = lens_volume_series(LensSpec::new(2, 1.0, 1.0).unwrap(), 1e-12).unwrap();
    let circle_err = (circle - (PI / 3.0 + 3f64.sqrt() / 2.0)).abs();
    Outcome {
        pass: worst <= 1e-8 && circle_err <= 1e-8,
        detail: format!("max |series-exact| {worst:.2e}, circle overlap err {circle_err:.2e}"),
    }
}

fn asymptotic_slope() -> Outcome {
    let rs = log_spaced(10.0, 200.0, 20).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [1, 2] {
        let k = Kernel::paley_wiener(d).unwrap();
        let vars: Vec<f64> = rs.iter().map(|&r| variance_radial(&k, r).unwrap().value).collect();
        let fit = fit_asymptotics(d, &rs, &vars).unwrap();
        let ok = fit.relative_deviation.abs() <= 0.10 && (fit.asymptotic_constant - 1.0 / (PI * PI)).abs() < 1e-15;
        pass &= ok;
        detail.push(format!("d={d} slope {:.6} vs {:.6} ({:+.2e})", fit.slope, asymptotic_constant(d).unwrap(), fit.relative_deviation));
    }
    Outcome { pass, detail: detail.join(", ") }
}

fn cross_route(trace_defects: &mut Vec<f64>) -> Outcome {
    let sine = Kernel::sine();
    let g = build_grid(&Region::cuboid(vec![-5.0], vec![5.0]).unwrap(), 400).unwrap();
    let s = spectral_eigenvalues(&assemble_operator(&sine, &g).unwrap()).unwrap();
    trace_defects.push(s.trace_defect());
    let rel_sine = (variance_spectral(&s) / variance_radial(&sine, 5.0).unwrap().value - 1.0).abs();

    let gin = Kernel::ginibre(1).unwrap();
    let g = build_grid_with_cap(&Region::ball(vec![0.0, 0.0], 1.0).unwrap(), 70, DEFAULT_NODE_CAP).unwrap();
    let s = spectral_eigenvalues(&assemble_operator(&gin, &g).unwrap()).unwrap();
    trace_defects.push(s.trace_defect());
    let rel_gin = (variance_spectral(&s) / variance_radial(&gin, 1.0).unwrap().value - 1.0).abs();
    Outcome {
        pass: rel_sine <= 0.02 && rel_gin <= 0.02 && g.len() <= DEFAULT_NODE_CAP,
        detail: format!("sine rel {rel_sine:.2e}, ginibre rel {rel_gin:.2e} ({} nodes)", g.len()),
    }
}

fn inequality_case(kernel: &Kernel, region: &Region, spacing: f64, trace_defects: &mut Vec<f64>) -> Result<(), String> {
    let grid = build_grid_spacing(region, spacing, DEFAULT_NODE_CAP).map_err(|e| e.to_string())?;
    let spectral = spectral_decompose(&assemble_operator(kernel, &grid).unwrap(), &grid).map_err(|e| e.to_string())?;
    trace_defects.push(spectral.trace_defect());
    let eval = EvalGrid::around(&grid, default_margin(kernel)).unwrap();
    let analysis = analyze(kernel, &spectral, &eval).map_err(|e| e.to_string())?;
    for delta in DELTAS {
        let rep = inequality_report(&spectral, &analysis, &eval, delta).unwrap();
        if let Some(c) = rep.checks.iter().find(|c| !c.holds) {
            return Err(format!("{} on {region:?} at delta {delta}: {} > {} + {}", c.name, c.lhs, c.rhs, c.slack));
        }
    }
    Ok(())
}

fn inequalities(trace_defects: &mut Vec<f64>) -> Outcome {
    let sine = Kernel::sine();
    let gin = Kernel::ginibre(1).unwrap();
    let mut cases = vec![(sine, Region::cuboid(vec![-5.0], vec![5.0]).unwrap(), 10.0 / 400.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for _ in 0..5 {
        let lo = rng.gen_range(-4.0..2.0);
        let len = rng.gen_range(0.5..8.0);
        cases.push((sine, Region::cuboid(vec![lo], vec![lo + len]).unwrap(), 0.05));
    }
    for _ in 0..5 {
        let lower: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.5..3.0)).collect();
        cases.push((gin, Region::cuboid(lower, upper).unwrap(), 0.1));
    }
    let failures: Vec<String> =
        cases.iter().filter_map(|(k, r, h)| inequality_case(k, r, *h, trace_defects).err()).collect();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{} regions x {} deltas x 4 checks hold", cases.len(), DELTAS.len())
        } else {
            failures.join("; ")
        },
    }
}

fn dual_inner_product(trace_defects: &mut Vec<f64>) -> Outcome {
    let sine = Kernel::sine();
    let grid = build_grid(&Region::cuboid(vec![-5.0], vec![5.0]).unwrap(), 400).unwrap();
    let spectral = spectral_decompose(&assemble_operator(&sine, &grid).unwrap(), &grid).unwrap();
    trace_defects.push(spectral.trace_defect());
    let eval = EvalGrid::around(&grid, default_margin(&sine)).unwrap();
    let a = analyze(&sine, &spectral, &eval).unwrap();
    let worst = a.inner_product_mismatch(&sine);
    Outcome { pass: worst <= 0.02, detail: format!("max mismatch {worst:.2e} over {} nodes", eval.len()) }
}

fn l1_convergence(trace_defects: &mut Vec<f64>) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let studies = [
        (Kernel::sine(), Region::cuboid(vec![-1.0], vec![1.0]).unwrap(), vec![2.0, 4.0, 8.0, 16.0]),
        (Kernel::ginibre(1).unwrap(), Region::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), vec![1.0, 2.0, 3.0]),
    ];
    for (kernel, lambda, rs) in studies {
        let policy = ResolutionPolicy::for_kernel(&kernel);
        let rows: Vec<_> = rs
            .iter()
            .map(|&r| {
                let (row, _, field) = l1_study_step(&kernel, &lambda, r, &policy).unwrap();
                pass &= field.conservation_defect() <= 1e-8;
                row
            })
            .collect();
        trace_defects.extend(rows.iter().map(|r| r.trace_defect));
        pass &= strictly_decreasing(&rows);
        let errs: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.err_normalized)).collect();
        detail.push(format!("{} [{}]", kernel.name(), errs.join(", ")));
    }
    Outcome { pass, detail: detail.join(", ") }
}

fn admissibility() -> Outcome {
    let gin: Vec<f64> = [1, 2].iter().map(|&c| Kernel::ginibre(c).unwrap().radial_normalization_check(12.0).unwrap()).collect();
    let pw: Vec<f64> = [1, 2].iter().map(|&d| Kernel::paley_wiener(d).unwrap().radial_normalization_check(1e4).unwrap()).collect();
    let g = gin.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let p = pw.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Outcome { pass: g < 1e-10 && p < 1e-2, detail: format!("ginibre max |res| {g:.2e}, paley-wiener max |res| {p:.2e}") }
}

fn trace_identity(trace_defects: &[f64]) -> Outcome {
    let worst = trace_defects.iter().copied().fold(0.0, f64::max);
    Outcome {
        pass: !trace_defects.is_empty() && worst <= TRACE_TOL,
        detail: format!("max |sum mu - trace| {worst:.2e} over {} discretizations", trace_defects.len()),
    }
}

fn main() -> ExitCode {
    let mut defects = Vec::new();
    let results = [
        run(1, "lens volume", 1.0, lens_equivalence),
        run(2, "asymptotic constant", 30.0, asymptotic_slope),
        run(3, "cross-route variance", 120.0, || cross_route(&mut defects)),
        run(4, "inequality suite", 180.0, || inequalities(&mut defects)),
        run(5, "dual inner product", 60.0, || dual_inner_product(&mut defects)),
        run(6, "l1 convergence", 300.0, || l1_convergence(&mut defects)),
        run(7, "kernel admissibility", 10.0, admissibility),
        run(8, "trace identity", f64::INFINITY, || trace_identity(&defects)),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
