use std::path::PathBuf;

use acc_specgram::bessel::{bessel_j, bessel_j_series};
use acc_specgram::discretize::{
    assemble_operator, build_grid_spacing, build_grid_with_cap, spectral_decompose, spectral_eigenvalues, EvalGrid, QuadratureGrid,
};
use acc_specgram::geometry::{lens_volume_exact, lens_volume_series_capped, LensSpec, DEFAULT_MAX_TERMS};
use acc_specgram::spectrogram::{accumulated_spectrogram, analyze, default_margin, grid_for_policy, inequality_report, ResolutionPolicy};
use acc_specgram::variance::{expected_count, fit_asymptotics, variance_radial, variance_spectral, variance_subadditive_upper, AsymptoticFit};
use acc_specgram::{Error, Kernel, Region};
use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{usage, Format};
use crate::output::{write_fields_csv, write_json, write_summary_csv, FieldRow, SummaryRow, VERSION_HEADER};

/// Everything that determines the output of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub kernel: Kernel,
    pub region: Region,
    #[serde(rename = "R")]
    pub r_list: Vec<f64>,
    pub n_per_axis: Option<usize>,
    pub spacing: Option<f64>,
    pub node_cap: usize,
    pub margin: Option<f64>,
    pub delta: f64,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub fields: Option<PathBuf>,
}

impl RunConfig {
    fn grid(&self, region: &Region, default_spacing: f64) -> anyhow::Result<(QuadratureGrid, bool)> {
        let grid = match (self.n_per_axis, self.spacing) {
            (Some(n), _) => (build_grid_with_cap(region, n, self.node_cap)?, false),
            (None, spacing) => {
                let policy = ResolutionPolicy { spacing: spacing.unwrap_or(default_spacing), node_cap: self.node_cap, margin: None };
                grid_for_policy(region, &policy)?
            }
        };
        Ok(grid)
    }
}

#[derive(Serialize)]
struct Document<'a, F: Serialize> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    summary: &'a [SummaryRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    fields: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<&'a AsymptoticFit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    upper_subadditive: Vec<f64>,
    warnings: &'a [String],
}

fn version() -> &'static str {
    VERSION_HEADER.trim_start_matches("# ")
}

fn radial_if_ball(kernel: &Kernel, region: &Region, warnings: &mut Vec<String>, r: f64) -> anyhow::Result<Option<f64>> {
    Ok(match region {
        Region::Ball(b) => {
            let v = variance_radial(kernel, b.radius())?;
            if v.accuracy_warning {
                warnings.push(format!("var_radial at R = {r}: error estimate {:.3e} exceeds 1% of the value", v.error));
            }
            Some(v.value)
        }
        _ => None,
    })
}

pub fn spectrogram(cfg: &RunConfig) -> anyhow::Result<()> {
    let kernel = &cfg.kernel;
    let margin = cfg.margin.unwrap_or_else(|| default_margin(kernel));
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    let mut warnings = Vec::new();
    for &r in &cfg.r_list {
        let region = cfg.region.dilate(r)?;
        let (grid, saturated) = cfg.grid(&region, ResolutionPolicy::for_kernel(kernel).spacing)?;
        if saturated {
            warnings.push(format!("R = {r}: grid coarsened to spacing {:.4e} to stay within {} nodes", grid.lattice().spacing[0], cfg.node_cap));
        }
        let a = assemble_operator(kernel, &grid)?;
        let spectral = spectral_decompose(&a, &grid).with_context(|| format!("R = {r}"))?;
        let eval = EvalGrid::around(&grid, margin)?;
        let field = accumulated_spectrogram(kernel, &spectral, &eval).with_context(|| format!("R = {r}"))?;
        let err_raw = field.l1_error(&eval);
        let e_count = expected_count(kernel, &region);
        let var_spectral = variance_spectral(&spectral);
        let var_radial = radial_if_ball(kernel, &region, &mut warnings, r)?;
        rows.push(SummaryRow {
            r,
            trace: Some(spectral.matrix_trace()),
            n: Some(field.n),
            e_count,
            var_spectral: Some(var_spectral),
            var_radial,
            ratio: Some(var_radial.unwrap_or(var_spectral) / e_count),
            err_raw: Some(err_raw),
            err_normalized: Some(err_raw / field.n as f64),
            tail_mass: Some(field.tail_mass),
        });
        let nodes = eval.grid();
        fields.extend((0..eval.len()).map(|e| FieldRow { r, x: nodes.node(e).to_vec(), rho: field.rho[e], target: field.target[e] }));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match cfg.format {
        Format::Csv => {
            write_summary_csv(cfg.output.as_deref(), &rows)?;
            if let Some(p) = &cfg.fields {
                write_fields_csv(p, kernel.ambient_dim(), &fields)?;
            }
            Ok(())
        }
        Format::Json => {
            for row in &rows {
                row.ensure_finite()?;
            }
            if fields.iter().any(|f| !f.rho.is_finite()) {
                anyhow::bail!("non-finite spectrogram value");
            }
            let doc = Document {
                version: version(),
                command: "spectrogram",
                config: cfg,
                summary: &rows,
                fields: Some(&fields),
                fit: None,
                upper_subadditive: Vec::new(),
                warnings: &warnings,
            };
            write_json(cfg.output.as_deref(), &doc)
        }
    }
}

/// Spectral-route options of the variance command.
#[derive(Debug, Clone, Copy)]
pub struct SpectralRoute {
    pub enabled: bool,
    /// Grids with more nodes are skipped rather than coarsened.
    pub max_nodes: usize,
}

fn default_variance_spacing(kernel: &Kernel) -> f64 {
    match kernel {
        Kernel::Ginibre { .. } => 0.08,
        Kernel::PaleyWiener { .. } => 0.05,
    }
}

fn spectral_variance(cfg: &RunConfig, region: &Region, route: SpectralRoute) -> anyhow::Result<Option<f64>> {
    if !route.enabled {
        return Ok(None);
    }
    let cap = route.max_nodes.min(cfg.node_cap);
    let grid = match cfg.n_per_axis {
        Some(n) => build_grid_with_cap(region, n, cap),
        None => build_grid_spacing(region, cfg.spacing.unwrap_or_else(|| default_variance_spacing(&cfg.kernel)), cap),
    };
    let grid = match grid {
        Ok(g) => g,
        Err(Error::NodeCapExceeded { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let a = assemble_operator(&cfg.kernel, &grid)?;
    Ok(Some(variance_spectral(&spectral_eigenvalues(&a)?)))
}

pub fn variance(cfg: &RunConfig, route: SpectralRoute) -> anyhow::Result<()> {
    let kernel = &cfg.kernel;
    let mut warnings = Vec::new();
    let per_r: Vec<(SummaryRow, Option<f64>, Vec<String>)> = cfg
        .r_list
        .par_iter()
        .map(|&r| -> anyhow::Result<_> {
            let region = cfg.region.dilate(r)?;
            let mut w = Vec::new();
            let e_count = expected_count(kernel, &region);
            let var_radial = radial_if_ball(kernel, &region, &mut w, r)?;
            let var_spectral = spectral_variance(cfg, &region, route)?;
            if route.enabled && var_spectral.is_none() {
                w.push(format!("var_spectral at R = {r}: grid exceeds {} nodes, omitted", route.max_nodes.min(cfg.node_cap)));
            }
            let upper = match region {
                Region::DisjointBallUnion(_) => Some(variance_subadditive_upper(kernel, &region, 1.0)?),
                _ => None,
            };
            let ratio = var_radial.or(var_spectral).map(|v| v / e_count);
            let row = SummaryRow { r, e_count, var_spectral, var_radial, ratio, ..Default::default() };
            Ok((row, upper, w))
        })
        .collect::<anyhow::Result<_>>()?;
    let mut rows = Vec::new();
    let mut upper = Vec::new();
    for (row, u, w) in per_r {
        rows.push(row);
        upper.extend(u);
        warnings.extend(w);
    }

    let fit = match (kernel, &cfg.region) {
        (Kernel::PaleyWiener { dim }, Region::Ball(_)) => {
            let vars: Vec<f64> = rows.iter().filter_map(|r| r.var_radial).collect();
            match fit_asymptotics(*dim, &cfg.r_list, &vars) {
                Ok(f) => Some(f),
                Err(e) => {
                    warnings.push(format!("fit: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match cfg.format {
        Format::Csv => {
            write_summary_csv(cfg.output.as_deref(), &rows)?;
            if let Some(f) = &fit {
                eprintln!(
                    "fit: slope {:.6e} over {} points, constant {:.6e}, relative deviation {:+.3e}",
                    f.slope, f.window, f.asymptotic_constant, f.relative_deviation
                );
            }
            Ok(())
        }
        Format::Json => {
            for row in &rows {
                row.ensure_finite()?;
            }
            let doc = Document::<()> {
                version: version(),
                command: "variance",
                config: cfg,
                summary: &rows,
                fields: None,
                fit: fit.as_ref(),
                upper_subadditive: upper,
                warnings: &warnings,
            };
            write_json(cfg.output.as_deref(), &doc)
        }
    }
}

struct Line {
    name: String,
    pass: bool,
    detail: String,
}

fn line(name: &str, lhs: f64, rhs: f64, slack: f64) -> Line {
    Line { name: name.into(), pass: lhs <= rhs + slack, detail: format!("lhs={lhs:.6e} rhs={rhs:.6e} slack={slack:.3e}") }
}

fn lens_check(max_terms: usize) -> Line {
    let mut worst: f64 = 0.0;
    let mut failure = None;
    'outer: for d in 1..=3 {
        for k in 0..50 {
            let spec = LensSpec::new(d, 2.2 * k as f64 / 49.0, 1.0).expect("valid lens");
            match lens_volume_series_capped(spec, 1e-12, max_terms) {
                Ok(v) => worst = worst.max((v - lens_volume_exact(spec)).abs()),
                Err(e) => {
                    failure = Some(format!("d={d} r={:.4}: {e}", spec.offset()));
                    break 'outer;
                }
            }
        }
    }
    match failure {
        Some(msg) => Line { name: "lens_series_vs_exact".into(), pass: false, detail: msg },
        None => line("lens_series_vs_exact", worst, 1e-8, 0.0),
    }
}

fn bessel_check() -> Line {
    let mut worst: f64 = 0.0;
    for twice_nu in 0..=6 {
        let nu = twice_nu as f64 / 2.0;
        for k in 0..=100 {
            let x = 0.1 * k as f64;
            let a = bessel_j(nu, x).expect("supported order");
            let b = bessel_j_series(nu, x).expect("supported order");
            worst = worst.max((a - b).abs() / a.abs().max(1e-3));
        }
    }
    line("bessel_series_cross_check", worst, 1e-10, 0.0)
}

/// Runs every invariant on one discretization; returns true if all pass.
pub fn check(cfg: &RunConfig, series_terms: Option<usize>) -> anyhow::Result<bool> {
    let kernel = &cfg.kernel;
    let r = *cfg.r_list.first().context("R: required")?;
    let region = cfg.region.dilate(r)?;
    let (grid, _) = cfg.grid(&region, ResolutionPolicy::for_kernel(kernel).spacing)?;
    let spectral = spectral_decompose(&assemble_operator(kernel, &grid)?, &grid)?;
    let eval = EvalGrid::around(&grid, cfg.margin.unwrap_or_else(|| default_margin(kernel)))?;
    let analysis = analyze(kernel, &spectral, &eval)?;
    let report = inequality_report(&spectral, &analysis, &eval, cfg.delta).map_err(|e| usage("delta", e))?;

    println!("{VERSION_HEADER}");
    println!("kernel = {}, nodes = {}, eval nodes = {}", kernel.name(), grid.len(), eval.len());
    println!("delta = {}", report.delta);
    println!("C_delta = {}", report.c_delta);
    println!("N_delta = {}", report.n_delta);
    println!("E = {:.16e}", report.e_count);
    println!("var = {:.16e}", report.variance);

    let mut lines: Vec<Line> = report.checks.iter().map(|c| line(&c.name, c.lhs, c.rhs, c.slack)).collect();
    lines.push(line("trace_identity", spectral.trace_defect(), 1e-10, 0.0));
    lines.push(line("inner_product_dual_forms", analysis.inner_product_mismatch(kernel), 0.02, 0.0));
    lines.push(line("mass_conservation", analysis.field.conservation_defect(), 1e-8, 0.0));
    let (r_max, tol) = match kernel {
        Kernel::Ginibre { .. } => (12.0, 1e-10),
        Kernel::PaleyWiener { .. } => (1e4, 1e-2),
    };
    lines.push(line("radial_normalization", kernel.radial_normalization_check(r_max)?.abs(), tol, 0.0));
    lines.push(lens_check(series_terms.unwrap_or(DEFAULT_MAX_TERMS)));
    lines.push(bessel_check());

    for l in &lines {
        println!("{} {:<28} {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.name.as_str()).collect();
    if failed.is_empty() {
        Ok(true)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(false)
    }
}

pub fn lens(dim: usize, offset: f64, radius: f64) -> anyhow::Result<()> {
    let spec = LensSpec::new(dim, offset, radius).map_err(|e| usage("lens", e))?;
    let series = lens_volume_series_capped(spec, 1e-12, DEFAULT_MAX_TERMS)?;
    let exact = lens_volume_exact(spec);
    println!("series     {series:.16e}");
    println!("exact      {exact:.16e}");
    println!("difference {:.3e}", series - exact);
    Ok(())
}
