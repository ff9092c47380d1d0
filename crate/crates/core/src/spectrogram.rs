//! Accumulated spectrograms `ρ_Λ = Σ_{j≤N_Λ} |Ψ_j|²` with `Ψ_j` obtained from
//! the polar decomposition of `K P_Λ`, together with the quantities that
//! control `‖ρ_Λ - K(x,x)1_Λ‖₁`: the two forms of `⟨N_Λ K_x, K_x⟩`, the
//! defect `G`, the δ-counts and the associated inequalities.
//!
//! Everything is evaluated on an [`EvalGrid`] `E ⊇ Λ`. Mass outside `E` is
//! never dropped: it is known exactly from the totals and carried as a tail.

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{
    assemble_operator, build_grid_spacing, spectral_decompose, EigenVectors, EvalGrid, QuadratureGrid, SpectralData,
};
use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::kernels::Kernel;

/// Eigenvalues at or below this floor are treated as numerical zero modes.
pub const MU_FLOOR: f64 = 1e-12;
/// Tolerance of the integer-trace tie in [`count_n`].
pub const COUNT_TIE_TOL: f64 = 1e-9;
/// Default evaluation margin in correlation lengths.
pub const MARGIN_CORRELATION_LENGTHS: f64 = 4.0;
/// Relative slack of the inequality checks.
pub const RELATIVE_SLACK: f64 = 1e-6;
const ROW_BLOCK: usize = 256;

/// `N_Λ`: the smallest integer strictly greater than `trace - 1e-9`, and at
/// least 1.
pub fn count_n(trace: f64) -> Result<usize> {
    if !(trace >= 0.0) || !trace.is_finite() {
        return Err(Error::InvalidArgument(format!("trace must be finite and >= 0, got {trace}")));
    }
    Ok(((trace - COUNT_TIE_TOL).floor() + 1.0).max(1.0) as usize)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `C_δ = max(1/δ, 1/(1-δ))`.
pub fn c_delta(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok((1.0 / delta).max(1.0 / (1.0 - delta)))
}

/// Number of clamped eigenvalues above `1 - δ`.
pub fn count_n_delta(spectral: &SpectralData, delta: f64) -> Result<usize> {
    check_delta(delta)?;
    Ok(spectral.eigenvalues().iter().filter(|&&m| m > 1.0 - delta).count())
}

/// Evaluation margin of `4` correlation lengths.
pub fn default_margin(kernel: &Kernel) -> f64 {
    MARGIN_CORRELATION_LENGTHS * kernel.correlation_length()
}

/// Number of eigenpairs above [`MU_FLOOR`].
pub fn rank_above_floor(spectral: &SpectralData) -> usize {
    spectral.raw_eigenvalues().iter().take_while(|&&m| m > MU_FLOOR).count()
}

/// `Y[e, j] = Σ_i K(x_e, x_i) √w_i V_ij = (K P_Λ Φ_j)(x_e)` and the direct
/// `Σ_i w_i |K(x_e, x_i)|²`, computed in blocks of evaluation rows.
struct Projection {
    y: Mat<c64>,
    direct: Vec<f64>,
}

fn project(kernel: &Kernel, spectral: &SpectralData, eval: &EvalGrid, j_max: usize) -> Result<Projection> {
    let grid = spectral
        .grid()
        .ok_or_else(|| Error::InvalidArgument("spectral data carries no quadrature grid".into()))?;
    let vectors = spectral
        .vectors()
        .ok_or_else(|| Error::InvalidArgument("spectral data carries no eigenvectors".into()))?;
    if kernel.ambient_dim() != grid.dim() || eval.grid().dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.ambient_dim(), got: grid.dim() });
    }
    let n = grid.len();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let n_eval = eval.len();
    let node = |r: usize| eval.grid().node(r);
    let blocks: Vec<(Mat<c64>, Vec<f64>)> = match vectors {
        EigenVectors::Real(vr) if kernel.is_real() => {
            let v = vr.subcols(0, j_max);
            (0..n_eval.div_ceil(ROW_BLOCK))
                .into_par_iter()
                .map(|b| {
                    let start = b * ROW_BLOCK;
                    let rows = ROW_BLOCK.min(n_eval - start);
                    let block = Mat::from_fn(rows, n, |r, i| kernel.eval_real_unchecked(node(start + r), grid.node(i)) * sw[i]);
                    let direct = (0..rows).map(|r| (0..n).map(|i| block[(r, i)] * block[(r, i)]).sum()).collect();
                    let yb = &block * v;
                    (Mat::from_fn(rows, j_max, |r, j| c64::new(yb[(r, j)], 0.0)), direct)
                })
                .collect()
        }
        _ => {
            let v = vectors.leading_complex(j_max);
            (0..n_eval.div_ceil(ROW_BLOCK))
                .into_par_iter()
                .map(|b| {
                    let start = b * ROW_BLOCK;
                    let rows = ROW_BLOCK.min(n_eval - start);
                    let block = Mat::from_fn(rows, n, |r, i| kernel.eval_unchecked(node(start + r), grid.node(i)) * sw[i]);
                    let direct = (0..rows).map(|r| (0..n).map(|i| block[(r, i)].norm_sqr()).sum()).collect();
                    (&block * &v, direct)
                })
                .collect()
        }
    };
    let mut y = Mat::<c64>::zeros(n_eval, j_max);
    let mut direct = Vec::with_capacity(n_eval);
    for (b, (yb, db)) in blocks.into_iter().enumerate() {
        let start = b * ROW_BLOCK;
        y.submatrix_mut(start, 0, yb.nrows(), j_max).copy_from(&yb);
        direct.extend(db);
    }
    Ok(Projection { y, direct })
}

/// `Ψ_j` on the evaluation grid for `j ≤ j_max`, each scaled to unit discrete
/// `L²(E)` norm, with the norms `‖K P_Λ Φ_j‖_E` before scaling.
#[derive(Debug, Clone)]
pub struct PsiData {
    psi: Mat<c64>,
    raw_norms: Vec<f64>,
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl PsiData {
    pub fn len(&self) -> usize {
        self.raw_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_norms.is_empty()
    }

    /// Unit-normalized `Ψ_j(x_e)` (0-based `j`).
    pub fn value(&self, e: usize, j: usize) -> c64 {
        self.psi[(e, j)]
    }

    pub fn raw_norms(&self) -> &[f64] {
        &self.raw_norms
    }

    /// Raw eigenvalues `μ_j` belonging to the computed functions.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `max_j |raw_j² - μ_j| / μ_j`.
    pub fn norm_identity_defect(&self) -> f64 {
        self.raw_norms.iter().zip(&self.eigenvalues).map(|(r, m)| (r * r - m).abs() / m).fold(0.0, f64::max)
    }

    /// Discrete `⟨Ψ_i, Ψ_j⟩_E`.
    pub fn inner(&self, i: usize, j: usize) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for (e, w) in self.weights.iter().enumerate() {
            acc += self.psi[(e, i)].conj() * self.psi[(e, j)] * *w;
        }
        acc
    }

    /// `|Ψ_j(x_e)|²` under the normalization `Ψ_j = K P_Λ Φ_j / √μ_j`.
    fn exact_sq(&self, e: usize, j: usize) -> f64 {
        self.psi[(e, j)].norm_sqr() * self.raw_norms[j] * self.raw_norms[j] / self.eigenvalues[j]
    }
}

pub fn compute_psi(kernel: &Kernel, spectral: &SpectralData, eval: &EvalGrid, j_max: usize) -> Result<PsiData> {
    check_rank(spectral, j_max)?;
    let projection = project(kernel, spectral, eval, j_max)?;
    Ok(psi_from_projection(projection.y, spectral, eval, j_max))
}

fn check_rank(spectral: &SpectralData, j_max: usize) -> Result<()> {
    let mu = spectral.raw_eigenvalues();
    if j_max == 0 {
        return Err(Error::InvalidArgument("j_max must be >= 1".into()));
    }
    if j_max > mu.len() {
        return Err(Error::RankDeficient { index: j_max, value: 0.0, floor: MU_FLOOR });
    }
    if let Some(j) = (0..j_max).find(|&j| mu[j] <= MU_FLOOR) {
        return Err(Error::RankDeficient { index: j + 1, value: mu[j], floor: MU_FLOOR });
    }
    Ok(())
}

fn psi_from_projection(mut y: Mat<c64>, spectral: &SpectralData, eval: &EvalGrid, j_max: usize) -> PsiData {
    let mu = spectral.raw_eigenvalues();
    let weights = eval.grid().weights().to_vec();
    let mut raw_norms = Vec::with_capacity(j_max);
    for j in 0..j_max {
        let norm_sq: f64 = (0..y.nrows()).map(|e| weights[e] * y[(e, j)].norm_sqr()).sum();
        let norm = norm_sq.sqrt();
        raw_norms.push(norm);
        if norm > 0.0 {
            for e in 0..y.nrows() {
                y[(e, j)] /= norm;
            }
        }
    }
    PsiData { psi: y, raw_norms, eigenvalues: mu[..j_max].to_vec(), weights }
}

/// `ρ_Λ` on the evaluation grid with the mass accounting of the window.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrogramField {
    pub rho: Vec<f64>,
    /// `K(x,x)·1_Λ(x)` at the evaluation nodes.
    pub target: Vec<f64>,
    pub psi_norms: Vec<f64>,
    pub n: usize,
    pub trace: f64,
    /// `∫_E ρ_Λ`.
    pub window_mass: f64,
    /// `N_Λ - ∫_E ρ_Λ`.
    pub tail_mass: f64,
}

impl SpectrogramField {
    /// `|∫_E ρ + tail_mass - N|`.
    pub fn conservation_defect(&self) -> f64 {
        (self.window_mass + self.tail_mass - self.n as f64).abs()
    }

    /// `∫_E |ρ - K(x,x)1_Λ| + tail_mass`.
    pub fn l1_error(&self, eval: &EvalGrid) -> f64 {
        let w = eval.grid().weights();
        let window: f64 = self.rho.iter().zip(&self.target).zip(w).map(|((r, t), w)| w * (r - t).abs()).sum();
        window + self.tail_mass
    }
}

fn field_from_psi(kernel: &Kernel, spectral: &SpectralData, eval: &EvalGrid, psi: &PsiData) -> Result<SpectrogramField> {
    let trace = spectral.matrix_trace();
    let n = count_n(trace.max(0.0))?;
    if psi.len() < n {
        return Err(Error::InvalidArgument(format!("{} functions computed, {} needed", psi.len(), n)));
    }
    let rho: Vec<f64> = (0..eval.len()).map(|e| (0..n).map(|j| psi.exact_sq(e, j)).sum()).collect();
    let diag = kernel.diagonal();
    let target = (0..eval.len()).map(|e| if eval.in_lambda(e) { diag } else { 0.0 }).collect();
    let window_mass: f64 = rho.iter().zip(eval.grid().weights()).map(|(r, w)| r * w).sum();
    Ok(SpectrogramField {
        rho,
        target,
        psi_norms: psi.raw_norms[..n].to_vec(),
        n,
        trace,
        window_mass,
        tail_mass: n as f64 - window_mass,
    })
}

pub fn accumulated_spectrogram(kernel: &Kernel, spectral: &SpectralData, eval: &EvalGrid) -> Result<SpectrogramField> {
    let n = count_n(spectral.matrix_trace().max(0.0))?;
    let psi = compute_psi(kernel, spectral, eval, n)?;
    field_from_psi(kernel, spectral, eval, &psi)
}

/// `Σ_j μ_j |Ψ_j(x_e)|²` over the computed functions.
pub fn inner_product_spectral(psi: &PsiData, e: usize) -> f64 {
    (0..psi.len()).map(|j| psi.eigenvalues[j] * psi.exact_sq(e, j)).sum()
}

/// `Σ_i w_i |K(x, x_i)|²`.
pub fn inner_product_direct(kernel: &Kernel, grid: &QuadratureGrid, x: &[f64]) -> Result<f64> {
    if x.len() != kernel.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: kernel.ambient_dim(), got: x.len() });
    }
    Ok(grid.nodes().zip(grid.weights()).map(|(p, w)| w * kernel.modulus_sq_unchecked(x, p)).sum())
}

/// `G(x) = K(x,x)1_Λ(x) - ⟨N_Λ K_x, K_x⟩` on the evaluation grid.
#[derive(Debug, Clone, Serialize)]
pub struct DefectField {
    pub g: Vec<f64>,
    /// `Σ_e w_e |G(x_e)|`.
    pub window_l1: f64,
    /// Mass of `⟨N_Λ K_x, K_x⟩` outside the window, `trace - Σ_e w_e ip(x_e)`.
    pub tail: f64,
    /// `window_l1 + tail`.
    pub l1: f64,
    /// Largest violation of `G ≥ 0` on Λ and `G ≤ 0` off Λ.
    pub sign_violation: f64,
}

fn defect_from_direct(kernel: &Kernel, trace: f64, eval: &EvalGrid, direct: &[f64]) -> DefectField {
    let diag = kernel.diagonal();
    let w = eval.grid().weights();
    let mut g = Vec::with_capacity(direct.len());
    let mut window_l1 = 0.0;
    let mut ip_mass = 0.0;
    let mut sign_violation: f64 = 0.0;
    for (e, &ip) in direct.iter().enumerate() {
        let inside = eval.in_lambda(e);
        let value = if inside { diag - ip } else { -ip };
        sign_violation = sign_violation.max(if inside { -value } else { value });
        window_l1 += w[e] * value.abs();
        ip_mass += w[e] * ip;
        g.push(value);
    }
    let tail = trace - ip_mass;
    DefectField { g, window_l1, tail, l1: window_l1 + tail.max(0.0), sign_violation }
}

pub fn defect_g(kernel: &Kernel, grid: &QuadratureGrid, eval: &EvalGrid) -> Result<DefectField> {
    if kernel.ambient_dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.ambient_dim(), got: grid.dim() });
    }
    let direct: Vec<f64> = (0..eval.len())
        .into_par_iter()
        .map(|e| inner_product_direct(kernel, grid, eval.grid().node(e)))
        .collect::<Result<_>>()?;
    let trace: f64 = grid.weights().iter().map(|w| w * kernel.diagonal()).sum();
    Ok(defect_from_direct(kernel, trace, eval, &direct))
}

/// Everything derived from one projection pass over the evaluation grid.
#[derive(Debug, Clone)]
pub struct SpectrogramAnalysis {
    pub psi: PsiData,
    pub field: SpectrogramField,
    pub ip_spectral: Vec<f64>,
    pub ip_direct: Vec<f64>,
    /// `Σ_{μ_j ≤ floor} μ_j`, the mass left out of `ip_spectral`.
    pub ip_truncation: f64,
    /// Outside-window mass of `ip_spectral`, `Σ_j μ_j - Σ_e w_e ip(x_e)`.
    pub ip_spectral_tail: f64,
    pub defect: DefectField,
}

impl SpectrogramAnalysis {
    /// `max_e |ip_spectral - ip_direct| / K(x,x)`.
    pub fn inner_product_mismatch(&self, kernel: &Kernel) -> f64 {
        let diag = kernel.diagonal();
        self.ip_spectral.iter().zip(&self.ip_direct).map(|(a, b)| (a - b).abs() / diag).fold(0.0, f64::max)
    }
}

pub fn analyze(kernel: &Kernel, spectral: &SpectralData, eval: &EvalGrid) -> Result<SpectrogramAnalysis> {
    let n = count_n(spectral.matrix_trace().max(0.0))?;
    let rank = rank_above_floor(spectral);
    let j_max = rank.max(n);
    // validates j_max against the floor
    check_rank(spectral, j_max)?;
    let Projection { y, direct } = project(kernel, spectral, eval, j_max)?;
    let psi = psi_from_projection(y, spectral, eval, j_max);
    let field = field_from_psi(kernel, spectral, eval, &psi)?;
    let ip_spectral: Vec<f64> = (0..eval.len()).map(|e| inner_product_spectral(&psi, e)).collect();
    let defect = defect_from_direct(kernel, spectral.matrix_trace(), eval, &direct);
    let ip_truncation = spectral.raw_eigenvalues()[rank..].iter().filter(|&&m| m > 0.0).sum();
    let w = eval.grid().weights();
    let ip_mass: f64 = ip_spectral.iter().zip(w).map(|(v, w)| v * w).sum();
    let mu_sum: f64 = psi.eigenvalues().iter().sum();
    Ok(SpectrogramAnalysis {
        psi,
        field,
        ip_spectral,
        ip_direct: direct,
        ip_truncation,
        ip_spectral_tail: mu_sum - ip_mass,
        defect,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &str, lhs: f64, rhs: f64, extra_slack: f64) -> Self {
        let slack = RELATIVE_SLACK * rhs.abs() + extra_slack;
        InequalityCheck { name: name.to_string(), lhs, rhs, slack, holds: lhs <= rhs + slack }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub delta: f64,
    pub c_delta: f64,
    pub n_delta: usize,
    pub e_count: f64,
    pub variance: f64,
    pub g_l1: f64,
    /// Discretization slack added to every check.
    pub quadrature_slack: f64,
    pub checks: Vec<InequalityCheck>,
}

impl DiagnosticsReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Inequality report from spectral data alone: the δ-count bound and
/// `var ≤ E`. Used for synthetic spectra.
pub fn spectral_inequalities(spectral: &SpectralData, delta: f64) -> Result<DiagnosticsReport> {
    let c = c_delta(delta)?;
    let n_delta = count_n_delta(spectral, delta)?;
    let e_count = spectral.matrix_trace();
    let variance = variance_of(spectral);
    let q = spectral.clamp_mass();
    Ok(DiagnosticsReport {
        delta,
        c_delta: c,
        n_delta,
        e_count,
        variance,
        g_l1: f64::NAN,
        quadrature_slack: q,
        checks: vec![
            InequalityCheck::new("delta_count", (n_delta as f64 - e_count).abs(), c * variance, q),
            InequalityCheck::new("variance_below_mean", variance, e_count, q),
        ],
    })
}

fn variance_of(spectral: &SpectralData) -> f64 {
    spectral.eigenvalues().iter().map(|m| m * (1.0 - m)).sum()
}

/// Checks, with `E = trace` and `var = Σ μ_j(1 - μ_j)` on clamped eigenvalues:
/// (a) `‖ρ - Σ μ_j|Ψ_j|²‖₁ ≤ 1 + 2δE + 2(1-δ)C_δ var`,
/// (b) `|N^δ - E| ≤ C_δ var`, (c) `‖G‖₁ ≤ 2 var`, (d) `var ≤ E`.
pub fn inequality_report(spectral: &SpectralData, analysis: &SpectrogramAnalysis, eval: &EvalGrid, delta: f64) -> Result<DiagnosticsReport> {
    let c = c_delta(delta)?;
    let n_delta = count_n_delta(spectral, delta)?;
    let e_count = spectral.matrix_trace();
    let variance = variance_of(spectral);
    let w = eval.grid().weights();
    let tail_rho = analysis.field.tail_mass;
    let tail_ip = analysis.ip_spectral_tail + analysis.ip_truncation;
    let window: f64 = analysis.field.rho.iter().zip(&analysis.ip_spectral).zip(w).map(|((r, i), w)| w * (r - i).abs()).sum();
    // outside E, |ρ - ip| ≤ ρ + ip, whose masses are the two tails
    let lhs_a = window + tail_rho.max(0.0) + tail_ip.max(0.0);
    let q = spectral.clamp_mass() + (-tail_rho).max(0.0) + (-tail_ip).max(0.0) + (-analysis.defect.tail).max(0.0);
    let g_l1 = analysis.defect.l1;
    let checks = vec![
        InequalityCheck::new("psi_approximation", lhs_a, 1.0 + 2.0 * delta * e_count + 2.0 * (1.0 - delta) * c * variance, q),
        InequalityCheck::new("delta_count", (n_delta as f64 - e_count).abs(), c * variance, q),
        InequalityCheck::new("defect_l1", g_l1, 2.0 * variance, q),
        InequalityCheck::new("variance_below_mean", variance, e_count, q),
    ];
    Ok(DiagnosticsReport { delta, c_delta: c, n_delta, e_count, variance, g_l1, quadrature_slack: q, checks })
}

/// Grid resolution for the convergence study: a target spacing, reduced
/// uniformly when the node cap would be exceeded.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolutionPolicy {
    pub spacing: f64,
    pub node_cap: usize,
    /// Evaluation margin; `None` uses [`default_margin`].
    pub margin: Option<f64>,
}

impl ResolutionPolicy {
    pub fn new(spacing: f64) -> Self {
        ResolutionPolicy { spacing, node_cap: crate::discretize::DEFAULT_NODE_CAP, margin: None }
    }

    pub fn for_kernel(kernel: &Kernel) -> Self {
        match kernel {
            Kernel::Ginibre { .. } => Self::new(0.1),
            Kernel::PaleyWiener { .. } => Self::new(0.05),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct L1Row {
    pub r: f64,
    pub n: usize,
    pub trace: f64,
    pub e_count: f64,
    pub err_raw: f64,
    pub err_normalized: f64,
    pub tail_mass: f64,
    pub window_mass: f64,
    pub nodes: usize,
    pub spacing: f64,
    /// The node cap forced a coarser grid than requested.
    pub saturated: bool,
    pub trace_defect: f64,
}

/// Grid on `region` at the policy spacing, coarsened until it fits the cap.
pub fn grid_for_policy(region: &Region, policy: &ResolutionPolicy) -> Result<(QuadratureGrid, bool)> {
    let mut spacing = policy.spacing;
    let mut saturated = false;
    for _ in 0..64 {
        match build_grid_spacing(region, spacing, policy.node_cap) {
            Ok(g) => return Ok((g, saturated)),
            Err(Error::NodeCapExceeded { .. }) => {
                saturated = true;
                spacing *= 1.05;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NodeCapExceeded { cap: policy.node_cap })
}

/// One row of the convergence study at dilation `r`, with its analysis.
pub fn l1_study_step(kernel: &Kernel, lambda: &Region, r: f64, policy: &ResolutionPolicy) -> Result<(L1Row, EvalGrid, SpectrogramField)> {
    let region = lambda.dilate(r)?;
    let (grid, saturated) = grid_for_policy(&region, policy)?;
    let a = assemble_operator(kernel, &grid)?;
    let spectral = spectral_decompose(&a, &grid)?;
    let margin = policy.margin.unwrap_or_else(|| default_margin(kernel));
    let eval = EvalGrid::around(&grid, margin)?;
    let field = accumulated_spectrogram(kernel, &spectral, &eval)?;
    let err_raw = field.l1_error(&eval);
    let row = L1Row {
        r,
        n: field.n,
        trace: spectral.matrix_trace(),
        e_count: kernel.diagonal() * region.volume(),
        err_raw,
        err_normalized: err_raw / field.n as f64,
        tail_mass: field.tail_mass,
        window_mass: field.window_mass,
        nodes: grid.len(),
        spacing: grid.lattice().spacing[0],
        saturated,
        trace_defect: spectral.trace_defect(),
    };
    Ok((row, eval, field))
}

pub fn l1_convergence_study(kernel: &Kernel, lambda: &Region, r_list: &[f64], policy: &ResolutionPolicy) -> Result<Vec<L1Row>> {
    if r_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("R list must be strictly ascending".into()));
    }
    r_list.iter().map(|&r| l1_study_step(kernel, lambda, r, policy).map(|(row, _, _)| row)).collect()
}

/// True if `err_normalized` strictly decreases along the rows.
pub fn strictly_decreasing(rows: &[L1Row]) -> bool {
    rows.windows(2).all(|w| w[1].err_normalized < w[0].err_normalized)
}
