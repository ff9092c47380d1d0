//! Midpoint-rule grids on regions, Nyström assembly of the restricted
//! operator `P_Λ K P_Λ` and its dense Hermitian eigendecomposition.

use std::collections::HashMap;
use std::sync::Once;

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Region};
use crate::kernels::Kernel;

/// Default cap on the number of nodes of an operator grid.
pub const DEFAULT_NODE_CAP: usize = 4096;
/// Cap on the number of nodes of an evaluation grid.
pub const EVAL_NODE_CAP: usize = 2_000_000;
/// Residual tolerance of the eigendecomposition, relative to `‖A‖`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Above this size the residual is checked on a sample of columns.
const FULL_RESIDUAL_MAX: usize = 1024;
const RESIDUAL_SAMPLE: usize = 64;
/// Largest bounding-box cell count scanned while building a grid.
const MAX_SCAN_CELLS: usize = 200_000_000;

/// Regular lattice of cell midpoints `origin_k + (i_k + 1/2) h_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl Lattice {
    pub fn coordinate(&self, axis: usize, index: i64) -> f64 {
        self.origin[axis] + (index as f64 + 0.5) * self.spacing[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    indices: Vec<i64>,
    lattice: Lattice,
    region: Region,
}

impl QuadratureGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integer lattice coordinates of node `i`.
    pub fn lattice_index(&self, i: usize) -> &[i64] {
        &self.indices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σw - volume(region)`; zero for boxes, the cell-clipping error otherwise.
    pub fn volume_error(&self) -> f64 {
        self.weight_sum() - self.region.volume()
    }

    /// Grid over the empty set (all sums vanish).
    pub fn empty(region: Region) -> Self {
        let dim = region.dim();
        QuadratureGrid {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
            indices: Vec::new(),
            lattice: Lattice { origin: vec![0.0; dim], spacing: vec![1.0; dim] },
            region,
        }
    }
}

fn for_each_index(counts: &[i64], lower: &[i64], mut f: impl FnMut(&[i64])) {
    let d = counts.len();
    if counts.iter().any(|&c| c <= 0) {
        return;
    }
    let mut idx: Vec<i64> = lower.to_vec();
    loop {
        f(&idx);
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < lower[axis] + counts[axis] {
                break;
            }
            idx[axis] = lower[axis];
        }
    }
}

fn scan_cells(counts: &[i64]) -> Result<usize> {
    let mut total: usize = 1;
    for &c in counts {
        total = total.checked_mul(c as usize).filter(|&t| t <= MAX_SCAN_CELLS).ok_or(Error::NodeCapExceeded { cap: MAX_SCAN_CELLS })?;
    }
    Ok(total)
}

fn build_on_lattice(region: &Region, lattice: Lattice, counts: &[i64], cap: usize) -> Result<QuadratureGrid> {
    let dim = region.dim();
    scan_cells(counts)?;
    let weight = lattice.cell_volume();
    let mut points = Vec::new();
    let mut indices = Vec::new();
    let mut x = vec![0.0; dim];
    let mut over = false;
    for_each_index(counts, &vec![0; dim], |idx| {
        if over {
            return;
        }
        for (k, &i) in idx.iter().enumerate() {
            x[k] = lattice.coordinate(k, i);
        }
        if region.contains(&x) {
            if points.len() / dim >= cap {
                over = true;
                return;
            }
            points.extend_from_slice(&x);
            indices.extend_from_slice(idx);
        }
    });
    if over {
        return Err(Error::NodeCapExceeded { cap });
    }
    if points.is_empty() {
        return Err(Error::DegenerateGrid);
    }
    let n = points.len() / dim;
    Ok(QuadratureGrid { dim, points, weights: vec![weight; n], indices, lattice, region: region.clone() })
}

/// Midpoint rule with `n_per_axis` cells per bounding-box axis; cells are kept
/// iff their midpoint lies in the region. Node order is lexicographic in the
/// cell index.
pub fn build_grid(region: &Region, n_per_axis: usize) -> Result<QuadratureGrid> {
    build_grid_with_cap(region, n_per_axis, DEFAULT_NODE_CAP)
}

pub fn build_grid_with_cap(region: &Region, n_per_axis: usize, cap: usize) -> Result<QuadratureGrid> {
    if n_per_axis < 2 {
        return Err(Error::InvalidArgument(format!("n_per_axis must be >= 2, got {n_per_axis}")));
    }
    let bbox = region.bbox();
    let dim = bbox.dim();
    let lattice = Lattice {
        origin: bbox.lower().to_vec(),
        spacing: (0..dim).map(|k| bbox.side(k) / n_per_axis as f64).collect(),
    };
    build_on_lattice(region, lattice, &vec![n_per_axis as i64; dim], cap)
}

/// Midpoint grid whose cells have side at most `spacing` (and at least two
/// cells per axis).
pub fn build_grid_spacing(region: &Region, spacing: f64, cap: usize) -> Result<QuadratureGrid> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidArgument(format!("grid spacing must be > 0, got {spacing}")));
    }
    let bbox = region.bbox();
    let dim = bbox.dim();
    let counts: Vec<i64> = (0..dim).map(|k| ((bbox.side(k) / spacing).ceil() as i64).max(2)).collect();
    let lattice = Lattice {
        origin: bbox.lower().to_vec(),
        spacing: (0..dim).map(|k| bbox.side(k) / counts[k] as f64).collect(),
    };
    build_on_lattice(region, lattice, &counts, cap)
}

/// Box grid `E ⊇ Λ` on the lattice of a Λ grid, extended by whole cells so
/// that every side grows by at least `margin`. Λ nodes reappear bit for bit
/// among the evaluation nodes.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    grid: QuadratureGrid,
    lambda_index: Vec<Option<usize>>,
    margin: f64,
}

impl EvalGrid {
    pub fn around(lambda: &QuadratureGrid, margin: f64) -> Result<Self> {
        Self::around_with_cap(lambda, margin, EVAL_NODE_CAP)
    }

    pub fn around_with_cap(lambda: &QuadratureGrid, margin: f64, cap: usize) -> Result<Self> {
        if !(margin > 0.0) || !margin.is_finite() {
            return Err(Error::InvalidArgument(format!("evaluation margin must be > 0, got {margin}")));
        }
        if lambda.is_empty() {
            return Err(Error::DegenerateGrid);
        }
        let dim = lambda.dim();
        let lat = lambda.lattice();
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for i in 0..lambda.len() {
            for (k, &c) in lambda.lattice_index(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let extra: Vec<i64> = (0..dim).map(|k| (margin / lat.spacing[k]).ceil() as i64).collect();
        let lower: Vec<i64> = (0..dim).map(|k| lo[k] - extra[k]).collect();
        let counts: Vec<i64> = (0..dim).map(|k| hi[k] - lo[k] + 1 + 2 * extra[k]).collect();
        let total = scan_cells(&counts)?;
        if total > cap {
            return Err(Error::NodeCapExceeded { cap });
        }
        let box_lo: Vec<f64> = (0..dim).map(|k| lat.origin[k] + lower[k] as f64 * lat.spacing[k]).collect();
        let box_hi: Vec<f64> = (0..dim).map(|k| lat.origin[k] + (lower[k] + counts[k]) as f64 * lat.spacing[k]).collect();
        let region = Region::Box(BoxRegion::new(box_lo, box_hi)?);

        let members: HashMap<&[i64], usize> = (0..lambda.len()).map(|i| (lambda.lattice_index(i), i)).collect();
        let mut points = Vec::with_capacity(total * dim);
        let mut indices = Vec::with_capacity(total * dim);
        let mut lambda_index = Vec::with_capacity(total);
        for_each_index(&counts, &lower, |idx| {
            for (k, &i) in idx.iter().enumerate() {
                points.push(lat.coordinate(k, i));
            }
            indices.extend_from_slice(idx);
            lambda_index.push(members.get(idx).copied());
        });
        let weight = lat.cell_volume();
        let grid = QuadratureGrid { dim, points, weights: vec![weight; total], indices, lattice: lat.clone(), region };
        Ok(EvalGrid { grid, lambda_index, margin })
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Index of the Λ node coinciding with evaluation node `e`, if any.
    pub fn lambda_node(&self, e: usize) -> Option<usize> {
        self.lambda_index[e]
    }

    /// `1_Λ` at evaluation node `e`.
    pub fn in_lambda(&self, e: usize) -> bool {
        self.lambda_index[e].is_some()
    }
}

#[derive(Debug, Clone)]
pub enum HermitianOperatorMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl HermitianOperatorMatrix {
    pub fn size(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Self::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Self::Complex(m) => m[(i, j)],
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.size()).map(|i| self.entry(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Self::Real(m) => m.norm_l2(),
            Self::Complex(m) => m.norm_l2(),
        }
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// `A_ij = √w_i K(x_i, x_j) √w_j`, then `A ← (A + A*)/2`. Rows are assembled
/// in parallel.
pub fn assemble_operator(kernel: &Kernel, grid: &QuadratureGrid) -> Result<HermitianOperatorMatrix> {
    if kernel.ambient_dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.ambient_dim(), got: grid.dim() });
    }
    let n = grid.len();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    if kernel.is_real() {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| sw[i] * kernel.eval_real_unchecked(grid.node(i), grid.node(j)) * sw[j]).collect())
            .collect();
        let a = Mat::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
        Ok(HermitianOperatorMatrix::Real(a))
    } else {
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| sw[i] * kernel.eval_unchecked(grid.node(i), grid.node(j)) * sw[j]).collect())
            .collect();
        let a = Mat::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i].conj()));
        Ok(HermitianOperatorMatrix::Complex(a))
    }
}

#[derive(Debug, Clone)]
pub enum EigenVectors {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl EigenVectors {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Self::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Self::Complex(m) => m[(i, j)],
        }
    }

    /// First `count` columns as a complex matrix.
    pub fn leading_complex(&self, count: usize) -> Mat<c64> {
        match self {
            Self::Real(m) => Mat::from_fn(m.nrows(), count, |i, j| Complex64::new(m[(i, j)], 0.0)),
            Self::Complex(m) => m.subcols(0, count).to_owned(),
        }
    }

    /// `max |(V*V - I)_ij|` over the first `count` columns.
    pub fn orthonormality_defect(&self, count: usize) -> f64 {
        let v = self.leading_complex(count);
        let gram = v.adjoint() * &v;
        let mut worst: f64 = 0.0;
        for i in 0..count {
            for j in 0..count {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Eigenpairs of a discretized `M_Λ`, eigenvalues in non-increasing order.
#[derive(Debug, Clone)]
pub struct SpectralData {
    raw: Vec<f64>,
    clamped: Vec<f64>,
    vectors: Option<EigenVectors>,
    grid: Option<QuadratureGrid>,
    matrix_trace: f64,
    residual: f64,
}

impl SpectralData {
    /// Spectral data without eigenvectors, e.g. for synthetic spectra.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let matrix_trace = values.iter().sum();
        let clamped = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        SpectralData { raw: values, clamped, vectors: None, grid: None, matrix_trace, residual: 0.0 }
    }

    pub fn size(&self) -> usize {
        self.raw.len()
    }

    /// Eigenvalues clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.clamped
    }

    /// Eigenvalues as returned by the eigensolver.
    pub fn raw_eigenvalues(&self) -> &[f64] {
        &self.raw
    }

    pub fn vectors(&self) -> Option<&EigenVectors> {
        self.vectors.as_ref()
    }

    pub fn grid(&self) -> Option<&QuadratureGrid> {
        self.grid.as_ref()
    }

    /// `trace(A) = Σ w_i K(x_i, x_i)`.
    pub fn matrix_trace(&self) -> f64 {
        self.matrix_trace
    }

    pub fn eigenvalue_sum(&self) -> f64 {
        self.raw.iter().sum()
    }

    /// `|Σμ_j - trace(A)|`.
    pub fn trace_defect(&self) -> f64 {
        (self.eigenvalue_sum() - self.matrix_trace).abs()
    }

    /// Largest overshoot of the raw eigenvalues outside `[0, 1]`.
    pub fn overshoot(&self) -> f64 {
        self.raw.iter().map(|&m| (m - 1.0).max(-m).max(0.0)).fold(0.0, f64::max)
    }

    /// `Σ_j |μ_j^raw - clamp(μ_j)|`.
    pub fn clamp_mass(&self) -> f64 {
        self.raw.iter().zip(&self.clamped).map(|(a, b)| (a - b).abs()).sum()
    }

    /// `max |AV - V diag(μ)|` on the checked columns, relative to `‖A‖`.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn sequential_linear_algebra() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn residual_columns(n: usize) -> Vec<usize> {
    if n <= FULL_RESIDUAL_MAX {
        (0..n).collect()
    } else {
        (0..RESIDUAL_SAMPLE).map(|k| k * (n - 1) / (RESIDUAL_SAMPLE - 1)).collect()
    }
}

fn eig_failure(a: &HermitianOperatorMatrix, reason: String) -> Error {
    Error::Eigensolver { size: a.size(), norm: a.frobenius_norm(), reason }
}

/// Dense Hermitian eigendecomposition. Eigenvalues are returned in
/// non-increasing order; the residual `‖AV - V diag(μ)‖_max` must stay below
/// `1e-9·‖A‖`.
pub fn spectral_decompose(a: &HermitianOperatorMatrix, grid: &QuadratureGrid) -> Result<SpectralData> {
    sequential_linear_algebra();
    let n = a.size();
    if n != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: n });
    }
    let (raw, vectors) = match a {
        HermitianOperatorMatrix::Real(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| eig_failure(a, format!("{e:?}")))?;
            let s = evd.S().column_vector();
            let raw: Vec<f64> = (0..n).rev().map(|k| s[k]).collect();
            let u = evd.U();
            let v = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
            (raw, EigenVectors::Real(v))
        }
        HermitianOperatorMatrix::Complex(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| eig_failure(a, format!("{e:?}")))?;
            let s = evd.S().column_vector();
            let raw: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
            let u = evd.U();
            let v = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
            (raw, EigenVectors::Complex(v))
        }
    };
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(eig_failure(a, "non-finite eigenvalue".into()));
    }
    let norm = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cols = residual_columns(n);
    let mut worst: f64 = 0.0;
    match (a, &vectors) {
        (HermitianOperatorMatrix::Real(m), EigenVectors::Real(v)) => {
            let vs = Mat::from_fn(n, cols.len(), |i, c| v[(i, cols[c])]);
            let av = m * &vs;
            for (c, &j) in cols.iter().enumerate() {
                for i in 0..n {
                    worst = worst.max((av[(i, c)] - raw[j] * vs[(i, c)]).abs());
                }
            }
        }
        (HermitianOperatorMatrix::Complex(m), EigenVectors::Complex(v)) => {
            let vs = Mat::from_fn(n, cols.len(), |i, c| v[(i, cols[c])]);
            let av = m * &vs;
            for (c, &j) in cols.iter().enumerate() {
                for i in 0..n {
                    worst = worst.max((av[(i, c)] - vs[(i, c)] * raw[j]).norm());
                }
            }
        }
        _ => unreachable!("eigenvector storage follows the matrix storage"),
    }
    let residual = if norm > 0.0 { worst / norm } else { worst };
    if residual > RESIDUAL_TOL {
        return Err(eig_failure(a, format!("residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")));
    }
    let clamped = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(SpectralData { raw, clamped, vectors: Some(vectors), grid: Some(grid.clone()), matrix_trace: a.trace(), residual })
}

/// Eigenvalues only (no residual check is possible without vectors).
pub fn spectral_eigenvalues(a: &HermitianOperatorMatrix) -> Result<SpectralData> {
    sequential_linear_algebra();
    let mut raw = match a {
        HermitianOperatorMatrix::Real(m) => m.self_adjoint_eigenvalues(Side::Lower),
        HermitianOperatorMatrix::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower),
    }
    .map_err(|e| eig_failure(a, format!("{e:?}")))?;
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(eig_failure(a, "non-finite eigenvalue".into()));
    }
    raw.reverse();
    let clamped = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(SpectralData { raw, clamped, vectors: None, grid: None, matrix_trace: a.trace(), residual: 0.0 })
}
