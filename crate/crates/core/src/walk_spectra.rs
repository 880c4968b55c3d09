//! Spectra of the normalized adjacency `B = D^{-1/2} A D^{-1/2}` and hitting
//! times of simple random walk.
//!
//! Hitting times are available by two independent routes: first-step linear
//! solves ([`hitting_matrix_exact`]) and the spectral formula
//! ([`hitting_matrix_spectral`]). The top eigenpair is excluded by position
//! after sorting, never by thresholding its value.

use std::sync::Once;

use faer::{Mat, Side};

use crate::graphs::{stationary_distribution, Graph};
use crate::sum::{sum, CompensatedSum};
use crate::{Error, Result};

static SEQUENTIAL: Once = Once::new();

/// Dense kernels run single-threaded; parallelism lives at the trial level so
/// results are bitwise independent of the worker count.
pub(crate) fn init_dense_backend() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
}

/// `b_ij = a_ij / sqrt(d_i d_j)`.
pub fn normalized_adjacency(g: &Graph) -> Result<Mat<f64>> {
    if let Some(v) = g.degrees().iter().position(|&d| d == 0) {
        return Err(Error::Disconnected { vertex: v + 1 });
    }
    let n = g.n_plus_1();
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let mut b = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            b.write(i, j, inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    Ok(b)
}

/// Eigenvalues sorted descending, optionally with orthonormal eigenvectors
/// stored column-wise in the same order.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Mat<f64>>,
    /// `max_k |B v_k - lambda_k v_k|` when vectors are present.
    pub residual: Option<f64>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues after removing the top one (index 0 after sorting).
    pub fn nontrivial(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }

    /// Max-norm error of `B - sum_k lambda_k v_k v_k^T`.
    pub fn reconstruction_error(&self, b: &Mat<f64>) -> Result<f64> {
        let v = self.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
        let n = v.nrows();
        let mut scaled = v.clone();
        for k in 0..n {
            let lambda = self.eigenvalues[k];
            for i in 0..n {
                scaled.write(i, k, scaled.read(i, k) * lambda);
            }
        }
        let rebuilt = &scaled * v.transpose();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                err = err.max((rebuilt.read(i, j) - b.read(i, j)).abs());
            }
        }
        Ok(err)
    }

    /// Max-norm of `V^T V - I`.
    pub fn orthonormality_error(&self) -> Result<f64> {
        let v = self.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
        let gram = v.transpose() * v;
        let n = v.ncols();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram.read(i, j) - target).abs());
            }
        }
        Ok(err)
    }
}

fn max_asymmetry(b: &Mat<f64>) -> f64 {
    let n = b.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((b.read(i, j) - b.read(j, i)).abs());
        }
    }
    worst
}

/// Full real spectrum of a symmetric matrix.
pub fn spectrum(b: &Mat<f64>, want_vectors: bool) -> Result<SpectralData> {
    if b.nrows() != b.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let asym = max_asymmetry(b);
    if !(asym <= 1e-12) {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    init_dense_backend();
    let n = b.nrows();
    if !want_vectors {
        let mut values = b.selfadjoint_eigenvalues(Side::Lower);
        values.sort_by(|a, b| b.total_cmp(a));
        return Ok(SpectralData { eigenvalues: values, eigenvectors: None, residual: None });
    }

    let evd = b.selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| s.read(y).total_cmp(&s.read(x)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| s.read(k)).collect();
    let mut vectors = Mat::<f64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        // Fix the sign so the largest-magnitude component is positive.
        let mut pivot = 0.0f64;
        for i in 0..n {
            let x = u.read(i, k);
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.write(i, col, sign * u.read(i, k));
        }
    }
    let bv = b * &vectors;
    let mut residual = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            residual = residual.max((bv.read(i, k) - eigenvalues[k] * vectors.read(i, k)).abs());
        }
    }
    Ok(SpectralData { eigenvalues, eigenvectors: Some(vectors), residual: Some(residual) })
}

/// Eigenvalues (no vectors) of `B` for a connected graph.
pub fn graph_spectrum(g: &Graph, want_vectors: bool) -> Result<SpectralData> {
    g.require_connected()?;
    spectrum(&normalized_adjacency(g)?, want_vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HittingMethod {
    ExactLinear,
    Spectral,
}

/// `values[(i, j)]` is the expected first-passage time from `i` to `j`.
#[derive(Clone, Debug)]
pub struct HittingMatrix {
    pub values: Mat<f64>,
    pub method: HittingMethod,
}

impl HittingMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.read(i, j)
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// Max over `i != j` of `|H_ij - 1 - (1/d_i) sum_{k ~ i, k != j} H_kj|`.
    pub fn first_step_residual(&self, g: &Graph) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                let s = sum(g.neighbors(i).iter().filter(|&&k| k != j).map(|&k| self.get(k, j)));
                let r = self.get(i, j) - 1.0 - s / g.degrees()[i] as f64;
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Max over entries of `|a - b| / max(|b|, 1)`.
    pub fn max_relative_difference(&self, other: &HittingMatrix) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let b = other.get(i, j);
                worst = worst.max((self.get(i, j) - b).abs() / b.abs().max(1.0));
            }
        }
        worst
    }
}

/// Hitting times by first-step analysis: for each target `j`, solve
/// `h_i = 1 + (1/d_i) sum_{k ~ i, k != j} h_k` over `i != j` with an LU
/// factorization of the principal submatrix of `I - P`.
pub fn hitting_matrix_exact(g: &Graph) -> Result<HittingMatrix> {
    g.require_connected()?;
    init_dense_backend();
    let n = g.n_plus_1();
    let m = n - 1;
    let mut values = Mat::<f64>::zeros(n, n);
    let mut sys = Mat::<f64>::zeros(m, m);
    let ones = Mat::<f64>::from_fn(m, 1, |_, _| 1.0);
    for j in 0..n {
        let idx = |v: usize| if v < j { v } else { v - 1 };
        sys.fill_zero();
        for i in (0..n).filter(|&i| i != j) {
            let r = idx(i);
            sys.write(r, r, 1.0);
            let w = 1.0 / g.degrees()[i] as f64;
            for &k in g.neighbors(i) {
                if k != j {
                    let c = idx(k);
                    sys.write(r, c, sys.read(r, c) - w);
                }
            }
        }
        let lu = sys.partial_piv_lu();
        let h = faer::linalg::solvers::SpSolver::solve(&lu, &ones);
        // residual of the defining equations, relative to the solution size
        let back = &sys * &h;
        let mut residual = 0.0f64;
        let mut scale = 1.0f64;
        for r in 0..m {
            let x = h.read(r, 0);
            if !x.is_finite() {
                return Err(Error::SingularSystem { target: j + 1, residual: f64::INFINITY });
            }
            scale = scale.max(x.abs());
            residual = residual.max((back.read(r, 0) - 1.0).abs());
        }
        if residual > 1e-10 * scale {
            return Err(Error::SingularSystem { target: j + 1, residual });
        }
        for i in (0..n).filter(|&i| i != j) {
            values.write(i, j, h.read(idx(i), 0));
        }
    }
    Ok(HittingMatrix { values, method: HittingMethod::ExactLinear })
}

/// Hitting times from the spectral formula
/// `H_ij = 2|E| sum_{k>=2} (1/(1 - lambda_k)) (v_kj^2/d_j - v_ki v_kj / sqrt(d_i d_j))`.
pub fn hitting_matrix_spectral(g: &Graph, spectral: &SpectralData) -> Result<HittingMatrix> {
    g.require_connected()?;
    let v = spectral.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let n = g.n_plus_1();
    if v.nrows() != n {
        return Err(Error::InvalidArgument("spectral data does not match graph size".into()));
    }
    init_dense_backend();
    // green = sum_{k>=2} v_k v_k^T / (1 - lambda_k)
    let tail = v.as_ref().subcols(1, n - 1);
    let mut weighted = tail.to_owned();
    for k in 0..n - 1 {
        let w = 1.0 / (1.0 - spectral.eigenvalues[k + 1]);
        for i in 0..n {
            weighted.write(i, k, weighted.read(i, k) * w);
        }
    }
    let green = &weighted * tail.transpose();
    let two_e = (2 * g.edge_count()) as f64;
    let d: Vec<f64> = g.degrees().iter().map(|&x| x as f64).collect();
    let values = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            two_e * (green.read(j, j) / d[j] - green.read(i, j) / (d[i] * d[j]).sqrt())
        }
    });
    Ok(HittingMatrix { values, method: HittingMethod::Spectral })
}

/// `H^i = sum_j pi_j H_ij` for every start `i`.
pub fn avg_starting_from_matrix(h: &HittingMatrix, pi: &[f64]) -> Vec<f64> {
    let n = h.size();
    (0..n).map(|i| sum((0..n).map(|j| pi[j] * h.get(i, j)))).collect()
}

/// `H_j = sum_i pi_i H_ij` for every target `j`.
pub fn avg_target_from_matrix(h: &HittingMatrix, pi: &[f64]) -> Vec<f64> {
    let n = h.size();
    (0..n).map(|j| sum((0..n).map(|i| pi[i] * h.get(i, j)))).collect()
}

/// `sum_{k>=2} 1/(1 - lambda_k)`.
pub fn avg_starting_spectral_scalar(eigenvalues_desc: &[f64]) -> f64 {
    sum(eigenvalues_desc[1..].iter().map(|&l| 1.0 / (1.0 - l)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AvgMethod {
    /// From the first-step hitting matrix and `pi`.
    ExactDefinition,
    /// From eigenvalues only.
    SpectralScalar,
}

#[derive(Clone, Debug)]
pub struct AvgStartingHitting {
    /// Per-start values; present for [`AvgMethod::ExactDefinition`].
    pub per_vertex: Option<Vec<f64>>,
    /// The vertex-independent value.
    pub scalar: f64,
}

pub fn avg_starting_hitting(g: &Graph, method: AvgMethod) -> Result<AvgStartingHitting> {
    match method {
        AvgMethod::ExactDefinition => {
            let h = hitting_matrix_exact(g)?;
            let pi = stationary_distribution(g)?;
            let per_vertex = avg_starting_from_matrix(&h, &pi);
            let scalar = sum(per_vertex.iter().copied()) / per_vertex.len() as f64;
            Ok(AvgStartingHitting { per_vertex: Some(per_vertex), scalar })
        }
        AvgMethod::SpectralScalar => {
            let s = graph_spectrum(g, false)?;
            Ok(AvgStartingHitting { per_vertex: None, scalar: avg_starting_spectral_scalar(&s.eigenvalues) })
        }
    }
}

/// Average target hitting time per vertex, from the first-step route.
pub fn avg_target_hitting(g: &Graph) -> Result<Vec<f64>> {
    let h = hitting_matrix_exact(g)?;
    let pi = stationary_distribution(g)?;
    Ok(avg_target_from_matrix(&h, &pi))
}

/// Power sums of the spectrum and their eigenvalue-free counterparts.
#[derive(Clone, Copy, Debug)]
pub struct TraceMoments {
    /// `sum_k lambda_k^2`
    pub t2: f64,
    /// `sum_k lambda_k^3`
    pub t3: f64,
    /// `2 sum_{i<j} a_ij / (d_i d_j)`
    pub t2_direct: f64,
    /// `sum over pairwise-distinct (i,j,k)` of `a_ij a_jk a_ki / (d_i d_j d_k)`
    pub t3_direct: f64,
    /// `(n - 2) + t2`, the truncated expansion of `H^i`.
    pub h_i_expansion: f64,
    pub t2_error: f64,
    pub t3_error: f64,
    /// `|H^i - n - sum_{k>=2}(lambda + lambda^2 + lambda^3/(1 - lambda))|`.
    pub tail_identity_error: f64,
}

/// `2 sum_{i<j} a_ij / (d_i d_j)` from the graph alone.
pub fn trace_b2_direct(g: &Graph) -> f64 {
    let d = g.degrees();
    2.0 * sum(g.edges().map(|(i, j)| 1.0 / (d[i] as f64 * d[j] as f64)))
}

/// `tr(B^3)` as a sum over closed triangles, each ordered triple counted.
pub fn trace_b3_direct(g: &Graph) -> f64 {
    let d = g.degrees();
    let mut acc = CompensatedSum::new();
    for i in 0..g.n_plus_1() {
        for &j in g.neighbors(i) {
            for &k in g.neighbors(j) {
                if k != i && g.has_edge(k, i) {
                    acc.add(1.0 / (d[i] as f64 * d[j] as f64 * d[k] as f64));
                }
            }
        }
    }
    acc.value()
}

pub fn trace_moments(g: &Graph, spectral: &SpectralData) -> Result<TraceMoments> {
    g.require_connected()?;
    let ev = &spectral.eigenvalues;
    let t2 = sum(ev.iter().map(|l| l * l));
    let t3 = sum(ev.iter().map(|l| l * l * l));
    let t2_direct = trace_b2_direct(g);
    let t3_direct = trace_b3_direct(g);
    let n = g.n() as f64;
    let h_i = avg_starting_spectral_scalar(ev);
    let tail = sum(ev[1..].iter().map(|&l| l + l * l + l * l * l / (1.0 - l)));
    Ok(TraceMoments {
        t2,
        t3,
        t2_direct,
        t3_direct,
        h_i_expansion: (n - 2.0) + t2,
        t2_error: (t2 - t2_direct).abs(),
        t3_error: (t3 - t3_direct).abs(),
        tail_identity_error: (h_i - n - tail).abs(),
    })
}
