//! Graph Laplacians and Dirichlet Laplacians in the `ℓ²_m` inner product.
//!
//! `Δf(x) = (1/m_x) Σ_y μ_xy (f(y) - f(x))`. The Dirichlet Laplacian `Δ_Ω`
//! is the same formula applied to the zero extension of `f` outside `Ω`,
//! read off on `Ω` only. The full Laplacian is `Δ_V`.
//!
//! Spectra are computed for `-Δ`, which is self-adjoint and nonnegative in
//! `ℓ²_m`. The eigenproblem is solved for the symmetric similarity transform
//! `M^{1/2} (-L) M^{-1/2}` and eigenvectors are mapped back by `M^{-1/2}`,
//! which makes them `m`-orthonormal.

use crate::error::{Error, Result};
use crate::graph::{VertexFunction, VertexSet, WeightedGraph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

/// Above this dimension [`spectral_bottom`] switches from a dense
/// eigendecomposition to an iterative estimate of the lowest eigenpair.
pub const DENSE_LIMIT: usize = 2000;

/// Residual tolerance for eigenpairs, relative to the spectral radius.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Matrix of `Δ_Ω` on `ℓ²(Ω, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    /// Graph indices of `Ω`, ascending.
    domain: Vec<usize>,
    ids: Vec<String>,
    graph_len: usize,
    /// Off-diagonal entries `(local j, μ_xy / m_x)`.
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    measure: Vec<f64>,
}

/// Eigenpairs of `-Δ_Ω`, ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Columns are `m`-orthonormal eigenvectors in domain coordinates.
    pub eigenvectors: DMatrix<f64>,
    pub measure: Vec<f64>,
    pub residual_max: f64,
    /// `false` when only the bottom eigenpair was computed iteratively.
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub lambda: f64,
    pub eigenvalues: Vec<f64>,
    pub residual_max: f64,
}

/// Full Laplacian `Δ`.
pub fn laplacian(g: &WeightedGraph) -> Operator {
    build(g, &g.all_vertices())
}

/// Dirichlet Laplacian `Δ_Ω`.
pub fn dirichlet_laplacian(g: &WeightedGraph, omega: &VertexSet) -> Result<Operator> {
    if omega.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(build(g, omega))
}

fn build(g: &WeightedGraph, omega: &VertexSet) -> Operator {
    let domain = omega.indices().to_vec();
    let mut local = vec![usize::MAX; g.len()];
    for (k, &x) in domain.iter().enumerate() {
        local[x] = k;
    }
    let mut rows = Vec::with_capacity(domain.len());
    let mut diag = Vec::with_capacity(domain.len());
    for &x in &domain {
        let mx = g.m(x);
        let mut row = Vec::new();
        let mut d = 0.0;
        for &(y, mu) in g.neighbors(x) {
            if y == x {
                continue;
            }
            d -= mu / mx;
            if local[y] != usize::MAX {
                row.push((local[y], mu / mx));
            }
        }
        rows.push(row);
        diag.push(d);
    }
    Operator {
        ids: domain.iter().map(|&x| g.id(x).to_string()).collect(),
        measure: domain.iter().map(|&x| g.m(x)).collect(),
        graph_len: g.len(),
        domain,
        rows,
        diag,
    }
}

impl Operator {
    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn domain_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn graph_len(&self) -> usize {
        self.graph_len
    }

    /// Whether the domain is the whole vertex set.
    pub fn is_full(&self) -> bool {
        self.domain.len() == self.graph_len
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    /// `max_x |Δ_xx|`, the uniformization rate.
    pub fn max_rate(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |a, d| a.max(-d))
    }

    /// `Δ_Ω f` for `f` in domain coordinates.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_into(f, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        for (k, row) in self.rows.iter().enumerate() {
            let mut acc = self.diag[k] * f[k];
            for &(j, w) in row {
                acc += w * f[j];
            }
            out[k] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for k in 0..n {
            a[(k, k)] = self.diag[k];
            for &(j, w) in &self.rows[k] {
                a[(k, j)] = w;
            }
        }
        a
    }

    /// `M^{1/2} (-L) M^{-1/2}`, symmetric.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.dim();
        let sq: Vec<f64> = self.measure.iter().map(|m| m.sqrt()).collect();
        let mut s = DMatrix::zeros(n, n);
        for k in 0..n {
            s[(k, k)] = -self.diag[k];
            for &(j, w) in &self.rows[k] {
                s[(k, j)] = -w * sq[k] / sq[j];
            }
        }
        // exact symmetry; both triangles hold the same value up to rounding
        for k in 0..n {
            for j in k + 1..n {
                let v = 0.5 * (s[(k, j)] + s[(j, k)]);
                s[(k, j)] = v;
                s[(j, k)] = v;
            }
        }
        s
    }

    /// Max of `|m_x L_xy - m_y L_yx|` over entries.
    pub fn self_adjointness_defect(&self) -> f64 {
        let l = self.to_dense();
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst =
                    worst.max((self.measure[i] * l[(i, j)] - self.measure[j] * l[(j, i)]).abs());
            }
        }
        worst
    }

    /// Restricts a graph function to the domain; fails if it is nonzero
    /// outside.
    pub fn restrict(&self, f: &VertexFunction) -> Result<Vec<f64>> {
        if f.len() != self.graph_len {
            return Err(Error::DimensionMismatch {
                expected: self.graph_len,
                got: f.len(),
            });
        }
        let mut inside = vec![false; self.graph_len];
        for &x in &self.domain {
            inside[x] = true;
        }
        if let Some(x) = (0..self.graph_len).find(|&x| !inside[x] && f.0[x] != 0.0) {
            return Err(Error::SupportViolation(format!("#{x}")));
        }
        Ok(self.domain.iter().map(|&x| f.0[x]).collect())
    }

    /// Zero extension of a domain vector to the whole graph.
    pub fn extend(&self, local: &[f64]) -> VertexFunction {
        let mut f = vec![0.0; self.graph_len];
        for (k, &x) in self.domain.iter().enumerate() {
            f[x] = local[k];
        }
        VertexFunction(f)
    }

    /// `⟨f, g⟩_m` for domain vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.measure)
            .map(|((a, b), m)| m * a * b)
            .sum()
    }
}

/// `Q(f) = ½ Σ_{x,y} μ_xy |f(x) - f(y)|²`.
pub fn quadratic_form(g: &WeightedGraph, f: &VertexFunction) -> f64 {
    g.edges()
        .map(|(i, j, mu)| {
            let d = f.0[i] - f.0[j];
            mu * d * d
        })
        .sum()
}

/// `∇_xy f = f(y) - f(x)`.
pub fn nabla(f: &VertexFunction, x: usize, y: usize) -> f64 {
    f.0[y] - f.0[x]
}

/// `⟨-Δf, f⟩ / ⟨f, f⟩` in `ℓ²_m`, for `f` supported in the domain.
pub fn rayleigh_quotient(op: &Operator, f: &VertexFunction) -> Result<f64> {
    let v = op.restrict(f)?;
    let denom = op.inner(&v, &v);
    if denom == 0.0 {
        return Err(Error::InvalidParameter(
            "Rayleigh quotient of the zero function".into(),
        ));
    }
    let lv = op.apply(&v);
    Ok(-op.inner(&lv, &v) / denom)
}

/// Eigendecomposition of `-Δ_Ω` (see [`DENSE_LIMIT`]).
pub fn spectral_bottom(op: &Operator) -> Result<SpectralData> {
    spectral_bottom_with(op, DENSE_LIMIT)
}

pub fn spectral_bottom_with(op: &Operator, dense_limit: usize) -> Result<SpectralData> {
    if op.dim() > dense_limit {
        return lowest_eigenpair_iterative(op);
    }
    let s = op.symmetrized();
    let scale = s.norm().max(1.0);
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;

    let n = op.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let inv_sq: Vec<f64> = op.measure.iter().map(|m| m.sqrt().recip()).collect();
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        for r in 0..n {
            vectors[(r, c)] = eig.eigenvectors[(r, k)] * inv_sq[r];
        }
    }
    finish(op, values, vectors, scale, true)
}

fn finish(
    op: &Operator,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    scale: f64,
    complete: bool,
) -> Result<SpectralData> {
    let mut residual_max = 0.0f64;
    for (c, &lam) in values.iter().enumerate() {
        let v: Vec<f64> = vectors.column(c).iter().copied().collect();
        let lv = op.apply(&v);
        let r: Vec<f64> = lv.iter().zip(&v).map(|(a, b)| -a - lam * b).collect();
        let res = op.inner(&r, &r).sqrt() / op.inner(&v, &v).sqrt();
        residual_max = residual_max.max(res);
    }
    if residual_max > EIGEN_RESIDUAL_TOL * scale {
        return Err(Error::EigenFailure(format!(
            "eigenpair residual {residual_max:e} exceeds tolerance"
        )));
    }
    Ok(SpectralData {
        eigenvalues: values,
        eigenvectors: vectors,
        measure: op.measure.clone(),
        residual_max,
        complete,
    })
}

/// Lowest eigenpair for large domains. On the full vertex set the bottom of
/// the spectrum of a finite graph is `0` with the constant eigenvector; on a
/// proper subset a restarted Lanczos iteration on the symmetrized matrix is
/// used.
fn lowest_eigenpair_iterative(op: &Operator) -> Result<SpectralData> {
    let n = op.dim();
    let sq: Vec<f64> = op.measure.iter().map(|m| m.sqrt()).collect();
    let scale = 2.0 * op.max_rate().max(1.0);
    if op.is_full() {
        let total: f64 = op.measure.iter().sum();
        let v = DMatrix::from_element(n, 1, total.sqrt().recip());
        return finish(op, vec![0.0], v, scale, false);
    }

    // y = S x with S = M^{1/2}(-L)M^{-1/2}
    let sym_apply = |x: &DVector<f64>| -> DVector<f64> {
        let u: Vec<f64> = x.iter().zip(&sq).map(|(a, s)| a / s).collect();
        let lu = op.apply(&u);
        DVector::from_iterator(n, lu.iter().zip(&sq).map(|(a, s)| -a * s))
    };

    let krylov = 80.min(n);
    let mut start = DVector::from_iterator(n, (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1));
    start /= start.norm();
    let mut best = (f64::INFINITY, start.clone());
    for _restart in 0..200 {
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..krylov {
            let mut w = sym_apply(&basis[j]);
            let a = w.dot(&basis[j]);
            alpha.push(a);
            // full reorthogonalization
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w.axpy(-c, b, 1.0);
                }
            }
            let bnorm = w.norm();
            if j + 1 == krylov || bnorm < 1e-14 * scale {
                break;
            }
            beta.push(bnorm);
            basis.push(w / bnorm);
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty Krylov space");
        let mut ritz = DVector::zeros(n);
        for (i, b) in basis.iter().enumerate().take(k) {
            ritz.axpy(eig.eigenvectors[(i, imin)], b, 1.0);
        }
        ritz /= ritz.norm();
        let res = (sym_apply(&ritz) - &ritz * theta).norm();
        best = (theta, ritz.clone());
        if res <= 0.1 * EIGEN_RESIDUAL_TOL * scale {
            break;
        }
        start = ritz;
    }
    let (theta, ritz) = best;
    let v = DMatrix::from_iterator(n, 1, ritz.iter().zip(&sq).map(|(a, s)| a / s));
    finish(op, vec![theta], v, scale, false)
}

impl SpectralData {
    /// Bottom of the spectrum, clamped at 0 (the operator is nonnegative;
    /// rounding can push the constant mode slightly below).
    pub fn lambda(&self) -> f64 {
        self.eigenvalues[0].max(0.0)
    }

    pub fn report(&self) -> SpectralReport {
        SpectralReport {
            lambda: self.lambda(),
            eigenvalues: self.eigenvalues.clone(),
            residual_max: self.residual_max,
        }
    }

    /// Max deviation of `Vᵀ M V` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let mv = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| self.measure[r] * v[(r, c)]);
        let gram = v.transpose() * mv;
        let id = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
        (gram - id).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, path_graph, truncate_lattice, Edge, Measure, MeasurePolicy};
    use approx::assert_abs_diff_eq;

    #[test]
    fn p2_physical_matrix_and_spectrum() {
        let g = path_graph(2, MeasurePolicy::Physical).unwrap();
        let op = laplacian(&g);
        assert_eq!(
            op.to_dense(),
            DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
        );
        let sd = spectral_bottom(&op).unwrap();
        assert_abs_diff_eq!(sd.eigenvalues[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sd.eigenvalues[1], 2.0, epsilon = 1e-14);
        assert!(sd.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn constants_are_harmonic() {
        let g = truncate_lattice(3, MeasurePolicy::Normalized).unwrap();
        let op = laplacian(&g);
        let lf = op.apply(&vec![3.5; g.len()]);
        assert!(lf.iter().all(|v| v.abs() < 1e-15));
        let sd = spectral_bottom(&op).unwrap();
        assert_abs_diff_eq!(sd.lambda(), 0.0, epsilon = 1e-13);
        let v0 = sd.eigenvectors.column(0);
        let first = v0[0];
        assert!(v0.iter().all(|x| (x - first).abs() < 1e-12));
    }

    #[test]
    fn normalized_diagonal_is_minus_one_up_to_loops() {
        let g = build_graph(
            &[
                Edge::new("a", "b", 1.0),
                Edge::new("b", "c", 2.0),
                Edge::new("c", "c", 1.0),
            ],
            Measure::Normalized,
        )
        .unwrap();
        let op = laplacian(&g);
        // a, b have no loop; c has m = 3 with a loop of weight 1
        assert_eq!(op.diag()[0], -1.0);
        assert_eq!(op.diag()[1], -1.0);
        assert_abs_diff_eq!(op.diag()[2], -2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn dirichlet_single_vertex_of_p2() {
        let g = path_graph(2, MeasurePolicy::Physical).unwrap();
        let omega = g.vertex_set(&["0"]).unwrap();
        let op = dirichlet_laplacian(&g, &omega).unwrap();
        assert_eq!(op.to_dense(), DMatrix::from_element(1, 1, -1.0));
        assert!(dirichlet_laplacian(&g, &VertexSet::from_indices(vec![], 2).unwrap()).is_err());
    }

    #[test]
    fn dirichlet_on_whole_graph_is_the_laplacian() {
        let g = truncate_lattice(2, MeasurePolicy::Physical).unwrap();
        let a = dirichlet_laplacian(&g, &g.all_vertices()).unwrap();
        assert_eq!(a, laplacian(&g));
    }

    #[test]
    fn dirichlet_matches_zero_extension() {
        let g = truncate_lattice(4, MeasurePolicy::Normalized).unwrap();
        let omega = g.vertex_set(&["-1", "0", "1", "2"]).unwrap();
        let op = dirichlet_laplacian(&g, &omega).unwrap();
        let local = vec![0.3, -1.0, 2.0, 0.5];
        let ext = op.extend(&local);
        let full = laplacian(&g).apply(ext.values());
        let restricted: Vec<f64> = op.domain().iter().map(|&x| full[x]).collect();
        assert_eq!(op.apply(&local), restricted);
        assert!(spectral_bottom(&op).unwrap().lambda() > 0.0);
    }

    #[test]
    fn quadratic_form_examples() {
        let g = path_graph(2, MeasurePolicy::Physical).unwrap();
        assert_eq!(quadratic_form(&g, &VertexFunction(vec![2.0, 2.0])), 0.0);
        assert_eq!(quadratic_form(&g, &VertexFunction(vec![0.0, 1.0])), 1.0);
    }

    #[test]
    fn rayleigh_examples() {
        let g = truncate_lattice(3, MeasurePolicy::Normalized).unwrap();
        let op = laplacian(&g);
        assert_abs_diff_eq!(
            rayleigh_quotient(&op, &VertexFunction(vec![1.0; g.len()])).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let omega = g.vertex_set(&["-1", "0", "1"]).unwrap();
        let dop = dirichlet_laplacian(&g, &omega).unwrap();
        let sd = spectral_bottom(&dop).unwrap();
        for c in 0..3 {
            let v: Vec<f64> = sd.eigenvectors.column(c).iter().copied().collect();
            let rq = rayleigh_quotient(&dop, &dop.extend(&v)).unwrap();
            assert_abs_diff_eq!(rq, sd.eigenvalues[c], epsilon = 1e-12);
        }
        assert!(rayleigh_quotient(&dop, &VertexFunction::zeros(g.len())).is_err());
        let outside = g.function_from_pairs(&[("3", 1.0)]).unwrap();
        assert!(matches!(
            rayleigh_quotient(&dop, &outside),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn nabla_is_antisymmetric() {
        let f = VertexFunction(vec![0.0, 1.0]);
        assert_eq!(nabla(&f, 0, 0), 0.0);
        assert_eq!(nabla(&f, 0, 1), 1.0);
        assert_eq!(nabla(&f, 1, 0), -1.0);
    }

    #[test]
    fn iterative_bottom_matches_dense() {
        let g = truncate_lattice(30, MeasurePolicy::Normalized).unwrap();
        let omega = g
            .vertex_set(&(-10..=12).map(|i| i.to_string()).collect::<Vec<_>>())
            .unwrap();
        let op = dirichlet_laplacian(&g, &omega).unwrap();
        let dense = spectral_bottom(&op).unwrap();
        let iter = spectral_bottom_with(&op, 5).unwrap();
        assert!(!iter.complete);
        assert_abs_diff_eq!(iter.lambda(), dense.lambda(), epsilon = 1e-10);

        let full = spectral_bottom_with(&laplacian(&g), 5).unwrap();
        assert_eq!(full.lambda(), 0.0);
    }
}
