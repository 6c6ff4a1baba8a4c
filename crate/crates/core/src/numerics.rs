//! Dense complex linear algebra with explicit tolerance contracts.
//!
//! Every routine here is a pure function of its inputs. Decompositions are
//! delegated to `nalgebra`; this module owns the ordering, clamping and
//! cutoff conventions the rest of the crate relies on:
//!
//! * ranks are counted relative to the largest singular value,
//! * eigenvalues come back in descending order,
//! * slightly negative eigenvalues of nominally PSD input are clamped to zero.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Rank cutoff and comparison bound used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular/eigenvalue cutoff.
    pub rank_rel: f64,
    /// Absolute comparison bound.
    pub equality_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-9,
            equality_abs: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, equality_abs: f64) -> Result<Self> {
        for v in [rank_rel, equality_abs] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(v));
            }
        }
        Ok(Self {
            rank_rel,
            equality_abs,
        })
    }

    /// Same rank cutoff, different comparison bound.
    pub fn with_equality(self, equality_abs: f64) -> Result<Self> {
        Self::new(self.rank_rel, equality_abs)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// The matrix unit `E_ij` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = C64::new(*v, 0.0);
    }
    m
}

/// Real part of the trace.
pub fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of `a - b`. Shapes must agree.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = CMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

fn ensure_square(a: &CMatrix) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(r)
}

fn hermitian_defect(a: &CMatrix) -> f64 {
    distance(a, &a.adjoint())
}

/// Fails unless `‖A − A*‖ ≤ equality_abs · max(1, ‖A‖)` (Frobenius norms).
pub fn ensure_hermitian(a: &CMatrix, tol: &Tolerance) -> Result<usize> {
    let n = ensure_square(a)?;
    let asymmetry = hermitian_defect(a);
    if asymmetry > tol.equality_abs * frobenius(a).max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(n)
}

fn is_exactly_diagonal(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || a[(i, j)] == C64::new(0.0, 0.0)))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEig {
    /// `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = C64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Largest absolute eigenvalue (the spectral norm).
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Eigenvalues in descending order with unitary eigenvectors.
///
/// Exactly diagonal input is handled without iteration, so the returned
/// eigenvectors are a permutation matrix.
pub fn hermitian_eig(a: &CMatrix, tol: &Tolerance) -> Result<HermitianEig> {
    let n = ensure_hermitian(a, tol)?;
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    let (values, vectors) = if is_exactly_diagonal(a) {
        ((0..n).map(|i| a[(i, i)].re).collect::<Vec<_>>(), identity(n))
    } else {
        let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    Ok(HermitianEig {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `rank_rel` times the largest one.
///
/// Rows and columns that are identically zero are dropped first, and
/// (numerically) Hermitian input is handled through its eigenvalues.
pub fn numerical_rank(a: &CMatrix, tol: &Tolerance) -> usize {
    let zero = C64::new(0.0, 0.0);
    let rows: Vec<usize> = (0..a.nrows())
        .filter(|&i| a.row(i).iter().any(|z| *z != zero))
        .collect();
    let cols: Vec<usize> = (0..a.ncols())
        .filter(|&j| a.column(j).iter().any(|z| *z != zero))
        .collect();
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let reduced = if rows.len() == a.nrows() && cols.len() == a.ncols() {
        a.clone()
    } else {
        a.select_rows(&rows).select_columns(&cols)
    };
    let magnitudes: Vec<f64> = if reduced.is_square()
        && rows == cols
        && hermitian_defect(&reduced) <= 1e-12 * frobenius(&reduced)
    {
        let sym = (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
        sym.symmetric_eigenvalues().iter().map(|v| v.abs()).collect()
    } else {
        singular_values(&reduced)
    };
    count_above(&magnitudes, tol.rank_rel)
}

fn count_above(magnitudes: &[f64], rank_rel: f64) -> usize {
    let max = magnitudes.iter().fold(0.0_f64, |m, v| m.max(*v));
    if max == 0.0 {
        return 0;
    }
    magnitudes.iter().filter(|&&v| v > rank_rel * max).count()
}

/// PSD check shared by the square-root and quotient routines. Returns the
/// eigendecomposition with small negative eigenvalues clamped to zero.
fn psd_eig(a: &CMatrix, tol: &Tolerance) -> Result<HermitianEig> {
    let mut eig = hermitian_eig(a, tol)?;
    let norm = eig.norm();
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol.equality_abs * norm.max(f64::MIN_POSITIVE) && min < -tol.equality_abs {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// The positive square root of a positive semidefinite matrix.
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    Ok(psd_eig(a, tol)?.map(f64::sqrt))
}

/// Moore-Penrose inverse of the positive square root, with the rank cutoff
/// applied to the eigenvalues of `a`.
pub fn psd_inv_sqrt(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let eig = psd_eig(a, tol)?;
    let cutoff = tol.rank_rel * eig.norm();
    Ok(eig.map(|v| if v > cutoff && v > 0.0 { 1.0 / v.sqrt() } else { 0.0 }))
}

/// Hausdorff quotient of a positive semidefinite Gram matrix.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    pub original_dim: usize,
    pub quotient_dim: usize,
    /// `quotient_dim × original_dim`; sends raw vectors to orthonormal coordinates.
    pub coord_map: CMatrix,
    /// `original_dim × quotient_dim` right inverse of `coord_map`.
    pub lift: CMatrix,
}

impl QuotientSpace {
    /// Coordinates of raw vectors (columns of `raw`).
    pub fn coords(&self, raw: &CMatrix) -> CMatrix {
        &self.coord_map * raw
    }

    /// The operator induced on the quotient by a raw operator that leaves the
    /// Gram kernel invariant.
    pub fn induced(&self, raw_op: &CMatrix) -> CMatrix {
        &self.coord_map * raw_op * &self.lift
    }
}

/// Quotient of `C^k` by the kernel of `gram`, with coordinates in which the
/// Gram form becomes the standard inner product.
pub fn gns_quotient(gram: &CMatrix, tol: &Tolerance) -> Result<QuotientSpace> {
    let eig = psd_eig(gram, tol)?;
    let n = eig.values.len();
    let cutoff = tol.rank_rel * eig.norm();
    let kept: Vec<usize> = (0..n)
        .filter(|&i| eig.values[i] > cutoff && eig.values[i] > 0.0)
        .collect();
    let q = kept.len();
    let mut coord_map = CMatrix::zeros(q, n);
    let mut lift = CMatrix::zeros(n, q);
    for (row, &i) in kept.iter().enumerate() {
        let s = eig.values[i].sqrt();
        for k in 0..n {
            let u = eig.vectors[(k, i)];
            coord_map[(row, k)] = u.conj() * s;
            lift[(k, row)] = u / s;
        }
    }
    Ok(QuotientSpace {
        original_dim: n,
        quotient_dim: q,
        coord_map,
        lift,
    })
}

/// Orthonormal (Frobenius) basis of `{X : A_i X = X B_i for all i}`.
///
/// The conditions are stacked into one linear system in `vec(X)` whose null
/// space is read off the right singular vectors below the rank cutoff. The
/// basis is ordered by ascending singular value.
pub fn intertwiner_space(
    a_list: &[CMatrix],
    b_list: &[CMatrix],
    tol: &Tolerance,
) -> Result<Vec<CMatrix>> {
    if a_list.len() != b_list.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} target operators but {} source operators",
            a_list.len(),
            b_list.len()
        )));
    }
    let (Some(a0), Some(b0)) = (a_list.first(), b_list.first()) else {
        return Err(Error::DimensionMismatch(
            "intertwiner conditions need at least one operator pair".into(),
        ));
    };
    let p = ensure_square(a0)?;
    let q = ensure_square(b0)?;
    for (a, b) in a_list.iter().zip(b_list) {
        if a.shape() != (p, p) || b.shape() != (q, q) {
            return Err(Error::DimensionMismatch(format!(
                "expected {p}x{p} / {q}x{q} operators, got {:?} / {:?}",
                a.shape(),
                b.shape()
            )));
        }
    }
    let unknowns = p * q;
    if unknowns == 0 {
        return Ok(Vec::new());
    }
    let rows = (a_list.len() * unknowns).max(unknowns);
    let mut system = CMatrix::zeros(rows, unknowns);
    let id_p = identity(p);
    let id_q = identity(q);
    for (blk, (a, b)) in a_list.iter().zip(b_list).enumerate() {
        // vec(AX - XB) = (I_q ⊗ A - Bᵀ ⊗ I_p) vec(X), column-major vec.
        let m = kron(&id_q, a) - kron(&b.transpose(), &id_p);
        system
            .view_mut((blk * unknowns, 0), (unknowns, unknowns))
            .copy_from(&m);
    }

    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let max = sigma.iter().fold(0.0_f64, |m, v| m.max(*v));
    let mut null: Vec<(f64, usize)> = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| max == 0.0 || s <= tol.rank_rel * max)
        .map(|(i, &s)| (s, i))
        .collect();
    null.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let vectors: Vec<Vec<C64>> = null
        .iter()
        .map(|&(_, i)| v_t.row(i).iter().map(|z| z.conj()).collect())
        .collect();
    Ok(orthonormalize(vectors)
        .into_iter()
        .map(|v| CMatrix::from_column_slice(p, q, &v))
        .collect())
}

/// Modified Gram-Schmidt with one reorthogonalization pass; drops vectors
/// that become numerically dependent.
fn orthonormalize(vectors: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let original = norm(&v);
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * original.max(f64::MIN_POSITIVE) {
            v.iter_mut().for_each(|z| *z /= nv);
            basis.push(v);
        }
    }
    basis
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius inner product `tr(X* Y)`.
pub fn frobenius_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Residual `‖U*U − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    distance(&(u.adjoint() * u), &identity(n))
}

/// A sparse copy of a matrix as column lists of `(row, value)`, used to
/// speed up products with mostly-zero operators such as truncated
/// creation operators and dilation blocks.
#[derive(Debug, Clone)]
pub struct SparseOp {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn from_dense(a: &CMatrix) -> Self {
        let zero = C64::new(0.0, 0.0);
        let columns = (0..a.ncols())
            .map(|j| {
                a.column(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != zero)
                    .map(|(i, z)| (i, *z))
                    .collect()
            })
            .collect();
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            columns,
        }
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Whether the sparse path is worth taking for this operator.
    pub fn worthwhile(a: &CMatrix) -> bool {
        let total = a.nrows() * a.ncols();
        if total < 256 {
            return false;
        }
        let zero = C64::new(0.0, 0.0);
        let nnz = a.iter().filter(|z| **z != zero).count();
        nnz * 8 <= total
    }

    /// `self · x`.
    pub fn mul(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, x.nrows());
        let mut out = CMatrix::zeros(self.rows, x.ncols());
        for k in 0..x.ncols() {
            for (j, col) in self.columns.iter().enumerate() {
                let xj = x[(j, k)];
                if xj == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(i, v) in col {
                    out[(i, k)] += v * xj;
                }
            }
        }
        out
    }

    /// `x · self*`.
    pub fn mul_adjoint_right(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.ncols(), self.cols);
        let mut out = CMatrix::zeros(x.nrows(), self.rows);
        // (x T*)_{r,i} = Σ_j x_{r,j} conj(T_{i,j})
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                let vc = v.conj();
                for r in 0..x.nrows() {
                    out[(r, i)] += x[(r, j)] * vc;
                }
            }
        }
        out
    }

    /// `self* · x`.
    pub fn adjoint_mul(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, x.nrows());
        let mut out = CMatrix::zeros(self.cols, x.ncols());
        for (j, col) in self.columns.iter().enumerate() {
            for k in 0..x.ncols() {
                let mut acc = C64::new(0.0, 0.0);
                for &(i, v) in col {
                    acc += v.conj() * x[(i, k)];
                }
                out[(j, k)] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-9, 1.0).is_err());
        assert!(Tolerance::new(1e-9, 1e-8).is_ok());
    }

    #[test]
    fn eig_of_diagonal_is_a_permutation() {
        let a = diag_real(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&a, &tol()).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        let expected_cols = [0usize, 2, 1];
        for (j, &src) in expected_cols.iter().enumerate() {
            for i in 0..3 {
                let want = if i == src { 1.0 } else { 0.0 };
                assert_eq!(e.vectors[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn eig_of_identity() {
        let e = hermitian_eig(&identity(4), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eig(&rect, &tol()),
            Err(Error::NotSquare { .. })
        ));
        let mut a = identity(2);
        a[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eig(&a, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&identity(5), &tol()), 5);
        assert_eq!(numerical_rank(&diag_real(&[1.0, 1e-15]), &tol()), 1);
        assert_eq!(numerical_rank(&CMatrix::zeros(3, 4), &tol()), 0);
        let u = CMatrix::from_column_slice(3, 1, &[c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let v = CMatrix::from_column_slice(4, 1, &[c(0.5, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(numerical_rank(&(&u * v.adjoint()), &tol()), 1);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(psd_sqrt(&identity(3), &tol()).unwrap(), identity(3));
        let r = psd_sqrt(&diag_real(&[4.0, 9.0]), &tol()).unwrap();
        assert_eq!(r, diag_real(&[2.0, 3.0]));
        assert!(matches!(
            psd_sqrt(&diag_real(&[1.0, -0.5]), &tol()),
            Err(Error::NotPsd { .. })
        ));
        // tiny negative eigenvalues are clamped
        let r = psd_sqrt(&diag_real(&[1.0, -1e-12]), &tol()).unwrap();
        assert_eq!(r[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn quotient_examples() {
        let q = gns_quotient(&identity(3), &tol()).unwrap();
        assert_eq!(q.quotient_dim, 3);
        let q = gns_quotient(&diag_real(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(q.quotient_dim, 1);
        let kernel = CMatrix::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(frobenius(&q.coords(&kernel)) < 1e-15);
    }

    #[test]
    fn intertwiner_examples() {
        let n = 3;
        let all = intertwiner_space(&[identity(n)], &[identity(n)], &tol()).unwrap();
        assert_eq!(all.len(), n * n);

        let units: Vec<CMatrix> = (0..n)
            .flat_map(|i| (0..n).map(move |j| matrix_unit(n, i, j)))
            .collect();
        let scalars = intertwiner_space(&units, &units, &tol()).unwrap();
        assert_eq!(scalars.len(), 1);
        let x = &scalars[0];
        let phase = x[(0, 0)] / x[(0, 0)].norm();
        let expected = identity(n) * (phase / (n as f64).sqrt());
        assert!(distance(x, &expected) < 1e-12);

        let two = identity(2) * c(2.0, 0.0);
        assert!(intertwiner_space(&[two], &[identity(2)], &tol())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn intertwiner_dimension_errors() {
        assert!(intertwiner_space(&[identity(2)], &[], &tol()).is_err());
        assert!(intertwiner_space(&[identity(2), identity(3)], &[identity(2), identity(2)], &tol()).is_err());
    }

    #[test]
    fn sparse_products_match_dense() {
        let mut t = CMatrix::zeros(20, 20);
        for i in 0..19 {
            t[(i + 1, i)] = c(1.0, 0.5 * i as f64);
        }
        let x = CMatrix::from_fn(20, 20, |i, j| c((i * 3 + j) as f64, (i as f64) - (j as f64)));
        let s = SparseOp::from_dense(&t);
        assert_eq!(s.nnz(), 19);
        assert!(distance(&s.mul(&x), &(&t * &x)) < 1e-9);
        assert!(distance(&s.mul_adjoint_right(&x), &(&x * t.adjoint())) < 1e-9);
        assert!(distance(&s.adjoint_mul(&x), &(t.adjoint() * &x)) < 1e-9);
    }
}
