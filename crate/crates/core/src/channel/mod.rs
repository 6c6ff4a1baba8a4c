//! Contractive completely positive maps on `M_n` in Kraus form.

pub mod family;

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{
    self, distance, frobenius, frobenius_inner, hermitian_eig, identity, is_finite, numerical_rank,
    CMatrix, SparseOp, Tolerance, C64,
};

pub use family::{family_channel, TruncatedChannel, TruncationFamily};

/// How traces of operators on `C^n` are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceConvention {
    /// Rank-one projections have trace 1.
    #[default]
    Standard,
    /// The identity has trace 1.
    Normalized,
}

impl TraceConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceConvention::Standard => "standard",
            TraceConvention::Normalized => "normalized",
        }
    }
}

impl std::str::FromStr for TraceConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(TraceConvention::Standard),
            "normalized" => Ok(TraceConvention::Normalized),
            other => Err(format!("unknown trace convention `{other}`")),
        }
    }
}

/// `X ↦ Σ t_i X t_i*` on `M_n`, with `Σ t_i t_i* ≤ I`.
#[derive(Debug, Clone)]
pub struct Channel {
    n: usize,
    kraus: Vec<CMatrix>,
    trace: TraceConvention,
    sparse: Option<Arc<Vec<SparseOp>>>,
}

impl Channel {
    /// Validates shapes, finiteness and contractivity.
    pub fn new(kraus: Vec<CMatrix>, trace: TraceConvention, tol: &Tolerance) -> Result<Self> {
        let c = Self::unchecked(kraus, trace)?;
        let lambda_max = c.lambda_max(tol)?;
        if lambda_max > 1.0 + tol.equality_abs {
            return Err(Error::NotContractive { lambda_max });
        }
        Ok(c)
    }

    /// Standard trace, default tolerance.
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::new(kraus, TraceConvention::Standard, &Tolerance::default())
    }

    /// Shape and finiteness checks only.
    pub(crate) fn unchecked(kraus: Vec<CMatrix>, trace: TraceConvention) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let n = first.nrows();
        for t in &kraus {
            if t.nrows() != t.ncols() {
                return Err(Error::NotSquare {
                    rows: t.nrows(),
                    cols: t.ncols(),
                });
            }
            if t.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operators of sizes {n} and {}",
                    t.nrows()
                )));
            }
            if !is_finite(t) {
                return Err(Error::NonFinite);
            }
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("Kraus operators are 0x0".into()));
        }
        let sparse = if kraus.iter().all(SparseOp::worthwhile) {
            Some(Arc::new(kraus.iter().map(SparseOp::from_dense).collect()))
        } else {
            None
        };
        Ok(Self {
            n,
            kraus,
            trace,
            sparse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn trace_convention(&self) -> TraceConvention {
        self.trace
    }

    pub fn with_trace(mut self, trace: TraceConvention) -> Self {
        self.trace = trace;
        self
    }

    /// The trace of `x` under this channel's convention.
    pub fn trace_of(&self, x: &CMatrix) -> f64 {
        let t = numerics::trace_re(x);
        match self.trace {
            TraceConvention::Standard => t,
            TraceConvention::Normalized => t / self.n as f64,
        }
    }

    /// `Σ t_i t_i*`, i.e. the image of the identity.
    pub fn row_gram(&self) -> CMatrix {
        self.apply_raw(&identity(self.n))
    }

    /// Largest eigenvalue of `Σ t_i t_i*`.
    pub fn lambda_max(&self, tol: &Tolerance) -> Result<f64> {
        Ok(hermitian_eig(&self.row_gram(), tol)?
            .values
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on {0}x{0} matrices, got {1}x{2}",
                self.n,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_raw(x))
    }

    pub(crate) fn apply_raw(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        match &self.sparse {
            Some(ops) => {
                for op in ops.iter() {
                    out += op.mul_adjoint_right(&op.mul(x));
                }
            }
            None => {
                for t in &self.kraus {
                    out += t * x * t.adjoint();
                }
            }
        }
        out
    }

    /// `Θ^k(I)` for `k = 0..=kmax`.
    pub fn powers_on_identity(&self, kmax: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(identity(self.n));
        for k in 0..kmax {
            let next = self.apply_raw(&out[k]);
            out.push(next);
        }
        out
    }

    /// Gram matrix `G_ij = tr(t_i* t_j)` of the Kraus tuple.
    pub fn kraus_gram(&self) -> CMatrix {
        let k = self.kraus.len();
        CMatrix::from_fn(k, k, |i, j| frobenius_inner(&self.kraus[i], &self.kraus[j]))
    }

    /// An equivalent tuple of `index_of` mutually orthogonal Kraus operators,
    /// obtained by diagonalizing the Kraus Gram matrix.
    pub fn minimal(&self, tol: &Tolerance) -> Result<Channel> {
        let eig = hermitian_eig(&self.kraus_gram(), tol)?;
        let cutoff = tol.rank_rel * eig.norm();
        let mut kraus = Vec::new();
        for (m, &lam) in eig.values.iter().enumerate() {
            if !(lam > cutoff && lam > 0.0) {
                continue;
            }
            let mut s = CMatrix::zeros(self.n, self.n);
            for (i, t) in self.kraus.iter().enumerate() {
                let w = eig.vectors[(i, m)];
                if w != C64::new(0.0, 0.0) {
                    s += t * w;
                }
            }
            kraus.push(s);
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(self.n, self.n));
        }
        Self::unchecked(kraus, self.trace)
    }

    /// Whether the Kraus operators are linearly independent.
    pub fn is_independent(&self, tol: &Tolerance) -> bool {
        index_of(self, tol) == self.kraus.len()
    }

    /// `T̃*T̃`, the `k×k` block matrix with blocks `t_i* t_j`.
    pub fn column_gram(&self) -> CMatrix {
        let (n, k) = (self.n, self.kraus.len());
        let mut g = CMatrix::zeros(n * k, n * k);
        for i in 0..k {
            for j in 0..k {
                let block = self.kraus[i].adjoint() * &self.kraus[j];
                g.view_mut((i * n, j * n), (n, n)).copy_from(&block);
            }
        }
        g
    }
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub cp: bool,
    pub contractive: bool,
    pub unital: bool,
    pub isometric_tuple: bool,
    pub lambda_max: f64,
    /// Smallest Choi eigenvalue, when the Choi matrix was formed.
    pub choi_min_eigenvalue: Option<f64>,
}

/// Largest `n` for which [`validate`] forms the Choi matrix explicitly.
pub const CHOI_LIMIT: usize = 24;

/// Checks complete positivity, contractivity, unitality and whether the
/// Kraus tuple is a row isometry. Never fails.
pub fn validate(c: &Channel, tol: &Tolerance) -> ValidationReport {
    let gram = c.row_gram();
    let lambda_max = hermitian_eig(&gram, tol)
        .ok()
        .and_then(|e| e.values.first().copied())
        .unwrap_or(f64::INFINITY);
    let unital = distance(&gram, &identity(c.n)) <= tol.equality_abs;
    let cg = c.column_gram();
    let isometric_tuple = distance(&cg, &identity(cg.nrows())) <= tol.equality_abs;
    let (cp, choi_min_eigenvalue) = if c.n <= CHOI_LIMIT {
        let j = choi_of(c);
        match hermitian_eig(&j.matrix, tol) {
            Ok(e) => {
                let min = e.values.last().copied().unwrap_or(0.0);
                (min >= -tol.equality_abs * e.norm().max(1.0), Some(min))
            }
            Err(_) => (false, None),
        }
    } else {
        // Kraus form is completely positive by construction.
        (true, None)
    };
    ValidationReport {
        cp,
        contractive: lambda_max <= 1.0 + tol.equality_abs,
        unital,
        isometric_tuple,
        lambda_max,
        choi_min_eigenvalue,
    }
}

/// The Choi matrix `Σ vec(t) vec(t)*` with column-stacking `vec`; its
/// `(k,l)` block of size `n` is `Θ(E_kl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub n: usize,
    pub matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        let n = (r as f64).sqrt().round() as usize;
        if n * n != r || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix size {r} is not a positive square"
            )));
        }
        Ok(Self { n, matrix })
    }
}

pub fn choi_of(c: &Channel) -> ChoiMatrix {
    let n2 = c.n * c.n;
    let mut j = CMatrix::zeros(n2, n2);
    for t in &c.kraus {
        let v = CMatrix::from_column_slice(n2, 1, t.as_slice());
        j += &v * v.adjoint();
    }
    ChoiMatrix { n: c.n, matrix: j }
}

/// Kraus operators read off the eigenvectors of the Choi matrix, one per
/// eigenvalue above the rank cutoff, in descending order.
///
/// Each operator is scaled by `√λ`, and its phase is fixed so that its first
/// entry of maximal modulus (column-major order) is real and positive.
pub fn canonical_kraus(j: &ChoiMatrix, tol: &Tolerance) -> Result<Channel> {
    canonical_kraus_with(j, TraceConvention::Standard, tol)
}

pub fn canonical_kraus_with(
    j: &ChoiMatrix,
    trace: TraceConvention,
    tol: &Tolerance,
) -> Result<Channel> {
    let eig = hermitian_eig(&j.matrix, tol)?;
    let norm = eig.norm();
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol.equality_abs * norm.max(1.0) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: min,
        });
    }
    let n = j.n;
    let cutoff = tol.rank_rel * norm;
    let mut kraus = Vec::new();
    for (m, &lam) in eig.values.iter().enumerate() {
        if !(lam > cutoff && lam > 0.0) {
            continue;
        }
        let col = eig.vectors.column(m);
        let mut t = CMatrix::from_column_slice(n, n, col.as_slice()) * C64::new(lam.sqrt(), 0.0);
        fix_phase(&mut t);
        kraus.push(t);
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(n, n));
    }
    Channel::new(kraus, trace, tol)
}

fn fix_phase(t: &mut CMatrix) {
    let max = t.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = *t
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-12))
        .expect("maximum is attained");
    let phase = pivot.conj() / pivot.norm();
    *t *= phase;
}

/// The dimension of the span of the Kraus operators.
pub fn index_of(c: &Channel, tol: &Tolerance) -> usize {
    numerical_rank(&c.kraus_gram(), tol)
}

/// `c1 ∘ c2`, with Kraus operators `s_i t_j`. The trace convention of `c1`
/// is kept.
pub fn compose(c1: &Channel, c2: &Channel) -> Result<Channel> {
    if c1.n != c2.n {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose maps on M_{} and M_{}",
            c1.n, c2.n
        )));
    }
    let kraus = c1
        .kraus
        .iter()
        .flat_map(|s| c2.kraus.iter().map(move |t| s * t))
        .collect();
    Channel::unchecked(kraus, c1.trace)
}

/// `X ↦ u* Θ(u X u*) u`, with Kraus operators `u* t_i u`.
pub fn conjugate_by_unitary(c: &Channel, u: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    if u.shape() != (c.n, c.n) {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, channel acts on M_{}",
            u.nrows(),
            u.ncols(),
            c.n
        )));
    }
    let residual = numerics::unitarity_defect(u);
    if residual > tol.equality_abs * (c.n as f64).sqrt().max(1.0) {
        return Err(Error::NotUnitary { residual });
    }
    let ua = u.adjoint();
    let kraus = c.kraus.iter().map(|t| &ua * t * u).collect();
    Channel::unchecked(kraus, c.trace)
}

/// Either an ordinary channel or a member of a truncation family, which
/// carries a trusted horizon and a boundary to mask.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Exact(&'a Channel),
    Truncated(&'a TruncatedChannel),
}

impl<'a> From<&'a Channel> for Source<'a> {
    fn from(c: &'a Channel) -> Self {
        Source::Exact(c)
    }
}

impl<'a> From<&'a TruncatedChannel> for Source<'a> {
    fn from(t: &'a TruncatedChannel) -> Self {
        Source::Truncated(t)
    }
}

impl<'a> Source<'a> {
    pub fn channel(&self) -> &'a Channel {
        match self {
            Source::Exact(c) => c,
            Source::Truncated(t) => &t.channel,
        }
    }

    pub fn safe_horizon(&self) -> Option<usize> {
        match self {
            Source::Exact(_) => None,
            Source::Truncated(t) => Some(t.safe_horizon),
        }
    }

    /// Indices of basis vectors away from the truncation boundary.
    pub fn interior(&self) -> Vec<usize> {
        match self {
            Source::Exact(c) => (0..c.n).collect(),
            Source::Truncated(t) => t.interior(),
        }
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self, Source::Truncated(_))
    }
}

/// Frobenius norm of `x` restricted to the given rows and columns.
pub(crate) fn masked_norm(x: &CMatrix, idx: &[usize]) -> f64 {
    if idx.len() == x.nrows() {
        return frobenius(x);
    }
    idx.iter()
        .flat_map(|&i| idx.iter().map(move |&j| x[(i, j)].norm_sqr()))
        .sum::<f64>()
        .sqrt()
}
