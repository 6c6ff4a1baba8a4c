//! Minimal isometric dilation of a row contraction on a truncated defect
//! tower, and the Wold split of isometric tuples.
//!
//! The dilation space is `K = H ⊕ 𝒟 ⊕ (C^d ⊗ 𝒟) ⊕ …`, cut after `depth`
//! tower levels. Level `ℓ` holds `d^ℓ` copies of the defect space `𝒟`,
//! ordered by word exactly like the free tuple family. Every check in this
//! module ignores the top level, where the creation blocks are cut off.

use serde::Serialize;

use crate::channel::{index_of, masked_norm, Channel, Source, TruncatedChannel};
use crate::error::{Error, Result};
use crate::invariants::{self, curvature, defect_rank, purity, Certificate, Purity};
use crate::numerics::{
    c, frobenius, hermitian_eig, identity, psd_sqrt, trace_re, CMatrix, SparseOp, Tolerance, C64,
};

/// The row `[t_1 … t_d]` with its defect.
#[derive(Debug, Clone)]
pub struct RowContraction {
    pub n: usize,
    /// Number of slots.
    pub d: usize,
    /// `n × d·n`.
    pub t_tilde: CMatrix,
    /// `(I − T̃*T̃)^{1/2}`, masked to the interior for truncated input.
    pub delta: CMatrix,
    /// Orthonormal columns spanning the range of `delta`.
    pub defect_basis: CMatrix,
    /// The operators `t_i` actually used.
    pub kraus: Vec<CMatrix>,
    /// Interior of `H` (all of it for exact input).
    pub interior: Vec<usize>,
    /// The source channel, with the slots above.
    pub channel: Channel,
}

impl RowContraction {
    pub fn defect_dim(&self) -> usize {
        self.defect_basis.ncols()
    }

    /// Dimension of the truncated dilation space at `depth`.
    pub fn dilation_dim(&self, depth: usize) -> usize {
        match self.defect_dim() {
            0 => self.n,
            m => self.n + m * words_below(self.d, depth),
        }
    }
}

/// Builds `T̃` and `Δ`. Linearly independent tuples are kept as given,
/// redundant ones are first reduced to `index_of` orthogonal operators.
/// The zero map keeps one zero slot.
pub fn row_contraction_of<'a>(src: impl Into<Source<'a>>, tol: &Tolerance) -> Result<RowContraction> {
    let src = src.into();
    let given = src.channel();
    let lambda_max = given.lambda_max(tol)?;
    if lambda_max > 1.0 + tol.equality_abs {
        return Err(Error::NotContractive { lambda_max });
    }
    let channel = if given.is_independent(tol) {
        given.clone()
    } else {
        given.minimal(tol)?
    };
    let n = channel.n();
    let kraus = channel.kraus().to_vec();
    let d = kraus.len();
    let mut t_tilde = CMatrix::zeros(n, d * n);
    for (i, t) in kraus.iter().enumerate() {
        t_tilde.view_mut((0, i * n), (n, n)).copy_from(t);
    }
    let interior = src.interior();
    let mut defect_sq = identity(d * n) - channel.column_gram();
    if interior.len() < n {
        let mut mask = vec![false; n];
        for &i in &interior {
            mask[i] = true;
        }
        for r in 0..d * n {
            for col in 0..d * n {
                if !mask[r % n] || !mask[col % n] {
                    defect_sq[(r, col)] = C64::new(0.0, 0.0);
                }
            }
        }
    }
    let eig = hermitian_eig(&defect_sq, tol)?;
    let floor = (tol.rank_rel * eig.norm()).max(64.0 * f64::EPSILON * (d * n) as f64);
    let kept: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > floor)
        .collect();
    let defect_basis = eig.vectors.select_columns(&kept);
    let delta = psd_sqrt(&defect_sq, tol)?;
    Ok(RowContraction {
        n,
        d,
        t_tilde,
        delta,
        defect_basis,
        kraus,
        interior,
        channel,
    })
}

/// The truncated minimal isometric dilation.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub depth: usize,
    pub n: usize,
    pub d: usize,
    /// Dimension of `𝒟`.
    pub defect_dim: usize,
    pub k_dim: usize,
    /// `K_dim × d·K_dim`, the row `[V_1 … V_d]`.
    pub v_tilde: CMatrix,
    /// `K_dim × n`, the inclusion of `H`.
    pub w: CMatrix,
    /// `X ↦ Σ V_i X V_i*` on `K`, trusted up to `depth − 1` iterations.
    pub alpha: TruncatedChannel,
    /// Whether the input was already isometric and returned unchanged.
    pub short_circuit: bool,
    /// Trusted basis indices of `K`.
    pub interior: Vec<usize>,
    /// Kraus operators of the row contraction that was dilated.
    pub t: Vec<CMatrix>,
}

impl DilationResult {
    pub fn v(&self, i: usize) -> CMatrix {
        self.v_tilde
            .view((0, i * self.k_dim), (self.k_dim, self.k_dim))
            .into_owned()
    }
}

fn words_below(d: usize, len: usize) -> usize {
    (0..len).map(|l| d.pow(l as u32)).sum()
}

pub fn minimal_isometric_dilation(rc: &RowContraction, depth: usize) -> Result<DilationResult> {
    if depth == 0 {
        return Err(Error::Degenerate("dilation depth must be at least 1".into()));
    }
    let (n, d, m) = (rc.n, rc.d, rc.defect_dim());
    let h_boundary: Vec<usize> = {
        let mut mask = vec![true; n];
        for &i in &rc.interior {
            mask[i] = false;
        }
        (0..n).filter(|&i| mask[i]).collect()
    };
    if m == 0 {
        let alpha = TruncatedChannel {
            channel: rc.channel.clone(),
            depth,
            safe_horizon: usize::MAX,
            boundary: h_boundary,
            kind: "dilation",
        };
        return Ok(DilationResult {
            depth,
            n,
            d,
            defect_dim: 0,
            k_dim: n,
            v_tilde: rc.t_tilde.clone(),
            w: identity(n),
            alpha,
            short_circuit: true,
            interior: rc.interior.clone(),
            t: rc.kraus.clone(),
        });
    }

    let k_dim = n + m * words_below(d, depth);
    let level_start = |l: usize| n + m * words_below(d, l);
    // Δ in defect coordinates, one n-column block per slot.
    let delta_d = rc.defect_basis.adjoint() * &rc.delta;
    let mut kraus = vec![CMatrix::zeros(k_dim, k_dim); d];
    for (i, v) in kraus.iter_mut().enumerate() {
        v.view_mut((0, 0), (n, n)).copy_from(&rc.kraus[i]);
        v.view_mut((n, 0), (m, n))
            .copy_from(&delta_d.view((0, i * n), (m, n)));
        for l in 0..depth - 1 {
            let words = d.pow(l as u32);
            for w in 0..words {
                let target = i * words + w;
                for s in 0..m {
                    v[(level_start(l + 1) + target * m + s, level_start(l) + w * m + s)] =
                        c(1.0, 0.0);
                }
            }
        }
    }
    let mut v_tilde = CMatrix::zeros(k_dim, d * k_dim);
    for (i, v) in kraus.iter().enumerate() {
        v_tilde.view_mut((0, i * k_dim), (k_dim, k_dim)).copy_from(v);
    }
    let mut w = CMatrix::zeros(k_dim, n);
    w.view_mut((0, 0), (n, n)).copy_from(&identity(n));

    let top = level_start(depth - 1);
    let mut boundary = h_boundary;
    boundary.extend(top..k_dim);
    let alpha = TruncatedChannel {
        channel: Channel::unchecked(kraus, rc.channel.trace_convention())?,
        depth,
        safe_horizon: depth - 1,
        boundary,
        kind: "dilation",
    };
    let interior = alpha.interior();
    Ok(DilationResult {
        depth,
        n,
        d,
        defect_dim: m,
        k_dim,
        v_tilde,
        w,
        alpha,
        short_circuit: false,
        interior,
        t: rc.kraus.clone(),
    })
}

/// Residuals of the dilation properties.
#[derive(Debug, Clone, Serialize)]
pub struct DilationCheck {
    /// `‖Ṽ*Ṽ − I‖` on interior slots.
    pub isometry_residual: f64,
    /// `ρ` extends `σ`; trivial for a scalar commutant.
    pub extension_residual: f64,
    /// `P_H V_i` vanishes on `H^⊥`.
    pub co_invariance_residual: f64,
    /// `P_H V_i|H = t_i`.
    pub compression_residual: f64,
    /// Dimension of the smallest `V`-invariant subspace containing `H`.
    pub generated_dim: usize,
    pub k_dim: usize,
    /// `max ‖Θ^p(a) − W*α^p(WaW*)W‖` over matrix units `a` and `p ≤ nmax`.
    pub power_residual: f64,
    pub nmax: usize,
    pub ok: bool,
}

impl DilationCheck {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        self.extension_residual == 0.0
            && self.co_invariance_residual == 0.0
            && self.compression_residual == 0.0
            && self.isometry_residual < tol.equality_abs
            && self.generated_dim == self.k_dim
            && self.power_residual < tol.equality_abs
    }
}

/// `max_i,j ‖V_i* V_j − δ_ij I‖` over the interior.
pub fn isometry_residual(ops: &[SparseOp], dense: &[CMatrix], interior: &[usize]) -> f64 {
    let k = dense.first().map(|v| v.nrows()).unwrap_or(0);
    let mut worst: f64 = 0.0;
    for (i, op) in ops.iter().enumerate() {
        for (j, vj) in dense.iter().enumerate() {
            let mut g = op.adjoint_mul(vj);
            if i == j {
                g -= identity(k);
            }
            worst = worst.max(masked_norm(&g, interior));
        }
    }
    worst
}

/// Dimension of the span of `start` under repeated application of `ops`.
fn generated_dimension(ops: &[SparseOp], start: &CMatrix, cap: usize) -> usize {
    let dim = start.nrows();
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut frontier: Vec<CMatrix> = Vec::new();
    let push = |v: CMatrix, basis: &mut Vec<CMatrix>| -> Option<CMatrix> {
        let before = frobenius(&v);
        if before == 0.0 {
            return None;
        }
        let mut v = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let after = frobenius(&v);
        if after > 1e-10 * before {
            v /= C64::new(after, 0.0);
            basis.push(v.clone());
            Some(v)
        } else {
            None
        }
    };
    for j in 0..start.ncols() {
        if let Some(v) = push(CMatrix::from_iterator(dim, 1, start.column(j).iter().copied()), &mut basis) {
            frontier.push(v);
        }
    }
    while !frontier.is_empty() && basis.len() < cap.min(dim) {
        let mut next = Vec::new();
        for v in &frontier {
            for op in ops {
                if let Some(u) = push(op.mul(v), &mut basis) {
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

pub fn check_dilation_properties<'a>(
    dil: &DilationResult,
    src: impl Into<Source<'a>>,
    nmax: usize,
    tol: &Tolerance,
) -> Result<DilationCheck> {
    let src = src.into();
    let c = src.channel();
    if nmax + 1 > dil.depth {
        return Err(Error::HorizonExceeded {
            requested: nmax,
            safe: dil.depth - 1,
        });
    }
    if c.n() != dil.n {
        return Err(Error::DimensionMismatch(format!(
            "dilation of an M_{} map checked against an M_{} map",
            dil.n,
            c.n()
        )));
    }
    let n = dil.n;
    let dense: Vec<CMatrix> = (0..dil.d).map(|i| dil.v(i)).collect();
    let ops: Vec<SparseOp> = dense.iter().map(SparseOp::from_dense).collect();

    let isometry = isometry_residual(&ops, &dense, &dil.interior);

    let mut co_inv: f64 = 0.0;
    let mut compression: f64 = 0.0;
    for (i, v) in dense.iter().enumerate() {
        let top_right = v.view((0, n), (n, dil.k_dim - n));
        co_inv = co_inv.max(top_right.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let corner = v.view((0, 0), (n, n));
        compression = compression.max(
            corner
                .iter()
                .zip(dil.t[i].iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }

    let generated_dim = generated_dimension(&ops, &dil.w, dil.k_dim);

    let h_interior = src.interior();
    let mut power: f64 = 0.0;
    for &k in &h_interior {
        for &l in &h_interior {
            let mut theta = crate::numerics::matrix_unit(n, k, l);
            let mut lifted = &dil.w * &theta * dil.w.adjoint();
            for _ in 0..nmax {
                theta = c.apply_raw(&theta);
                lifted = dil.alpha.channel.apply_raw(&lifted);
                let back = dil.w.adjoint() * &lifted * &dil.w;
                power = power.max(masked_norm(&(back - &theta), &h_interior));
            }
        }
    }

    let mut check = DilationCheck {
        isometry_residual: isometry,
        extension_residual: 0.0,
        co_invariance_residual: co_inv,
        compression_residual: compression,
        generated_dim,
        k_dim: dil.k_dim,
        power_residual: power,
        nmax,
        ok: false,
    };
    check.ok = check.passes(tol);
    Ok(check)
}

/// Input to [`wold_decomposition`].
#[derive(Debug, Clone, Copy)]
pub enum WoldInput<'a> {
    Source(Source<'a>),
    Dilation(&'a DilationResult),
}

impl<'a> From<&'a Channel> for WoldInput<'a> {
    fn from(c: &'a Channel) -> Self {
        WoldInput::Source(Source::Exact(c))
    }
}

impl<'a> From<&'a TruncatedChannel> for WoldInput<'a> {
    fn from(t: &'a TruncatedChannel) -> Self {
        WoldInput::Source(Source::Truncated(t))
    }
}

impl<'a> From<&'a DilationResult> for WoldInput<'a> {
    fn from(d: &'a DilationResult) -> Self {
        WoldInput::Dilation(d)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitCertificate {
    /// `max_k ‖Q_k² − Q_k‖` and `‖S² − S‖` for `S = Σ Q_k`.
    pub orthogonality: f64,
    /// `‖Σ Q_k + P_∞ − I‖`.
    pub completeness: f64,
    pub isometry: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Serialize)]
pub struct WoldDecomposition {
    #[serde(skip)]
    pub p_inf: CMatrix,
    #[serde(skip)]
    pub q: Vec<CMatrix>,
    pub induced_multiplicity: usize,
    pub p_inf_rank: usize,
    pub pure: bool,
    pub split_certificate: SplitCertificate,
    #[serde(skip)]
    pub interior: Vec<usize>,
}

fn restrict(x: &CMatrix, idx: &[usize]) -> CMatrix {
    if idx.len() == x.nrows() {
        x.clone()
    } else {
        x.select_rows(idx).select_columns(idx)
    }
}

pub fn wold_decomposition<'a>(
    input: impl Into<WoldInput<'a>>,
    kmax: usize,
    tol: &Tolerance,
) -> Result<WoldDecomposition> {
    let (channel, interior) = match input.into() {
        WoldInput::Source(s) => (s.channel(), s.interior()),
        WoldInput::Dilation(d) => (&d.alpha.channel, d.interior.clone()),
    };
    let dense = channel.kraus();
    let ops: Vec<SparseOp> = dense.iter().map(SparseOp::from_dense).collect();
    let isometry = isometry_residual(&ops, dense, &interior);
    if isometry > tol.equality_abs {
        return Err(Error::NotIsometric { residual: isometry });
    }
    let k = channel.n();
    let mut p = vec![identity(k)];
    let mut run = 0;
    let mut certificate = Certificate::Unconverged;
    let scale = tol.equality_abs * (1.0 + (k as f64).sqrt());
    for step in 0..kmax {
        let next = channel.apply_raw(&p[step]);
        let diff = masked_norm(&(&next - &p[step]), &interior);
        p.push(next);
        if diff == 0.0 && step == 0 {
            certificate = Certificate::Exact;
            break;
        }
        if certificate.converged() {
            if diff < scale * 1e-3 {
                break;
            }
            continue;
        }
        if diff < scale {
            run += 1;
            if run == 3 {
                certificate = Certificate::Stabilized(step + 1);
            }
        } else {
            run = 0;
        }
    }
    let p_inf = p.last().unwrap().clone();
    let q: Vec<CMatrix> = p.windows(2).map(|w| &w[0] - &w[1]).collect();

    let mut orth: f64 = 0.0;
    let mut sum = CMatrix::zeros(interior.len(), interior.len());
    for qk in &q {
        let r = restrict(qk, &interior);
        if frobenius(&r) == 0.0 {
            continue;
        }
        orth = orth.max(frobenius(&(&r * &r - &r)));
        sum += r;
    }
    orth = orth.max(frobenius(&(&sum * &sum - &sum)));
    let completeness = frobenius(&(&sum + restrict(&p_inf, &interior) - identity(interior.len())));

    let q0 = restrict(&q[0], &interior);
    let induced_multiplicity = defect_rank(&q0, tol)?;
    let p_inf_rank = defect_rank(&restrict(&p_inf, &interior), tol)?;
    Ok(WoldDecomposition {
        pure: p_inf_rank == 0,
        p_inf,
        q,
        induced_multiplicity,
        p_inf_rank,
        split_certificate: SplitCertificate {
            orthogonality: orth,
            completeness,
            isometry,
            certificate,
        },
        interior,
    })
}

/// Comparison of a map with its minimal isometric dilation.
#[derive(Debug, Clone, Serialize)]
pub struct InvOfDilReport {
    pub index_theta: usize,
    pub index_alpha: usize,
    /// Number of slots of the dilated row contraction.
    pub slots: usize,
    pub index_equal: bool,
    #[serde(rename = "K_theta")]
    pub k_theta: f64,
    #[serde(rename = "K_alpha")]
    pub k_alpha: f64,
    /// `tr(I − ṼṼ*)`.
    pub alpha_defect_trace: f64,
    pub pure_rank_alpha: f64,
    pub pure_rank_theta: f64,
    /// `tr(I − T̃T̃*)`.
    pub theta_defect_trace: f64,
    /// `rank(P_H (I − ṼṼ*))`.
    pub range_rank: usize,
    pub purerank_chain_ok: bool,
    pub theta_pure: bool,
    pub alpha_is_theta: bool,
    /// For pure maps, whether `K(α) = K(Θ)` exactly when `α = Θ`.
    pub equality_iff_identity: Option<bool>,
}

pub fn invofdil_check<'a>(
    src: impl Into<Source<'a>>,
    depth: usize,
    tol: &Tolerance,
) -> Result<InvOfDilReport> {
    let src = src.into();
    let eq = tol.equality_abs;
    let rc = row_contraction_of(src, tol)?;
    let dil = minimal_isometric_dilation(&rc, depth)?;
    let c = src.channel();
    let index_theta = index_of(c, tol);
    let index_alpha = index_of(&dil.alpha.channel, tol);

    let k_theta = curvature(src, tol, None)?.k;
    let alpha_src: Source = if dil.short_circuit {
        src
    } else {
        Source::Truncated(&dil.alpha)
    };
    let k_alpha = curvature(alpha_src, tol, Some(depth - 1).filter(|_| !dil.short_circuit))?.k;

    let alpha_gram = dil.alpha.channel.row_gram();
    let alpha_defect = identity(dil.k_dim) - &alpha_gram;
    let alpha_defect_trace = masked_trace(&alpha_defect, &dil.interior);
    let pure_rank_alpha = defect_rank(&restrict(&alpha_defect, &dil.interior), tol)? as f64;
    let theta_defect = identity(rc.n) - c.row_gram();
    let theta_interior = src.interior();
    let theta_defect_trace = masked_trace(&theta_defect, &theta_interior);
    let pure_rank_theta = defect_rank(&restrict(&theta_defect, &theta_interior), tol)? as f64;
    let compressed = dil.w.adjoint() * &alpha_defect * &dil.w;
    let range_rank = defect_rank(&restrict(&compressed, &theta_interior), tol)?;

    let chain = (k_alpha - alpha_defect_trace).abs() < eq
        && (alpha_defect_trace - pure_rank_alpha).abs() < eq
        && pure_rank_alpha == pure_rank_theta
        && pure_rank_theta + eq >= theta_defect_trace
        && theta_defect_trace + eq >= k_theta
        && range_rank as f64 == pure_rank_theta;

    let theta_pure = purity(src, invariants::DEFAULT_KMAX * 4, tol)?.classification == Purity::Pure;
    let equality_iff_identity =
        theta_pure.then(|| ((k_alpha - k_theta).abs() < eq) == dil.short_circuit);
    Ok(InvOfDilReport {
        index_theta,
        index_alpha,
        slots: rc.d,
        index_equal: index_alpha == rc.d && (index_theta == rc.d || index_theta == 0),
        k_theta,
        k_alpha,
        alpha_defect_trace,
        pure_rank_alpha,
        pure_rank_theta,
        theta_defect_trace,
        range_rank,
        purerank_chain_ok: chain,
        theta_pure,
        alpha_is_theta: dil.short_circuit,
        equality_iff_identity,
    })
}

fn masked_trace(x: &CMatrix, idx: &[usize]) -> f64 {
    if idx.len() == x.nrows() {
        return trace_re(x);
    }
    idx.iter().map(|&i| x[(i, i)].re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::family::{family_channel, TruncationFamily};
    use crate::numerics::{distance, matrix_unit};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn scalar(v: f64) -> Channel {
        Channel::from_kraus(vec![CMatrix::from_element(1, 1, c(v, 0.0))]).unwrap()
    }

    #[test]
    fn row_contraction_examples() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let rc = row_contraction_of(&Channel::from_kraus(vec![u.clone()]).unwrap(), &tol()).unwrap();
        assert_eq!(rc.t_tilde, u);
        assert_eq!(rc.defect_dim(), 0);

        let rc = row_contraction_of(&scalar(0.0), &tol()).unwrap();
        assert_eq!(rc.d, 1);
        assert_eq!(rc.delta[(0, 0)], c(1.0, 0.0));
        assert_eq!(rc.defect_dim(), 1);

        let t = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.1), c(0.0, 0.0), c(0.2, 0.0)]);
        let ch = Channel::from_kraus(vec![t.clone(), t.clone()]).unwrap();
        let rc = row_contraction_of(&ch, &tol()).unwrap();
        assert_eq!(rc.d, 1);
        let expected = &t * c(2.0_f64.sqrt(), 0.0);
        let ratio = rc.t_tilde[(0, 0)] / expected[(0, 0)];
        assert!(distance(&rc.t_tilde, &(&expected * ratio)) < 1e-12);
        let resid = &rc.delta * &rc.delta + rc.t_tilde.adjoint() * &rc.t_tilde - identity(2);
        assert!(frobenius(&resid) < 1e-9);
    }

    #[test]
    fn zero_scalar_dilates_to_shift() {
        let rc = row_contraction_of(&scalar(0.0), &tol()).unwrap();
        let dil = minimal_isometric_dilation(&rc, 5).unwrap();
        assert_eq!(dil.k_dim, 6);
        let shift = family_channel(&TruncationFamily::TruncatedShift, 6).unwrap();
        assert_eq!(dil.alpha.channel.kraus()[0], shift.channel.kraus()[0]);
    }

    #[test]
    fn scalar_contraction_dilation() {
        let ch = scalar(0.5);
        let rc = row_contraction_of(&ch, &tol()).unwrap();
        let dil = minimal_isometric_dilation(&rc, 12).unwrap();
        let chk = check_dilation_properties(&dil, &ch, 8, &tol()).unwrap();
        assert!(chk.isometry_residual < 1e-10);
        assert!(chk.power_residual < 1e-9);
        assert_eq!(chk.generated_dim, dil.k_dim);
        assert!(chk.passes(&tol()));
        assert!(check_dilation_properties(&dil, &ch, 12, &tol()).is_err());
    }

    #[test]
    fn isometric_inputs_short_circuit() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let ch = Channel::from_kraus(vec![u]).unwrap();
        let dil = minimal_isometric_dilation(&row_contraction_of(&ch, &tol()).unwrap(), 4).unwrap();
        assert!(dil.short_circuit && dil.k_dim == 2);
        let chk = check_dilation_properties(&dil, &ch, 3, &tol()).unwrap();
        assert_eq!(chk.power_residual, 0.0);

        let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 4).unwrap();
        let dil = minimal_isometric_dilation(&row_contraction_of(&free, &tol()).unwrap(), 4).unwrap();
        assert!(dil.short_circuit);
        let chk = check_dilation_properties(&dil, &free, 3, &tol()).unwrap();
        assert!(chk.power_residual < 1e-10);
    }

    #[test]
    fn wold_examples() {
        let sh = family_channel(&TruncationFamily::TruncatedShift, 16).unwrap();
        let w = wold_decomposition(&sh, 64, &tol()).unwrap();
        assert!(w.pure && w.induced_multiplicity == 1);
        assert!(w.split_certificate.completeness < 1e-12);

        let u = Channel::from_kraus(vec![identity(3)]).unwrap();
        let w = wold_decomposition(&u, 64, &tol()).unwrap();
        assert_eq!(w.p_inf, identity(3));
        assert!(w.q.iter().all(|q| frobenius(q) == 0.0));

        let f = TruncationFamily::ShiftPlusUnitary {
            unitary: CMatrix::from_element(1, 1, c(0.6, 0.8)),
        };
        let tc = family_channel(&f, 8).unwrap();
        let w = wold_decomposition(&tc, 64, &tol()).unwrap();
        assert!(distance(&w.p_inf, &matrix_unit(9, 8, 8)) < 1e-8);
        assert_eq!(w.induced_multiplicity, 1);

        let half = scalar(0.5);
        assert!(matches!(
            wold_decomposition(&half, 10, &tol()),
            Err(Error::NotIsometric { .. })
        ));
        let dil = minimal_isometric_dilation(&row_contraction_of(&half, &tol()).unwrap(), 10).unwrap();
        let w = wold_decomposition(&dil, 64, &tol()).unwrap();
        assert!(w.pure && w.induced_multiplicity == 1);
    }

    #[test]
    fn invofdil_examples() {
        let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 5).unwrap();
        let r = invofdil_check(&free, 5, &tol()).unwrap();
        assert!(r.index_equal && r.purerank_chain_ok && r.alpha_is_theta);
        assert_eq!((r.k_theta, r.k_alpha, r.pure_rank_theta), (1.0, 1.0, 1.0));
        assert_eq!(r.equality_iff_identity, Some(true));

        let r = invofdil_check(&scalar(0.5), 8, &tol()).unwrap();
        assert!(r.purerank_chain_ok && !r.alpha_is_theta);
        assert!(r.k_theta.abs() < 1e-8 && (r.k_alpha - 1.0).abs() < 1e-9);
        assert_eq!(r.equality_iff_identity, Some(true));

        let u = Channel::from_kraus(vec![identity(2)]).unwrap();
        let r = invofdil_check(&u, 4, &tol()).unwrap();
        assert!(r.purerank_chain_ok && r.k_alpha == 0.0 && r.pure_rank_theta == 0.0);
        assert_eq!(r.equality_iff_identity, None);
    }
}
