//! The Stinespring space `N ⊗_Θ H` of a map on `N = M_n`, with `N`
//! represented on `H = C^n ⊗ C^r` as `a ↦ a ⊗ I_r`, and the intertwiner
//! correspondence built on it.
//!
//! Raw vectors `E_kl ⊗ e_s` are indexed by `(k·n + l)·nr + s`. Their Gram
//! form is `δ_kk' (Θ(E_ll') ⊗ I_r)_{ss'}`.

use serde::Serialize;

use crate::channel::{index_of, Channel};
use crate::error::{Error, Result};
use crate::invariants::multiplicativity_defect;
use crate::numerics::{
    c, distance, frobenius, frobenius_inner, gns_quotient, hermitian_eig, identity,
    intertwiner_space, kron, matrix_unit, numerical_rank, psd_inv_sqrt, psd_sqrt, trace_re,
    CMatrix, QuotientSpace, Tolerance,
};

/// Default bound on the raw dimension `n²·nr`.
pub const DEFAULT_BUDGET: usize = 4096;

#[derive(Debug, Clone)]
pub struct StinespringSpace {
    pub n: usize,
    pub r: usize,
    /// Index of the map the space was built from.
    pub d: usize,
    pub quotient: QuotientSpace,
    /// `H → quotient`, `h ↦ I ⊗ h`.
    pub w: CMatrix,
    /// `W*`.
    pub s: CMatrix,
    /// `(I − S*S)^{1/2}` on the quotient.
    pub defect: CMatrix,
    channel: Channel,
}

impl StinespringSpace {
    fn h_dim(&self) -> usize {
        self.n * self.r
    }

    /// `a ⊗ I_r` on `H`.
    pub fn pi_h(&self, a: &CMatrix) -> CMatrix {
        kron(a, &identity(self.r))
    }

    /// `(a ⊗ I_m)·L`, with `L` split into `n` row blocks of height `m`.
    fn left_factor(&self, a: &CMatrix, lift: &CMatrix) -> CMatrix {
        let n = self.n;
        let m = lift.nrows() / n;
        let mut out = CMatrix::zeros(lift.nrows(), lift.ncols());
        for i in 0..n {
            for k in 0..n {
                let coef = a[(i, k)];
                if coef == c(0.0, 0.0) {
                    continue;
                }
                let src = lift.view((k * m, 0), (m, lift.ncols())) * coef;
                let mut dst = out.view_mut((i * m, 0), (m, lift.ncols()));
                dst += src;
            }
        }
        out
    }

    /// `π(a)` on the quotient.
    pub fn pi(&self, a: &CMatrix) -> CMatrix {
        &self.quotient.coord_map * self.left_factor(a, &self.quotient.lift)
    }

    /// `I ⊗_Θ b` for `b ∈ M_r`, i.e. the commutant `I_n ⊗ b` moved across.
    pub fn right_action(&self, b: &CMatrix) -> CMatrix {
        let hd = self.h_dim();
        let op = kron(&identity(self.n), b);
        let lift = &self.quotient.lift;
        let mut moved = CMatrix::zeros(lift.nrows(), lift.ncols());
        for blk in 0..self.n * self.n {
            let rows = lift.view((blk * hd, 0), (hd, lift.ncols()));
            moved
                .view_mut((blk * hd, 0), (hd, lift.ncols()))
                .copy_from(&(&op * rows));
        }
        &self.quotient.coord_map * moved
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    /// `max ‖Θ(a) ⊗ I_r − W*π(a)W‖` over matrix units.
    pub fn dilation_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                let a = matrix_unit(n, k, l);
                let lhs = self.pi_h(&self.channel.apply_raw(&a));
                let rhs = &self.s * self.pi(&a) * &self.w;
                worst = worst.max(distance(&lhs, &rhs));
            }
        }
        worst
    }
}

pub fn build_stinespring(c: &Channel, r: usize, tol: &Tolerance) -> Result<StinespringSpace> {
    build_stinespring_with_budget(c, r, DEFAULT_BUDGET, tol)
}

pub fn build_stinespring_with_budget(
    ch: &Channel,
    r: usize,
    budget: usize,
    tol: &Tolerance,
) -> Result<StinespringSpace> {
    if r == 0 {
        return Err(Error::Degenerate("commutant size r must be at least 1".into()));
    }
    let n = ch.n();
    let hd = n * r;
    let raw_dim = n * n * hd;
    if raw_dim > budget {
        return Err(Error::BudgetExceeded { raw_dim, budget });
    }
    let images: Vec<Vec<CMatrix>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|l2| kron(&ch.apply_raw(&matrix_unit(n, l, l2)), &identity(r)))
                .collect()
        })
        .collect();
    let mut gram = CMatrix::zeros(raw_dim, raw_dim);
    for k in 0..n {
        for l in 0..n {
            for l2 in 0..n {
                let row = (k * n + l) * hd;
                let col = (k * n + l2) * hd;
                gram.view_mut((row, col), (hd, hd)).copy_from(&images[l][l2]);
            }
        }
    }
    let quotient = gns_quotient(&gram, tol)?;
    let d = index_of(ch, tol);
    if quotient.quotient_dim != d * hd {
        return Err(Error::Inconsistent(format!(
            "quotient has dimension {} but index·n·r = {}",
            quotient.quotient_dim,
            d * hd
        )));
    }
    let mut w_raw = CMatrix::zeros(raw_dim, hd);
    for s in 0..hd {
        for k in 0..n {
            w_raw[((k * n + k) * hd + s, s)] = c(1.0, 0.0);
        }
    }
    let w = quotient.coords(&w_raw);
    let s = w.adjoint();
    let q = quotient.quotient_dim;
    let defect = psd_sqrt(&(identity(q) - &w * &s), tol)?;
    let space = StinespringSpace {
        n,
        r,
        d,
        quotient,
        w,
        s,
        defect,
        channel: ch.clone(),
    };
    let residual = space.dilation_residual();
    if residual > tol.equality_abs {
        return Err(Error::Inconsistent(format!(
            "W*π(a)W differs from Θ(a) by {residual:.3e}"
        )));
    }
    Ok(space)
}

/// A Frobenius-orthonormal basis of the intertwiners `X: H → N ⊗_Θ H`.
#[derive(Debug, Clone)]
pub struct CorrespondenceBasis {
    pub x: Vec<CMatrix>,
    pub r: usize,
    right: Vec<CMatrix>,
}

impl CorrespondenceBasis {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The commutant-valued inner product `X_i* X_j`.
    pub fn inner(&self, i: usize, j: usize) -> CMatrix {
        self.x[i].adjoint() * &self.x[j]
    }

    /// Structure constants of `X_i ↦ (I ⊗_Θ b) X_i` in this basis.
    pub fn left_action(&self, sp: &StinespringSpace, b: &CMatrix) -> CMatrix {
        let op = sp.right_action(b);
        let k = self.x.len();
        CMatrix::from_fn(k, k, |j, i| frobenius_inner(&self.x[j], &(&op * &self.x[i])))
    }

    /// Matrices of `I ⊗_Θ E_ab` for the matrix units of `M_r`.
    pub fn commutant_generators(&self) -> &[CMatrix] {
        &self.right
    }
}

pub fn intertwiner_basis(sp: &StinespringSpace, tol: &Tolerance) -> Result<CorrespondenceBasis> {
    let n = sp.n;
    let mut targets = Vec::with_capacity(n * n);
    let mut sources = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let a = matrix_unit(n, k, l);
            targets.push(sp.pi(&a));
            sources.push(sp.pi_h(&a));
        }
    }
    let x = intertwiner_space(&targets, &sources, tol)?;
    let expected = sp.d * sp.r * sp.r;
    if x.len() != expected {
        return Err(Error::Inconsistent(format!(
            "intertwiner space has dimension {} but index·r² = {expected}",
            x.len()
        )));
    }
    // Every vector of the quotient is a sum of X_i h.
    let hd = sp.n * sp.r;
    if !x.is_empty() {
        let mut images = CMatrix::zeros(sp.quotient.quotient_dim, x.len() * hd);
        for (i, xi) in x.iter().enumerate() {
            images.view_mut((0, i * hd), (xi.nrows(), hd)).copy_from(xi);
        }
        let rank = numerical_rank(&images, tol);
        if rank != sp.quotient.quotient_dim {
            return Err(Error::Inconsistent(format!(
                "intertwiners span {rank} of {} quotient dimensions",
                sp.quotient.quotient_dim
            )));
        }
    }
    let right = (0..sp.r)
        .flat_map(|a| (0..sp.r).map(move |b| (a, b)))
        .map(|(a, b)| sp.right_action(&matrix_unit(sp.r, a, b)))
        .collect();
    Ok(CorrespondenceBasis { x, r: sp.r, right })
}

/// `dim E / r²`, which must be an integer.
pub fn left_dimension(cb: &CorrespondenceBasis, r: usize) -> Result<usize> {
    let r2 = r * r;
    if r2 == 0 || cb.len() % r2 != 0 {
        return Err(Error::Inconsistent(format!(
            "intertwiner dimension {} is not a multiple of r² = {r2}",
            cb.len()
        )));
    }
    Ok(cb.len() / r2)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRepresentation {
    #[serde(skip)]
    pub canonical_tuple: Vec<CMatrix>,
    pub tuple_len: usize,
    /// `max ‖Σ T_i (a ⊗ I) T_i* − Θ(a) ⊗ I‖` over matrix units.
    pub reconstruction_residual: f64,
    pub ok: bool,
}

/// `T(X̂_i) = W* X̂_i` over the Parseval frame `X̂_i = (Σ X_j X_j*)^{-1/2} X_i`.
pub fn identity_representation(
    sp: &StinespringSpace,
    cb: &CorrespondenceBasis,
    tol: &Tolerance,
) -> Result<IdentityRepresentation> {
    let q = sp.quotient.quotient_dim;
    let mut frame = CMatrix::zeros(q, q);
    for x in &cb.x {
        frame += x * x.adjoint();
    }
    let inv = psd_inv_sqrt(&frame, tol)?;
    let tuple: Vec<CMatrix> = cb.x.iter().map(|x| &sp.s * &inv * x).collect();
    let n = sp.n;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let a = matrix_unit(n, k, l);
            let lifted = sp.pi_h(&a);
            let mut sum = CMatrix::zeros(sp.n * sp.r, sp.n * sp.r);
            for t in &tuple {
                sum += t * &lifted * t.adjoint();
            }
            let want = sp.pi_h(&sp.channel.apply_raw(&a));
            worst = worst.max(distance(&sum, &want));
        }
    }
    Ok(IdentityRepresentation {
        tuple_len: tuple.len(),
        canonical_tuple: tuple,
        reconstruction_residual: worst,
        ok: worst < tol.equality_abs,
    })
}

fn ensure_positive(b: &CMatrix, tol: &Tolerance) -> Result<()> {
    let eig = hermitian_eig(b, tol)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol.equality_abs * eig.norm().max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// `[tr(Θ(b) ⊗ I) + tr(D π(b) D)] / tr(b ⊗ I)`.
pub fn eqd_ratio(sp: &StinespringSpace, b: &CMatrix, tol: &Tolerance) -> Result<f64> {
    if b.shape() != (sp.n, sp.n) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} matrix",
            sp.n
        )));
    }
    ensure_positive(b, tol)?;
    let r = sp.r as f64;
    let tb = trace_re(b) * r;
    if tb < tol.equality_abs {
        return Err(Error::Degenerate(format!("tr(b) = {tb:.3e} is too small")));
    }
    let first = trace_re(&sp.channel.apply_raw(b)) * r;
    let second = trace_re(&(&sp.defect * sp.pi(b) * &sp.defect));
    Ok((first + second) / tb)
}

/// Rank of the Gram matrix of `{E_1l ⊗ e_s}` in the corner `E_11 N ⊗_Θ C^n`.
pub fn compind_dimension(ch: &Channel, tol: &Tolerance) -> usize {
    let n = ch.n();
    let mut gram = CMatrix::zeros(n * n, n * n);
    for l in 0..n {
        for l2 in 0..n {
            let img = ch.apply_raw(&matrix_unit(n, l, l2));
            gram.view_mut((l * n, l2 * n), (n, n)).copy_from(&img);
        }
    }
    numerical_rank(&gram, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleReport {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub equivalent: bool,
    pub trace_gap: f64,
    pub defect_norm: f64,
    pub multiplicativity_residual: f64,
}

/// The three conditions `tr Θ(x) = d·tr x`, `D π(x) D = 0` and
/// multiplicativity at `√x`.
pub fn scale_equivalence_check(
    sp: &StinespringSpace,
    x: &CMatrix,
    tol: &Tolerance,
) -> Result<ScaleReport> {
    ensure_positive(x, tol)?;
    let ch = &sp.channel;
    let tx = trace_re(x);
    let trace_gap = (trace_re(&ch.apply_raw(x)) - sp.d as f64 * tx).abs();
    let defect_norm = frobenius(&(&sp.defect * sp.pi(x) * &sp.defect));
    let root = psd_sqrt(x, tol)?;
    let all: Vec<usize> = (0..sp.n).collect();
    let mult = multiplicativity_defect(ch, &root, &all);
    let eq = tol.equality_abs;
    let cond1 = trace_gap < eq * (1.0 + tx.abs());
    let cond2 = defect_norm < eq;
    let cond3 = mult < eq;
    Ok(ScaleReport {
        cond1,
        cond2,
        cond3,
        equivalent: cond1 == cond2 && cond2 == cond3,
        trace_gap,
        defect_norm,
        multiplicativity_residual: mult,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::diag_real;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn unitary() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)])
    }

    fn rank_two() -> Channel {
        let t1 = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
        let t2 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.4, 0.1), c(0.3, 0.0), c(0.0, 0.0)]);
        Channel::from_kraus(vec![t1, t2]).unwrap()
    }

    #[test]
    fn quotient_dimensions() {
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        assert_eq!(build_stinespring(&u, 1, &tol()).unwrap().quotient.quotient_dim, 2);
        let ch = rank_two();
        assert_eq!(build_stinespring(&ch, 1, &tol()).unwrap().quotient.quotient_dim, 4);
        assert_eq!(build_stinespring(&ch, 2, &tol()).unwrap().quotient.quotient_dim, 8);
        assert!(matches!(
            build_stinespring_with_budget(&ch, 2, 15, &tol()),
            Err(Error::BudgetExceeded { raw_dim: 16, budget: 15 })
        ));
    }

    #[test]
    fn right_action_is_a_unital_homomorphism() {
        let sp = build_stinespring(&rank_two(), 2, &tol()).unwrap();
        let q = sp.quotient.quotient_dim;
        assert!(distance(&sp.right_action(&identity(2)), &identity(q)) < 1e-10);
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.2, 0.0), c(0.0, -1.0), c(0.3, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let lhs = sp.right_action(&(&a * &b));
        let rhs = sp.right_action(&a) * sp.right_action(&b);
        assert!(distance(&lhs, &rhs) < 1e-9);
        // and it commutes with π
        let pa = sp.pi(&matrix_unit(2, 0, 1));
        let rb = sp.right_action(&b);
        assert!(distance(&(&pa * &rb), &(&rb * &pa)) < 1e-9);
    }

    #[test]
    fn intertwiner_counts_and_left_dimension() {
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        let sp = build_stinespring(&u, 1, &tol()).unwrap();
        let cb = intertwiner_basis(&sp, &tol()).unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(left_dimension(&cb, 1).unwrap(), 1);
        let ch = rank_two();
        for (r, want) in [(1, 2), (2, 8), (3, 18)] {
            let sp = build_stinespring(&ch, r, &tol()).unwrap();
            let cb = intertwiner_basis(&sp, &tol()).unwrap();
            assert_eq!(cb.len(), want);
            assert_eq!(left_dimension(&cb, r).unwrap(), 2);
            for i in 0..cb.len().min(3) {
                let g = cb.inner(i, 0);
                for k in 0..2 {
                    for l in 0..2 {
                        let a = sp.pi_h(&matrix_unit(2, k, l));
                        assert!(distance(&(&g * &a), &(&a * &g)) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_representation_reconstructs() {
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        let sp = build_stinespring(&u, 1, &tol()).unwrap();
        let cb = intertwiner_basis(&sp, &tol()).unwrap();
        let rep = identity_representation(&sp, &cb, &tol()).unwrap();
        assert_eq!(rep.tuple_len, 1);
        let t = &rep.canonical_tuple[0];
        let phase = t[(0, 0)] / unitary()[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(distance(t, &(unitary() * phase)) < 1e-10);

        for r in [1, 2] {
            let sp = build_stinespring(&rank_two(), r, &tol()).unwrap();
            let cb = intertwiner_basis(&sp, &tol()).unwrap();
            let rep = identity_representation(&sp, &cb, &tol()).unwrap();
            assert!(rep.ok, "{}", rep.reconstruction_residual);
        }
    }

    #[test]
    fn ratio_examples() {
        let ch = rank_two();
        let sp = build_stinespring(&ch, 1, &tol()).unwrap();
        assert!((eqd_ratio(&sp, &identity(2), &tol()).unwrap() - 2.0).abs() < 1e-10);
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        let sp = build_stinespring(&u, 1, &tol()).unwrap();
        assert!((eqd_ratio(&sp, &matrix_unit(2, 0, 0), &tol()).unwrap() - 1.0).abs() < 1e-10);
        assert!((eqd_ratio(&sp, &identity(2), &tol()).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(
            eqd_ratio(&sp, &CMatrix::zeros(2, 2), &tol()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn corner_rank() {
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        assert_eq!(compind_dimension(&u, &tol()), 1);
        assert_eq!(compind_dimension(&rank_two(), &tol()), 2);
    }

    #[test]
    fn scale_conditions() {
        let u = Channel::from_kraus(vec![unitary()]).unwrap();
        let sp = build_stinespring(&u, 1, &tol()).unwrap();
        let r = scale_equivalence_check(&sp, &diag_real(&[0.3, 0.7]), &tol()).unwrap();
        assert!(r.cond1 && r.cond2 && r.cond3 && r.equivalent);
        let r = scale_equivalence_check(&sp, &CMatrix::zeros(2, 2), &tol()).unwrap();
        assert!(r.cond1 && r.cond2 && r.cond3);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let avg = Channel::from_kraus(vec![identity(2) * c(h, 0.0), unitary() * c(h, 0.0)]).unwrap();
        let sp = build_stinespring(&avg, 1, &tol()).unwrap();
        let r = scale_equivalence_check(&sp, &identity(2), &tol()).unwrap();
        assert!(!r.cond1 && !r.cond2 && !r.cond3 && r.equivalent);

        let corner = Channel::from_kraus(vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 0)]).unwrap();
        let sp = build_stinespring(&corner, 1, &tol()).unwrap();
        let r = scale_equivalence_check(&sp, &matrix_unit(2, 0, 0), &tol()).unwrap();
        assert!(r.cond1 && r.cond2 && r.cond3);
    }
}
