//! Curvature, pure rank, purity and the multiplicativity checks built on
//! the defect sequence `a_j = tr(Θ^j(I) − Θ^{j+1}(I))`.

use serde::{Serialize, Serializer};

use crate::channel::{index_of, masked_norm, Channel, Source, TruncatedChannel};
use crate::error::{Error, Result};
use crate::numerics::{
    distance, frobenius, hermitian_eig, identity, psd_sqrt, CMatrix, Tolerance, C64,
};

/// Iteration cap used when the caller does not pick one for an exact channel.
pub const DEFAULT_KMAX: usize = 512;

/// How a limit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// The sequence is constant over the whole horizon.
    Exact,
    /// Declared at the given step by the stopping rule.
    Stabilized(usize),
    /// The horizon ran out; the value is the last iterate.
    Unconverged,
}

impl Certificate {
    pub fn converged(self) -> bool {
        !matches!(self, Certificate::Unconverged)
    }
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certificate::Exact => write!(f, "exact"),
            Certificate::Stabilized(k) => write!(f, "stabilized({k})"),
            Certificate::Unconverged => write!(f, "unconverged"),
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Limit of a nonnegative, nonincreasing sequence.
///
/// Constant sequences are exact. Otherwise the limit is declared at the
/// first step where three successive increments stay below
/// `tol·(1 + x_0)`, or as soon as an iterate drops below `tol`.
pub fn stabilized_limit(x: &[f64], tol: f64) -> (f64, Certificate) {
    let Some(&x0) = x.first() else {
        return (0.0, Certificate::Unconverged);
    };
    let last = *x.last().expect("nonempty");
    if x.iter().all(|v| (v - x0).abs() <= 1e-12 * (1.0 + x0.abs())) {
        return (x0, Certificate::Exact);
    }
    let step = tol * (1.0 + x0.abs());
    let mut run = 0;
    for k in 0..x.len() {
        if x[k].abs() < tol {
            return (last, Certificate::Stabilized(k));
        }
        if k + 1 < x.len() {
            if (x[k + 1] - x[k]).abs() < step {
                run += 1;
                if run == 3 {
                    // the tail only tightens the upper bound
                    return (last, Certificate::Stabilized(k + 1));
                }
            } else {
                run = 0;
            }
        }
    }
    (last, Certificate::Unconverged)
}

/// Defect traces of a channel.
#[derive(Debug, Clone, Serialize)]
pub struct DefectSequence {
    /// `a_j = tr(Θ^j(I) − Θ^{j+1}(I))` for `j < horizon`.
    pub a: Vec<f64>,
    /// `partial_k = tr(I − Θ^k(I))` for `k ≤ horizon`.
    pub partial: Vec<f64>,
    pub d: f64,
    pub horizon: usize,
}

impl DefectSequence {
    /// A synthetic sequence; `partial` is filled in from `a`.
    pub fn from_terms(a: Vec<f64>, d: f64) -> Self {
        let mut partial = Vec::with_capacity(a.len() + 1);
        partial.push(0.0);
        for v in &a {
            partial.push(partial.last().unwrap() + v);
        }
        let horizon = a.len();
        Self {
            a,
            partial,
            d,
            horizon,
        }
    }
}

pub fn defect_sequence<'a>(
    src: impl Into<Source<'a>>,
    kmax: usize,
    tol: &Tolerance,
) -> Result<DefectSequence> {
    let src = src.into();
    if kmax == 0 {
        return Err(Error::Degenerate("kmax must be at least 1".into()));
    }
    if let Some(safe) = src.safe_horizon() {
        if kmax > safe {
            return Err(Error::HorizonExceeded {
                requested: kmax,
                safe,
            });
        }
    }
    let c = src.channel();
    let id_trace = c.trace_of(&identity(c.n()));
    let partial: Vec<f64> = c
        .powers_on_identity(kmax)
        .iter()
        .map(|p| id_trace - c.trace_of(p))
        .collect();
    let a = partial.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(DefectSequence {
        a,
        partial,
        d: index_of(c, tol) as f64,
        horizon: kmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "d_gt_1")]
    DGt1,
    #[serde(rename = "d_eq_1")]
    DEq1,
    #[serde(rename = "d_lt_1")]
    DLt1,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub d: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `K / tr(I − Θ(I))`, absent when the map is unital.
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    pub branch: Branch,
    pub certificate: Certificate,
    /// `tr(I − Θ(I))`.
    pub defect_trace: f64,
}

pub fn curvature_from_sequence(s: &DefectSequence, tol: &Tolerance) -> Result<CurvatureReport> {
    let eq = tol.equality_abs;
    let d = s.d;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Degenerate(format!("index {d} is not a nonnegative number")));
    }
    if s.a.is_empty() {
        return Err(Error::Degenerate("empty defect sequence".into()));
    }
    for (j, &v) in s.a.iter().enumerate() {
        if v < -eq {
            return Err(Error::InvalidSequence {
                index: j,
                next: v,
                bound: 0.0,
            });
        }
    }
    for j in 0..s.a.len() - 1 {
        let bound = d * s.a[j];
        if s.a[j + 1] > bound + eq * (1.0 + bound) {
            return Err(Error::InvalidSequence {
                index: j,
                next: s.a[j + 1],
                bound,
            });
        }
    }
    let (branch, k, certificate) = if d >= 1.0 {
        let branch = if d > 1.0 { Branch::DGt1 } else { Branch::DEq1 };
        let mut scale = 1.0;
        let x: Vec<f64> = s
            .a
            .iter()
            .map(|&v| {
                let r = v / scale;
                scale *= d;
                r
            })
            .collect();
        let (k, cert) = stabilized_limit(&x, eq);
        (branch, k.max(0.0), cert)
    } else {
        let sum: f64 = s.a.iter().sum();
        let last = *s.a.last().unwrap();
        let cert = if d == 0.0 || s.a.iter().skip(1).all(|v| v.abs() <= 1e-15) {
            Certificate::Exact
        } else if last.max(0.0) * d / (1.0 - d) < eq {
            Certificate::Stabilized(s.a.len())
        } else {
            Certificate::Unconverged
        };
        (Branch::DLt1, (1.0 - d) * sum, cert)
    };
    let defect_trace = s.a[0];
    let k1 = (defect_trace > eq).then(|| k / defect_trace);
    Ok(CurvatureReport {
        d,
        k,
        k1,
        branch,
        certificate,
        defect_trace,
    })
}

/// Curvature at the given horizon; `kmax` defaults to the family horizon or
/// [`DEFAULT_KMAX`].
pub fn curvature<'a>(
    src: impl Into<Source<'a>>,
    tol: &Tolerance,
    kmax: Option<usize>,
) -> Result<CurvatureReport> {
    let src = src.into();
    let kmax = kmax.unwrap_or_else(|| src.safe_horizon().unwrap_or(DEFAULT_KMAX));
    let s = defect_sequence(src, kmax, tol)?;
    curvature_from_sequence(&s, tol)
}

/// Eigenvalues of a PSD defect operator counted above both the relative
/// cutoff and the absolute comparison bound.
pub fn defect_rank(a: &CMatrix, tol: &Tolerance) -> Result<usize> {
    let eig = hermitian_eig(a, tol)?;
    let floor = (tol.rank_rel * eig.norm()).max(tol.equality_abs);
    Ok(eig.values.iter().filter(|&&v| v > floor).count())
}

/// Rank of `I − Σ t_i t_i*`, weighted by the trace convention.
pub fn pure_rank(c: &Channel, tol: &Tolerance) -> Result<f64> {
    let defect = identity(c.n()) - c.row_gram();
    let rank = defect_rank(&defect, tol)? as f64;
    Ok(match c.trace_convention() {
        crate::TraceConvention::Standard => rank,
        crate::TraceConvention::Normalized => rank / c.n() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    Full,
    Mixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityReport {
    pub classification: Purity,
    #[serde(skip)]
    pub theta_inf: CMatrix,
    #[serde(skip)]
    pub c_inf: CMatrix,
    pub iterations: usize,
    pub certificate: Certificate,
}

/// Iterates `X ↦ f(X)` from `x0` under the stabilization rule, measuring
/// increments in Frobenius norm.
pub(crate) fn iterate_to_limit(
    x0: CMatrix,
    kmax: usize,
    tol: f64,
    mut f: impl FnMut(&CMatrix) -> CMatrix,
) -> (CMatrix, usize, Certificate) {
    let scale = tol * (1.0 + frobenius(&x0));
    let mut x = x0;
    let mut run = 0;
    let mut detected = None;
    for k in 0..kmax {
        if frobenius(&x) < tol * 1e-3 {
            return (x, k, detected.unwrap_or(Certificate::Stabilized(k)));
        }
        let next = f(&x);
        let step = distance(&next, &x);
        x = next;
        if step == 0.0 && k == 0 {
            return (x, 1, Certificate::Exact);
        }
        if detected.is_some() {
            if step < scale * 1e-3 {
                return (x, k + 1, detected.unwrap());
            }
            continue;
        }
        if step < scale {
            run += 1;
            if run == 3 {
                detected = Some(Certificate::Stabilized(k + 1));
            }
        } else {
            run = 0;
        }
    }
    (x, kmax, detected.unwrap_or(Certificate::Unconverged))
}

/// Limit of `Θ^k(I)` and the resulting classification. Truncated inputs
/// are judged on the interior.
pub fn purity<'a>(src: impl Into<Source<'a>>, kmax: usize, tol: &Tolerance) -> Result<PurityReport> {
    let src = src.into();
    let c = src.channel();
    let n = c.n();
    let (theta_inf, iterations, certificate) =
        iterate_to_limit(identity(n), kmax, tol.equality_abs, |x| c.apply_raw(x));
    let interior = src.interior();
    let classification = if masked_norm(&theta_inf, &interior) < tol.equality_abs {
        Purity::Pure
    } else if masked_norm(&(&theta_inf - identity(n)), &interior) < tol.equality_abs {
        Purity::Full
    } else {
        Purity::Mixed
    };
    let c_inf = psd_sqrt(&(identity(n) - &theta_inf), tol)?;
    Ok(PurityReport {
        classification,
        theta_inf,
        c_inf,
        iterations,
        certificate,
    })
}

/// A single contraction, either as a bare matrix or as a one-operator
/// family member.
#[derive(Debug, Clone, Copy)]
pub enum Contraction<'a> {
    Matrix(&'a CMatrix),
    Truncated(&'a TruncatedChannel),
}

impl<'a> From<&'a CMatrix> for Contraction<'a> {
    fn from(t: &'a CMatrix) -> Self {
        Contraction::Matrix(t)
    }
}

impl<'a> From<&'a TruncatedChannel> for Contraction<'a> {
    fn from(t: &'a TruncatedChannel) -> Self {
        Contraction::Truncated(t)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleContractionReport {
    /// `lim tr(t^k t^k* − t^{k+1} t^{k+1}*)`.
    pub k_limit: f64,
    pub limit_certificate: Certificate,
    /// `tr(I − tt*) − tr(Δ(I − t_∞)Δ)` with `Δ = (I − t*t)^{1/2}`.
    pub k_closed: f64,
    #[serde(skip)]
    pub t_inf: CMatrix,
    pub agree: bool,
}

pub fn single_contraction_curvature<'a>(
    input: impl Into<Contraction<'a>>,
    kmax: usize,
    tol: &Tolerance,
) -> Result<SingleContractionReport> {
    let (t, interior, horizon) = match input.into() {
        Contraction::Matrix(t) => (t, None, kmax),
        Contraction::Truncated(tc) => {
            let k = tc.channel.kraus();
            if k.len() != 1 {
                return Err(Error::Degenerate(format!(
                    "expected a single contraction, family has {} operators",
                    k.len()
                )));
            }
            if kmax > tc.safe_horizon {
                return Err(Error::HorizonExceeded {
                    requested: kmax,
                    safe: tc.safe_horizon,
                });
            }
            (&k[0], Some(tc.interior_projection()), kmax)
        }
    };
    let n = t.nrows();
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    let norm = hermitian_eig(&(t * t.adjoint()), tol)?.norm().sqrt();
    if norm > 1.0 + tol.equality_abs {
        return Err(Error::NotContraction { norm });
    }
    let ch = Channel::unchecked(vec![t.clone()], crate::TraceConvention::Standard)?;
    let seq = defect_sequence(&ch, horizon.max(1), tol)?;
    let (k_limit, limit_certificate) = stabilized_limit(&seq.a, tol.equality_abs);

    let (t_inf, _, _) = iterate_to_limit(identity(n), kmax.max(DEFAULT_KMAX), tol.equality_abs, |x| {
        ch.apply_raw(x)
    });
    let mut defect = identity(n) - t.adjoint() * t;
    if let Some(p) = &interior {
        defect = p * defect * p;
    }
    let delta = psd_sqrt(&defect, tol)?;
    let first = crate::numerics::trace_re(&(identity(n) - t * t.adjoint()));
    let second = crate::numerics::trace_re(&(&delta * (identity(n) - &t_inf) * &delta));
    let k_closed = first - second;
    Ok(SingleContractionReport {
        k_limit,
        limit_certificate,
        k_closed,
        agree: (k_limit - k_closed).abs() < tol.equality_abs,
        t_inf,
    })
}

/// Aggregate size of `Θ(a c² b) − Θ(a c)Θ(c b)` over all matrix units
/// `a = E_ij`, `b = E_kl` with every index in `idx`.
///
/// Uses `Σ_{i,l} ‖D_il‖² = tr(G A G* A)` where, for fixed `(j,k)`,
/// `G[m,m'] = (c t_m* t_m' c)_jk − δ_mm' (c²)_jk` and
/// `A[m,m'] = Σ_i (t_m* t_m')_ii`, so the cost stays quadratic in `n`.
pub fn multiplicativity_defect(c: &Channel, weight: &CMatrix, idx: &[usize]) -> f64 {
    let kraus = c.kraus();
    let k = kraus.len();
    let products: Vec<Vec<CMatrix>> = kraus
        .iter()
        .map(|tm| {
            kraus
                .iter()
                .map(|tn| weight * (tm.adjoint() * tn) * weight)
                .collect()
        })
        .collect();
    let c2 = weight * weight;
    let mut a = CMatrix::zeros(k, k);
    for m in 0..k {
        for m2 in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for &i in idx {
                let col_m = kraus[m].column(i);
                let col_n = kraus[m2].column(i);
                acc += col_m.dotc(&col_n);
            }
            a[(m, m2)] = acc;
        }
    }
    let mut total = 0.0;
    let mut g = CMatrix::zeros(k, k);
    for &j in idx {
        for &l in idx {
            for m in 0..k {
                for m2 in 0..k {
                    let mut v = products[m][m2][(j, l)];
                    if m == m2 {
                        v -= c2[(j, l)];
                    }
                    g[(m, m2)] = v;
                }
            }
            if g.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let val = (&g * &a * g.adjoint() * &a).trace().re;
            total += val.max(0.0);
        }
    }
    total.sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct EndomorphismReport {
    pub is_endo: bool,
    pub multiplicativity_residual: f64,
    pub d: f64,
    pub trace_scaling_ok: bool,
    pub trace_scaling_residual: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub defect_trace: f64,
    #[serde(rename = "K_equals_defect_trace")]
    pub k_equals_defect_trace: bool,
}

pub fn endomorphism_check<'a>(
    src: impl Into<Source<'a>>,
    probes: &[CMatrix],
    tol: &Tolerance,
) -> Result<EndomorphismReport> {
    let src = src.into();
    let c = src.channel();
    let interior = src.interior();
    let residual = multiplicativity_defect(c, &identity(c.n()), &interior);
    let curv = curvature(src, tol, None)?;
    let mut worst: f64 = 0.0;
    let mut scaling_ok = true;
    for x in probes {
        let tx = c.trace_of(x);
        let gap = (c.trace_of(&c.apply(x)?) - curv.d * tx).abs();
        worst = worst.max(gap);
        if gap >= tol.equality_abs * (1.0 + tx.abs()) {
            scaling_ok = false;
        }
    }
    Ok(EndomorphismReport {
        is_endo: residual < tol.equality_abs,
        multiplicativity_residual: residual,
        d: curv.d,
        trace_scaling_ok: scaling_ok,
        trace_scaling_residual: worst,
        k: curv.k,
        defect_trace: curv.defect_trace,
        k_equals_defect_trace: (curv.k - curv.defect_trace).abs() < tol.equality_abs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub defect_trace: f64,
    pub saturated: bool,
    pub multiplicative_at_c_inf: bool,
    pub multiplicativity_residual: f64,
    /// Whether the two booleans agree.
    pub consistent: bool,
}

pub fn saturation_check<'a>(src: impl Into<Source<'a>>, tol: &Tolerance) -> Result<SaturationReport> {
    let src = src.into();
    let curv = curvature(src, tol, None)?;
    let pur = purity(src, DEFAULT_KMAX * 4, tol)?;
    let residual = multiplicativity_defect(src.channel(), &pur.c_inf, &src.interior());
    let saturated = (curv.k - curv.defect_trace).abs() < tol.equality_abs;
    let multiplicative = residual < tol.equality_abs;
    Ok(SaturationReport {
        k: curv.k,
        defect_trace: curv.defect_trace,
        saturated,
        multiplicative_at_c_inf: multiplicative,
        multiplicativity_residual: residual,
        consistent: saturated == multiplicative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::family::{family_channel, TruncationFamily};
    use crate::numerics::{c, diag_real, matrix_unit};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rotation() -> CMatrix {
        let (s, co) = (0.6, 0.8);
        CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    #[test]
    fn stopping_rule() {
        assert_eq!(stabilized_limit(&[1.0; 5], 1e-8), (1.0, Certificate::Exact));
        let x: Vec<f64> = (0..40).map(|k| 1.0 + 0.5_f64.powi(k)).collect();
        let (v, cert) = stabilized_limit(&x, 1e-8);
        assert!((v - 1.0).abs() < 1e-7);
        assert!(matches!(cert, Certificate::Stabilized(_)));
        let (_, cert) = stabilized_limit(&[3.0, 2.0, 1.0], 1e-8);
        assert_eq!(cert, Certificate::Unconverged);
    }

    #[test]
    fn unitary_defects_vanish() {
        let ch = Channel::from_kraus(vec![rotation()]).unwrap();
        let s = defect_sequence(&ch, 5, &tol()).unwrap();
        assert_eq!(s.a.len(), 5);
        assert!(s.a.iter().all(|v| v.abs() < 1e-14));
        let r = curvature(&ch, &tol(), None).unwrap();
        assert!(r.k.abs() < 1e-12 && r.k1.is_none() && r.d == 1.0);
    }

    #[test]
    fn shift_and_free_sequences() {
        let sh = family_channel(&TruncationFamily::TruncatedShift, 10).unwrap();
        let s = defect_sequence(&sh, 9, &tol()).unwrap();
        assert!(s.a.iter().all(|&v| v == 1.0));
        assert!(matches!(
            defect_sequence(&sh, 10, &tol()),
            Err(Error::HorizonExceeded { requested: 10, safe: 9 })
        ));
        let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 6).unwrap();
        let s = defect_sequence(&free, 6, &tol()).unwrap();
        for (j, v) in s.a.iter().enumerate() {
            assert_eq!(*v, 2f64.powi(j as i32));
        }
        let r = curvature(&free, &tol(), None).unwrap();
        assert_eq!(r.certificate, Certificate::Exact);
        assert_eq!(r.k, 1.0);
        assert_eq!(r.k1, Some(1.0));
    }

    #[test]
    fn synthetic_branches() {
        let s = DefectSequence::from_terms((0..20).map(|j| 2f64.powi(j)).collect(), 2.0);
        let r = curvature_from_sequence(&s, &tol()).unwrap();
        assert_eq!((r.k, r.branch), (1.0, Branch::DGt1));
        let s = DefectSequence::from_terms(vec![1.0; 20], 1.0);
        assert_eq!(curvature_from_sequence(&s, &tol()).unwrap().k, 1.0);
        let s = DefectSequence::from_terms((0..64).map(|j| 0.5f64.powi(j)).collect(), 0.5);
        let r = curvature_from_sequence(&s, &tol()).unwrap();
        assert!((r.k - 1.0).abs() < 1e-12);
        assert_eq!(r.branch, Branch::DLt1);
        let bad = DefectSequence::from_terms(vec![1.0, 3.0], 2.0);
        assert!(matches!(
            curvature_from_sequence(&bad, &tol()),
            Err(Error::InvalidSequence { index: 0, .. })
        ));
    }

    #[test]
    fn pure_rank_examples() {
        let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 6).unwrap();
        assert_eq!(pure_rank(&free.channel, &tol()).unwrap(), 1.0);
        let u = Channel::from_kraus(vec![rotation()]).unwrap();
        assert_eq!(pure_rank(&u, &tol()).unwrap(), 0.0);
        let zero = Channel::from_kraus(vec![CMatrix::zeros(3, 3)]).unwrap();
        assert_eq!(pure_rank(&zero, &tol()).unwrap(), 3.0);
        let r = curvature(&zero, &tol(), None).unwrap();
        assert_eq!((r.d, r.k), (0.0, 3.0));
    }

    #[test]
    fn purity_examples() {
        let t = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.4, 0.0), c(0.0, 0.0), c(0.0, 0.3)]);
        let ch = Channel::from_kraus(vec![t]).unwrap();
        assert_eq!(purity(&ch, 1000, &tol()).unwrap().classification, Purity::Pure);
        let u = Channel::from_kraus(vec![rotation()]).unwrap();
        assert_eq!(purity(&u, 1000, &tol()).unwrap().classification, Purity::Full);
        let f = TruncationFamily::ShiftPlusUnitary {
            unitary: CMatrix::from_element(1, 1, c(0.0, 1.0)),
        };
        let tc = family_channel(&f, 8).unwrap();
        let p = purity(&tc, 100, &tol()).unwrap();
        assert_eq!(p.classification, Purity::Mixed);
        assert!(distance(&p.theta_inf, &matrix_unit(9, 8, 8)) < 1e-8);
    }

    #[test]
    fn single_contraction_examples() {
        let r = single_contraction_curvature(&rotation(), 50, &tol()).unwrap();
        assert!(r.k_limit.abs() < 1e-12 && r.k_closed.abs() < 1e-12 && r.agree);
        assert!(distance(&r.t_inf, &identity(2)) < 1e-12);

        let sh = family_channel(&TruncationFamily::TruncatedShift, 32).unwrap();
        let r = single_contraction_curvature(&sh, 31, &tol()).unwrap();
        assert_eq!(r.k_limit, 1.0);
        assert!((r.k_closed - 1.0).abs() < 1e-12 && r.agree);

        let mixed = diag_real(&[1.0, 0.5]);
        let r = single_contraction_curvature(&mixed, 200, &tol()).unwrap();
        assert!(r.k_closed.abs() < 1e-8);
        assert!(matches!(
            single_contraction_curvature(&(identity(2) * c(1.1, 0.0)), 5, &tol()),
            Err(Error::NotContraction { .. })
        ));
    }

    fn brute_multiplicativity(ch: &Channel, w: &CMatrix) -> f64 {
        let n = ch.n();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let a = matrix_unit(n, i, j);
                        let b = matrix_unit(n, k, l);
                        let lhs = ch.apply(&(&a * w * w * &b)).unwrap();
                        let rhs = ch.apply(&(&a * w)).unwrap() * ch.apply(&(w * &b)).unwrap();
                        total += distance(&lhs, &rhs).powi(2);
                    }
                }
            }
        }
        total.sqrt()
    }

    #[test]
    fn aggregate_multiplicativity_matches_brute_force() {
        let t1 = CMatrix::from_fn(3, 3, |i, j| c(0.1 * (i + j) as f64, 0.05 * (i as f64 - j as f64)));
        let t2 = CMatrix::from_fn(3, 3, |i, j| c(0.07 * (i * j) as f64, 0.02 * j as f64));
        let ch = Channel::from_kraus(vec![t1, t2]).unwrap();
        let w = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                c(0.5 + 0.1 * i as f64, 0.0)
            } else {
                c(0.05, 0.02 * (i as f64 - j as f64))
            }
        });
        let idx: Vec<usize> = (0..3).collect();
        let fast = multiplicativity_defect(&ch, &w, &idx);
        let slow = brute_multiplicativity(&ch, &w);
        assert!((fast - slow).abs() < 1e-12 * (1.0 + slow), "{fast} vs {slow}");
    }

    #[test]
    fn endomorphism_examples() {
        let u = Channel::from_kraus(vec![rotation()]).unwrap();
        let r = endomorphism_check(&u, &[identity(2), matrix_unit(2, 0, 0)], &tol()).unwrap();
        assert!(r.is_endo && r.trace_scaling_ok && r.k_equals_defect_trace && r.d == 1.0);

        let sh = family_channel(&TruncationFamily::TruncatedShift, 12).unwrap();
        let probes: Vec<CMatrix> = (0..11).map(|i| matrix_unit(12, i, i)).collect();
        let r = endomorphism_check(&sh, &probes, &tol()).unwrap();
        assert!(r.is_endo && r.trace_scaling_ok && r.k_equals_defect_trace);
        assert_eq!(r.k, 1.0);

        let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 5).unwrap();
        let probes: Vec<CMatrix> = (0..31).map(|i| matrix_unit(63, i, i)).collect();
        let r = endomorphism_check(&free, &probes, &tol()).unwrap();
        assert!(r.is_endo && r.trace_scaling_ok && r.d == 2.0);
    }

    #[test]
    fn saturation_examples() {
        let sh = family_channel(&TruncationFamily::TruncatedShift, 12).unwrap();
        let r = saturation_check(&sh, &tol()).unwrap();
        assert!(r.saturated && r.multiplicative_at_c_inf);

        let half = Channel::from_kraus(vec![identity(2) * c(0.5, 0.0)]).unwrap();
        let r = saturation_check(&half, &tol()).unwrap();
        assert!(!r.saturated && !r.multiplicative_at_c_inf && r.consistent);

        let avg = Channel::from_kraus(vec![
            identity(2) * c(0.5_f64.sqrt(), 0.0),
            rotation() * c(0.5_f64.sqrt(), 0.0),
        ])
        .unwrap();
        let r = saturation_check(&avg, &tol()).unwrap();
        assert!(r.saturated && r.multiplicative_at_c_inf);
    }
}
