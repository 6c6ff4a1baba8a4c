//! Seeded generators for test instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::numerics::{
    direct_sum, hermitian_eig, psd_inv_sqrt, CMatrix, Tolerance, C64,
};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries i.i.d. standard complex Gaussian.
pub fn ginibre(rng: &mut TestRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary(rng: &mut TestRng, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `G G*` for a Ginibre `G`; positive definite almost surely.
pub fn positive(rng: &mut TestRng, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    &g * g.adjoint()
}

/// Positive with the given rank.
pub fn positive_of_rank(rng: &mut TestRng, n: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, n, rank);
    &g * g.adjoint()
}

fn lambda_max(kraus: &[CMatrix]) -> f64 {
    let n = kraus[0].nrows();
    let mut s = CMatrix::zeros(n, n);
    for t in kraus {
        s += t * t.adjoint();
    }
    hermitian_eig(&s, &Tolerance::default())
        .map(|e| e.norm())
        .unwrap_or(0.0)
}

/// Rescales a tuple so that `λ_max(Σ t t*) = target`.
pub fn scale_to(kraus: Vec<CMatrix>, target: f64) -> Vec<CMatrix> {
    let lam = lambda_max(&kraus);
    if lam == 0.0 {
        return kraus;
    }
    let f = C64::new((target / lam).sqrt(), 0.0);
    kraus.into_iter().map(|t| t * f).collect()
}

/// `k` Gaussian Kraus operators scaled to `λ_max(Σ t t*) ∈ [0.5, 1)`.
pub fn channel(rng: &mut TestRng, n: usize, k: usize) -> Channel {
    let target = rng.random_range(0.5..0.999);
    let kraus = (0..k).map(|_| ginibre(rng, n, n)).collect();
    Channel::from_kraus(scale_to(kraus, target)).expect("scaled tuple is contractive")
}

/// `Σ t_i t_i* = I` exactly (up to rounding).
pub fn unital_channel(rng: &mut TestRng, n: usize, k: usize) -> Channel {
    let g: Vec<CMatrix> = (0..k).map(|_| ginibre(rng, n, n)).collect();
    let mut s = CMatrix::zeros(n, n);
    for t in &g {
        s += t * t.adjoint();
    }
    let inv = psd_inv_sqrt(&s, &Tolerance::default()).expect("Gram is positive");
    Channel::from_kraus(g.iter().map(|t| &inv * t).collect()).expect("coisometric tuple")
}

/// `k` operators spanning exactly `s` dimensions (`s ≤ k`, `s ≤ n²`).
pub fn planted_span(rng: &mut TestRng, n: usize, k: usize, s: usize) -> Channel {
    assert!(s >= 1 && s <= k && s <= n * n);
    let basis: Vec<CMatrix> = (0..s).map(|_| ginibre(rng, n, n)).collect();
    let mut coef = ginibre(rng, k, s);
    // a random k×s matrix has full column rank; make it certain
    for j in 0..s {
        coef[(j, j)] += C64::new(3.0, 0.0);
    }
    let kraus: Vec<CMatrix> = (0..k)
        .map(|i| {
            let mut t = CMatrix::zeros(n, n);
            for (j, b) in basis.iter().enumerate() {
                t += b * coef[(i, j)];
            }
            t
        })
        .collect();
    let target = rng.random_range(0.5..0.999);
    Channel::from_kraus(scale_to(kraus, target)).expect("scaled tuple is contractive")
}

/// Row contraction with `λ_max(Σ t t*) ∈ [0.2, 0.9]`.
pub fn strict_row_contraction(rng: &mut TestRng, n: usize, d: usize) -> Channel {
    let target = rng.random_range(0.2..0.9);
    let kraus = (0..d).map(|_| ginibre(rng, n, n)).collect();
    Channel::from_kraus(scale_to(kraus, target)).expect("scaled tuple is contractive")
}

/// `V (u ⊕ s) V*` with `u` unitary of size `k`, `‖s‖ < 1` and `V` unitary.
pub fn mixed_contraction(rng: &mut TestRng, n: usize, unitary_size: usize) -> CMatrix {
    let k = unitary_size.min(n);
    let s_dim = n - k;
    let core = if s_dim == 0 {
        unitary(rng, k)
    } else {
        let target = rng.random_range(0.1..0.81);
        let s = scale_to(vec![ginibre(rng, s_dim, s_dim)], target).remove(0);
        if k == 0 {
            s
        } else {
            direct_sum(&unitary(rng, k), &s)
        }
    };
    let v = unitary(rng, n);
    &v * core * v.adjoint()
}
