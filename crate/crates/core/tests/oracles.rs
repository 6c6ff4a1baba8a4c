//! Independent reference computations with plain row-major arrays, compared
//! against the library, plus a few values frozen from them.

use cpcurv::channel::family::{family_channel, TruncationFamily};
use cpcurv::channel::{choi_of, index_of};
use cpcurv::dilation::{minimal_isometric_dilation, row_contraction_of};
use cpcurv::invariants::{
    curvature, curvature_from_sequence, defect_sequence, pure_rank, purity,
    single_contraction_curvature, Branch, Certificate, DefectSequence, Purity,
};
use cpcurv::io::load_channel;
use cpcurv::numerics::CMatrix;
use cpcurv::random;
use cpcurv::stinespring::{build_stinespring, intertwiner_basis};
use cpcurv::{Channel, Tolerance};
use num_complex::Complex64 as C;
use std::path::PathBuf;

#[derive(Clone, Debug)]
struct M {
    n: usize,
    a: Vec<C>,
}

impl M {
    fn zeros(n: usize) -> Self {
        M { n, a: vec![C::new(0.0, 0.0); n * n] }
    }
    fn eye(n: usize) -> Self {
        let mut m = M::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C::new(1.0, 0.0);
        }
        m
    }
    fn from(x: &CMatrix) -> Self {
        let n = x.nrows();
        let mut m = M::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = x[(i, j)];
            }
        }
        m
    }
    fn at(&self, i: usize, j: usize) -> C {
        self.a[i * self.n + j]
    }
    fn mul(&self, o: &M) -> M {
        let n = self.n;
        let mut r = M::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                for j in 0..n {
                    r.a[i * n + j] += x * o.at(k, j);
                }
            }
        }
        r
    }
    fn adj(&self) -> M {
        let n = self.n;
        let mut r = M::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.a[j * n + i] = self.at(i, j).conj();
            }
        }
        r
    }
    fn add(&self, o: &M) -> M {
        M { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }
    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i).re).sum()
    }
}

fn apply(kraus: &[M], x: &M) -> M {
    kraus.iter().fold(M::zeros(x.n), |acc, t| acc.add(&t.mul(x).mul(&t.adj())))
}

/// Row-echelon rank with partial pivoting.
fn rank(rows: Vec<Vec<C>>, eps: f64) -> usize {
    let mut rows = rows;
    let cols = rows.first().map_or(0, Vec::len);
    let scale = rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).max_by(|&i, &j| rows[i][c].norm().total_cmp(&rows[j][c].norm())) else {
            break;
        };
        if rows[p][c].norm() <= eps * scale {
            continue;
        }
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c] / rows[r][c];
                for k in c..cols {
                    let v = rows[r][k];
                    rows[i][k] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

fn kraus_of(ch: &Channel) -> Vec<M> {
    ch.kraus().iter().map(M::from).collect()
}

fn oracle_index(ch: &Channel) -> usize {
    rank(kraus_of(ch).into_iter().map(|m| m.a).collect(), 1e-10)
}

fn corpus(name: &str) -> Channel {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name);
    load_channel(p, &Tolerance::default()).unwrap()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

const CORPUS: [&str; 9] = [
    "average.json",
    "cond_exp.json",
    "corner.json",
    "depolarizing.json",
    "diag.json",
    "random3.json",
    "strict_pure.json",
    "unitary.json",
    "zero.json",
];

#[test]
fn index_matches_elimination_rank() {
    for name in CORPUS {
        let ch = corpus(name);
        assert_eq!(index_of(&ch, &tol()), oracle_index(&ch), "{name}");
    }
    let mut rng = random::rng(11);
    for s in 1..=5 {
        let ch = random::planted_span(&mut rng, 3, 5, s);
        assert_eq!(oracle_index(&ch), s);
        assert_eq!(index_of(&ch, &tol()), s);
    }
}

#[test]
fn choi_blocks_are_images_of_matrix_units() {
    let ch = corpus("random3.json");
    let k = kraus_of(&ch);
    let j = choi_of(&ch).matrix;
    let n = ch.n();
    for a in 0..n {
        for b in 0..n {
            let mut e = M::zeros(n);
            e.a[a * n + b] = C::new(1.0, 0.0);
            let img = apply(&k, &e);
            for i in 0..n {
                for l in 0..n {
                    assert!((j[(a * n + i, b * n + l)] - img.at(i, l)).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn conditional_expectation_is_partial_trace() {
    let ch = corpus("cond_exp.json");
    let mut rng = random::rng(5);
    let x = random::ginibre(&mut rng, 4, 4);
    let y = ch.apply(&x).unwrap();
    // (tr_2 X)/2 ⊗ I on C^2 ⊗ C^2
    for i in 0..2 {
        for k in 0..2 {
            let red = (x[(2 * i, 2 * k)] + x[(2 * i + 1, 2 * k + 1)]) * 0.5;
            for j in 0..2 {
                for l in 0..2 {
                    let want = if j == l { red } else { C::new(0.0, 0.0) };
                    assert!((y[(2 * i + j, 2 * k + l)] - want).norm() < 1e-14);
                }
            }
        }
    }
    let r = curvature(&ch, &tol(), None).unwrap();
    assert_eq!((r.d, r.k, r.k1), (4.0, 0.0, None));
}

#[test]
fn defect_traces_by_iteration() {
    for name in CORPUS {
        let ch = corpus(name);
        let k = kraus_of(&ch);
        let n = ch.n();
        let mut p = M::eye(n);
        let mut partial = vec![0.0];
        for _ in 0..12 {
            p = apply(&k, &p);
            partial.push(n as f64 - p.trace());
        }
        let s = defect_sequence(&ch, 12, &tol()).unwrap();
        for (a, b) in s.partial.iter().zip(&partial) {
            assert!((a - b).abs() < 1e-12, "{name}");
        }
    }
}

#[test]
fn free_pair_counts_words() {
    // tr(I − Θ^k(I)) counts words shorter than k: 2^k − 1
    let f = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 8).unwrap();
    let s = defect_sequence(&f, 8, &tol()).unwrap();
    for (k, v) in s.partial.iter().enumerate() {
        assert_eq!(*v, (1u64 << k) as f64 - 1.0);
    }
    let r = curvature(&f, &tol(), None).unwrap();
    assert_eq!(r.certificate, Certificate::Exact);
    assert_eq!((r.d, r.k), (2.0, 1.0));
}

#[test]
fn shift_counts_levels() {
    let f = family_channel(&TruncationFamily::TruncatedShift, 64).unwrap();
    let s = defect_sequence(&f, 63, &tol()).unwrap();
    for (k, v) in s.partial.iter().enumerate() {
        assert_eq!(*v, k as f64);
    }
    let r = single_contraction_curvature(&f, 63, &tol()).unwrap();
    assert!((r.k_limit - 1.0).abs() < 1e-9 && (r.k_closed - 1.0).abs() < 1e-9);
}

#[test]
fn frozen_corpus_values() {
    let t = tol();
    // tr(I − tt*) with t = [[0.5, 0.4], [0, 0.3]]
    let sp = curvature(&corpus("strict_pure.json"), &t, None).unwrap();
    assert!((sp.defect_trace - 1.5).abs() < 1e-15);
    assert!(sp.k < 1e-12);
    assert_eq!(sp.k1, Some(sp.k / 1.5));

    assert_eq!(pure_rank(&corpus("diag.json"), &t).unwrap(), 1.0);
    assert_eq!(pure_rank(&corpus("strict_pure.json"), &t).unwrap(), 2.0);
    assert_eq!(pure_rank(&corpus("corner.json"), &t).unwrap(), 0.0);

    let classes: Vec<Purity> = ["strict_pure.json", "unitary.json", "diag.json", "corner.json"]
        .iter()
        .map(|n| purity(&corpus(n), 4096, &t).unwrap().classification)
        .collect();
    assert_eq!(classes, [Purity::Pure, Purity::Full, Purity::Mixed, Purity::Full]);

    let z = curvature(&corpus("zero.json"), &t, None).unwrap();
    assert_eq!((z.d, z.k, z.branch), (0.0, 3.0, Branch::DLt1));
}

#[test]
fn geometric_sequence_sums() {
    // (1 − d)·Σ d^j = 1
    let a: Vec<f64> = (0..64).map(|j| 0.5_f64.powi(j)).collect();
    let r = curvature_from_sequence(&DefectSequence::from_terms(a, 0.5), &tol()).unwrap();
    assert!((r.k - 1.0).abs() < 1e-12);
}

#[test]
fn dilation_dimension_count() {
    let mut rng = random::rng(8);
    for (n, d) in [(2, 1), (2, 2), (3, 2)] {
        let ch = random::strict_row_contraction(&mut rng, n, d);
        // Δ² = I − T̃*T̃ on C^{dn}; a strict contraction leaves it full rank
        let rc = row_contraction_of(&ch, &tol()).unwrap();
        assert_eq!(rc.defect_dim(), d * n);
        let dil = minimal_isometric_dilation(&rc, 4).unwrap();
        let words: usize = (0..4).map(|l| d.pow(l)).sum();
        assert_eq!(dil.k_dim, n + d * n * words);
    }
}

#[test]
fn stinespring_dimensions() {
    for name in ["average.json", "depolarizing.json", "unitary.json", "random3.json"] {
        let ch = corpus(name);
        let d = oracle_index(&ch);
        for r in 1..=2 {
            let sp = build_stinespring(&ch, r, &tol()).unwrap();
            assert_eq!(sp.quotient.quotient_dim, d * ch.n() * r, "{name}");
            assert_eq!(intertwiner_basis(&sp, &tol()).unwrap().len(), d * r * r, "{name}");
        }
    }
}
