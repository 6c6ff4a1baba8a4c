//! Property suites over a corpus directory plus seeded random instances.

use serde::Serialize;
use serde_json::Value;
use std::path::Path;

use crate::channel::family::{family_channel, TruncatedChannel, TruncationFamily};
use crate::channel::{
    canonical_kraus, choi_of, conjugate_by_unitary, index_of, validate, Channel, Source,
};
use crate::dilation::{
    check_dilation_properties, invofdil_check, minimal_isometric_dilation, row_contraction_of,
    wold_decomposition, WoldInput,
};
use crate::error::{Error, Result};
use crate::invariants::{
    curvature, defect_sequence, endomorphism_check, purity, saturation_check,
    single_contraction_curvature, Purity, DEFAULT_KMAX,
};
use crate::io::{channel_to_json, matrix_to_raw, parse_channel, Loaded};
use crate::numerics::{distance, identity, psd_sqrt, CMatrix, Tolerance, C64};
use crate::random::{self, TestRng};
use crate::stinespring::{
    build_stinespring, compind_dimension, eqd_ratio, identity_representation, intertwiner_basis,
    left_dimension, scale_equivalence_check,
};

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub instance: String,
    pub detail: String,
    /// Enough to rebuild the instance: a channel file, or a family spec.
    pub replay: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub label: String,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<Failure>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}/{}", self.label, self.passed, self.total)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    /// Corpus file names in the order they were read.
    pub corpus: Vec<String>,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::ok)
    }
}

type Check = std::result::Result<(), String>;

struct Case<T> {
    name: String,
    item: T,
    replay: Option<Value>,
}

fn case(name: impl Into<String>, channel: Channel) -> Case<Channel> {
    let replay = Some(channel_to_json(&channel));
    Case {
        name: name.into(),
        item: channel,
        replay,
    }
}

fn run<T>(label: &str, cases: &[Case<T>], check: impl Fn(&T) -> Check) -> SuiteResult {
    let mut failures = Vec::new();
    for c in cases {
        if let Err(detail) = check(&c.item) {
            failures.push(Failure {
                instance: c.name.clone(),
                detail,
                replay: c.replay.clone(),
            });
        }
    }
    SuiteResult {
        label: label.to_string(),
        passed: cases.len() - failures.len(),
        total: cases.len(),
        failures,
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Family {
    spec: TruncationFamily,
}

fn family_replay(f: &TruncationFamily) -> Option<Value> {
    match f {
        TruncationFamily::FreeTuple { d, multiplicity } => Some(serde_json::json!({
            "family": "free_tuple", "d": d, "multiplicity": multiplicity
        })),
        TruncationFamily::TruncatedShift => Some(serde_json::json!({"family": "truncated_shift"})),
        TruncationFamily::ShiftPlusUnitary { unitary } => Some(serde_json::json!({
            "family": "shift_plus_unitary", "unitary": matrix_to_raw(unitary)
        })),
        TruncationFamily::User { .. } => None,
    }
}

/// Reads every `*.json` file in `dir`, sorted by name. Files that fail to
/// load are returned with their error.
fn read_corpus(dir: &Path, tol: &Tolerance) -> Result<Vec<(String, Result<Loaded>)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, parse_channel(&p, tol))
        })
        .collect())
}

fn sub_rng(seed: u64, suite: u64) -> TestRng {
    random::rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(suite))
}

fn random_channels(rng: &mut TestRng, count: usize, tag: &str) -> Vec<Case<Channel>> {
    (0..count)
        .map(|i| {
            let n = 2 + i % 2;
            let k = 1 + i % 3;
            case(format!("{tag}#{i}"), random::channel(rng, n, k))
        })
        .collect()
}

fn ad(u: &CMatrix) -> Channel {
    Channel::from_kraus(vec![u.clone()]).expect("a unitary is contractive")
}

fn average_with_identity(u: &CMatrix) -> Channel {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Channel::from_kraus(vec![identity(u.nrows()) * h, u * h]).expect("an average is contractive")
}

fn loaded_ok(loaded: &Result<Loaded>, tol: &Tolerance) -> Check {
    match loaded {
        Ok(Loaded::Channel(c)) => {
            let v = validate(c, tol);
            ensure(v.cp && v.contractive, || {
                format!(
                    "cp={} contractive={} lambda_max={:.3e}",
                    v.cp, v.contractive, v.lambda_max
                )
            })
        }
        Ok(Loaded::Family(_)) => Ok(()),
        Err(e) => Err(err(e.clone())),
    }
}

/// Runs every suite. With `corpus = None` only random instances are used.
pub fn verify_suite(corpus: Option<&Path>, tol: &Tolerance, seed: u64) -> Result<VerifyReport> {
    let files = match corpus {
        Some(dir) => read_corpus(dir, tol)?,
        None => Vec::new(),
    };
    let eq = tol.equality_abs;

    let mut channels: Vec<Case<Channel>> = Vec::new();
    let mut families: Vec<Case<Family>> = Vec::new();
    let load_cases: Vec<Case<Result<Loaded>>> = files
        .into_iter()
        .map(|(name, loaded)| {
            match &loaded {
                Ok(Loaded::Channel(c)) => channels.push(case(name.clone(), c.clone())),
                Ok(Loaded::Family(f)) => families.push(Case {
                    name: name.clone(),
                    replay: family_replay(f),
                    item: Family { spec: f.clone() },
                }),
                Err(_) => {}
            }
            Case {
                name,
                item: loaded,
                replay: None,
            }
        })
        .collect();
    let corpus_names = load_cases.iter().map(|c| c.name.clone()).collect();

    let mut suites = Vec::new();
    suites.push(run("Choi PSD and contractivity on load", &load_cases, |l| {
        loaded_ok(l, tol)
    }));

    let mut rng = sub_rng(seed, 1);
    let mut pool = channels.iter().map(|c| case(c.name.clone(), c.item.clone())).collect::<Vec<_>>();
    pool.extend(random_channels(&mut rng, 6, "random"));

    // the zero map keeps a single zero operator
    suites.push(run("Choi round trip and minimal Kraus count", &pool, |c| {
        let j = choi_of(c);
        let back = canonical_kraus(&j, tol).map_err(err)?;
        let gap = distance(&choi_of(&back).matrix, &j.matrix);
        ensure(gap < eq && back.kraus().len() == index_of(c, tol).max(1), || {
            format!("choi gap {gap:.3e}, {} canonical operators", back.kraus().len())
        })
    }));

    let mut rng = sub_rng(seed, 2);
    let planted: Vec<Case<(Channel, usize)>> = (0..100)
        .map(|i| {
            let s = 1 + i % 5;
            let n = ((s as f64).sqrt().ceil() as usize).max(rng_range(&mut rng, 1, 6));
            let k = rng_range(&mut rng, s, 5);
            let ch = random::planted_span(&mut rng, n, k, s);
            Case {
                name: format!("planted#{i}"),
                replay: Some(channel_to_json(&ch)),
                item: (ch, s),
            }
        })
        .collect();
    suites.push(run("index equals dimension of the Kraus span", &planted, |(c, s)| {
        let d = index_of(c, tol);
        ensure(d == *s, || format!("index {d}, planted span {s}"))
    }));

    let mut rng = sub_rng(seed, 3);
    let mut small: Vec<Case<Channel>> = channels
        .iter()
        .filter(|c| c.item.n() <= 3)
        .map(|c| case(c.name.clone(), c.item.clone()))
        .collect();
    small.extend(random_channels(&mut rng, 25, "random"));
    suites.push(run("left dimension independent of the commutant size", &small, |c| {
        let d = index_of(c, tol);
        let mut dims = Vec::new();
        for r in 1..=3 {
            let sp = build_stinespring(c, r, tol).map_err(err)?;
            let cb = intertwiner_basis(&sp, tol).map_err(err)?;
            dims.push(left_dimension(&cb, r).map_err(err)?);
        }
        let corner = compind_dimension(c, tol);
        ensure(dims.iter().all(|&x| x == d) && corner == d, || {
            format!("index {d}, left dimensions {dims:?}, corner dimension {corner}")
        })
    }));

    let mut rng = sub_rng(seed, 4);
    let mut ratio_pool: Vec<Case<Channel>> =
        channels.iter().map(|c| case(c.name.clone(), c.item.clone())).collect();
    ratio_pool.extend(random_channels(&mut rng, 3, "random"));
    let seeds: Vec<u64> = (0..ratio_pool.len() as u64).collect();
    let ratio_cases: Vec<Case<(Channel, u64)>> = ratio_pool
        .into_iter()
        .zip(seeds)
        .map(|(c, s)| Case {
            name: c.name,
            replay: c.replay,
            item: (c.item, s),
        })
        .collect();
    suites.push(run("trace ratio equals the index", &ratio_cases, |(c, s)| {
        let mut rng = sub_rng(seed, 1000 + s);
        let d = index_of(c, tol) as f64;
        let sp = build_stinespring(c, 1, tol).map_err(err)?;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let b = random::positive(&mut rng, c.n());
            worst = worst.max((eqd_ratio(&sp, &b, tol).map_err(err)? - d).abs());
        }
        ensure(worst < 1e-8, || format!("worst |ratio - d| = {worst:.3e}"))
    }));

    suites.push(scale_suite(seed, tol));

    let mut rng = sub_rng(seed, 6);
    let strict: Vec<Case<Channel>> = (0..25)
        .map(|i| {
            let n = 2 + i % 2;
            let d = 1 + (i / 2) % 2;
            case(format!("strict#{i}"), random::strict_row_contraction(&mut rng, n, d))
        })
        .collect();
    suites.push(run("dilation properties on the interior", &strict, |c| {
        let rc = row_contraction_of(c, tol).map_err(err)?;
        let dil = minimal_isometric_dilation(&rc, 6).map_err(err)?;
        let chk = check_dilation_properties(&dil, c, 5, tol).map_err(err)?;
        ensure(chk.passes(tol), || format!("{chk:?}"))
    }));
    suites.push(run("dilation preserves index; pure rank chain", &strict, |c| {
        let r = invofdil_check(c, 6, tol).map_err(err)?;
        let ok = r.index_equal
            && r.purerank_chain_ok
            && r.k_theta.abs() < 1e-8
            && r.pure_rank_theta > 0.0
            && (r.k_alpha - r.pure_rank_theta).abs() < eq
            && !r.alpha_is_theta;
        ensure(ok, || format!("{r:?}"))
    }));

    let fam_members: Vec<Case<TruncatedChannel>> = families
        .iter()
        .filter_map(|f| {
            family_channel(&f.item.spec, 6).ok().map(|tc| Case {
                name: f.name.clone(),
                replay: f.replay.clone(),
                item: tc,
            })
        })
        .collect();
    suites.push(run("purity agrees with the Wold decomposition", &pool, |c| {
        purity_vs_wold(Source::Exact(c), tol)
    }));
    if !fam_members.is_empty() {
        suites.push(run("purity agrees with the Wold decomposition (families)", &fam_members, |tc| {
            purity_vs_wold(Source::Truncated(tc), tol)
        }));
        suites.push(run("family curvature stable across depths", &families, |f| {
            let shallow = family_channel(&f.spec, 6).map_err(err)?;
            let deep = family_channel(&f.spec, 8).map_err(err)?;
            let a = curvature(&shallow, tol, None).map_err(err)?;
            let b = curvature(&deep, tol, None).map_err(err)?;
            ensure(
                a.certificate.converged() && b.certificate.converged() && (a.k - b.k).abs() < 1e-9,
                || format!("K={} ({}) at depth 6, K={} ({}) at depth 8", a.k, a.certificate, b.k, b.certificate),
            )
        }));
        suites.push(run("saturation iff multiplicative at the limit (families)", &fam_members, |tc| {
            let r = saturation_check(tc, tol).map_err(err)?;
            ensure(r.consistent, || format!("{r:?}"))
        }));
    }

    let conj_cases: Vec<Case<(Channel, u64)>> = pool
        .iter()
        .enumerate()
        .map(|(i, c)| Case {
            name: c.name.clone(),
            replay: c.replay.clone(),
            item: (c.item.clone(), i as u64),
        })
        .collect();
    suites.push(run("invariants unchanged by unitary conjugation", &conj_cases, |(c, s)| {
        let mut rng = sub_rng(seed, 2000 + s);
        let base = defect_sequence(c, 10, tol).map_err(err)?;
        let k1 = curvature(c, tol, None).map_err(err)?.k1;
        for _ in 0..20 {
            let u = random::unitary(&mut rng, c.n());
            let v = conjugate_by_unitary(c, &u, tol).map_err(err)?;
            let seq = defect_sequence(&v, 10, tol).map_err(err)?;
            if seq.d != base.d {
                return Err(format!("index {} became {}", base.d, seq.d));
            }
            let gap = base
                .partial
                .iter()
                .zip(&seq.partial)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap >= 1e-9 {
                return Err(format!("partial defect traces moved by {gap:.3e}"));
            }
            let k1v = curvature(&v, tol, None).map_err(err)?.k1;
            if let (Some(a), Some(b)) = (k1, k1v) {
                if (a - b).abs() >= eq {
                    return Err(format!("K1 moved from {a} to {b}"));
                }
            }
        }
        Ok(())
    }));

    suites.push(run("curvature bounds and finite-dimensional vanishing", &pool, |c| {
        let s = defect_sequence(c, DEFAULT_KMAX, tol).map_err(err)?;
        for (j, w) in s.a.windows(2).enumerate() {
            if s.a[j] < -eq || w[1] > s.d * w[0] + eq {
                return Err(format!("defect terms violate the growth bound at {j}"));
            }
        }
        let r = curvature(c, tol, None).map_err(err)?;
        ensure(
            r.k <= r.defect_trace + eq && (r.d < 1.0 || r.k < 1e-8),
            || format!("d={} K={} defect trace {}", r.d, r.k, r.defect_trace),
        )
    }));

    suites.push(run("saturation iff multiplicative at the limit", &pool, |c| {
        let r = saturation_check(c, tol).map_err(err)?;
        ensure(r.consistent, || format!("{r:?}"))
    }));

    let mut rng = sub_rng(seed, 7);
    let automorphisms: Vec<(String, Channel)> = (0..5)
        .map(|i| (format!("unitary#{i}"), ad(&random::unitary(&mut rng, 2 + i % 2))))
        .collect();
    let endo: Vec<Case<(Channel, Vec<CMatrix>)>> = pool
        .iter()
        .map(|c| (c.name.clone(), c.item.clone()))
        .chain(automorphisms)
        .map(|(name, ch)| {
            let probes = (0..3).map(|_| random::positive(&mut rng, ch.n())).collect();
            Case {
                name,
                replay: Some(channel_to_json(&ch)),
                item: (ch, probes),
            }
        })
        .collect();
    suites.push(run("endomorphisms scale the trace by the index", &endo, |(c, probes)| {
        let r = endomorphism_check(c, probes, tol).map_err(err)?;
        ensure(!r.is_endo || (r.trace_scaling_ok && r.k_equals_defect_trace), || {
            format!("{r:?}")
        })
    }));

    let mut rng = sub_rng(seed, 8);
    let contractions: Vec<Case<CMatrix>> = (0..50)
        .map(|i| {
            let n = 2 + i % 3;
            let t = random::mixed_contraction(&mut rng, n, i % (n + 1));
            Case {
                name: format!("contraction#{i}"),
                replay: Channel::from_kraus(vec![t.clone()]).ok().map(|c| channel_to_json(&c)),
                item: t,
            }
        })
        .collect();
    suites.push(run("single contraction closed form", &contractions, |t| {
        let r = single_contraction_curvature(t, DEFAULT_KMAX, tol).map_err(err)?;
        ensure(r.agree && r.k_closed.abs() < 1e-8, || {
            format!("limit {} closed form {}", r.k_limit, r.k_closed)
        })
    }));

    suites.push(run("Stinespring space reproduces the channel", &small, |c| {
        let sp = build_stinespring(c, 1, tol).map_err(err)?;
        let d = index_of(c, tol);
        let residual = sp.dilation_residual();
        let cb = intertwiner_basis(&sp, tol).map_err(err)?;
        let rep = identity_representation(&sp, &cb, tol).map_err(err)?;
        ensure(
            residual < eq && sp.quotient.quotient_dim == d * c.n() && rep.ok,
            || {
                format!(
                    "residual {residual:.3e}, quotient {}, reconstruction {:.3e}",
                    sp.quotient.quotient_dim, rep.reconstruction_residual
                )
            },
        )
    }));

    Ok(VerifyReport {
        seed,
        corpus: corpus_names,
        suites,
    })
}

fn rng_range(rng: &mut TestRng, lo: usize, hi: usize) -> usize {
    use rand::Rng;
    rng.random_range(lo..=hi)
}

fn purity_vs_wold(src: Source<'_>, tol: &Tolerance) -> Check {
    let p = purity(src, DEFAULT_KMAX * 4, tol).map_err(err)?;
    let rc = row_contraction_of(src, tol).map_err(err)?;
    // deepest tower up to 6 that stays small enough for dense storage
    let depth = (2..=6).rev().find(|&k| rc.dilation_dim(k) <= 256).unwrap_or(2);
    let dil = minimal_isometric_dilation(&rc, depth).map_err(err)?;
    let w = wold_decomposition(WoldInput::Dilation(&dil), DEFAULT_KMAX * 4, tol).map_err(err)?;
    let pure = p.classification == Purity::Pure;
    ensure(pure == w.pure, || {
        format!("invariants say {:?}, Wold says pure={}", p.classification, w.pure)
    })
}

fn scale_suite(seed: u64, tol: &Tolerance) -> SuiteResult {
    let mut rng = sub_rng(seed, 5);
    let mut cases: Vec<Case<(Channel, CMatrix, Option<bool>)>> = Vec::new();
    for i in 0..50 {
        let n = 2 + i % 2;
        let (name, ch, x, expect) = match i % 3 {
            0 => {
                let u = random::unitary(&mut rng, n);
                (format!("automorphism#{i}"), ad(&u), random::positive(&mut rng, n), Some(true))
            }
            1 => {
                let u = random::unitary(&mut rng, n);
                (format!("average#{i}"), average_with_identity(&u), identity(n), Some(false))
            }
            _ => {
                let k = 1 + i % 3;
                let ch = random::channel(&mut rng, n, k);
                (format!("random#{i}"), ch, random::positive(&mut rng, n), None)
            }
        };
        cases.push(Case {
            name,
            replay: Some(channel_to_json(&ch)),
            item: (ch, x, expect),
        });
    }
    let hereditary_seed = seed;
    run("scale conditions agree; hereditary on true cases", &cases, |(c, x, expect)| {
        let sp = build_stinespring(c, 1, tol).map_err(err)?;
        let r = scale_equivalence_check(&sp, x, tol).map_err(err)?;
        if !r.equivalent {
            return Err(format!("{r:?}"));
        }
        if let Some(e) = expect {
            if r.cond1 != *e {
                return Err(format!("expected conditions {e}, got {r:?}"));
            }
        }
        if r.cond1 {
            let mut rng = sub_rng(hereditary_seed, 3000 + c.n() as u64);
            let root = psd_sqrt(x, tol).map_err(err)?;
            let contraction = random::scale_to(vec![random::positive(&mut rng, c.n())], 0.9).remove(0);
            let y = &root * contraction * &root;
            let ry = scale_equivalence_check(&sp, &y, tol).map_err(err)?;
            if !(ry.cond1 && ry.cond2 && ry.cond3) {
                return Err(format!("hereditary property fails below x: {ry:?}"));
            }
        }
        Ok(())
    })
}
