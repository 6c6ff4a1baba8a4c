//! Curvature on the three branches, plus the normalized curvature.

use cpcurv::channel::family::{family_channel, TruncationFamily};
use cpcurv::invariants::{curvature, curvature_from_sequence, defect_sequence, DefectSequence};
use cpcurv::io::load_channel;
use cpcurv::Tolerance;
use std::path::Path;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();

    // d = 2: the free pair of creation operators
    let free = family_channel(&TruncationFamily::FreeTuple { d: 2, multiplicity: 1 }, 8)?;
    let seq = defect_sequence(&free, 8, &tol)?;
    println!("free pair: tr(I - Θ^k(I)) = {:?}", seq.partial);
    let r = curvature(&free, &tol, None)?;
    println!("free pair: d={} K={:.9} K1={:?} {}", r.d, r.k, r.k1, r.certificate);

    // d = 1: the shift
    let shift = family_channel(&TruncationFamily::TruncatedShift, 64)?;
    let r = curvature(&shift, &tol, None)?;
    println!("shift: d={} K={:.9} {}", r.d, r.k, r.certificate);

    // finite matrices always have K = 0
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let ch = load_channel(corpus.join("random3.json"), &tol)?;
    let r = curvature(&ch, &tol, None)?;
    println!("random3: d={} K={:.9} defect trace={:.6} {}", r.d, r.k, r.defect_trace, r.certificate);

    // d < 1 only happens for synthetic sequences (and the zero map)
    let a: Vec<f64> = (0..64).map(|j| 0.5_f64.powi(j)).collect();
    let r = curvature_from_sequence(&DefectSequence::from_terms(a, 0.5), &tol)?;
    println!("synthetic d=0.5: K={:.12} branch={:?}", r.k, r.branch);
    Ok(())
}
