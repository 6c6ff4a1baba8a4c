//! Pure, full and mixed maps, pure rank, and the saturation test.

use cpcurv::invariants::{purity, pure_rank, saturation_check, single_contraction_curvature};
use cpcurv::io::load_channel;
use cpcurv::numerics::{c, direct_sum, CMatrix};
use cpcurv::Tolerance;
use std::path::Path;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");

    for name in ["strict_pure", "unitary", "diag", "corner"] {
        let ch = load_channel(corpus.join(format!("{name}.json")), &tol)?;
        let p = purity(&ch, 4096, &tol)?;
        let s = saturation_check(&ch, &tol)?;
        println!(
            "{name:>11}: {:?} pure rank={} saturated={} multiplicative at c_inf={}",
            p.classification,
            pure_rank(&ch, &tol)?,
            s.saturated,
            s.multiplicative_at_c_inf
        );
    }

    // one contraction: rotation ⊕ 0.5
    let rot = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(-0.8, 0.0), c(0.8, 0.0), c(0.6, 0.0)]);
    let t = direct_sum(&rot, &CMatrix::from_element(1, 1, c(0.5, 0.0)));
    let r = single_contraction_curvature(&t, 512, &tol)?;
    println!("rotation ⊕ 0.5: limit={:.9} closed form={:.9} agree={}", r.k_limit, r.k_closed, r.agree);
    Ok(())
}
