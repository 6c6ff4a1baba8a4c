//! Wold decomposition of the shift plus a unitary block.

use cpcurv::channel::family::{family_channel, TruncationFamily};
use cpcurv::dilation::{minimal_isometric_dilation, row_contraction_of, wold_decomposition, WoldInput};
use cpcurv::numerics::{c, CMatrix};
use cpcurv::random;
use cpcurv::Tolerance;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let flip = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let tc = family_channel(&TruncationFamily::ShiftPlusUnitary { unitary: flip }, 8)?;

    let w = wold_decomposition(&tc, 2048, &tol)?;
    println!(
        "induced multiplicity={} rank P_inf={} pure={} {}",
        w.induced_multiplicity, w.p_inf_rank, w.pure, w.split_certificate.certificate
    );
    println!("P_inf diagonal: {:?}", w.p_inf.diagonal().iter().map(|z| z.re.round()).collect::<Vec<_>>());

    // the dilation of a pure map is purely induced
    let mut rng = random::rng(4);
    let theta = random::strict_row_contraction(&mut rng, 2, 1);
    let dil = minimal_isometric_dilation(&row_contraction_of(&theta, &tol)?, 6)?;
    let w = wold_decomposition(WoldInput::Dilation(&dil), 2048, &tol)?;
    println!("dilation of a pure map: pure={} multiplicity={}", w.pure, w.induced_multiplicity);
    Ok(())
}
