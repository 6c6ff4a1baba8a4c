//! The Stinespring space of a channel and its intertwiner correspondence.

use cpcurv::io::load_channel;
use cpcurv::numerics::identity;
use cpcurv::random;
use cpcurv::stinespring::{
    build_stinespring, eqd_ratio, identity_representation, intertwiner_basis, left_dimension,
    scale_equivalence_check,
};
use cpcurv::{Channel, Tolerance};
use std::path::Path;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let ch = load_channel(corpus.join("average.json"), &tol)?;

    for r in 1..=3 {
        let sp = build_stinespring(&ch, r, &tol)?;
        let cb = intertwiner_basis(&sp, &tol)?;
        println!(
            "r={r}: quotient dim={} intertwiners={} left dimension={} residual={:.1e}",
            sp.quotient.quotient_dim,
            cb.len(),
            left_dimension(&cb, r)?,
            sp.dilation_residual()
        );
    }

    let sp = build_stinespring(&ch, 1, &tol)?;
    let cb = intertwiner_basis(&sp, &tol)?;
    let rep = identity_representation(&sp, &cb, &tol)?;
    println!("canonical tuple of {} rebuilds Θ to {:.1e}", rep.tuple_len, rep.reconstruction_residual);

    let mut rng = random::rng(2);
    let b = random::positive(&mut rng, 2);
    println!("trace ratio at a random b: {:.12}", eqd_ratio(&sp, &b, &tol)?);

    // the three scale conditions at x = I: false for an average, true for ad(u)
    let s = scale_equivalence_check(&sp, &identity(2), &tol)?;
    println!("average: {} {} {}", s.cond1, s.cond2, s.cond3);
    let u = Channel::from_kraus(vec![random::unitary(&mut rng, 2)])?;
    let s = scale_equivalence_check(&build_stinespring(&u, 1, &tol)?, &identity(2), &tol)?;
    println!("ad(u):   {} {} {}", s.cond1, s.cond2, s.cond3);
    Ok(())
}
