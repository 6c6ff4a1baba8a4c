//! Kraus tuples, Choi matrices and the canonical Kraus form.

use cpcurv::channel::{canonical_kraus, choi_of, index_of, validate};
use cpcurv::numerics::{c, distance, identity, CMatrix};
use cpcurv::{Channel, Tolerance};

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let flip = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    // ½(id + ad flip), written with a redundant third operator
    let avg = Channel::from_kraus(vec![identity(2) * h * c(0.6, 0.0), &flip * h, identity(2) * h * c(0.8, 0.0)])?;
    let report = validate(&avg, &tol);
    println!("cp={} contractive={} unital={}", report.cp, report.contractive, report.unital);
    println!("kraus operators: {}, index: {}", avg.kraus().len(), index_of(&avg, &tol));

    let choi = choi_of(&avg);
    let canonical = canonical_kraus(&choi, &tol)?;
    println!("canonical tuple has {} operators", canonical.kraus().len());

    let x = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0)]);
    let gap = distance(&avg.apply(&x)?, &canonical.apply(&x)?);
    println!("same map: |difference| = {gap:.1e}");

    let minimal = avg.minimal(&tol)?;
    println!("minimal tuple independent: {}", minimal.is_independent(&tol));
    Ok(())
}
