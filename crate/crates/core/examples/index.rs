//! The index of a CP map is the dimension of the span of its Kraus operators.

use cpcurv::channel::index_of;
use cpcurv::io::load_channel;
use cpcurv::random;
use cpcurv::stinespring::compind_dimension;
use cpcurv::Tolerance;
use std::path::Path;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");

    for name in ["unitary", "average", "cond_exp", "depolarizing", "zero"] {
        let ch = load_channel(corpus.join(format!("{name}.json")), &tol)?;
        println!(
            "{name:>13}: n={} kraus={} d={} corner={}",
            ch.n(),
            ch.kraus().len(),
            index_of(&ch, &tol),
            compind_dimension(&ch, &tol)
        );
    }

    // five operators that only span three dimensions
    let mut rng = random::rng(0);
    let planted = random::planted_span(&mut rng, 3, 5, 3);
    println!("planted span 3 with 5 operators: d={}", index_of(&planted, &tol));
    Ok(())
}
