//! Minimal isometric dilation of a row contraction, truncated at a depth.

use cpcurv::channel::index_of;
use cpcurv::dilation::{
    check_dilation_properties, invofdil_check, minimal_isometric_dilation, row_contraction_of,
};
use cpcurv::random;
use cpcurv::Tolerance;

fn main() -> cpcurv::Result<()> {
    let tol = Tolerance::default();
    let mut rng = random::rng(1);
    let theta = random::strict_row_contraction(&mut rng, 2, 2);

    let rc = row_contraction_of(&theta, &tol)?;
    println!("n={} d={} defect dim={}", rc.n, rc.d, rc.defect_dim());

    let depth = 5;
    let dil = minimal_isometric_dilation(&rc, depth)?;
    println!("K_dim={} (predicted {})", dil.k_dim, rc.dilation_dim(depth));

    let chk = check_dilation_properties(&dil, &theta, depth - 1, &tol)?;
    println!("isometry residual   {:.2e}", chk.isometry_residual);
    println!("extension residual  {:.2e}", chk.extension_residual);
    println!("co-invariance       {:.2e}", chk.co_invariance_residual);
    println!("compression         {:.2e}", chk.compression_residual);
    println!("generated dimension {} of {}", chk.generated_dim, chk.k_dim);
    println!("powers residual     {:.2e} up to n={}", chk.power_residual, chk.nmax);
    println!("index of α = {}", index_of(&dil.alpha.channel, &tol));

    let inv = invofdil_check(&theta, depth, &tol)?;
    println!(
        "K(Θ)={:.9} pure rank(Θ)={} K(α)={:.9} α=Θ: {}",
        inv.k_theta, inv.pure_rank_theta, inv.k_alpha, inv.alpha_is_theta
    );
    Ok(())
}
