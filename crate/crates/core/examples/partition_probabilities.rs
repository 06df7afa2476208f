//! Partially exchangeable partition probabilities of one small two-sample partition
//! under the nested, latent nested (general and closed forms) priors.
//!
//! ```bash
//! cargo run --release --example partition_probabilities
//! ```

use lnp::crm::CrmSpec;
use lnp::partition::{
    enumerate_two_sample_partitions, peppf_lnp_dirichlet, peppf_lnp_general, peppf_lnp_stable, peppf_nested,
    LnpParams, TwoSamplePartition,
};
use lnp::specialfn::quadrature::QuadratureSpec;

fn main() -> lnp::Result<()> {
    // sample 1: {x1, x2} {x3}; sample 2: {y1}; shared: {x4, y2, y3}
    let part = TwoSamplePartition::new(vec![2, 1], vec![1], vec![(1, 2)])?;
    let quad = QuadratureSpec::default();
    let (sigma, sigma0, gamma) = (0.5, 0.3, 1.0);
    let stable = LnpParams::new(CrmSpec::stable(sigma)?, CrmSpec::stable(sigma0)?, gamma)?;

    println!("partition: {}", serde_json::to_string(&part).unwrap());
    println!("nested             {:.10}", peppf_nested(&stable, &part)?);
    println!("latent (general)   {:.10}", peppf_lnp_general(&stable, &part, &quad)?);
    println!("latent (stable)    {:.10}", peppf_lnp_stable(sigma, sigma0, gamma, &part)?);

    let dp = LnpParams::new(CrmSpec::gamma(1.0)?, CrmSpec::gamma(2.0)?, gamma)?;
    println!("latent DP general  {:.10}", peppf_lnp_general(&dp, &part, &quad)?);
    println!("latent DP closed   {:.10}", peppf_lnp_dirichlet(1.0, 2.0, gamma, &part)?);

    let all = enumerate_two_sample_partitions(3, 3)?;
    let total: f64 = all.iter().map(|p| peppf_lnp_stable(sigma, sigma0, gamma, p)).sum::<lnp::Result<f64>>()?;
    println!("{} partitions of (3, 3), total probability {total:.12}", all.len());
    Ok(())
}
