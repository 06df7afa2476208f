//! Two checks on the Gibbs sampler: visit frequencies against the enumerated posterior
//! on a four-point data set, and a joint-distribution (Geweke) test.
//!
//! ```bash
//! cargo run --release --example sampler_validation
//! ```

use lnp::mixture::{ClusterValue, NigBase, NigHyper};
use lnp::sampler::{enumerate_posterior, geweke_joint_test, state_frequencies, ChainConfig, Frozen, GibbsState, StateKey};

fn main() -> lnp::Result<()> {
    let base = NigBase {
        shape: 3.0,
        scale: 2.0,
        mean: 0.0,
        tau: 1.0,
        hyper: NigHyper {
            mean_loc: 0.0,
            mean_var: 1.0,
            tau_shape: 6.0,
            tau_rate: 6.0,
        },
    };
    let (s1, s2) = (vec![-0.4, 0.5], vec![0.2, 2.2]);
    let exact = enumerate_posterior(&s1, &s2, 0.4, 0.6, 0.8, &base)?;
    let mut cfg = ChainConfig::new(10, 0, 5, base);
    cfg.frozen = Frozen {
        sigma: true,
        sigma0: true,
        gamma: true,
        base: true,
    };
    let mut st = GibbsState::single_cluster(s1, s2, ClusterValue::new(0.0, 1.0)?)?;
    st.sigma = 0.4;
    st.sigma0 = 0.6;
    st.gamma = 0.8;
    st.m = base.mean;
    st.tau = base.tau;
    let keys: Vec<StateKey> = exact.iter().map(|e| e.0.clone()).collect();
    let f = state_frequencies(st, &cfg, 1000, 200_000, 50, &keys)?;
    let mut ranked = exact.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("{:>10} {:>10} {:>8}", "exact", "sampled", "z");
    for (k, p) in ranked.iter().take(8) {
        let q = f.frequencies.get(k).copied().unwrap_or(0.0);
        println!("{p:>10.5} {q:>10.5} {:>8.2}", (q - p) / f.std_errors[k].max(1e-12));
    }

    let report = geweke_joint_test(&ChainConfig::new(10, 0, 11, base), 3, 3, 5000)?;
    for (s, z) in report.statistics.iter().zip(&report.z) {
        println!("geweke {s:>8}: z = {z:+.2}");
    }
    Ok(())
}
