#![allow(dead_code)]

use lnp::mixture::{ClusterValue, NigBase, NigHyper};
use lnp::sampler::{ChainConfig, GibbsState};

pub fn base() -> NigBase {
    NigBase {
        shape: 2.0,
        scale: 1.5,
        mean: 0.5,
        tau: 3.0,
        hyper: NigHyper {
            mean_loc: 0.0,
            mean_var: 2.0,
            tau_shape: 3.0,
            tau_rate: 4.0,
        },
    }
}

pub fn config(seed: u64) -> ChainConfig {
    ChainConfig::new(10, 0, seed, base())
}

pub fn value(mean: f64, var: f64) -> ClusterValue {
    ClusterValue::new(mean, var).unwrap()
}

/// A state from explicit blocks `(members of sample 1, members of sample 2, label, value)`.
pub fn state(
    s1: &[f64],
    s2: &[f64],
    blocks: &[(&[usize], &[usize], bool, ClusterValue)],
    homogeneous: bool,
) -> GibbsState {
    let mut a1 = vec![usize::MAX; s1.len()];
    let mut a2 = vec![usize::MAX; s2.len()];
    let mut clusters = Vec::new();
    for (id, (m1, m2, label, v)) in blocks.iter().enumerate() {
        for &j in *m1 {
            a1[j] = id;
        }
        for &j in *m2 {
            a2[j] = id;
        }
        clusters.push((*label, *v));
    }
    let mut st = GibbsState::from_assignments([s1.to_vec(), s2.to_vec()], [a1, a2], clusters, homogeneous).unwrap();
    st.m = 0.5;
    st.tau = 3.0;
    st
}

/// `∫₀¹ w^(a1-1) (1-w)^(a2-1) (γ + w^σ₀ + (1-w)^σ₀)^(-h) dw` by composite Simpson after power substitutions at both ends.
pub fn j_oracle(sigma0: f64, gamma: f64, a1: f64, a2: f64, h: f64) -> f64 {
    let g = |w: f64| (gamma + w.powf(sigma0) + (1.0 - w).powf(sigma0)).powf(-h);
    let half = |a: f64, b: f64, flip: bool| {
        // ∫₀^½ w^(a-1) (1-w)^(b-1) g(w or 1-w) dw with w = u^(1/a)
        let top = 0.5f64.powf(a);
        let f = |u: f64| {
            let w = u.powf(1.0 / a);
            let gw = if flip { g(1.0 - w) } else { g(w) };
            (1.0 - w).powf(b - 1.0) * gw / a
        };
        let n = 20_000;
        let step = top / n as f64;
        let mut s = f(0.0) + f(top);
        for i in 1..n {
            s += f(i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * step / 3.0
    };
    half(a1, a2, false) + half(a2, a1, true)
}

pub fn ln_beta_fn(a: f64, b: f64) -> f64 {
    statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b) - statrs::function::gamma::ln_gamma(a + b)
}
