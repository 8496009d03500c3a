//! Relative connectivity on a two-channel network with one injected
//! cross-frequency link.

use scau::bands::{decompose_with, default_scheme};
use scau::connectivity::relative_connectivity;
use scau::mapping::map_all;
use scau::oracle::{gen_modulated_network, ModulationLink, NetworkSpec};
use scau::pipeline::{scau_flows, AnalysisConfig};

#[test]
fn injected_link_dominates_relative_connectivity() {
    let scheme = default_scheme(200.0).unwrap();
    let cfg = AnalysisConfig::new(scheme.clone());
    let (delta, theta) = (scheme.index_of("delta").unwrap(), scheme.index_of("theta").unwrap());
    let idle = NetworkSpec::new(vec!["ch1".into(), "ch2".into()], scheme);
    let linked = idle.clone().with_link(ModulationLink::new((0, delta), (1, theta), 0.8));
    let truth = linked.links[0].edge();
    let flows = |spec: &NetworkSpec, seed: u64| {
        let net = gen_modulated_network(spec, 20_000, seed).unwrap();
        let comps = decompose_with(&net.frame, &cfg.scheme, &cfg.mapping.filter).unwrap();
        let z = map_all(&comps, &cfg.mapping.clone().with_warmup(600)).unwrap();
        scau_flows(&z, &cfg).unwrap()
    };
    let mut good = 0;
    for seed in 0..20u64 {
        let c = relative_connectivity(&flows(&linked, 5000 + 2 * seed), &flows(&idle, 5001 + 2 * seed)).unwrap();
        let injected = c.get(&truth).unwrap();
        let (worst_key, worst_null) = c
            .keys
            .iter()
            .zip(&c.values)
            .filter(|(k, _)| **k != truth && !k.is_self_loop())
            .map(|(k, v)| (*k, v.abs()))
            .fold((truth, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        println!("seed {seed}: c = {injected:.4}, largest null |c| = {worst_null:.4} on {worst_key:?}");
        good += (injected > 0.0 && worst_null < injected / 3.0) as usize;
    }
    assert!(good >= 18, "{good}/20 seeds");
}
