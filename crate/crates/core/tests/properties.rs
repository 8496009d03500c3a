//! Structural properties of filters, flows, contrasts and intervals.

use ndarray::Array3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scau::connectivity::{aggregate, contrast, flow, relative_connectivity, EdgeKey, EdgeMap, Level, ModelKind, PdcNormalization};
use scau::filters::{design, FilterSpec};
use scau::resampling::{bootstrap_mean, BootstrapConfig};
use scau::varfit::spectral_radius;

fn stable_phi(p: usize, m: usize, seed: u64) -> Array3<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = Array3::from_shape_fn((p, m, m), |_| rng.random_range(-0.6..0.6));
    let rho = spectral_radius(&phi).unwrap();
    if rho >= 0.9 {
        phi.mapv_inplace(|v| v * 0.9 / rho);
    }
    phi
}

fn edge_map(values: Vec<f64>) -> EdgeMap {
    let (channels, bands) = (2, 2);
    let k = channels * bands;
    let keys = (0..k * k).map(|i| EdgeKey::full(i / k / bands, i / k % bands, i % k / bands, i % k % bands)).collect();
    EdgeMap {
        model: ModelKind::Scau,
        level: Level::Fc2fc,
        channels: vec!["F1".into(), "P7".into()],
        bands: vec!["delta".into(), "theta".into()],
        keys,
        values,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn designs_are_stable_with_unit_passband(f_c in 0.5f64..40.0, lo in 1.0f64..60.0, width in 0.5f64..20.0, order in 1usize..6) {
        let f_s = 200.0;
        let lp = design(&FilterSpec::lowpass(f_c, f_s).with_order(order)).unwrap();
        prop_assert!(lp.max_pole_modulus() < 1.0);
        prop_assert_eq!(lp.a.len(), order);
        prop_assert!((lp.response(0.0).norm() - 1.0).abs() < 1e-6);
        let hi = (lo + width).min(99.0);
        prop_assume!(hi > lo);
        let bp = design(&FilterSpec::bandpass(lo, hi, f_s).with_order(order)).unwrap();
        prop_assert!(bp.max_pole_modulus() < 1.0);
        prop_assert_eq!(bp.a.len(), 2 * order);
    }

    #[test]
    fn full_range_flow_out_of_each_source_is_one_half(seed in 0u64..10_000, p in 1usize..4, m in 2usize..6) {
        let phi = stable_phi(p, m, seed);
        let nodes = (0..m).map(|i| format!("n{i}")).collect();
        let f = flow(&phi, nodes, 0.0, 0.5, 512, PdcNormalization::PerSource).unwrap();
        for s in 0..m {
            let total: f64 = (0..m).map(|t| f.values[[s, t]]).sum();
            prop_assert!((total - 0.5).abs() < 1e-6);
            prop_assert!((0..m).all(|t| f.values[[s, t]] >= 0.0 && f.values[[s, t]].is_finite()));
        }
    }

    #[test]
    fn contrast_is_symmetric_nonnegative_and_baseline_free(
        task_a in prop::collection::vec(0.0f64..0.1, 16),
        rest_a in prop::collection::vec(0.0f64..0.1, 16),
        task_b in prop::collection::vec(0.0f64..0.1, 16),
        rest_b in prop::collection::vec(0.0f64..0.1, 16),
        base in -0.05f64..0.05,
    ) {
        let c = |t: &[f64], r: &[f64], shift: f64| {
            relative_connectivity(
                &edge_map(t.iter().map(|v| v + shift).collect()),
                &edge_map(r.iter().map(|v| v + shift).collect()),
            )
            .unwrap()
        };
        let ab = contrast(&c(&task_a, &rest_a, 0.0), &c(&task_b, &rest_b, 0.0)).unwrap();
        let ba = contrast(&c(&task_b, &rest_b, 0.0), &c(&task_a, &rest_a, 0.0)).unwrap();
        let shifted = contrast(&c(&task_a, &rest_a, base), &c(&task_b, &rest_b, base)).unwrap();
        for ((x, y), z) in ab.edges.iter().zip(&ba.edges).zip(&shifted.edges) {
            prop_assert!(x.d >= 0.0);
            prop_assert!((x.d - y.d).abs() < 1e-12);
            prop_assert!((x.d - z.d).abs() < 1e-9);
            prop_assert!((x.d - 100.0 * (x.c_a - x.c_b).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_contrast_survives_every_aggregation(d in 0.0f64..50.0) {
        let zero = edge_map(vec![0.0; 16]);
        let shifted = edge_map(vec![d / 100.0; 16]);
        let net = contrast(&relative_connectivity(&shifted, &zero).unwrap(), &relative_connectivity(&zero, &zero).unwrap()).unwrap();
        for level in [Level::Fc2c, Level::F2c, Level::C2f, Level::C2c] {
            let agg = aggregate(&net, level).unwrap();
            prop_assert!(agg.edges.iter().all(|e| (e.d - d).abs() < 1e-9));
        }
    }

    #[test]
    fn interval_brackets_the_mean(seed in 0u64..10_000, n in 5usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s = bootstrap_mean(&x, &BootstrapConfig { replicates: 1000, level: 0.95, seed }).unwrap();
        prop_assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
        prop_assert!((s.mean - x.iter().sum::<f64>() / n as f64).abs() < 1e-12);
    }
}
