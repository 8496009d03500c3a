//! Acceptance criteria, one test each. Every test prints a `criterion N:
//! PASS|FAIL` line with the measured values, then asserts.
//!
//! The tests take a shared lock so runtimes are measured one at a time.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};

use scau::bands::{decompose_with, default_scheme};
use scau::connectivity::{
    aggregate, contrast_named, flow, pdc_squared_at, ranked_edges, relative_connectivity, EdgeMap, Level,
    PdcNormalization,
};
use scau::filters::{design, FilterDesign, FilterSpec};
use scau::lassle::{fit_scau_array, LassoConfig};
use scau::mapping::{map_all, BandMapper, MappingConfig};
use scau::oracle::{
    ar2_from_peak, covtable, gen_modulated_network, modulation_covariances, modulated_pair_cross_coefficients,
    multicollinearity_rho, rho_lag1_factored, ModulatedPairParams, ModulationLink, NetworkSpec, MULTICOLLINEARITY_BOUND,
    INTERMEDIATE_BOUND,
};
use scau::pipeline::{scau_flows, var_flows, AnalysisConfig};
use scau::resampling::{bootstrap_mean, BootstrapConfig};
use scau::varfit::{simulate_var, spectral_radius};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, pass: bool, elapsed: Duration, detail: &str) {
    println!(
        "criterion {n}: {} ({detail}; {:.2} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

// Independent oracles -------------------------------------------------------

/// Pole modulus and AR(2) coefficients for a peak at `omega` with bandwidth `tau`.
fn ar2(omega: f64, tau: f64) -> (f64, f64) {
    let r = 1.0 / (1.0 + (-tau).exp());
    (2.0 * r * (2.0 * PI * omega).cos(), -r * r)
}

/// Two AR(2) series driven by innovations with correlation `c`.
fn ar2_pair(a: (f64, f64), b: (f64, f64), c: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn = 20_000;
    let (mut xa, mut xb) = (vec![0.0; n + burn], vec![0.0; n + burn]);
    for t in 2..n + burn {
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        let ea = e1;
        let eb = c * e1 + (1.0 - c * c).max(0.0).sqrt() * e2;
        xa[t] = a.0 * xa[t - 1] + a.1 * xa[t - 2] + ea;
        xb[t] = b.0 * xb[t - 1] + b.1 * xb[t - 2] + eb;
    }
    (xa.split_off(burn), xb.split_off(burn))
}

/// Sample correlation of `x(t)` with `y(t - lag)`.
fn corr_lag(x: &[f64], y: &[f64], lag: usize) -> f64 {
    let a = &x[lag..];
    let b = &y[..y.len() - lag];
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (u, v) in a.iter().zip(b) {
        sab += (u - ma) * (v - mb);
        saa += (u - ma).powi(2);
        sbb += (v - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Amplitude of the `f` Hz component of `x`, assuming an integer number of cycles.
fn lock_in(x: &[f64], f: f64, f_s: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in x.iter().enumerate() {
        let ph = 2.0 * PI * f * t as f64 / f_s;
        re += v * ph.cos();
        im += v * ph.sin();
    }
    2.0 * (re * re + im * im).sqrt() / x.len() as f64
}

fn power_spectrum(x: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf[..x.len() / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
}

/// Midpoint rule for the mean over `[0, 2π]`.
fn mean_over_period(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    let h = 2.0 * PI / points as f64;
    (0..points).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() / points as f64
}

fn covariance_integrals(omega0: f64, kappa: f64) -> [f64; 3] {
    let a = 2.0 * PI * omega0;
    let pts = 1 << 16;
    [
        mean_over_period(|v| (kappa * a * v).cos() * (a * v).cos() * (a * v).cos(), pts),
        mean_over_period(|v| (kappa * a * v).cos() * (a * v).cos() * (a * (v - 1.0)).cos(), pts),
        mean_over_period(
            |v| (kappa * a * (v - 2.0)).cos() * (a * (v - 2.0)).cos() * (a * (v - 1.0)).cos(),
            pts,
        ),
    ]
}

// Criteria -------------------------------------------------------------------

#[test]
fn criterion_01_peak_correlation_corner() {
    let _g = serial();
    let t0 = Instant::now();
    let (p1, p2) = ar2(0.02, 3.0);
    // Identical oscillators with identical innovations: ρ_AB(1) is the lag-1 autocorrelation.
    let oracle = p1 / (1.0 - p2);
    let analytic = multicollinearity_rho(0.02, 3.0).unwrap();
    let (xa, xb) = ar2_pair((p1, p2), (p1, p2), 1.0, 100_000, 11);
    let simulated = corr_lag(&xa, &xb, 1);
    let elapsed = t0.elapsed();
    let pass = (analytic - oracle).abs() < 1e-12
        && (analytic - 0.9910).abs() <= 0.0005
        && analytic > MULTICOLLINEARITY_BOUND
        && (simulated - analytic).abs() <= 0.01
        && elapsed < Duration::from_secs(5);
    verdict(
        1,
        pass,
        elapsed,
        &format!("analytic {analytic:.6} (oracle {oracle:.6}), bound {MULTICOLLINEARITY_BOUND}, simulated {simulated:.5}"),
    );
}

#[test]
fn criterion_02_intermediate_frequency_bound() {
    let _g = serial();
    let t0 = Instant::now();
    let (p1, p2) = ar2(0.1, 20.0);
    let oracle = p1 / (1.0 - p2);
    let analytic = multicollinearity_rho(0.1, 20.0).unwrap();
    let elapsed = t0.elapsed();
    let pass = (analytic - oracle).abs() < 1e-9
        && (analytic - 0.809).abs() <= 0.002
        && analytic <= INTERMEDIATE_BOUND
        && elapsed < Duration::from_secs(5);
    verdict(2, pass, elapsed, &format!("analytic {analytic:.6} (oracle {oracle:.6}), bound {INTERMEDIATE_BOUND}"));
}

#[test]
fn criterion_03_cross_correlation_closed_form_vs_simulation() {
    let _g = serial();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let wa: f64 = rng.random_range(0.01..0.25);
        let wb: f64 = rng.random_range(0.01..0.25);
        let ta: f64 = rng.random_range(2.0..5.0);
        let tb: f64 = rng.random_range(2.0..5.0);
        let c: f64 = rng.random_range(-0.9..0.9);
        let (a, b) = (ar2_from_peak(wa, ta).unwrap(), ar2_from_peak(wb, tb).unwrap());
        let (xa, xb) = ar2_pair(ar2(wa, ta), ar2(wb, tb), c, 100_000, 100 + k);
        let rho0 = corr_lag(&xa, &xb, 0);
        let closed = rho_lag1_factored(&a, &b, rho0);
        let simulated = corr_lag(&xa, &xb, 1);
        worst = worst.max((closed - simulated).abs());
    }
    let elapsed = t0.elapsed();
    let pass = worst <= 0.02 && elapsed < Duration::from_secs(60);
    verdict(3, pass, elapsed, &format!("50 tuples, worst |closed form - simulation| = {worst:.4}"));
}

#[test]
fn criterion_04_modulated_pair_var_cross_terms() {
    let _g = serial();
    let t0 = Instant::now();
    let seeds = 20;
    let rate = |kappa: f64, ok: &dyn Fn(&[f64; 4]) -> bool| -> (f64, f64) {
        let mut pass = 0;
        let mut extreme: f64 = if kappa > 10.0 { 0.0 } else { f64::INFINITY };
        for s in 0..seeds {
            let c = modulated_pair_cross_coefficients(&ModulatedPairParams::new(0.005, kappa).with_seed(s)).unwrap();
            let max = c.iter().cloned().fold(0.0, f64::max);
            extreme = if kappa > 10.0 { extreme.max(max) } else { extreme.min(max) };
            pass += ok(&c) as usize;
        }
        (pass as f64 / seeds as f64, extreme)
    };
    let (rate20, worst20) = rate(20.0, &|c| c.iter().all(|v| *v < 0.05));
    let (rate1, weakest1) = rate(1.0, &|c| c.iter().any(|v| *v > 0.2));
    let elapsed = t0.elapsed();
    let pass = rate20 >= 0.9 && rate1 >= 0.9 && elapsed < Duration::from_secs(60);
    verdict(
        4,
        pass,
        elapsed,
        &format!(
            "kappa=20: {:.0}% of seeds with all |phi_xy| < 0.05 (largest {worst20:.4}); kappa=1: {:.0}% with some |phi_xy| > 0.2 (smallest max {weakest1:.4})",
            100.0 * rate20,
            100.0 * rate1
        ),
    );
}

#[test]
fn criterion_05_covariance_table() {
    let _g = serial();
    let t0 = Instant::now();
    let table = covtable(1.0, 10.0).unwrap();
    // Independent quadrature on a coarser grid to confirm the library's table.
    let grid: Vec<f64> = (0..=90).map(|i| 0.05 + 0.005 * i as f64).collect();
    let peak = |kappa: f64| -> [f64; 3] {
        let mut m = [0.0f64; 3];
        for &w in &grid {
            let c = covariance_integrals(w, kappa);
            for i in 0..3 {
                m[i] = m[i].max(c[i].abs());
            }
        }
        m
    };
    let (p1, p10) = (peak(1.0), peak(10.0));
    let coarse = [0, 1, 2].map(|i| p1[i] / p10[i]);
    let (lo, hi) = (4.14 * 0.9, 5.87 * 1.1);
    let ratios_ok = table.ratios.iter().all(|r| (lo..=hi).contains(r));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut printed_err: f64 = 0.0;
    let mut quad_err: f64 = 0.0;
    for _ in 0..200 {
        let w: f64 = rng.random_range(0.01..0.5);
        let k: f64 = rng.random_range(0.2..20.0);
        if (k - 2.0).abs() < 0.05 {
            continue;
        }
        let lib = modulation_covariances(w, k).unwrap();
        let oracle = covariance_integrals(w, k);
        let printed = lib.printed.expect("off the singular set");
        for i in 0..3 {
            printed_err = printed_err.max((printed[i] - oracle[i]).abs());
            quad_err = quad_err.max((lib.quadrature[i] - oracle[i]).abs());
        }
    }
    let elapsed = t0.elapsed();
    let pass = ratios_ok && printed_err <= 1e-6 && quad_err <= 1e-6 && elapsed < Duration::from_secs(30);
    verdict(
        5,
        pass,
        elapsed,
        &format!(
            "ratios kappa=1/kappa=10 = [{:.3}, {:.3}, {:.3}] (coarse oracle [{:.3}, {:.3}, {:.3}]), accepted [{lo:.3}, {hi:.3}]; printed closed forms max error {printed_err:.3e}; library quadrature max error {quad_err:.1e}",
            table.ratios[0], table.ratios[1], table.ratios[2], coarse[0], coarse[1], coarse[2]
        ),
    );
}

#[test]
fn criterion_06_filters() {
    let _g = serial();
    let t0 = Instant::now();
    let f_s = 200.0;
    let lp = design(&FilterSpec::lowpass(4.0, f_s)).unwrap();
    let bp = design(&FilterSpec::bandpass(8.0, 12.0, f_s)).unwrap();
    assert_eq!((lp.order, lp.stages), (3, 3));
    let measure = |d: &FilterDesign, f: f64| -> f64 {
        let n = 40_000;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * f * t as f64 / f_s).cos()).collect();
        let y = d.filter(&x);
        lock_in(&y[n / 2..], f, f_s)
    };
    let dc = d_c_gain(&lp);
    let atten_db = -20.0 * lp.response(8.0).norm().log10();
    let measured_atten_db = -20.0 * measure(&lp, 8.0).log10();
    let mut worst: f64 = 0.0;
    for f in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0] {
        worst = worst.max((measure(&lp, f) - lp.response(f).norm()).abs());
    }
    for f in [6.0, 8.0, 9.0, 10.0, 11.0, 12.0, 14.0] {
        worst = worst.max((measure(&bp, f) - bp.response(f).norm()).abs());
    }
    let elapsed = t0.elapsed();
    let pass = (dc - 1.0).abs() <= 0.01 && atten_db >= 45.0 && measured_atten_db >= 45.0 && worst <= 1e-3 && elapsed < Duration::from_secs(10);
    verdict(
        6,
        pass,
        elapsed,
        &format!("LPF DC gain {dc:.6}; attenuation at 8 Hz {atten_db:.1} dB (measured {measured_atten_db:.1} dB); worst |measured - closed form| {worst:.2e}"),
    );
}

/// Steady-state response to a constant input.
fn d_c_gain(d: &FilterDesign) -> f64 {
    let y = d.filter(&vec![1.0; 20_000]);
    y[y.len() - 1]
}

#[test]
fn criterion_07_mapping_tone() {
    let _g = serial();
    let t0 = Instant::now();
    let f_s = 200.0;
    let scheme = default_scheme(f_s).unwrap();
    let alpha = scheme.bands[scheme.index_of("alpha").unwrap()].clone();
    let cfg = MappingConfig::new(f_s).with_fi(20.0);
    let mapper = BandMapper::new(&alpha, &cfg).unwrap();
    let n = 60_000;
    let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * 10.0 * t as f64 / f_s).cos()).collect();
    let y = mapper.map(&x);
    let steady = &y[n - 40_000..];
    let spec = power_spectrum(steady);
    let df = f_s / steady.len() as f64;
    let (k_peak, _) = spec.iter().enumerate().fold((0, 0.0), |b, (k, &p)| if p > b.1 { (k, p) } else { b });
    let peak = k_peak as f64 * df;
    let total: f64 = spec.iter().sum();
    let inside: f64 = spec.iter().enumerate().filter(|(k, _)| (16.0..=20.0).contains(&(*k as f64 * df))).map(|(_, p)| p).sum();
    let amplitude = lock_in(steady, 18.0, f_s);
    let elapsed = t0.elapsed();
    let pass = (peak - 18.0).abs() <= 0.2 && (amplitude - 1.0).abs() <= 0.1 && inside / total >= 0.95;
    verdict(
        7,
        pass,
        elapsed,
        &format!("peak {peak:.3} Hz, amplitude ratio {amplitude:.4}, power in [16, 20] Hz {:.2}%", 100.0 * inside / total),
    );
}

#[test]
fn criterion_08_pdc() {
    let _g = serial();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (p, m) = (rng.random_range(1..4), rng.random_range(2..6));
        let mut phi = Array3::from_shape_fn((p, m, m), |_| rng.random_range(-0.5..0.5));
        let rho = spectral_radius(&phi).unwrap();
        if rho >= 0.95 {
            phi.mapv_inplace(|v| v * 0.9 / rho);
        }
        for i in 0..=64 {
            let f = 0.5 * i as f64 / 64.0;
            let sq = pdc_squared_at(&phi, f, PdcNormalization::PerSource);
            for s in 0..m {
                let col: f64 = (0..m).map(|t| sq[[s, t]]).sum();
                worst = worst.max((col - 1.0).abs());
            }
        }
    }
    let labels: Vec<String> = (0..3).map(|i| format!("n{i}")).collect();
    let zero = flow(&Array3::zeros((2, 3, 3)), labels, 0.0, 0.5, 512, PdcNormalization::PerSource).unwrap();
    let self_flow = (0..3).map(|i| (zero.values[[i, i]] - 0.5).abs()).fold(0.0, f64::max);
    let off = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| zero.values[[i, j]].abs()).fold(0.0, f64::max);
    let elapsed = t0.elapsed();
    let pass = worst <= 1e-10 && self_flow <= 1e-6 && off == 0.0;
    verdict(
        8,
        pass,
        elapsed,
        &format!("max |sum of squared PDC per source - 1| = {worst:.1e}; Phi = 0: max |I_ii - 0.5| = {self_flow:.1e}, max off-diagonal {off:.1e}"),
    );
}

/// Sparse system over 12 nodes: `k` distinct off-diagonal entries of ±0.4 at random lags.
fn sparse_truth(nodes: usize, p: usize, k: usize, rng: &mut ChaCha8Rng) -> Array3<f64> {
    loop {
        let mut phi = Array3::zeros((p, nodes, nodes));
        let mut placed = 0;
        while placed < k {
            let (l, t, s) = (rng.random_range(0..p), rng.random_range(0..nodes), rng.random_range(0..nodes));
            if t == s || phi[[l, t, s]] != 0.0 {
                continue;
            }
            phi[[l, t, s]] = if rng.random_bool(0.5) { 0.4 } else { -0.4 };
            placed += 1;
        }
        if spectral_radius(&phi).unwrap() < 0.95 {
            return phi;
        }
    }
}

#[test]
fn criterion_09_lassle_recovery() {
    let _g = serial();
    let t0 = Instant::now();
    let (channels, bands, p, n) = (4, 3, 2, 1000);
    let nodes = channels * bands;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let phi = sparse_truth(nodes, p, 5, &mut rng);
        let data = simulate_var(&phi, &Array2::eye(nodes), n, seed).unwrap();
        let fit = fit_scau_array(
            data.view(),
            (0..channels).map(|c| format!("c{c}")).collect(),
            (0..bands).map(|b| format!("b{b}")).collect(),
            p,
            &LassoConfig::default(),
        )
        .unwrap();
        for ((l, t, s), &truth) in phi.indexed_iter() {
            let sel = fit.support[[l, t, s]];
            let cross = t != s;
            match (truth != 0.0, sel) {
                (true, true) => tp += 1,
                (false, true) if cross => fp += 1,
                (true, false) => fneg += 1,
                _ => {}
            }
        }
    }
    let recall = tp as f64 / (tp + fneg) as f64;
    let precision = tp as f64 / (tp + fp) as f64;
    let elapsed = t0.elapsed();
    let pass = recall >= 0.9 && precision >= 0.8 && elapsed < Duration::from_secs(120);
    verdict(
        9,
        pass,
        elapsed,
        &format!("recall {recall:.3}, precision {precision:.3} over 20 seeds ({tp} true, {fp} false, {fneg} missed cross terms)"),
    );
}

fn network_flows(spec: &NetworkSpec, n: usize, seed: u64, cfg: &AnalysisConfig) -> (EdgeMap, EdgeMap) {
    let net = gen_modulated_network(spec, n, seed).unwrap();
    let comps = decompose_with(&net.frame, &cfg.scheme, &cfg.mapping.filter).unwrap();
    let z = map_all(&comps, &cfg.mapping.clone().with_warmup(600)).unwrap();
    (scau_flows(&z, cfg).unwrap(), var_flows(&net.frame, cfg).unwrap())
}

#[test]
fn criterion_10_end_to_end_discrimination() {
    let _g = serial();
    let t0 = Instant::now();
    let scheme = default_scheme(200.0).unwrap();
    let cfg = AnalysisConfig::new(scheme.clone());
    let (delta, theta) = (scheme.index_of("delta").unwrap(), scheme.index_of("theta").unwrap());
    let idle = NetworkSpec::new(vec!["ch1".into(), "ch2".into()], scheme);
    let linked = idle.clone().with_link(ModulationLink::new((0, delta), (1, theta), 0.8));
    let truth = linked.links[0].edge();
    let tasks = ["A".to_string(), "B".to_string()];
    let (seeds, n) = (20u64, 20_000);
    let mut hits = 0;
    let mut band_resolved_var = false;
    for seed in 0..seeds {
        let base = 1000 * seed;
        let (task_a, var_a) = network_flows(&linked, n, base + 1, &cfg);
        let (rest_a, var_ra) = network_flows(&idle, n, base + 2, &cfg);
        let (task_b, var_b) = network_flows(&idle, n, base + 3, &cfg);
        let (rest_b, var_rb) = network_flows(&idle, n, base + 4, &cfg);
        let scau_net = contrast_named(
            &relative_connectivity(&task_a, &rest_a).unwrap(),
            &relative_connectivity(&task_b, &rest_b).unwrap(),
            tasks.clone(),
        )
        .unwrap();
        assert_eq!(scau_net.level, Level::Fc2fc);
        let top = ranked_edges(&scau_net, false)[0];
        let attributed = top.key.source_band == Some(delta) && top.key.target_band == Some(theta);
        hits += (top.key == truth && attributed) as usize;
        let var_net = contrast_named(
            &relative_connectivity(&var_a, &var_ra).unwrap(),
            &relative_connectivity(&var_b, &var_rb).unwrap(),
            tasks.clone(),
        )
        .unwrap();
        let c2c = aggregate(&var_net, Level::C2c).unwrap();
        band_resolved_var |= c2c.edges.iter().any(|e| e.key.source_band.is_some() || e.key.target_band.is_some());
        println!("  seed {seed}: SCAU top {} -> {} (d = {:.3})", top.source, top.target, top.d);
    }
    let elapsed = t0.elapsed();
    let rate = hits as f64 / seeds as f64;
    let pass = rate >= 0.9 && !band_resolved_var && elapsed < Duration::from_secs(600);
    verdict(
        10,
        pass,
        elapsed,
        &format!("injected delta(ch1) -> theta(ch2) ranked first with correct bands in {hits}/{seeds} seeds; VAR C2C edges carry no band"),
    );
}

#[test]
fn criterion_11_bootstrap_calibration() {
    let _g = serial();
    let t0 = Instant::now();
    let normal = Normal::new(3.0, 2.0).unwrap();
    let trials = 1000;
    let mut covered = 0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(50_000 + trial);
        let x: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
        let cfg = BootstrapConfig {
            replicates: 2000,
            level: 0.95,
            seed: trial,
        };
        covered += bootstrap_mean(&x, &cfg).unwrap().covers(3.0) as usize;
    }
    let coverage = covered as f64 / trials as f64;
    let elapsed = t0.elapsed();
    let pass = (coverage - 0.95).abs() <= 0.03 && elapsed < Duration::from_secs(60);
    verdict(11, pass, elapsed, &format!("coverage {:.1}% over {trials} trials (n = 50, B = 2000)", 100.0 * coverage));
}
