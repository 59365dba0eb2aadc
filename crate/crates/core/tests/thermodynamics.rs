use std::f64::consts::PI;

use lsbec::point_process::sample_configuration;
use lsbec::seed::derive_seed;
use lsbec::spectrum::enumerate_below;
use lsbec::thermodynamics::{
    bose_factor, chemical_potential, condensate_fraction, critical_density,
    grand_canonical_spectrum, occupations,
};
use lsbec::ModelParams;
use proptest::prelude::*;
use serde_json::Value;

#[test]
fn bose_factor_matches_extended_precision() {
    let table: Value = serde_json::from_str(include_str!("fixtures/bose_table.json")).unwrap();
    for row in table["rows"].as_array().unwrap() {
        let e = row["energy"].as_f64().unwrap();
        let beta = row["beta"].as_f64().unwrap();
        let exact: f64 = row["value"].as_str().unwrap().parse().unwrap();
        let got = bose_factor(e, beta);
        let rel = if exact == 0.0 {
            got.abs()
        } else {
            (got / exact - 1.0).abs()
        };
        assert!(rel <= 1e-12, "B({e}, {beta}) = {got}, expected {exact}");
    }
}

#[test]
fn bose_factor_small_argument_branch() {
    let x = 1e-12;
    assert!((bose_factor(x, 1.0) * x - 1.0).abs() < 1e-6);
    assert_eq!(bose_factor(-1.0, 1.0), 0.0);
}

/// Midpoint Riemann–Stieltjes sum of `∫ B dN∞` in `k = √E`.
fn riemann_oracle(beta: f64, nu: f64, nodes: usize) -> f64 {
    let k_max = (60.0 / beta).sqrt();
    let h = k_max / nodes as f64;
    let ids = |k: f64| {
        if k == 0.0 {
            0.0
        } else {
            nu / (nu * PI / k).exp_m1()
        }
    };
    let mut sum = 0.0;
    for i in 0..nodes {
        let mid = (i as f64 + 0.5) * h;
        sum += (ids((i + 1) as f64 * h) - ids(i as f64 * h)) / (beta * mid * mid).exp_m1();
    }
    sum
}

#[test]
fn critical_density_matches_riemann_sum() {
    let q = critical_density(1.0, 1.0).unwrap().rho_c;
    let oracle = riemann_oracle(1.0, 1.0, 1_000_000);
    assert!((q / oracle - 1.0).abs() < 1e-6, "{q} vs {oracle}");
}

#[test]
fn critical_density_reference_values() {
    // Adaptive quadrature of the same integral in an independent package.
    let reference = [
        (0.5, [0.860163, 0.277033, 0.0575314]),
        (1.0, [0.358482, 0.0962105, 0.0139667]),
        (2.0, [0.138517, 0.0287657, 0.00254755]),
    ];
    for (beta, values) in reference {
        for (nu, expected) in [0.5, 1.0, 2.0].into_iter().zip(values) {
            let got = critical_density(beta, nu).unwrap().rho_c;
            assert!(
                (got / expected - 1.0).abs() < 1e-5,
                "beta={beta} nu={nu}: {got}"
            );
        }
    }
}

#[test]
fn critical_density_is_finite_across_temperatures() {
    let values: Vec<f64> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&b| critical_density(b, 1.0).unwrap().rho_c)
        .collect();
    assert!(values.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

fn supercritical(n: u64) -> ModelParams {
    let rho_c = critical_density(1.0, 1.0).unwrap().rho_c;
    ModelParams::new(1.0, 2.0 * rho_c, 1.0, n).unwrap()
}

fn truncated_density(spectrum: &lsbec::Spectrum, mu: f64, beta: f64) -> f64 {
    occupations(spectrum, mu, beta).unwrap().iter().sum::<f64>() / spectrum.window_length()
}

#[test]
fn density_is_monotone_and_brackets_the_target() {
    let params = supercritical(1000);
    let config = sample_configuration(&params, 31);
    let spectrum = grand_canonical_spectrum(&config, 1.0, 1e-10 * params.rho()).unwrap();
    let e1 = spectrum.ground_energy().unwrap();
    let far = truncated_density(&spectrum, e1 - 1e6, 1.0);
    assert!(far < 1e-6 * params.rho());
    let near = truncated_density(&spectrum, e1 - 1e-12, 1.0);
    assert!(near > params.rho());
    let grid: Vec<f64> = (0..60)
        .map(|i| truncated_density(&spectrum, e1 - 10f64.powf(2.0 - 0.2 * i as f64), 1.0))
        .collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn doubling_the_cutoff_barely_moves_the_solution() {
    for (i, n) in [(0u64, 2_000u64), (1, 5_000), (2, 10_000)] {
        let params = supercritical(n);
        let tol = 1e-10 * params.rho();
        let config = sample_configuration(&params, derive_seed(32, "cutoff", i));
        let spectrum = grand_canonical_spectrum(&config, 1.0, tol).unwrap();
        let state = chemical_potential(&spectrum, &params, tol).unwrap();
        let wider = enumerate_below(&config, 2.0 * spectrum.cutoff()).unwrap();
        let f_narrow = truncated_density(&spectrum, state.mu, 1.0);
        let f_wide = truncated_density(&wider, state.mu, 1.0);
        assert!(
            (f_wide - f_narrow).abs() < 1e-3 * tol,
            "N={n}: shift {}",
            f_wide - f_narrow
        );
        let resolved = chemical_potential(&wider, &params, tol).unwrap();
        let limit = 10.0 * tol / (params.beta() * params.rho() * params.window_length());
        assert!(
            (resolved.mu - state.mu).abs() < limit,
            "N={n}: mu moved by {}",
            resolved.mu - state.mu
        );
    }
}

#[test]
fn occupations_match_per_level_recomputation() {
    let params = supercritical(3000);
    let tol = 1e-10 * params.rho();
    let config = sample_configuration(&params, 33);
    let spectrum = grand_canonical_spectrum(&config, 1.0, tol).unwrap();
    let state = chemical_potential(&spectrum, &params, tol).unwrap();
    let direct: f64 = spectrum
        .energies()
        .map(|e| 1.0 / (e - state.mu).exp_m1())
        .sum();
    let summed: f64 = state.occupations.iter().sum();
    assert!((summed / direct - 1.0).abs() < 1e-14);
    let all = condensate_fraction(&state, state.occupations.len(), params.n_particles()).unwrap();
    assert!((all.raw - 1.0).abs() < 1e-9, "{}", all.raw);
}

#[test]
fn single_level_holds_every_particle() {
    let spectrum = lsbec::Spectrum::from_energies(vec![1.0], 1.0).unwrap();
    let params = ModelParams::new(1.0, 1.0, 1.0, 1).unwrap();
    let state = chemical_potential(&spectrum, &params, 1e-12).unwrap();
    assert!((state.mu - (1.0 - 2f64.ln())).abs() < 1e-12);
    let fraction = condensate_fraction(&state, 1, 1).unwrap();
    assert!((fraction.fraction - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_postconditions(seed in any::<u64>(), n in 50u64..800, rho in 0.02..0.5f64, beta in 0.5..3.0f64) {
        let params = ModelParams::new(1.0, rho, beta, n).unwrap();
        let tol = 1e-10 * rho;
        let config = sample_configuration(&params, seed);
        let spectrum = grand_canonical_spectrum(&config, beta, tol).unwrap();
        let state = chemical_potential(&spectrum, &params, tol).unwrap();
        prop_assert!(state.residual <= tol);
        prop_assert!(state.mu < spectrum.ground_energy().unwrap());
        prop_assert!(state.occupations.windows(2).all(|w| w[0] >= w[1]));
    }
}
