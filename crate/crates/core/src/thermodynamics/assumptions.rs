//! Numerical checks of the low-energy hypotheses on the density of states.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::limiting_ids;
use crate::error::{invalid, Result};
use crate::point_process::{sample_configuration, ModelParams};
use crate::quadrature::{self, Estimate};
use crate::seed::derive_seed;
use crate::spectrum::counting_function;
use crate::stats::{jackknife_std_error, mean};

/// Monte Carlo settings for the finite-volume/limiting IDS ratio.
#[derive(Debug, Clone, Serialize)]
pub struct IdsRatioOptions {
    pub samples: usize,
    pub seed: u64,
    /// Energies are placed at `E = (νπ/u)²` for these `u`.
    pub u_grid: Vec<f64>,
}

impl Default for IdsRatioOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 42,
            u_grid: vec![2.0, 3.0, 4.0, 5.0, 6.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequencePoint {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub eta1: f64,
    /// `a_N = N^{1−η₁}·𝒩_∞([(1+η₁/2)νπ/ln L_N]²)` over the particle grid.
    pub decay_sequence: Vec<SequencePoint>,
    pub decay_strictly_decreasing: bool,
    /// `ε⁻¹ 𝒩_∞(ε)` for `ε → 0`.
    pub lifshitz_ratio: Vec<SequencePoint>,
    pub lifshitz_ratio_decreasing: bool,
    /// Upper limit of the `∫₀^ε 𝒩_∞(E) E⁻² dE` check.
    pub integral_upper: f64,
    pub integral: f64,
    pub integral_error: f64,
    /// `E 𝒩_N(E) / 𝒩_∞(E)` estimated at the window of `params`.
    pub ids_ratio: Vec<SequencePoint>,
    /// Largest observed ratio; an empirical candidate for the constant `c₁`.
    pub c1_candidate: f64,
}

/// `N^{1−η₁}·𝒩_∞([(1+η₁/2)νπ/ln L_N]²)` with `L_N = N/ρ`.
pub fn decay_term(eta1: f64, nu: f64, rho: f64, n: u64) -> f64 {
    let ln_l = (n as f64 / rho).ln();
    let e = ((1.0 + 0.5 * eta1) * nu * PI / ln_l).powi(2);
    (n as f64).powf(1.0 - eta1) * limiting_ids(e, nu)
}

/// `∫₀^upper 𝒩_∞(E) E⁻² dE`.
pub fn lifshitz_integral(nu: f64, upper: f64) -> Result<Estimate> {
    let integrand = |e: f64| {
        let n = limiting_ids(e, nu);
        if n == 0.0 {
            0.0
        } else {
            n / (e * e)
        }
    };
    quadrature::integrate(integrand, 0.0, upper, 1e-300, 1e-12, 4000)
}

/// Evaluates the low-energy hypotheses for the limiting IDS at `params`.
pub fn verify_assumptions(
    eta1: f64,
    params: &ModelParams,
    n_grid: &[u64],
    mc: &IdsRatioOptions,
) -> Result<AssumptionReport> {
    if !(eta1 > 0.0 && eta1 < 1.0) {
        return Err(invalid(
            "eta1",
            format!("must lie in the open interval (0,1), got {eta1}"),
        ));
    }
    if n_grid.is_empty() {
        return Err(invalid("n", "grid must be nonempty"));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| n as f64 / params.rho() <= 1.0) {
        return Err(invalid(
            "n",
            format!("window N/ρ must exceed 1, got N = {n}"),
        ));
    }
    if mc.samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    let nu = params.nu();

    let decay_sequence: Vec<SequencePoint> = n_grid
        .iter()
        .map(|&n| SequencePoint {
            x: n as f64,
            value: decay_term(eta1, nu, params.rho(), n),
        })
        .collect();
    let decay_strictly_decreasing = decay_sequence.windows(2).all(|w| w[1].value < w[0].value);

    let lifshitz_ratio: Vec<SequencePoint> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| SequencePoint {
            x: eps,
            value: limiting_ids(eps, nu) / eps,
        })
        .collect();
    let lifshitz_ratio_decreasing = lifshitz_ratio.windows(2).all(|w| w[1].value <= w[0].value);

    let integral_upper = 1.0;
    let integral = lifshitz_integral(nu, integral_upper)?;

    let energies: Vec<f64> = mc.u_grid.iter().map(|&u| (nu * PI / u).powi(2)).collect();
    let per_sample: Vec<Vec<f64>> = (0..mc.samples as u64)
        .into_par_iter()
        .map(|i| {
            let config = sample_configuration(params, derive_seed(mc.seed, "ids-ratio", i));
            energies
                .iter()
                .map(|&e| counting_function(&config, e))
                .collect()
        })
        .collect();
    let ids_ratio: Vec<SequencePoint> = energies
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let column: Vec<f64> = per_sample.iter().map(|row| row[k]).collect();
            SequencePoint {
                x: e,
                value: mean(&column) / limiting_ids(e, nu),
            }
        })
        .collect();
    let c1_candidate = ids_ratio.iter().map(|p| p.value).fold(0.0, f64::max);

    Ok(AssumptionReport {
        eta1,
        decay_sequence,
        decay_strictly_decreasing,
        lifshitz_ratio,
        lifshitz_ratio_decreasing,
        integral_upper,
        integral: integral.value,
        integral_error: integral.error,
        ids_ratio,
        c1_candidate,
    })
}

/// Monte Carlo mean of `𝒩_N(E)` against `𝒩_∞(E)` on an energy grid.
#[derive(Debug, Clone, Serialize)]
pub struct IdsDeviation {
    pub energies: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `max_E |mean(E) − 𝒩_∞(E)|`.
    pub max_deviation: f64,
    pub max_std_error: f64,
}

/// Averages the counting function of `samples` configurations at `params`.
pub fn ids_deviation(
    params: &ModelParams,
    energies: &[f64],
    samples: usize,
    seed: u64,
) -> Result<IdsDeviation> {
    if samples < 2 {
        return Err(invalid(
            "samples",
            format!("need at least 2, got {samples}"),
        ));
    }
    if energies.is_empty() || energies.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(invalid(
            "energies",
            "grid must be nonempty, finite and positive",
        ));
    }
    let label = format!("ids-deviation/N={}", params.n_particles());
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let config = sample_configuration(params, derive_seed(seed, &label, i));
            energies
                .iter()
                .map(|&e| counting_function(&config, e))
                .collect()
        })
        .collect();
    let mut means = Vec::with_capacity(energies.len());
    let mut errors = Vec::with_capacity(energies.len());
    for k in 0..energies.len() {
        let column: Vec<f64> = per_sample.iter().map(|row| row[k]).collect();
        means.push(mean(&column));
        errors.push(jackknife_std_error(&column));
    }
    let max_deviation = energies
        .iter()
        .zip(&means)
        .map(|(&e, &m)| (m - limiting_ids(e, params.nu())).abs())
        .fold(0.0, f64::max);
    let max_std_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(IdsDeviation {
        energies: energies.to_vec(),
        mean: means,
        std_error: errors,
        max_deviation,
        max_std_error,
    })
}
