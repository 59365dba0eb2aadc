//! Monte Carlo drivers for the gap condition and the condensate.
//!
//! Every sample `i` of a campaign draws from its own generator seeded by
//! `derive_seed(master, label, i)`, where the label names the experiment and
//! the particle number. Samples can therefore run in any order and on any
//! number of threads; results are collected by index and reduced with
//! compensated sums, so a report depends only on its inputs and master seed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::point_process::{
    extend_configuration, sample_configuration, sample_on_window, sample_window_extremes,
    top_two_gap_samples, Configuration, ModelParams,
};
use crate::seed::derive_seed;
use crate::spectrum::{k_smallest, EnergyLevels};
use crate::stats::{bernoulli_std_error, jackknife_std_error, mean};
use crate::thermodynamics::{
    chemical_potential, condensate_fraction, critical_density, grand_canonical_spectrum,
    DEFAULT_RELATIVE_TOLERANCE,
};

/// Constants of the gap event: level index `c₂`, gap scale `c₃` and exponent `η₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEventParams {
    c2: usize,
    c3: f64,
    eta1: f64,
}

impl GapEventParams {
    pub fn new(c2: usize, c3: f64, eta1: f64) -> Result<Self> {
        if c2 == 0 {
            return Err(invalid("c2", "must be >= 1"));
        }
        if !(c3 > 0.0) || !c3.is_finite() {
            return Err(invalid("c3", format!("must be finite and > 0, got {c3}")));
        }
        if !(eta1 > 0.0 && eta1 < 1.0) {
            return Err(invalid(
                "eta1",
                format!("must lie in the open interval (0,1), got {eta1}"),
            ));
        }
        Ok(Self { c2, c3, eta1 })
    }

    pub fn c2(&self) -> usize {
        self.c2
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }
}

impl Default for GapEventParams {
    fn default() -> Self {
        Self {
            c2: 1,
            c3: 1.0,
            eta1: 0.4,
        }
    }
}

/// A Monte Carlo estimate with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub master_seed: u64,
    pub params_echo: Value,
}

fn params_json(params: &ModelParams) -> Value {
    json!({
        "nu": params.nu(),
        "rho": params.rho(),
        "beta": params.beta(),
        "n": params.n_particles(),
        "window_length": params.window_length(),
    })
}

fn stream_label(experiment: &str, params: &ModelParams) -> String {
    format!("{experiment}/N={}", params.n_particles())
}

/// Upper bound on the ground state energy required by the gap event,
/// `[(1 + η₁/4) νπ / ln L]²`.
pub fn ground_energy_bound(params: &ModelParams, eta1: f64) -> f64 {
    ((1.0 + 0.25 * eta1) * params.nu() * PI / params.window_length().ln()).powi(2)
}

/// Whether `E_{c₂+1} − E₁ ≥ c₃ N^{−1+η₁}` and `E₁ ≤ [(1 + η₁/4) νπ / ln L]²`.
pub fn gap_event_holds(levels: &EnergyLevels, params: &ModelParams, gp: &GapEventParams) -> bool {
    if !(params.window_length() > 1.0) {
        return false;
    }
    let n = params.n_particles() as f64;
    let gap_threshold = gp.c3 * n.powf(gp.eta1 - 1.0);
    levels.e_c2_plus_1 - levels.e1 >= gap_threshold
        && levels.e1 <= ground_energy_bound(params, gp.eta1)
}

/// Draws one configuration and evaluates the gap event on it.
///
/// For `c₂ = 1` only the two largest interval lengths matter, so the
/// configuration is never materialized (see
/// [`sample_window_extremes`](crate::point_process::sample_window_extremes)).
pub fn gap_event_sample(params: &ModelParams, gp: &GapEventParams, seed: u64) -> Result<bool> {
    let levels = if gp.c2 == 1 {
        let w = sample_window_extremes(params, seed);
        EnergyLevels::from_top_two(w.largest, w.second)?
    } else {
        let config = sample_configuration(params, seed);
        EnergyLevels::from_spectrum(&k_smallest(&config, gp.c2 + 1)?, gp.c2)?
    };
    Ok(gap_event_holds(&levels, params, gp))
}

/// Fraction of independent configurations in which the gap event holds.
pub fn estimate_gap_probability(
    params: &ModelParams,
    gp: &GapEventParams,
    samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if samples < 100 {
        return Err(invalid(
            "samples",
            format!("need at least 100, got {samples}"),
        ));
    }
    let label = stream_label("gap", params);
    let outcomes: Vec<bool> = (0..samples as u64)
        .into_par_iter()
        .map(|i| gap_event_sample(params, gp, derive_seed(seed, &label, i)))
        .collect::<Result<_>>()?;
    let hits = outcomes.iter().filter(|&&b| b).count();
    let p = hits as f64 / samples as f64;
    let mut echo = params_json(params);
    echo["c2"] = json!(gp.c2);
    echo["c3"] = json!(gp.c3);
    echo["eta1"] = json!(gp.eta1);
    Ok(EstimateReport {
        quantity: "gap_probability".into(),
        estimate: p,
        std_error: bernoulli_std_error(p, samples),
        samples,
        master_seed: seed,
        params_echo: echo,
    })
}

/// Per-configuration condensate observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondensateSample {
    /// `(1/N) Σ_{j ≤ c₂} n_j`, clamped to `[0, 1]`.
    pub fraction: f64,
    /// `n_{c₂+1} / N`.
    pub next_level: f64,
    /// `n_1 / N`.
    pub ground: f64,
}

fn condensate_observables(
    config: &Configuration,
    params: &ModelParams,
    c2: usize,
) -> Result<CondensateSample> {
    let tol = DEFAULT_RELATIVE_TOLERANCE * params.rho();
    let spectrum = grand_canonical_spectrum(config, params.beta(), tol)?;
    let state = chemical_potential(&spectrum, params, tol)?;
    let fraction = condensate_fraction(&state, c2, params.n_particles())?;
    Ok(CondensateSample {
        fraction: fraction.fraction,
        next_level: fraction.per_level.get(c2).copied().unwrap_or(0.0),
        ground: fraction.per_level[0],
    })
}

/// One full pipeline: sample, enumerate, solve for `μ`, read the fractions.
pub fn condensate_sample(params: &ModelParams, c2: usize, seed: u64) -> Result<CondensateSample> {
    condensate_observables(&sample_configuration(params, seed), params, c2)
}

/// Runs [`condensate_sample`] on `samples` independent configurations.
///
/// No condition is placed on `ρ`; below the critical density this is the
/// control experiment without a condensate.
pub fn condensate_samples(
    params: &ModelParams,
    c2: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CondensateSample>> {
    if c2 == 0 {
        return Err(invalid("c2", "must be >= 1"));
    }
    let label = stream_label("condensate", params);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| condensate_sample(params, c2, derive_seed(seed, &label, i)))
        .collect()
}

/// Condensate samples together with the limit they should approach.
#[derive(Debug, Clone, Serialize)]
pub struct CondensateCampaign {
    pub params: ModelParams,
    pub c2: usize,
    pub rho_c: f64,
    /// `(ρ − ρ_c)/ρ`.
    pub target: f64,
    pub master_seed: u64,
    pub samples: Vec<CondensateSample>,
}

impl CondensateCampaign {
    fn report(&self, quantity: String, values: Vec<f64>) -> EstimateReport {
        let mut echo = params_json(&self.params);
        echo["c2"] = json!(self.c2);
        echo["rho_c"] = json!(self.rho_c);
        echo["target"] = json!(self.target);
        EstimateReport {
            quantity,
            estimate: mean(&values),
            std_error: jackknife_std_error(&values),
            samples: values.len(),
            master_seed: self.master_seed,
            params_echo: echo,
        }
    }

    /// `E |(1/N) Σ_{j ≤ c₂} n_j − (ρ − ρ_c)/ρ|^r`.
    pub fn deviation_moment(&self, r: u32) -> EstimateReport {
        let values = self
            .samples
            .iter()
            .map(|s| (s.fraction - self.target).abs().powi(r as i32))
            .collect();
        self.report(format!("fraction_deviation_r{r}"), values)
    }

    /// `E (n_{c₂+1}/N)^r`.
    pub fn next_level_moment(&self, r: u32) -> EstimateReport {
        let values = self
            .samples
            .iter()
            .map(|s| s.next_level.powi(r as i32))
            .collect();
        self.report(format!("next_level_fraction_r{r}"), values)
    }

    /// `E (n_1/N)`.
    pub fn ground_mean(&self) -> EstimateReport {
        let values = self.samples.iter().map(|s| s.ground).collect();
        self.report("ground_fraction".into(), values)
    }
}

/// Samples the condensate above the critical density.
pub fn run_condensate_campaign(
    params: &ModelParams,
    c2: usize,
    samples: usize,
    seed: u64,
) -> Result<CondensateCampaign> {
    if samples < 50 {
        return Err(invalid(
            "samples",
            format!("need at least 50, got {samples}"),
        ));
    }
    let rho_c = critical_density(params.beta(), params.nu())?.rho_c;
    if !(params.rho() > rho_c) {
        return Err(Error::Precondition(format!(
            "density rho = {} does not exceed the critical density rho_c = {rho_c}",
            params.rho()
        )));
    }
    let samples = condensate_samples(params, c2, samples, seed)?;
    Ok(CondensateCampaign {
        params: *params,
        c2,
        rho_c,
        target: (params.rho() - rho_c) / params.rho(),
        master_seed: seed,
        samples,
    })
}

/// Both r-th moments of the condensate experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensateMoments {
    pub deviation: EstimateReport,
    pub next_level: EstimateReport,
}

/// `E|(1/N)Σ_{j≤c₂} n_j − ρ₀/ρ|^r` and `E(n_{c₂+1}/N)^r` with jackknife errors.
pub fn estimate_condensate_moments(
    params: &ModelParams,
    c2: usize,
    r: u32,
    samples: usize,
    seed: u64,
) -> Result<CondensateMoments> {
    if !(r == 1 || r == 2) {
        return Err(invalid("r", format!("must be 1 or 2, got {r}")));
    }
    let campaign = run_condensate_campaign(params, c2, samples, seed)?;
    Ok(CondensateMoments {
        deviation: campaign.deviation_moment(r),
        next_level: campaign.next_level_moment(r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub n_particles: u64,
    pub ground_fraction: f64,
}

/// Ground-state fractions along one impurity realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinglePath {
    pub points: Vec<PathPoint>,
    /// Largest fraction over the second half of the sequence.
    pub tail_max: f64,
}

/// Follows a single realization through growing windows `L = N/ρ`.
///
/// The first window is sampled from `derive_seed(seed, "path", 0)` and each
/// later one extends the previous configuration with sub-seed index `k`.
pub fn single_path_fraction(
    params: &ModelParams,
    n_sequence: &[u64],
    seed: u64,
) -> Result<SinglePath> {
    if n_sequence.is_empty() {
        return Err(invalid("n", "sequence must be nonempty"));
    }
    if n_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n", "sequence must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(n_sequence.len());
    let mut config: Option<Configuration> = None;
    for (k, &n) in n_sequence.iter().enumerate() {
        let p = params.with_n_particles(n)?;
        let next = match &config {
            None => sample_on_window(p.window_length(), p.nu(), derive_seed(seed, "path", 0)),
            Some(c) => {
                extend_configuration(c, p.window_length(), derive_seed(seed, "path", k as u64))?
            }
        };
        let obs = condensate_observables(&next, &p, 1)?;
        points.push(PathPoint {
            n_particles: n,
            ground_fraction: obs.ground,
        });
        config = Some(next);
    }
    let tail_max = points[points.len() / 2..]
        .iter()
        .map(|p| p.ground_fraction)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SinglePath { points, tail_max })
}

/// Settings of [`extreme_value_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremeValueOptions {
    /// `ε` in the largest-length bound `ν⁻¹[ln L − (1+ε) ln ln L]`.
    pub epsilon: f64,
    /// Frequency the largest-length bound must reach.
    pub largest_target: f64,
    /// Upper tail ratio `θ > 1` for the count concentration check; the lower
    /// tail uses `2 − θ`.
    pub theta: f64,
    /// Number of i.i.d. lengths in the top-two gap check.
    pub gap_k: usize,
    /// Survival threshold for the top-two gap; `None` means `1/ν`.
    pub gap_t: Option<f64>,
}

impl Default for ExtremeValueOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            largest_target: 0.99,
            theta: 1.2,
            gap_k: 100,
            gap_t: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeValueReport {
    pub checks: Vec<CheckResult>,
    pub master_seed: u64,
    pub params_echo: Value,
}

impl ExtremeValueReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `e^{−νL(1 − θ + θ ln θ)}`, the Chernoff bound on either count tail.
pub fn chernoff_bound(mean_count: f64, theta: f64) -> f64 {
    (-mean_count * (1.0 - theta + theta * theta.ln())).exp()
}

/// Largest-length frequency, count concentration and top-two gap law at 3 SE.
pub fn extreme_value_suite(
    params: &ModelParams,
    samples: usize,
    seed: u64,
    opts: &ExtremeValueOptions,
) -> Result<ExtremeValueReport> {
    if samples < 1000 {
        return Err(invalid(
            "samples",
            format!("need at least 1000, got {samples}"),
        ));
    }
    if !(opts.theta > 1.0 && opts.theta < 2.0) {
        return Err(invalid(
            "theta",
            format!("must lie in (1, 2), got {}", opts.theta),
        ));
    }
    let nu = params.nu();
    let length = params.window_length();
    let mean_count = nu * length;
    let label = stream_label("extremes", params);
    let draws: Vec<_> = (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_window_extremes(params, derive_seed(seed, &label, i)))
        .collect();
    let freq = |pred: &dyn Fn(usize) -> bool| {
        (0..samples).filter(|&i| pred(i)).count() as f64 / samples as f64
    };

    let ln_l = length.ln();
    let largest_bound = (ln_l - (1.0 + opts.epsilon) * ln_l.ln()) / nu;
    let p_largest = freq(&|i| draws[i].largest >= largest_bound);
    let se_largest = bernoulli_std_error(p_largest, samples);

    let upper = opts.theta;
    let lower = 2.0 - opts.theta;
    let p_upper = freq(&|i| draws[i].count as f64 >= upper * mean_count);
    let p_lower = freq(&|i| draws[i].count as f64 <= lower * mean_count);
    let se_upper = bernoulli_std_error(p_upper, samples);
    let se_lower = bernoulli_std_error(p_lower, samples);
    let bound_upper = chernoff_bound(mean_count, upper);
    let bound_lower = chernoff_bound(mean_count, lower);

    let t = opts.gap_t.unwrap_or(1.0 / nu);
    let gaps = top_two_gap_samples(opts.gap_k, nu, samples, derive_seed(seed, &label, u64::MAX))?;
    let p_gap = gaps.iter().filter(|&&g| g >= t).count() as f64 / samples as f64;
    let se_gap = bernoulli_std_error(p_gap, samples);
    let survival = (-nu * t).exp();

    let checks = vec![
        CheckResult {
            name: "largest_length_bound".into(),
            estimate: p_largest,
            std_error: se_largest,
            reference: opts.largest_target,
            samples,
            passed: p_largest + 3.0 * se_largest >= opts.largest_target,
        },
        CheckResult {
            name: "count_upper_tail".into(),
            estimate: p_upper,
            std_error: se_upper,
            reference: bound_upper,
            samples,
            passed: p_upper <= bound_upper + 3.0 * se_upper,
        },
        CheckResult {
            name: "count_lower_tail".into(),
            estimate: p_lower,
            std_error: se_lower,
            reference: bound_lower,
            samples,
            passed: p_lower <= bound_lower + 3.0 * se_lower,
        },
        CheckResult {
            name: "top_two_gap_survival".into(),
            estimate: p_gap,
            std_error: se_gap,
            reference: survival,
            samples,
            passed: (p_gap - survival).abs() <= 3.0 * se_gap,
        },
    ];
    let mut echo = params_json(params);
    echo["options"] = serde_json::to_value(opts).expect("plain struct serializes");
    Ok(ExtremeValueReport {
        checks,
        master_seed: seed,
        params_echo: echo,
    })
}
