//! Grand-canonical thermodynamics of the ideal Bose gas on a given spectrum.
//!
//! The chemical potential is parametrized internally by its distance to the
//! ground state, `s = E₁ − μ > 0`, and every occupation is evaluated as
//! `B((E_j − E₁) + s)`. Near condensation `s` is many orders of magnitude
//! smaller than `E₁`, and forming `E_j − μ` directly would lose it to
//! cancellation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::point_process::{Configuration, ModelParams};
use crate::quadrature;
use crate::spectrum::{dirichlet_level, enumerate_below, modes_below, Spectrum};

mod assumptions;

pub use assumptions::{
    decay_term, ids_deviation, lifshitz_integral, verify_assumptions, AssumptionReport,
    IdsDeviation, IdsRatioOptions, SequencePoint,
};

/// Fraction of the solver tolerance granted to the truncated spectral tail.
pub const TAIL_BUDGET: f64 = 1e-3;

/// Relative density tolerance used when none is given.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Bose–Einstein factor `(e^{βE} − 1)⁻¹` on `E > 0`, zero elsewhere.
///
/// `expm1` keeps full relative accuracy for tiny `βE`, where the factor
/// behaves like `1/(βE)`.
#[inline]
pub fn bose_factor(e: f64, beta: f64) -> f64 {
    if e > 0.0 {
        1.0 / (beta * e).exp_m1()
    } else {
        0.0
    }
}

/// Infinite-volume integrated density of states, `ν / (e^{νπ/√E} − 1)` for `E > 0`.
#[inline]
pub fn limiting_ids(e: f64, nu: f64) -> f64 {
    if e > 0.0 {
        let u = nu * PI / e.sqrt();
        nu / u.exp_m1()
    } else {
        0.0
    }
}

/// Density of the limiting density-of-states measure in the variable
/// `u = νπ/√E`: `ν e^{-u} / (1 − e^{-u})²`.
#[inline]
fn ids_density_in_u(u: f64, nu: f64) -> f64 {
    let d = (-u).exp_m1();
    nu * (-u).exp() / (d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDensityResult {
    pub rho_c: f64,
    pub abs_error_estimate: f64,
    pub beta: f64,
    pub nu: f64,
}

impl CriticalDensityResult {
    /// Condensate density `ρ − ρ_c` at particle density `rho`.
    pub fn condensate_density(&self, rho: f64) -> f64 {
        rho - self.rho_c
    }
}

/// `ρ_c(β) = ∫ B(E) d𝒩_∞(E)` for the limiting density of states.
///
/// After `u = νπ/√E` the integrand `B((νπ/u)²)·ν e^u/(e^u − 1)²` decays
/// double-exponentially at `u → 0` and like `u² e^{-u}` at infinity. The
/// half-line is covered by dyadic panels `[0,1], [1,2], [2,4], ...`, each
/// integrated adaptively, until a panel adds less than `10⁻²⁰` of the
/// running total.
pub fn critical_density(beta: f64, nu: f64) -> Result<CriticalDensityResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(
            "beta",
            format!("must be finite and > 0, got {beta}"),
        ));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(invalid("nu", format!("must be finite and > 0, got {nu}")));
    }
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let b = bose_factor((nu * PI / u).powi(2), beta);
        if b == 0.0 {
            0.0
        } else {
            b * ids_density_in_u(u, nu)
        }
    };
    const MIN_UPPER: f64 = 64.0;
    const MAX_UPPER: f64 = 1e6;

    // Coarse pass fixes the absolute scale for the accurate pass.
    let mut scale = 0.0;
    let (mut a, mut b) = (0.0, 1.0);
    while b <= 1024.0 {
        scale += match quadrature::integrate(integrand, a, b, 0.0, 1e-6, 200) {
            Ok(e) => e.value,
            Err(Error::Quadrature { partial, .. }) => partial,
            Err(e) => return Err(e),
        };
        a = b;
        b *= 2.0;
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Quadrature {
            partial: scale,
            error_estimate: f64::INFINITY,
        });
    }

    let abs_tol = 1e-14 * scale;
    let (mut total, mut error) = (0.0, 0.0);
    let (mut a, mut b) = (0.0, 1.0);
    loop {
        let panel =
            quadrature::integrate(integrand, a, b, abs_tol, 1e-13, 4000).map_err(|e| match e {
                Error::Quadrature {
                    partial,
                    error_estimate,
                } => Error::Quadrature {
                    partial: total + partial,
                    error_estimate: error + error_estimate,
                },
                other => other,
            })?;
        total += panel.value;
        error += panel.error;
        if b >= MIN_UPPER && panel.value.abs() <= 1e-20 * total {
            break;
        }
        if b >= MAX_UPPER {
            return Err(Error::Quadrature {
                partial: total,
                error_estimate: error,
            });
        }
        a = b;
        b *= 2.0;
    }
    Ok(CriticalDensityResult {
        rho_c: total,
        abs_error_estimate: error,
        beta,
        nu,
    })
}

/// Upper bound on `Σ_{E ≥ cutoff} e^{-β(E − cutoff)}` over all levels at or
/// above `cutoff`.
///
/// Per interval the terms `e^{-βa n²}` (`a = (π/l)²`) past the first mode
/// `n₀` at or above the cutoff shrink by at least
/// `q = e^{-βa(2n₀+1)}` per step, so a geometric series bounds them.
pub fn tail_weight(lengths: &[f64], cutoff: f64, beta: f64) -> f64 {
    lengths
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| {
            let n0 = modes_below(l, cutoff) + 1;
            let first = (-beta * (dirichlet_level(l, n0) - cutoff)).exp();
            let a = (PI / l).powi(2);
            let q = (-beta * a * (2 * n0 + 1) as f64).exp();
            first / (1.0 - q)
        })
        .sum()
}

/// Bound on the number of particles in levels at or above `cutoff` when the
/// chemical potential sits `cutoff − μ` below it.
fn tail_particles(weight: f64, beta: f64, cutoff_minus_mu: f64) -> f64 {
    let x = beta * cutoff_minus_mu;
    weight * (-x).exp() / -(-x).exp_m1()
}

/// Smallest convenient cutoff whose tail holds fewer than `TAIL_BUDGET·tol·L`
/// particles for every `μ < E₁`.
pub fn grand_canonical_cutoff(config: &Configuration, beta: f64, tol: f64) -> f64 {
    let e1 = dirichlet_level(config.max_length(), 1);
    let budget = TAIL_BUDGET * tol * config.window_length();
    let intervals = config.lengths().len() as f64;
    let mut gap = ((intervals / budget).ln() + 10f64.ln()).max(1.0) / beta;
    loop {
        let cutoff = e1 + gap;
        let weight = tail_weight(config.lengths(), cutoff, beta);
        if tail_particles(weight, beta, gap) < budget {
            return cutoff;
        }
        gap *= 1.25;
    }
}

/// Spectrum below [`grand_canonical_cutoff`], ready for [`chemical_potential`].
pub fn grand_canonical_spectrum(config: &Configuration, beta: f64, tol: f64) -> Result<Spectrum> {
    enumerate_below(config, grand_canonical_cutoff(config, beta, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrandCanonicalState {
    /// Chemical potential `μ < E₁`.
    pub mu: f64,
    /// `E₁ − μ`, carried separately because it may be far below the resolution of `μ`.
    pub ground_gap: f64,
    /// Occupation numbers aligned with the spectrum levels.
    pub occupations: Vec<f64>,
    /// Bound on the density held by levels above the cutoff.
    pub tail_mass: f64,
    /// `|(Σ n_j)/L + tail_mass − ρ|`.
    pub residual: f64,
}

struct DensityEquation<'a> {
    offsets: Vec<f64>,
    beta: f64,
    tail_weight: f64,
    cutoff_minus_e1: f64,
    spectrum: &'a Spectrum,
}

impl DensityEquation<'_> {
    fn tail(&self, gap: f64) -> f64 {
        tail_particles(self.tail_weight, self.beta, self.cutoff_minus_e1 + gap)
    }

    /// Total particle number at `μ = E₁ − gap`.
    fn particles(&self, gap: f64) -> f64 {
        let mut sum = 0.0;
        for &d in &self.offsets {
            sum += bose_factor(d + gap, self.beta);
        }
        sum + self.tail(gap)
    }
}

/// Solves `(1/L)[Σ_j B(E_j − μ) + tail(μ)] = ρ` for `μ < E₁` by bracketed bisection.
///
/// The left side is strictly increasing in `μ`, so the root is unique. The
/// bracket is `E₁ − μ ∈ [E₁·10⁻¹⁵ + 10⁻³⁰, 2^m/β]` with `m` grown until the
/// density falls below `ρ`. While the bracket spans more than a factor four
/// the midpoint is geometric, then arithmetic.
pub fn chemical_potential(
    spectrum: &Spectrum,
    params: &ModelParams,
    tol: f64,
) -> Result<GrandCanonicalState> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(invalid("tol", format!("must be finite and > 0, got {tol}")));
    }
    let e1 = spectrum
        .ground_energy()
        .ok_or_else(|| Error::Validation("empty spectrum".into()))?;
    let length = spectrum.window_length();
    if (length - params.window_length()).abs() > 1e-12 * length {
        return Err(Error::Validation(format!(
            "spectrum window {length} does not match parameter window {}",
            params.window_length()
        )));
    }
    let beta = params.beta();
    let rho = params.rho();
    let cutoff = spectrum.cutoff();
    let equation = DensityEquation {
        offsets: spectrum.energies().map(|e| e - e1).collect(),
        beta,
        tail_weight: tail_weight(spectrum.lengths(), cutoff, beta),
        cutoff_minus_e1: cutoff - e1,
        spectrum,
    };
    let budget = TAIL_BUDGET * tol * length;
    if !(equation.tail(0.0) < budget) {
        return Err(Error::Validation(format!(
            "spectrum cutoff {cutoff} leaves a tail bound of {} particles, above the budget {budget}",
            equation.tail(0.0)
        )));
    }

    let target = rho * length;
    let residual_of = |gap: f64| (equation.particles(gap) / length - rho).abs();
    let finish = |gap: f64| {
        let occupations: Vec<f64> = equation
            .offsets
            .iter()
            .map(|&d| bose_factor(d + gap, beta))
            .collect();
        let tail = equation.tail(gap);
        let sum: f64 = occupations.iter().sum::<f64>() + tail;
        GrandCanonicalState {
            mu: e1 - gap,
            ground_gap: gap,
            occupations,
            tail_mass: tail / length,
            residual: (sum / length - rho).abs(),
        }
    };

    let mut lo = e1 * 1e-15 + 1e-30;
    let at_lo = equation.particles(lo);
    if at_lo <= target {
        if (at_lo / length - rho).abs() <= tol {
            return Ok(finish(lo));
        }
        return Err(Error::Infeasible { rho, e1 });
    }
    let mut hi = 1.0 / beta;
    let mut expansions = 0;
    while equation.particles(hi) >= target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1000 {
            return Err(Error::Infeasible { rho, e1 });
        }
    }

    let inner = TAIL_BUDGET * tol;
    let mut best = (residual_of(hi), hi);
    for _ in 0..400 {
        let mid = if hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            break;
        }
        let particles = equation.particles(mid);
        let residual = (particles / length - rho).abs();
        if residual < best.0 {
            best = (residual, mid);
        }
        if residual <= inner {
            break;
        }
        if particles > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let state = finish(best.1);
    if state.residual > tol {
        return Err(Error::Validation(format!(
            "bisection stalled with residual {} above tolerance {tol} (spectrum of {} levels)",
            state.residual,
            equation.spectrum.len()
        )));
    }
    Ok(state)
}

/// Occupation numbers `(e^{β(E_j − μ)} − 1)⁻¹` for `μ` below the ground state.
pub fn occupations(spectrum: &Spectrum, mu: f64, beta: f64) -> Result<Vec<f64>> {
    let e1 = spectrum
        .ground_energy()
        .ok_or_else(|| Error::Validation("empty spectrum".into()))?;
    if !(mu < e1) {
        return Err(Error::Validation(format!(
            "chemical potential {mu} must lie below the ground state energy {e1}"
        )));
    }
    Ok(spectrum
        .energies()
        .map(|e| bose_factor(e - mu, beta))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensateFraction {
    /// `(1/N) Σ_{j ≤ c₂} n_j`, clamped to `[0, 1]`.
    pub fraction: f64,
    /// Unclamped value.
    pub raw: f64,
    /// `n_j / N` for `j ≤ c₂ + 1` (as far as the spectrum reaches).
    pub per_level: Vec<f64>,
}

/// Fraction of the `N` particles held by the lowest `c2` levels.
pub fn condensate_fraction(
    state: &GrandCanonicalState,
    c2: usize,
    n_particles: u64,
) -> Result<CondensateFraction> {
    if c2 == 0 || c2 > state.occupations.len() {
        return Err(invalid(
            "c2",
            format!(
                "must lie in 1..={} (enumerated levels), got {c2}",
                state.occupations.len()
            ),
        ));
    }
    if n_particles == 0 {
        return Err(invalid("n", "particle number must be >= 1"));
    }
    let n = n_particles as f64;
    let raw = state.occupations[..c2].iter().sum::<f64>() / n;
    let per_level = state
        .occupations
        .iter()
        .take(c2 + 1)
        .map(|&x| x / n)
        .collect();
    Ok(CondensateFraction {
        fraction: raw.clamp(0.0, 1.0),
        raw,
        per_level,
    })
}
