//! Poisson impurity configurations on the window `(-L/2, L/2)`.
//!
//! A configuration is a sorted set of Dirichlet points together with the
//! lengths of the intervals they cut the window into. Boundary intervals are
//! clipped to the window, so a configuration with `κ` points always has
//! `κ + 1` strictly positive lengths.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Lowest Dirichlet eigenvalue of `-d²/dx²` on an interval of unit length.
pub const GAMMA_1: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Physical parameters of one thermodynamic-limit sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    nu: f64,
    rho: f64,
    beta: f64,
    n_particles: u64,
}

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl ModelParams {
    pub fn new(nu: f64, rho: f64, beta: f64, n_particles: u64) -> Result<Self> {
        let params = Self {
            nu: positive("nu", nu)?,
            rho: positive("rho", rho)?,
            beta: positive("beta", beta)?,
            n_particles,
        };
        if n_particles == 0 {
            return Err(invalid("n", "particle number must be >= 1"));
        }
        Ok(params)
    }

    /// Impurity intensity `ν`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Particle density `ρ = N / L`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Inverse temperature `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_particles(&self) -> u64 {
        self.n_particles
    }

    /// Window length `L = N / ρ`.
    pub fn window_length(&self) -> f64 {
        self.n_particles as f64 / self.rho
    }

    /// Same physics at a different particle number.
    pub fn with_n_particles(&self, n_particles: u64) -> Result<Self> {
        Self::new(self.nu, self.rho, self.beta, n_particles)
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.nu, rho, self.beta, self.n_particles)
    }
}

/// One realization of the impurity points restricted to the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    window_length: f64,
    intensity: f64,
    points: Vec<f64>,
    lengths: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration from explicit points, validating order and support.
    pub fn from_points(window_length: f64, intensity: f64, points: Vec<f64>) -> Result<Self> {
        positive("window_length", window_length)?;
        positive("nu", intensity)?;
        let lengths = interval_lengths(window_length, &points)?;
        Ok(Self {
            window_length,
            intensity,
            points,
            lengths,
        })
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Sorted impurity positions, all strictly inside the window.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Clipped interval lengths, left to right (`count() + 1` entries).
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Number of impurities `κ` inside the window.
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Largest interval length.
    pub fn max_length(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }
}

/// Draws `count` distinct sorted uniforms strictly inside `(lo, hi)`.
///
/// Draws that round onto an endpoint or onto an earlier draw are discarded
/// and replaced, so the output is always strictly increasing.
fn uniform_points<R: Rng>(rng: &mut R, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let width = hi - lo;
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        for _ in points.len()..count {
            let u: f64 = Open01.sample(rng);
            let x = lo + width * u;
            if x > lo && x < hi {
                points.push(x);
            }
        }
        points.sort_unstable_by(f64::total_cmp);
        points.dedup();
    }
    points
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}

/// Samples the impurity points of one realization on the window of `params`.
///
/// The count is drawn from `Poisson(νL)` and the positions as that many
/// i.i.d. uniforms on the window. Deterministic in `(params, seed)`.
pub fn sample_configuration(params: &ModelParams, seed: u64) -> Configuration {
    sample_on_window(params.window_length(), params.nu(), seed)
}

/// [`sample_configuration`] for an explicit window length and intensity.
pub fn sample_on_window(window_length: f64, intensity: f64, seed: u64) -> Configuration {
    let mut rng = rng_from_seed(seed);
    let half = 0.5 * window_length;
    let count = poisson_count(&mut rng, intensity * window_length);
    let points = uniform_points(&mut rng, -half, half, count);
    let lengths = lengths_unchecked(window_length, &points);
    Configuration {
        window_length,
        intensity,
        points,
        lengths,
    }
}

fn lengths_unchecked(window_length: f64, points: &[f64]) -> Vec<f64> {
    let half = 0.5 * window_length;
    let mut lengths = Vec::with_capacity(points.len() + 1);
    let mut left = -half;
    for &x in points {
        lengths.push(x - left);
        left = x;
    }
    lengths.push(half - left);
    lengths
}

/// Clipped interval lengths cut out of `(-L/2, L/2)` by sorted `points`.
///
/// Returns `points.len() + 1` values: the left stub, the consecutive gaps and
/// the right stub. With no points the single interval is the whole window.
pub fn interval_lengths(window_length: f64, points: &[f64]) -> Result<Vec<f64>> {
    let half = 0.5 * window_length;
    if let Some(&x) = points.iter().find(|&&x| !(x > -half && x < half)) {
        return Err(Error::Validation(format!(
            "point {x} lies outside the open window (-{half}, {half})"
        )));
    }
    if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "points not strictly increasing: {} >= {}",
            w[0], w[1]
        )));
    }
    Ok(lengths_unchecked(window_length, points))
}

/// The `k` largest interval lengths in descending order, zero padded.
pub fn largest_lengths(config: &Configuration, k: usize) -> Vec<f64> {
    let mut lengths = config.lengths.clone();
    let take = k.min(lengths.len());
    if take > 0 && take < lengths.len() {
        lengths.select_nth_unstable_by(take - 1, |a, b| b.total_cmp(a));
        lengths.truncate(take);
    }
    lengths.sort_unstable_by(|a, b| b.total_cmp(a));
    lengths.truncate(take);
    lengths.resize(k, 0.0);
    lengths
}

/// Grows the window of `config` to `new_window_length`, keeping every old point.
///
/// New points are drawn only on the two flanking annuli, each from its own
/// sub-seed derived from `seed`, with the intensity of the original
/// configuration. Restricting the result to the old window gives back the
/// input exactly.
pub fn extend_configuration(
    config: &Configuration,
    new_window_length: f64,
    seed: u64,
) -> Result<Configuration> {
    if !(new_window_length > config.window_length) || !new_window_length.is_finite() {
        return Err(invalid(
            "new_window_length",
            format!(
                "must exceed the current window {} (got {new_window_length})",
                config.window_length
            ),
        ));
    }
    let old_half = 0.5 * config.window_length;
    let new_half = 0.5 * new_window_length;
    let width = new_half - old_half;
    let nu = config.intensity;

    let flank = |label: &str, lo: f64, hi: f64| {
        let mut rng = rng_from_seed(derive_seed(seed, label, 0));
        let count = poisson_count(&mut rng, nu * width);
        // The annulus is half-open at the old edge; a draw landing exactly on
        // it is dropped and redrawn by the open-interval sampler.
        uniform_points(&mut rng, lo, hi, count)
    };
    let left = flank("extend-left", -new_half, -old_half);
    let right = flank("extend-right", old_half, new_half);

    let mut points = Vec::with_capacity(left.len() + config.points.len() + right.len());
    points.extend(left);
    points.extend_from_slice(&config.points);
    points.extend(right);
    let lengths = lengths_unchecked(new_window_length, &points);
    Ok(Configuration {
        window_length: new_window_length,
        intensity: nu,
        points,
        lengths,
    })
}

/// Count and the two largest interval lengths of one window realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowExtremes {
    pub count: usize,
    pub largest: f64,
    pub second: f64,
}

/// Samples only the impurity count and the two largest interval lengths.
///
/// Given `κ ~ Poisson(νL)`, the `κ + 1` spacings of `κ` uniform points on the
/// window are distributed as `κ + 1` i.i.d. unit exponentials normalized to
/// sum `L`. Streaming over those exponentials gives the same law as
/// [`sample_configuration`] in O(κ) time and O(1) memory, without sorting.
pub fn sample_window_extremes(params: &ModelParams, seed: u64) -> WindowExtremes {
    let mut rng = rng_from_seed(seed);
    let window_length = params.window_length();
    let count = poisson_count(&mut rng, params.nu() * window_length);
    let (mut first, mut second, mut total) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..=count {
        let x: f64 = Exp1.sample(&mut rng);
        total += x;
        if x > first {
            second = first;
            first = x;
        } else if x > second {
            second = x;
        }
    }
    let scale = window_length / total;
    WindowExtremes {
        count,
        largest: first * scale,
        second: second * scale,
    }
}

/// Gap between the largest and second-largest of `k` i.i.d. `Exp(ν)` lengths,
/// one value per trial.
pub fn top_two_gap_samples(k: usize, nu: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(invalid("k", format!("need at least two lengths, got {k}")));
    }
    positive("nu", nu)?;
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, "top-two-gap", i));
            let (mut first, mut second) = (0.0_f64, 0.0_f64);
            for _ in 0..k {
                let x: f64 = Exp1.sample(&mut rng);
                if x > first {
                    second = first;
                    first = x;
                } else if x > second {
                    second = x;
                }
            }
            (first - second) / nu
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation_names_field() {
        let err = ModelParams::new(1.0, -1.0, 1.0, 10).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "rho", .. }));
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 1).is_err());
        let p = ModelParams::new(1.0, 0.5, 2.0, 10).unwrap();
        assert_eq!(p.window_length(), 20.0);
    }

    #[test]
    fn interval_lengths_examples() {
        assert_eq!(interval_lengths(10.0, &[]).unwrap(), vec![10.0]);
        assert_eq!(
            interval_lengths(10.0, &[-1.0, 2.0]).unwrap(),
            vec![4.0, 3.0, 3.0]
        );
    }

    #[test]
    fn interval_lengths_rejects_bad_input() {
        assert!(interval_lengths(10.0, &[2.0, -1.0]).is_err());
        assert!(interval_lengths(10.0, &[1.0, 1.0]).is_err());
        assert!(interval_lengths(10.0, &[5.0]).is_err());
        assert!(interval_lengths(10.0, &[-5.0]).is_err());
    }

    #[test]
    fn largest_lengths_sorts_and_pads() {
        let c = Configuration::from_points(10.0, 1.0, vec![-1.0, 2.0]).unwrap();
        assert_eq!(largest_lengths(&c, 2), vec![4.0, 3.0]);
        assert_eq!(largest_lengths(&c, 5), vec![4.0, 3.0, 3.0, 0.0, 0.0]);
        assert_eq!(largest_lengths(&c, 1), vec![4.0]);
    }

    #[test]
    fn sampled_points_stay_in_window() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 10).unwrap();
        for seed in 0..500 {
            let c = sample_configuration(&p, seed);
            assert!(c.points().iter().all(|&x| x > -5.0 && x < 5.0));
            assert!(c.points().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(c.lengths().len(), c.count() + 1);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = ModelParams::new(1.3, 1.0, 1.0, 500).unwrap();
        assert_eq!(sample_configuration(&p, 9), sample_configuration(&p, 9));
        assert_ne!(sample_configuration(&p, 9), sample_configuration(&p, 10));
    }

    #[test]
    fn extension_keeps_old_points() {
        let c = sample_on_window(10.0, 1.0, 3);
        let e = extend_configuration(&c, 10.0 + 1e-9, 77).unwrap();
        let restricted: Vec<f64> = e
            .points()
            .iter()
            .copied()
            .filter(|&x| x > -5.0 && x < 5.0)
            .collect();
        assert_eq!(restricted, c.points());
        assert!(extend_configuration(&c, 10.0, 1).is_err());
        assert!(extend_configuration(&c, 5.0, 1).is_err());
    }

    #[test]
    fn top_two_gap_requires_two_lengths() {
        assert!(top_two_gap_samples(1, 1.0, 10, 0).is_err());
        let g = top_two_gap_samples(2, 1.0, 100, 0).unwrap();
        assert!(g.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn window_extremes_without_points() {
        // νL tiny: almost always no impurity, so the whole window is one interval.
        let p = ModelParams::new(1e-9, 1.0, 1.0, 10).unwrap();
        let w = sample_window_extremes(&p, 1);
        assert_eq!(w.count, 0);
        assert!((w.largest - 10.0).abs() < 1e-12);
        assert_eq!(w.second, 0.0);
    }
}
