//! Ideal Bose gas in the Luttinger–Sy random potential.
//!
//! Impurities of a Poisson process with intensity `ν` cut the window
//! `(-L/2, L/2)` into intervals carrying Dirichlet conditions, so the
//! one-particle spectrum is the union of `(π n / l_j)²` over all intervals.
//! This crate samples those configurations, computes exact spectra and the
//! grand-canonical occupation numbers, evaluates the critical density of the
//! limiting density of states, and runs Monte Carlo experiments that track
//! macroscopic occupation of the ground state as `N → ∞` at fixed density.
//!
//! ```
//! use lsbec::{critical_density, ModelParams, sample_configuration};
//! use lsbec::thermodynamics::{chemical_potential, condensate_fraction, grand_canonical_spectrum};
//!
//! let rho_c = critical_density(1.0, 1.0).unwrap().rho_c;
//! let params = ModelParams::new(1.0, 2.0 * rho_c, 1.0, 1_000).unwrap();
//! let config = sample_configuration(&params, 7);
//! let tol = 1e-10 * params.rho();
//! let spectrum = grand_canonical_spectrum(&config, params.beta(), tol).unwrap();
//! let state = chemical_potential(&spectrum, &params, tol).unwrap();
//! let ground = condensate_fraction(&state, 1, params.n_particles()).unwrap();
//! assert!(ground.fraction > 0.0 && ground.fraction <= 1.0);
//! ```
//!
//! The guide in `book/` walks through the model and each experiment; its
//! code listings are compiled and run as doctests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod point_process;
pub mod quadrature;
pub mod seed;
pub mod spectrum;
pub mod stats;
pub mod thermodynamics;

pub use error::{Error, Result};
pub use montecarlo::{EstimateReport, GapEventParams};
pub use point_process::{sample_configuration, Configuration, ModelParams};
pub use spectrum::{counting_function, enumerate_below, k_smallest, EnergyLevels, Spectrum};
pub use thermodynamics::{critical_density, CriticalDensityResult, GrandCanonicalState};

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            pub struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(PointProcess, "point-process.md");
    chapter!(Spectrum, "spectrum.md");
    chapter!(Thermodynamics, "thermodynamics.md");
    chapter!(MonteCarlo, "monte-carlo.md");
    chapter!(CommandLine, "cli.md");
    chapter!(Reproducibility, "reproducibility.md");
}
