//! Pilot campaigns that pin the thresholds used by the acceptance suite.
//!
//! Run once with `cargo run --release --example pilot`; the result is written
//! to `tests/fixtures/pilot.json`. Thresholds are the pilot estimate shifted by
//! three standard errors of the difference of two independent runs.

use std::time::Instant;

use lsbec::montecarlo::{
    condensate_samples, estimate_gap_probability, run_condensate_campaign, single_path_fraction,
};
use lsbec::seed::derive_seed;
use lsbec::stats::{jackknife_std_error, mean};
use lsbec::thermodynamics::ids_deviation;
use lsbec::{critical_density, GapEventParams, ModelParams};
use serde_json::json;

const SEED: u64 = 42;
const PATHS: u64 = 10;
const PATH_SEQUENCE: [u64; 5] = [1_000, 3_000, 10_000, 30_000, 100_000];
const MARGIN: f64 = 3.0 * std::f64::consts::SQRT_2;

fn main() -> lsbec::Result<()> {
    let clock = Instant::now();
    let rho_c = critical_density(1.0, 1.0)?.rho_c;

    let gap_params = ModelParams::new(1.0, 1.0, 1.0, 1_000_000)?;
    let gap = estimate_gap_probability(&gap_params, &GapEventParams::default(), 10_000, SEED)?;
    eprintln!(
        "gap: {:.4} ± {:.4} ({:.0?})",
        gap.estimate,
        gap.std_error,
        clock.elapsed()
    );

    let super_params = ModelParams::new(1.0, 2.0 * rho_c, 1.0, 100_000)?;
    let campaign = run_condensate_campaign(&super_params, 1, 200, SEED)?;
    let next = campaign.next_level_moment(1);
    eprintln!(
        "next level: {:.3e} ± {:.1e} ({:.0?})",
        next.estimate,
        next.std_error,
        clock.elapsed()
    );

    let sub_params = ModelParams::new(1.0, 0.5 * rho_c, 1.0, 100_000)?;
    let ground: Vec<f64> = condensate_samples(&sub_params, 1, 100, SEED)?
        .iter()
        .map(|s| s.ground)
        .collect();
    let (ground_mean, ground_se) = (mean(&ground), jackknife_std_error(&ground));
    eprintln!(
        "subcritical ground: {ground_mean:.3e} ± {ground_se:.1e} ({:.0?})",
        clock.elapsed()
    );

    let path_params = ModelParams::new(1.0, 2.0 * rho_c, 1.0, 1000)?;
    let mut tail_maxima = Vec::new();
    for i in 0..PATHS {
        let path = single_path_fraction(
            &path_params,
            &PATH_SEQUENCE,
            derive_seed(SEED, "pilot-path", i),
        )?;
        tail_maxima.push(path.tail_max);
    }
    let lowest_tail = tail_maxima.iter().copied().fold(f64::INFINITY, f64::min);
    eprintln!(
        "single paths: lowest tail max {lowest_tail:.3} ({:.0?})",
        clock.elapsed()
    );

    let energies: Vec<f64> = (0..20).map(|k| 0.2 + 4.8 * k as f64 / 19.0).collect();
    let ids_params = ModelParams::new(1.0, 1.0, 1.0, 100_000)?;
    let ids = ids_deviation(&ids_params, &energies, 1000, SEED)?;
    eprintln!(
        "ids: {:.3e} (se {:.1e}) ({:.0?})",
        ids.max_deviation,
        ids.max_std_error,
        clock.elapsed()
    );

    let fixture = json!({
        "master_seed": SEED,
        "margin_in_standard_errors": MARGIN,
        "gap_probability": {
            "n": gap_params.n_particles(),
            "samples": gap.samples,
            "estimate": gap.estimate,
            "std_error": gap.std_error,
            "threshold": gap.estimate - MARGIN * gap.std_error,
        },
        "next_level_fraction": {
            "n": super_params.n_particles(),
            "rho": super_params.rho(),
            "samples": next.samples,
            "estimate": next.estimate,
            "std_error": next.std_error,
            "bound": next.estimate + MARGIN * next.std_error,
        },
        "subcritical_ground_fraction": {
            "n": sub_params.n_particles(),
            "rho": sub_params.rho(),
            "samples": ground.len(),
            "estimate": ground_mean,
            "std_error": ground_se,
            "floor": ground_mean + MARGIN * ground_se,
        },
        "single_path": {
            "rho": path_params.rho(),
            "n_sequence": PATH_SEQUENCE,
            "paths": PATHS,
            "tail_maxima": tail_maxima,
            "bound": 0.5 * lowest_tail,
        },
        "ids_deviation": {
            "n": ids_params.n_particles(),
            "samples": 1000,
            "energies": energies,
            "max_deviation": ids.max_deviation,
            "max_std_error": ids.max_std_error,
            "bound": ids.max_deviation + MARGIN * ids.max_std_error,
        },
    });
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pilot.json");
    let mut text = serde_json::to_string_pretty(&fixture).expect("fixture serializes");
    text.push('\n');
    std::fs::write(path, text).expect("fixture is writable");
    eprintln!("wrote {path} in {:.0?}", clock.elapsed());
    Ok(())
}
