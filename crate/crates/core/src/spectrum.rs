//! Exact eigenvalues of the Dirichlet Laplacian on a union of intervals.
//!
//! Interval `j` of length `l_j` contributes the levels `(π n / l_j)²`,
//! `n = 1, 2, ...`. Levels are ordered by `(energy, interval, mode)` so that
//! exact ties between equal intervals come out in a fixed order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::point_process::Configuration;

/// `(π n / l)²`, the `n`-th Dirichlet level of an interval of length `l`.
///
/// Every routine in the crate evaluates levels through this function, so
/// enumeration and counting agree bit for bit.
#[inline]
pub fn dirichlet_level(length: f64, mode: u64) -> f64 {
    let k = PI * mode as f64 / length;
    k * k
}

/// Number of modes `n ≥ 1` with `dirichlet_level(length, n) < energy`.
#[inline]
pub fn modes_below(length: f64, energy: f64) -> u64 {
    if !(energy > 0.0) || !(length > 0.0) {
        return 0;
    }
    // Closed form ceil(l√E/π) - 1, then corrected against the level formula
    // itself so that strictness survives rounding.
    let guess = (length * energy.sqrt() / PI).ceil() - 1.0;
    let mut n = if guess > 0.0 { guess as u64 } else { 0 };
    while n > 0 && dirichlet_level(length, n) >= energy {
        n -= 1;
    }
    while dirichlet_level(length, n + 1) < energy {
        n += 1;
    }
    n
}

/// One eigenvalue with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub interval: usize,
    pub mode: u64,
}

impl Level {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.interval.cmp(&other.interval))
            .then(self.mode.cmp(&other.mode))
    }
}

impl Eq for Level {}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ascending eigenvalues, complete strictly below `cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    levels: Vec<Level>,
    cutoff: f64,
    lengths: Vec<f64>,
    window_length: f64,
}

impl Spectrum {
    /// A complete spectrum made of the given levels only, e.g. for toy models.
    ///
    /// Level `i` is attributed to interval `i`, mode 1, and the cutoff is
    /// infinite: no other level exists.
    pub fn from_energies(mut energies: Vec<f64>, window_length: f64) -> Result<Self> {
        if !(window_length > 0.0) || !window_length.is_finite() {
            return Err(invalid(
                "window_length",
                format!("must be finite and > 0, got {window_length}"),
            ));
        }
        if energies.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::Validation("energies must be finite and > 0".into()));
        }
        energies.sort_unstable_by(f64::total_cmp);
        let levels = energies
            .into_iter()
            .enumerate()
            .map(|(interval, energy)| Level {
                energy,
                interval,
                mode: 1,
            })
            .collect();
        Ok(Self {
            levels,
            cutoff: f64::INFINITY,
            lengths: Vec::new(),
            window_length,
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Every eigenvalue `< cutoff` is present.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Interval lengths the levels were generated from.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l.energy)
    }

    /// Ground state energy, if any level was enumerated.
    pub fn ground_energy(&self) -> Option<f64> {
        self.levels.first().map(|l| l.energy)
    }
}

/// The ground, second and `(c₂+1)`-th eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevels {
    pub e1: f64,
    pub e2: f64,
    pub e_c2_plus_1: f64,
}

impl EnergyLevels {
    pub fn new(e1: f64, e2: f64, e_c2_plus_1: f64) -> Result<Self> {
        if !(e1 > 0.0 && e1 <= e2 && e2 <= e_c2_plus_1) {
            return Err(Error::Validation(format!(
                "energy levels must satisfy 0 < e1 <= e2 <= e_c2+1, got {e1}, {e2}, {e_c2_plus_1}"
            )));
        }
        Ok(Self {
            e1,
            e2,
            e_c2_plus_1,
        })
    }

    /// Reads the levels off a spectrum holding at least `c2 + 1` entries.
    pub fn from_spectrum(spectrum: &Spectrum, c2: usize) -> Result<Self> {
        if c2 == 0 {
            return Err(invalid("c2", "must be >= 1"));
        }
        let levels = spectrum.levels();
        if levels.len() < c2 + 1 {
            return Err(Error::Validation(format!(
                "spectrum holds {} levels, need {}",
                levels.len(),
                c2 + 1
            )));
        }
        Self::new(levels[0].energy, levels[1].energy, levels[c2].energy)
    }

    /// Ground and first excited level from the two largest interval lengths.
    ///
    /// The second eigenvalue is either the first excited mode of the largest
    /// interval or the ground mode of the runner-up.
    pub fn from_top_two(largest: f64, second: f64) -> Result<Self> {
        let e1 = dirichlet_level(largest, 1);
        let excited = dirichlet_level(largest, 2);
        let e2 = if second > 0.0 {
            excited.min(dirichlet_level(second, 1))
        } else {
            excited
        };
        Self::new(e1, e2, e2)
    }
}

fn check_lengths(config: &Configuration) -> Result<()> {
    if config.lengths().iter().all(|&l| !(l > 0.0)) {
        return Err(Error::Validation(
            "configuration has no interval of positive length".into(),
        ));
    }
    Ok(())
}

/// All levels strictly below `e_cut`, ascending.
pub fn enumerate_below(config: &Configuration, e_cut: f64) -> Result<Spectrum> {
    if !(e_cut > 0.0) || !e_cut.is_finite() {
        return Err(invalid(
            "e_cut",
            format!("must be finite and > 0, got {e_cut}"),
        ));
    }
    check_lengths(config)?;
    let lengths = config.lengths();
    let total: u64 = lengths.iter().map(|&l| modes_below(l, e_cut)).sum();
    let mut levels = Vec::with_capacity(total as usize);
    for (interval, &length) in lengths.iter().enumerate() {
        for mode in 1..=modes_below(length, e_cut) {
            levels.push(Level {
                energy: dirichlet_level(length, mode),
                interval,
                mode,
            });
        }
    }
    levels.sort_unstable();
    Ok(Spectrum {
        levels,
        cutoff: e_cut,
        lengths: lengths.to_vec(),
        window_length: config.window_length(),
    })
}

// Min-heap entry: the next untaken mode of one interval.
#[derive(PartialEq, Eq)]
struct Candidate(Level);

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` globally smallest levels.
///
/// Each interval is a lazy generator of its own ascending modes; a heap keeps
/// the head of every generator and the global order is their k-way merge.
/// The returned cutoff is the energy of the next level that would be
/// produced, so the spectrum is complete below it.
pub fn k_smallest(config: &Configuration, k: usize) -> Result<Spectrum> {
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    check_lengths(config)?;
    let lengths = config.lengths();
    let mut heap: BinaryHeap<Candidate> = lengths
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0)
        .map(|(interval, &l)| {
            Candidate(Level {
                energy: dirichlet_level(l, 1),
                interval,
                mode: 1,
            })
        })
        .collect();
    let mut levels = Vec::with_capacity(k);
    while levels.len() < k {
        let Candidate(level) = heap.pop().expect("generators never run dry");
        let next = level.mode + 1;
        heap.push(Candidate(Level {
            energy: dirichlet_level(lengths[level.interval], next),
            interval: level.interval,
            mode: next,
        }));
        levels.push(level);
    }
    let cutoff = heap.peek().map_or(f64::INFINITY, |c| c.0.energy);
    Ok(Spectrum {
        levels,
        cutoff,
        lengths: lengths.to_vec(),
        window_length: config.window_length(),
    })
}

/// `|{levels < e}|` over the whole window.
pub fn count_below(config: &Configuration, e: f64) -> u64 {
    config.lengths().iter().map(|&l| modes_below(l, e)).sum()
}

/// Finite-volume integrated density of states, `(1/L)·|{levels < e}|`.
pub fn counting_function(config: &Configuration, e: f64) -> f64 {
    count_below(config, e) as f64 / config.window_length()
}
