//! Batched, parallel BER estimation with an error-count stopping rule.
//!
//! A point is simulated in batches of about [`BATCH_BITS`] recovered bits.
//! Batches run in waves of [`WAVE_BATCHES`]; the stopping rule is checked
//! between waves, so the result depends only on the configuration and seed,
//! never on the thread count. Each batch keys its own streams (see
//! [`crate::seeding`]): the pair sequences and user bits depend on
//! `(seed, L, beta, batch)` only, so every Eb/N0 of a curve sees the same
//! chips and data, and only the noise changes with Eb/N0.

use std::ops::{Add, AddAssign};

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::chaos::{assign_pair_seeds, generate_sequence, MapShape, PairId};
use crate::error::{Error, Result};
use crate::modem::BitStream;
use crate::network::{run_round, NetworkConfig, RoundOptions};
use crate::seeding::{self, domain};

pub const BATCH_BITS: u64 = 10_000;
pub const WAVE_BATCHES: u64 = 8;

/// Points need this many errors before the agreement gate applies.
pub const GATE_MIN_ERRORS: u64 = 200;
/// Allowed deviation from the analytic BER, in standard errors.
pub const GATE_SIGMAS: f64 = 4.0;

/// Bit and error counts; merging is plain addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub trials: u64,
    pub errors: u64,
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, rhs: Tally) -> Tally {
        Tally {
            trials: self.trials + rhs.trials,
            errors: self.errors + rhs.errors,
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        *self = *self + rhs;
    }
}

/// Stop once `min_errors` errors are seen or `max_trials` bits simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: 200,
            max_trials: 100_000_000,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 {
            return Err(Error::InvalidSweep("min_errors must be at least 1".into()));
        }
        if self.max_trials < self.min_errors {
            return Err(Error::InvalidSweep(format!(
                "max_trials {} is below min_errors {}",
                self.max_trials, self.min_errors
            )));
        }
        Ok(())
    }
}

/// Map shape and receiver options shared by every point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkSettings {
    pub shape: MapShape,
    pub round: RoundOptions,
}

/// Simulated BER at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub users: usize,
    pub beta: usize,
    pub trials: u64,
    pub errors: u64,
    pub ber_hat: f64,
    pub ci95_halfwidth: f64,
    /// No error was observed before the trial cap.
    pub zero_error: bool,
}

impl BerPoint {
    fn from_tally(ebn0_db: f64, users: usize, beta: usize, tally: Tally) -> Self {
        let ber_hat = if tally.trials == 0 {
            0.0
        } else {
            tally.errors as f64 / tally.trials as f64
        };
        let ci95_halfwidth = if tally.trials == 0 {
            0.0
        } else {
            1.96 * (ber_hat * (1.0 - ber_hat) / tally.trials as f64).sqrt()
        };
        BerPoint {
            ebn0_db,
            users,
            beta,
            trials: tally.trials,
            errors: tally.errors,
            ber_hat,
            ci95_halfwidth,
            zero_error: tally.errors == 0,
        }
    }

    pub fn tally(&self) -> Tally {
        Tally {
            trials: self.trials,
            errors: self.errors,
        }
    }
}

/// Sweep grid and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ebn0_grid: Vec<f64>,
    pub users_list: Vec<usize>,
    pub beta_list: Vec<usize>,
    pub stop: StopRule,
    pub seed: u64,
    pub link: LinkSettings,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ebn0_grid.is_empty() || self.users_list.is_empty() || self.beta_list.is_empty() {
            return Err(Error::InvalidSweep("empty Eb/N0 grid, user list or beta list".into()));
        }
        if let Some(&l) = self.users_list.iter().find(|&&l| l < 2 || !l.is_multiple_of(2)) {
            return Err(Error::InvalidUserCount(l));
        }
        if self.beta_list.contains(&0) {
            return Err(Error::InvalidSpreadingFactor);
        }
        if let Some(x) = self.ebn0_grid.iter().find(|x| x.is_nan() || **x == f64::NEG_INFINITY) {
            return Err(Error::InvalidSweep(format!("Eb/N0 value {x} is not usable")));
        }
        self.stop.validate()
    }

    /// `(L, beta, Eb/N0)` in output order: by L, then beta, then grid order.
    pub fn points(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &l in &self.users_list {
            for &beta in &self.beta_list {
                for &db in &self.ebn0_grid {
                    out.push((l, beta, db));
                }
            }
        }
        out
    }
}

/// Everything one batch needs besides the batch index.
#[derive(Debug, Clone, Copy)]
struct PointSpec {
    ebn0_db: f64,
    users: usize,
    beta: usize,
    seed: u64,
    link: LinkSettings,
}

impl PointSpec {
    fn channel(&self, batch: u64) -> Result<ChannelParams> {
        let labels = [
            domain::NOISE,
            self.users as u64,
            self.beta as u64,
            self.ebn0_db.to_bits(),
            batch,
        ];
        let key = seeding::derive_seed(self.seed, &labels);
        if self.ebn0_db == f64::INFINITY {
            ChannelParams::noiseless(self.beta, key)
        } else {
            ChannelParams::new(self.ebn0_db, self.beta, key)
        }
    }
}

/// Pair sequences for one batch of `symbols` symbols per user.
pub fn batch_network(
    shape: MapShape,
    users: usize,
    beta: usize,
    seed: u64,
    batch: u64,
    symbols: usize,
) -> Result<NetworkConfig> {
    if users < 2 || !users.is_multiple_of(2) {
        return Err(Error::InvalidUserCount(users));
    }
    let key = seeding::derive_seed(seed, &[domain::SEQUENCE, users as u64, beta as u64, batch]);
    let sequences = assign_pair_seeds(shape, users / 2, key)?
        .into_iter()
        .enumerate()
        .map(|(p, params)| generate_sequence(params, beta * symbols, PairId(p)))
        .collect::<Result<Vec<_>>>()?;
    NetworkConfig::from_sequences(beta, sequences)
}

/// Data of every user for one batch.
pub fn batch_bits(users: usize, beta: usize, seed: u64, batch: u64, symbols: usize) -> Vec<BitStream> {
    let key = seeding::derive_seed(seed, &[domain::BITS, users as u64, beta as u64, batch]);
    (0..users)
        .map(|u| BitStream::random(symbols, &mut seeding::stream(key, u as u64)))
        .collect()
}

fn simulate_batch(spec: &PointSpec, batch: u64, symbols: usize) -> Result<Tally> {
    let config = batch_network(spec.link.shape, spec.users, spec.beta, spec.seed, batch, symbols)?;
    let bits = batch_bits(spec.users, spec.beta, spec.seed, batch, symbols);
    let channel = spec.channel(batch)?;
    let outcome = run_round(&config, &bits, &channel, spec.link.round)?;
    Ok(Tally {
        trials: (symbols * spec.users) as u64,
        errors: outcome.bit_errors(&config, &bits),
    })
}

/// Estimates the BER at one point. `ebn0_db = +inf` simulates noiselessly.
pub fn estimate_point(
    ebn0_db: f64,
    users: usize,
    beta: usize,
    stop: StopRule,
    seed: u64,
    link: LinkSettings,
) -> Result<BerPoint> {
    stop.validate()?;
    if users < 2 || !users.is_multiple_of(2) {
        return Err(Error::InvalidUserCount(users));
    }
    if beta == 0 {
        return Err(Error::InvalidSpreadingFactor);
    }
    if stop.max_trials < users as u64 {
        return Err(Error::InvalidSweep(format!(
            "max_trials {} cannot hold one symbol of {users} users",
            stop.max_trials
        )));
    }
    let spec = PointSpec {
        ebn0_db,
        users,
        beta,
        seed,
        link,
    };
    let per_batch = BATCH_BITS.div_ceil(users as u64);
    let max_symbols = stop.max_trials / users as u64;
    let total_batches = max_symbols.div_ceil(per_batch);

    let mut tally = Tally::default();
    let mut next = 0u64;
    while next < total_batches && tally.errors < stop.min_errors {
        let wave_end = (next + WAVE_BATCHES).min(total_batches);
        let results: Vec<Result<Tally>> = (next..wave_end)
            .into_par_iter()
            .map(|b| {
                let symbols = per_batch.min(max_symbols - b * per_batch) as usize;
                simulate_batch(&spec, b, symbols)
            })
            .collect();
        for r in results {
            tally += r?;
        }
        next = wave_end;
    }
    Ok(BerPoint::from_tally(ebn0_db, users, beta, tally))
}

/// Every `(L, beta, Eb/N0)` of the sweep, in [`SweepConfig::points`] order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BerPoint>> {
    config.validate()?;
    config
        .points()
        .into_par_iter()
        .map(|(users, beta, db)| estimate_point(db, users, beta, config.stop, config.seed, config.link))
        .collect()
}

/// Result of comparing one simulated point with its analytic value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateVerdict {
    /// Fewer than [`GATE_MIN_ERRORS`] errors (including zero-error points).
    Excluded,
    /// Deviation in analytic standard errors, and whether it is within
    /// [`GATE_SIGMAS`].
    Checked { z: f64, pass: bool },
}

impl GateVerdict {
    pub fn failed(&self) -> bool {
        matches!(self, GateVerdict::Checked { pass: false, .. })
    }
}

/// `|ber_hat - p| <= 4 sqrt(p (1 - p) / trials)` for points with at least
/// 200 errors, where `p` is the analytic BER.
pub fn agreement_gate(point: &BerPoint, analytic_ber: f64) -> GateVerdict {
    if point.zero_error || point.errors < GATE_MIN_ERRORS {
        return GateVerdict::Excluded;
    }
    let se = (analytic_ber * (1.0 - analytic_ber) / point.trials as f64).sqrt();
    let z = (point.ber_hat - analytic_ber) / se;
    GateVerdict::Checked {
        z,
        pass: z.abs() <= GATE_SIGMAS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analytic_point, BerModel};
    use proptest::prelude::*;

    #[test]
    fn noiseless_points_are_error_free_and_flagged() {
        for beta in [1, 7, 64] {
            let stop = StopRule {
                min_errors: 1,
                max_trials: 30_000,
            };
            let p = estimate_point(f64::INFINITY, 2, beta, stop, 3, LinkSettings::default()).unwrap();
            assert_eq!(p.errors, 0);
            assert!(p.zero_error);
            assert_eq!(p.trials, 30_000);
            assert_eq!(p.ber_hat, 0.0);
        }
    }

    #[test]
    fn trial_cap_is_respected() {
        let stop = StopRule {
            min_errors: 25_000,
            max_trials: 25_003,
        };
        let p = estimate_point(0.0, 4, 10, stop, 1, LinkSettings::default()).unwrap();
        assert_eq!(p.trials, 25_000);
        assert!(p.trials <= stop.max_trials);
        assert!(!p.zero_error);
        assert!((p.ber_hat - p.errors as f64 / p.trials as f64).abs() == 0.0);
        let expected_ci = 1.96 * (p.ber_hat * (1.0 - p.ber_hat) / p.trials as f64).sqrt();
        assert_eq!(p.ci95_halfwidth, expected_ci);
    }

    #[test]
    fn same_seed_same_point() {
        let stop = StopRule {
            min_errors: 100,
            max_trials: 200_000,
        };
        let a = estimate_point(4.0, 4, 32, stop, 9, LinkSettings::default()).unwrap();
        let b = estimate_point(4.0, 4, 32, stop, 9, LinkSettings::default()).unwrap();
        assert_eq!(a, b);
        let c = estimate_point(4.0, 4, 32, stop, 10, LinkSettings::default()).unwrap();
        assert_ne!(a.errors, c.errors);
    }

    #[test]
    fn stops_after_enough_errors() {
        let stop = StopRule {
            min_errors: 50,
            max_trials: 100_000_000,
        };
        let p = estimate_point(0.0, 2, 16, stop, 2, LinkSettings::default()).unwrap();
        assert!(p.errors >= 50);
        // One wave is plenty at BER ~ 0.2.
        assert!(p.trials <= WAVE_BATCHES * BATCH_BITS);
    }

    #[test]
    fn point_at_5db_agrees_with_analysis() {
        let stop = StopRule {
            min_errors: 200,
            max_trials: 100_000_000,
        };
        let p = estimate_point(5.0, 2, 100, stop, 42, LinkSettings::default()).unwrap();
        let a = analytic_point(5.0, 2, 100, BerModel::AsPrinted).unwrap();
        let se = (a.ber * (1.0 - a.ber) / p.trials as f64).sqrt();
        assert!(
            (p.ber_hat - a.ber).abs() < 3.0 * se,
            "sim {} analytic {} se {}",
            p.ber_hat,
            a.ber,
            se
        );
    }

    #[test]
    fn sweep_shape_and_order() {
        let cfg = SweepConfig {
            ebn0_grid: (0..=10).map(|i| f64::from(i) * 2.0).collect(),
            users_list: vec![2, 4],
            beta_list: vec![50, 100],
            stop: StopRule {
                min_errors: 1,
                max_trials: 16,
            },
            seed: 1,
            link: LinkSettings::default(),
        };
        let pts = run_sweep(&cfg).unwrap();
        assert_eq!(pts.len(), 44);
        let keys: Vec<(usize, usize, f64)> = pts.iter().map(|p| (p.users, p.beta, p.ebn0_db)).collect();
        assert_eq!(keys, cfg.points());
        assert_eq!(pts, run_sweep(&cfg).unwrap());

        let single = SweepConfig {
            ebn0_grid: vec![3.0],
            users_list: vec![2],
            beta_list: vec![8],
            ..cfg.clone()
        };
        assert_eq!(run_sweep(&single).unwrap().len(), 1);
    }

    #[test]
    fn sweep_validation() {
        let good = SweepConfig {
            ebn0_grid: vec![0.0],
            users_list: vec![2],
            beta_list: vec![10],
            stop: StopRule::default(),
            seed: 0,
            link: LinkSettings::default(),
        };
        assert!(good.validate().is_ok());
        assert!(SweepConfig {
            users_list: vec![3],
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(SweepConfig {
            ebn0_grid: vec![],
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(SweepConfig {
            beta_list: vec![0],
            ..good.clone()
        }
        .validate()
        .is_err());
        let bad_stop = StopRule {
            min_errors: 10,
            max_trials: 5,
        };
        assert!(SweepConfig {
            stop: bad_stop,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(StopRule {
            min_errors: 0,
            max_trials: 5
        }
        .validate()
        .is_err());
    }

    #[test]
    fn gate_rules() {
        let mk = |errors: u64, trials: u64| BerPoint::from_tally(0.0, 2, 1, Tally { trials, errors });
        assert_eq!(agreement_gate(&mk(0, 1000), 0.1), GateVerdict::Excluded);
        assert_eq!(agreement_gate(&mk(199, 1000), 0.1), GateVerdict::Excluded);
        match agreement_gate(&mk(1000, 10_000), 0.1) {
            GateVerdict::Checked { z, pass } => assert!(z.abs() < 1e-12 && pass),
            v => panic!("{v:?}"),
        }
        assert!(agreement_gate(&mk(1000, 10_000), 0.05).failed());
    }

    proptest! {
        #[test]
        fn tally_merge_is_order_independent(parts in proptest::collection::vec((0u64..1000, 0u64..1000), 1..20), rot in 0usize..20) {
            let tallies: Vec<Tally> = parts.iter().map(|&(t, e)| Tally { trials: t + e, errors: e }).collect();
            let forward = tallies.iter().fold(Tally::default(), |a, &b| a + b);
            let mut rotated = tallies.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            let backward = rotated.iter().rev().fold(Tally::default(), |a, &b| a + b);
            prop_assert_eq!(forward, backward);
            let (left, right) = tallies.split_at(tallies.len() / 2);
            let grouped = left.iter().fold(Tally::default(), |a, &b| a + b) + right.iter().fold(Tally::default(), |a, &b| a + b);
            prop_assert_eq!(forward, grouped);
        }
    }
}
