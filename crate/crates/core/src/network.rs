//! The four-phase analog network coding round.
//!
//! 1. Request to transmit: the relay aligns all users, modelled as perfect
//!    chip synchronization.
//! 2. Transmission: every user spreads its bits with its pair's sequence;
//!    the relay receives the sum of all frames plus uplink AWGN.
//! 3. Broadcast: the relay forwards that sum unamplified; each user receives
//!    it through its own downlink AWGN.
//! 4. Decoding: each user despreads with its pair's sequence, decodes the
//!    ternary pair sum `s_A + s_B` against thresholds `+-E_b`, and removes
//!    its own symbol to recover its partner's.
//!
//! | A  | B  | relay    | decoded | A's bit recovered by B |
//! |----|----|----------|---------|------------------------|
//! | +1 | +1 | `2x`     | +2      | 2 - 1 = 1              |
//! | +1 | -1 | `0x`     | 0       | 0 - (-1) = 1           |
//! | -1 | +1 | `0x`     | 0       | 0 - 1 = -1             |
//! | -1 | -1 | `-2x`    | -2      | -2 - (-1) = -1         |

use crate::channel::{ChannelParams, NoiseSource};
use crate::chaos::ChaoticSequence;
use crate::error::{Error, Result};
use crate::modem::{correlate_prefix, spread, BitStream, ChipFrame, DecisionVariable};

/// Two users sharing one spreading sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPair {
    pub user_a: usize,
    pub user_b: usize,
    pub sequence: ChaoticSequence,
}

/// `L` users grouped into `L / 2` pairs, each with its own sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    beta: usize,
    pairs: Vec<UserPair>,
    // user -> (pair index, partner)
    membership: Vec<(usize, usize)>,
}

impl NetworkConfig {
    pub fn new(beta: usize, pairs: Vec<UserPair>) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidSpreadingFactor);
        }
        let users = pairs.len() * 2;
        if users < 2 {
            return Err(Error::InvalidUserCount(users));
        }
        let mut membership = vec![None; users];
        for (p, pair) in pairs.iter().enumerate() {
            for (me, partner) in [(pair.user_a, pair.user_b), (pair.user_b, pair.user_a)] {
                let slot = membership
                    .get_mut(me)
                    .ok_or_else(|| Error::InvalidNetwork(format!("user {me} outside 0..{users}")))?;
                if slot.is_some() {
                    return Err(Error::InvalidNetwork(format!("user {me} belongs to two pairs")));
                }
                *slot = Some((p, partner));
            }
            for other in &pairs[..p] {
                if other.sequence == pair.sequence {
                    return Err(Error::InvalidNetwork(format!(
                        "pairs {:?} and {:?} share a spreading sequence",
                        other.sequence.pair_id(),
                        pair.sequence.pair_id()
                    )));
                }
            }
        }
        let membership = membership.into_iter().map(|m| m.expect("every slot filled")).collect();
        Ok(NetworkConfig {
            beta,
            pairs,
            membership,
        })
    }

    /// Users `2p` and `2p + 1` form pair `p`.
    pub fn from_sequences(beta: usize, sequences: Vec<ChaoticSequence>) -> Result<Self> {
        let pairs = sequences
            .into_iter()
            .enumerate()
            .map(|(p, sequence)| UserPair {
                user_a: 2 * p,
                user_b: 2 * p + 1,
                sequence,
            })
            .collect();
        NetworkConfig::new(beta, pairs)
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn num_users(&self) -> usize {
        self.membership.len()
    }

    pub fn pairs(&self) -> &[UserPair] {
        &self.pairs
    }

    pub fn partner_of(&self, user: usize) -> usize {
        self.membership[user].1
    }

    pub fn sequence_of(&self, user: usize) -> &ChaoticSequence {
        &self.pairs[self.membership[user].0].sequence
    }
}

/// Decoded pair sum `s_A + s_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TernarySymbol {
    MinusTwo,
    Zero,
    PlusTwo,
}

impl TernarySymbol {
    pub fn value(self) -> i8 {
        match self {
            TernarySymbol::MinusTwo => -2,
            TernarySymbol::Zero => 0,
            TernarySymbol::PlusTwo => 2,
        }
    }

    pub fn from_sum(a: i8, b: i8) -> Option<Self> {
        match a + b {
            -2 => Some(TernarySymbol::MinusTwo),
            0 => Some(TernarySymbol::Zero),
            2 => Some(TernarySymbol::PlusTwo),
            _ => None,
        }
    }
}

/// Decision thresholds `(gamma1, gamma2) = (-E_b, +E_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    gamma1: f64,
    gamma2: f64,
}

impl Thresholds {
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

/// Midpoints between the noise-free correlator outputs `{-2E_b, 0, 2E_b}`.
pub fn compute_thresholds(e_b: f64) -> Result<Thresholds> {
    if !(e_b > 0.0 && e_b.is_finite()) {
        return Err(Error::NonPositiveEnergy(e_b));
    }
    Ok(Thresholds {
        gamma1: -e_b,
        gamma2: e_b,
    })
}

/// `+2` above `gamma2`, `-2` below `gamma1`, `0` otherwise (boundaries included).
pub fn ternary_decode(d: DecisionVariable, th: Thresholds) -> TernarySymbol {
    if d.0 > th.gamma2 {
        TernarySymbol::PlusTwo
    } else if d.0 < th.gamma1 {
        TernarySymbol::MinusTwo
    } else {
        TernarySymbol::Zero
    }
}

/// How a user maps `decoded - own` onto a partner bit.
///
/// The difference is always odd: `+-1` reproduce the mapping table, `+-3`
/// only arise after a decoding error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionRule {
    /// Reduce modulo 4 into `{-1, +1}`: `3 -> -1`, `-3 -> +1`. A bit is in
    /// error exactly when the ternary decision is wrong, except for the
    /// `+2 <-> -2` swap, which still yields the right bit. This is the error
    /// accounting behind the analytic BER.
    #[default]
    Modular,
    /// Keep the sign: `3 -> +1`, `-3 -> -1`.
    Clamp,
}

impl ExtractionRule {
    pub fn apply(self, decoded: TernarySymbol, own: i8) -> i8 {
        let diff = decoded.value() - own;
        match (self, diff) {
            (_, 1) | (_, -1) => diff,
            (ExtractionRule::Modular, 3) => -1,
            (ExtractionRule::Modular, -3) => 1,
            (ExtractionRule::Clamp, d) => d.signum(),
            (ExtractionRule::Modular, d) => unreachable!("decoded - own = {d} is not odd"),
        }
    }
}

/// Partner bit from the decoded pair sum and the user's own bit, using the
/// default [`ExtractionRule::Modular`].
pub fn extract_partner_symbol(decoded: TernarySymbol, own: i8) -> i8 {
    ExtractionRule::Modular.apply(decoded, own)
}

/// Energy used for the decoding thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyReference {
    /// `sum x^2` of the symbol's chips, known to the receiver from its code.
    #[default]
    PerSymbol,
    /// The nominal `E_b = beta`.
    Nominal,
}

/// Receiver and relay knobs of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOptions {
    pub energy: EnergyReference,
    pub extraction: ExtractionRule,
    /// Relay amplitude gain; 1 means plain forwarding.
    pub relay_gain: f64,
}

impl Default for RoundOptions {
    fn default() -> Self {
        RoundOptions {
            energy: EnergyReference::default(),
            extraction: ExtractionRule::default(),
            relay_gain: 1.0,
        }
    }
}

/// Sum of all user frames plus one uplink noise realization.
pub fn relay_superpose(frames: &[ChipFrame], noise_uplink: &mut NoiseSource) -> Result<ChipFrame> {
    let first = frames.first().ok_or(Error::InvalidUserCount(0))?;
    let mut sum = vec![0.0; first.len()];
    for f in frames {
        if f.len() != first.len() || f.beta() != first.beta() {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                actual: f.len(),
            });
        }
        sum.iter_mut().zip(f.samples()).for_each(|(acc, x)| *acc += x);
    }
    noise_uplink.add_to(&mut sum);
    ChipFrame::new(sum, first.beta())
}

/// The relay's frame as received by one user: `u_N` plus downlink noise.
pub fn broadcast(u_n: &ChipFrame, noise_downlink: &mut NoiseSource) -> ChipFrame {
    let mut out = u_n.clone();
    noise_downlink.add_to(out.samples_mut());
    out
}

/// Everything a round produces, indexed by user.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    /// Noisy superposition at the relay, `u_N`.
    pub relay: ChipFrame,
    pub decisions: Vec<Vec<DecisionVariable>>,
    pub decoded: Vec<Vec<TernarySymbol>>,
    /// Each user's estimate of its partner's bits.
    pub recovered: Vec<BitStream>,
}

impl RoundOutcome {
    /// Bit errors of every user's estimate against its partner's true bits.
    pub fn bit_errors(&self, config: &NetworkConfig, bits: &[BitStream]) -> u64 {
        (0..config.num_users())
            .map(|u| self.recovered[u].errors_against(&bits[config.partner_of(u)]))
            .sum()
    }
}

/// Runs spread, relay superposition, per-user broadcast, despreading,
/// ternary decoding and partner extraction for every user.
///
/// `bits[u]` is user `u`'s data; all streams must have the same length.
/// Uplink noise comes from `channel.uplink_noise()`, user `u`'s downlink
/// noise from `channel.downlink_noise(u)`.
pub fn run_round(
    config: &NetworkConfig,
    bits: &[BitStream],
    channel: &ChannelParams,
    opts: RoundOptions,
) -> Result<RoundOutcome> {
    let users = config.num_users();
    if bits.len() != users {
        return Err(Error::LengthMismatch {
            expected: users,
            actual: bits.len(),
        });
    }
    let n = bits[0].len();
    if let Some(b) = bits.iter().find(|b| b.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if channel.beta != config.beta() {
        return Err(Error::InvalidNetwork(format!(
            "channel beta {} differs from network beta {}",
            channel.beta,
            config.beta()
        )));
    }
    let beta = config.beta();

    let frames = (0..users)
        .map(|u| spread(&bits[u], config.sequence_of(u), beta))
        .collect::<Result<Vec<_>>>()?;
    let relay = relay_superpose(&frames, &mut channel.uplink_noise())?;
    drop(frames);

    let forwarded = if opts.relay_gain == 1.0 {
        None
    } else {
        let scaled: Vec<f64> = relay.samples().iter().map(|v| v * opts.relay_gain).collect();
        Some(ChipFrame::new(scaled, beta)?)
    };

    let thresholds: Vec<Vec<Thresholds>> = config
        .pairs()
        .iter()
        .map(|pair| {
            let energies = match opts.energy {
                EnergyReference::PerSymbol => pair.sequence.symbol_energies(beta, n)?,
                EnergyReference::Nominal => vec![beta as f64; n],
            };
            energies
                .into_iter()
                .map(|e| compute_thresholds(e * opts.relay_gain.abs()))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut decisions = Vec::with_capacity(users);
    let mut decoded = Vec::with_capacity(users);
    let mut recovered = Vec::with_capacity(users);
    for u in 0..users {
        let received = broadcast(forwarded.as_ref().unwrap_or(&relay), &mut channel.downlink_noise(u));
        let d = correlate_prefix(&received, config.sequence_of(u));
        let pair_thresholds = &thresholds[pair_index(config, u)];
        let sym: Vec<TernarySymbol> = d
            .iter()
            .zip(pair_thresholds)
            .map(|(&d, &th)| ternary_decode(d, th))
            .collect();
        let partner: Vec<i8> = sym
            .iter()
            .zip(bits[u].symbols())
            .map(|(&s, &own)| opts.extraction.apply(s, own))
            .collect();
        decisions.push(d);
        decoded.push(sym);
        recovered.push(BitStream::new(partner)?);
    }

    Ok(RoundOutcome {
        relay,
        decisions,
        decoded,
        recovered,
    })
}

fn pair_index(config: &NetworkConfig, user: usize) -> usize {
    config.membership[user].0
}
