//! AWGN per hop and the Eb/N0 bookkeeping shared by simulation and analysis.
//!
//! `E_b` is the energy of one user's spread bit. With unit-power chips that
//! is `beta`, so `N0 = beta / 10^(ebn0_db / 10)`. Both hops (users to relay
//! and relay to users) add noise of variance `N0 / 2` per chip.
//!
//! Gaussian samples are the ziggurat transform (`rand_distr::StandardNormal`)
//! of a ChaCha8 keystream. Within one build they are bit-reproducible for a
//! given `(seed, stream id)`; across implementations only the statistics are.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seeding;

/// Chaotic-chip spreading has `E_b = beta` for unit-power chips.
pub fn ebn0_to_n0(ebn0_db: f64, beta: usize) -> f64 {
    beta as f64 / 10f64.powf(ebn0_db / 10.0)
}

/// Operating point of one round: Eb/N0, the derived `N0`, and the seed from
/// which the round's hop noise streams are keyed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub n0: f64,
    pub beta: usize,
    pub seed: u64,
    pub noiseless: bool,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, beta: usize, seed: u64) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidSpreadingFactor);
        }
        let n0 = ebn0_to_n0(ebn0_db, beta);
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::NonPositiveNoise(n0));
        }
        Ok(ChannelParams {
            ebn0_db,
            n0,
            beta,
            seed,
            noiseless: false,
        })
    }

    /// Both hops noise free; every noise source yields exact zeros.
    pub fn noiseless(beta: usize, seed: u64) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidSpreadingFactor);
        }
        Ok(ChannelParams {
            ebn0_db: f64::INFINITY,
            n0: 0.0,
            beta,
            seed,
            noiseless: true,
        })
    }

    /// Noise of the users-to-relay hop (ChaCha stream 0).
    pub fn uplink_noise(&self) -> NoiseSource {
        self.hop(0)
    }

    /// Noise of the relay-to-`user` hop (ChaCha stream `1 + user`).
    pub fn downlink_noise(&self, user: usize) -> NoiseSource {
        self.hop(1 + user as u64)
    }

    fn hop(&self, stream_id: u64) -> NoiseSource {
        if self.noiseless {
            NoiseSource::noiseless()
        } else {
            NoiseSource {
                inner: Some((seeding::stream(self.seed, stream_id), (self.n0 / 2.0).sqrt())),
            }
        }
    }
}

/// A stream of i.i.d. `N(0, N0/2)` samples, or exact zeros when noiseless.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    inner: Option<(ChaCha8Rng, f64)>,
}

impl NoiseSource {
    pub fn new(n0: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::NonPositiveNoise(n0));
        }
        Ok(NoiseSource {
            inner: Some((rng, (n0 / 2.0).sqrt())),
        })
    }

    pub fn noiseless() -> Self {
        NoiseSource { inner: None }
    }

    pub fn is_noiseless(&self) -> bool {
        self.inner.is_none()
    }

    /// Adds one noise sample to every element of `buf`.
    pub fn add_to(&mut self, buf: &mut [f64]) {
        if let Some((rng, sigma)) = self.inner.as_mut() {
            let sigma = *sigma;
            for v in buf.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *v += sigma * z;
            }
        }
    }

    pub fn samples(&mut self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        self.add_to(&mut out);
        out
    }
}

/// `length` i.i.d. Gaussian samples with mean 0 and variance `n0 / 2`.
pub fn awgn<R: Rng + ?Sized>(length: usize, n0: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::NonPositiveNoise(n0));
    }
    let sigma = (n0 / 2.0).sqrt();
    Ok((0..length)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        })
        .collect())
}
