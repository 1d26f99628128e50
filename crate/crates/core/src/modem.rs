//! CSK spreading, correlation despreading and sign detection.
//!
//! One real sample per chip (rectangular pulse, unit chip duration).

use rand::Rng;

use crate::chaos::ChaoticSequence;
use crate::error::{Error, Result};

/// Antipodal data symbols, each exactly -1 or +1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream(Vec<i8>);

impl BitStream {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSymbol(bad));
        }
        Ok(BitStream(symbols))
    }

    /// `n` equiprobable independent symbols.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut word = rng.next_u64();
            for _ in 0..(n - out.len()).min(64) {
                out.push(if word & 1 == 1 { 1 } else { -1 });
                word >>= 1;
            }
        }
        BitStream(out)
    }

    pub fn symbols(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        BitStream(self.0.iter().map(|s| -s).collect())
    }

    /// Number of positions where `self` and `other` differ.
    pub fn errors_against(&self, other: &BitStream) -> u64 {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count() as u64
    }
}

/// Baseband chip samples, `beta` per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipFrame {
    samples: Vec<f64>,
    beta: usize,
}

impl ChipFrame {
    pub fn new(samples: Vec<f64>, beta: usize) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidSpreadingFactor);
        }
        if !samples.len().is_multiple_of(beta) {
            return Err(Error::LengthMismatch {
                expected: samples.len().next_multiple_of(beta),
                actual: samples.len(),
            });
        }
        Ok(ChipFrame { samples, beta })
    }

    pub fn zeros(beta: usize, num_symbols: usize) -> Result<Self> {
        ChipFrame::new(vec![0.0; beta * num_symbols], beta)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn num_symbols(&self) -> usize {
        self.samples.len() / self.beta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `alpha * self + other`, sample by sample.
    pub fn scaled_add(&self, alpha: f64, other: &ChipFrame) -> Result<ChipFrame> {
        if self.len() != other.len() || self.beta != other.beta {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| alpha * a + b)
            .collect();
        Ok(ChipFrame {
            samples,
            beta: self.beta,
        })
    }
}

/// Correlator output for one symbol.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DecisionVariable(pub f64);

impl DecisionVariable {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Multiplies symbol `i` onto chips `i*beta .. (i+1)*beta` of `seq`.
pub fn spread(bits: &BitStream, seq: &ChaoticSequence, beta: usize) -> Result<ChipFrame> {
    if beta == 0 {
        return Err(Error::InvalidSpreadingFactor);
    }
    let needed = beta * bits.len();
    if seq.len() < needed {
        return Err(Error::SequenceTooShort {
            needed,
            available: seq.len(),
        });
    }
    let mut samples = Vec::with_capacity(needed);
    for (&s, chips) in bits.symbols().iter().zip(seq.chips().chunks_exact(beta)) {
        let s = f64::from(s);
        samples.extend(chips.iter().map(|x| s * x));
    }
    Ok(ChipFrame { samples, beta })
}

/// `D_i = sum_k frame[i*beta + k] * x[i*beta + k]` for every symbol.
///
/// The sequence must cover the frame exactly: extra chips are a caller
/// error, not something to silently ignore.
pub fn correlate(frame: &ChipFrame, seq: &ChaoticSequence) -> Result<Vec<DecisionVariable>> {
    if seq.len() != frame.len() {
        return Err(Error::LengthMismatch {
            expected: frame.len(),
            actual: seq.len(),
        });
    }
    Ok(correlate_prefix(frame, seq))
}

/// Like [`correlate`] but uses only the first `frame.len()` chips of `seq`.
pub fn correlate_prefix(frame: &ChipFrame, seq: &ChaoticSequence) -> Vec<DecisionVariable> {
    let beta = frame.beta();
    frame
        .samples()
        .chunks_exact(beta)
        .zip(seq.chips().chunks_exact(beta))
        .map(|(r, x)| DecisionVariable(r.iter().zip(x).map(|(a, b)| a * b).sum()))
        .collect()
}

/// `+1` for `D >= 0`, else `-1`.
pub fn sign_detect(d: DecisionVariable) -> i8 {
    if d.0 >= 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{generate_sequence, BernoulliParams, MapShape, PairId};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(chips: &[f64]) -> ChaoticSequence {
        ChaoticSequence::from_chips(chips.to_vec(), PairId(0))
    }

    fn bits(v: &[i8]) -> BitStream {
        BitStream::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bitstream_rejects_non_antipodal() {
        assert_eq!(BitStream::new(vec![1, 0, -1]), Err(Error::InvalidSymbol(0)));
        assert!(BitStream::new(vec![1, -1]).is_ok());
    }

    #[test]
    fn random_bits_are_antipodal_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = BitStream::random(100_001, &mut rng);
        assert_eq!(b.len(), 100_001);
        let plus = b.symbols().iter().filter(|&&s| s == 1).count() as f64;
        assert!(b.symbols().iter().all(|&s| s == 1 || s == -1));
        // 5 sigma around one half.
        assert!((plus / 100_001.0 - 0.5).abs() < 5.0 * 0.5 / 100_001f64.sqrt());
    }

    #[test]
    fn spread_examples() {
        let s = seq(&[0.5, -0.5]);
        assert_eq!(spread(&bits(&[1]), &s, 2).unwrap().samples(), &[0.5, -0.5]);
        assert_eq!(spread(&bits(&[-1]), &s, 2).unwrap().samples(), &[-0.5, 0.5]);
        let s = seq(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            spread(&bits(&[1, -1]), &s, 2).unwrap().samples(),
            &[1.0, 2.0, -3.0, -4.0]
        );
    }

    #[test]
    fn spread_rejects_short_sequence() {
        let s = seq(&[1.0, 2.0, 3.0]);
        assert_eq!(
            spread(&bits(&[1, 1]), &s, 2),
            Err(Error::SequenceTooShort {
                needed: 4,
                available: 3
            })
        );
        assert_eq!(spread(&bits(&[1]), &s, 0), Err(Error::InvalidSpreadingFactor));
    }

    #[test]
    fn correlate_examples() {
        let s = seq(&[0.5, -1.5, 2.0, 0.25]);
        let eb: Vec<f64> = s.symbol_energies(2, 2).unwrap();
        let d = correlate(&spread(&bits(&[1, -1]), &s, 2).unwrap(), &s).unwrap();
        assert_eq!(d, vec![DecisionVariable(eb[0]), DecisionVariable(-eb[1])]);
        let zero = ChipFrame::zeros(2, 2).unwrap();
        assert_eq!(correlate(&zero, &s).unwrap(), vec![DecisionVariable(0.0); 2]);
        let short = ChipFrame::zeros(2, 1).unwrap();
        assert!(matches!(correlate(&short, &s), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_detect(DecisionVariable(3.7)), 1);
        assert_eq!(sign_detect(DecisionVariable(-0.2)), -1);
        assert_eq!(sign_detect(DecisionVariable(0.0)), 1);
    }

    #[test]
    fn symbol_energy_averages_to_beta() {
        let p = BernoulliParams::new(MapShape::default(), 0.2).unwrap();
        let beta = 64;
        let s = generate_sequence(p, beta * 2000, PairId(0)).unwrap();
        let e = s.symbol_energies(beta, 2000).unwrap();
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        assert!((mean - beta as f64).abs() < 1e-9 * beta as f64);
    }

    proptest! {
        #[test]
        fn noiseless_round_trip(x0 in 0.01f64..1.4, beta in 1usize..40, raw in proptest::collection::vec(any::<bool>(), 1..30)) {
            let b = BitStream::new(raw.iter().map(|&u| if u { 1 } else { -1 }).collect()).unwrap();
            let p = BernoulliParams::new(MapShape::default(), x0).unwrap();
            let s = generate_sequence(p, (beta * b.len()).max(2), PairId(0)).unwrap();
            let frame = spread(&b, &s, beta).unwrap();
            let d = correlate_prefix(&frame, &s);
            let back: Vec<i8> = d.into_iter().map(sign_detect).collect();
            prop_assert_eq!(back, b.symbols().to_vec());
        }

        #[test]
        fn correlation_is_linear(alpha in -3.0f64..3.0, a in proptest::collection::vec(-2.0f64..2.0, 12), b in proptest::collection::vec(-2.0f64..2.0, 12)) {
            let s = seq(&[0.3, -1.1, 0.9, 1.4, -0.2, -0.7, 0.5, 1.0, -1.3, 0.1, 0.8, -0.4]);
            let f1 = ChipFrame::new(a, 3).unwrap();
            let f2 = ChipFrame::new(b, 3).unwrap();
            let lhs = correlate(&f1.scaled_add(alpha, &f2).unwrap(), &s).unwrap();
            let d1 = correlate(&f1, &s).unwrap();
            let d2 = correlate(&f2, &s).unwrap();
            for i in 0..4 {
                prop_assert!((lhs[i].0 - (alpha * d1[i].0 + d2[i].0)).abs() < 1e-12);
            }
        }
    }
}
