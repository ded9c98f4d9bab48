//! Hidden Markov process models: observation channel, transfer matrices,
//! sequence probabilities, model-family constructors and sampling.
//!
//! A model couples a Markov chain over `L` states with an `M x L`
//! observation channel `pi(x|s)`. The derived transfer matrices
//! `T(x)[i][j] = pi(x|i) p(i|j)` carry all sequence probabilities:
//! `P(x_N..x_1) = <un| T(x_N) ... T(x_1) |st>`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::markov::MarkovChain;
use crate::matrix::Matrix;

const CHANNEL_SUM_TOL: f64 = 1e-12;
const TRANSFER_SUM_TOL: f64 = 1e-12;
/// Below this length a raw product cannot underflow; beyond it, probability
/// evaluation accumulates log-scale factors per step.
const PLAIN_PRODUCT_MAX_LEN: usize = 64;
/// Default cap on `M^N` for full-alphabet sequence enumeration.
const ENUMERATION_CAP: u128 = 1 << 20;

/// A time-ordered observed sequence with symbols in `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedSequence {
    symbols: Vec<u8>,
    alphabet: u8,
}

impl ObservedSequence {
    pub fn new(symbols: Vec<u8>, alphabet: u8) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Validation("observed sequence must be non-empty".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&x| x < 1 || x > alphabet) {
            return Err(Error::Validation(format!(
                "symbol {bad} outside alphabet 1..={alphabet}"
            )));
        }
        Ok(Self { symbols, alphabet })
    }

    /// Symbols in time order (`x_1` first).
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Hidden Markov process model.
///
/// Immutable after construction. Sampling takes an explicit seed and owns
/// its generator state, so parallel simulations are independent by
/// construction.
#[derive(Debug, Clone)]
pub struct HmpModel {
    chain: MarkovChain,
    /// `M x L` matrix of `pi(x|s)`; every column sums to one.
    channel: Matrix,
    /// Transfer matrices `T(x)`, one per symbol, each `L x L`.
    transfer: Vec<Matrix>,
}

impl HmpModel {
    /// Couple a chain with an observation channel and derive the transfer
    /// matrices. Checks that the channel columns are distributions and that
    /// the transfer matrices sum back to the transition matrix.
    pub fn new(chain: MarkovChain, channel: Matrix) -> Result<Self> {
        let l = chain.size();
        if channel.cols() != l {
            return Err(Error::Dimension(format!(
                "channel has {} columns, chain has {} states",
                channel.cols(),
                l
            )));
        }
        let m = channel.rows();
        if m < 1 {
            return Err(Error::Dimension("channel needs at least one symbol".into()));
        }
        for s in 0..l {
            let mut sum = 0.0;
            for x in 0..m {
                let v = channel.get(x, s);
                if v < 0.0 {
                    return Err(Error::Validation(format!(
                        "channel entry pi({}|{}) = {v} is negative",
                        x + 1,
                        s + 1
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > CHANNEL_SUM_TOL {
                return Err(Error::Validation(format!(
                    "channel column {} sums to {sum}, expected 1",
                    s + 1
                )));
            }
        }

        let mut transfer = Vec::with_capacity(m);
        for x in 0..m {
            let mut t = Matrix::zeros(l, l);
            for i in 0..l {
                let pi = channel.get(x, i);
                for j in 0..l {
                    t.set(i, j, pi * chain.transition().get(i, j));
                }
            }
            transfer.push(t);
        }

        // sum_x T(x) must reproduce the transition matrix.
        let mut sum = Matrix::zeros(l, l);
        for t in &transfer {
            sum = sum.add(t)?;
        }
        for i in 0..l {
            for j in 0..l {
                if (sum.get(i, j) - chain.transition().get(i, j)).abs() > TRANSFER_SUM_TOL {
                    return Err(Error::Validation(
                        "transfer matrices do not sum to the transition matrix".into(),
                    ));
                }
            }
        }

        Ok(Self { chain, channel, transfer })
    }

    /// Two-state symmetric chain with flip probability `q`, observed through
    /// a binary symmetric channel with error probability `eps`.
    pub fn binary_symmetric(q: f64, eps: f64) -> Result<Self> {
        for (name, v) in [("q", q), ("eps", eps)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} outside [0,1]")));
            }
        }
        let transition = Matrix::from_rows(&[vec![1.0 - q, q], vec![q, 1.0 - q]])?;
        let chain = MarkovChain::new(transition)?;
        let channel = Matrix::from_rows(&[vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])?;
        Self::new(chain, channel)
    }

    /// Three-state chain observed through the deterministic lumping
    /// `F(1) = 1`, `F(2) = F(3) = 2`.
    ///
    /// The transition matrix is parameterized by the off-diagonal column
    /// entries; each implied diagonal `1 - a - b` must be non-negative.
    pub fn aggregated(p1: f64, p2: f64, q1: f64, q2: f64, r1: f64, r2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("q1", q1), ("q2", q2), ("r1", r1), ("r2", r2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} outside [0,1]")));
            }
        }
        for (name, sum) in [("p1+p2", p1 + p2), ("q1+q2", q1 + q2), ("r1+r2", r1 + r2)] {
            if sum > 1.0 + 1e-15 {
                return Err(Error::Validation(format!(
                    "{name} = {sum} implies a negative diagonal entry"
                )));
            }
        }
        let transition = Matrix::from_rows(&[
            vec![1.0 - p1 - p2, q1, r1],
            vec![p1, 1.0 - q1 - q2, r2],
            vec![p2, q2, 1.0 - r1 - r2],
        ])?;
        let chain = MarkovChain::new(transition)?;
        let channel = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
        ])?;
        Self::new(chain, channel)
    }

    /// Aggregated family specialized by `r2 = 0`, `r1 = q1 + q2`: the hidden
    /// transition 2 -> 3 is prohibited and `T(2)` has a doubly degenerate
    /// top eigenvalue modulus.
    pub fn aggregated_case1(p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Self> {
        Self::aggregated(p1, p2, q1, q2, q1 + q2, 0.0)
    }

    /// Aggregated family specialized by `q1 + q2 = 1`, `r1 + r2 = 1`
    /// (parameters `q = q1`, `r = r1`): the hidden chain has zero dwell
    /// probability in states 2 and 3, and `T(2)` has eigenvalues
    /// `{0, +-sqrt((1-q)(1-r))}`.
    pub fn aggregated_case2(p1: f64, p2: f64, q: f64, r: f64) -> Result<Self> {
        Self::aggregated(p1, p2, q, 1.0 - q, r, 1.0 - r)
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn channel(&self) -> &Matrix {
        &self.channel
    }

    pub fn num_states(&self) -> usize {
        self.chain.size()
    }

    pub fn alphabet_size(&self) -> u8 {
        self.transfer.len() as u8
    }

    /// Transfer matrix for symbol `x` in `1..=M`.
    pub fn transfer(&self, x: u8) -> &Matrix {
        &self.transfer[(x - 1) as usize]
    }

    pub fn transfer_matrices(&self) -> &[Matrix] {
        &self.transfer
    }

    fn check_symbols(&self, symbols: &[u8]) -> Result<()> {
        let m = self.alphabet_size();
        if symbols.is_empty() {
            return Err(Error::Validation("sequence must be non-empty".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&x| x < 1 || x > m) {
            return Err(Error::Validation(format!("symbol {bad} outside alphabet 1..={m}")));
        }
        Ok(())
    }

    /// Probability of an observed sequence:
    /// `<un| T(x_N) ... T(x_1) |st>`.
    pub fn sequence_probability(&self, seq: &ObservedSequence) -> Result<f64> {
        self.probability_of(seq.symbols())
    }

    /// Probability of a raw symbol slice (time order, symbols in `1..=M`).
    pub fn probability_of(&self, symbols: &[u8]) -> Result<f64> {
        self.check_symbols(symbols)?;
        if symbols.len() <= PLAIN_PRODUCT_MAX_LEN {
            let mut v = self.chain.stationary().to_vec();
            for &x in symbols {
                v = self.transfer(x).mat_vec(&v);
            }
            Ok(v.iter().sum())
        } else {
            match self.log_probability(symbols) {
                Ok(logp) => Ok(logp.exp()),
                Err(Error::Numerical(_)) => Ok(0.0),
                Err(e) => Err(e),
            }
        }
    }

    /// Natural log of the sequence probability, accumulated with per-step
    /// renormalization of the running vector. Errors on an exactly
    /// zero-probability sequence.
    pub fn log_probability(&self, symbols: &[u8]) -> Result<f64> {
        self.check_symbols(symbols)?;
        let mut v = self.chain.stationary().to_vec();
        let mut logp = 0.0;
        for &x in symbols {
            v = self.transfer(x).mat_vec(&v);
            let s: f64 = v.iter().sum();
            if s <= 0.0 {
                return Err(Error::Numerical(
                    "zero-probability sequence encountered".into(),
                ));
            }
            logp += s.ln();
            let inv = 1.0 / s;
            for vi in &mut v {
                *vi *= inv;
            }
        }
        Ok(logp)
    }

    /// Sum of `P` over all `M^N` sequences of length `N`; a normalization
    /// check on the enumeration machinery (stochasticity forces it to 1).
    pub fn sum_over_sequences(&self, n: usize) -> Result<f64> {
        let m = self.alphabet_size() as u128;
        if n == 0 {
            return Err(Error::Validation("length must be positive".into()));
        }
        let total = m.checked_pow(n as u32).ok_or_else(|| {
            Error::Resource(format!("M^N overflows for N = {n}"))
        })?;
        if total > ENUMERATION_CAP {
            return Err(Error::Resource(format!(
                "M^N = {total} exceeds the enumeration cap {ENUMERATION_CAP}"
            )));
        }
        let st = self.chain.stationary().to_vec();
        Ok(self.sum_recursive(&st, n))
    }

    fn sum_recursive(&self, v: &[f64], remaining: usize) -> f64 {
        if remaining == 0 {
            return v.iter().sum();
        }
        let mut acc = 0.0;
        for t in &self.transfer {
            let next = t.mat_vec(v);
            acc += self.sum_recursive(&next, remaining - 1);
        }
        acc
    }

    /// Sample an observed sequence: `s_0` from the stationary distribution,
    /// `s_k` from `p(.|s_{k-1})`, `x_k` from `pi(.|s_k)`. Deterministic for
    /// a given seed.
    pub fn simulate(&self, length: usize, seed: u64) -> Result<ObservedSequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.simulate_with(length, &mut rng)
    }

    /// As [`Self::simulate`] with an externally provided generator (used for
    /// per-sample derived streams in Monte Carlo loops).
    pub fn simulate_with(&self, length: usize, rng: &mut ChaCha8Rng) -> Result<ObservedSequence> {
        if length == 0 {
            return Err(Error::Validation("simulated length must be positive".into()));
        }
        let l = self.num_states();
        let mut state = sample_index(self.chain.stationary(), rng);
        let mut symbols = Vec::with_capacity(length);
        let mut column = vec![0.0; l.max(self.transfer.len())];
        for _ in 0..length {
            for i in 0..l {
                column[i] = self.chain.transition().get(i, state);
            }
            state = sample_index(&column[..l], rng);
            let m = self.transfer.len();
            for x in 0..m {
                column[x] = self.channel.get(x, state);
            }
            let x = sample_index(&column[..m], rng);
            symbols.push((x + 1) as u8);
        }
        ObservedSequence::new(symbols, self.alphabet_size())
    }
}

/// Uniform f64 in [0, 1) from the top 53 bits of a u64 draw.
fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from a probability vector.
fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = uniform_f64(rng);
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Change-point recoding of a binary sequence (symbols 1/2, time order):
/// the recoded last symbol differs from the original last symbol, and
/// moving backwards, consecutive recoded symbols are equal exactly where
/// the original consecutive symbols differ.
///
/// Under this map, `P(x; q, eps) = P(recoded(x); 1-q, eps)` for the binary
/// symmetric model. Test utility.
pub fn recode_change_points(symbols: &[u8]) -> Vec<u8> {
    let n = symbols.len();
    let mut out = vec![0u8; n];
    if n == 0 {
        return out;
    }
    let flip = |x: u8| 3 - x;
    out[n - 1] = flip(symbols[n - 1]);
    for i in (0..n - 1).rev() {
        out[i] = if symbols[i] == symbols[i + 1] {
            flip(out[i + 1])
        } else {
            out[i + 1]
        };
    }
    out
}

/// All `M^n` symbol sequences of length `n` in lexicographic order.
/// Shared by exhaustive symmetry tests and brute-force oracles.
pub fn all_sequences(alphabet: u8, n: usize) -> Vec<Vec<u8>> {
    let m = alphabet as usize;
    let total = m.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![1u8; n];
    loop {
        out.push(cur.clone());
        // Increment like an odometer.
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < alphabet {
                cur[i] += 1;
                for c in &mut cur[i + 1..] {
                    *c = 1;
                }
                break;
            }
        }
    }
}
