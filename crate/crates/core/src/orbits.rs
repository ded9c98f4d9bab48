//! Periodic-orbit index sets: aperiodic necklaces over an `M`-letter
//! alphabet, one representative per cyclic equivalence class.
//!
//! Aperiodic necklace classes are in bijection with Lyndon words, so
//! enumeration runs Duval's iteration (amortized linear time) and the
//! canonical representative of each class is the Lyndon word itself, i.e.
//! the lexicographically smallest rotation. The count at length `p` is the
//! Moebius necklace count `(1/p) sum_{d|p} mu(d) M^(p/d)`.

use crate::eigen::spectral_radius;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Enumeration is refused when `M^K` exceeds this.
const ORBIT_ENUMERATION_CAP: u128 = 1 << 24;
/// Word cap for the brute-force side of the consistency identity.
const ZM_CAP: u128 = 1 << 18;

/// One aperiodic necklace class, stored in canonical (Lyndon) form with
/// letters in `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orbit {
    letters: Vec<u8>,
}

impl Orbit {
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Lexicographically smallest rotation of an arbitrary word; used to
    /// canonicalize external representatives for comparison.
    pub fn canonical_rotation(word: &[u8]) -> Vec<u8> {
        let n = word.len();
        let mut best = word.to_vec();
        let mut rot = word.to_vec();
        for _ in 1..n {
            rot.rotate_left(1);
            if rot < best {
                best.clone_from(&rot);
            }
        }
        best
    }

    /// True when no rotation by `0 < k < p` maps the word to itself.
    pub fn is_aperiodic(word: &[u8]) -> bool {
        let p = word.len();
        for d in 1..p {
            if p % d != 0 {
                continue;
            }
            if (0..p).all(|i| word[i] == word[i % d]) {
                return false;
            }
        }
        true
    }
}

/// All aperiodic necklace classes up to a maximum length, grouped by
/// length, deterministically ordered (by length, then lexicographic
/// canonical form).
#[derive(Debug, Clone)]
pub struct OrbitSet {
    alphabet: u8,
    max_len: usize,
    by_length: Vec<Vec<Orbit>>,
}

impl OrbitSet {
    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Orbits of one length (1-based `p`).
    pub fn of_length(&self, p: usize) -> &[Orbit] {
        &self.by_length[p - 1]
    }

    /// All orbits in deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = &Orbit> {
        self.by_length.iter().flatten()
    }

    pub fn total(&self) -> usize {
        self.by_length.iter().map(Vec::len).sum()
    }
}

/// Enumerate the orbit classes for all lengths `p <= max_len` over the
/// alphabet `1..=alphabet`.
pub fn enumerate_orbits(alphabet: u8, max_len: usize) -> Result<OrbitSet> {
    if alphabet < 2 {
        return Err(Error::Validation("alphabet size must be at least 2".into()));
    }
    if max_len < 1 {
        return Err(Error::Validation("maximum orbit length must be at least 1".into()));
    }
    let work = (alphabet as u128)
        .checked_pow(max_len as u32)
        .ok_or_else(|| Error::Resource("M^K overflows".into()))?;
    if work > ORBIT_ENUMERATION_CAP {
        return Err(Error::Resource(format!(
            "M^K = {work} exceeds the enumeration cap {ORBIT_ENUMERATION_CAP}"
        )));
    }

    let mut by_length: Vec<Vec<Orbit>> = vec![Vec::new(); max_len];
    // Duval's iteration over Lyndon words of length <= max_len, 0-based
    // letters internally.
    let mut w: Vec<u8> = vec![0];
    loop {
        if w.len() <= max_len {
            by_length[w.len() - 1].push(Orbit {
                letters: w.iter().map(|&c| c + 1).collect(),
            });
        }
        let t = w.len();
        while w.len() < max_len {
            let c = w[w.len() - t];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == alphabet - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    Ok(OrbitSet { alphabet, max_len, by_length })
}

/// Moebius count of aperiodic necklaces of length `p` over `m` letters:
/// `(1/p) sum_{d|p} mu(d) m^(p/d)`.
pub fn necklace_count(m: u64, p: u64) -> u64 {
    let mut total: i128 = 0;
    for d in 1..=p {
        if p % d != 0 {
            continue;
        }
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        total += mu as i128 * (m as i128).pow((p / d) as u32);
    }
    (total / p as i128) as u64
}

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut count = 0u32;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            n /= f;
            if n % f == 0 {
                return 0; // squared factor
            }
            count += 1;
        }
        f += 1;
    }
    if n > 1 {
        count += 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Result of the power-sum consistency identity between the full word sum
/// and the orbit decomposition.
#[derive(Debug, Clone, Copy)]
pub struct ZmReport {
    /// Brute force: sum over all `M^m` words of the spectral radius of the
    /// corresponding matrix product.
    pub word_sum: f64,
    /// Orbit route: `sum_{p|m} sum_{Per(p)} p * lambda^(m/p)`.
    pub orbit_sum: f64,
    pub relative_error: f64,
    pub consistent: bool,
}

/// Check, on seeded random non-negative matrices, that summing the
/// spectral radius over all `M^m` length-`m` products equals the orbit
/// decomposition `sum_{p|m} sum_{Per(p)} p * lambda_orbit^(m/p)`.
pub fn zm_consistency(alphabet: u8, m: usize, dim: usize, seed: u64) -> Result<ZmReport> {
    let work = (alphabet as u128)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::Resource("M^m overflows".into()))?;
    if work > ZM_CAP {
        return Err(Error::Resource(format!(
            "M^m = {work} exceeds the word cap {ZM_CAP}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats: Vec<Matrix> = (0..alphabet)
        .map(|_| {
            let data: Vec<f64> = (0..dim * dim)
                .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
                .collect();
            Matrix::new(dim, dim, data)
        })
        .collect::<Result<_>>()?;
    zm_consistency_for(&mats, m)
}

/// The same identity for caller-supplied matrices.
pub fn zm_consistency_for(mats: &[Matrix], m: usize) -> Result<ZmReport> {
    let alphabet = mats.len() as u8;
    // Brute force over all words.
    let mut word_sum = 0.0;
    let mut word = vec![0usize; m];
    loop {
        let mut prod = mats[word[0]].clone();
        for &c in &word[1..] {
            prod = prod.matmul(&mats[c])?;
        }
        word_sum += spectral_radius(&prod)?;
        // Odometer increment.
        let mut i = m;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if word[i] + 1 < alphabet as usize {
                word[i] += 1;
                for c in &mut word[i + 1..] {
                    *c = 0;
                }
                break;
            }
            if i == 0 {
                word.clear();
            }
        }
        if word.is_empty() {
            break;
        }
    }

    // Orbit route.
    let orbits = enumerate_orbits(alphabet, m)?;
    let mut orbit_sum = 0.0;
    for p in 1..=m {
        if m % p != 0 {
            continue;
        }
        for orbit in orbits.of_length(p) {
            let mut prod = mats[(orbit.letters()[0] - 1) as usize].clone();
            for &c in &orbit.letters()[1..] {
                prod = prod.matmul(&mats[(c - 1) as usize])?;
            }
            let lam = spectral_radius(&prod)?;
            orbit_sum += p as f64 * lam.powf((m / p) as f64);
        }
    }

    let scale = word_sum.abs().max(orbit_sum.abs()).max(1e-300);
    let relative_error = (word_sum - orbit_sum).abs() / scale;
    Ok(ZmReport {
        word_sum,
        orbit_sum,
        relative_error,
        consistent: relative_error < 1e-9,
    })
}
