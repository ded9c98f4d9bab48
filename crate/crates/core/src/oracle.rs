//! Independent ground-truth machinery: brute-force block entropies,
//! entropy bounds, and Monte Carlo estimators of the entropy rate through
//! the Lyapunov exponent of the transfer-matrix product.
//!
//! Nothing here touches the cycle expansion, so these results cross-check
//! it from the outside.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::eigen;
use crate::error::{Error, Result};
use crate::hmp::HmpModel;
use crate::markov::xlnx;
use crate::matrix::Matrix;

/// Default cap on `M^N` for exact block-entropy enumeration.
const BLOCK_ENUM_CAP: u128 = 1 << 22;
/// Longest product evaluated without per-step rescaling.
const PLAIN_PRODUCT_MAX_LEN: usize = 64;

/// Exact block entropies `H(1)..H(N_max)` in nats, plus the derived
/// innovation and per-step columns.
#[derive(Debug, Clone)]
pub struct BlockEntropyTable {
    h: Vec<f64>,
}

impl BlockEntropyTable {
    pub fn n_max(&self) -> usize {
        self.h.len()
    }

    /// `H(n)` for `n` in `1..=n_max`.
    pub fn block(&self, n: usize) -> f64 {
        self.h[n - 1]
    }

    /// Innovation entropy `h(n) = H(n) - H(n-1)`, with `H(0) = 0`.
    pub fn innovation(&self, n: usize) -> f64 {
        if n == 1 {
            self.h[0]
        } else {
            self.h[n - 1] - self.h[n - 2]
        }
    }

    /// Per-step entropy `H(n)/n`.
    pub fn per_step(&self, n: usize) -> f64 {
        self.h[n - 1] / n as f64
    }

    /// Largest violation of the monotonicity chain
    /// `H(n)/n >= h(n) >= h(n+1)` together with `H(n)/n` non-increasing
    /// and the concavity bound `H(n+1) <= 2H(n) - H(n-1)`. Zero (up to
    /// roundoff) for a valid table.
    pub fn chain_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for n in 1..=self.n_max() {
            worst = worst.max(self.innovation(n) - self.per_step(n));
            if n + 1 <= self.n_max() {
                worst = worst.max(self.innovation(n + 1) - self.innovation(n));
                worst = worst.max(self.per_step(n + 1) - self.per_step(n));
                worst = worst.max(self.block(n + 1) - (self.block(n) + self.innovation(n)));
            }
        }
        worst
    }
}

/// Exact block entropies by full enumeration of all `M^N` sequences, with
/// an incremental prefix-product stack (each node costs one matrix-vector
/// product). Parallelized over the two top levels of the prefix tree.
pub fn block_entropies(model: &HmpModel, n_max: usize) -> Result<BlockEntropyTable> {
    if n_max == 0 {
        return Err(Error::Validation("n_max must be positive".into()));
    }
    let m = model.alphabet_size() as u128;
    let total = m
        .checked_pow(n_max as u32)
        .ok_or_else(|| Error::Resource("M^N overflows".into()))?;
    if total > BLOCK_ENUM_CAP {
        return Err(Error::Resource(format!(
            "M^N = {total} exceeds the enumeration cap {BLOCK_ENUM_CAP}"
        )));
    }

    let st = model.chain().stationary().to_vec();
    let m = model.alphabet_size();

    // Depth-2 prefixes evaluated sequentially, subtrees in parallel.
    let mut prefixes: Vec<(Vec<f64>, usize)> = Vec::new(); // (vector, depth)
    let mut acc0 = vec![0.0; n_max + 1];
    for x1 in 1..=m {
        let v1 = model.transfer(x1).mat_vec(&st);
        acc0[1] += xlnx(v1.iter().sum());
        if n_max == 1 {
            continue;
        }
        for x2 in 1..=m {
            let v2 = model.transfer(x2).mat_vec(&v1);
            acc0[2] += xlnx(v2.iter().sum());
            if n_max > 2 {
                prefixes.push((v2, 2));
            }
        }
    }

    let partials: Vec<Vec<f64>> = prefixes
        .par_iter()
        .map(|(v, depth)| {
            let mut acc = vec![0.0; n_max + 1];
            subtree_sums(model, v, *depth, n_max, &mut acc);
            acc
        })
        .collect();

    let mut plogp = acc0;
    for part in partials {
        for (a, b) in plogp.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(BlockEntropyTable {
        h: (1..=n_max).map(|n| -plogp[n]).collect(),
    })
}

fn subtree_sums(model: &HmpModel, v: &[f64], depth: usize, n_max: usize, acc: &mut [f64]) {
    if depth == n_max {
        return;
    }
    for x in 1..=model.alphabet_size() {
        let next = model.transfer(x).mat_vec(v);
        let p: f64 = next.iter().sum();
        if p > 0.0 {
            acc[depth + 1] += xlnx(p);
            subtree_sums(model, &next, depth + 1, n_max, acc);
        }
    }
}

/// Entropy-rate bracket: the conditional entropy of the next observation
/// given the hidden state from below, given the previous observation from
/// above.
///
/// Lower: `H(X_2|S_1)` with `Pr(X_2 = x | S_1 = s) = sum_s' T(x)[s', s]`.
/// Upper: `H(X_2|X_1) = H(2) - H(1)`.
pub fn entropy_bounds(model: &HmpModel) -> Result<(f64, f64)> {
    let l = model.num_states();
    let st = model.chain().stationary();
    let mut lower = 0.0;
    for s in 0..l {
        for x in 1..=model.alphabet_size() {
            let mut c = 0.0;
            for sp in 0..l {
                c += model.transfer(x).get(sp, s);
            }
            lower -= st[s] * xlnx(c);
        }
    }
    let table = block_entropies(model, 2)?;
    let upper = table.block(2) - table.block(1);
    Ok((lower, upper))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte Carlo entropy estimate: the average of `-(1/N) ln P` over
/// simulated sequences, each probability accumulated with per-step
/// renormalization. Sample `i` draws from an independent generator stream
/// derived from `(seed, i)`, so the result does not depend on the number
/// of worker threads.
pub fn mc_entropy(model: &HmpModel, n: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::Validation("need at least two samples".into()));
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let seq = model.simulate_with(n, &mut rng)?;
            let logp = model.log_probability(seq.symbols())?;
            Ok(-logp / n as f64)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&values))
}

fn summarize(values: &[f64]) -> McEstimate {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    McEstimate { mean, stderr: (var / m).sqrt(), samples: values.len() }
}

/// Per-quantity agreement report between the three decay rates of the
/// transfer product: top singular value, spectral radius, and sequence
/// probability.
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// `-(1/N) ln sigma_0` averaged over samples.
    pub sigma_rate: McEstimate,
    /// `-(1/N) ln lambda` averaged over samples.
    pub eigen_rate: McEstimate,
    /// `-(1/N) ln P` averaged over samples.
    pub prob_rate: McEstimate,
    /// Mean absolute per-sample gaps.
    pub gap_sigma_eigen: f64,
    pub gap_eigen_prob: f64,
    pub gap_sigma_prob: f64,
    /// Samples whose product had (near-)degenerate top eigenvalue moduli
    /// while the singular values stayed separated; on such samples the
    /// top singular value and the spectral radius need not agree.
    pub degenerate_samples: usize,
    /// Sub-additivity violations of `ln sigma_0` across a random split of
    /// each sampled product (should be zero).
    pub subadditivity_violations: usize,
}

/// Rescaled product of transfer matrices along a sequence: returns the
/// normalized matrix and the accumulated log scale, so that the true
/// product is `exp(log_scale) * matrix`.
fn scaled_product(model: &HmpModel, symbols: &[u8]) -> Result<(Matrix, f64)> {
    let mut prod = model.transfer(symbols[0]).clone();
    let mut log_scale = 0.0;
    let rescale = symbols.len() > PLAIN_PRODUCT_MAX_LEN;
    for &x in &symbols[1..] {
        prod = model.transfer(x).matmul(&prod)?;
        if rescale {
            let norm = prod.max_abs();
            if norm == 0.0 {
                return Err(Error::Numerical("zero transfer product".into()));
            }
            log_scale += norm.ln();
            prod = prod.scale(1.0 / norm);
        }
    }
    Ok((prod, log_scale))
}

/// Compare, sample by sample, the decay rates of the top singular value,
/// the spectral radius, and the probability of simulated sequences; checks
/// sub-additivity of `ln sigma_0` on a random split of each product.
///
/// For sequence lengths up to 64 the product is formed without rescaling;
/// longer products renormalize every step and track the log factors.
pub fn mc_lyapunov_vs_spectral(
    model: &HmpModel,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<LyapunovReport> {
    if n < 2 {
        return Err(Error::Validation("sequence length must be at least 2".into()));
    }
    if samples < 2 {
        return Err(Error::Validation("need at least two samples".into()));
    }

    struct SampleOut {
        sigma: f64,
        eigen: f64,
        prob: f64,
        degenerate: bool,
        subadd_violation: bool,
    }

    let outs: Vec<SampleOut> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<SampleOut> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let seq = model.simulate_with(n, &mut rng)?;
            let symbols = seq.symbols();

            let (prod, log_scale) = scaled_product(model, symbols)?;
            let sv = eigen::singular_values(&prod)?;
            let moduli = eigen::eigen_moduli(&prod)?;
            let sigma = -(sv[0].ln() + log_scale) / n as f64;
            let eig = -(moduli[0].ln() + log_scale) / n as f64;
            let prob = -model.log_probability(symbols)? / n as f64;

            let degenerate = moduli.len() > 1
                && (moduli[0] - moduli[1]).abs() <= 1e-6 * moduli[0].max(1e-300)
                && (sv[0] - sv[1]).abs() > 1e-6 * sv[0].max(1e-300);

            // Split sub-additivity: sigma_0(full) <= sigma_0(left) sigma_0(right).
            let split = 1 + (i % (n - 1));
            let (left, llog) = scaled_product(model, &symbols[..split])?;
            let (right, rlog) = scaled_product(model, &symbols[split..])?;
            let lhs = sv[0].ln() + log_scale;
            let rhs = eigen::singular_values(&left)?[0].ln()
                + llog
                + eigen::singular_values(&right)?[0].ln()
                + rlog;
            let subadd_violation = lhs > rhs + 1e-9;

            Ok(SampleOut { sigma, eigen: eig, prob, degenerate, subadd_violation })
        })
        .collect::<Result<_>>()?;

    let sigma: Vec<f64> = outs.iter().map(|o| o.sigma).collect();
    let eigenv: Vec<f64> = outs.iter().map(|o| o.eigen).collect();
    let prob: Vec<f64> = outs.iter().map(|o| o.prob).collect();
    let mean_abs = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
    };
    Ok(LyapunovReport {
        gap_sigma_eigen: mean_abs(&sigma, &eigenv),
        gap_eigen_prob: mean_abs(&eigenv, &prob),
        gap_sigma_prob: mean_abs(&sigma, &prob),
        sigma_rate: summarize(&sigma),
        eigen_rate: summarize(&eigenv),
        prob_rate: summarize(&prob),
        degenerate_samples: outs.iter().filter(|o| o.degenerate).count(),
        subadditivity_violations: outs.iter().filter(|o| o.subadd_violation).count(),
    })
}
