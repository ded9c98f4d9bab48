//! Truncated inverse zeta-function assembled from periodic-orbit spectral
//! radii, and the entropy rate extracted from it.
//!
//! The inverse zeta-function admits a product over aperiodic necklaces,
//! `prod_p prod_{orbits of length p} (1 - z^p lambda_orbit^n)`, whose
//! power-series coefficients up to `z^K` are determined exactly by orbits
//! of length at most `K`. Truncating there gives a polynomial whose
//! coefficients pair off into small differences; the entropy rate is the
//! implicit derivative `-d_n/d_z` of the polynomial at `z = 1, n = 1`.

use rayon::prelude::*;

use crate::dual::DualScalar;
use crate::eigen;
use crate::error::{Error, Result};
use crate::hmp::HmpModel;
use crate::orbits::{self, Orbit, OrbitSet};

/// Spectral radii of transfer-matrix products over an orbit set, in
/// enumeration order.
#[derive(Debug, Clone)]
pub struct OrbitWeights {
    max_len: usize,
    /// (orbit length, spectral radius) per orbit.
    entries: Vec<(usize, f64)>,
}

impl OrbitWeights {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Weight of a single listed orbit (enumeration order index).
    pub fn weight(&self, idx: usize) -> f64 {
        self.entries[idx].1
    }
}

/// Spectral radius of the transfer product along one orbit.
fn orbit_weight(model: &HmpModel, orbit: &Orbit) -> Result<f64> {
    let letters = orbit.letters();
    let mut prod = model.transfer(letters[0]).clone();
    for &c in &letters[1..] {
        prod = prod.matmul(model.transfer(c))?;
    }
    eigen::spectral_radius(&prod).map_err(|e| {
        Error::Numerical(format!("orbit {:?}: {e}", letters))
    })
}

/// Compute the weight table for every orbit in the set. The per-orbit work
/// is a stateless parallel map; results are reduced in enumeration order.
pub fn orbit_weights(model: &HmpModel, orbits: &OrbitSet) -> Result<OrbitWeights> {
    if model.alphabet_size() != orbits.alphabet() {
        return Err(Error::Dimension(format!(
            "model alphabet {} does not match orbit alphabet {}",
            model.alphabet_size(),
            orbits.alphabet()
        )));
    }
    let all: Vec<&Orbit> = orbits.iter().collect();
    let entries: Vec<(usize, f64)> = all
        .par_iter()
        .map(|orbit| orbit_weight(model, orbit).map(|w| (orbit.len(), w)))
        .collect::<Result<_>>()?;
    Ok(OrbitWeights { max_len: orbits.max_len(), entries })
}

/// Convenience: enumerate orbits up to `k` and weight them.
pub fn orbit_weights_to_order(model: &HmpModel, k: usize) -> Result<OrbitWeights> {
    let set = orbits::enumerate_orbits(model.alphabet_size(), k)?;
    orbit_weights(model, &set)
}

/// Weight table for an explicit list of factor matrices indexed by symbol
/// (symbol `x` uses `mats[x - 1]`). Lets callers drive the expansion with
/// matrices that do not come from a stochastic model.
pub fn weights_from_matrices(mats: &[crate::matrix::Matrix], k: usize) -> Result<OrbitWeights> {
    let set = orbits::enumerate_orbits(mats.len() as u8, k)?;
    let all: Vec<&Orbit> = set.iter().collect();
    let entries: Vec<(usize, f64)> = all
        .par_iter()
        .map(|orbit| -> Result<(usize, f64)> {
            let letters = orbit.letters();
            let mut prod = mats[(letters[0] - 1) as usize].clone();
            for &c in &letters[1..] {
                prod = prod.matmul(&mats[(c - 1) as usize])?;
            }
            let lam = eigen::spectral_radius(&prod)
                .map_err(|e| Error::Numerical(format!("orbit {:?}: {e}", letters)))?;
            Ok((orbit.len(), lam))
        })
        .collect::<Result<_>>()?;
    Ok(OrbitWeights { max_len: k, entries })
}

/// Coefficients `c_0..c_K` of the truncated inverse zeta-function at a
/// fixed exponent `n`, each carrying its derivative with respect to `n`.
///
/// `c_0 = 1`; `c_1 = -sum_l lambda_l^n`; higher coefficients pair products
/// of orbit weights against longer-orbit weights.
#[derive(Debug, Clone)]
pub struct ZetaPolynomial {
    order: usize,
    n: f64,
    coeffs: Vec<DualScalar>,
}

impl ZetaPolynomial {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exponent(&self) -> f64 {
        self.n
    }

    pub fn coefficient(&self, k: usize) -> DualScalar {
        self.coeffs[k]
    }

    pub fn coefficients(&self) -> &[DualScalar] {
        &self.coeffs
    }

    /// Coefficient values only (no derivative part).
    pub fn coefficient_values(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.value).collect()
    }

    /// Evaluate the polynomial and its n-derivative at `z`.
    pub fn eval(&self, z: f64) -> DualScalar {
        let mut acc = DualScalar::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * DualScalar::constant(z) + c;
        }
        acc
    }

    /// d/dz of the value part at `z`.
    pub fn eval_dz(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..=self.order).rev() {
            acc = acc * z + k as f64 * self.coeffs[k].value;
        }
        acc
    }
}

/// Expand the orbit product `prod (1 - z^p lambda^n)` keeping powers
/// `z^0..z^K`. The reduction order is the deterministic enumeration order,
/// so repeated calls are bit-identical.
pub fn zeta_polynomial(weights: &OrbitWeights, n: f64) -> ZetaPolynomial {
    let k = weights.max_len();
    let mut coeffs = vec![DualScalar::ZERO; k + 1];
    coeffs[0] = DualScalar::ONE;
    for &(p, lambda) in weights.entries() {
        let w = DualScalar::pow_base(lambda, n);
        for j in (p..=k).rev() {
            let delta = w * coeffs[j - p];
            coeffs[j] -= delta;
        }
    }
    ZetaPolynomial { order: k, n, coeffs }
}

/// A convergence warning about one transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceWarning {
    /// The subdominant eigenvalue modulus is close to the spectral radius
    /// (slow pairing of expansion terms). Carries `(symbol, ratio)`.
    SubdominantRatio(u8, f64),
    /// The spectral radius itself is close to 1 (convergence radius of the
    /// expansion approaches the evaluation point). Carries `(symbol, radius)`.
    RadiusNearOne(u8, f64),
}

impl std::fmt::Display for ConvergenceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvergenceWarning::SubdominantRatio(x, r) => write!(
                f,
                "T({x}): subdominant/dominant eigenvalue ratio {r:.3} is close to 1; \
                 more expansion terms needed"
            ),
            ConvergenceWarning::RadiusNearOne(x, l) => write!(
                f,
                "T({x}): spectral radius {l:.3} is close to 1; \
                 more expansion terms needed"
            ),
        }
    }
}

/// Thresholds for [`convergence_warnings`]. Both default to 0.9; the
/// degeneracy tolerance decides when the top modulus counts as doubly
/// degenerate so the comparison moves to the next modulus down.
#[derive(Debug, Clone, Copy)]
pub struct WarningThresholds {
    pub ratio: f64,
    pub radius: f64,
    pub degeneracy_tol: f64,
}

impl Default for WarningThresholds {
    fn default() -> Self {
        Self { ratio: 0.9, radius: 0.9, degeneracy_tol: 1e-9 }
    }
}

/// Qualitative convergence screening of the cycle expansion: warns when,
/// for any symbol, the subdominant-to-dominant eigenvalue ratio of `T(x)`
/// exceeds the threshold (skipping over exactly degenerate top moduli), or
/// when the spectral radius of `T(x)` is close to 1.
pub fn convergence_warnings(
    model: &HmpModel,
    thresholds: &WarningThresholds,
) -> Result<Vec<ConvergenceWarning>> {
    let mut warnings = Vec::new();
    for x in 1..=model.alphabet_size() {
        let moduli = eigen::eigen_moduli(model.transfer(x))?;
        let lambda = moduli[0];
        if lambda > thresholds.radius {
            warnings.push(ConvergenceWarning::RadiusNearOne(x, lambda));
        }
        if lambda <= 0.0 {
            continue;
        }
        // Skip moduli exactly degenerate with the top one.
        let mut idx = 1;
        while idx < moduli.len()
            && (lambda - moduli[idx]).abs() <= thresholds.degeneracy_tol * lambda
        {
            idx += 1;
        }
        if idx < moduli.len() {
            let ratio = moduli[idx] / lambda;
            if ratio > thresholds.ratio {
                warnings.push(ConvergenceWarning::SubdominantRatio(x, ratio));
            }
        }
    }
    Ok(warnings)
}

/// Entropy estimate from the truncated cycle expansion, with diagnostics.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    /// Entropy rate estimate in nats.
    pub entropy: f64,
    /// Truncation order used.
    pub order: usize,
    /// `|xi_K(1,1)|`; the zero of the full zeta-function at `z = 1` makes
    /// this a direct truncation residual.
    pub residual_at_one: f64,
    /// `|phi_K| / |phi_{K-1}|`, the tail ratio of the last two kept
    /// coefficients.
    pub tail_ratio: f64,
    /// d/dz of the truncation at `(1, 1)` (the implicit-derivative
    /// denominator).
    pub dz_at_one: f64,
    pub warnings: Vec<ConvergenceWarning>,
}

/// Entropy rate via the cycle expansion truncated at order `k`:
/// `h = -(d xi/d n) / (d xi/d z)` at `z = 1, n = 1`.
pub fn entropy_cycle_expansion(model: &HmpModel, k: usize) -> Result<EntropyEstimate> {
    let weights = orbit_weights_to_order(model, k)?;
    entropy_from_weights(model, &weights)
}

/// As [`entropy_cycle_expansion`] with a precomputed weight table.
pub fn entropy_from_weights(
    model: &HmpModel,
    weights: &OrbitWeights,
) -> Result<EntropyEstimate> {
    let k = weights.max_len();
    if k < 2 {
        return Err(Error::Validation(
            "cycle expansion needs truncation order at least 2".into(),
        ));
    }
    let poly = zeta_polynomial(weights, 1.0);
    let at_one = poly.eval(1.0);
    let dz = poly.eval_dz(1.0);
    if dz.abs() < 1e-12 {
        return Err(Error::Numerical(format!(
            "degenerate derivative: d(xi)/dz = {dz:.3e} at (z, n) = (1, 1)"
        )));
    }
    let entropy = -at_one.deriv / dz;
    let phi_k = poly.coefficient(k).value.abs();
    let phi_km1 = poly.coefficient(k - 1).value.abs();
    let tail_ratio = if phi_km1 > 0.0 { phi_k / phi_km1 } else { f64::INFINITY };
    let warnings = convergence_warnings(model, &WarningThresholds::default())?;
    Ok(EntropyEstimate {
        entropy,
        order: k,
        residual_at_one: at_one.value.abs(),
        tail_ratio,
        dz_at_one: dz,
        warnings,
    })
}
