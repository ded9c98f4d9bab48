//! Moment-generating function via zero tracking of the inverse
//! zeta-function, and Chernoff rate functions for atypical sequences.
//!
//! The zeta-function vanishes at `z = 1/Lambda(n)`. Tracking that zero as
//! `n` moves away from 1 (where the zero sits at `z = 1`) yields
//! `Lambda(n)`; the rate functions are Legendre-type maximizations of
//! `-ln Lambda(n) + (1 - n)(1 +- eta) h` over `n`.

use crate::dual::DualScalar;
use crate::error::{Error, Result};
use crate::hmp::HmpModel;
use crate::zeta::{self, OrbitWeights};

/// A one-parameter family of polynomials in `z`: coefficients at a given
/// exponent `n`, each carrying its n-derivative. Root tracking and rate
/// functions work against this interface, so the truncated cycle expansion
/// and exactly summed closed forms share the same machinery.
pub trait ZetaFamily: Send + Sync {
    fn coefficients(&self, n: f64) -> Vec<DualScalar>;
}

/// The truncated cycle expansion as a zeta family.
pub struct TruncatedZeta {
    weights: OrbitWeights,
}

impl TruncatedZeta {
    pub fn new(weights: OrbitWeights) -> Self {
        Self { weights }
    }
}

impl ZetaFamily for TruncatedZeta {
    fn coefficients(&self, n: f64) -> Vec<DualScalar> {
        zeta::zeta_polynomial(&self.weights, n).coefficients().to_vec()
    }
}

/// Wrap a closure as a zeta family (used by tests and closed forms).
pub struct FnFamily<F>(pub F);

impl<F> ZetaFamily for FnFamily<F>
where
    F: Fn(f64) -> Vec<DualScalar> + Send + Sync,
{
    fn coefficients(&self, n: f64) -> Vec<DualScalar> {
        (self.0)(n)
    }
}

const NEWTON_MAX_ITERS: usize = 100;
const NEWTON_TOL: f64 = 1e-13;

/// Newton iteration on the value part of a dual-coefficient polynomial.
/// Returns the root together with `d ln Lambda / dn = -z'/z` there.
fn newton_root(coeffs: &[DualScalar], z0: f64) -> Result<(f64, f64)> {
    let mut z = z0;
    for _ in 0..NEWTON_MAX_ITERS {
        let mut value = DualScalar::ZERO;
        let mut dz = 0.0;
        for &c in coeffs.iter().rev() {
            dz = dz * z + value.value;
            value = value * DualScalar::constant(z) + c;
        }
        if !value.value.is_finite() || !dz.is_finite() {
            return Err(Error::Tracking(format!(
                "non-finite polynomial evaluation at z = {z}"
            )));
        }
        if dz.abs() < 1e-300 {
            return Err(Error::Tracking(format!(
                "vanishing derivative at z = {z}; root may have collided \
                 with a complex pair"
            )));
        }
        let step = value.value / dz;
        z -= step;
        if step.abs() <= NEWTON_TOL * z.abs().max(1.0) {
            // Converged; assemble the n-derivative of the root by implicit
            // differentiation: z'(n) = -xi_n / xi_z.
            let mut value = DualScalar::ZERO;
            let mut dzv = 0.0;
            for &c in coeffs.iter().rev() {
                dzv = dzv * z + value.value;
                value = value * DualScalar::constant(z) + c;
            }
            if dzv.abs() < 1e-300 {
                return Err(Error::Tracking("degenerate root derivative".into()));
            }
            let zprime = -value.deriv / dzv;
            if z <= 0.0 {
                return Err(Error::Tracking(format!(
                    "root tracked to non-positive z = {z}"
                )));
            }
            return Ok((z, -zprime / z));
        }
    }
    Err(Error::Tracking(format!(
        "Newton iteration did not converge within {NEWTON_MAX_ITERS} steps \
         (started from z = {z0})"
    )))
}

/// One tracked point of the moment-generating function.
#[derive(Debug, Clone, Copy)]
pub struct TrackPoint {
    pub n: f64,
    /// Root `z*(n)` of the zeta family.
    pub root: f64,
    /// `Lambda(n) = 1 / z*(n)`.
    pub lambda: f64,
    /// `d ln Lambda / dn` at this point (exact, via dual coefficients).
    pub dln_lambda_dn: f64,
    /// Continuity enforcement kicked in while reaching this point, or the
    /// highest-order coefficient dominates the evaluation (truncation no
    /// longer trustworthy here).
    pub flagged: bool,
}

/// Root track of `Lambda(n)` over a grid of exponents.
pub struct LambdaTrack {
    family: Box<dyn ZetaFamily>,
    points: Vec<TrackPoint>,
}

impl LambdaTrack {
    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn min_n(&self) -> f64 {
        self.points.first().map(|p| p.n).unwrap_or(f64::NAN)
    }

    pub fn max_n(&self) -> f64 {
        self.points.last().map(|p| p.n).unwrap_or(f64::NAN)
    }

    /// Track point at exponent 1 (always present by construction).
    pub fn at_unity(&self) -> &TrackPoint {
        self.points
            .iter()
            .min_by(|a, b| {
                (a.n - 1.0)
                    .abs()
                    .partial_cmp(&(b.n - 1.0).abs())
                    .unwrap()
            })
            .expect("track is never empty")
    }

    /// `Lambda` and `d ln Lambda / dn` at an arbitrary exponent, Newton
    /// refined from the nearest tracked root.
    pub fn lambda_at(&self, n: f64) -> Result<(f64, f64)> {
        let nearest = self
            .points
            .iter()
            .min_by(|a, b| (a.n - n).abs().partial_cmp(&(b.n - n).abs()).unwrap())
            .expect("track is never empty");
        let coeffs = self.family.coefficients(n);
        let (root, dln) = newton_root(&coeffs, nearest.root)
            .map_err(|e| Error::Tracking(format!("at n = {n}: {e}")))?;
        Ok((1.0 / root, dln))
    }

    pub fn ln_lambda_at(&self, n: f64) -> Result<f64> {
        Ok(self.lambda_at(n)?.0.ln())
    }

    /// Largest violation of discrete convexity of `ln Lambda` on the grid
    /// (second differences; non-negative for a convex track).
    pub fn convexity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for w in self.points.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            let d1 = (b.lambda.ln() - a.lambda.ln()) / (b.n - a.n);
            let d2 = (c.lambda.ln() - b.lambda.ln()) / (c.n - b.n);
            let second = (d2 - d1) / (0.5 * (c.n - a.n));
            worst = worst.max(-second);
        }
        worst
    }
}

fn validate_grid(n_grid: &[f64]) -> Result<Vec<f64>> {
    if n_grid.is_empty() {
        return Err(Error::Validation("exponent grid is empty".into()));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if grid.iter().any(|&n| !n.is_finite() || n <= 0.0) {
        return Err(Error::Validation("exponent grid must be positive".into()));
    }
    if !grid.iter().any(|&n| (n - 1.0).abs() < 1e-9) {
        return Err(Error::Validation("exponent grid must include 1".into()));
    }
    for w in grid.windows(2) {
        if w[1] - w[0] > 0.05 + 1e-12 {
            return Err(Error::Validation(format!(
                "grid spacing {} exceeds 0.05 between {} and {}",
                w[1] - w[0],
                w[0],
                w[1]
            )));
        }
    }
    Ok(grid)
}

/// Track the zero of the truncated cycle expansion of a model, giving
/// `Lambda(n)` over the grid. The grid must include 1 and have spacing at
/// most 0.05.
pub fn lambda_of_n(model: &HmpModel, k: usize, n_grid: &[f64]) -> Result<LambdaTrack> {
    let weights = zeta::orbit_weights_to_order(model, k)?;
    lambda_track(Box::new(TruncatedZeta::new(weights)), n_grid)
}

/// Track the zero of an arbitrary zeta family over the grid, marching
/// outward from `n = 1` (root seeded at `z = 1`) with warm starts and
/// step-halving when a Newton jump breaks the grid-predicted continuation.
pub fn lambda_track(family: Box<dyn ZetaFamily>, n_grid: &[f64]) -> Result<LambdaTrack> {
    let grid = validate_grid(n_grid)?;
    let unity_idx = grid
        .iter()
        .position(|&n| (n - 1.0).abs() < 1e-9)
        .expect("validated grid contains 1");

    let mut points: Vec<Option<TrackPoint>> = vec![None; grid.len()];
    let first = track_point(family.as_ref(), grid[unity_idx], 1.0)?;
    points[unity_idx] = Some(first);

    // Upward march.
    let mut prev = first;
    for i in (unity_idx + 1)..grid.len() {
        let next = continue_to(family.as_ref(), prev, grid[i], 0)?;
        points[i] = Some(next);
        prev = next;
    }
    // Downward march.
    let mut prev = first;
    for i in (0..unity_idx).rev() {
        let next = continue_to(family.as_ref(), prev, grid[i], 0)?;
        points[i] = Some(next);
        prev = next;
    }

    Ok(LambdaTrack {
        family,
        points: points.into_iter().map(Option::unwrap).collect(),
    })
}

fn track_point(family: &dyn ZetaFamily, n: f64, z0: f64) -> Result<TrackPoint> {
    let coeffs = family.coefficients(n);
    let (root, dln) =
        newton_root(&coeffs, z0).map_err(|e| Error::Tracking(format!("at n = {n}: {e}")))?;
    // Truncation-dominance flag: the top coefficient contributing most of
    // the evaluation means the root left the trustworthy region.
    let top = coeffs.len() - 1;
    let top_term = coeffs[top].value.abs() * root.powi(top as i32);
    let total: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c.value.abs() * root.powi(j as i32))
        .sum();
    let flagged = top > 3 && top_term > 0.5 * total;
    Ok(TrackPoint { n, root, lambda: 1.0 / root, dln_lambda_dn: dln, flagged })
}

/// Continue the track from `prev` to exponent `n`, halving the step when
/// the converged root jumps further than half the locally predicted move.
fn continue_to(
    family: &dyn ZetaFamily,
    prev: TrackPoint,
    n: f64,
    depth: usize,
) -> Result<TrackPoint> {
    let dn = n - prev.n;
    // z' = -z * dlnLambda/dn.
    let zprime = -prev.root * prev.dln_lambda_dn;
    let predicted = prev.root + zprime * dn;
    let point = track_point(family, n, predicted)?;
    let jump = (point.root - predicted).abs();
    let allowed = 0.5 * (zprime * dn).abs().max(1e-4 * prev.root.abs().max(1.0));
    if jump > allowed && depth < 12 {
        // Subdivide: pass through the midpoint and retry.
        let mid = continue_to(family, prev, prev.n + 0.5 * dn, depth + 1)?;
        let mut end = continue_to(family, mid, n, depth + 1)?;
        end.flagged = true;
        return Ok(end);
    }
    Ok(point)
}

/// One sampled point of a rate curve.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub eta: f64,
    pub rate: f64,
    /// Exponent attaining the maximum.
    pub n_star: f64,
    /// Maximizer pinned at the search boundary.
    pub flagged: bool,
}

/// Sampled rate curve with the maximizing exponent recorded per point.
#[derive(Debug, Clone)]
pub struct RateCurve {
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    /// Largest violation of discrete convexity (non-negative result means
    /// a violation of that size exists).
    pub fn convexity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for w in self.points.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            let d1 = (b.rate - a.rate) / (b.eta - a.eta);
            let d2 = (c.rate - b.rate) / (c.eta - b.eta);
            worst = worst.max(d1 - d2);
        }
        worst
    }
}

const COARSE_SCAN_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-8;

/// Maximize a unimodal objective by coarse scan plus golden-section
/// refinement. Returns (argmax, max, pinned-at-boundary flag).
fn maximize(
    obj: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64, bool)> {
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    let step = (hi - lo) / (COARSE_SCAN_POINTS - 1) as f64;
    for i in 0..COARSE_SCAN_POINTS {
        let n = lo + step * i as f64;
        let v = obj(n)?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let pinned = best_i == 0 || best_i == COARSE_SCAN_POINTS - 1;
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let golden = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let mut fc = obj(c)?;
    let mut fd = obj(d)?;
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = obj(d)?;
        }
    }
    let n_star = 0.5 * (a + b);
    Ok((n_star, obj(n_star)?, pinned))
}

/// Rate function for atypical sequences with probability below the typical
/// scale: `f(eta) = max over n in (0,1) of
/// [-ln Lambda(n) + (1 - n)(1 + eta) h]`.
pub fn rate_function_f(track: &LambdaTrack, h: f64, eta_grid: &[f64]) -> Result<RateCurve> {
    if eta_grid.iter().any(|&e| e < 0.0) {
        return Err(Error::Validation("eta grid must be non-negative".into()));
    }
    // The maximization runs over the open interval (0, 1); the scan
    // approaches the low boundary to 1e-4 regardless of the track grid
    // (evaluation below the smallest grid point warm-starts from it).
    let lo = 1e-4;
    let hi = 1.0 - 1e-9;
    let mut points = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        let obj = |n: f64| -> Result<f64> {
            let (lambda, _) = track.lambda_at(n)?;
            Ok(-lambda.ln() + (1.0 - n) * (1.0 + eta) * h)
        };
        let (n_star, rate, pinned) = maximize(&obj, lo, hi)?;
        // Being pinned against n -> 1 is the legitimate eta -> 0 boundary;
        // only the low-n edge marks a bracket failure.
        let flagged = pinned && n_star < 0.5;
        points.push(RatePoint { eta, rate, n_star, flagged });
    }
    Ok(RateCurve { points })
}

/// Rate function for atypical sequences with probability above the typical
/// scale: `g(eta) = max over n > 1 of
/// [-ln Lambda(n) + (1 - n)(1 - eta) h]`, with the search capped at `n_cap`.
pub fn rate_function_g(
    track: &LambdaTrack,
    h: f64,
    eta_grid: &[f64],
    n_cap: f64,
) -> Result<RateCurve> {
    if eta_grid.iter().any(|&e| !(0.0..1.0).contains(&e)) {
        return Err(Error::Validation("eta grid must lie in [0, 1)".into()));
    }
    let lo = 1.0 + 1e-9;
    let hi = n_cap.min(track.max_n());
    if hi <= lo {
        return Err(Error::Validation(
            "track does not extend beyond n = 1; cannot maximize".into(),
        ));
    }
    let mut points = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        let obj = |n: f64| -> Result<f64> {
            let (lambda, _) = track.lambda_at(n)?;
            Ok(-lambda.ln() + (1.0 - n) * (1.0 - eta) * h)
        };
        let (n_star, rate, pinned) = maximize(&obj, lo, hi)?;
        // Pinned at the cap with the objective still rising is the flagged
        // condition; n -> 1 is the eta -> 0 boundary.
        let flagged = pinned && n_star > 0.5 * (lo + hi);
        points.push(RatePoint { eta, rate, n_star, flagged });
    }
    Ok(RateCurve { points })
}

/// Default search cap for the `g` maximization.
pub const DEFAULT_G_CAP: f64 = 12.0;

/// Uniform grid helper: `count` points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// An exponent grid suitable for both rate functions: `0.05..=cap` with
/// spacing 0.05, always containing 1.
pub fn default_n_grid(cap: f64) -> Vec<f64> {
    let steps = (cap / 0.05).round() as usize;
    (1..=steps).map(|i| 0.05 * i as f64).collect()
}
