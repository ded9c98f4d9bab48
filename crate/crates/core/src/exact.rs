//! Closed-form reference results for the exactly solvable aggregated
//! families and the small-noise regime of the binary symmetric model.
//!
//! Case 1 (`r2 = 0`, `r1 = q1 + q2`) sums the cycle expansion into a
//! Lerch-transcendent form; case 2 (`q1 + q2 = 1`, `r1 + r2 = 1`) sums it
//! into a rational form whose cleared-denominator version is a cubic in
//! `z`. Both give exact entropies, and the case-2 cubic doubles as an
//! exactly tractable zeta family for root tracking.

use crate::dual::DualScalar;
use crate::error::{Error, Result};
use crate::genfun::ZetaFamily;

const LERCH_TAIL_TOL: f64 = 1e-14;
const LERCH_TERM_CAP: usize = 10_000_000;
const LERCH_Y_MARGIN: f64 = 1e-9;

fn ln_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        0.0
    }
}

/// Result of a Lerch-type series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LerchEval {
    pub value: f64,
    pub terms: usize,
}

/// `Phi(y, -n, b) = sum_{k>=0} (k + b)^n y^k` for `|y| < 1`, summed until
/// the geometric tail bound drops below `1e-14`. `b = 0` is allowed with
/// the `0^n = 0` convention for the first term (`n > 0`).
pub fn lerch_phi(y: f64, n: f64, b: f64) -> Result<LerchEval> {
    if b < 0.0 {
        return Err(Error::Validation(format!("lerch parameter b = {b} must be >= 0")));
    }
    sum_lerch_series(y, b, |kb| if kb > 0.0 { kb.powf(n) } else if n == 0.0 { 1.0 } else { 0.0 }, n.max(0.0))
}

/// The logarithmic companion series
/// `sum_{k>=0} ln(1/(k + b)) (k + b) y^k`, which is the derivative of the
/// Lerch series with respect to its order, taken at order `-1`.
pub fn lerch_phi_log_deriv(y: f64, b: f64) -> Result<LerchEval> {
    if b < 0.0 {
        return Err(Error::Validation(format!("lerch parameter b = {b} must be >= 0")));
    }
    // Term growth is (k+b) ln(k+b); a power-2 envelope dominates it.
    sum_lerch_series(y, b, |kb| if kb > 0.0 { -kb.ln() * kb } else { 0.0 }, 2.0)
}

/// Shared summation: `sum term(k + b) y^k` with a ratio bound
/// `|y| ((k+b+1)/(k+b))^growth_pow` controlling the tail.
fn sum_lerch_series(
    y: f64,
    b: f64,
    term: impl Fn(f64) -> f64,
    growth_pow: f64,
) -> Result<LerchEval> {
    if y.abs() > 1.0 - LERCH_Y_MARGIN {
        return Err(Error::Convergence(format!(
            "series argument |y| = {} too close to 1; more than {LERCH_TERM_CAP} terms \
             would be needed",
            y.abs()
        )));
    }
    let mut sum = 0.0;
    let mut ypow = 1.0;
    for k in 0..LERCH_TERM_CAP {
        let kb = k as f64 + b;
        let t = term(kb) * ypow;
        sum += t;
        ypow *= y;
        if k >= 4 && kb >= 1.0 {
            let ratio = y.abs() * ((kb + 1.0) / kb).powf(growth_pow);
            if ratio < 1.0 {
                let tail = t.abs() * ratio / (1.0 - ratio);
                if tail < LERCH_TAIL_TOL {
                    return Ok(LerchEval { value: sum, terms: k + 1 });
                }
            }
        }
    }
    Err(Error::Convergence(format!(
        "series did not reach tail tolerance within {LERCH_TERM_CAP} terms (|y| = {})",
        y.abs()
    )))
}

/// Parameters of the first exactly solvable aggregated family
/// (`r2 = 0`, `r1 = q1 + q2`).
#[derive(Debug, Clone, Copy)]
pub struct Case1Params {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl Case1Params {
    pub fn new(p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("q1", q1), ("q2", q2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} outside [0,1]")));
            }
        }
        if p1 + p2 > 1.0 + 1e-15 {
            return Err(Error::Validation(format!("p1 + p2 = {} exceeds 1", p1 + p2)));
        }
        if q1 + q2 > 1.0 + 1e-15 {
            return Err(Error::Validation(format!("q1 + q2 = {} exceeds 1", q1 + q2)));
        }
        if q1 + q2 <= 0.0 {
            return Err(Error::Validation("q1 + q2 must be positive".into()));
        }
        Ok(Self { p1, p2, q1, q2 })
    }

    /// Persistence weight of the observable symbol 1.
    fn a(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    /// Persistence weight of symbol 2 (also the series ratio).
    fn b_weight(&self) -> f64 {
        1.0 - self.q1 - self.q2
    }

    fn c_weight(&self) -> f64 {
        self.p1 * self.q1 + self.p2 * (self.q1 + self.q2)
    }

    fn d_weight(&self) -> f64 {
        self.p1 * self.q2 * (self.q1 + self.q2)
    }

    /// Lerch offset parameter.
    pub fn lerch_offset(&self) -> f64 {
        let d = self.d_weight();
        if d == 0.0 {
            return 0.0;
        }
        self.b_weight() * (self.p2 * (self.q1 + self.q2) + self.p1 * self.q1) / d
    }
}

/// Evaluate the case-1 closed-form inverse zeta-function at `(z, n)`.
/// Requires `|z (1 - q1 - q2)^n| < 1` (the series convergence disk).
pub fn exact_zeta_case1(params: &Case1Params, z: f64, n: f64) -> Result<f64> {
    let a = params.a();
    let b = params.b_weight();
    let c = params.c_weight();
    let d = params.d_weight();
    let y = b.powf(n) * z;
    let mut value = 1.0 - (a.powf(n) + b.powf(n)) * z + (a.powf(n) * b.powf(n) - c.powf(n)) * z * z;
    if d > 0.0 {
        let offset = params.lerch_offset();
        let phi_b = lerch_phi(y, n, offset)?;
        let phi_b1 = lerch_phi(y, n, offset + 1.0)?;
        value += z.powi(3) * d.powf(n) * (phi_b.value - phi_b1.value);
    }
    Ok(value)
}

/// Power-series coefficients `c_0..c_k` of the case-1 closed form in `z`,
/// as duals in `n`. Truncating here matches the generic cycle expansion of
/// the same order coefficient by coefficient.
pub fn case1_series_coeffs(params: &Case1Params, n: f64, k: usize) -> Vec<DualScalar> {
    let a = params.a();
    let b = params.b_weight();
    let c = params.c_weight();
    let d = params.d_weight();
    let mut coeffs = vec![DualScalar::ZERO; k + 1];
    coeffs[0] = DualScalar::ONE;
    if k >= 1 {
        coeffs[1] = -(DualScalar::pow_base(a, n) + DualScalar::pow_base(b, n));
    }
    if k >= 2 {
        coeffs[2] = DualScalar::pow_base(a, n) * DualScalar::pow_base(b, n)
            - DualScalar::pow_base(c, n);
    }
    if d > 0.0 {
        let offset = params.lerch_offset();
        let dn = DualScalar::pow_base(d, n);
        for j in 0..=k.saturating_sub(3) {
            let step = DualScalar::pow_base(j as f64 + offset, n)
                - DualScalar::pow_base(j as f64 + offset + 1.0, n);
            let decay = DualScalar::pow_base(b.powi(j as i32), n);
            coeffs[3 + j] = dn * step * decay;
        }
    }
    coeffs
}

/// Exact entropy rate of the case-1 family, in nats.
pub fn exact_entropy_case1(params: &Case1Params) -> Result<f64> {
    let a = params.a();
    let b = params.b_weight();
    let d = params.d_weight();
    let (p1, p2, q1, q2) = (params.p1, params.p2, params.q1, params.q2);
    let qsum = q1 + q2;
    let denom = p1 + p2 + qsum + p1 * q2 / qsum;

    let mut s = a * qsum * ln_or_zero(a);
    s += b * (p1 + p2 + p1 * q2 / qsum) * ln_or_zero(b);
    let arg3 = p1 * q2 * qsum;
    if arg3 > 0.0 {
        s += p1 * q2 * arg3.ln();
    }
    let arg4 = (p1 + p2) * q1 + p2 * q2;
    s += arg4 * ln_or_zero(arg4);
    if d > 0.0 {
        let offset = params.lerch_offset();
        let ld_b = lerch_phi_log_deriv(b, offset)?;
        let ld_b1 = lerch_phi_log_deriv(b, offset + 1.0)?;
        s += d * (ld_b.value - ld_b1.value);
    }
    Ok(-s / denom)
}

/// Parameters of the second exactly solvable aggregated family
/// (`q1 + q2 = 1`, `r1 + r2 = 1`, written with `q = q1`, `r = r1`).
#[derive(Debug, Clone, Copy)]
pub struct Case2Params {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
    pub r: f64,
}

impl Case2Params {
    pub fn new(p1: f64, p2: f64, q: f64, r: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("q", q), ("r", r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} outside [0,1]")));
            }
        }
        if p1 + p2 > 1.0 + 1e-15 {
            return Err(Error::Validation(format!("p1 + p2 = {} exceeds 1", p1 + p2)));
        }
        Ok(Self { p1, p2, q, r })
    }

    fn a(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    /// Squared spectral radius of the symbol-2 transfer matrix.
    fn e2(&self) -> f64 {
        (1.0 - self.q) * (1.0 - self.r)
    }

    fn f_weight(&self) -> f64 {
        self.p1 * self.q + self.p2 * self.r
    }

    fn g_weight(&self) -> f64 {
        self.p1 * self.r * (1.0 - self.q) + self.p2 * self.q * (1.0 - self.r)
    }
}

/// Evaluate the case-2 closed-form inverse zeta-function at `(z, n)`:
/// quadratic part plus a rational `z^3` tail. Requires
/// `|z| (1-q)^(n/2) (1-r)^(n/2) < 1` (the series convergence region).
pub fn exact_zeta_case2(params: &Case2Params, z: f64, n: f64) -> Result<f64> {
    let a = params.a();
    let e2 = params.e2();
    let en = e2.powf(0.5 * n);
    if z.abs() * en >= 1.0 - 1e-12 {
        return Err(Error::Domain(format!(
            "|z| = {} outside the convergence region |z| < {}",
            z.abs(),
            1.0 / en
        )));
    }
    let f = params.f_weight();
    let g = params.g_weight();
    let value = 1.0 - (a.powf(n) + en) * z + (a.powf(n) * en - f.powf(n)) * z * z
        + z.powi(3) / (1.0 + z * en) * (f.powf(n) * en - g.powf(n));
    Ok(value)
}

/// Power-series coefficients `c_0..c_k` of the case-2 closed form in `z`,
/// as duals in `n`.
pub fn case2_series_coeffs(params: &Case2Params, n: f64, k: usize) -> Vec<DualScalar> {
    let a = params.a();
    let e = params.e2().sqrt();
    let f = params.f_weight();
    let g = params.g_weight();
    let an = DualScalar::pow_base(a, n);
    let en = DualScalar::pow_base(e, n);
    let fnn = DualScalar::pow_base(f, n);
    let gn = DualScalar::pow_base(g, n);
    let mut coeffs = vec![DualScalar::ZERO; k + 1];
    coeffs[0] = DualScalar::ONE;
    if k >= 1 {
        coeffs[1] = -(an + en);
    }
    if k >= 2 {
        coeffs[2] = an * en - fnn;
    }
    let head = fnn * en - gn;
    for j in 0..=k.saturating_sub(3) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[3 + j] = head * DualScalar::pow_base(e.powi(j as i32), n) * sign;
    }
    coeffs
}

/// The case-2 zeta-function with its rational denominator cleared:
/// `(1 + z E^n) xi(z, n)` is the cubic
/// `1 - A^n z - (F^n + E^(2n)) z^2 + (A^n E^(2n) - G^n) z^3`.
///
/// Same zeros as the closed form on the positive axis, valid for all `z`
/// (no convergence-disk restriction), so it is the right object to
/// root-track for the moment-generating function of this family.
pub fn case2_cleared_cubic(params: &Case2Params, n: f64) -> [DualScalar; 4] {
    let a = params.a();
    let e2 = params.e2();
    let f = params.f_weight();
    let g = params.g_weight();
    let an = DualScalar::pow_base(a, n);
    let e2n = DualScalar::pow_base(e2, n);
    let fnn = DualScalar::pow_base(f, n);
    let gn = DualScalar::pow_base(g, n);
    [
        DualScalar::ONE,
        -an,
        -(fnn + e2n),
        an * e2n - gn,
    ]
}

/// The cleared case-2 cubic as a root-trackable zeta family.
pub struct Case2Cubic {
    params: Case2Params,
}

impl Case2Cubic {
    pub fn new(params: Case2Params) -> Self {
        Self { params }
    }
}

impl ZetaFamily for Case2Cubic {
    fn coefficients(&self, n: f64) -> Vec<DualScalar> {
        case2_cleared_cubic(&self.params, n).to_vec()
    }
}

/// Exact entropy rate of the case-2 family, in nats.
pub fn exact_entropy_case2(params: &Case2Params) -> f64 {
    let (p1, p2, q, r) = (params.p1, params.p2, params.q, params.r);
    let a = params.a();
    let denom = 2.0 * (p1 + p2) + q * (1.0 - p1) + r * (1.0 - p2) - q * r;
    let mut s = (q * (1.0 - r) + r) * a * ln_or_zero(a);
    let e2 = (1.0 - q) * (1.0 - r);
    if e2 > 0.0 {
        s += (p1 + p2) * e2 * e2.ln();
    }
    let arg3 = p1 * q + p2 * r;
    s += arg3 * ln_or_zero(arg3);
    let arg4 = p2 * q * (1.0 - r) + p1 * (1.0 - q) * r;
    s += arg4 * ln_or_zero(arg4);
    -s / denom
}

/// Markov entropy of the case-2 hidden chain (before lumping), in nats.
/// Always at least the lumped entropy [`exact_entropy_case2`].
pub fn markov_entropy_case2(params: &Case2Params) -> f64 {
    let (p1, p2, q, r) = (params.p1, params.p2, params.q, params.r);
    let a = params.a();
    let denom = 2.0 * (p1 + p2) + q * (1.0 - p1) + r * (1.0 - p2) - q * r;
    let xl = |x: f64| x * ln_or_zero(x);
    let s = (q * (1.0 - r) + r) * (xl(a) + xl(p1) + xl(p2))
        + ((1.0 - r) * (p1 + p2) + p1 * r) * (xl(q) + xl(1.0 - q))
        + (p2 + p1 * (1.0 - q)) * (xl(r) + xl(1.0 - r));
    -s / denom
}

/// Entropy of the binary symmetric model to second order in the
/// observation error:
/// `h = -(1-q)ln(1-q) - q ln q + 2 eps (1-2q) ln((1-q)/q)
///      - 2 eps^2 (1-2q) [ln((1-q)/q) + (1-2q)/(4(1-q)^2 q^2)]`.
///
/// Requires `q` in `(0, 1/2]`; for `q > 1/2` use the `q -> 1-q` symmetry
/// of the model explicitly.
pub fn small_noise_entropy(q: f64, eps: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::Validation(format!("q = {q} outside (0, 1/2]")));
    }
    let log_ratio = ((1.0 - q) / q).ln();
    let h0 = -(1.0 - q) * (1.0 - q).ln() - q * q.ln();
    let h1 = 2.0 * (1.0 - 2.0 * q) * log_ratio;
    let h2 = -2.0
        * (1.0 - 2.0 * q)
        * (log_ratio + (1.0 - 2.0 * q) / (4.0 * (1.0 - q).powi(2) * q * q));
    Ok(h0 + eps * h1 + eps * eps * h2)
}

/// Small-noise expansion of the cycle-expansion coefficients `phi_1..phi_4`
/// of the binary symmetric model, to second order in `eps`. The remainder
/// is `O(eps^3)` with coefficients that grow like inverse powers of `q`,
/// and `phi_k = O(eps^(k-2))` for `k >= 3`.
pub fn small_noise_phi(q: f64, eps: f64, n: f64, k: usize) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::Validation(format!("q = {q} outside (0, 1/2)")));
    }
    let w = 1.0 - 2.0 * q; // symmetric-gap parameter
    let p = 1.0 - q;
    let value = match k {
        1 => {
            -2.0 * p.powf(n) + 2.0 * eps * n * p.powf(n - 2.0) * w
                - eps * eps * n * p.powf(n - 4.0) * w * (w * (n - 1.0 - q) + q)
        }
        2 => {
            p.powf(2.0 * n) - q.powf(2.0 * n)
                - 2.0 * eps * n * w * (p.powf(2.0 * (n - 1.0)) + q.powf(2.0 * (n - 1.0)))
                - eps
                    * eps
                    * n
                    * w
                    * (q.powf(2.0 * (n - 2.0)) * (w * (q + 2.0 * n - 3.0) - q)
                        + p.powf(2.0 * (n - 2.0)) * (w * (q + 1.0 - 2.0 * n) - q))
        }
        3 => {
            2.0 * eps * n * w * w * p.powf(n - 2.0) * q.powf(2.0 * (n - 1.0))
                - eps
                    * eps
                    * n
                    * w
                    * w
                    * p.powf(n - 4.0)
                    * q.powf(2.0 * (n - 2.0))
                    * (5.0 - 3.0 * n + 4.0 * q * (3.0 * n - 5.0)
                        + 2.0 * q * q * (16.0 - 7.0 * n)
                        + 4.0 * q.powi(3) * (n - 6.0)
                        + 10.0 * q.powi(4))
        }
        4 => {
            eps * eps
                * n
                * w.powi(3)
                * p.powf(2.0 * (n - 2.0))
                * q.powf(2.0 * (n - 2.0))
                * (2.0 - 4.0 * q * (1.0 - q) - n * w)
        }
        _ => {
            return Err(Error::Validation(format!(
                "small-noise expansion covers k in 1..=4, got {k}"
            )))
        }
    };
    Ok(value)
}

/// Small-noise moment-generating function of the binary symmetric model,
/// to first order in `eps`.
pub fn small_noise_lambda(q: f64, eps: f64, n: f64) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::Validation(format!("q = {q} outside (0, 1/2)")));
    }
    let p = 1.0 - q;
    let lead = q.powf(n) + p.powf(n);
    let corr = eps * n * (1.0 - 2.0 * q) * (p.powf(2.0 * n) * q * q - p * p * q.powf(2.0 * n))
        / (q * q * p * p * (p.powf(n) + q.powf(n)));
    Ok(lead - corr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun;
    use crate::hmp::HmpModel;
    use crate::zeta;

    const TABLE_CASE1: [(f64, f64, f64, f64, f64); 2] = [
        (0.75, 0.10, 0.25, 0.20, 0.569580),
        (0.30, 0.20, 0.55, 0.10, 0.684796),
    ];
    const TABLE_CASE2: [(f64, f64, f64, f64, f64); 2] = [
        (0.1, 0.1, 0.2, 0.3, 0.528531),
        (0.2, 0.2, 0.3, 0.4, 0.659897),
    ];

    #[test]
    fn lerch_trivial_values() {
        // y = 0: only the k = 0 term.
        let v = lerch_phi(0.0, 1.7, 2.5).unwrap();
        assert!((v.value - 2.5_f64.powf(1.7)).abs() < 1e-14);
        // n = 0: geometric series, independent of b.
        let v = lerch_phi(0.5, 0.0, 9.0).unwrap();
        assert!((v.value - 2.0).abs() < 1e-12);
        // Geometric-derivative closed form: sum (k+1) y^k = (1-y)^-2.
        let v = lerch_phi(0.5, 1.0, 1.0).unwrap();
        assert!((v.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lerch_rejects_near_unit_argument() {
        assert!(matches!(
            lerch_phi(1.0 - 1e-12, 1.0, 1.0),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn case1_zeta_vanishes_at_unity() {
        for (p1, p2, q1, q2, _) in TABLE_CASE1 {
            let params = Case1Params::new(p1, p2, q1, q2).unwrap();
            let v = exact_zeta_case1(&params, 1.0, 1.0).unwrap();
            assert!(v.abs() < 1e-10, "xi(1,1) = {v}");
        }
    }

    #[test]
    fn case1_series_matches_generic_truncation() {
        let params = Case1Params::new(0.75, 0.10, 0.25, 0.20).unwrap();
        let model = HmpModel::aggregated_case1(0.75, 0.10, 0.25, 0.20).unwrap();
        let weights = zeta::orbit_weights_to_order(&model, 13).unwrap();
        for &n in &[0.8, 1.0, 1.2] {
            let generic = zeta::zeta_polynomial(&weights, n);
            let closed = case1_series_coeffs(&params, n, 13);
            for k in 0..=13 {
                assert!(
                    (generic.coefficient(k).value - closed[k].value).abs() < 1e-12,
                    "n={n}, k={k}: {} vs {}",
                    generic.coefficient(k).value,
                    closed[k].value
                );
            }
        }
    }

    #[test]
    fn case1_entropy_reproduces_reference_rows() {
        for (p1, p2, q1, q2, want) in TABLE_CASE1 {
            let params = Case1Params::new(p1, p2, q1, q2).unwrap();
            let h = exact_entropy_case1(&params).unwrap();
            assert!((h - want).abs() < 1e-5, "{h} vs {want}");
        }
    }

    #[test]
    fn case1_entropy_consistent_with_own_zeta() {
        // Cross-route: implicit derivative of the closed-form zeta by
        // central differences must reproduce the closed-form entropy.
        for (p1, p2, q1, q2, _) in TABLE_CASE1 {
            let params = Case1Params::new(p1, p2, q1, q2).unwrap();
            let d = 1e-6;
            let xi_n = (exact_zeta_case1(&params, 1.0, 1.0 + d).unwrap()
                - exact_zeta_case1(&params, 1.0, 1.0 - d).unwrap())
                / (2.0 * d);
            let xi_z = (exact_zeta_case1(&params, 1.0 + d, 1.0).unwrap()
                - exact_zeta_case1(&params, 1.0 - d, 1.0).unwrap())
                / (2.0 * d);
            let h_fd = -xi_n / xi_z;
            let h = exact_entropy_case1(&params).unwrap();
            assert!((h - h_fd).abs() < 1e-7, "{h} vs fd {h_fd}");
        }
    }

    #[test]
    fn case2_zeta_vanishes_at_unity() {
        for (p1, p2, q, r, _) in TABLE_CASE2 {
            let params = Case2Params::new(p1, p2, q, r).unwrap();
            let v = exact_zeta_case2(&params, 1.0, 1.0).unwrap();
            assert!(v.abs() < 1e-10, "xi(1,1) = {v}");
            // Cleared cubic vanishes identically there too.
            let cubic = case2_cleared_cubic(&params, 1.0);
            let at_one: f64 = cubic.iter().map(|c| c.value).sum();
            assert!(at_one.abs() < 1e-12);
        }
    }

    #[test]
    fn case2_series_matches_generic_truncation() {
        let params = Case2Params::new(0.1, 0.1, 0.2, 0.3).unwrap();
        let model = HmpModel::aggregated_case2(0.1, 0.1, 0.2, 0.3).unwrap();
        let weights = zeta::orbit_weights_to_order(&model, 13).unwrap();
        for &n in &[0.8, 1.0, 1.2] {
            let generic = zeta::zeta_polynomial(&weights, n);
            let closed = case2_series_coeffs(&params, n, 13);
            for k in 0..=13 {
                assert!(
                    (generic.coefficient(k).value - closed[k].value).abs() < 1e-12,
                    "n={n}, k={k}"
                );
            }
        }
    }

    #[test]
    fn case2_entropy_reproduces_reference_rows() {
        for (p1, p2, q, r, want) in TABLE_CASE2 {
            let params = Case2Params::new(p1, p2, q, r).unwrap();
            let h = exact_entropy_case2(&params);
            assert!((h - want).abs() < 1e-5, "{h} vs {want}");
        }
        // Figure-caption values.
        let fig2 = Case2Params::new(0.2, 0.3, 0.05, 0.01).unwrap();
        assert!((exact_entropy_case2(&fig2) - 0.166671).abs() < 1e-5);
        let fig3 = Case2Params::new(0.2, 0.3, 0.1, 0.4).unwrap();
        assert!((exact_entropy_case2(&fig3) - 0.619519).abs() < 1e-5);
    }

    #[test]
    fn case2_q_equals_r_collapses_linear_coefficient() {
        let params = Case2Params::new(0.15, 0.25, 0.3, 0.3).unwrap();
        let n = 1.4;
        let coeffs = case2_series_coeffs(&params, n, 3);
        let want = -((1.0 - params.p1 - params.p2).powf(n) + (1.0 - params.q).powf(n));
        assert!((coeffs[1].value - want).abs() < 1e-14);
    }

    #[test]
    fn markov_entropy_closed_form_matches_generic() {
        for (p1, p2, q, r) in [(0.1, 0.1, 0.2, 0.3), (0.2, 0.2, 0.3, 0.4), (0.3, 0.3, 1.0, 1.0)] {
            let params = Case2Params::new(p1, p2, q, r).unwrap();
            let model = HmpModel::aggregated_case2(p1, p2, q, r).unwrap();
            let closed = markov_entropy_case2(&params);
            let generic = model.chain().entropy_rate();
            assert!(
                (closed - generic).abs() < 1e-10,
                "({p1},{p2},{q},{r}): {closed} vs {generic}"
            );
        }
    }

    #[test]
    fn lumping_decreases_entropy_on_grid() {
        use rand_chacha::ChaCha8Rng;
        use rand_core::{RngCore, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let mut unif = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        for _ in 0..100 {
            let p1 = 0.05 + 0.4 * unif();
            let p2 = 0.05 + 0.4 * unif();
            let q = 0.05 + 0.9 * unif();
            let r = 0.05 + 0.9 * unif();
            let params = Case2Params::new(p1, p2, q, r).unwrap();
            assert!(
                markov_entropy_case2(&params) > exact_entropy_case2(&params),
                "({p1},{p2},{q},{r})"
            );
        }
    }

    #[test]
    fn small_noise_entropy_limits() {
        // eps = 0: the Markov entropy.
        for &q in &[0.1, 0.3, 0.5] {
            let h = small_noise_entropy(q, 0.0).unwrap();
            let want = -(1.0 - q) * (1.0 - q).ln() - q * q.ln();
            assert!((h - want).abs() < 1e-14);
        }
        // q = 1/2: all eps corrections vanish.
        for &eps in &[0.01, 0.05, 0.2] {
            let h = small_noise_entropy(0.5, eps).unwrap();
            assert!((h - std::f64::consts::LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn small_noise_entropy_matches_cycle_expansion() {
        let (q, eps) = (0.3, 0.01);
        let model = HmpModel::binary_symmetric(q, eps).unwrap();
        let est = zeta::entropy_cycle_expansion(&model, 13).unwrap();
        let h = small_noise_entropy(q, eps).unwrap();
        assert!(
            (h - est.entropy).abs() < 5e-5,
            "small-noise {h} vs K=13 {}",
            est.entropy
        );
    }

    #[test]
    fn small_noise_phi_limits() {
        // eps = 0, k = 3: no zeroth-order term.
        assert_eq!(small_noise_phi(0.3, 0.0, 1.2, 3).unwrap(), 0.0);
        // k = 1, eps = 0: -2 (1-q)^n.
        let v = small_noise_phi(0.3, 0.0, 1.2, 1).unwrap();
        assert!((v + 2.0 * 0.7_f64.powf(1.2)).abs() < 1e-14);
    }

    #[test]
    fn small_noise_phi_taylor_coefficients_match_generic() {
        // Extract eps^0..eps^2 Taylor coefficients of the generic phi_k by
        // Richardson-refined central differences and compare with the
        // expansion's own coefficients extracted the same way.
        let q = 0.3;
        // Building the transfer matrices directly keeps the generic side
        // evaluable at (tiny) negative eps, where the dominant eigenvalues
        // are still real positive, so central differences in eps apply.
        let generic_phi = |eps: f64, n: f64, k: usize| -> f64 {
            let t1 = crate::matrix::Matrix::from_rows(&[
                vec![(1.0 - eps) * (1.0 - q), (1.0 - eps) * q],
                vec![eps * q, eps * (1.0 - q)],
            ])
            .unwrap();
            let t2 = crate::matrix::Matrix::from_rows(&[
                vec![eps * (1.0 - q), eps * q],
                vec![(1.0 - eps) * q, (1.0 - eps) * (1.0 - q)],
            ])
            .unwrap();
            let w = zeta::weights_from_matrices(&[t1, t2], 4).unwrap();
            zeta::zeta_polynomial(&w, n).coefficient(k).value
        };
        let taylor3 = |f: &dyn Fn(f64) -> f64| -> [f64; 3] {
            let h = 1e-3;
            let c0 = f(0.0);
            let d1 = |h: f64| (f(h) - f(-h)) / (2.0 * h);
            let d2 = |h: f64| (f(h) - 2.0 * c0 + f(-h)) / (h * h);
            // Richardson: cancel the h^2 truncation term.
            let c1 = (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
            let c2 = (4.0 * d2(h / 2.0) - d2(h)) / 3.0 / 2.0;
            [c0, c1, c2]
        };
        for &n in &[0.8, 1.0, 1.2] {
            for k in 1..=4 {
                let gen = taylor3(&|e| generic_phi(e, n, k));
                let form = taylor3(&|e| small_noise_phi(q, e, n, k).unwrap());
                for j in 0..3 {
                    assert!(
                        (gen[j] - form[j]).abs() < 1e-5 * (1.0 + gen[j].abs()),
                        "n={n}, k={k}, order {j}: {} vs {}",
                        gen[j],
                        form[j]
                    );
                }
            }
        }
    }

    #[test]
    fn small_noise_phi_pointwise_remainder_is_cubic() {
        // At finite eps the defect against the generic coefficient is the
        // genuine Taylor remainder, which scales like eps^3.
        let (q, n) = (0.3, 1.0);
        let generic_phi = |eps: f64, k: usize| -> f64 {
            let model = HmpModel::binary_symmetric(q, eps).unwrap();
            let w = zeta::orbit_weights_to_order(&model, 4).unwrap();
            zeta::zeta_polynomial(&w, n).coefficient(k).value
        };
        for k in 1..=4 {
            let d1 = (generic_phi(0.02, k) - small_noise_phi(q, 0.02, n, k).unwrap()).abs();
            let d2 = (generic_phi(0.01, k) - small_noise_phi(q, 0.01, n, k).unwrap()).abs();
            assert!(d1 < 100.0 * 0.02_f64.powi(3), "k={k}: remainder {d1}");
            // Roughly cubic scaling: halving eps shrinks the defect by ~8.
            if d1 > 1e-12 {
                let ratio = d1 / d2.max(1e-300);
                assert!(ratio > 4.0, "k={k}: scaling ratio {ratio}");
            }
        }
    }

    #[test]
    fn small_noise_lambda_consistent() {
        // n = 1: correction numerator vanishes, Lambda = 1 + O(eps^2).
        let v = small_noise_lambda(0.3, 0.02, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-3);
        // eps = 0: q^n + (1-q)^n.
        let v = small_noise_lambda(0.3, 0.0, 1.7).unwrap();
        assert!((v - (0.3_f64.powf(1.7) + 0.7_f64.powf(1.7))).abs() < 1e-14);
    }

    #[test]
    fn case1_exact_track_matches_truncated_track() {
        // Root of the closed form truncated at K = 13 versus the generic
        // truncation of the same order.
        let params = Case1Params::new(0.75, 0.10, 0.25, 0.20).unwrap();
        let model = HmpModel::aggregated_case1(0.75, 0.10, 0.25, 0.20).unwrap();
        let grid = genfun::default_n_grid(2.0);
        let grid: Vec<f64> = grid.into_iter().filter(|&n| n >= 0.5).collect();
        let exact_family = genfun::FnFamily(move |n: f64| case1_series_coeffs(&params, n, 13));
        let exact_track = genfun::lambda_track(Box::new(exact_family), &grid).unwrap();
        let generic_track = genfun::lambda_of_n(&model, 13, &grid).unwrap();
        for (a, b) in exact_track.points().iter().zip(generic_track.points()) {
            assert!(
                (a.lambda - b.lambda).abs() < 1e-6,
                "n={}: exact {} vs generic {}",
                a.n,
                a.lambda,
                b.lambda
            );
        }
    }

    #[test]
    fn case1_entropy_nonanalytic_near_full_transfer() {
        // As p1 + p2 -> 1 the entropy carries a (1-p1-p2) ln(1-p1-p2)
        // term; its second derivative in (p1+p2) blows up like
        // 1/(1-p1-p2), exceeding 1e3 within 1e-4 of the boundary.
        let (q1, q2) = (0.25, 0.20);
        let h_at = |s: f64| {
            let params = Case1Params::new(s / 2.0, s / 2.0, q1, q2).unwrap();
            exact_entropy_case1(&params).unwrap()
        };
        let s0 = 1.0 - 1e-4;
        let d = 2e-5;
        let second = (h_at(s0 + d) - 2.0 * h_at(s0) + h_at(s0 - d)) / (d * d);
        assert!(
            second.abs() > 1e3,
            "second derivative {second} did not blow up near the boundary"
        );
    }
}
