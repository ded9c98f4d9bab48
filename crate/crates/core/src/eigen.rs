//! Eigenvalue moduli, spectral radii and singular values of small dense
//! real matrices.
//!
//! Dimensions 2 and 3 go through closed-form characteristic polynomials
//! (with a guarded Newton polish); larger matrices go through a Householder
//! Hessenberg reduction followed by a double-shift QR iteration. Singular
//! values use one-sided Jacobi orthogonalization, which keeps them accurate
//! independent of the eigenvalue path so the two can cross-check each other.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Off-diagonal decay tolerance of the QR iteration.
const QR_TOL: f64 = 1e-13;
/// Total QR sweep budget before giving up.
const QR_MAX_SWEEPS: usize = 500;

fn is_triangular(m: &Matrix) -> bool {
    let n = m.rows();
    let upper = (0..n).all(|i| (0..i).all(|j| m.get(i, j) == 0.0));
    let lower = (0..n).all(|i| ((i + 1)..n).all(|j| m.get(i, j) == 0.0));
    upper || lower
}

/// Eigenvalues as (re, im) pairs, sorted by modulus descending.
///
/// Triangular matrices short-circuit to their diagonal: the
/// characteristic-polynomial and QR routes are both limited to
/// square-root precision at defective multiple eigenvalues, which the
/// model families hit exactly through their triangular transfer matrices.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    m.require_square("eigenvalues")?;
    let n = m.rows();
    let mut eigs = if is_triangular(m) {
        (0..n).map(|i| (m.get(i, i), 0.0)).collect()
    } else {
        match n {
            1 => vec![(m.get(0, 0), 0.0)],
            2 => eig2(m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)),
            3 => eig3(m),
            _ => hessenberg_qr(m)?,
        }
    };
    eigs.sort_by(|a, b| {
        let ma = a.0.hypot(a.1);
        let mb = b.0.hypot(b.1);
        mb.partial_cmp(&ma).unwrap()
    });
    Ok(eigs)
}

/// Moduli of all eigenvalues, sorted descending. Length equals the dimension.
pub fn eigen_moduli(m: &Matrix) -> Result<Vec<f64>> {
    Ok(eigenvalues(m)?.iter().map(|&(re, im)| re.hypot(im)).collect())
}

/// Maximum eigenvalue modulus. For matrices with non-negative entries this
/// is itself an eigenvalue (Perron).
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigen_moduli(m)?[0])
}

/// Spectral radius together with a degeneracy flag.
#[derive(Debug, Clone, Copy)]
pub struct SpectralInfo {
    pub radius: f64,
    /// The top modulus is shared by at least two eigenvalues.
    pub degenerate: bool,
}

/// Spectral radius with degeneracy metadata. A degenerate top modulus is
/// reported, not treated as a failure.
pub fn spectral_radius_info(m: &Matrix) -> Result<SpectralInfo> {
    let moduli = eigen_moduli(m)?;
    let radius = moduli[0];
    let degenerate = moduli.len() > 1 && (radius - moduli[1]).abs() <= 1e-9 * radius.max(1e-300);
    Ok(SpectralInfo { radius, degenerate })
}

fn eig2(a: f64, b: f64, c: f64, d: f64) -> Vec<(f64, f64)> {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // Stable pairing: big root first, small root from the determinant.
        let r1 = if tr >= 0.0 { (tr + s) / 2.0 } else { (tr - s) / 2.0 };
        let r2 = if r1 != 0.0 { det / r1 } else { (tr - r1.signum() * s) / 2.0 };
        vec![(r1, 0.0), (r2, 0.0)]
    } else {
        let re = tr / 2.0;
        let im = (-disc).sqrt() / 2.0;
        vec![(re, im), (re, -im)]
    }
}

/// Characteristic polynomial of a 3x3: l^3 + a2 l^2 + a1 l + a0.
fn charpoly3(m: &Matrix) -> (f64, f64, f64) {
    let tr = m.trace();
    let minors = (m.get(1, 1) * m.get(2, 2) - m.get(1, 2) * m.get(2, 1))
        + (m.get(0, 0) * m.get(2, 2) - m.get(0, 2) * m.get(2, 0))
        + (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0));
    let det = m.get(0, 0) * (m.get(1, 1) * m.get(2, 2) - m.get(1, 2) * m.get(2, 1))
        - m.get(0, 1) * (m.get(1, 0) * m.get(2, 2) - m.get(1, 2) * m.get(2, 0))
        + m.get(0, 2) * (m.get(1, 0) * m.get(2, 1) - m.get(1, 1) * m.get(2, 0));
    (-tr, minors, -det)
}

fn polish_real_root(a2: f64, a1: f64, a0: f64, mut x: f64) -> f64 {
    // Newton polish on the characteristic cubic. The trigonometric branch
    // loses half the digits at a double root (acos near +-1). Multiplicity
    // is ambiguous exactly there, so both the simple step and the doubled
    // (multiplicity-2) step are tried and the smaller residual wins.
    let eval = |x: f64| ((x + a2) * x + a1) * x + a0;
    for _ in 0..3 {
        let p = eval(x);
        let dp = (3.0 * x + 2.0 * a2) * x + a1;
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.abs() > 0.5 * (1.0 + x.abs()) {
            break;
        }
        let x1 = x - step;
        let x2 = x - 2.0 * step;
        let e1 = eval(x1).abs();
        let e2 = eval(x2).abs();
        let (next, e_next) = if e1 <= e2 { (x1, e1) } else { (x2, e2) };
        // Both p and dp are cancellation noise once the root is converged;
        // only residual-improving steps are accepted.
        if e_next >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

fn eig3(m: &Matrix) -> Vec<(f64, f64)> {
    let (a2, a1, a0) = charpoly3(m);
    // Depressed cubic t^3 + p t + q with l = t - a2/3.
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let half_q = q / 2.0;
    let disc = half_q * half_q + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let scale = m.max_abs().max(1.0);
    let eps = 1e-14 * scale * scale * scale;

    if disc > eps {
        // One real root, one complex pair.
        let s = disc.sqrt();
        let t = (-half_q + s).cbrt() + (-half_q - s).cbrt();
        let r = polish_real_root(a2, a1, a0, t - shift);
        // Deflate: l^2 + (a2 + r) l + (a1 + r (a2 + r)).
        let b = a2 + r;
        let c = a1 + r * b;
        let qdisc = b * b - 4.0 * c;
        if qdisc >= 0.0 {
            let sq = qdisc.sqrt();
            let r1 = if b >= 0.0 { (-b - sq) / 2.0 } else { (-b + sq) / 2.0 };
            let r2 = if r1 != 0.0 { c / r1 } else { (-b + r1.signum() * sq) / 2.0 };
            vec![(r, 0.0), (r1, 0.0), (r2, 0.0)]
        } else {
            let re = -b / 2.0;
            let im = (-qdisc).sqrt() / 2.0;
            vec![(r, 0.0), (re, im), (re, -im)]
        }
    } else {
        // Three real roots (possibly repeated).
        if p.abs() <= eps && q.abs() <= eps {
            let r = -shift;
            return vec![(r, 0.0); 3];
        }
        let mp = (-p).max(0.0);
        let r = 2.0 * (mp / 3.0).sqrt();
        let denom = (mp / 3.0).powf(1.5);
        let cosphi = if denom > 0.0 { (-half_q / denom).clamp(-1.0, 1.0) } else { 1.0 };
        let phi = cosphi.acos();
        (0..3)
            .map(|k| {
                let t = r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
                (polish_real_root(a2, a1, a0, t - shift), 0.0)
            })
            .collect()
    }
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &Matrix) -> Vec<Vec<f64>> {
    let n = m.rows();
    let mut h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j)).collect())
        .collect();
    for k in 0..n.saturating_sub(2) {
        let mut alpha = 0.0;
        for i in (k + 1)..n {
            alpha += h[i][k] * h[i][k];
        }
        alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        if h[k + 1][k] > 0.0 {
            alpha = -alpha;
        }
        let mut v = vec![0.0; n];
        v[k + 1] = h[k + 1][k] - alpha;
        for i in (k + 2)..n {
            v[i] = h[i][k];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- (I - 2 v v^T / v^T v) H
        for j in 0..n {
            let dot: f64 = ((k + 1)..n).map(|i| v[i] * h[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in (k + 1)..n {
                h[i][j] -= f * v[i];
            }
        }
        // H <- H (I - 2 v v^T / v^T v)
        for row in h.iter_mut() {
            let dot: f64 = ((k + 1)..n).map(|i| v[i] * row[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in (k + 1)..n {
                row[i] -= f * v[i];
            }
        }
        h[k + 1][k] = alpha;
        for i in (k + 2)..n {
            h[i][k] = 0.0;
        }
    }
    h
}

/// Double-shift QR iteration on a Hessenberg matrix (eigenvalues only).
fn hessenberg_qr(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    let n = m.rows();
    let mut h = hessenberg(m);
    let mut eigs: Vec<(f64, f64)> = Vec::with_capacity(n);

    let norm: f64 = (0..n)
        .map(|i| ((i.saturating_sub(1))..n).map(|j| h[i][j].abs()).sum::<f64>())
        .sum();
    if norm == 0.0 {
        return Ok(vec![(0.0, 0.0); n]);
    }

    let mut en = n as isize - 1;
    let mut t = 0.0;
    let mut sweeps = 0usize;

    while en >= 0 {
        let low = 0isize;
        let mut its = 0usize;
        'seek: loop {
            // Look for a single small subdiagonal element.
            let mut l = en;
            while l > low {
                let s = h[(l - 1) as usize][(l - 1) as usize].abs()
                    + h[l as usize][l as usize].abs();
                let s = if s == 0.0 { norm } else { s };
                if h[l as usize][(l - 1) as usize].abs() <= QR_TOL * s {
                    break;
                }
                l -= 1;
            }

            let x = h[en as usize][en as usize];
            if l == en {
                eigs.push((x + t, 0.0));
                en -= 1;
                break 'seek;
            }
            let na = en - 1;
            let y = h[na as usize][na as usize];
            let w = h[en as usize][na as usize] * h[na as usize][en as usize];
            if l == na {
                let p = (y - x) / 2.0;
                let q = p * p + w;
                let zz = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let zz = p + zz.copysign(p);
                    let r1 = x + zz;
                    let r2 = if zz != 0.0 { x - w / zz } else { r1 };
                    eigs.push((r1, 0.0));
                    eigs.push((r2, 0.0));
                } else {
                    eigs.push((x + p, zz));
                    eigs.push((x + p, -zz));
                }
                en -= 2;
                break 'seek;
            }

            if sweeps >= QR_MAX_SWEEPS {
                return Err(Error::Numerical(format!(
                    "QR iteration did not converge within {} sweeps on {:?}",
                    QR_MAX_SWEEPS, m
                )));
            }
            sweeps += 1;

            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in low..=en {
                    h[i as usize][i as usize] -= x;
                }
                let s = h[en as usize][na as usize].abs()
                    + h[na as usize][(na - 1) as usize].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Look for two consecutive small subdiagonal elements.
            let enm2 = en - 2;
            let mut mm = enm2;
            let (mut p, mut q, mut r);
            loop {
                let zz = h[mm as usize][mm as usize];
                let rr = x - zz;
                let ss = y - zz;
                p = (rr * ss - w) / h[(mm + 1) as usize][mm as usize]
                    + h[mm as usize][(mm + 1) as usize];
                q = h[(mm + 1) as usize][(mm + 1) as usize] - zz - rr - ss;
                r = h[(mm + 2) as usize][(mm + 1) as usize];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let tst1 = p.abs()
                    * (h[(mm - 1) as usize][(mm - 1) as usize].abs()
                        + zz.abs()
                        + h[(mm + 1) as usize][(mm + 1) as usize].abs());
                let tst2 = tst1 + h[mm as usize][(mm - 1) as usize].abs() * (q.abs() + r.abs());
                if tst2 == tst1 {
                    break;
                }
                mm -= 1;
            }

            for i in (mm + 2)..=en {
                h[i as usize][(i - 2) as usize] = 0.0;
                if i > mm + 2 {
                    h[i as usize][(i - 3) as usize] = 0.0;
                }
            }

            // Double QR step on rows l..=en.
            for k in mm..=na {
                let notlast = k != na;
                if k != mm {
                    p = h[k as usize][(k - 1) as usize];
                    q = h[(k + 1) as usize][(k - 1) as usize];
                    r = if notlast { h[(k + 2) as usize][(k - 1) as usize] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if k != mm {
                    h[k as usize][(k - 1) as usize] = -s * x;
                } else if l != mm {
                    h[k as usize][(k - 1) as usize] = -h[k as usize][(k - 1) as usize];
                }
                p += s;
                x = p / s;
                y = q / s;
                let zz = r / s;
                q /= p;
                r /= p;

                // Row modification.
                for j in (k as usize)..=(en as usize) {
                    let mut pp = h[k as usize][j] + q * h[(k + 1) as usize][j];
                    if notlast {
                        pp += r * h[(k + 2) as usize][j];
                        h[(k + 2) as usize][j] -= pp * zz;
                    }
                    h[(k + 1) as usize][j] -= pp * y;
                    h[k as usize][j] -= pp * x;
                }
                // Column modification.
                let upper = en.min(k + 3);
                for i in (l as usize)..=(upper as usize) {
                    let mut pp = x * h[i][k as usize] + y * h[i][(k + 1) as usize];
                    if notlast {
                        pp += zz * h[i][(k + 2) as usize];
                        h[i][(k + 2) as usize] -= pp * r;
                    }
                    h[i][(k + 1) as usize] -= pp * q;
                    h[i][k as usize] -= pp;
                }
            }
        }
    }
    Ok(eigs)
}

/// Singular values sorted descending, by one-sided Jacobi orthogonalization.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    m.require_square("singular_values")?;
    let n = m.rows();
    // Columns of a working copy are rotated until pairwise orthogonal.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| m.get(i, j)).collect())
        .collect();
    for _sweep in 0..60 {
        let mut converged = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = a[i].iter().map(|x| x * x).sum();
                let beta: f64 = a[j].iter().map(|x| x * x).sum();
                let gamma: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let x = a[i][k];
                    let y = a[j][k];
                    a[i][k] = c * x - s * y;
                    a[j][k] = s * x + c * y;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut sv: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// One inequality line of a [`WeylReport`]: holds/failed plus the slack
/// (left side minus right side, non-negative when it holds).
#[derive(Debug, Clone, Copy)]
pub struct WeylLine {
    pub holds: bool,
    pub slack: f64,
}

/// Majorization relations between singular values and eigenvalue moduli.
#[derive(Debug, Clone)]
pub struct WeylReport {
    /// Prefix products prod sigma_k >= prod l_k for each prefix length.
    pub prefix_products: Vec<WeylLine>,
    /// Full products agree (both equal |det|).
    pub full_product: WeylLine,
    /// Power sums sum sigma_k^rho >= sum l_k^rho.
    pub power_sum: WeylLine,
    pub rho: f64,
}

impl WeylReport {
    pub fn all_hold(&self) -> bool {
        self.prefix_products.iter().all(|l| l.holds)
            && self.full_product.holds
            && self.power_sum.holds
    }
}

/// Check the Weyl inequalities between singular values and eigenvalue
/// moduli of a square matrix, with `rho > 0` for the power-sum form.
pub fn weyl_check(m: &Matrix, rho: f64) -> Result<WeylReport> {
    m.require_square("weyl_check")?;
    let n = m.rows();
    let sigma = singular_values(m)?;
    let moduli = eigen_moduli(m)?;

    // Each eigenvalue modulus carries an absolute uncertainty of order
    // sqrt(machine epsilon) times the top singular value (defective or
    // near-defective spectra cannot do better), so every tolerance below
    // is scaled by powers of sigma_0 rather than by the products
    // themselves, which can be arbitrarily small for contracting factors.
    let s0 = sigma[0].max(1e-300);
    let modulus_err = 3e-8 * s0;

    let mut prefix_products = Vec::with_capacity(n);
    let mut ps = 1.0;
    let mut pl = 1.0;
    for k in 0..n {
        ps *= sigma[k];
        pl *= moduli[k];
        let tol = 1e-9 * ps.max(pl) + modulus_err * s0.powi(k as i32) * (k + 1) as f64;
        let slack = ps - pl;
        prefix_products.push(WeylLine { holds: slack >= -tol, slack });
    }
    let full_slack = ps - pl;
    let full_tol = 1e-8 * ps.max(pl) + modulus_err * s0.powi((n - 1) as i32) * n as f64;
    let full_product = WeylLine { holds: full_slack.abs() <= full_tol, slack: full_slack };

    let ssum: f64 = sigma.iter().map(|s| s.powf(rho)).sum();
    let lsum: f64 = moduli.iter().map(|l| l.powf(rho)).sum();
    let slack = ssum - lsum;
    let power_tol = 1e-9 * ssum + n as f64 * modulus_err.powf(rho);
    let power_sum = WeylLine { holds: slack >= -power_tol, slack };

    Ok(WeylReport { prefix_products, full_product, power_sum, rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_radius() {
        assert!((spectral_radius(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        let m = Matrix::new(2, 3, vec![0.0; 6]).unwrap();
        assert!(matches!(spectral_radius(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn diagonal_moduli_sorted() {
        let m = mat(&[&[3.0, 0.0, 0.0], &[0.0, -2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let l = eigen_moduli(&m).unwrap();
        assert!((l[0] - 3.0).abs() < 1e-14);
        assert!((l[1] - 2.0).abs() < 1e-14);
        assert!((l[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_has_unit_moduli() {
        let m = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let l = eigen_moduli(&m).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-14);
        assert!((l[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lower_triangular_degenerate_top() {
        // Aggregated-model T(2) shape: diagonal entries 0, 0.7, 0.7.
        let m = mat(&[
            &[0.0, 0.0, 0.0],
            &[0.3, 0.7, 0.0],
            &[0.2, 0.1, 0.7],
        ]);
        let info = spectral_radius_info(&m).unwrap();
        assert!((info.radius - 0.7).abs() < 1e-12);
        assert!(info.degenerate);
    }

    #[test]
    fn singular_values_diagonal() {
        let m = mat(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-14);
        assert!(sv[1].abs() < 1e-14);
        let id = Matrix::identity(4);
        for s in singular_values(&id).unwrap() {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weyl_normal_matrix_tight() {
        // Symmetric (hence normal): sigma_k == |l_k|.
        let m = mat(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let report = weyl_check(&m, 1.5).unwrap();
        assert!(report.all_hold());
        for line in &report.prefix_products {
            assert!(line.slack.abs() < 1e-10);
        }
        assert!(report.power_sum.slack.abs() < 1e-10);
    }

    #[test]
    fn qr_matches_known_eigenvalues() {
        // Block diagonal 4x4: blocks [[0,-2],[2,0]] (moduli 2) and diag(5, -1).
        let m = mat(&[
            &[0.0, -2.0, 0.0, 0.0],
            &[2.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 5.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]);
        let l = eigen_moduli(&m).unwrap();
        assert!((l[0] - 5.0).abs() < 1e-10);
        assert!((l[1] - 2.0).abs() < 1e-10);
        assert!((l[2] - 2.0).abs() < 1e-10);
        assert!((l[3] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qr_product_of_moduli_is_abs_det() {
        let mut state = 0x12345678_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for _ in 0..50 {
            let n = 5;
            let data: Vec<f64> = (0..n * n).map(|_| next()).collect();
            let m = Matrix::new(n, n, data).unwrap();
            let prod: f64 = eigen_moduli(&m).unwrap().iter().product();
            let det = m.determinant().unwrap().abs();
            assert!(
                (prod - det).abs() <= 1e-9 * det.max(1.0),
                "prod {} vs det {}",
                prod,
                det
            );
        }
    }
}
