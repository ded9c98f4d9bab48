//! Markov chain representation: stationarity, mixing diagnostics and the
//! Markov entropy formula.
//!
//! The convention throughout is column-stochastic: entry `(i, j)` of the
//! transition matrix is `p(i|j)`, the probability of moving to state `i`
//! from state `j`, so every column sums to one and the stationary
//! distribution is a right eigenvector. Row-stochastic input is accepted
//! through an explicit transposing constructor.

use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const COLUMN_SUM_TOL: f64 = 1e-12;
const FIXED_POINT_TOL: f64 = 1e-10;
const MIXING_GAP_TOL: f64 = 1e-10;

/// `x ln x` with the `0 ln 0 = 0` convention.
pub(crate) fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// A finite-state Markov chain with its stationary distribution.
///
/// Immutable after construction; freely shareable across threads.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    transition: Matrix,
    stationary: Vec<f64>,
}

impl MarkovChain {
    /// Build from a column-stochastic transition matrix. Validates
    /// stochasticity and computes the stationary distribution.
    ///
    /// Mixing is deliberately not a hard gate here: limits of the model
    /// families approach non-mixing chains and remain useful to probe. A
    /// chain whose unit eigenvalue is degenerate (no unique stationary
    /// vector) is rejected.
    pub fn new(transition: Matrix) -> Result<Self> {
        validate_column_stochastic(&transition)?;
        let stationary = stationary_distribution(&transition)?;
        Ok(Self { transition, stationary })
    }

    /// Build from a row-stochastic matrix (the transposed convention used
    /// by some authors); the matrix is transposed on ingestion.
    pub fn from_row_stochastic(transition: Matrix) -> Result<Self> {
        Self::new(transition.transpose())
    }

    pub fn size(&self) -> usize {
        self.transition.rows()
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Entropy rate of the chain in nats:
    /// `-sum_k p_st(k) sum_l p(l|k) ln p(l|k)`, with `0 ln 0 = 0`.
    pub fn entropy_rate(&self) -> f64 {
        let l = self.size();
        let mut h = 0.0;
        for k in 0..l {
            let mut col = 0.0;
            for i in 0..l {
                col += xlnx(self.transition.get(i, k));
            }
            h -= self.stationary[k] * col;
        }
        h
    }
}

fn validate_column_stochastic(transition: &Matrix) -> Result<()> {
    transition.require_square("transition matrix")?;
    let l = transition.rows();
    for j in 0..l {
        let mut sum = 0.0;
        for i in 0..l {
            let v = transition.get(i, j);
            if v < 0.0 {
                return Err(Error::Validation(format!(
                    "transition entry ({i},{j}) = {v} is negative"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(Error::Validation(format!(
                "transition column {j} sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Unique stationary distribution of a column-stochastic matrix.
///
/// Solves `(P - I) v = 0` with a normalization row appended, as a
/// least-squares system via the normal equations. This is exact for small
/// dimensions and independent of the spectral gap. A singular system means
/// the unit eigenvalue is degenerate; the error names the offending
/// eigenvalue modulus.
pub fn stationary_distribution(transition: &Matrix) -> Result<Vec<f64>> {
    validate_column_stochastic(transition)?;
    let l = transition.rows();

    // M = [(P - I); ones], b = (0,...,0,1); solve M^T M v = M^T b.
    let mut mtm = Matrix::zeros(l, l);
    for a in 0..l {
        for b in 0..l {
            let mut acc = 1.0; // ones-row contribution
            for i in 0..l {
                let ra = transition.get(i, a) - if i == a { 1.0 } else { 0.0 };
                let rb = transition.get(i, b) - if i == b { 1.0 } else { 0.0 };
                acc += ra * rb;
            }
            mtm.set(a, b, acc);
        }
    }
    let rhs = vec![1.0; l];
    let mut v = match mtm.solve(&rhs) {
        Ok(v) => v,
        Err(_) => {
            let second = second_modulus(transition)?;
            return Err(Error::Mixing(format!(
                "unit eigenvalue is degenerate (second eigenvalue modulus {second:.6}); \
                 no unique stationary distribution"
            )));
        }
    };

    let sum: f64 = v.iter().sum();
    if sum.abs() < 1e-12 {
        return Err(Error::Numerical("stationary vector summed to zero".into()));
    }
    for x in &mut v {
        *x /= sum;
    }
    // The least-squares solution of a consistent system is the exact fixed
    // vector; verify and clean up signs.
    let image = transition.mat_vec(&v);
    let residual: f64 = image
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > FIXED_POINT_TOL {
        let second = second_modulus(transition)?;
        return Err(Error::Mixing(format!(
            "stationary solve residual {residual:.3e} exceeds tolerance \
             (second eigenvalue modulus {second:.6})"
        )));
    }
    for x in &mut v {
        if *x < 0.0 {
            if *x < -1e-10 {
                return Err(Error::Numerical(format!(
                    "stationary vector has negative component {x}"
                )));
            }
            *x = 0.0;
        }
    }
    Ok(v)
}

fn second_modulus(transition: &Matrix) -> Result<f64> {
    let moduli = eigen::eigen_moduli(transition)?;
    Ok(if moduli.len() > 1 { moduli[1] } else { 0.0 })
}

/// Diagnostic report on the mixing properties of a chain.
#[derive(Debug, Clone)]
pub struct MixingReport {
    /// All transition probabilities strictly positive (sufficient for
    /// mixing).
    pub strictly_positive: bool,
    /// Some power of the transition matrix is entrywise positive, checked
    /// up to the Wielandt bound `L^2 - 2L + 2`.
    pub primitive: bool,
    /// Whether the chain also has a positive diagonal element (the weaker
    /// sufficient condition pairs this with primitivity).
    pub positive_diagonal: bool,
    /// Modulus of the second-largest eigenvalue.
    pub second_modulus: f64,
    /// Verdict: second modulus strictly inside the unit circle.
    pub mixing: bool,
}

/// Mixing diagnostics for a column-stochastic matrix. Never fails on
/// non-mixing input; the verdict is carried in the report.
pub fn mixing_check(transition: &Matrix) -> Result<MixingReport> {
    validate_column_stochastic(transition)?;
    let l = transition.rows();
    let strictly_positive = (0..l).all(|i| (0..l).all(|j| transition.get(i, j) > 0.0));
    let positive_diagonal = (0..l).any(|i| transition.get(i, i) > 0.0);

    // Primitivity through boolean adjacency powers (no underflow for long
    // products of small probabilities).
    let wielandt = l * l - 2 * l + 2;
    let adj: Vec<Vec<bool>> = (0..l)
        .map(|i| (0..l).map(|j| transition.get(i, j) > 0.0).collect())
        .collect();
    let mut power = adj.clone();
    let mut primitive = power.iter().all(|row| row.iter().all(|&x| x));
    for _ in 1..wielandt.max(1) {
        if primitive {
            break;
        }
        let mut next = vec![vec![false; l]; l];
        for i in 0..l {
            for k in 0..l {
                if power[i][k] {
                    for (j, cell) in next[i].iter_mut().enumerate() {
                        *cell = *cell || adj[k][j];
                    }
                }
            }
        }
        power = next;
        primitive = power.iter().all(|row| row.iter().all(|&x| x));
    }

    let second_modulus = second_modulus(transition)?;
    let mixing = second_modulus < 1.0 - MIXING_GAP_TOL;
    Ok(MixingReport {
        strictly_positive,
        primitive,
        positive_diagonal,
        second_modulus,
        mixing,
    })
}
