//! Forward-mode dual scalars carrying a derivative with respect to the
//! moment exponent.
//!
//! Cycle-expansion coefficients are built from orbit weights raised to a
//! power `n`; the entropy needs their exact derivative at `n = 1`. Carrying
//! `(value, d/dn)` pairs through the polynomial assembly avoids a
//! finite-difference step size altogether.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A value together with its derivative with respect to the exponent
/// parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DualScalar {
    pub value: f64,
    pub deriv: f64,
}

impl DualScalar {
    pub const ZERO: DualScalar = DualScalar { value: 0.0, deriv: 0.0 };
    pub const ONE: DualScalar = DualScalar { value: 1.0, deriv: 0.0 };

    pub fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    /// A constant (zero derivative).
    pub fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    /// `base^n` carried as `(base^n, base^n ln base)`, with the `0 ln 0 = 0`
    /// convention: a zero base gives `(0, 0)` for `n > 0` and `(1, 0)` for
    /// `n = 0`.
    pub fn pow_base(base: f64, n: f64) -> Self {
        assert!(base >= 0.0, "pow_base requires a non-negative base, got {base}");
        if base == 0.0 {
            return if n == 0.0 { Self::ONE } else { Self::ZERO };
        }
        let v = base.powf(n);
        Self { value: v, deriv: v * base.ln() }
    }
}

impl Add for DualScalar {
    type Output = DualScalar;
    fn add(self, rhs: DualScalar) -> DualScalar {
        DualScalar::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for DualScalar {
    type Output = DualScalar;
    fn sub(self, rhs: DualScalar) -> DualScalar {
        DualScalar::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for DualScalar {
    type Output = DualScalar;
    fn mul(self, rhs: DualScalar) -> DualScalar {
        DualScalar::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl Mul<f64> for DualScalar {
    type Output = DualScalar;
    fn mul(self, rhs: f64) -> DualScalar {
        DualScalar::new(self.value * rhs, self.deriv * rhs)
    }
}

impl Neg for DualScalar {
    type Output = DualScalar;
    fn neg(self) -> DualScalar {
        DualScalar::new(-self.value, -self.deriv)
    }
}

impl AddAssign for DualScalar {
    fn add_assign(&mut self, rhs: DualScalar) {
        *self = *self + rhs;
    }
}

impl SubAssign for DualScalar {
    fn sub_assign(&mut self, rhs: DualScalar) {
        *self = *self - rhs;
    }
}

impl MulAssign for DualScalar {
    fn mul_assign(&mut self, rhs: DualScalar) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let a = DualScalar::new(2.0, 3.0);
        let b = DualScalar::new(5.0, 7.0);
        let c = a * b;
        assert_eq!(c.value, 10.0);
        assert_eq!(c.deriv, 3.0 * 5.0 + 2.0 * 7.0);
    }

    #[test]
    fn pow_base_zero_convention() {
        assert_eq!(DualScalar::pow_base(0.0, 2.0), DualScalar::ZERO);
        assert_eq!(DualScalar::pow_base(0.0, 0.0), DualScalar::ONE);
    }

    #[test]
    fn pow_base_matches_central_differences() {
        // Chain-rule check against finite differences of base^n in n.
        let eps = 1e-6;
        for &base in &[0.1, 0.5, 0.9] {
            for &n in &[0.5, 1.0, 2.0] {
                let d = DualScalar::pow_base(base, n);
                let fd = (base.powf(n + eps) - base.powf(n - eps)) / (2.0 * eps);
                assert!(
                    (d.deriv - fd).abs() < 1e-6,
                    "base {base}, n {n}: dual {} vs fd {fd}",
                    d.deriv
                );
                assert!((d.value - base.powf(n)).abs() < 1e-15);
            }
        }
    }
}
