//! Truncated power series in the elliptic nome `q` with complex coefficients,
//! and the special functions built from them:
//!
//! ```text
//! phi(z)   = prod_{n >= 1} (1 - q^n z)
//! theta(z) = (1 - z^{-1}) phi(z) phi(z^{-1})
//! ```
//!
//! With this normalization `theta(qz) = -(qz)^{-1} theta(z)`, `theta(1/z) =
//! -z theta(z)`, and `theta'(1) = phi(1)^2`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{one, Real};

/// Relative floor below which a constant term is treated as zero when
/// inverting: `|f_0| <= INVERSION_FLOOR * max_k |f_k|` is a non-unit.
pub const INVERSION_FLOOR: f64 = 1e-12;

/// A power series `sum_{k=0}^{order} c_k q^k`, truncated after `q^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> QSeries<T> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Complex::new(T::zero(), T::zero()); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(one(), order)
    }

    pub fn constant(value: Complex<T>, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// `value * q^degree`; zero if `degree > order`.
    pub fn monomial(value: Complex<T>, degree: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if degree <= order {
            s.coeffs[degree] = value;
        }
        s
    }

    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty vector.
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty(), "a q-series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficient of `q^k` (zero past the truncation order).
    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Cauchy product truncated at the common order.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.coeffs.len();
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == T::zero() && a.im == T::zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.checked_mul(&other.inv()?)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplicative inverse modulo `q^{order+1}`.
    ///
    /// Fails when `|c_0|` is not above `INVERSION_FLOOR * max_k |c_k|`.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        let floor = T::lit(INVERSION_FLOOR) * self.max_abs();
        if !(c0.norm() > floor) {
            return Err(Error::NonUnit {
                magnitude: c0.norm().as_f64(),
                floor: floor.as_f64(),
            });
        }
        let inv0 = c0.inv();
        let n = self.coeffs.len();
        let mut g = Vec::with_capacity(n);
        g.push(inv0);
        for k in 1..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 1..=k {
                acc = acc + self.coeffs[j] * g[k - j];
            }
            g.push(-acc * inv0);
        }
        Ok(Self { coeffs: g })
    }

    /// `self^k` for any integer `k` (negative powers invert once).
    pub fn powi(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = Self::one(self.order());
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    /// Evaluates the truncated series at a numeric nome `q0` (Horner).
    pub fn collapse(&self, q0: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * q0 + c)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    /// `max_k |a_k - b_k|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.checked_sub(other)?.max_abs())
    }

    /// Largest per-coefficient deviation relative to the larger of the two
    /// series' magnitudes (absolute when both are zero).
    pub fn rel_diff(&self, other: &Self) -> Result<T> {
        let diff = self.max_abs_diff(other)?;
        let scale = self.max_abs().max(other.max_abs());
        Ok(if scale > T::zero() { diff / scale } else { diff })
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a, T: Real> $trait<&'a QSeries<T>> for &'a QSeries<T> {
            type Output = QSeries<T>;
            /// Panics on an order mismatch; use the `checked_*` form to get a `Result`.
            fn $method(self, rhs: &'a QSeries<T>) -> QSeries<T> {
                self.$checked(rhs).expect("q-series order mismatch")
            }
        }

        impl<T: Real> $trait for QSeries<T> {
            type Output = QSeries<T>;
            fn $method(self, rhs: QSeries<T>) -> QSeries<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<T: Real> Neg for &QSeries<T> {
    type Output = QSeries<T>;
    fn neg(self) -> QSeries<T> {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<T: Real> Neg for QSeries<T> {
    type Output = QSeries<T>;
    fn neg(self) -> QSeries<T> {
        -&self
    }
}

impl<T: Real> Mul<Complex<T>> for &QSeries<T> {
    type Output = QSeries<T>;
    fn mul(self, rhs: Complex<T>) -> QSeries<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for QSeries<T> {
    type Output = QSeries<T>;
    fn mul(self, rhs: Complex<T>) -> QSeries<T> {
        self.scale(rhs)
    }
}

/// `phi(z) = prod_{n=1}^{order} (1 - q^n z)`; factors with `n > order` do not
/// contribute below `q^{order+1}`.
pub fn phi_series<T: Real>(z: Complex<T>, order: usize) -> QSeries<T> {
    let mut s = QSeries::one(order);
    for n in 1..=order {
        // multiply in place by (1 - z q^n)
        for k in (n..=order).rev() {
            s.coeffs[k] = s.coeffs[k] - z * s.coeffs[k - n];
        }
    }
    s
}

/// `theta(z) = (1 - z^{-1}) phi(z) phi(z^{-1})`.
pub fn theta_series<T: Real>(z: Complex<T>, order: usize) -> Result<QSeries<T>> {
    if z.re == T::zero() && z.im == T::zero() {
        return Err(Error::ZeroArgument);
    }
    let zinv = z.inv();
    let prefactor = one::<T>() - zinv;
    Ok((&phi_series(z, order) * &phi_series(zinv, order)).scale(prefactor))
}

/// `theta'(1)`, the derivative in `z` at the simple zero `z = 1`. Since
/// `d/dz (1 - z^{-1}) = 1` there, this is `phi(1)^2`.
pub fn theta_prime_at_one<T: Real>(order: usize) -> QSeries<T> {
    let p = phi_series(one::<T>(), order);
    &p * &p
}

/// `theta(num) / theta(den)`.
pub fn theta_ratio<T: Real>(num: Complex<T>, den: Complex<T>, order: usize) -> Result<QSeries<T>> {
    theta_series(num, order)?.checked_div(&theta_series(den, order)?)
}

fn signed_product<T: Real>(
    roots: &[(Complex<T>, i32)],
    order: usize,
    f: impl Fn(Complex<T>) -> Result<QSeries<T>>,
) -> Result<QSeries<T>> {
    let mut num = QSeries::one(order);
    let mut den = QSeries::one(order);
    for &(z, sign) in roots {
        let factor = f(z)?;
        for _ in 0..sign.unsigned_abs() {
            if sign > 0 {
                num = &num * &factor;
            } else {
                den = &den * &factor;
            }
        }
    }
    if roots.iter().any(|&(_, sign)| sign < 0) {
        num.checked_div(&den)
    } else {
        Ok(num)
    }
}

/// `prod theta(root)^{sign}`: the multiplicative extension of theta to a
/// virtual bundle given by signed Chern roots.
pub fn theta_of_roots<T: Real>(roots: &[(Complex<T>, i32)], order: usize) -> Result<QSeries<T>> {
    signed_product(roots, order, |z| theta_series(z, order))
}

/// `prod phi(root)^{sign}`.
pub fn phi_of_roots<T: Real>(roots: &[(Complex<T>, i32)], order: usize) -> Result<QSeries<T>> {
    signed_product(roots, order, |z| Ok(phi_series(z, order)))
}
