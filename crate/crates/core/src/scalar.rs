//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
///
/// Everything the crate needs beyond `num_traits::Float` lives here, which
/// at the moment is only the log-gamma function.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// `ln |Γ(x)|`.
    fn ln_gamma(self) -> Self;
}

impl Real for f64 {
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}

/// Lossless-for-our-purposes conversion of an `f64` literal.
#[inline]
pub(crate) fn cst<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("index representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Signed logarithm of the Pochhammer symbol `(a)_n = Γ(a+n)/Γ(a)`.
///
/// Returns `(sign, ln|(a)_n|)`. A zero factor gives sign 0 and `-inf`.
/// For `a > 0` the gamma ratio is used; otherwise the product is accumulated
/// factor by factor so the sign stays tracked.
pub fn ln_pochhammer<T: Real>(a: T, n: usize) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    if a > T::zero() {
        return (T::one(), (a + from_usize(n)).ln_gamma() - a.ln_gamma());
    }
    let mut sign = T::one();
    let mut acc = T::zero();
    for i in 0..n {
        let f = a + from_usize(i);
        if f == T::zero() {
            return (T::zero(), T::neg_infinity());
        }
        if f < T::zero() {
            sign = -sign;
        }
        acc = acc + f.abs().ln();
    }
    (sign, acc)
}

/// `ln n!`.
#[inline]
pub fn ln_factorial<T: Real>(n: usize) -> T {
    (from_usize::<T>(n) + T::one()).ln_gamma()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_matches_products() {
        let (s, l) = ln_pochhammer(0.5f64, 3);
        assert_eq!(s, 1.0);
        assert!((l.exp() - 0.5 * 1.5 * 2.5).abs() < 1e-13);

        let (s, l) = ln_pochhammer(-3.0f64, 2);
        assert_eq!(s, 1.0);
        assert!((l.exp() - 6.0).abs() < 1e-13);

        let (s, l) = ln_pochhammer(-2.5f64, 1);
        assert_eq!(s, -1.0);
        assert!((l.exp() - 2.5).abs() < 1e-13);

        let (s, _) = ln_pochhammer(-2.0f64, 3);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn factorials() {
        assert!((ln_factorial::<f64>(0)).abs() < 1e-15);
        assert!((ln_factorial::<f64>(5).exp() - 120.0).abs() < 1e-10);
        assert!((ln_factorial::<f32>(4).exp() - 24.0).abs() < 1e-3);
    }
}
