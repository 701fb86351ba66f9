//! Forward-mode dual numbers.
//!
//! [`Dual<T>`] carries a value and one directional derivative. Because `Dual<T>`
//! is itself [`Real`] whenever `T` is, nesting (`Dual<Dual<f64>>`) yields mixed
//! second derivatives, which is how the curvature engine differentiates
//! Christoffel symbols without finite differences.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar type that metric formulas are written against.
///
/// Implemented by `f64` and, recursively, by `Dual<T>`.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn cst(v: f64) -> Self;
    /// Innermost real part.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self;

    /// Evaluates the `order`-th derivative of a univariate function at `self`,
    /// where `f(t, k)` returns the k-th derivative of the function at the real
    /// point `t`. Lets externally supplied functions (interpolated scale
    /// factors, for instance) participate in dual arithmetic.
    fn taylor(self, f: &dyn Fn(f64, usize) -> f64, order: usize) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        f64::tan(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    fn taylor(self, f: &dyn Fn(f64, usize) -> f64, order: usize) -> Self {
        f(self, order)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// A constant (zero derivative).
    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    /// An independent variable (unit derivative).
    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: self.eps * df,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.eps - q * o.eps) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self::new(self.re + o, self.eps)
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Self::new(self.re - o, self.eps)
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Self::new(self.re * o, self.eps * o)
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        Self::new(self.re / o, self.eps / o)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, t * t + 1.0)
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.re.powi(n), self.re.powi(n - 1) * n as f64),
        }
    }
    fn powf(self, p: f64) -> Self {
        self.chain(self.re.powf(p), self.re.powf(p - 1.0) * p)
    }
    fn recip(self) -> Self {
        let r = self.re.recip();
        self.chain(r, -(r * r))
    }
    fn taylor(self, f: &dyn Fn(f64, usize) -> f64, order: usize) -> Self {
        Self::new(
            self.re.taylor(f, order),
            self.eps * self.re.taylor(f, order + 1),
        )
    }
}

/// First-order dual over `f64`.
pub type D1 = Dual<f64>;
/// Nested dual: carries mixed second derivatives.
pub type D2 = Dual<Dual<f64>>;

/// Seeds `x` as duals with unit derivative along coordinate `dir`.
pub fn seed<T: Real>(x: &[T], dir: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            if i == dir {
                Dual::variable(xi)
            } else {
                Dual::constant(xi)
            }
        })
        .collect()
}

/// Derivative of a scalar function of one variable at `x`.
pub fn derivative<F: Fn(D1) -> D1>(f: F, x: f64) -> (f64, f64) {
    let y = f(Dual::variable(x));
    (y.re, y.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_derivatives_match_central_differences() {
        let x = 0.7;
        let cases: Vec<(Box<dyn Fn(D1) -> D1>, Box<dyn Fn(f64) -> f64>)> = vec![
            (Box::new(|z: D1| z.sin() * z.cosh()), Box::new(|z: f64| z.sin() * z.cosh())),
            (Box::new(|z: D1| z.tan() / (z + 2.0)), Box::new(|z: f64| z.tan() / (z + 2.0))),
            (Box::new(|z: D1| z.sqrt().ln() - z.exp()), Box::new(|z: f64| z.sqrt().ln() - z.exp())),
            (Box::new(|z: D1| z.powi(5).recip()), Box::new(|z: f64| z.powi(5).recip())),
            (Box::new(|z: D1| z.powf(-0.75) * z.sinh()), Box::new(|z: f64| z.powf(-0.75) * z.sinh())),
        ];
        for (d, f) in &cases {
            let (v, dv) = derivative(d, x);
            assert!((v - f(x)).abs() < 1e-14);
            assert!((dv - fd(f, x)).abs() < 1e-8, "{dv} vs {}", fd(f, x));
        }
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        // f(x) = x^3 sin x; f'' = 6x sin x + 6x^2 cos x - x^3 sin x
        let x = 1.3;
        let z: D2 = Dual::new(Dual::variable(x), Dual::constant(1.0));
        let y = z.powi(3) * z.sin();
        let exact = 6.0 * x * x.sin() + 6.0 * x * x * x.cos() - x.powi(3) * x.sin();
        assert!((y.eps.eps - exact).abs() < 1e-12);
        assert!((y.re.eps - y.eps.re).abs() < 1e-12);
    }

    #[test]
    fn taylor_lifts_external_functions() {
        // exp given by its derivative table
        let f = |t: f64, _k: usize| t.exp();
        let z: D2 = Dual::new(Dual::variable(0.4), Dual::constant(1.0));
        let y = z.taylor(&f, 0);
        let e = 0.4f64.exp();
        assert!((y.re.re - e).abs() < 1e-15);
        assert!((y.eps.eps - e).abs() < 1e-15);
    }
}
