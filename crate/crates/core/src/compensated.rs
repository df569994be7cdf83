// SPDX-License-Identifier: Apache-2.0

//! Error-free transformations and twice-working-precision dot products.
//!
//! Steady-state heat currents are small differences of large gain and loss
//! terms. Evaluating them (and refining the steady state they are evaluated
//! on) with `Dot2`-style accumulation keeps the first-law residual at the
//! level of the currents' own rounding instead of `eps * rate * population`.

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly (barring overflow/underflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Accumulates `sum a_i * b_i` as if in twice the working precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dot2 {
    sum: f64,
    err: f64,
}

impl Dot2 {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, ep) = two_prod(a, b);
        let (s, es) = two_sum(self.sum, p);
        self.sum = s;
        self.err += ep + es;
    }

    #[inline]
    pub fn add(&mut self, a: f64) {
        let (s, es) = two_sum(self.sum, a);
        self.sum = s;
        self.err += es;
    }

    /// Adds `a * (x.hi + x.lo)`.
    #[inline]
    pub fn add_product_dd(&mut self, a: f64, x: DoubleDouble) {
        self.add_product(a, x.hi);
        self.add_product(a, x.lo);
    }

    pub fn finish(self) -> DoubleDouble {
        DoubleDouble::new(self.sum, self.err)
    }

    pub fn value(self) -> f64 {
        self.sum + self.err
    }
}

/// Compensated sum of a slice.
pub fn sum2(values: &[f64]) -> f64 {
    let mut acc = Dot2::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_recovers_lost_low_part() {
        let (s, e) = two_sum(1.0, 1e-17);
        assert_eq!(s, 1.0);
        assert_eq!(e, 1e-17);
    }

    #[test]
    fn two_prod_is_exact_for_representable_split() {
        let a = 1.0 + f64::EPSILON;
        let (p, e) = two_prod(a, a);
        // (1+u)^2 = 1 + 2u + u^2; u^2 is lost in p and recovered in e
        assert_eq!(p, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(e, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn dot2_cancels_ill_conditioned_sum() {
        // 1e16 + 1 - 1e16 evaluated naively loses the 1
        let mut d = Dot2::new();
        d.add_product(1e16, 1.0);
        d.add_product(1.0, 1.0);
        d.add_product(-1e16, 1.0);
        assert_eq!(d.value(), 1.0);
        assert_eq!(sum2(&[1e16, 1.0, -1e16]), 1.0);
    }
}
