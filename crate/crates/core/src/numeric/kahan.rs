//! Compensated (Neumaier) summation.

use std::ops::AddAssign;

/// Running sum with a Neumaier correction term.
///
/// The correction handles terms both smaller and larger than the running
/// sum, so the accumulated error stays at a few ulps regardless of length.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

impl AddAssign<f64> for KahanSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl From<KahanSum> for f64 {
    fn from(k: KahanSum) -> f64 {
        k.value()
    }
}

/// Accumulator that is either a plain sum or a compensated one.
#[derive(Clone, Copy, Debug)]
pub enum Accumulator {
    Naive(f64),
    Compensated(KahanSum),
}

impl Accumulator {
    pub fn new(compensated: bool) -> Self {
        if compensated {
            Accumulator::Compensated(KahanSum::new())
        } else {
            Accumulator::Naive(0.0)
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self {
            Accumulator::Naive(s) => *s += x,
            Accumulator::Compensated(k) => k.add(x),
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        match self {
            Accumulator::Naive(s) => *s,
            Accumulator::Compensated(k) => k.value(),
        }
    }
}
