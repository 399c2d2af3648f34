//! Compensated accumulation.
//!
//! Every mean in the crate goes through [`CompensatedSum`] (Neumaier's
//! variant of Kahan summation), so block sums and running sums stay within a
//! few ulps of the exact value even for horizons in the tens of thousands.

/// Running sum with a Neumaier correction term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// Compensated dot product `sum(w_i * x_i)`.
///
/// Products are split exactly with a fused multiply-add so the rounding error
/// of each product is carried into the correction term.
pub fn dot<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut tail = CompensatedSum::new();
    for (w, x) in pairs {
        let p = w * x;
        tail.add(w.mul_add(x, -p));
        acc.add(p);
    }
    acc.value() + tail.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn tenths_sum_exactly() {
        let s = sum(std::iter::repeat_n(0.1, 10_000));
        assert!((s - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn dot_carries_product_error() {
        let a = 1.0 + f64::EPSILON;
        let b = 1.0 - f64::EPSILON;
        // a*b = 1 - eps^2, not representable; the split keeps the -eps^2 part.
        let d = dot([(a, b), (-1.0, 1.0)]);
        assert_eq!(d, -f64::EPSILON * f64::EPSILON);
    }
}
