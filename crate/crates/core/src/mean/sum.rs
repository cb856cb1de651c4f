use std::ops::AddAssign;

use num_complex::Complex64;

/// Kahan-Babuska-Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn compensation(&self) -> f64 {
        self.compensation
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

/// Componentwise compensated sum of complex terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn compensation(&self) -> Complex64 {
        Complex64::new(self.re.compensation(), self.im.compensation())
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &Self) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s += x;
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn many_tenths() {
        let mut s = NeumaierSum::default();
        let mut naive = 0.0;
        for _ in 0..10_000_000 {
            s += 0.1;
            naive += 0.1;
        }
        assert!((s.value() - 1e6).abs() < 1e-9);
        assert!((naive - 1e6f64).abs() > 1e-6);
    }

    #[test]
    fn merge_matches_sequential() {
        let terms: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3 - 0.4).collect();
        let mut whole = NeumaierSum::default();
        terms.iter().for_each(|&t| whole += t);
        let (a, b) = terms.split_at(377);
        let mut left = NeumaierSum::default();
        let mut right = NeumaierSum::default();
        a.iter().for_each(|&t| left += t);
        b.iter().for_each(|&t| right += t);
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() <= 1e-15 * whole.value().abs().max(1.0));
    }
}
