use std::sync::OnceLock;

use super::{Codomain, PointSource};
use crate::error::Result;

const PRIME_TABLE_LEN: usize = 4096;

fn prime_table() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut primes = Vec::with_capacity(PRIME_TABLE_LEN);
        let mut candidate = 2u64;
        while primes.len() < PRIME_TABLE_LEN {
            if is_prime_given(&primes, candidate) {
                primes.push(candidate);
            }
            candidate += 1;
        }
        primes
    })
}

fn is_prime_given(smaller: &[u64], candidate: u64) -> bool {
    smaller
        .iter()
        .take_while(|&&p| p * p <= candidate)
        .all(|&p| candidate % p != 0)
}

fn is_prime(candidate: u64) -> bool {
    if candidate < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= candidate {
        if candidate % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// The `k`-th prime, 0-based (`nth_prime(0) == 2`).
pub fn nth_prime(k: usize) -> u64 {
    let table = prime_table();
    if k < table.len() {
        return table[k];
    }
    // Past the table: walk forward from its last entry.
    let mut count = table.len() - 1;
    let mut candidate = table[count];
    while count < k {
        candidate += 2;
        if is_prime(candidate) {
            count += 1;
        }
    }
    candidate
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Halton sequence: coordinate `k` is the radical inverse of `n + offset` in
/// the `(k+1)`-th prime base.
#[derive(Debug, Clone)]
pub struct HaltonSource {
    offset: u64,
}

pub fn halton_source(index_offset: u64) -> HaltonSource {
    HaltonSource { offset: index_offset }
}

impl HaltonSource {
    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl PointSource for HaltonSource {
    fn kind(&self) -> &'static str {
        "halton"
    }

    fn codomain(&self) -> Codomain {
        Codomain::UnitCube
    }

    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        Ok(radical_inverse(n + self.offset, nth_prime(k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_start_correctly() {
        let first: Vec<u64> = (0..10).map(nth_prime).collect();
        assert_eq!(first, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn primes_past_the_table_continue_the_sequence() {
        let last = nth_prime(PRIME_TABLE_LEN - 1);
        let next = nth_prime(PRIME_TABLE_LEN);
        assert!(next > last);
        assert!(is_prime(next));
        assert!((last + 1..next).all(|c| !is_prime(c)));
    }

    #[test]
    fn radical_inverse_base_two_by_hand() {
        // 1 = 0b1 -> 0.1b, 3 = 0b11 -> 0.11b, 6 = 0b110 -> 0.011b
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert_eq!(radical_inverse(0, 7), 0.0);
    }

    #[test]
    fn halton_examples() {
        let h = halton_source(0);
        assert_eq!(h.point_at(1, 1).unwrap().coords(), &[0.5]);
        assert_eq!(h.point_at(3, 1).unwrap().coords(), &[0.75]);
        let p = h.point_at(2, 2).unwrap();
        assert_eq!(p.coords()[0], 0.25);
        assert!((p.coords()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn offset_shifts_indexing() {
        let shifted = halton_source(1);
        let plain = halton_source(0);
        assert_eq!(shifted.point_at(1, 1).unwrap(), plain.point_at(2, 1).unwrap());
    }
}
