//! Kronecker (Weyl) sequences `frac(n * alpha_k)`.
//!
//! Generators are stored as 128-bit binary fractions, so `frac(n * alpha)` is
//! a wrapping integer multiply: exact for every `n`, with no drift from
//! floating-point products. The default generators are `frac(pi^k)`, computed
//! in fixed-point big-integer arithmetic.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;

use super::{Codomain, PointSource};
use crate::error::{Error, Result};

/// Minimum number of fractional decimal digits accepted for a generator.
const MIN_GENERATOR_DIGITS: usize = 16;
/// Convergents with denominators up to this bound mark a generator as rational.
const RATIONAL_DENOMINATOR_BOUND: u64 = 1_000_000;
/// Generators closer than this to a small-denominator rational are rejected.
const RATIONAL_TOLERANCE_DIGITS: u32 = 15;
/// Default generators are computed in blocks with a precision that depends
/// only on the block, so each value is independent of evaluation order.
const PI_BLOCK: usize = 32;

/// An irrational in `(0,1)` as a 128-bit binary fraction `alpha * 2^128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator(u128);

impl Generator {
    pub fn from_fraction_bits(bits: u128) -> Self {
        Self(bits)
    }

    pub fn fraction_bits(&self) -> u128 {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        bits_to_unit(self.0)
    }

    /// Parses `"0.ddddd..."` and rejects values that are not in `(0,1)`, that
    /// carry too few digits, or whose continued fraction reaches the value with
    /// a denominator of at most `10^6`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BadGenerator {
            value: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let digits = trimmed
            .strip_prefix("0.")
            .or_else(|| trimmed.strip_prefix('.'))
            .ok_or_else(|| bad("expected a decimal of the form 0.ddd"))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("expected only decimal digits after the point"));
        }
        if digits.len() < MIN_GENERATOR_DIGITS {
            return Err(bad("at least 16 fractional digits are required"));
        }
        let numerator = BigUint::parse_bytes(digits.as_bytes(), 10).expect("validated digits");
        if numerator == BigUint::from(0u32) {
            return Err(bad("generator must lie in (0,1)"));
        }
        let denominator = BigUint::from(10u32).pow(digits.len() as u32);
        if looks_rational(&numerator, &denominator) {
            return Err(bad("continued fraction reaches a denominator <= 10^6"));
        }
        let scaled: BigUint = (numerator << 128u32) / denominator;
        Ok(Self(to_u128(&scaled)))
    }
}

fn bits_to_unit(bits: u128) -> f64 {
    (bits >> 75) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn to_u128(value: &BigUint) -> u128 {
    let digits = value.to_u64_digits();
    let lo = digits.first().copied().unwrap_or(0) as u128;
    let hi = digits.get(1).copied().unwrap_or(0) as u128;
    (hi << 64) | lo
}

/// Continued-fraction test for `numerator / denominator` being within
/// `10^-15` of a rational with denominator at most `10^6`.
fn looks_rational(numerator: &BigUint, denominator: &BigUint) -> bool {
    let zero = BigUint::from(0u32);
    let bound = BigUint::from(RATIONAL_DENOMINATOR_BOUND);
    let tol_scale = BigUint::from(10u32).pow(RATIONAL_TOLERANCE_DIGITS);

    let (mut num, mut den) = (numerator.clone(), denominator.clone());
    let (mut p_prev, mut p) = (BigUint::from(0u32), BigUint::from(1u32));
    let (mut q_prev, mut q) = (BigUint::from(1u32), BigUint::from(0u32));
    // (p_{-2}, p_{-1}) = (0, 1), (q_{-2}, q_{-1}) = (1, 0)
    while den != zero {
        let a = &num / &den;
        let rem = &num % &den;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        if q > bound {
            return false;
        }
        if q != zero {
            // |x - p/q| <= 10^-15  <=>  |num0*q - p*den0| * 10^15 <= q*den0
            let lhs = numerator * &q;
            let rhs = &p * denominator;
            let diff = if lhs > rhs { lhs - rhs } else { rhs - lhs };
            if diff * &tol_scale <= &q * denominator {
                return true;
            }
        }
        num = den;
        den = rem;
    }
    true
}

/// `pi * 2^bits`, via Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)`.
fn pi_fixed(bits: u32) -> BigUint {
    const GUARD: u32 = 32;
    let total = bits + GUARD;
    let pi = atan_inverse(5, total) * 16u32 - atan_inverse(239, total) * 4u32;
    pi >> GUARD
}

/// `atan(1/x) * 2^bits` by its alternating Taylor series.
fn atan_inverse(x: u32, bits: u32) -> BigUint {
    let one = BigUint::from(1u32) << bits;
    let x_sq = BigUint::from(x) * x;
    let mut power = one / x;
    let mut positive = BigUint::from(0u32);
    let mut negative = BigUint::from(0u32);
    let mut j = 0u32;
    let zero = BigUint::from(0u32);
    while power != zero {
        let term = &power / (2 * j + 1);
        if j % 2 == 0 {
            positive += term;
        } else {
            negative += term;
        }
        power /= &x_sq;
        j += 1;
    }
    positive - negative
}

fn block_precision(block: usize) -> u32 {
    // pi^k < 2^(1.66 k); k truncated products lose ~log2(k) bits; keep 128
    // fraction bits plus margin.
    let top = (block + 1) * PI_BLOCK;
    (256 + 2 * top + 64) as u32
}

fn pi_power_block(block: usize) -> Vec<u128> {
    let bits = block_precision(block);
    let pi = pi_fixed(bits);
    let mask = (BigUint::from(1u32) << bits) - 1u32;
    let first = block * PI_BLOCK + 1;
    let mut power = pi.clone();
    for _ in 1..first {
        power = (&power * &pi) >> bits;
    }
    let mut out = Vec::with_capacity(PI_BLOCK);
    for _ in 0..PI_BLOCK {
        let frac = (&power & &mask) >> (bits - 128);
        out.push(to_u128(&frac));
        power = (&power * &pi) >> bits;
    }
    out
}

/// Default generators `frac(pi^1), ..., frac(pi^count)`.
pub fn pi_power_generators(count: usize) -> Vec<Generator> {
    let blocks = count.div_ceil(PI_BLOCK);
    (0..blocks)
        .flat_map(pi_power_block)
        .take(count)
        .map(Generator)
        .collect()
}

#[derive(Debug, Clone)]
enum Generators {
    Explicit(Arc<[Generator]>),
    PiPowers(Arc<RwLock<BTreeMap<usize, Arc<[u128]>>>>),
}

impl Generators {
    fn get(&self, k: usize) -> Result<u128> {
        match self {
            Generators::Explicit(list) => list
                .get(k)
                .map(|g| g.0)
                .ok_or(Error::RankUnavailable { coordinate: k, rank: list.len() }),
            Generators::PiPowers(cache) => {
                let block = k / PI_BLOCK;
                if let Some(values) = cache.read().expect("generator cache poisoned").get(&block) {
                    return Ok(values[k % PI_BLOCK]);
                }
                let values: Arc<[u128]> = pi_power_block(block).into();
                let value = values[k % PI_BLOCK];
                cache
                    .write()
                    .expect("generator cache poisoned")
                    .entry(block)
                    .or_insert(values);
                Ok(value)
            }
        }
    }
}

/// Weyl sequence: coordinate `k` of point `n` is `frac((n + offset) * alpha_k)`.
#[derive(Debug, Clone)]
pub struct WeylSource {
    generators: Generators,
    offset: u64,
}

/// Weyl source with explicit generators given as high-precision decimals.
pub fn weyl_source<S: AsRef<str>>(alphas: &[S], index_offset: u64) -> Result<WeylSource> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("weyl source needs at least one generator".into()));
    }
    let parsed = alphas
        .iter()
        .map(|a| Generator::parse(a.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylSource { generators: Generators::Explicit(parsed.into()), offset: index_offset })
}

/// Weyl source with generators `frac(pi^k)` for coordinate `k = 1, 2, ...`.
pub fn weyl_source_default(index_offset: u64) -> WeylSource {
    WeylSource {
        generators: Generators::PiPowers(Arc::default()),
        offset: index_offset,
    }
}

impl PointSource for WeylSource {
    fn kind(&self) -> &'static str {
        "weyl"
    }

    fn codomain(&self) -> Codomain {
        Codomain::UnitCube
    }

    fn max_rank(&self) -> Option<usize> {
        match &self.generators {
            Generators::Explicit(list) => Some(list.len()),
            Generators::PiPowers(_) => None,
        }
    }

    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        let alpha = self.generators.get(k)?;
        let index = (n + self.offset) as u128;
        Ok(bits_to_unit(index.wrapping_mul(alpha)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // frac(pi^k), k = 1..5, from a 50-digit evaluation of pi^k.
    const PI_POWER_FRACTIONS: [f64; 5] = [
        0.141_592_653_589_793_24,
        0.869_604_401_089_358_6,
        0.006_276_680_299_820_175,
        0.409_091_034_002_437_2,
        0.019_684_785_281_453_263,
    ];

    #[test]
    fn pi_fixed_matches_known_digits() {
        let pi = pi_fixed(128);
        // floor(pi * 2^128)
        let expected = BigUint::parse_bytes(b"1069028584064966747859680373161870783300", 10).unwrap();
        let diff = if pi > expected { &pi - &expected } else { &expected - &pi };
        assert!(diff <= BigUint::from(1u32), "pi bits off by {diff}");
    }

    #[test]
    fn default_generators_are_fractional_parts_of_pi_powers() {
        let gens = pi_power_generators(5);
        for (g, expected) in gens.iter().zip(PI_POWER_FRACTIONS) {
            assert!((g.to_f64() - expected).abs() < 1e-15, "{} vs {}", g.to_f64(), expected);
        }
    }

    #[test]
    fn high_powers_are_stable_across_precision() {
        // Recompute block 1 with a much larger precision by hand and compare.
        let bits = block_precision(1) + 512;
        let pi = pi_fixed(bits);
        let mask = (BigUint::from(1u32) << bits) - 1u32;
        let mut power = pi.clone();
        for _ in 1..40 {
            power = (&power * &pi) >> bits;
        }
        let frac = to_u128(&((&power & &mask) >> (bits - 128)));
        let cached = pi_power_generators(40)[39].fraction_bits();
        assert!(frac.abs_diff(cached) < 1 << 16);
    }

    #[test]
    fn weyl_examples() {
        let src = weyl_source_default(0);
        let x = src.point_at(2, 1).unwrap().coords()[0];
        assert!((x - 0.283_185_31).abs() < 1e-8);
        assert_eq!(src.point_at(0, 4).unwrap().coords(), &[0.0; 4]);
    }

    #[test]
    fn explicit_generators_match_default() {
        let src = weyl_source(&["0.14159265358979323846264338327950288"], 0).unwrap();
        let default = weyl_source_default(0);
        for n in [1u64, 17, 123_456, 9_999_999] {
            let a = src.coordinate(n, 0).unwrap();
            let b = default.coordinate(n, 0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(src.point_at(0, 2), Err(Error::RankUnavailable { .. })));
    }

    #[test]
    fn rejects_rational_generators() {
        for bad in [
            "0.5000000000000000",
            "0.3333333333333333333",
            "0.1428571428571428571428",
            "0.0000010000000000000",
        ] {
            assert!(
                matches!(Generator::parse(bad), Err(Error::BadGenerator { .. })),
                "{bad} accepted"
            );
        }
    }

    #[test]
    fn rejects_malformed_generators() {
        for bad in ["1.5", "0.12", "abc", "0.000000000000000000", "-0.14159265358979323"] {
            assert!(Generator::parse(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn accepts_irrational_generators() {
        for good in [
            "0.41421356237309504880", // sqrt 2
            "0.61803398874989484820", // golden ratio
            "0.71828182845904523536", // e
        ] {
            assert!(Generator::parse(good).is_ok(), "{good} rejected");
        }
    }

    #[test]
    fn wrapping_multiply_is_exact_for_large_indices() {
        let g = Generator::parse("0.61803398874989484820458683436563811772").unwrap();
        let src = WeylSource { generators: Generators::Explicit(vec![g].into()), offset: 0 };
        // n * alpha mod 1 for n = 10^12, reference from a 40-digit computation.
        let x = src.coordinate(1_000_000_000_000, 0).unwrap();
        assert!((x - 0.894_848_204_586_834_4).abs() < 1e-12, "{x}");
    }
}
