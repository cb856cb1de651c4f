use super::{Codomain, PointSource};
use crate::error::Result;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based pseudorandom points: coordinate `(n, k)` is a pure hash of
/// `(seed, n, k)`, mapped to the open interval `(0, 1)`.
#[derive(Debug, Clone)]
pub struct PseudorandomSource {
    seed: u64,
    key: u64,
}

pub fn pseudorandom_source(seed: u64) -> PseudorandomSource {
    PseudorandomSource { seed, key: mix64(seed ^ 0x6A09_E667_F3BC_C909) }
}

impl PseudorandomSource {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits(&self, n: u64, k: usize) -> u64 {
        let h = mix64(self.key ^ n);
        mix64(h ^ (k as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
    }
}

impl PointSource for PseudorandomSource {
    fn kind(&self) -> &'static str {
        "pseudorandom"
    }

    fn codomain(&self) -> Codomain {
        Codomain::UnitCube
    }

    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        // Midpoint of a 2^-53 cell: never exactly 0 or 1.
        let top = self.bits(n, k) >> 11;
        Ok((top as f64 + 0.5) * (1.0 / (1u64 << 53) as f64))
    }
}
