//! Complex edge weights with grid-quantized equality.

use num_complex::Complex64;

/// Default quantization step for weight equality and hashing.
pub const DEFAULT_GRID: f64 = 1e-9;

/// Integer key of a weight rounded to the manager's grid.
///
/// Two weights are equal exactly when their keys coincide, which keeps
/// equality transitive and consistent with hashing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightKey(pub i64, pub i64);

impl WeightKey {
    pub const ZERO: WeightKey = WeightKey(0, 0);

    pub fn of(w: Complex64, grid: f64) -> Self {
        WeightKey(quantize(w.re, grid), quantize(w.im, grid))
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

fn quantize(x: f64, grid: f64) -> i64 {
    let q = (x / grid).round();
    // Saturating cast; weights this large only appear in broken inputs.
    q as i64
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearby_weights_share_a_key() {
        let a = WeightKey::of(c(0.5, -0.25), DEFAULT_GRID);
        let b = WeightKey::of(c(0.5 + 1e-13, -0.25 - 1e-13), DEFAULT_GRID);
        assert_eq!(a, b);
        assert_ne!(a, WeightKey::of(c(0.5 + 1e-8, -0.25), DEFAULT_GRID));
    }

    #[test]
    fn negative_zero_is_zero() {
        assert!(WeightKey::of(c(-0.0, -1e-12), DEFAULT_GRID).is_zero());
    }
}
