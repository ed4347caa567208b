//! Number formatting shared by the CSV writers.

use crate::scalar::Real;

/// 17 significant digits in scientific notation; parses back bit-exactly
/// for `f64`.
pub fn fmt_num<T: Real>(x: T) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(0.1f64), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0f64), "-2.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn round_trips_bit_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = fmt_num(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
