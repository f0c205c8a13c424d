use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const SCALE: u32 = 1_000_000;

/// Fixed six-decimal rendering, rounding half away from zero.
pub fn render(v: &BigRational) -> String {
    let scaled = v.abs() * BigRational::from_integer(BigInt::from(SCALE));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rounded = (scaled + half).floor().to_integer();
    let (int, frac) = rounded.div_rem(&BigInt::from(SCALE));
    let sign = if v.is_negative() && !rounded.is_zero() { "-" } else { "" };
    let frac: u32 = frac.try_into().expect("remainder below scale");
    format!("{sign}{int}.{frac:06}")
}

/// The rendered value as a float, so JSON output carries the same digits as CSV.
pub fn to_f64(v: &BigRational) -> f64 {
    render(v).parse().expect("rendered decimal parses")
}
