//! Floating-point abstraction shared by the weighted graph, centrality and
//! learning code. Integer satoshi bookkeeping never goes through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub const SATS_PER_BTC: f64 = 100_000_000.0;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; always succeeds for the IEEE types.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Scalar")
    }

    fn of_usize(v: usize) -> Self {
        Self::of(v as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn sats_to_btc(sats: i64) -> Self {
        Self::of(sats as f64 / SATS_PER_BTC)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn btc_conversion() {
        assert_eq!(f64::sats_to_btc(150_000_000), 1.5);
        assert_eq!(f32::sats_to_btc(100_000_000), 1.0f32);
    }
}
