//! The coefficient-ring abstraction.
//!
//! Graded elements are sparse combinations of basis vectors with
//! coefficients in one of three rings: plain rationals, truncated
//! super power series, or super power series with hbar-Laurent values.
//! All three are supercommutative; the trait exposes just enough for the
//! element and operator layers to stay generic.

use crate::error::Result;
use crate::koszul::{Parity, Sign};
use crate::rat::Rat;
use std::fmt::Debug;

pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn is_zero(&self) -> bool;

    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn scale(&self, r: &Rat) -> Self;
    fn apply_sign(&self, s: Sign) -> Self;

    /// Multiplies every parity-homogeneous component of parity pi by the
    /// Koszul sign (-1)^{pi * p}. This is the sign a coefficient picks up
    /// when it crosses a homogeneous symbol of parity `p`.
    fn koszul_flip(&self, p: Parity) -> Self;

    /// Splits into (even, odd) parity components.
    fn split_parity(&self) -> (Self, Self);
}

impl Coeff for Rat {
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }

    fn neg(&self) -> Self {
        -self
    }

    fn scale(&self, r: &Rat) -> Self {
        self * r
    }

    fn apply_sign(&self, s: Sign) -> Self {
        s.apply(self)
    }

    fn koszul_flip(&self, _p: Parity) -> Self {
        self.clone()
    }

    fn split_parity(&self) -> (Self, Self) {
        (self.clone(), Rat::zero())
    }
}
