//! The single source of truth for supercommutation signs.
//!
//! Every sign of the form (-1)^{p q} that appears anywhere in the engine is
//! produced by this module. No other code path is allowed to compute a
//! Koszul sign on its own; the sign-coherence test shims this module and
//! checks that supercommutativity visibly degrades, which it only can if
//! all signs flow through here.

use crate::error::{CoreError, Result};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

/// Z/2 grading of an element or operator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_i32(n: i32) -> Parity {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Shifted parity, used when a coefficient crosses an element sitting
    /// in an odd-bracket slot.
    pub fn shifted(self) -> Parity {
        self + Parity::Odd
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        if self == rhs {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl AddAssign for Parity {
    fn add_assign(&mut self, rhs: Parity) {
        *self = *self + rhs;
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

thread_local! {
    static TRIVIAL_SIGNS: Cell<bool> = const { Cell::new(false) };
}

/// Test shim: make every Koszul sign +1 on the current thread. Only the
/// sign-coherence test is supposed to touch this.
#[doc(hidden)]
pub fn force_trivial_signs(on: bool) {
    TRIVIAL_SIGNS.with(|c| c.set(on));
}

/// A sign of +1 or -1 originating from a Koszul convention. The private
/// field keeps other modules from minting signs of their own.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Sign(i8);

impl Sign {
    pub fn one() -> Sign {
        Sign(1)
    }

    fn minus_one() -> Sign {
        if TRIVIAL_SIGNS.with(|c| c.get()) {
            Sign(1)
        } else {
            Sign(-1)
        }
    }

    /// (-1)^{a b}: the sign of swapping two adjacent homogeneous symbols.
    pub fn swap(a: Parity, b: Parity) -> Sign {
        if a.is_odd() && b.is_odd() {
            Sign::minus_one()
        } else {
            Sign(1)
        }
    }

    /// (-1)^{p}: the sign picked up when an odd operator moves past a
    /// homogeneous symbol of parity `p`.
    pub fn flip(p: Parity) -> Sign {
        if p.is_odd() {
            Sign::minus_one()
        } else {
            Sign(1)
        }
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn to_rat(self) -> Rat {
        if self.0 < 0 {
            -Rat::one()
        } else {
            Rat::one()
        }
    }

    pub fn apply(self, r: &Rat) -> Rat {
        if self.0 < 0 {
            -r
        } else {
            r.clone()
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign(self.0 * rhs.0)
    }
}

/// Koszul sign of rearranging a list of homogeneous symbols.
///
/// `perm[i]` is the index (into `parities`) of the symbol that ends up in
/// position `i`. The sign is the product of (-1)^{p q} over every pair that
/// gets inverted, computed by a stable transposition decomposition.
pub fn koszul_sign(parities: &[Parity], perm: &[usize]) -> Result<Sign> {
    if perm.len() != parities.len() {
        return Err(CoreError::Argument(format!(
            "permutation length {} does not match symbol count {}",
            perm.len(),
            parities.len()
        )));
    }
    let mut seen = vec![false; parities.len()];
    for &p in perm {
        if p >= parities.len() || seen[p] {
            return Err(CoreError::Argument(format!(
                "malformed permutation {perm:?}"
            )));
        }
        seen[p] = true;
    }

    // Bubble the target arrangement back to the identity, one adjacent
    // transposition at a time.
    let mut arr: Vec<usize> = perm.to_vec();
    let mut sign = Sign::one();
    for i in 0..arr.len() {
        // Find the symbol that belongs at position i and walk it left.
        let mut j = i;
        while arr[j] != i {
            j += 1;
        }
        while j > i {
            sign = sign * Sign::swap(parities[arr[j]], parities[arr[j - 1]]);
            arr.swap(j, j - 1);
            j -= 1;
        }
    }
    Ok(sign)
}

/// Sign for merging two ascending lists of distinct odd symbols into one
/// ascending list, as happens when multiplying square-free monomials.
pub fn merge_sign(left: &[usize], right: &[usize]) -> Sign {
    // All symbols are odd; build the permutation sorting left ++ right.
    let mut combined: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
    let parities = vec![Parity::Odd; combined.len()];
    let mut order: Vec<usize> = (0..combined.len()).collect();
    order.sort_by_key(|&i| combined[i]);
    // `order` now maps final position -> original slot.
    let sign = koszul_sign(&parities, &order).expect("internal permutation is well formed");
    combined.sort_unstable();
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_swap_is_plus() {
        let s = koszul_sign(&[Parity::Even, Parity::Even], &[1, 0]).unwrap();
        assert_eq!(s, Sign::one());
    }

    #[test]
    fn odd_swap_is_minus() {
        let s = koszul_sign(&[Parity::Odd, Parity::Odd], &[1, 0]).unwrap();
        assert!(s.is_negative());
    }

    // A cyclic shift of three odd symbols is two odd transpositions.
    #[test]
    fn odd_three_cycle_is_plus() {
        let odd3 = [Parity::Odd; 3];
        let s = koszul_sign(&odd3, &[2, 0, 1]).unwrap();
        assert_eq!(s, Sign::one());
        let s = koszul_sign(&odd3, &[1, 2, 0]).unwrap();
        assert_eq!(s, Sign::one());
    }

    #[test]
    fn mixed_parity_inversion() {
        // odd past even: +1, odd past odd: -1
        let s = koszul_sign(&[Parity::Odd, Parity::Even], &[1, 0]).unwrap();
        assert_eq!(s, Sign::one());
        let s = koszul_sign(&[Parity::Odd, Parity::Even, Parity::Odd], &[2, 1, 0]).unwrap();
        assert!(s.is_negative());
    }

    #[test]
    fn malformed_permutation_rejected() {
        assert!(koszul_sign(&[Parity::Even], &[0, 0]).is_err());
        assert!(koszul_sign(&[Parity::Even, Parity::Odd], &[0, 2]).is_err());
        assert!(koszul_sign(&[Parity::Even, Parity::Odd], &[0]).is_err());
    }

    #[test]
    fn merge_sign_counts_odd_inversions() {
        // {1,3} merged with {0,2}: 1 and 3 each jump past smaller odd
        // symbols: inversions (1,0), (3,0), (3,2) -> sign -1.
        assert!(merge_sign(&[1, 3], &[0, 2]).is_negative());
        // Disjoint already-ordered merge: no inversions.
        assert_eq!(merge_sign(&[0, 1], &[2, 3]), Sign::one());
    }
}
