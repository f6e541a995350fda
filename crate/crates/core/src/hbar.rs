//! Laurent coefficients in the formal parameter hbar.
//!
//! Half-integer powers of hbar occur naturally (the rescaling weight
//! (n+q-p)/2 is a half-integer for odd classes), so the atomic variable is
//! nu with nu^2 = hbar and every stored power is an integer power of nu.
//!
//! Every value carries an explicit power window. An operation that would
//! land outside the window is a hard error, never a silent truncation:
//! leakage of hbar powers is a correctness signal downstream.

use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::koszul::{Parity, Sign};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Inclusive window of allowed nu-powers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HbarWindow {
    pub min: i32,
    pub max: i32,
}

impl HbarWindow {
    pub fn new(min: i32, max: i32) -> Self {
        assert!(min <= max, "empty hbar window");
        HbarWindow { min, max }
    }

    /// Default window for a pipeline run at truncation order `order` on a
    /// model of dimension weight `n`: wide enough for transports, the
    /// rescaling weights, and the pairings built from them.
    pub fn for_run(order: usize, n: usize) -> Self {
        let r = 4 * order as i32 + 4 * n as i32 + 8;
        HbarWindow::new(-r, r)
    }

    pub fn contains(&self, power: i32) -> bool {
        self.min <= power && power <= self.max
    }

    fn check(&self, power: i32) -> Result<()> {
        if self.contains(power) {
            Ok(())
        } else {
            Err(CoreError::WindowOverflow {
                power,
                min: self.min,
                max: self.max,
            })
        }
    }
}

/// Sparse Laurent polynomial in nu = hbar^{1/2} over the rationals.
#[derive(Clone, PartialEq, Debug)]
pub struct HbarLaurent {
    window: HbarWindow,
    terms: BTreeMap<i32, Rat>,
}

impl HbarLaurent {
    pub fn zero(window: HbarWindow) -> Self {
        HbarLaurent {
            window,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(window: HbarWindow) -> Result<Self> {
        Self::nu_pow(window, 0, Rat::one())
    }

    /// c * nu^k.
    pub fn nu_pow(window: HbarWindow, k: i32, c: Rat) -> Result<Self> {
        window.check(k)?;
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Ok(HbarLaurent { window, terms })
    }

    pub fn window(&self) -> HbarWindow {
        self.window
    }

    pub fn coeff(&self, k: i32) -> Rat {
        self.terms.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rat)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn powers(&self) -> Vec<i32> {
        self.terms.keys().copied().collect()
    }

    fn check_window(&self, other: &Self) -> Result<()> {
        if self.window == other.window {
            Ok(())
        } else {
            Err(CoreError::RingMismatch(format!(
                "hbar windows differ: [{},{}] vs [{},{}]",
                self.window.min, self.window.max, other.window.min, other.window.max
            )))
        }
    }

    fn insert(&mut self, k: i32, c: Rat) -> Result<()> {
        self.window.check(k)?;
        if c.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(k).or_insert_with(Rat::zero);
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
        Ok(())
    }

    /// Multiplies by nu^k, failing on window overflow.
    pub fn shift(&self, k: i32) -> Result<Self> {
        let mut out = HbarLaurent::zero(self.window);
        for (&w, c) in &self.terms {
            out.insert(w + k, c.clone())?;
        }
        Ok(out)
    }

    /// Formal derivative in hbar: nu^w -> (w/2) nu^{w-2}.
    pub fn hbar_derivative(&self) -> Result<Self> {
        let mut out = HbarLaurent::zero(self.window);
        for (&w, c) in &self.terms {
            if w == 0 {
                continue;
            }
            out.insert(w - 2, c * &Rat::new(w as i64, 2))?;
        }
        Ok(out)
    }

    /// The substitution hbar -> -hbar taken relative to an anchor power:
    /// the term at nu^w is scaled by (-1)^{(anchor-w)/2}. Fails when some
    /// power does not sit at an integer hbar-distance from the anchor.
    pub fn negate_hbar_from(&self, anchor: i32) -> Result<Self> {
        let mut out = HbarLaurent::zero(self.window);
        for (&w, c) in &self.terms {
            let d = anchor - w;
            if d.rem_euclid(2) != 0 {
                return Err(CoreError::Structural(format!(
                    "power nu^{w} is not an integer hbar-power away from anchor nu^{anchor}"
                )));
            }
            let c = if (d / 2).rem_euclid(2) == 0 {
                c.clone()
            } else {
                -c
            };
            out.insert(w, c)?;
        }
        Ok(out)
    }

    /// True when the only stored power is `k` (or the value is zero).
    pub fn is_concentrated_at(&self, k: i32) -> bool {
        self.terms.keys().all(|&w| w == k)
    }
}

impl Coeff for HbarLaurent {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.insert(k, c.clone())?;
        }
        Ok(out)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let mut out = HbarLaurent::zero(self.window);
        for (&k1, c1) in &self.terms {
            for (&k2, c2) in &other.terms {
                out.insert(k1 + k2, c1 * c2)?;
            }
        }
        Ok(out)
    }

    fn neg(&self) -> Self {
        HbarLaurent {
            window: self.window,
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return HbarLaurent::zero(self.window);
        }
        HbarLaurent {
            window: self.window,
            terms: self.terms.iter().map(|(&k, c)| (k, c * r)).collect(),
        }
    }

    fn apply_sign(&self, s: Sign) -> Self {
        if s.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    // hbar is an even parameter.
    fn koszul_flip(&self, _p: Parity) -> Self {
        self.clone()
    }

    fn split_parity(&self) -> (Self, Self) {
        (self.clone(), HbarLaurent::zero(self.window))
    }
}

/// Multiplication by a power of nu, for coefficient rings that carry the
/// formal parameter.
pub trait NuShift: Sized {
    fn nu_shift(&self, k: i32) -> Result<Self>;
}

impl NuShift for HbarLaurent {
    fn nu_shift(&self, k: i32) -> Result<Self> {
        self.shift(k)
    }
}

impl NuShift for crate::series::SuperSeries<HbarLaurent> {
    fn nu_shift(&self, k: i32) -> Result<Self> {
        use std::cell::RefCell;
        let err: RefCell<Option<CoreError>> = RefCell::new(None);
        let out = self.map_coeffs(|c| match c.shift(k) {
            Ok(v) => v,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                HbarLaurent::zero(c.window())
            }
        });
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

impl fmt::Display for HbarLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*v^{k}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> HbarWindow {
        HbarWindow::new(-6, 6)
    }

    #[test]
    fn mul_adds_powers() {
        let a = HbarLaurent::nu_pow(w(), -2, Rat::from_int(3)).unwrap();
        let b = HbarLaurent::nu_pow(w(), 4, Rat::new(1, 3)).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff(2), Rat::one());
    }

    #[test]
    fn overflow_is_loud() {
        let a = HbarLaurent::nu_pow(w(), 4, Rat::one()).unwrap();
        let e = a.mul(&a);
        assert!(matches!(e, Err(CoreError::WindowOverflow { power: 8, .. })));
        assert!(a.shift(3).is_err());
    }

    #[test]
    fn hbar_derivative_halves_power() {
        // d/d hbar of hbar^2 = 2 hbar: nu^4 -> 2 nu^2
        let a = HbarLaurent::nu_pow(w(), 4, Rat::one()).unwrap();
        let d = a.hbar_derivative().unwrap();
        assert_eq!(d.coeff(2), Rat::from_int(2));
        // d/d hbar of nu = hbar^{1/2}: (1/2) nu^{-1}
        let a = HbarLaurent::nu_pow(w(), 1, Rat::one()).unwrap();
        let d = a.hbar_derivative().unwrap();
        assert_eq!(d.coeff(-1), Rat::new(1, 2));
    }

    #[test]
    fn negate_hbar_relative_to_anchor() {
        // anchor 2: nu^2 -> +, nu^0 -> -, nu^{-2} -> +
        let mut a = HbarLaurent::nu_pow(w(), 2, Rat::one()).unwrap();
        a = a
            .add(&HbarLaurent::nu_pow(w(), 0, Rat::one()).unwrap())
            .unwrap();
        let t = a.negate_hbar_from(2).unwrap();
        assert_eq!(t.coeff(2), Rat::one());
        assert_eq!(t.coeff(0), -Rat::one());
        // odd distance errors out
        assert!(a.negate_hbar_from(1).is_err());
    }
}
