//! Bigraded bases.

use crate::error::{CoreError, Result};
use crate::koszul::Parity;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

/// Bidegree (p, q): p counts the second-order-operator direction, q the
/// differential direction. The unit sits at (0, 0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Bidegree {
    pub p: i32,
    pub q: i32,
}

impl Bidegree {
    pub fn new(p: i32, q: i32) -> Self {
        Bidegree { p, q }
    }

    pub fn parity(self) -> Parity {
        Parity::of_i32(self.p + self.q)
    }

    pub fn zero() -> Self {
        Bidegree { p: 0, q: 0 }
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.p + rhs.p, self.q + rhs.q)
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.p - rhs.p, self.q - rhs.q)
    }
}

impl Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.p, -self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// An ordered list of named bigraded basis vectors. The order is fixed at
/// construction and determines every pivot and sign convention downstream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasis {
    name: String,
    entries: Vec<(String, Bidegree)>,
    by_symbol: BTreeMap<String, usize>,
}

impl GradedBasis {
    pub fn new(name: &str, entries: Vec<(String, Bidegree)>) -> Result<Arc<Self>> {
        let mut by_symbol = BTreeMap::new();
        for (i, (sym, _)) in entries.iter().enumerate() {
            if by_symbol.insert(sym.clone(), i).is_some() {
                return Err(CoreError::Argument(format!(
                    "duplicate basis symbol {sym:?} in basis {name:?}"
                )));
            }
        }
        Ok(Arc::new(GradedBasis {
            name: name.to_string(),
            entries,
            by_symbol,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn bidegree(&self, i: usize) -> Bidegree {
        self.entries[i].1
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.entries[i].1.parity()
    }

    pub fn find(&self, symbol: &str) -> Option<usize> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn entries(&self) -> &[(String, Bidegree)] {
        &self.entries
    }

    /// Indices grouped by bidegree, in basis order inside each group.
    pub fn blocks(&self) -> BTreeMap<Bidegree, Vec<usize>> {
        let mut blocks: BTreeMap<Bidegree, Vec<usize>> = BTreeMap::new();
        for (i, (_, deg)) in self.entries.iter().enumerate() {
            blocks.entry(*deg).or_default().push(i);
        }
        blocks
    }

    pub fn same_basis(a: &Arc<GradedBasis>, b: &Arc<GradedBasis>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }

    pub fn check_same(a: &Arc<GradedBasis>, b: &Arc<GradedBasis>) -> Result<()> {
        if Self::same_basis(a, b) {
            Ok(())
        } else {
            Err(CoreError::BasisMismatch(format!(
                "{} vs {}",
                a.name, b.name
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_symbols_rejected() {
        let e = GradedBasis::new(
            "b",
            vec![
                ("x".into(), Bidegree::new(0, 0)),
                ("x".into(), Bidegree::new(1, 0)),
            ],
        );
        assert!(e.is_err());
    }

    #[test]
    fn parity_comes_from_total_degree() {
        assert_eq!(Bidegree::new(1, 1).parity(), Parity::Even);
        assert_eq!(Bidegree::new(0, 1).parity(), Parity::Odd);
        assert_eq!(Bidegree::new(-1, 0).parity(), Parity::Odd);
    }
}
