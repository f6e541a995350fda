//! Sparse linear combinations of bigraded basis vectors.
//!
//! Coefficients are written on the left of the basis vector, so an element
//! is sum c_i e_i. Moving a coefficient past a basis vector, an operator,
//! or a slot of a bilinear operation costs a Koszul sign; every such sign
//! is requested from the koszul module through the Coeff interface.

use crate::coeff::Coeff;
use crate::error::Result;
use crate::grading::{Bidegree, GradedBasis};
use crate::koszul::{Parity, Sign};
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Debug)]
pub struct GradedElement<C: Coeff> {
    basis: Arc<GradedBasis>,
    comps: BTreeMap<usize, C>,
}

impl<C: Coeff> GradedElement<C> {
    pub fn zero(basis: &Arc<GradedBasis>) -> Self {
        GradedElement {
            basis: basis.clone(),
            comps: BTreeMap::new(),
        }
    }

    pub fn single(basis: &Arc<GradedBasis>, index: usize, c: C) -> Self {
        assert!(index < basis.dim(), "basis index out of range");
        let mut e = Self::zero(basis);
        e.add_component(index, c);
        e
    }

    pub fn from_components(basis: &Arc<GradedBasis>, comps: Vec<(usize, C)>) -> Self {
        let mut e = Self::zero(basis);
        for (i, c) in comps {
            assert!(i < basis.dim(), "basis index out of range");
            e.add_component(i, c);
        }
        e
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &C)> {
        self.comps.iter().map(|(&i, c)| (i, c))
    }

    pub fn component(&self, i: usize) -> Option<&C> {
        self.comps.get(&i)
    }

    pub fn support(&self) -> Vec<usize> {
        self.comps.keys().copied().collect()
    }

    pub fn add_component(&mut self, i: usize, c: C) {
        if c.is_zero() {
            return;
        }
        match self.comps.entry(i) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c).expect("component addition failed");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        GradedBasis::check_same(&self.basis, &other.basis)?;
        let mut out = self.clone();
        for (&i, c) in &other.comps {
            out.add_component(i, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GradedElement {
            basis: self.basis.clone(),
            comps: self.comps.iter().map(|(&i, c)| (i, c.neg())).collect(),
        }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(&self.basis);
        }
        GradedElement {
            basis: self.basis.clone(),
            comps: self.comps.iter().map(|(&i, c)| (i, c.scale(r))).collect(),
        }
    }

    pub fn scale_coeff(&self, c: &C) -> Result<Self> {
        let mut out = Self::zero(&self.basis);
        for (&i, d) in &self.comps {
            // c crosses nothing: it multiplies from the left.
            out.add_component(i, c.mul(d)?);
        }
        Ok(out)
    }

    pub fn apply_sign(&self, s: Sign) -> Self {
        if s.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GradedElement<D> {
        let mut out = GradedElement::<D>::zero(&self.basis);
        for (&i, c) in &self.comps {
            out.add_component(i, f(c));
        }
        out
    }

    /// Bidegree, when every supported basis vector shares one.
    pub fn bidegree_if_homogeneous(&self) -> Option<Bidegree> {
        let mut it = self.comps.keys().map(|&i| self.basis.bidegree(i));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Splits into (even, odd) parts of total parity, where the total
    /// parity of a term is basis parity plus coefficient parity.
    pub fn split_total_parity(&self) -> (Self, Self) {
        let mut even = Self::zero(&self.basis);
        let mut odd = Self::zero(&self.basis);
        for (&i, c) in &self.comps {
            let (ce, co) = c.split_parity();
            match self.basis.parity(i) {
                Parity::Even => {
                    even.add_component(i, ce);
                    odd.add_component(i, co);
                }
                Parity::Odd => {
                    even.add_component(i, co);
                    odd.add_component(i, ce);
                }
            }
        }
        (even, odd)
    }

    /// Total parity when homogeneous.
    pub fn total_parity(&self) -> Option<Parity> {
        let (even, odd) = self.split_total_parity();
        match (even.is_zero(), odd.is_zero()) {
            (true, true) => Some(Parity::Even),
            (false, true) => Some(Parity::Even),
            (true, false) => Some(Parity::Odd),
            (false, false) => None,
        }
    }
}

impl GradedElement<Rat> {
    /// Dense coordinate vector.
    pub fn to_vec(&self) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.basis.dim()];
        for (&i, c) in &self.comps {
            v[i] = c.clone();
        }
        v
    }

    pub fn from_vec(basis: &Arc<GradedBasis>, v: &[Rat]) -> Self {
        assert_eq!(v.len(), basis.dim(), "coordinate vector length mismatch");
        let mut e = Self::zero(basis);
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                e.add_component(i, c.clone());
            }
        }
        e
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for GradedElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&i, c) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*{}", self.basis.symbol(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Bidegree;

    fn basis() -> Arc<GradedBasis> {
        GradedBasis::new(
            "t",
            vec![
                ("one".into(), Bidegree::new(0, 0)),
                ("psi".into(), Bidegree::new(1, 0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_components_are_dropped() {
        let b = basis();
        let e = GradedElement::single(&b, 0, Rat::one());
        let z = e.sub(&e).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.support(), Vec::<usize>::new());
    }

    #[test]
    fn homogeneity_checks() {
        let b = basis();
        let e = GradedElement::from_components(&b, vec![(0, Rat::one()), (1, Rat::one())]);
        assert_eq!(e.bidegree_if_homogeneous(), None);
        assert_eq!(e.total_parity(), None);
        let f = GradedElement::single(&b, 1, Rat::one());
        assert_eq!(f.total_parity(), Some(Parity::Odd));
    }
}
