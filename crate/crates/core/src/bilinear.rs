//! Bilinear structure maps given by their values on basis pairs, plus
//! hbar-weighted sums of such maps.
//!
//! Extending a basis-level bilinear map over series coefficients needs one
//! convention: when the right coefficient crosses the left basis vector it
//! picks up a Koszul sign, and for an odd operation (a bracket or a bullet
//! action) the left slot counts with shifted parity. Concretely
//!
//!   odd  mu:  mu(c x, c' y) = (-1)^{c'(x+1)} c c' mu(x, y)
//!   even mu:  mu(c x, c' y) = (-1)^{c' x}     c c' mu(x, y)
//!
//! which is exactly what makes the axioms with shifted signs survive
//! coefficient extension. Operators cross coefficients with their own
//! parity as usual.

use crate::coeff::Coeff;
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::GradedBasis;
use crate::hbar::NuShift;
use crate::linop::LinearOp;
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Whether the left slot of a bilinear map counts with shifted parity when
/// coefficients cross it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SlotParity {
    Plain,
    Shifted,
}

/// A bilinear map left x right -> out, tabulated on basis pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearTable {
    left: Arc<GradedBasis>,
    right: Arc<GradedBasis>,
    out: Arc<GradedBasis>,
    slot: SlotParity,
    table: BTreeMap<(usize, usize), GradedElement<Rat>>,
}

impl BilinearTable {
    pub fn new(
        left: &Arc<GradedBasis>,
        right: &Arc<GradedBasis>,
        out: &Arc<GradedBasis>,
        slot: SlotParity,
    ) -> Self {
        BilinearTable {
            left: left.clone(),
            right: right.clone(),
            out: out.clone(),
            slot,
            table: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: GradedElement<Rat>) {
        if value.is_zero() {
            self.table.remove(&(i, j));
        } else {
            self.table.insert((i, j), value);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> GradedElement<Rat> {
        self.table
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| GradedElement::zero(&self.out))
    }

    pub fn left_basis(&self) -> &Arc<GradedBasis> {
        &self.left
    }

    pub fn right_basis(&self) -> &Arc<GradedBasis> {
        &self.right
    }

    pub fn out_basis(&self) -> &Arc<GradedBasis> {
        &self.out
    }

    pub fn slot(&self) -> SlotParity {
        self.slot
    }

    pub fn is_zero(&self) -> bool {
        self.table.values().all(|v| v.is_zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &GradedElement<Rat>)> {
        self.table.iter().map(|(&(i, j), v)| (i, j, v))
    }

    /// Coefficient extension of the tabulated map.
    pub fn apply<C: Coeff>(
        &self,
        x: &GradedElement<C>,
        y: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        GradedBasis::check_same(&self.left, x.basis())?;
        GradedBasis::check_same(&self.right, y.basis())?;
        let mut acc = GradedElement::zero(&self.out);
        for (i, c) in x.components() {
            let slot_parity = match self.slot {
                SlotParity::Plain => self.left.parity(i),
                SlotParity::Shifted => self.left.parity(i).shifted(),
            };
            for (j, d) in y.components() {
                let val = self.get(i, j);
                if val.is_zero() {
                    continue;
                }
                let coeff = c.mul(&d.koszul_flip(slot_parity))?;
                for (k, r) in val.components() {
                    acc.add_component(k, coeff.scale(r));
                }
            }
        }
        Ok(acc)
    }

    /// Left multiplication by a fixed basis vector as an operator, only
    /// meaningful when all three bases coincide.
    pub fn left_mul_op(&self, i: usize) -> Result<LinearOp> {
        GradedBasis::check_same(&self.left, &self.out)?;
        GradedBasis::check_same(&self.right, &self.out)?;
        let shift_guess = self
            .entries()
            .find_map(|(a, j, v)| {
                if a != i {
                    return None;
                }
                v.bidegree_if_homogeneous()
                    .map(|d| d - self.right.bidegree(j))
            })
            .unwrap_or_else(crate::grading::Bidegree::zero);
        let mut entries = Vec::new();
        for (a, j, v) in self.entries() {
            if a != i {
                continue;
            }
            for (k, r) in v.components() {
                entries.push((k, j, r.clone()));
            }
        }
        LinearOp::from_entries(&self.out, shift_guess, entries)
    }
}

/// A finite sum of operators weighted by powers of nu = hbar^{1/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct HbarOp {
    parts: Vec<(i32, LinearOp)>,
}

impl HbarOp {
    pub fn new(parts: Vec<(i32, LinearOp)>) -> Self {
        HbarOp { parts }
    }

    pub fn zero() -> Self {
        HbarOp { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[(i32, LinearOp)] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|(_, op)| op.is_zero())
    }

    pub fn apply<C: Coeff + NuShift>(&self, x: &GradedElement<C>) -> Result<GradedElement<C>> {
        let mut acc: Option<GradedElement<C>> = None;
        for (k, op) in &self.parts {
            let applied = op.apply(x)?;
            let shifted = shift_element(&applied, *k)?;
            acc = Some(match acc {
                None => shifted,
                Some(a) => a.add(&shifted)?,
            });
        }
        Ok(acc.unwrap_or_else(|| GradedElement::zero(x.basis())))
    }

    /// The weight-by-weight square; empty iff the operator squares to
    /// zero.
    pub fn square_parts(&self) -> Result<BTreeMap<i32, LinearOp>> {
        let mut acc: BTreeMap<i32, LinearOp> = BTreeMap::new();
        for (k1, p1) in &self.parts {
            for (k2, p2) in &self.parts {
                let comp = p1.compose(p2)?;
                if comp.is_zero() {
                    continue;
                }
                match acc.entry(k1 + k2) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(comp);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get().add(&comp)?;
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        acc.retain(|_, op| !op.is_zero());
        Ok(acc)
    }
}

/// A bilinear map with nu-weighted parts.
#[derive(Clone, Debug, PartialEq)]
pub struct HbarBilinear {
    parts: Vec<(i32, BilinearTable)>,
}

impl HbarBilinear {
    pub fn new(parts: Vec<(i32, BilinearTable)>) -> Self {
        HbarBilinear { parts }
    }

    pub fn from_table(table: BilinearTable) -> Self {
        HbarBilinear {
            parts: vec![(0, table)],
        }
    }

    pub fn parts(&self) -> &[(i32, BilinearTable)] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|(_, t)| t.is_zero())
    }

    pub fn apply<C: Coeff + NuShift>(
        &self,
        x: &GradedElement<C>,
        y: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        let mut acc: Option<GradedElement<C>> = None;
        for (k, table) in &self.parts {
            let applied = table.apply(x, y)?;
            let shifted = shift_element(&applied, *k)?;
            acc = Some(match acc {
                None => shifted,
                Some(a) => a.add(&shifted)?,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => Err(CoreError::Structural(
                "hbar-weighted bilinear map with no parts".into(),
            )),
        }
    }
}

pub fn shift_element<C: Coeff + NuShift>(x: &GradedElement<C>, k: i32) -> Result<GradedElement<C>> {
    if k == 0 {
        return Ok(x.clone());
    }
    let mut out = GradedElement::zero(x.basis());
    for (i, c) in x.components() {
        out.add_component(i, c.nu_shift(k)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Bidegree;
    use crate::koszul::Parity;
    use crate::series::{SeriesRing, SuperSeries};

    #[test]
    fn shifted_slot_changes_the_sign() {
        // One odd basis vector x; mu(x, x) = e (even). A right factor with
        // an odd coefficient crossing x picks up a sign that depends on
        // the slot convention.
        let b = GradedBasis::new(
            "b",
            vec![
                ("e".into(), Bidegree::new(1, 1)),
                ("x".into(), Bidegree::new(1, 0)),
            ],
        )
        .unwrap();
        let ring = SeriesRing::new(vec![("s".into(), Parity::Odd)], 2);
        let s = SuperSeries::var_times(&ring, 0, Rat::one());
        let one = SuperSeries::constant(&ring, Rat::one());

        for (slot, negate) in [(SlotParity::Plain, true), (SlotParity::Shifted, false)] {
            let mut t = BilinearTable::new(&b, &b, &b, slot);
            t.set(1, 1, GradedElement::single(&b, 0, Rat::one()));
            let x1 = GradedElement::single(&b, 1, one.clone());
            let xs = GradedElement::single(&b, 1, s.clone());
            let direct = t.apply(&x1, &xs).unwrap();
            let expected = GradedElement::single(&b, 0, s.clone());
            if negate {
                assert_eq!(direct, expected.neg());
            } else {
                assert_eq!(direct, expected);
            }
        }
    }
}
