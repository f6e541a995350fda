//! Linear operators on a graded basis.

use crate::coeff::Coeff;
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::{Bidegree, GradedBasis};
use crate::koszul::{Parity, Sign};
use crate::linalg::{self, Matrix};
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A sparse rational matrix with a declared bidegree shift. The parity of
/// the operator is the parity of its shift; applying an odd operator to a
/// coefficient-carrying term costs the usual Koszul crossing sign.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOp {
    basis: Arc<GradedBasis>,
    shift: Bidegree,
    // column -> (row -> entry): image of basis vector `col`.
    cols: BTreeMap<usize, BTreeMap<usize, Rat>>,
}

impl LinearOp {
    pub fn zero(basis: &Arc<GradedBasis>, shift: Bidegree) -> Self {
        LinearOp {
            basis: basis.clone(),
            shift,
            cols: BTreeMap::new(),
        }
    }

    pub fn identity(basis: &Arc<GradedBasis>) -> Self {
        let mut op = Self::zero(basis, Bidegree::zero());
        for i in 0..basis.dim() {
            op.cols.insert(i, BTreeMap::from([(i, Rat::one())]));
        }
        op
    }

    /// Builds the operator and checks each entry against the declared
    /// shift.
    pub fn from_entries(
        basis: &Arc<GradedBasis>,
        shift: Bidegree,
        entries: Vec<(usize, usize, Rat)>, // (row, col, value)
    ) -> Result<Self> {
        let mut op = Self::zero(basis, shift);
        for (row, col, value) in entries {
            op.set(row, col, value)?;
        }
        Ok(op)
    }

    /// Like `from_entries` but without the shift check, for callers that
    /// verify grading as part of an axiom report instead.
    pub fn from_entries_unchecked(
        basis: &Arc<GradedBasis>,
        shift: Bidegree,
        entries: Vec<(usize, usize, Rat)>,
    ) -> Self {
        let mut op = Self::zero(basis, shift);
        for (row, col, value) in entries {
            if value.is_zero() {
                continue;
            }
            op.cols.entry(col).or_default().insert(row, value);
        }
        op
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rat) -> Result<()> {
        if row >= self.basis.dim() || col >= self.basis.dim() {
            return Err(CoreError::Argument(format!(
                "entry ({row},{col}) outside basis of dimension {}",
                self.basis.dim()
            )));
        }
        if value.is_zero() {
            return Ok(());
        }
        let expect = self.basis.bidegree(col) + self.shift;
        if self.basis.bidegree(row) != expect {
            return Err(CoreError::Structural(format!(
                "entry ({} <- {}) violates declared shift {}: target has bidegree {}, expected {}",
                self.basis.symbol(row),
                self.basis.symbol(col),
                self.shift,
                self.basis.bidegree(row),
                expect
            )));
        }
        self.cols.entry(col).or_default().insert(row, value);
        Ok(())
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    pub fn shift(&self) -> Bidegree {
        self.shift
    }

    pub fn parity(&self) -> Parity {
        self.shift.parity()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.values().all(|c| c.is_empty())
    }

    pub fn entry(&self, row: usize, col: usize) -> Rat {
        self.cols
            .get(&col)
            .and_then(|c| c.get(&row))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        self.cols
            .iter()
            .flat_map(|(&col, rows)| rows.iter().map(move |(&row, v)| (row, col, v)))
    }

    /// Entries respect the declared shift; reported as a witness string
    /// when they do not.
    pub fn check_shift(&self) -> std::result::Result<(), String> {
        for (row, col, v) in self.entries() {
            if v.is_zero() {
                continue;
            }
            let expect = self.basis.bidegree(col) + self.shift;
            if self.basis.bidegree(row) != expect {
                return Err(format!(
                    "{} -> {} has bidegree {} but shift {} demands {}",
                    self.basis.symbol(col),
                    self.basis.symbol(row),
                    self.basis.bidegree(row),
                    self.shift,
                    expect
                ));
            }
        }
        Ok(())
    }

    /// Applies the operator. The coefficient of each term crosses the
    /// operator, picking up (-1)^{op parity * coefficient parity}.
    pub fn apply<C: Coeff>(&self, x: &GradedElement<C>) -> Result<GradedElement<C>> {
        GradedBasis::check_same(&self.basis, x.basis())?;
        let mut out = GradedElement::zero(&self.basis);
        let p = self.parity();
        for (col, c) in x.components() {
            let Some(rows) = self.cols.get(&col) else {
                continue;
            };
            let crossed = c.koszul_flip(p);
            for (&row, v) in rows {
                out.add_component(row, crossed.scale(v));
            }
        }
        Ok(out)
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        GradedBasis::check_same(&self.basis, &inner.basis)?;
        let mut out = Self::zero(&self.basis, self.shift + inner.shift);
        for (&col, mids) in &inner.cols {
            let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
            for (&mid, v1) in mids {
                if let Some(rows) = self.cols.get(&mid) {
                    for (&row, v2) in rows {
                        let e = acc.entry(row).or_insert_with(Rat::zero);
                        *e += &(v2 * v1);
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            if !acc.is_empty() {
                out.cols.insert(col, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        GradedBasis::check_same(&self.basis, &other.basis)?;
        if self.shift != other.shift {
            return Err(CoreError::Structural(format!(
                "adding operators of different shifts {} and {}",
                self.shift, other.shift
            )));
        }
        let mut out = self.clone();
        for (&col, rows) in &other.cols {
            let acc = out.cols.entry(col).or_default();
            for (&row, v) in rows {
                let e = acc.entry(row).or_insert_with(Rat::zero);
                *e += v;
            }
            acc.retain(|_, v| !v.is_zero());
        }
        out.cols.retain(|_, c| !c.is_empty());
        Ok(out)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(&self.basis, self.shift);
        }
        LinearOp {
            basis: self.basis.clone(),
            shift: self.shift,
            cols: self
                .cols
                .iter()
                .map(|(&col, rows)| (col, rows.iter().map(|(&row, v)| (row, v * r)).collect()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Super-commutator [P, Q] = P Q - (-1)^{pq} Q P.
    pub fn super_commutator(&self, other: &Self) -> Result<Self> {
        let pq = self.compose(other)?;
        let qp = other.compose(self)?;
        let sign = Sign::swap(self.parity(), other.parity());
        pq.sub(&qp.apply_sign(sign))
    }

    pub fn apply_sign(&self, s: Sign) -> Self {
        if s.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.basis.dim();
        let mut m = linalg::zeros(n, n);
        for (row, col, v) in self.entries() {
            m[row][col] = v.clone();
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> Arc<GradedBasis> {
        // x even (0,0), dx odd (0,1)
        GradedBasis::new(
            "b",
            vec![
                ("x".into(), Bidegree::new(0, 0)),
                ("dx".into(), Bidegree::new(0, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn shift_is_enforced() {
        let b = basis();
        let ok = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(1, 0, Rat::one())]);
        assert!(ok.is_ok());
        let bad = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(0, 1, Rat::one())]);
        assert!(bad.is_err());
    }

    #[test]
    fn odd_self_commutator_is_twice_square() {
        let b = basis();
        let d = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(1, 0, Rat::one())]).unwrap();
        let dd = d.compose(&d).unwrap();
        let c = d.super_commutator(&d).unwrap();
        assert_eq!(c, dd.scale(&Rat::from_int(2)));
    }

    #[test]
    fn identity_commutes() {
        let b = basis();
        let d = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(1, 0, Rat::one())]).unwrap();
        let id = LinearOp::identity(&b);
        let c = id.super_commutator(&d).unwrap();
        assert!(c.is_zero());
    }
}
