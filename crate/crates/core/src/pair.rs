//! A dg Lie algebra paired with an hbar-extended module, the common input
//! of the deformation solver and the period-map pipeline.
//!
//! Two constructions produce these pairs: any dGBV algebra with a
//! calibration class and an integral (the algebra acting on itself), and
//! the invariant sectors of flat torus models where the Lie algebra and
//! the module live on different spaces.

// Tensor components are addressed by named indices throughout.
#![allow(clippy::needless_range_loop)]

use crate::bilinear::{BilinearTable, HbarBilinear, HbarOp, SlotParity};
use crate::coeff::Coeff;
use crate::dgbv::{DgbvAlgebra, ModulePair};
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::GradedBasis;
use crate::linalg::Matrix;
use crate::linop::LinearOp;
use crate::rat::Rat;
use std::sync::Arc;

/// A linear map between two different graded bases.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossMap {
    from: Arc<GradedBasis>,
    to: Arc<GradedBasis>,
    // column -> (row -> coeff)
    cols: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, Rat>>,
}

impl CrossMap {
    pub fn zero(from: &Arc<GradedBasis>, to: &Arc<GradedBasis>) -> Self {
        CrossMap {
            from: from.clone(),
            to: to.clone(),
            cols: Default::default(),
        }
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rat) {
        if value.is_zero() {
            return;
        }
        self.cols.entry(col).or_default().insert(row, value);
    }

    pub fn set_column(&mut self, col: usize, value: &GradedElement<Rat>) {
        for (row, c) in value.components() {
            self.set(row, col, c.clone());
        }
    }

    pub fn from_basis(&self) -> &Arc<GradedBasis> {
        &self.from
    }

    pub fn to_basis(&self) -> &Arc<GradedBasis> {
        &self.to
    }

    pub fn apply<C: Coeff>(&self, x: &GradedElement<C>) -> Result<GradedElement<C>> {
        GradedBasis::check_same(&self.from, x.basis())?;
        let mut out = GradedElement::zero(&self.to);
        for (col, c) in x.components() {
            if let Some(rows) = self.cols.get(&col) {
                for (&row, v) in rows {
                    out.add_component(row, c.scale(v));
                }
            }
        }
        Ok(out)
    }

    /// Exact inverse; errors when the map is not a bijection of the two
    /// bases.
    pub fn inverse(&self) -> Result<CrossMap> {
        let n = self.from.dim();
        if self.to.dim() != n {
            return Err(CoreError::Structural(
                "cross map between bases of different dimension".into(),
            ));
        }
        let mut dense = crate::linalg::zeros(n, n);
        for (&col, rows) in &self.cols {
            for (&row, v) in rows {
                dense[row][col] = v.clone();
            }
        }
        let inv = crate::linalg::invert(&dense)
            .ok_or_else(|| CoreError::Structural("cross map is singular".into()))?;
        let mut out = CrossMap::zero(&self.to, &self.from);
        for (i, row) in inv.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.set(i, j, v.clone());
            }
        }
        Ok(out)
    }
}

/// The full input of the pipeline: a dg Lie algebra g, an hbar-module m,
/// the calibration class, the pairing on m, and an optional display map
/// re-expressing module classes for reports and flat coordinates.
#[derive(Clone, Debug)]
pub struct DeformationPair {
    pub name: String,
    /// Dimension weight n of the rescaling exponent (n + q - p)/2.
    pub weight: usize,
    pub g_basis: Arc<GradedBasis>,
    pub m_basis: Arc<GradedBasis>,
    pub bracket: BilinearTable,
    pub d_g: LinearOp,
    pub unit_lift: usize,
    pub d_m: HbarOp,
    pub bullet: HbarBilinear,
    /// The circ action, including its hbar weight (usually nu^{-2}).
    pub circ: HbarBilinear,
    pub eta: GradedElement<Rat>,
    /// Bilinear form on the module underlying the hbar pairing.
    pub m_pairing: Matrix,
    /// Per-basis-index sign entering the hbar -> -hbar conjugation: the
    /// anchored power alternation alone does not make the transport
    /// exponentials of the two pairing slots cancel; each model carries
    /// the extra class sign that does, pinned by the exactness of the
    /// metric and cross-checked by the mirror identification.
    pub conjugation_sign: Vec<bool>,
    /// Optional presentation map applied to module output.
    pub display: Option<CrossMap>,
}

impl DeformationPair {
    /// The algebra acting on itself: g = (A, derived bracket, d) and
    /// m = (A[[hbar]], bullet, hbar^{-1} circ, d + hbar delta).
    pub fn from_dgbv(a: &DgbvAlgebra) -> Result<Self> {
        let eta = a.calibration.clone().ok_or_else(|| {
            CoreError::Config(format!("algebra {} declares no calibration class", a.name))
        })?;
        let integral = a
            .integral
            .clone()
            .ok_or_else(|| CoreError::Config(format!("algebra {} declares no integral", a.name)))?;
        let n = a.dim();
        let mut pairing = crate::linalg::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let prod = a.product.mul_basis(i, j);
                let mut acc = Rat::zero();
                for (k, c) in prod.components() {
                    acc += &(c * &integral[k]);
                }
                pairing[i][j] = acc;
            }
        }
        let module = a.hbar_module()?;
        let conjugation_sign = (0..n)
            .map(|i| a.basis.bidegree(i).p.rem_euclid(2) == 1)
            .collect();
        Ok(DeformationPair {
            name: a.name.clone(),
            weight: a.weight,
            g_basis: a.basis.clone(),
            m_basis: a.basis.clone(),
            bracket: module.bracket,
            d_g: a.d.clone(),
            unit_lift: a.unit,
            d_m: module.d_m,
            bullet: module.bullet,
            circ: module.circ,
            eta,
            m_pairing: pairing,
            conjugation_sign,
            display: None,
        })
    }

    pub fn module_pair(&self) -> ModulePair {
        ModulePair {
            g_basis: self.g_basis.clone(),
            m_basis: self.m_basis.clone(),
            bracket: self.bracket.clone(),
            d_g: self.d_g.clone(),
            d_m: self.d_m.clone(),
            bullet: self.bullet.clone(),
            circ: self.circ.clone(),
        }
    }

    /// The rescaling weight n + q - p of a module basis vector.
    pub fn lhbar_weight(&self, i: usize) -> i32 {
        let deg = self.m_basis.bidegree(i);
        self.weight as i32 + deg.q - deg.p
    }

    /// Pairing of two module elements with rational coefficients.
    pub fn pair_rat(&self, x: &GradedElement<Rat>, y: &GradedElement<Rat>) -> Result<Rat> {
        GradedBasis::check_same(&self.m_basis, x.basis())?;
        GradedBasis::check_same(&self.m_basis, y.basis())?;
        let mut acc = Rat::zero();
        for (i, a) in x.components() {
            for (j, b) in y.components() {
                if !self.m_pairing[i][j].is_zero() {
                    acc += &(&(a * b) * &self.m_pairing[i][j]);
                }
            }
        }
        Ok(acc)
    }

    pub fn zero_bracket(g_basis: &Arc<GradedBasis>) -> BilinearTable {
        BilinearTable::new(g_basis, g_basis, g_basis, SlotParity::Shifted)
    }
}
