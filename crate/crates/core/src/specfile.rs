//! JSON descriptions of algebras and the auxiliary input files of the
//! command line: metric matrices and filtration specs. Rationals travel
//! as "num/den" strings, never as floats.

use crate::dgbv::{check_dgbv_axioms, DgbvAlgebra, Product};
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::{Bidegree, GradedBasis};
use crate::linalg::Matrix;
use crate::linop::LinearOp;
use crate::rat::Rat;
use crate::vhs::WSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisEntry {
    pub symbol: String,
    pub p: i32,
    pub q: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub out: String,
    pub coeff: Rat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpEntry {
    pub from: String,
    pub to: String,
    pub coeff: Rat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralEntry {
    pub symbol: String,
    pub value: Rat,
}

/// The on-disk description of a finite-dimensional algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraSpecFile {
    pub name: String,
    /// Dimension weight n of the rescaling exponent.
    pub weight: usize,
    /// Redundant declared dimension; the loader recomputes and compares.
    pub dimension: usize,
    pub basis: Vec<BasisEntry>,
    pub unit: String,
    pub product: Vec<ProductEntry>,
    pub d: Vec<OpEntry>,
    pub delta: Vec<OpEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub integral: Vec<IntegralEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<String>,
}

impl AlgebraSpecFile {
    pub fn from_algebra(a: &DgbvAlgebra) -> Self {
        let basis = a
            .basis
            .entries()
            .iter()
            .map(|(s, d)| BasisEntry {
                symbol: s.clone(),
                p: d.p,
                q: d.q,
            })
            .collect();
        let sym = |i: usize| a.basis.symbol(i).to_string();
        let product = a
            .product
            .triples()
            .into_iter()
            .map(|(l, r, o, c)| ProductEntry {
                left: sym(l),
                right: sym(r),
                out: sym(o),
                coeff: c,
            })
            .collect();
        let ops = |op: &LinearOp| -> Vec<OpEntry> {
            op.entries()
                .map(|(row, col, c)| OpEntry {
                    from: sym(col),
                    to: sym(row),
                    coeff: c.clone(),
                })
                .collect()
        };
        let integral = a
            .integral
            .as_ref()
            .map(|cov| {
                cov.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| IntegralEntry {
                        symbol: sym(i),
                        value: c.clone(),
                    })
                    .collect()
            })
            .unwrap_or_default();
        let calibration = a.calibration.as_ref().map(|cal| {
            let support = cal.support();
            assert!(
                support.len() == 1 && cal.component(support[0]) == Some(&Rat::one()),
                "serializable calibrations are single basis classes"
            );
            sym(support[0])
        });
        AlgebraSpecFile {
            name: a.name.clone(),
            weight: a.weight,
            dimension: a.dim(),
            basis,
            unit: sym(a.unit),
            product,
            d: ops(&a.d),
            delta: ops(&a.delta),
            integral,
            calibration,
        }
    }

    /// Builds the algebra without checking the axioms.
    pub fn to_algebra_unchecked(&self) -> Result<DgbvAlgebra> {
        if self.basis.len() != self.dimension {
            return Err(CoreError::Validation(format!(
                "declared dimension {} but {} basis entries",
                self.dimension,
                self.basis.len()
            )));
        }
        let entries: Vec<(String, Bidegree)> = self
            .basis
            .iter()
            .map(|e| (e.symbol.clone(), Bidegree::new(e.p, e.q)))
            .collect();
        let basis = GradedBasis::new(&self.name, entries)?;
        let find = |s: &str| -> Result<usize> {
            basis
                .find(s)
                .ok_or_else(|| CoreError::Parse(format!("unknown symbol {s:?}")))
        };
        let unit = find(&self.unit)?;
        let mut triples = Vec::new();
        for e in &self.product {
            triples.push((
                find(&e.left)?,
                find(&e.right)?,
                find(&e.out)?,
                e.coeff.clone(),
            ));
        }
        let product = Product::from_triples(&basis, triples);
        let build_op = |entries: &[OpEntry], shift: Bidegree| -> Result<LinearOp> {
            let mut list = Vec::new();
            for e in entries {
                list.push((find(&e.to)?, find(&e.from)?, e.coeff.clone()));
            }
            Ok(LinearOp::from_entries_unchecked(&basis, shift, list))
        };
        let d = build_op(&self.d, Bidegree::new(0, 1))?;
        let delta = build_op(&self.delta, Bidegree::new(-1, 0))?;
        let integral = if self.integral.is_empty() {
            None
        } else {
            let mut cov = vec![Rat::zero(); basis.dim()];
            for e in &self.integral {
                cov[find(&e.symbol)?] = e.value.clone();
            }
            Some(cov)
        };
        let calibration = match &self.calibration {
            None => None,
            Some(s) => Some(GradedElement::single(&basis, find(s)?, Rat::one())),
        };
        Ok(DgbvAlgebra {
            name: self.name.clone(),
            basis,
            weight: self.weight,
            unit,
            product,
            d,
            delta,
            integral,
            calibration,
        })
    }

    /// Builds and validates; a failed axiom aborts with the report
    /// embedded in the error.
    pub fn to_algebra(&self) -> Result<DgbvAlgebra> {
        let a = self.to_algebra_unchecked()?;
        let rep = check_dgbv_axioms(&a);
        if !rep.all_passed() {
            return Err(CoreError::Validation(rep.summary()));
        }
        Ok(a)
    }
}

pub fn parse_spec_str(text: &str) -> Result<DgbvAlgebra> {
    let file: AlgebraSpecFile =
        serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
    file.to_algebra()
}

pub fn algebra_to_json(a: &DgbvAlgebra) -> String {
    serde_json::to_string_pretty(&AlgebraSpecFile::from_algebra(a))
        .expect("spec files always serialize")
}

/// Metric input: symmetric matrix with rational entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricFile {
    pub n: usize,
    pub entries: Vec<Vec<Rat>>,
}

impl MetricFile {
    pub fn matrix(&self) -> Result<Matrix> {
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(CoreError::Parse(format!(
                "metric entries must form an {0} x {0} matrix",
                self.n
            )));
        }
        Ok(self.entries.clone())
    }
}

pub fn parse_metric_str(text: &str) -> Result<MetricFile> {
    serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))
}

/// Filtration input: spanning vectors per doubled level, in harmonic
/// class coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationFile {
    /// Keys are the doubled level 2r as decimal strings.
    pub levels: BTreeMap<String, Vec<Vec<Rat>>>,
}

impl FiltrationFile {
    pub fn wspec(&self) -> Result<WSpec> {
        let mut levels = BTreeMap::new();
        for (k, v) in &self.levels {
            let lvl: i32 = k
                .parse()
                .map_err(|_| CoreError::Parse(format!("bad level key {k:?}")))?;
            levels.insert(lvl, v.clone());
        }
        Ok(WSpec { levels })
    }
}

pub fn parse_filtration_str(text: &str) -> Result<FiltrationFile> {
    serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn round_trip_every_builtin() {
        for name in models::builtin_names() {
            let a = models::builtin(name).unwrap();
            let json = algebra_to_json(&a);
            let b = parse_spec_str(&json).unwrap();
            assert_eq!(a.basis.entries(), b.basis.entries(), "{name}");
            assert_eq!(a.unit, b.unit);
            assert_eq!(a.d, b.d, "{name}");
            assert_eq!(a.delta, b.delta, "{name}");
            assert_eq!(a.integral, b.integral, "{name}");
            assert_eq!(
                a.product.triples().len(),
                b.product.triples().len(),
                "{name}"
            );
        }
    }

    #[test]
    fn wrong_dimension_is_caught() {
        let a = models::poly_fixture();
        let mut file = AlgebraSpecFile::from_algebra(&a);
        file.dimension = 16;
        assert!(matches!(file.to_algebra(), Err(CoreError::Validation(_))));
    }

    #[test]
    fn corrupted_product_fails_validation() {
        let a = models::torus_forms(1);
        let mut file = AlgebraSpecFile::from_algebra(&a);
        // Make the product non-associative by corrupting one entry.
        file.product.push(ProductEntry {
            left: "dz1".into(),
            right: "dz1".into(),
            out: "dz1*dzb1".into(),
            coeff: Rat::one(),
        });
        let err = file.to_algebra();
        match err {
            Err(CoreError::Validation(msg)) => {
                assert!(
                    msg.contains("associative") || msg.contains("supercommutative"),
                    "unexpected message {msg}"
                );
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn wrong_bidegree_operator_fails() {
        let a = models::poly_fixture();
        let mut file = AlgebraSpecFile::from_algebra(&a);
        // d gets delta's entries: wrong shift.
        file.d = file.delta.clone();
        let err = file.to_algebra();
        assert!(matches!(err, Err(CoreError::Validation(_))));
    }
}
