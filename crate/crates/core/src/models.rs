//! Built-in algebras: truncated polynomial super-rings, exterior algebras
//! of torus invariants, and the small fixtures used throughout the tests.
//!
//! Every model is generated in code; the bundled JSON spec files are
//! serialized from these constructors and round-trip tested against them.

use crate::dgbv::{DgbvAlgebra, Product};
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::{Bidegree, GradedBasis};
use crate::koszul;
use crate::linop::LinearOp;
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A monomial in a finite super-polynomial ring: bounded powers of even
/// generators times a square-free word in odd generators.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PolyMono {
    pub even_exps: Vec<u16>,
    pub odd_mask: u64,
}

impl PolyMono {
    fn degree(&self) -> u32 {
        self.even_exps.iter().map(|&e| e as u32).sum::<u32>() + self.odd_mask.count_ones()
    }
}

/// k[x_1,...]/(x_i^{b_i}) tensor the exterior algebra on odd generators,
/// with the full multiplication table.
#[derive(Clone, Debug)]
pub struct PolyAlgebra {
    pub basis: Arc<GradedBasis>,
    pub product: Product,
    evens: Vec<(String, Bidegree, u16)>,
    odds: Vec<(String, Bidegree)>,
    monos: Vec<PolyMono>,
    index: BTreeMap<PolyMono, usize>,
}

impl PolyAlgebra {
    pub fn new(
        name: &str,
        evens: Vec<(String, Bidegree, u16)>,
        odds: Vec<(String, Bidegree)>,
    ) -> Result<Self> {
        assert!(odds.len() <= 64, "too many odd generators");
        for (n, deg, _) in &evens {
            if deg.parity().is_odd() {
                return Err(CoreError::Argument(format!(
                    "even generator {n} has odd bidegree {deg}"
                )));
            }
        }
        for (n, deg) in &odds {
            if !deg.parity().is_odd() {
                return Err(CoreError::Argument(format!(
                    "odd generator {n} has even bidegree {deg}"
                )));
            }
        }

        // Enumerate monomials, then order by (degree, exponents, mask).
        let mut monos = vec![PolyMono {
            even_exps: vec![0; evens.len()],
            odd_mask: 0,
        }];
        for (i, (_, _, bound)) in evens.iter().enumerate() {
            let prev = std::mem::take(&mut monos);
            for m in prev {
                for e in 0..*bound {
                    let mut m2 = m.clone();
                    m2.even_exps[i] = e;
                    monos.push(m2);
                }
            }
        }
        {
            let prev = std::mem::take(&mut monos);
            for m in prev {
                for mask in 0..(1u64 << odds.len()) {
                    let mut m2 = m.clone();
                    m2.odd_mask = mask;
                    monos.push(m2);
                }
            }
        }
        monos.sort_by_key(|m| (m.degree(), m.even_exps.clone(), m.odd_mask));

        let mono_degree = |m: &PolyMono| -> Bidegree {
            let mut d = Bidegree::zero();
            for (i, (_, deg, _)) in evens.iter().enumerate() {
                for _ in 0..m.even_exps[i] {
                    d = d + *deg;
                }
            }
            for (j, (_, deg)) in odds.iter().enumerate() {
                if m.odd_mask & (1 << j) != 0 {
                    d = d + *deg;
                }
            }
            d
        };
        let mono_name = |m: &PolyMono| -> String {
            if m.degree() == 0 {
                return "1".to_string();
            }
            let mut parts = Vec::new();
            for (i, (n, _, _)) in evens.iter().enumerate() {
                match m.even_exps[i] {
                    0 => {}
                    1 => parts.push(n.clone()),
                    e => parts.push(format!("{n}^{e}")),
                }
            }
            for (j, (n, _)) in odds.iter().enumerate() {
                if m.odd_mask & (1 << j) != 0 {
                    parts.push(n.clone());
                }
            }
            parts.join("*")
        };

        let entries: Vec<(String, Bidegree)> = monos
            .iter()
            .map(|m| (mono_name(m), mono_degree(m)))
            .collect();
        let basis = GradedBasis::new(name, entries)?;
        let index: BTreeMap<PolyMono, usize> = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        // Multiplication table.
        let mut triples = Vec::new();
        for (ia, ma) in monos.iter().enumerate() {
            for (ib, mb) in monos.iter().enumerate() {
                if ma.odd_mask & mb.odd_mask != 0 {
                    continue;
                }
                let mut exps = Vec::with_capacity(evens.len());
                let mut truncated = false;
                for (i, (_, _, bound)) in evens.iter().enumerate() {
                    let e = ma.even_exps[i] + mb.even_exps[i];
                    if e >= *bound {
                        truncated = true;
                        break;
                    }
                    exps.push(e);
                }
                if truncated {
                    continue;
                }
                let left: Vec<usize> = (0..odds.len())
                    .filter(|j| ma.odd_mask & (1 << j) != 0)
                    .collect();
                let right: Vec<usize> = (0..odds.len())
                    .filter(|j| mb.odd_mask & (1 << j) != 0)
                    .collect();
                let sign = koszul::merge_sign(&left, &right);
                let m = PolyMono {
                    even_exps: exps,
                    odd_mask: ma.odd_mask | mb.odd_mask,
                };
                let ic = index[&m];
                triples.push((ia, ib, ic, sign.to_rat()));
            }
        }
        let product = Product::from_triples(&basis, triples);

        Ok(PolyAlgebra {
            basis,
            product,
            evens,
            odds,
            monos,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.monos.len()
    }

    pub fn mono(&self, i: usize) -> &PolyMono {
        &self.monos[i]
    }

    pub fn mono_index(&self, m: &PolyMono) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn find(&self, symbol: &str) -> Option<usize> {
        self.basis.find(symbol)
    }

    pub fn element(&self, symbol: &str, c: Rat) -> GradedElement<Rat> {
        let i = self
            .find(symbol)
            .unwrap_or_else(|| panic!("no monomial named {symbol:?} in {}", self.basis.name()));
        GradedElement::single(&self.basis, i, c)
    }

    /// Left partial derivative by an odd generator.
    pub fn partial_odd(&self, j: usize) -> LinearOp {
        let bit = 1u64 << j;
        let mut entries = Vec::new();
        for (i, m) in self.monos.iter().enumerate() {
            if m.odd_mask & bit == 0 {
                continue;
            }
            let before: Vec<usize> = (0..j).filter(|k| m.odd_mask & (1 << k) != 0).collect();
            // Walk the derivative past the earlier odd letters.
            let mut perm: Vec<usize> = vec![before.len()];
            perm.extend(0..before.len());
            let sign =
                koszul::koszul_sign(&vec![crate::koszul::Parity::Odd; before.len() + 1], &perm)
                    .expect("valid permutation");
            let target = PolyMono {
                even_exps: m.even_exps.clone(),
                odd_mask: m.odd_mask & !bit,
            };
            entries.push((self.index[&target], i, sign.to_rat()));
        }
        LinearOp::from_entries_unchecked(&self.basis, -self.odds[j].1, entries)
    }

    /// Euler operator x d/dx of an even generator: multiplies each
    /// monomial by its exponent. Unlike the bare derivative it preserves
    /// the truncation ideal, so second-order operators built from it
    /// descend to the quotient ring.
    pub fn euler_even(&self, i: usize) -> LinearOp {
        let mut entries = Vec::new();
        for (k, m) in self.monos.iter().enumerate() {
            let e = m.even_exps[i];
            if e == 0 {
                continue;
            }
            entries.push((k, k, Rat::from_int(e as i64)));
        }
        LinearOp::from_entries_unchecked(&self.basis, Bidegree::zero(), entries)
    }

    /// Partial derivative by an even generator.
    pub fn partial_even(&self, i: usize) -> LinearOp {
        let mut entries = Vec::new();
        for (k, m) in self.monos.iter().enumerate() {
            let e = m.even_exps[i];
            if e == 0 {
                continue;
            }
            let mut target = m.clone();
            target.even_exps[i] = e - 1;
            entries.push((self.index[&target], k, Rat::from_int(e as i64)));
        }
        LinearOp::from_entries_unchecked(&self.basis, -self.evens[i].1, entries)
    }

    /// Odd derivation determined by its values on generators, extended by
    /// the graded Leibniz rule. `even_images[i]` is the image of the i-th
    /// even generator, `odd_images[j]` of the j-th odd one.
    pub fn derivation(
        &self,
        shift: Bidegree,
        even_images: &[GradedElement<Rat>],
        odd_images: &[GradedElement<Rat>],
    ) -> Result<LinearOp> {
        let odd_op = shift.parity().is_odd();
        let mut entries = Vec::new();
        for (k, m) in self.monos.iter().enumerate() {
            let mut acc = GradedElement::zero(&self.basis);
            // Even factors first (they commute past nothing).
            for (i, (_, deg, _)) in self.evens.iter().enumerate() {
                let e = m.even_exps[i];
                if e == 0 || even_images[i].is_zero() {
                    continue;
                }
                let _ = deg;
                let mut rest = m.clone();
                rest.even_exps[i] = e - 1;
                let rest_el =
                    GradedElement::single(&self.basis, self.index[&rest], Rat::from_int(e as i64));
                acc = acc.add(&self.product.mul(&even_images[i], &rest_el)?)?;
            }
            // Odd factors: D hits the j-th letter after crossing everything
            // before it. Monomials store evens first, then odd letters in
            // ascending order; the even prefix is even, so only earlier odd
            // letters contribute signs for an odd derivation.
            let letters: Vec<usize> = (0..self.odds.len())
                .filter(|j| m.odd_mask & (1 << j) != 0)
                .collect();
            for (pos, &j) in letters.iter().enumerate() {
                if odd_images[j].is_zero() {
                    continue;
                }
                let mut sign = koszul::Sign::one();
                if odd_op {
                    for _ in 0..pos {
                        sign = sign
                            * koszul::Sign::swap(
                                crate::koszul::Parity::Odd,
                                crate::koszul::Parity::Odd,
                            );
                    }
                }
                // prefix = letters before pos, suffix = letters after.
                let prefix_mask: u64 = letters[..pos].iter().map(|&b| 1u64 << b).sum();
                let suffix_mask: u64 = letters[pos + 1..].iter().map(|&b| 1u64 << b).sum();
                let prefix = PolyMono {
                    even_exps: m.even_exps.clone(),
                    odd_mask: prefix_mask,
                };
                let suffix = PolyMono {
                    even_exps: vec![0; self.evens.len()],
                    odd_mask: suffix_mask,
                };
                let pre_el = GradedElement::single(&self.basis, self.index[&prefix], sign.to_rat());
                let suf_el = GradedElement::single(&self.basis, self.index[&suffix], Rat::one());
                let term = self
                    .product
                    .mul(&self.product.mul(&pre_el, &odd_images[j])?, &suf_el)?;
                acc = acc.add(&term)?;
            }
            for (row, c) in acc.components() {
                entries.push((row, k, c.clone()));
            }
        }
        LinearOp::from_entries(&self.basis, shift, entries)
    }
}

/// Covector that reads off the coefficient of a single basis monomial,
/// scaled by `norm`.
pub fn point_integral(basis: &Arc<GradedBasis>, top: usize, norm: Rat) -> Vec<Rat> {
    let mut cov = vec![Rat::zero(); basis.dim()];
    cov[top] = norm;
    cov
}

/// k[x]/(x^3) tensor Lambda(psi) with the second-order operator
/// (x d/dx) d/dpsi and zero differential. The bare d/dx does not preserve
/// the ideal (x^3), so the Euler-twisted variant is the smallest
/// second-order operator of this shape that is well defined on the
/// quotient; the seven-term identity detects any other choice.
pub fn poly_fixture() -> DgbvAlgebra {
    let alg = PolyAlgebra::new(
        "poly-x3-psi",
        vec![("x".into(), Bidegree::zero(), 3)],
        vec![("psi".into(), Bidegree::new(1, 0))],
    )
    .expect("fixture construction");
    let delta = alg
        .euler_even(0)
        .compose(&alg.partial_odd(0))
        .expect("same basis");
    let d = LinearOp::zero(&alg.basis, Bidegree::new(0, 1));
    let unit = alg.find("1").unwrap();
    DgbvAlgebra {
        name: "poly-x3-psi".into(),
        basis: alg.basis.clone(),
        weight: 1,
        unit,
        product: alg.product.clone(),
        d,
        delta,
        integral: None,
        calibration: None,
    }
}

/// k[x]/(x^2) tensor Lambda(psi1..psi3) with the second-order operator
/// (x d/dx) d/dpsi1: the smallest built-in model with an obstructed
/// deformation problem. The bracket of the even element
/// psi1*psi2 + x*psi1*psi3 with itself is a nonzero multiple of
/// x*psi1*psi2*psi3, which survives harmonic projection since d = 0.
pub fn obstruction_fixture() -> DgbvAlgebra {
    let alg = PolyAlgebra::new(
        "poly-obstructed",
        vec![("x".into(), Bidegree::zero(), 2)],
        vec![
            ("psi1".into(), Bidegree::new(1, 0)),
            ("psi2".into(), Bidegree::new(1, 0)),
            ("psi3".into(), Bidegree::new(1, 0)),
        ],
    )
    .expect("fixture construction");
    let delta = alg
        .euler_even(0)
        .compose(&alg.partial_odd(0))
        .expect("same basis");
    let d = LinearOp::zero(&alg.basis, Bidegree::new(0, 1));
    let unit = alg.find("1").unwrap();
    DgbvAlgebra {
        name: "poly-obstructed".into(),
        basis: alg.basis.clone(),
        weight: 1,
        unit,
        product: alg.product.clone(),
        d,
        delta,
        integral: None,
        calibration: None,
    }
}

/// Four-dimensional algebra with d(psi1) = psi1*psi2 and zero
/// second-order operator: Im d meets Ker(delta) but not Im(delta), so the
/// subspace coincidence criterion fails with witness psi1*psi2.
pub fn manin_false_fixture() -> DgbvAlgebra {
    let alg = PolyAlgebra::new(
        "manin-false",
        vec![],
        vec![
            ("psi1".into(), Bidegree::new(1, 0)),
            ("psi2".into(), Bidegree::new(0, 1)),
        ],
    )
    .expect("fixture construction");
    let d = alg
        .derivation(
            Bidegree::new(0, 1),
            &[],
            &[
                alg.element("psi1*psi2", Rat::one()),
                GradedElement::zero(&alg.basis),
            ],
        )
        .expect("derivation extension");
    let delta = LinearOp::zero(&alg.basis, Bidegree::new(-1, 0));
    let unit = alg.find("1").unwrap();
    DgbvAlgebra {
        name: "manin-false".into(),
        basis: alg.basis.clone(),
        weight: 1,
        unit,
        product: alg.product.clone(),
        d,
        delta,
        integral: None,
        calibration: None,
    }
}

/// Chevalley-Eilenberg complex of the 3-dimensional Heisenberg Lie
/// algebra: Lambda(a*, b*, c*) with d(c*) = a*^b*. Cohomology dimensions
/// are 1, 2, 2, 1.
pub fn heisenberg_ce() -> (PolyAlgebra, LinearOp) {
    let alg = PolyAlgebra::new(
        "heisenberg-ce",
        vec![],
        vec![
            ("ea".into(), Bidegree::new(0, 1)),
            ("eb".into(), Bidegree::new(0, 1)),
            ("ec".into(), Bidegree::new(0, 1)),
        ],
    )
    .expect("fixture construction");
    let d = alg
        .derivation(
            Bidegree::new(0, 1),
            &[],
            &[
                GradedElement::zero(&alg.basis),
                GradedElement::zero(&alg.basis),
                alg.element("ea*eb", Rat::one()),
            ],
        )
        .expect("derivation extension");
    (alg, d)
}

/// Invariant complex-valued de Rham forms on a real 2n-torus: the
/// exterior algebra on dx_1 .. dx_{2n}. Flat metrics make both structure
/// operators vanish on invariants.
pub fn torus_de_rham(n: usize) -> DgbvAlgebra {
    let odds: Vec<(String, Bidegree)> = (1..=2 * n)
        .map(|i| (format!("dx{i}"), Bidegree::new(0, 1)))
        .collect();
    let alg =
        PolyAlgebra::new(&format!("torus-derham-n{n}"), vec![], odds).expect("model construction");
    let top: String = (1..=2 * n)
        .map(|i| format!("dx{i}"))
        .collect::<Vec<_>>()
        .join("*");
    let unit = alg.find("1").unwrap();
    let top_idx = alg.find(&top).unwrap();
    DgbvAlgebra {
        name: format!("torus-derham-n{n}"),
        basis: alg.basis.clone(),
        weight: n,
        unit,
        product: alg.product.clone(),
        d: LinearOp::zero(&alg.basis, Bidegree::new(0, 1)),
        delta: LinearOp::zero(&alg.basis, Bidegree::new(-1, 0)),
        integral: Some(point_integral(&alg.basis, top_idx, Rat::one())),
        calibration: None,
    }
}

/// Exterior algebra on n holomorphic and n antiholomorphic odd
/// generators, the invariant sector shared by the torus models.
pub fn torus_exterior(name: &str, n: usize, hol: &str, antihol: &str) -> PolyAlgebra {
    let mut odds: Vec<(String, Bidegree)> = Vec::new();
    for i in 1..=n {
        odds.push((format!("{hol}{i}"), Bidegree::new(1, 0)));
    }
    for i in 1..=n {
        odds.push((format!("{antihol}{i}"), Bidegree::new(0, 1)));
    }
    PolyAlgebra::new(name, vec![], odds).expect("model construction")
}

/// Invariant Dolbeault forms on a complex n-torus: Lambda(dz_i, dzb_i).
pub fn torus_forms(n: usize) -> DgbvAlgebra {
    let alg = torus_exterior(&format!("torus-forms-n{n}"), n, "dz", "dzb");
    let top: String = (1..=n)
        .map(|i| format!("dz{i}"))
        .chain((1..=n).map(|i| format!("dzb{i}")))
        .collect::<Vec<_>>()
        .join("*");
    let unit = alg.find("1").unwrap();
    let top_idx = alg.find(&top).unwrap();
    DgbvAlgebra {
        name: format!("torus-forms-n{n}"),
        basis: alg.basis.clone(),
        weight: n,
        unit,
        product: alg.product.clone(),
        d: LinearOp::zero(&alg.basis, Bidegree::new(0, 1)),
        delta: LinearOp::zero(&alg.basis, Bidegree::new(-1, 0)),
        integral: Some(point_integral(&alg.basis, top_idx, Rat::one())),
        calibration: None,
    }
}

/// Invariant polyvector-valued forms on a complex n-torus:
/// Lambda(psi_i, psib_i) with the volume polyvector as calibration.
pub fn torus_polyvectors(n: usize) -> DgbvAlgebra {
    let alg = torus_exterior(&format!("torus-polyvectors-n{n}"), n, "psi", "psib");
    let top: String = (1..=n)
        .map(|i| format!("psi{i}"))
        .chain((1..=n).map(|i| format!("psib{i}")))
        .collect::<Vec<_>>()
        .join("*");
    let vol: String = (1..=n)
        .map(|i| format!("psi{i}"))
        .collect::<Vec<_>>()
        .join("*");
    let unit = alg.find("1").unwrap();
    let top_idx = alg.find(&top).unwrap();
    let vol_idx = alg.find(&vol).unwrap();
    DgbvAlgebra {
        name: format!("torus-polyvectors-n{n}"),
        basis: alg.basis.clone(),
        weight: n,
        unit,
        product: alg.product.clone(),
        d: LinearOp::zero(&alg.basis, Bidegree::new(0, 1)),
        delta: LinearOp::zero(&alg.basis, Bidegree::new(-1, 0)),
        integral: Some(point_integral(&alg.basis, top_idx, Rat::one())),
        calibration: Some(GradedElement::single(&alg.basis, vol_idx, Rat::one())),
    }
}

/// The Heisenberg cochain complex packaged as an algebra with vanishing
/// second-order operator.
pub fn heisenberg_algebra() -> DgbvAlgebra {
    let (alg, d) = heisenberg_ce();
    let unit = alg.find("1").unwrap();
    DgbvAlgebra {
        name: "heisenberg-ce".into(),
        basis: alg.basis.clone(),
        weight: 1,
        unit,
        product: alg.product.clone(),
        d,
        delta: LinearOp::zero(&alg.basis, Bidegree::new(-1, 0)),
        integral: None,
        calibration: None,
    }
}

/// Registry of built-in dGBV models addressable from the command line.
pub fn builtin_names() -> Vec<&'static str> {
    vec![
        "poly-x3-psi",
        "poly-obstructed",
        "manin-false",
        "heisenberg-ce",
        "torus-derham-n1",
        "torus-derham-n2",
        "torus-forms-n1",
        "torus-forms-n2",
        "torus-polyvectors-n1",
        "torus-polyvectors-n2",
    ]
}

pub fn builtin(name: &str) -> Result<DgbvAlgebra> {
    match name {
        "poly-x3-psi" => Ok(poly_fixture()),
        "poly-obstructed" => Ok(obstruction_fixture()),
        "manin-false" => Ok(manin_false_fixture()),
        "heisenberg-ce" => Ok(heisenberg_algebra()),
        "torus-derham-n1" => Ok(torus_de_rham(1)),
        "torus-derham-n2" => Ok(torus_de_rham(2)),
        "torus-forms-n1" => Ok(torus_forms(1)),
        "torus-forms-n2" => Ok(torus_forms(2)),
        "torus-polyvectors-n1" => Ok(torus_polyvectors(1)),
        "torus-polyvectors-n2" => Ok(torus_polyvectors(2)),
        _ => Err(CoreError::Argument(format!(
            "unknown built-in model {name:?}; known: {}",
            builtin_names().join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_fixture_multiplication() {
        let a = poly_fixture();
        assert_eq!(a.dim(), 6);
        // x*psi times x is x^2*psi
        let xpsi = a.basis.find("x*psi").unwrap();
        let x = a.basis.find("x").unwrap();
        let x2psi = a.basis.find("x^2*psi").unwrap();
        let prod = a.product.mul_basis(xpsi, x);
        assert_eq!(prod, GradedElement::single(&a.basis, x2psi, Rat::one()));
        // psi * psi = 0
        let psi = a.basis.find("psi").unwrap();
        assert!(a.product.mul_basis(psi, psi).is_zero());
        // x^2 * x = 0 in the truncation
        let x2 = a.basis.find("x^2").unwrap();
        assert!(a.product.mul_basis(x2, x).is_zero());
    }

    #[test]
    fn poly_fixture_delta() {
        let a = poly_fixture();
        // delta(x*psi) = x, delta(x^2*psi) = 2x^2, delta(psi) = 0
        let xpsi = a.basis.find("x*psi").unwrap();
        let v = a
            .delta
            .apply(&GradedElement::single(&a.basis, xpsi, Rat::one()))
            .unwrap();
        let x = a.basis.find("x").unwrap();
        assert_eq!(v, GradedElement::single(&a.basis, x, Rat::one()));
        let x2psi = a.basis.find("x^2*psi").unwrap();
        let v = a
            .delta
            .apply(&GradedElement::single(&a.basis, x2psi, Rat::one()))
            .unwrap();
        let x2 = a.basis.find("x^2").unwrap();
        assert_eq!(v, GradedElement::single(&a.basis, x2, Rat::from_int(2)));
        let psi = a.basis.find("psi").unwrap();
        assert!(a
            .delta
            .apply(&GradedElement::single(&a.basis, psi, Rat::one()))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn torus_dims() {
        assert_eq!(torus_forms(1).dim(), 4);
        assert_eq!(torus_forms(2).dim(), 16);
        assert_eq!(torus_polyvectors(2).dim(), 16);
        assert_eq!(torus_de_rham(1).dim(), 4);
        assert_eq!(torus_de_rham(2).dim(), 16);
    }

    #[test]
    fn heisenberg_differential() {
        let (alg, d) = heisenberg_ce();
        let ec = alg.element("ec", Rat::one());
        assert_eq!(d.apply(&ec).unwrap(), alg.element("ea*eb", Rat::one()));
        // Leibniz: d(ea*ec) = -ea*d(ec) = -ea*ea*eb = 0
        let eaec = alg.element("ea*ec", Rat::one());
        assert!(d.apply(&eaec).unwrap().is_zero());
        let dd = d.compose(&d).unwrap();
        assert!(dd.is_zero());
    }
}
