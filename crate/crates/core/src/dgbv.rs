//! Differential Gerstenhaber-Batalin-Vilkovisky algebras: the structure,
//! its derived bracket and bullet action, and exhaustive axiom checkers.

// Tensor components are addressed by named indices throughout.
#![allow(clippy::needless_range_loop)]

use crate::bilinear::{BilinearTable, HbarBilinear, HbarOp, SlotParity};
use crate::coeff::Coeff;
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::{Bidegree, GradedBasis};
use crate::hbar::{HbarLaurent, HbarWindow, NuShift};
use crate::koszul::{Parity, Sign};
use crate::linalg::{self, Subspace};
use crate::linop::LinearOp;
use crate::rat::Rat;
use crate::report::Report;
use std::sync::Arc;

/// Supercommutative product given by structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    table: BilinearTable,
}

impl Product {
    pub fn from_triples(
        basis: &Arc<GradedBasis>,
        triples: Vec<(usize, usize, usize, Rat)>,
    ) -> Self {
        let mut table = BilinearTable::new(basis, basis, basis, SlotParity::Plain);
        for (a, b, c, r) in triples {
            let mut v = table.get(a, b);
            v.add_component(c, r);
            table.set(a, b, v);
        }
        Product { table }
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        self.table.left_basis()
    }

    pub fn table(&self) -> &BilinearTable {
        &self.table
    }

    pub fn mul_basis(&self, a: usize, b: usize) -> GradedElement<Rat> {
        self.table.get(a, b)
    }

    pub fn mul<C: Coeff>(
        &self,
        x: &GradedElement<C>,
        y: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        self.table.apply(x, y)
    }

    pub fn triples(&self) -> Vec<(usize, usize, usize, Rat)> {
        let mut out = Vec::new();
        for (a, b, v) in self.table.entries() {
            for (c, r) in v.components() {
                out.push((a, b, c, r.clone()));
            }
        }
        out
    }
}

/// A finite-dimensional bigraded dGBV algebra.
#[derive(Clone, Debug)]
pub struct DgbvAlgebra {
    pub name: String,
    pub basis: Arc<GradedBasis>,
    /// Dimension weight n entering the hbar rescaling exponent (n+q-p)/2.
    pub weight: usize,
    pub unit: usize,
    pub product: Product,
    pub d: LinearOp,
    pub delta: LinearOp,
    pub integral: Option<Vec<Rat>>,
    /// Calibration class, anchor of the period map.
    pub calibration: Option<GradedElement<Rat>>,
}

impl DgbvAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn unit_element(&self) -> GradedElement<Rat> {
        GradedElement::single(&self.basis, self.unit, Rat::one())
    }

    pub fn integral_of<C: Coeff>(&self, x: &GradedElement<C>) -> Result<Option<C>> {
        let Some(cov) = &self.integral else {
            return Err(CoreError::Config(format!(
                "algebra {} has no integral",
                self.name
            )));
        };
        let mut acc: Option<C> = None;
        for (i, c) in x.components() {
            if cov[i].is_zero() {
                continue;
            }
            let term = c.scale(&cov[i]);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc)
    }

    /// The pairing from the integral: int a o b.
    pub fn pairing(&self, a: &GradedElement<Rat>, b: &GradedElement<Rat>) -> Result<Rat> {
        let prod = self.product.mul(a, b)?;
        Ok(self.integral_of(&prod)?.unwrap_or_else(Rat::zero))
    }

    /// Derived bracket  [a . b] = (-1)^a D(a o b) - (-1)^a D(a) o b - a o D(b)
    /// with D the second-order operator, extended bilinearly over total
    /// parity components.
    pub fn derived_bracket<C: Coeff>(
        &self,
        a: &GradedElement<C>,
        b: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        let mut out = GradedElement::zero(&self.basis);
        let (ae, ao) = a.split_total_parity();
        for (part, parity) in [(ae, Parity::Even), (ao, Parity::Odd)] {
            if part.is_zero() {
                continue;
            }
            let sign = Sign::flip(parity);
            let t1 = self
                .delta
                .apply(&self.product.mul(&part, b)?)?
                .apply_sign(sign);
            let t2 = self
                .product
                .mul(&self.delta.apply(&part)?, b)?
                .apply_sign(sign);
            let t3 = self.product.mul(&part, &self.delta.apply(b)?)?;
            out = out.add(&t1)?.sub(&t2)?.sub(&t3)?;
        }
        Ok(out)
    }

    /// Bullet action  a . b = -[l_a, D] b = -a o D(b) + (-1)^a D(a o b).
    pub fn bullet_action<C: Coeff>(
        &self,
        a: &GradedElement<C>,
        b: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        let mut out = GradedElement::zero(&self.basis);
        let (ae, ao) = a.split_total_parity();
        for (part, parity) in [(ae, Parity::Even), (ao, Parity::Odd)] {
            if part.is_zero() {
                continue;
            }
            let t1 = self.product.mul(&part, &self.delta.apply(b)?)?;
            let t2 = self
                .delta
                .apply(&self.product.mul(&part, b)?)?
                .apply_sign(Sign::flip(parity));
            out = out.sub(&t1)?.add(&t2)?;
        }
        Ok(out)
    }

    /// Tabulated derived bracket, for the checkers and the deformation
    /// solver.
    pub fn bracket_table(&self) -> Result<BilinearTable> {
        let mut t = BilinearTable::new(&self.basis, &self.basis, &self.basis, SlotParity::Shifted);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.derived_bracket(
                    &GradedElement::single(&self.basis, i, Rat::one()),
                    &GradedElement::single(&self.basis, j, Rat::one()),
                )?;
                t.set(i, j, v);
            }
        }
        Ok(t)
    }

    pub fn bullet_table(&self) -> Result<BilinearTable> {
        let mut t = BilinearTable::new(&self.basis, &self.basis, &self.basis, SlotParity::Shifted);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.bullet_action(
                    &GradedElement::single(&self.basis, i, Rat::one()),
                    &GradedElement::single(&self.basis, j, Rat::one()),
                )?;
                t.set(i, j, v);
            }
        }
        Ok(t)
    }

    /// The hbar-extended module structure (bullet, hbar^{-1} o, d + hbar D)
    /// on the algebra's own space.
    pub fn hbar_module(&self) -> Result<ModulePair> {
        let bracket = self.bracket_table()?;
        let bullet = self.bullet_table()?;
        Ok(ModulePair {
            g_basis: self.basis.clone(),
            m_basis: self.basis.clone(),
            bracket,
            d_g: self.d.clone(),
            d_m: HbarOp::new(vec![(0, self.d.clone()), (2, self.delta.clone())]),
            bullet: HbarBilinear::from_table(bullet),
            circ: HbarBilinear::new(vec![(-2, self.product.table().clone())]),
        })
    }
}

fn basis_vec(basis: &Arc<GradedBasis>, i: usize) -> GradedElement<Rat> {
    GradedElement::single(basis, i, Rat::one())
}

fn witness_pair(basis: &GradedBasis, i: usize, j: usize, diff: &GradedElement<Rat>) -> String {
    format!(
        "({}, {}) leaves residue {}",
        basis.symbol(i),
        basis.symbol(j),
        diff
    )
}

fn witness_triple(
    basis: &GradedBasis,
    i: usize,
    j: usize,
    k: usize,
    diff: &GradedElement<Rat>,
) -> String {
    format!(
        "({}, {}, {}) leaves residue {}",
        basis.symbol(i),
        basis.symbol(j),
        basis.symbol(k),
        diff
    )
}

/// Exhaustive check of the dGBV axioms. Failures become report entries
/// with concrete witnesses, never errors.
pub fn check_dgbv_axioms(a: &DgbvAlgebra) -> Report {
    let mut rep = Report::new(format!("dgbv axioms [{}]", a.name));
    let basis = &a.basis;
    let n = a.dim();

    rep.record(
        "d has bidegree (0,1)",
        if a.d.shift() == Bidegree::new(0, 1) {
            a.d.check_shift().err()
        } else {
            Some(format!("declared shift {}", a.d.shift()))
        },
    );
    rep.record(
        "delta has bidegree (-1,0)",
        if a.delta.shift() == Bidegree::new(-1, 0) {
            a.delta.check_shift().err()
        } else {
            Some(format!("declared shift {}", a.delta.shift()))
        },
    );

    let dd = a.d.compose(&a.d).expect("same basis");
    rep.record(
        "d squared is zero",
        (!dd.is_zero()).then(|| format!("d^2 = {:?}", dd.entries().next())),
    );
    let xx = a.delta.compose(&a.delta).expect("same basis");
    rep.record(
        "delta squared is zero",
        (!xx.is_zero()).then(|| format!("delta^2 = {:?}", xx.entries().next())),
    );
    let anti = a.d.super_commutator(&a.delta).expect("same basis");
    rep.record(
        "d delta + delta d is zero",
        (!anti.is_zero()).then(|| format!("[d,delta] = {:?}", anti.entries().next())),
    );

    // Unit laws and delta(1) = d(1) = 0.
    let one = a.unit_element();
    let mut unit_witness = None;
    for i in 0..n {
        let e = basis_vec(basis, i);
        let left = a.product.mul(&one, &e).expect("same basis");
        let right = a.product.mul(&e, &one).expect("same basis");
        if left != e || right != e {
            unit_witness = Some(format!("unit law fails on {}", basis.symbol(i)));
            break;
        }
    }
    rep.record("unit element", unit_witness);
    let d1 = a.delta.apply(&one).expect("same basis");
    rep.record(
        "delta(1) = 0",
        (!d1.is_zero()).then(|| format!("delta(1) = {d1}")),
    );

    // Product bidegree (0,0).
    let mut deg_witness = None;
    'outer: for (i, j, v) in a.product.table().entries() {
        let expect = basis.bidegree(i) + basis.bidegree(j);
        for (k, r) in v.components() {
            if !r.is_zero() && basis.bidegree(k) != expect {
                deg_witness = Some(format!(
                    "{} o {} hits {} of bidegree {}, expected {}",
                    basis.symbol(i),
                    basis.symbol(j),
                    basis.symbol(k),
                    basis.bidegree(k),
                    expect
                ));
                break 'outer;
            }
        }
    }
    rep.record("product has bidegree (0,0)", deg_witness);

    // Supercommutativity, exhaustively.
    let mut sc_witness = None;
    'sc: for i in 0..n {
        for j in 0..n {
            let ab = a.product.mul_basis(i, j);
            let ba = a
                .product
                .mul_basis(j, i)
                .apply_sign(Sign::swap(basis.parity(i), basis.parity(j)));
            let diff = ab.sub(&ba).expect("same basis");
            if !diff.is_zero() {
                sc_witness = Some(witness_pair(basis, i, j, &diff));
                break 'sc;
            }
        }
    }
    rep.record("product is supercommutative", sc_witness);

    // Associativity, exhaustively.
    let mut as_witness = None;
    'assoc: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let ei = basis_vec(basis, i);
                let ej = basis_vec(basis, j);
                let ek = basis_vec(basis, k);
                let lhs = a
                    .product
                    .mul(&a.product.mul(&ei, &ej).unwrap(), &ek)
                    .unwrap();
                let rhs = a
                    .product
                    .mul(&ei, &a.product.mul(&ej, &ek).unwrap())
                    .unwrap();
                let diff = lhs.sub(&rhs).unwrap();
                if !diff.is_zero() {
                    as_witness = Some(witness_triple(basis, i, j, k, &diff));
                    break 'assoc;
                }
            }
        }
    }
    rep.record("product is associative", as_witness);

    // d is an order-one derivation.
    let mut leib_witness = None;
    'leib: for i in 0..n {
        for j in 0..n {
            let ei = basis_vec(basis, i);
            let ej = basis_vec(basis, j);
            let lhs = a.d.apply(&a.product.mul(&ei, &ej).unwrap()).unwrap();
            let rhs = a
                .product
                .mul(&a.d.apply(&ei).unwrap(), &ej)
                .unwrap()
                .add(
                    &a.product
                        .mul(&ei, &a.d.apply(&ej).unwrap())
                        .unwrap()
                        .apply_sign(Sign::flip(basis.parity(i))),
                )
                .unwrap();
            let diff = lhs.sub(&rhs).unwrap();
            if !diff.is_zero() {
                leib_witness = Some(witness_pair(basis, i, j, &diff));
                break 'leib;
            }
        }
    }
    rep.record("d is an order-1 derivation", leib_witness);

    // The order-2 identity for delta, exhaustively over triples.
    let mut o2_witness = None;
    'ord2: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let diff = order2_residue(a, i, j, k);
                if !diff.is_zero() {
                    o2_witness = Some(witness_triple(basis, i, j, k, &diff));
                    break 'ord2;
                }
            }
        }
    }
    rep.record("delta satisfies the order-2 identity", o2_witness);

    if let Some(cov) = &a.integral {
        if cov.len() != n {
            rep.fail(
                "integral covector length",
                format!("{} entries for dimension {}", cov.len(), n),
            );
        } else {
            let mut int_d = None;
            let mut int_delta = None;
            'int: for i in 0..n {
                for j in 0..n {
                    let ei = basis_vec(basis, i);
                    let ej = basis_vec(basis, j);
                    // int (d a) o b = (-1)^a int a o d b
                    let lhs = a.pairing(&a.d.apply(&ei).unwrap(), &ej).unwrap();
                    let rhs = Sign::flip(basis.parity(i))
                        .apply(&a.pairing(&ei, &a.d.apply(&ej).unwrap()).unwrap());
                    if lhs != rhs && int_d.is_none() {
                        int_d = Some(format!(
                            "({}, {}): {} vs {}",
                            basis.symbol(i),
                            basis.symbol(j),
                            lhs,
                            rhs
                        ));
                    }
                    // int (delta a) o b = (-1)^a int a o delta b
                    let lhs = a.pairing(&a.delta.apply(&ei).unwrap(), &ej).unwrap();
                    let rhs = Sign::flip(basis.parity(i))
                        .apply(&a.pairing(&ei, &a.delta.apply(&ej).unwrap()).unwrap());
                    if lhs != rhs && int_delta.is_none() {
                        int_delta = Some(format!(
                            "({}, {}): {} vs {}",
                            basis.symbol(i),
                            basis.symbol(j),
                            lhs,
                            rhs
                        ));
                    }
                    if int_d.is_some() && int_delta.is_some() {
                        break 'int;
                    }
                }
            }
            rep.record("integral is d-cyclic", int_d);
            rep.record("integral is delta-cyclic", int_delta);
        }
    }

    rep
}

/// Residue of the seven-term identity for the second-order operator on a
/// basis triple.
fn order2_residue(a: &DgbvAlgebra, i: usize, j: usize, k: usize) -> GradedElement<Rat> {
    let basis = &a.basis;
    let (pa, pb) = (basis.parity(i), basis.parity(j));
    let ei = basis_vec(basis, i);
    let ej = basis_vec(basis, j);
    let ek = basis_vec(basis, k);
    let mul = |x: &GradedElement<Rat>, y: &GradedElement<Rat>| a.product.mul(x, y).unwrap();
    let dl = |x: &GradedElement<Rat>| a.delta.apply(x).unwrap();

    let abc = mul(&mul(&ei, &ej), &ek);
    let lhs = dl(&abc);

    let mut rhs = mul(&dl(&mul(&ei, &ej)), &ek);
    // (-1)^{b(a+1)} b o delta(a o c)
    rhs = rhs
        .add(&mul(&ej, &dl(&mul(&ei, &ek))).apply_sign(Sign::swap(pb, pa.shifted())))
        .unwrap();
    rhs = rhs
        .add(&mul(&ei, &dl(&mul(&ej, &ek))).apply_sign(Sign::flip(pa)))
        .unwrap();
    rhs = rhs.sub(&mul(&mul(&dl(&ei), &ej), &ek)).unwrap();
    rhs = rhs
        .sub(&mul(&mul(&ei, &dl(&ej)), &ek).apply_sign(Sign::flip(pa)))
        .unwrap();
    rhs = rhs
        .sub(&mul(&mul(&ei, &ej), &dl(&ek)).apply_sign(Sign::flip(pa + pb)))
        .unwrap();

    lhs.sub(&rhs).unwrap()
}

/// Exhaustive odd Lie superalgebra axioms for a tabulated bracket, plus
/// the odd Poisson identity when a product is supplied.
pub fn check_odd_lie(bracket: &BilinearTable, d: &LinearOp, product: Option<&Product>) -> Report {
    let mut rep = Report::new("odd Lie axioms");
    let basis = bracket.left_basis().clone();
    let n = basis.dim();
    let br = |x: &GradedElement<Rat>, y: &GradedElement<Rat>| bracket.apply(x, y).unwrap();

    let dd = d.compose(d).expect("same basis");
    rep.record(
        "(a) differential squares to zero",
        (!dd.is_zero()).then(|| "d^2 != 0".to_string()),
    );

    let mut anti = None;
    'anti: for i in 0..n {
        for j in 0..n {
            let lhs = bracket.get(i, j);
            let rhs = bracket.get(j, i).apply_sign(Sign::swap(
                basis.parity(i).shifted(),
                basis.parity(j).shifted(),
            ));
            let diff = lhs.add(&rhs).unwrap();
            if !diff.is_zero() {
                anti = Some(witness_pair(&basis, i, j, &diff));
                break 'anti;
            }
        }
    }
    rep.record("(b) shifted antisymmetry", anti);

    let mut leib = None;
    'leib: for i in 0..n {
        for j in 0..n {
            let ei = basis_vec(&basis, i);
            let ej = basis_vec(&basis, j);
            let lhs = d.apply(&bracket.get(i, j)).unwrap();
            let rhs = br(&d.apply(&ei).unwrap(), &ej)
                .sub(&br(&ei, &d.apply(&ej).unwrap()).apply_sign(Sign::flip(basis.parity(i))))
                .unwrap();
            let diff = lhs.sub(&rhs).unwrap();
            if !diff.is_zero() {
                leib = Some(witness_pair(&basis, i, j, &diff));
                break 'leib;
            }
        }
    }
    rep.record("(c) differential is a bracket derivation", leib);

    let mut jac = None;
    'jac: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let ei = basis_vec(&basis, i);
                let ek = basis_vec(&basis, k);
                let lhs = br(&ei, &bracket.get(j, k));
                let rhs = br(&bracket.get(i, j), &ek)
                    .add(
                        &br(&basis_vec(&basis, j), &bracket.get(i, k)).apply_sign(Sign::swap(
                            basis.parity(i).shifted(),
                            basis.parity(j).shifted(),
                        )),
                    )
                    .unwrap();
                let diff = lhs.sub(&rhs).unwrap();
                if !diff.is_zero() {
                    jac = Some(witness_triple(&basis, i, j, k, &diff));
                    break 'jac;
                }
            }
        }
    }
    rep.record("(d) shifted Jacobi identity", jac);

    if let Some(product) = product {
        let mut poisson = None;
        'poi: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = basis_vec(&basis, i);
                    let ej = basis_vec(&basis, j);
                    let ek = basis_vec(&basis, k);
                    let lhs = br(&ei, &product.mul(&ej, &ek).unwrap());
                    // The bracket with a fixed first slot is an operator
                    // of shifted parity, so it crosses b with the sign
                    // (-1)^{(a+1) b}.
                    let rhs = product
                        .mul(&bracket.get(i, j), &ek)
                        .unwrap()
                        .add(
                            &product
                                .mul(&ej, &bracket.get(i, k))
                                .unwrap()
                                .apply_sign(Sign::swap(basis.parity(i).shifted(), basis.parity(j))),
                        )
                        .unwrap();
                    let diff = lhs.sub(&rhs).unwrap();
                    if !diff.is_zero() {
                        poisson = Some(witness_triple(&basis, i, j, k, &diff));
                        break 'poi;
                    }
                }
            }
        }
        rep.record("odd Poisson identity", poisson);
    }

    rep
}

/// A dg Lie algebra together with an hbar-extended module.
#[derive(Clone, Debug)]
pub struct ModulePair {
    pub g_basis: Arc<GradedBasis>,
    pub m_basis: Arc<GradedBasis>,
    pub bracket: BilinearTable,
    pub d_g: LinearOp,
    pub d_m: HbarOp,
    pub bullet: HbarBilinear,
    pub circ: HbarBilinear,
}

impl ModulePair {
    fn g_vec(&self, i: usize, window: HbarWindow) -> GradedElement<HbarLaurent> {
        GradedElement::single(
            &self.g_basis,
            i,
            HbarLaurent::one(window).expect("window contains zero"),
        )
    }

    fn m_vec(&self, i: usize, window: HbarWindow) -> GradedElement<HbarLaurent> {
        GradedElement::single(
            &self.m_basis,
            i,
            HbarLaurent::one(window).expect("window contains zero"),
        )
    }

    pub fn bullet_apply<C: Coeff + NuShift>(
        &self,
        x: &GradedElement<C>,
        y: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        self.bullet.apply(x, y)
    }

    pub fn circ_apply<C: Coeff + NuShift>(
        &self,
        x: &GradedElement<C>,
        y: &GradedElement<C>,
    ) -> Result<GradedElement<C>> {
        self.circ.apply(x, y)
    }
}

/// Exhaustively verifies the dg-module-with-flat-structure identities for
/// a pair (g, m): square-zero module differential, the bullet Leibniz
/// rule, the Lie-module identity, circ-commutativity, and the two
/// circ-compatibility identities.
pub fn check_module_axioms(pair: &ModulePair, window: HbarWindow) -> Report {
    let mut rep = Report::new("module axioms");
    let gb = &pair.g_basis;
    let mb = &pair.m_basis;
    let gn = gb.dim();
    let mn = mb.dim();

    match pair.d_m.square_parts() {
        Ok(sq) => rep.record(
            "module differential squares to zero",
            (!sq.is_empty())
                .then(|| format!("nonzero at nu powers {:?}", sq.keys().collect::<Vec<_>>())),
        ),
        Err(e) => rep.fail("module differential squares to zero", e.to_string()),
    }

    let run = |rep: &mut Report, name: &str, f: &dyn Fn() -> Result<Option<String>>| match f() {
        Ok(w) => rep.record(name, w),
        Err(e) => rep.fail(name, e.to_string()),
    };

    run(&mut rep, "bullet Leibniz rule", &|| {
        for i in 0..gn {
            for j in 0..mn {
                let k = pair.g_vec(i, window);
                let a = pair.m_vec(j, window);
                let lhs = pair.d_m.apply(&pair.bullet.apply(&k, &a)?)?;
                let rhs = pair.bullet.apply(&pair.d_g.apply(&k)?, &a)?.sub(
                    &pair
                        .bullet
                        .apply(&k, &pair.d_m.apply(&a)?)?
                        .apply_sign(Sign::flip(gb.parity(i))),
                )?;
                let diff = lhs.sub(&rhs)?;
                if !diff.is_zero() {
                    return Ok(Some(witness_pair_hl(gb, mb, i, j, &diff)));
                }
            }
        }
        Ok(None)
    });

    run(&mut rep, "Lie-module identity", &|| {
        for i in 0..gn {
            for j in 0..gn {
                for l in 0..mn {
                    let k1 = pair.g_vec(i, window);
                    let k2 = pair.g_vec(j, window);
                    let a = pair.m_vec(l, window);
                    let lhs = pair.bullet.apply(&k1, &pair.bullet.apply(&k2, &a)?)?.sub(
                        &pair
                            .bullet
                            .apply(&k2, &pair.bullet.apply(&k1, &a)?)?
                            .apply_sign(Sign::swap(gb.parity(i).shifted(), gb.parity(j).shifted())),
                    )?;
                    let br = lift_rat_element(&pair.bracket.get(i, j), window);
                    let rhs = pair.bullet.apply(&br, &a)?;
                    let diff = lhs.sub(&rhs)?;
                    if !diff.is_zero() {
                        return Ok(Some(format!(
                            "({}, {}, {}) leaves residue",
                            gb.symbol(i),
                            gb.symbol(j),
                            mb.symbol(l)
                        )));
                    }
                }
            }
        }
        Ok(None)
    });

    run(&mut rep, "circ is supercommutative", &|| {
        for i in 0..gn {
            for j in 0..gn {
                for l in 0..mn {
                    let k1 = pair.g_vec(i, window);
                    let k2 = pair.g_vec(j, window);
                    let a = pair.m_vec(l, window);
                    let lhs = pair.circ.apply(&k1, &pair.circ.apply(&k2, &a)?)?;
                    let rhs = pair
                        .circ
                        .apply(&k2, &pair.circ.apply(&k1, &a)?)?
                        .apply_sign(Sign::swap(gb.parity(i), gb.parity(j)));
                    let diff = lhs.sub(&rhs)?;
                    if !diff.is_zero() {
                        return Ok(Some(format!(
                            "({}, {}, {}) leaves residue",
                            gb.symbol(i),
                            gb.symbol(j),
                            mb.symbol(l)
                        )));
                    }
                }
            }
        }
        Ok(None)
    });

    run(&mut rep, "circ-differential compatibility", &|| {
        for i in 0..gn {
            for j in 0..mn {
                let k = pair.g_vec(i, window);
                let a = pair.m_vec(j, window);
                let s = Sign::flip(gb.parity(i));
                let lhs = pair.d_m.apply(&pair.circ.apply(&k, &a)?)?;
                let rhs = pair
                    .circ
                    .apply(&pair.d_g.apply(&k)?, &a)?
                    .add(&pair.circ.apply(&k, &pair.d_m.apply(&a)?)?.apply_sign(s))?
                    .add(&pair.bullet.apply(&k, &a)?.apply_sign(s))?;
                let diff = lhs.sub(&rhs)?;
                if !diff.is_zero() {
                    return Ok(Some(witness_pair_hl(gb, mb, i, j, &diff)));
                }
            }
        }
        Ok(None)
    });

    run(&mut rep, "circ-bullet compatibility", &|| {
        for i in 0..gn {
            for j in 0..gn {
                for l in 0..mn {
                    let k1 = pair.g_vec(i, window);
                    let k2 = pair.g_vec(j, window);
                    let a = pair.m_vec(l, window);
                    let lhs = pair.circ.apply(&k1, &pair.bullet.apply(&k2, &a)?)?.sub(
                        &pair
                            .bullet
                            .apply(&k2, &pair.circ.apply(&k1, &a)?)?
                            .apply_sign(
                                Sign::swap(gb.parity(i), gb.parity(j)) * Sign::flip(gb.parity(i)),
                            ),
                    )?;
                    let br = lift_rat_element(&pair.bracket.get(i, j), window);
                    let rhs = pair
                        .circ
                        .apply(&br, &a)?
                        .apply_sign(Sign::flip(gb.parity(j)))
                        .neg();
                    let diff = lhs.sub(&rhs)?;
                    if !diff.is_zero() {
                        return Ok(Some(format!(
                            "({}, {}, {}) leaves residue",
                            gb.symbol(i),
                            gb.symbol(j),
                            mb.symbol(l)
                        )));
                    }
                }
            }
        }
        Ok(None)
    });

    rep
}

fn witness_pair_hl(
    gb: &GradedBasis,
    mb: &GradedBasis,
    i: usize,
    j: usize,
    _diff: &GradedElement<HbarLaurent>,
) -> String {
    format!("({}, {}) leaves residue", gb.symbol(i), mb.symbol(j))
}

pub fn lift_rat_element(x: &GradedElement<Rat>, window: HbarWindow) -> GradedElement<HbarLaurent> {
    x.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window contains zero"))
}

/// The three subspaces of the non-obstructedness criterion and the
/// verdict on their coincidence.
#[derive(Clone, Debug)]
pub struct ManinReport {
    pub im_d_ker_delta: Subspace,
    pub im_delta_ker_d: Subspace,
    pub im_d_im_delta: Subspace,
    pub verdict: bool,
    pub witness: Option<String>,
}

pub fn check_manin(a: &DgbvAlgebra) -> ManinReport {
    let n = a.dim();
    let column_space = |op: &LinearOp| {
        let cols: Vec<Vec<Rat>> = (0..n)
            .map(|j| {
                let mut v = vec![Rat::zero(); n];
                for (row, col, val) in op.entries() {
                    if col == j {
                        v[row] = val.clone();
                    }
                }
                v
            })
            .collect();
        Subspace::from_vectors(n, &cols)
    };
    let kernel_space = |op: &LinearOp| {
        let dense = op.to_dense();
        Subspace::from_vectors(n, &linalg::kernel_basis(&dense, n))
    };

    let im_d = column_space(&a.d);
    let im_delta = column_space(&a.delta);
    let ker_d = kernel_space(&a.d);
    let ker_delta = kernel_space(&a.delta);

    let s1 = im_d.intersect(&ker_delta);
    let s2 = im_delta.intersect(&ker_d);
    let s3 = im_d.intersect(&im_delta);

    let mut witness = None;
    let pairs = [
        ("Im d ∩ Ker delta", &s1, "Im d ∩ Im delta", &s3),
        ("Im delta ∩ Ker d", &s2, "Im d ∩ Im delta", &s3),
        ("Im d ∩ Im delta", &s3, "Im d ∩ Ker delta", &s1),
        ("Im d ∩ Im delta", &s3, "Im delta ∩ Ker d", &s2),
    ];
    for (name_a, sa, name_b, sb) in pairs {
        if let Some(v) = sa.witness_not_in(sb) {
            let elem = GradedElement::from_vec(&a.basis, &v);
            witness = Some(format!("{elem} lies in {name_a} but not in {name_b}"));
            break;
        }
    }
    let verdict = witness.is_none();
    ManinReport {
        im_d_ker_delta: s1,
        im_delta_ker_d: s2,
        im_d_im_delta: s3,
        verdict,
        witness,
    }
}

/// Dimensions entering the non-obstructedness argument: H(A,d), H(A,delta)
/// and (Ker d ∩ Ker delta)/Im(d delta).
pub fn manin_dims(a: &DgbvAlgebra) -> Result<(usize, usize, usize)> {
    let n = a.dim();
    let h_d = crate::cohomology::cohomology(&a.d)?.dim();
    let h_delta = crate::cohomology::cohomology(&a.delta)?.dim();
    let ker_d = Subspace::from_vectors(n, &linalg::kernel_basis(&a.d.to_dense(), n));
    let ker_delta = Subspace::from_vectors(n, &linalg::kernel_basis(&a.delta.to_dense(), n));
    let joint = ker_d.intersect(&ker_delta);
    let ddelta = a.d.compose(&a.delta)?;
    let im: Vec<Vec<Rat>> = {
        let dense = ddelta.to_dense();
        (0..n)
            .map(|j| (0..n).map(|i| dense[i][j].clone()).collect())
            .collect()
    };
    let im_space = Subspace::from_vectors(n, &im);
    if !joint.contains_space(&im_space) {
        return Err(CoreError::Structural(
            "Im(d delta) is not contained in Ker d ∩ Ker delta".into(),
        ));
    }
    Ok((h_d, h_delta, joint.dim() - im_space.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hbar::HbarWindow;
    use crate::models;

    #[test]
    fn fixtures_pass_the_axiom_suite() {
        for name in models::builtin_names() {
            let a = models::builtin(name).unwrap();
            let rep = check_dgbv_axioms(&a);
            assert!(rep.all_passed(), "{}", rep.summary());
        }
    }

    #[test]
    fn wrong_shift_is_reported() {
        // Declaring the second-order operator with the differential's
        // bidegree must fail the shift check.
        let mut a = models::poly_fixture();
        let entries: Vec<_> = a
            .delta
            .entries()
            .map(|(r, c, v)| (r, c, v.clone()))
            .collect();
        a.delta = LinearOp::from_entries_unchecked(&a.basis, Bidegree::new(0, 1), entries);
        let rep = check_dgbv_axioms(&a);
        assert!(!rep.all_passed());
        assert!(rep
            .failures()
            .any(|c| c.name.contains("delta has bidegree")));
    }

    #[test]
    fn derived_bracket_unit_and_odd_square() {
        let a = models::poly_fixture();
        let one = a.unit_element();
        for i in 0..a.dim() {
            let e = GradedElement::single(&a.basis, i, Rat::one());
            assert!(a.derived_bracket(&one, &e).unwrap().is_zero());
            if a.basis.parity(i).is_odd() {
                assert!(a.derived_bracket(&e, &e).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn derived_bracket_x_psi() {
        // [x . psi] = delta(x o psi) - delta(x) o psi - x o delta(psi)
        //           = delta(x psi) = x.
        let a = models::poly_fixture();
        let xi = a.basis.find("x").unwrap();
        let x = GradedElement::single(&a.basis, xi, Rat::one());
        let psi = GradedElement::single(&a.basis, a.basis.find("psi").unwrap(), Rat::one());
        let br = a.derived_bracket(&x, &psi).unwrap();
        assert_eq!(br, x);
    }

    #[test]
    fn odd_lie_axioms_hold_for_both_differentials() {
        for name in ["poly-x3-psi", "poly-obstructed", "torus-forms-n1"] {
            let a = models::builtin(name).unwrap();
            let bracket = a.bracket_table().unwrap();
            let rep_d = check_odd_lie(&bracket, &a.d, Some(&a.product));
            assert!(rep_d.all_passed(), "{}: {}", name, rep_d.summary());
            let rep_delta = check_odd_lie(&bracket, &a.delta, Some(&a.product));
            assert!(rep_delta.all_passed(), "{}: {}", name, rep_delta.summary());
        }
    }

    #[test]
    fn zero_bracket_zero_differential_pass() {
        let (alg, _d) = models::heisenberg_ce();
        let bracket = BilinearTable::new(&alg.basis, &alg.basis, &alg.basis, SlotParity::Shifted);
        let zero = LinearOp::zero(&alg.basis, Bidegree::new(0, 1));
        let rep = check_odd_lie(&bracket, &zero, Some(&alg.product));
        assert!(rep.all_passed(), "{}", rep.summary());
    }

    #[test]
    fn heisenberg_ce_passes_with_its_differential() {
        let (alg, d) = models::heisenberg_ce();
        let bracket = BilinearTable::new(&alg.basis, &alg.basis, &alg.basis, SlotParity::Shifted);
        let rep = check_odd_lie(&bracket, &d, Some(&alg.product));
        assert!(rep.all_passed(), "{}", rep.summary());
    }

    #[test]
    fn corrupted_bracket_fails_jacobi_with_witness() {
        let a = models::poly_fixture();
        let mut bracket = a.bracket_table().unwrap();
        // Corrupt one structure constant.
        let x = a.basis.find("x").unwrap();
        let psi = a.basis.find("psi").unwrap();
        let x2psi = a.basis.find("x^2*psi").unwrap();
        let mut v = bracket.get(x, psi);
        v.add_component(x2psi, Rat::from_int(7));
        bracket.set(x, psi, v);
        let rep = check_odd_lie(&bracket, &a.d, None);
        assert!(!rep.all_passed());
        let failed: Vec<_> = rep.failures().map(|c| c.name.clone()).collect();
        assert!(
            failed
                .iter()
                .any(|n| n.contains("Jacobi") || n.contains("antisymmetry")),
            "failed: {failed:?}"
        );
        assert!(rep.failures().all(|c| c.witness.is_some()));
    }

    #[test]
    fn bullet_action_identities() {
        let a = models::poly_fixture();
        let one = a.unit_element();
        for i in 0..a.dim() {
            let e = GradedElement::single(&a.basis, i, Rat::one());
            // 1 . b = 0
            assert!(a.bullet_action(&one, &e).unwrap().is_zero());
            // a . 1 = (-1)^a delta(a)
            let lhs = a.bullet_action(&e, &one).unwrap();
            let rhs = a
                .delta
                .apply(&e)
                .unwrap()
                .apply_sign(Sign::flip(a.basis.parity(i)));
            assert_eq!(lhs, rhs, "index {i}");
        }
    }

    #[test]
    fn bullet_is_a_bracket_module() {
        // a1.(a2.b) - (-1)^{(a1+1)(a2+1)} a2.(a1.b) = [a1.a2].b on all
        // basis triples of the small fixture.
        let a = models::poly_fixture();
        let n = a.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = GradedElement::single(&a.basis, i, Rat::one());
                    let ej = GradedElement::single(&a.basis, j, Rat::one());
                    let ek = GradedElement::single(&a.basis, k, Rat::one());
                    let lhs = a
                        .bullet_action(&ei, &a.bullet_action(&ej, &ek).unwrap())
                        .unwrap()
                        .sub(
                            &a.bullet_action(&ej, &a.bullet_action(&ei, &ek).unwrap())
                                .unwrap()
                                .apply_sign(Sign::swap(
                                    a.basis.parity(i).shifted(),
                                    a.basis.parity(j).shifted(),
                                )),
                        )
                        .unwrap();
                    let rhs = a
                        .bullet_action(&a.derived_bracket(&ei, &ej).unwrap(), &ek)
                        .unwrap();
                    assert_eq!(lhs, rhs, "triple ({i},{j},{k})");
                }
            }
        }
    }

    #[test]
    fn module_axioms_for_hbar_extension() {
        for name in ["poly-x3-psi", "torus-forms-n1", "torus-polyvectors-n1"] {
            let a = models::builtin(name).unwrap();
            let pair = a.hbar_module().unwrap();
            let rep = check_module_axioms(&pair, HbarWindow::new(-8, 8));
            assert!(rep.all_passed(), "{}: {}", name, rep.summary());
        }
    }

    #[test]
    fn dropping_the_hbar_weight_breaks_compatibility() {
        let a = models::poly_fixture();
        let mut pair = a.hbar_module().unwrap();
        // circ without the hbar^{-1} factor.
        pair.circ = HbarBilinear::new(vec![(0, a.product.table().clone())]);
        let rep = check_module_axioms(&pair, HbarWindow::new(-8, 8));
        assert!(!rep.all_passed());
        assert!(rep.failures().any(|c| c.name.contains("circ-differential")));
    }

    #[test]
    fn manin_verdicts() {
        // All structure operators zero: all three spaces are {0}.
        let t = models::torus_forms(1);
        let rep = check_manin(&t);
        assert!(rep.verdict);
        assert_eq!(rep.im_d_ker_delta.dim(), 0);

        // d = 0, delta != 0 fails.
        let p = models::poly_fixture();
        let rep = check_manin(&p);
        assert!(!rep.verdict);
        assert!(rep.witness.is_some());

        // The engineered 4-dimensional example: Im d ∩ Ker delta is
        // strictly bigger than Im d ∩ Im delta.
        let m = models::manin_false_fixture();
        let rep = check_manin(&m);
        assert!(!rep.verdict);
        assert_eq!(rep.im_d_ker_delta.dim(), 1);
        assert_eq!(rep.im_d_im_delta.dim(), 0);
        assert!(rep.witness.unwrap().contains("psi1*psi2"));
    }

    #[test]
    fn manin_dims_on_torus() {
        let t = models::torus_forms(2);
        let (hd, hdelta, joint) = manin_dims(&t).unwrap();
        assert_eq!(hd, 16);
        assert_eq!(hdelta, 16);
        assert_eq!(joint, 16);
    }

    #[test]
    fn pairing_from_integral() {
        let t = models::torus_polyvectors(1);
        let one = t.unit_element();
        let top = GradedElement::single(&t.basis, t.basis.find("psi1*psib1").unwrap(), Rat::one());
        assert_eq!(t.pairing(&one, &top).unwrap(), Rat::one());
        // exactness pairing: int (d a) o b + (-1)^{a+1} int a o (d b) = 0
        // holds trivially here (d = 0); exercised on the poly fixture by
        // the axiom checker instead.
        let psi = GradedElement::single(&t.basis, t.basis.find("psi1").unwrap(), Rat::one());
        let psib = GradedElement::single(&t.basis, t.basis.find("psib1").unwrap(), Rat::one());
        assert_eq!(t.pairing(&psi, &psib).unwrap(), Rat::one());
        assert_eq!(t.pairing(&psib, &psi).unwrap(), -Rat::one());
    }
}
