//! Polynomial sections of the supermanifold calculus.
//!
//! A section is a polynomial in the even coordinates z_a, zb_a and the odd
//! coordinates of one of two models over an n-dimensional base:
//!
//! * form model: odd generators th_a (holomorphic one-forms) and
//!   thb_a (antiholomorphic one-forms);
//! * polyvector model: odd generators th_a (degree-shifted holomorphic
//!   vector fields) and thb_a (antiholomorphic one-forms).
//!
//! The two models share the even coordinates and the odd-letter calculus;
//! only the contraction pairing between them distinguishes the tags. Every
//! operation enforces the declared z-degree bound and fails loudly on
//! overflow instead of truncating.

use crate::error::{CoreError, Result};
use crate::grading::Bidegree;
use crate::koszul::{self, Parity, Sign};
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelKind {
    Form,
    Polyvector,
}

/// The ambient space of a family of sections.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SectionSpace {
    pub n: usize,
    pub model: ModelKind,
    /// Bound on the combined z, zb polynomial degree.
    pub degree_bound: u32,
}

impl SectionSpace {
    pub fn new(n: usize, model: ModelKind, degree_bound: u32) -> Arc<Self> {
        Arc::new(SectionSpace {
            n,
            model,
            degree_bound,
        })
    }

    pub fn check_same(a: &Arc<SectionSpace>, b: &Arc<SectionSpace>) -> Result<()> {
        if Arc::ptr_eq(a, b) || **a == **b {
            Ok(())
        } else {
            Err(CoreError::BasisMismatch(format!(
                "section spaces differ: n {} vs {}, model {:?} vs {:?}, bound {} vs {}",
                a.n, b.n, a.model, b.model, a.degree_bound, b.degree_bound
            )))
        }
    }
}

/// One monomial: z^a zb^b times a square-free odd word. Odd letters are
/// ordered th_1 < ... < th_n < thb_1 < ... < thb_n.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct SecMono {
    pub z: Vec<u16>,
    pub zb: Vec<u16>,
    pub th: u32,
    pub thb: u32,
}

impl SecMono {
    pub fn unit(n: usize) -> Self {
        SecMono {
            z: vec![0; n],
            zb: vec![0; n],
            th: 0,
            thb: 0,
        }
    }

    pub fn z_degree(&self) -> u32 {
        self.z.iter().map(|&e| e as u32).sum::<u32>()
            + self.zb.iter().map(|&e| e as u32).sum::<u32>()
    }

    pub fn odd_letters(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for a in 0..n {
            if self.th & (1 << a) != 0 {
                out.push(a);
            }
        }
        for a in 0..n {
            if self.thb & (1 << a) != 0 {
                out.push(n + a);
            }
        }
        out
    }

    pub fn parity(&self) -> Parity {
        Parity::of_i32((self.th.count_ones() + self.thb.count_ones()) as i32)
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.th.count_ones() as i32, self.thb.count_ones() as i32)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct PolySection {
    space: Arc<SectionSpace>,
    terms: BTreeMap<SecMono, Rat>,
}

impl PolySection {
    pub fn zero(space: &Arc<SectionSpace>) -> Self {
        PolySection {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &Arc<SectionSpace>, c: Rat) -> Self {
        let mut s = Self::zero(space);
        s.add_term(SecMono::unit(space.n), c);
        s
    }

    pub fn monomial(space: &Arc<SectionSpace>, m: SecMono, c: Rat) -> Result<Self> {
        if m.z_degree() > space.degree_bound {
            return Err(CoreError::DegreeOverflow {
                degree: m.z_degree() as usize,
                bound: space.degree_bound as usize,
            });
        }
        let mut s = Self::zero(space);
        s.add_term(m, c);
        Ok(s)
    }

    /// The a-th holomorphic odd generator.
    pub fn theta(space: &Arc<SectionSpace>, a: usize) -> Self {
        let mut m = SecMono::unit(space.n);
        m.th = 1 << a;
        let mut s = Self::zero(space);
        s.add_term(m, Rat::one());
        s
    }

    /// The a-th antiholomorphic odd generator.
    pub fn theta_bar(space: &Arc<SectionSpace>, a: usize) -> Self {
        let mut m = SecMono::unit(space.n);
        m.thb = 1 << a;
        let mut s = Self::zero(space);
        s.add_term(m, Rat::one());
        s
    }

    pub fn coordinate_z(space: &Arc<SectionSpace>, a: usize) -> Result<Self> {
        let mut m = SecMono::unit(space.n);
        m.z[a] = 1;
        Self::monomial(space, m, Rat::one())
    }

    pub fn coordinate_zb(space: &Arc<SectionSpace>, a: usize) -> Result<Self> {
        let mut m = SecMono::unit(space.n);
        m.zb[a] = 1;
        Self::monomial(space, m, Rat::one())
    }

    pub fn space(&self) -> &Arc<SectionSpace> {
        &self.space
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SecMono, &Rat)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: SecMono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        SectionSpace::check_same(&self.space, &other.space)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PolySection {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(&self.space);
        }
        PolySection {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn apply_sign(&self, s: Sign) -> Self {
        if s.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        SectionSpace::check_same(&self.space, &other.space)?;
        let n = self.space.n;
        let mut out = Self::zero(&self.space);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.th & m2.th != 0 || m1.thb & m2.thb != 0 {
                    continue;
                }
                let deg = m1.z_degree() + m2.z_degree();
                if deg > self.space.degree_bound {
                    return Err(CoreError::DegreeOverflow {
                        degree: deg as usize,
                        bound: self.space.degree_bound as usize,
                    });
                }
                let sign = koszul::merge_sign(&m1.odd_letters(n), &m2.odd_letters(n));
                let m = SecMono {
                    z: m1.z.iter().zip(&m2.z).map(|(&a, &b)| a + b).collect(),
                    zb: m1.zb.iter().zip(&m2.zb).map(|(&a, &b)| a + b).collect(),
                    th: m1.th | m2.th,
                    thb: m1.thb | m2.thb,
                };
                out.add_term(m, sign.apply(&(c1 * c2)));
            }
        }
        Ok(out)
    }

    pub fn d_z(&self, a: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            if m.z[a] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.z[a] -= 1;
            out.add_term(m2, c * &Rat::from_int(m.z[a] as i64));
        }
        out
    }

    pub fn d_zb(&self, a: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            if m.zb[a] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.zb[a] -= 1;
            out.add_term(m2, c * &Rat::from_int(m.zb[a] as i64));
        }
        out
    }

    /// Left derivative by th_a.
    pub fn d_theta(&self, a: usize) -> Self {
        self.odd_derivative(a, false)
    }

    /// Left derivative by thb_a.
    pub fn d_theta_bar(&self, a: usize) -> Self {
        self.odd_derivative(a, true)
    }

    fn odd_derivative(&self, a: usize, bar: bool) -> Self {
        let n = self.space.n;
        let target = if bar { n + a } else { a };
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            let present = if bar {
                m.thb & (1 << a) != 0
            } else {
                m.th & (1 << a) != 0
            };
            if !present {
                continue;
            }
            let letters = m.odd_letters(n);
            let pos = letters.iter().position(|&l| l == target).expect("present");
            // Walk the letter to the front.
            let mut perm: Vec<usize> = vec![pos];
            perm.extend((0..letters.len()).filter(|&k| k != pos));
            let sign = koszul::koszul_sign(&vec![Parity::Odd; letters.len()], &perm)
                .expect("valid permutation");
            let mut m2 = m.clone();
            if bar {
                m2.thb &= !(1 << a);
            } else {
                m2.th &= !(1 << a);
            }
            out.add_term(m2, sign.apply(c));
        }
        out
    }

    /// Keeps only the terms with no z or zb dependence.
    pub fn constant_coefficient_part(&self) -> Self {
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            if m.z_degree() == 0 {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Evaluation of the coefficient functions at the origin; odd
    /// variables survive.
    pub fn at_origin(&self) -> Self {
        self.constant_coefficient_part()
    }

    pub fn parity_if_homogeneous(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    pub fn bidegree_if_homogeneous(&self) -> Option<Bidegree> {
        let mut it = self.terms.keys().map(|m| m.bidegree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }
}

impl fmt::Display for PolySection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.space.n;
        let hol = match self.space.model {
            ModelKind::Form => "dz",
            ModelKind::Polyvector => "p",
        };
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for a in 0..n {
                if m.z[a] > 0 {
                    write!(f, "*z{}^{}", a + 1, m.z[a])?;
                }
            }
            for a in 0..n {
                if m.zb[a] > 0 {
                    write!(f, "*w{}^{}", a + 1, m.zb[a])?;
                }
            }
            for a in 0..n {
                if m.th & (1 << a) != 0 {
                    write!(f, "*{hol}{}", a + 1)?;
                }
            }
            for a in 0..n {
                if m.thb & (1 << a) != 0 {
                    write!(f, "*dw{}", a + 1)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> Arc<SectionSpace> {
        SectionSpace::new(2, ModelKind::Polyvector, 4)
    }

    #[test]
    fn odd_letters_anticommute() {
        let sp = space();
        let t1 = PolySection::theta(&sp, 0);
        let t2 = PolySection::theta(&sp, 1);
        assert_eq!(t1.mul(&t2).unwrap(), t2.mul(&t1).unwrap().neg());
        assert!(t1.mul(&t1).unwrap().is_zero());
        let tb = PolySection::theta_bar(&sp, 0);
        assert_eq!(t1.mul(&tb).unwrap(), tb.mul(&t1).unwrap().neg());
    }

    #[test]
    fn degree_bound_is_loud() {
        let sp = SectionSpace::new(1, ModelKind::Form, 1);
        let z = PolySection::coordinate_z(&sp, 0).unwrap();
        assert!(matches!(z.mul(&z), Err(CoreError::DegreeOverflow { .. })));
    }

    #[test]
    fn left_odd_derivative_signs() {
        let sp = space();
        let t1 = PolySection::theta(&sp, 0);
        let t2 = PolySection::theta(&sp, 1);
        let m = t1.mul(&t2).unwrap();
        assert_eq!(m.d_theta(0), t2);
        assert_eq!(m.d_theta(1), t1.neg());
        // thb sits after all th letters.
        let tb = PolySection::theta_bar(&sp, 0);
        let mt = t1.mul(&tb).unwrap();
        assert_eq!(mt.d_theta_bar(0), t1.neg());
    }

    #[test]
    fn even_derivatives() {
        let sp = space();
        let z = PolySection::coordinate_z(&sp, 0).unwrap();
        let z2 = z.mul(&z).unwrap();
        assert_eq!(z2.d_z(0), z.scale(&Rat::from_int(2)));
        assert!(z2.d_zb(0).is_zero());
    }

    #[test]
    fn origin_evaluation() {
        let sp = space();
        let z = PolySection::coordinate_z(&sp, 0).unwrap();
        let t = PolySection::theta(&sp, 0);
        let s = z.mul(&t).unwrap().add(&t).unwrap();
        assert_eq!(s.at_origin(), t);
    }
}
