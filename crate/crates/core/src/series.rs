//! Truncated supercommutative power series.
//!
//! The ring is k[t^0, ..., t^{P-1}] / m^{N+1} where each parameter carries
//! a parity; odd parameters square to zero. Coefficients live in an even
//! ring (rationals or hbar-Laurent values), so every supercommutation sign
//! comes from the parameters alone and is produced by the koszul module.

use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::koszul::{self, Parity, Sign};
use crate::linalg;
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// The parameter list and truncation order shared by a family of series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesRing {
    params: Vec<(String, Parity)>,
    order: usize,
}

impl SeriesRing {
    pub fn new(params: Vec<(String, Parity)>, order: usize) -> Arc<Self> {
        Arc::new(SeriesRing { params, order })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn param_name(&self, i: usize) -> &str {
        &self.params[i].0
    }

    pub fn param_parity(&self, i: usize) -> Parity {
        self.params[i].1
    }

    pub fn params(&self) -> &[(String, Parity)] {
        &self.params
    }

    /// The same parameters at a different truncation order.
    pub fn with_order(&self, order: usize) -> Arc<SeriesRing> {
        SeriesRing::new(self.params.clone(), order)
    }

    pub fn check_same(a: &Arc<SeriesRing>, b: &Arc<SeriesRing>) -> Result<()> {
        if Arc::ptr_eq(a, b) || **a == **b {
            Ok(())
        } else {
            Err(CoreError::RingMismatch(format!(
                "incompatible series rings ({} vs {} params, order {} vs {})",
                a.param_count(),
                b.param_count(),
                a.order,
                b.order
            )))
        }
    }
}

/// A monomial in the parameters; exponents of odd parameters are 0 or 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Mono {
    degree: u32,
    exps: Vec<u16>,
}

impl Mono {
    pub fn unit(param_count: usize) -> Self {
        Mono {
            degree: 0,
            exps: vec![0; param_count],
        }
    }

    pub fn var(param_count: usize, i: usize) -> Self {
        let mut exps = vec![0; param_count];
        exps[i] = 1;
        Mono { degree: 1, exps }
    }

    pub fn from_exps(exps: Vec<u16>) -> Self {
        let degree = exps.iter().map(|&e| e as u32).sum();
        Mono { degree, exps }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn is_unit(&self) -> bool {
        self.degree == 0
    }

    fn odd_vars(&self, ring: &SeriesRing) -> Vec<usize> {
        (0..self.exps.len())
            .filter(|&i| self.exps[i] > 0 && ring.param_parity(i).is_odd())
            .collect()
    }

    pub fn parity(&self, ring: &SeriesRing) -> Parity {
        let mut p = Parity::Even;
        for i in self.odd_vars(ring) {
            let _ = i;
            p += Parity::Odd;
        }
        p
    }

    /// Multiplies monomials; None when an odd variable repeats or the
    /// truncation order is exceeded. The sign is the Koszul merge sign of
    /// the odd variable lists.
    pub fn mul(&self, other: &Mono, ring: &SeriesRing) -> Option<(Mono, Sign)> {
        if self.degree + other.degree > ring.order as u32 {
            return None;
        }
        let o1 = self.odd_vars(ring);
        let o2 = other.odd_vars(ring);
        if o1.iter().any(|i| o2.contains(i)) {
            return None;
        }
        let sign = koszul::merge_sign(&o1, &o2);
        let exps: Vec<u16> = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(&a, &b)| a + b)
            .collect();
        Some((Mono::from_exps(exps), sign))
    }

    pub fn display(&self, ring: &SeriesRing) -> String {
        if self.is_unit() {
            return "1".to_string();
        }
        let mut out = String::new();
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('*');
            }
            out.push_str(ring.param_name(i));
            if e > 1 {
                out.push_str(&format!("^{e}"));
            }
        }
        out
    }
}

/// Sparse truncated super power series with coefficients in `C`.
#[derive(Clone, PartialEq, Debug)]
pub struct SuperSeries<C: Coeff> {
    ring: Arc<SeriesRing>,
    terms: BTreeMap<Mono, C>,
}

impl<C: Coeff> SuperSeries<C> {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        SuperSeries {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: C) -> Self {
        let mut s = Self::zero(ring);
        s.add_term(Mono::unit(ring.param_count()), c);
        s
    }

    pub fn monomial(ring: &Arc<SeriesRing>, m: Mono, c: C) -> Self {
        let mut s = Self::zero(ring);
        if m.degree() <= ring.order() as u32 {
            s.add_term(m, c);
        }
        s
    }

    pub fn var_times(ring: &Arc<SeriesRing>, i: usize, c: C) -> Self {
        Self::monomial(ring, Mono::var(ring.param_count(), i), c)
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn constant_term(&self) -> Option<&C> {
        self.terms.get(&Mono::unit(self.ring.param_count()))
    }

    fn add_term(&mut self, m: Mono, c: C) {
        if c.is_zero() || m.degree() > self.ring.order() as u32 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                match e.get().add(&c) {
                    Ok(sum) => {
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                    // Coefficient addition of matching contexts cannot
                    // fail; keep the panic loud if it ever does.
                    Err(err) => panic!("coefficient addition failed: {err}"),
                }
            }
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> SuperSeries<D> {
        let mut out: SuperSeries<D> = SuperSeries {
            ring: self.ring.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            let d = f(c);
            out.add_term(m.clone(), d);
        }
        out
    }

    /// Recoefficients the series into a ring with the same parameters but
    /// a different truncation order; overflowing terms are dropped.
    pub fn rebase(&self, target: &Arc<SeriesRing>) -> Result<Self> {
        if target.params() != self.ring.params() {
            return Err(CoreError::RingMismatch(
                "rebase across different parameter lists".into(),
            ));
        }
        let mut out = SuperSeries {
            ring: target.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Drops every term of degree greater than `k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            if m.degree() <= k as u32 {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn homogeneous_part(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            if m.degree() == k as u32 {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn parity_if_homogeneous(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity(&self.ring));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Left partial derivative with respect to parameter `i`.
    pub fn derive(&self, i: usize) -> Self {
        let ring = &self.ring;
        let mut out = Self::zero(ring);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[i] = e - 1;
            let reduced = Mono::from_exps(exps);
            if ring.param_parity(i).is_odd() {
                // Walk t_i to the front of the odd part of the monomial.
                let odd = m.odd_vars(ring);
                let pos = odd.iter().position(|&v| v == i).expect("odd var present");
                let mut perm: Vec<usize> = vec![pos];
                perm.extend((0..odd.len()).filter(|&k| k != pos));
                let sign = koszul::koszul_sign(&vec![Parity::Odd; odd.len()], &perm)
                    .expect("valid permutation");
                out.add_term(reduced, c.apply_sign(sign));
            } else {
                out.add_term(reduced, c.scale(&Rat::from_int(e as i64)));
            }
        }
        out
    }

    /// Substitutes `images[i]` for parameter i. Every image must be
    /// parity-homogeneous of the parameter's parity (or zero) and must
    /// have no constant term.
    pub fn substitute(&self, images: &[SuperSeries<C>]) -> Result<Self> {
        if images.len() != self.ring.param_count() {
            return Err(CoreError::Argument(format!(
                "substitution needs {} images, got {}",
                self.ring.param_count(),
                images.len()
            )));
        }
        let target = if let Some(first) = images.first() {
            first.ring.clone()
        } else {
            self.ring.clone()
        };
        for (i, g) in images.iter().enumerate() {
            SeriesRing::check_same(&target, &g.ring)?;
            if g.constant_term().is_some() {
                return Err(CoreError::Argument(format!(
                    "substitution image for {} has a constant term",
                    self.ring.param_name(i)
                )));
            }
            if let Some(p) = g.parity_if_homogeneous() {
                if !g.is_zero() && p != self.ring.param_parity(i) {
                    return Err(CoreError::Argument(format!(
                        "substitution image for {} has parity {}, expected {}",
                        self.ring.param_name(i),
                        p,
                        self.ring.param_parity(i)
                    )));
                }
            } else {
                return Err(CoreError::Argument(format!(
                    "substitution image for {} is not parity homogeneous",
                    self.ring.param_name(i)
                )));
            }
        }
        let mut out: SuperSeries<C> = SuperSeries {
            ring: target.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            // Expand the image product in canonical variable order.
            let mut acc: Option<SuperSeries<C>> = None;
            let mut vanished = false;
            for (i, image) in images.iter().enumerate() {
                for _ in 0..m.exp(i) {
                    acc = Some(match acc {
                        None => image.clone(),
                        Some(a) => a.mul(image)?,
                    });
                    if acc.as_ref().is_some_and(|a| a.is_zero()) {
                        vanished = true;
                        break;
                    }
                }
                if vanished {
                    break;
                }
            }
            match acc {
                None => out.add_term(Mono::unit(target.param_count()), c.clone()),
                Some(prod) => {
                    for (pm, pc) in prod.terms() {
                        out.add_term(pm.clone(), c.mul(pc)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl<C: Coeff> Coeff for SuperSeries<C> {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Self) -> Result<Self> {
        SeriesRing::check_same(&self.ring, &other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        SeriesRing::check_same(&self.ring, &other.ring)?;
        let mut out = Self::zero(&self.ring);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, sign)) = m1.mul(m2, &self.ring) {
                    out.add_term(m, c1.mul(c2)?.apply_sign(sign));
                }
            }
        }
        Ok(out)
    }

    fn neg(&self) -> Self {
        SuperSeries {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(&self.ring);
        }
        SuperSeries {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.scale(r)))
                .collect(),
        }
    }

    fn apply_sign(&self, s: Sign) -> Self {
        if s.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn koszul_flip(&self, p: Parity) -> Self {
        if !p.is_odd() {
            return self.clone();
        }
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let sign = Sign::swap(m.parity(&self.ring), p);
            out.add_term(m.clone(), c.apply_sign(sign));
        }
        out
    }

    fn split_parity(&self) -> (Self, Self) {
        let mut even = Self::zero(&self.ring);
        let mut odd = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            if m.parity(&self.ring).is_odd() {
                odd.add_term(m.clone(), c.clone());
            } else {
                even.add_term(m.clone(), c.clone());
            }
        }
        (even, odd)
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for SuperSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_unit() {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})*{}", m.display(&self.ring))?;
            }
        }
        Ok(())
    }
}

/// Formal inverse of a coordinate map with invertible linear part.
///
/// `f` has one component per parameter, component i of the parity of
/// parameter i and without constant term. Returns g with f(g) = g(f) = id
/// modulo the truncation order.
pub fn invert_map(f: &[SuperSeries<Rat>]) -> Result<Vec<SuperSeries<Rat>>> {
    let n = f.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let ring = f[0].ring().clone();
    if ring.param_count() != n {
        return Err(CoreError::Argument(format!(
            "map has {} components for {} parameters",
            n,
            ring.param_count()
        )));
    }
    for (i, fi) in f.iter().enumerate() {
        SeriesRing::check_same(&ring, fi.ring())?;
        if fi.constant_term().is_some() {
            return Err(CoreError::Argument(format!(
                "component {} has a constant term",
                ring.param_name(i)
            )));
        }
        match fi.parity_if_homogeneous() {
            Some(p) if p == ring.param_parity(i) => {}
            _ if fi.is_zero() => {}
            _ => {
                return Err(CoreError::Argument(format!(
                    "component {} does not match the parity of its coordinate",
                    ring.param_name(i)
                )))
            }
        }
    }

    // Linear part as a matrix; its exact inverse drives the iteration.
    let mut lin = linalg::zeros(n, n);
    for (i, fi) in f.iter().enumerate() {
        for (m, c) in fi.terms() {
            if m.degree() == 1 {
                let j = (0..n).find(|&j| m.exp(j) == 1).expect("degree one");
                lin[i][j] = c.clone();
            }
        }
    }
    let lin_inv = linalg::invert(&lin).ok_or_else(|| {
        let ker = linalg::kernel_basis(&lin, n);
        let mut names = Vec::new();
        for v in ker {
            let desc: Vec<String> = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| format!("{}*{}", c, ring.param_name(j)))
                .collect();
            names.push(desc.join(" + "));
        }
        CoreError::SingularLinearPart(names)
    })?;

    // g <- g - lin_inv * (f(g) - id); one extra order per pass.
    let id: Vec<SuperSeries<Rat>> = (0..n)
        .map(|i| SuperSeries::var_times(&ring, i, Rat::one()))
        .collect();
    let mut g: Vec<SuperSeries<Rat>> = lin_inv
        .iter()
        .map(|row| {
            let mut s = SuperSeries::zero(&ring);
            for (j, coeff) in row.iter().enumerate() {
                if !coeff.is_zero() {
                    s = s
                        .add(&SuperSeries::var_times(&ring, j, coeff.clone()))
                        .expect("same ring");
                }
            }
            s
        })
        .collect();
    for _ in 0..ring.order() {
        let mut err: Vec<SuperSeries<Rat>> = Vec::with_capacity(n);
        for (fi, idi) in f.iter().zip(&id) {
            err.push(fi.substitute(&g)?.sub(idi)?);
        }
        if err.iter().all(|e| e.is_zero()) {
            break;
        }
        for (gi, inv_row) in g.iter_mut().zip(&lin_inv) {
            let mut corr = SuperSeries::zero(&ring);
            for (ej, coeff) in err.iter().zip(inv_row) {
                if !coeff.is_zero() {
                    corr = corr.add(&ej.scale(coeff))?;
                }
            }
            *gi = gi.sub(&corr)?;
        }
    }
    // Verify both compositions exactly.
    for (i, fi) in f.iter().enumerate() {
        if fi.substitute(&g)?.sub(&id[i])?.is_zero() && g[i].substitute(f)?.sub(&id[i])?.is_zero() {
            continue;
        }
        return Err(CoreError::Structural(format!(
            "inversion failed to converge in component {}",
            ring.param_name(i)
        )));
    }
    Ok(g)
}
