//! Cohomology of a square-zero operator, with explicit splitting data.
//!
//! For d with d^2 = 0 the construction picks, block by bidegree block,
//! a complement C of ker d (the pivot columns of d, first-nonzero order),
//! harmonic representatives H completing im d inside ker d, and the
//! homotopy h with  d h + h d = id - projection. All choices are
//! deterministic functions of the basis order.

use crate::coeff::Coeff;
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::{Bidegree, GradedBasis};
use crate::linalg::{self, Matrix, Subspace};
use crate::linop::LinearOp;
use crate::rat::Rat;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct CohomologyData {
    op: LinearOp,
    reps: Vec<GradedElement<Rat>>,
    projection: LinearOp,
    homotopy: LinearOp,
    // rref machinery for expressing harmonic vectors in rep coordinates
    rep_matrix: Matrix, // columns = reps, rows = ambient
}

impl CohomologyData {
    pub fn op(&self) -> &LinearOp {
        &self.op
    }

    pub fn reps(&self) -> &[GradedElement<Rat>] {
        &self.reps
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn projection(&self) -> &LinearOp {
        &self.projection
    }

    pub fn homotopy(&self) -> &LinearOp {
        &self.homotopy
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        self.op.basis()
    }

    /// Harmonic projection of an element.
    pub fn project<C: Coeff>(&self, x: &GradedElement<C>) -> Result<GradedElement<C>> {
        self.projection.apply(x)
    }

    /// Coordinates of a vector lying in the harmonic subspace.
    pub fn harmonic_coords(&self, x: &GradedElement<Rat>) -> Result<Vec<Rat>> {
        let v = x.to_vec();
        linalg::solve(&self.rep_matrix, &v).ok_or_else(|| {
            CoreError::Structural("vector does not lie in the harmonic subspace".into())
        })
    }

    /// Cohomology dimension per bidegree.
    pub fn dims_by_bidegree(&self) -> BTreeMap<Bidegree, usize> {
        let mut out = BTreeMap::new();
        for rep in &self.reps {
            let deg = rep
                .bidegree_if_homogeneous()
                .expect("representatives are homogeneous");
            *out.entry(deg).or_insert(0) += 1;
        }
        out
    }

    /// Cohomology dimension per q-degree (for singly graded complexes
    /// stored with p = 0).
    pub fn dims_by_q(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (deg, n) in self.dims_by_bidegree() {
            *out.entry(deg.q).or_insert(0) += n;
        }
        out
    }
}

/// Splitting of a square-zero operator. Errors when op^2 != 0.
pub fn cohomology(op: &LinearOp) -> Result<CohomologyData> {
    let square = op.compose(op)?;
    if !square.is_zero() {
        return Err(CoreError::Precondition(
            "operator does not square to zero".into(),
        ));
    }
    let basis = op.basis().clone();
    let n = basis.dim();
    let shift = op.shift();
    let blocks = basis.blocks();

    // Per block: pivot columns (a complement of the kernel) and their
    // images, and the kernel basis.
    let mut pivot_cols: BTreeMap<Bidegree, Vec<usize>> = BTreeMap::new();
    let mut images: BTreeMap<Bidegree, Vec<Vec<Rat>>> = BTreeMap::new(); // keyed by target block
    let mut kernels: BTreeMap<Bidegree, Vec<Vec<Rat>>> = BTreeMap::new(); // ambient coords

    for (&deg, idxs) in &blocks {
        let target = deg + shift;
        let target_idxs: &[usize] = blocks.get(&target).map(|v| v.as_slice()).unwrap_or(&[]);
        // Submatrix rows = target block, cols = this block.
        let mut m = linalg::zeros(target_idxs.len(), idxs.len());
        for (cj, &col) in idxs.iter().enumerate() {
            for (ri, &row) in target_idxs.iter().enumerate() {
                m[ri][cj] = op.entry(row, col);
            }
        }
        let mut red = m.clone();
        let pivots = linalg::rref(&mut red);
        let chosen: Vec<usize> = pivots.iter().map(|&c| idxs[c]).collect();
        for &col in &chosen {
            let mut img = vec![Rat::zero(); n];
            for (row, c, v) in op.entries() {
                if c == col {
                    img[row] = v.clone();
                }
            }
            images.entry(target).or_default().push(img);
        }
        let ker = linalg::kernel_basis(&m, idxs.len());
        let ambient_ker: Vec<Vec<Rat>> = ker
            .iter()
            .map(|k| {
                let mut v = vec![Rat::zero(); n];
                for (cj, &col) in idxs.iter().enumerate() {
                    v[col] = k[cj].clone();
                }
                v
            })
            .collect();
        pivot_cols.insert(deg, chosen);
        kernels.insert(deg, ambient_ker);
    }

    // Assemble the change of basis P = [images | pivots | harmonic] block
    // by block, together with the images S (for h) and T (for the
    // projection).
    let mut p_cols: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut h_cols: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut proj_cols: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut reps: Vec<GradedElement<Rat>> = Vec::new();

    for &deg in blocks.keys() {
        let img = images.get(&deg).cloned().unwrap_or_default();
        let img_space = Subspace::from_vectors(n, &img);
        // Preimages: pivot columns of the source block, in order.
        let source = deg - shift;
        let sources = pivot_cols.get(&source).cloned().unwrap_or_default();
        debug_assert_eq!(img.len(), sources.len());
        for (v, &src) in img.iter().zip(&sources) {
            p_cols.push(v.clone());
            let mut e = vec![Rat::zero(); n];
            e[src] = Rat::one();
            h_cols.push(e);
            proj_cols.push(vec![Rat::zero(); n]);
        }
        for &col in pivot_cols.get(&deg).map(|v| v.as_slice()).unwrap_or(&[]) {
            let mut e = vec![Rat::zero(); n];
            e[col] = Rat::one();
            p_cols.push(e);
            h_cols.push(vec![Rat::zero(); n]);
            proj_cols.push(vec![Rat::zero(); n]);
        }
        let ker = kernels.get(&deg).cloned().unwrap_or_default();
        let harmonic = img_space.extend_by(&ker);
        for v in harmonic {
            p_cols.push(v.clone());
            h_cols.push(vec![Rat::zero(); n]);
            proj_cols.push(v.clone());
            reps.push(GradedElement::from_vec(&basis, &v));
        }
    }

    if p_cols.len() != n {
        return Err(CoreError::Structural(format!(
            "splitting produced {} directions for dimension {}",
            p_cols.len(),
            n
        )));
    }
    // Blockwise assembly lists representatives in bidegree order; present
    // them in basis order instead so parameter indices follow the basis.
    reps.sort_by_key(|r| (r.support().first().copied().unwrap_or(0), r.to_vec()));
    // P as a matrix: columns are the assembled vectors.
    let mut p = linalg::zeros(n, n);
    for (j, col) in p_cols.iter().enumerate() {
        for i in 0..n {
            p[i][j] = col[i].clone();
        }
    }
    let p_inv = linalg::invert(&p)
        .ok_or_else(|| CoreError::Structural("splitting basis is singular".into()))?;

    let build = |cols: &[Vec<Rat>]| -> Matrix {
        let mut s = linalg::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                s[i][j] = col[i].clone();
            }
        }
        linalg::mat_mul(&s, &p_inv)
    };
    let h_dense = build(&h_cols);
    let proj_dense = build(&proj_cols);

    let mut h_entries = Vec::new();
    let mut proj_entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !h_dense[i][j].is_zero() {
                h_entries.push((i, j, h_dense[i][j].clone()));
            }
            if !proj_dense[i][j].is_zero() {
                proj_entries.push((i, j, proj_dense[i][j].clone()));
            }
        }
    }
    let homotopy = LinearOp::from_entries(&basis, -shift, h_entries)?;
    let projection = LinearOp::from_entries(&basis, Bidegree::zero(), proj_entries)?;

    // d h + h d = id - projection must hold on the nose.
    let dh = op.compose(&homotopy)?;
    let hd = homotopy.compose(op)?;
    let lhs = dh.add(&hd)?;
    let rhs = LinearOp::identity(&basis).sub(&projection)?;
    if lhs != rhs {
        return Err(CoreError::Structural(
            "homotopy identity failed; splitting is inconsistent".into(),
        ));
    }
    let pp = projection.compose(&projection)?;
    if pp != projection {
        return Err(CoreError::Structural("projection is not idempotent".into()));
    }
    for rep in &reps {
        if !op.apply(rep)?.is_zero() {
            return Err(CoreError::Structural("representative is not closed".into()));
        }
    }

    let mut rep_matrix = linalg::zeros(n, reps.len());
    for (j, rep) in reps.iter().enumerate() {
        for (i, c) in rep.components() {
            rep_matrix[i][j] = c.clone();
        }
    }

    Ok(CohomologyData {
        op: op.clone(),
        reps,
        projection,
        homotopy,
        rep_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_basis() -> Arc<GradedBasis> {
        GradedBasis::new(
            "c",
            vec![
                ("a".into(), Bidegree::new(0, 0)),
                ("b".into(), Bidegree::new(0, 1)),
                ("c".into(), Bidegree::new(0, 2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_operator_has_full_cohomology() {
        let b = simple_basis();
        let d = LinearOp::zero(&b, Bidegree::new(0, 1));
        let h = cohomology(&d).unwrap();
        assert_eq!(h.dim(), 3);
        assert!(h.homotopy().is_zero());
        assert_eq!(h.projection(), &LinearOp::identity(&b));
    }

    #[test]
    fn acyclic_two_term_complex() {
        let b = GradedBasis::new(
            "c",
            vec![
                ("a".into(), Bidegree::new(0, 0)),
                ("b".into(), Bidegree::new(0, 1)),
            ],
        )
        .unwrap();
        let d = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(1, 0, Rat::from_int(2))])
            .unwrap();
        let h = cohomology(&d).unwrap();
        assert_eq!(h.dim(), 0);
        // h then must invert d on its image: h(b) = a/2.
        assert_eq!(h.homotopy().entry(0, 1), Rat::new(1, 2));
    }

    #[test]
    fn middle_kernel_representative() {
        // a -d-> b -0-> c with d(a) = b: H = <c>.
        let b = simple_basis();
        let d = LinearOp::from_entries(&b, Bidegree::new(0, 1), vec![(1, 0, Rat::one())]).unwrap();
        let h = cohomology(&d).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.reps()[0], GradedElement::single(&b, 2, Rat::one()));
    }

    #[test]
    fn non_square_zero_rejected() {
        let b = GradedBasis::new(
            "c",
            vec![
                ("a".into(), Bidegree::new(0, 0)),
                ("b".into(), Bidegree::new(0, 1)),
                ("c".into(), Bidegree::new(0, 2)),
            ],
        )
        .unwrap();
        let d = LinearOp::from_entries(
            &b,
            Bidegree::new(0, 1),
            vec![(1, 0, Rat::one()), (2, 1, Rat::one())],
        )
        .unwrap();
        assert!(matches!(cohomology(&d), Err(CoreError::Precondition(_))));
    }
}
