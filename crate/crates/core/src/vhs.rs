//! Semi-infinite variation of Hodge structure: the rescaling weights, the
//! decreasing filtration from the bigrading, a chosen increasing
//! complement, the induced splitting of the hbar-Laurent space, and the
//! period map anchored at the calibration class.

// Tensor components are addressed by named indices throughout.
#![allow(clippy::needless_range_loop)]

use crate::coeff::Coeff;
use crate::deformation::{lift_series_element, transport_pos, HbarSeriesElement, MCSolution};
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::hbar::{HbarLaurent, HbarWindow, NuShift};
use crate::linalg::{self, Matrix, Subspace};
use crate::pair::DeformationPair;
use crate::rat::Rat;
use crate::series::{invert_map, SuperSeries};
use std::collections::BTreeMap;

/// Harmonic representatives of the module cohomology. With a vanishing
/// module differential every basis vector is harmonic; otherwise the
/// joint kernel of the differential's nu-components is completed against
/// the image of their product, which is exact under the subspace
/// coincidence criterion.
pub fn harmonic_reps(pair: &DeformationPair) -> Result<Vec<GradedElement<Rat>>> {
    let dim = pair.m_basis.dim();
    if pair.d_m.is_zero() {
        return Ok((0..dim)
            .map(|i| GradedElement::single(&pair.m_basis, i, Rat::one()))
            .collect());
    }
    let parts = pair.d_m.parts();
    let mut joint = Subspace::full(dim);
    for (_, op) in parts {
        let ker = Subspace::from_vectors(dim, &linalg::kernel_basis(&op.to_dense(), dim));
        joint = joint.intersect(&ker);
    }
    // Image of the composite of the two components, when both exist.
    let mut image = Subspace::zero(dim);
    if parts.len() == 2 {
        let comp = parts[0].1.compose(&parts[1].1)?;
        let dense = comp.to_dense();
        let cols: Vec<Vec<Rat>> = (0..dim)
            .map(|j| (0..dim).map(|i| dense[i][j].clone()).collect())
            .collect();
        image = Subspace::from_vectors(dim, &cols);
    }
    let reps = image.extend_by(joint.basis());
    let elems: Vec<GradedElement<Rat>> = reps
        .iter()
        .map(|v| GradedElement::from_vec(&pair.m_basis, v))
        .collect();
    for e in &elems {
        if e.bidegree_if_homogeneous().is_none() {
            return Err(CoreError::Structural(
                "harmonic representative is not bidegree homogeneous".into(),
            ));
        }
    }
    Ok(elems)
}

/// The decreasing filtration cut out by the bigrading: level 2r holds the
/// classes with p - q >= 2r, inside the parity sector of 2r.
#[derive(Clone, Debug)]
pub struct HodgeFiltration {
    /// class index -> twice its level (p - q).
    pub two_r: Vec<i32>,
}

impl HodgeFiltration {
    pub fn from_classes(pair: &DeformationPair, classes: &[GradedElement<Rat>]) -> Result<Self> {
        let mut two_r = Vec::with_capacity(classes.len());
        for c in classes {
            let deg = c
                .bidegree_if_homogeneous()
                .ok_or_else(|| CoreError::Structural("class is not bidegree homogeneous".into()))?;
            let _ = pair;
            two_r.push(deg.p - deg.q);
        }
        Ok(HodgeFiltration { two_r })
    }

    /// Indices in the filtration level >= r (2r given), within the parity
    /// sector of 2r.
    pub fn level_indices(&self, two_r: i32) -> Vec<usize> {
        self.two_r
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= two_r && (v - two_r).rem_euclid(2) == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sector_indices(&self, two_r: i32) -> Vec<usize> {
        self.two_r
            .iter()
            .enumerate()
            .filter(|(_, &v)| (v - two_r).rem_euclid(2) == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn range(&self) -> (i32, i32) {
        let min = self.two_r.iter().copied().min().unwrap_or(0);
        let max = self.two_r.iter().copied().max().unwrap_or(0);
        (min, max)
    }
}

/// An increasing filtration given by spanning vectors per level, in the
/// coordinates of the harmonic classes.
#[derive(Clone, Debug)]
pub struct WSpec {
    /// 2r -> spanning vectors.
    pub levels: BTreeMap<i32, Vec<Vec<Rat>>>,
}

impl WSpec {
    /// The bigrading-opposite choice: level 2r spans the classes with
    /// p - q < 2r in the matching sector.
    pub fn opposite(hodge: &HodgeFiltration) -> WSpec {
        let (min, max) = hodge.range();
        let h = hodge.two_r.len();
        let mut levels = BTreeMap::new();
        for two_r in (min - 1)..=(max + 2) {
            let vecs: Vec<Vec<Rat>> = hodge
                .two_r
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < two_r && (two_r - v).rem_euclid(2) == 0)
                .map(|(i, _)| {
                    let mut v = vec![Rat::zero(); h];
                    v[i] = Rat::one();
                    v
                })
                .collect();
            levels.insert(two_r, vecs);
        }
        WSpec { levels }
    }

    pub fn space_at(&self, h: usize, two_r: i32) -> Subspace {
        // Increasing union over the same parity sector.
        let mut vectors = Vec::new();
        for (&lvl, vecs) in &self.levels {
            if lvl <= two_r && (two_r - lvl).rem_euclid(2) == 0 {
                vectors.extend(vecs.iter().cloned());
            }
        }
        Subspace::from_vectors(h, &vectors)
    }
}

/// Validated opposite filtration together with the per-weight splitting
/// machinery.
#[derive(Clone, Debug)]
pub struct SplitFiltrations {
    pub hodge: HodgeFiltration,
    pub w: WSpec,
    pub weight: usize, // n
    h: usize,
    /// 2r -> (projector onto the decreasing part along W, basis of
    /// W-graded complements at this level).
    projectors: BTreeMap<i32, Matrix>,
    graded_w: BTreeMap<i32, Vec<Vec<Rat>>>,
    pub isotropic: bool,
}

impl SplitFiltrations {
    /// The projection onto the decreasing filtration along W at nu-weight
    /// w, i.e. at level 2r = n - w.
    pub fn project_decreasing(&self, nu_weight: i32) -> Option<&Matrix> {
        self.projectors.get(&(self.weight as i32 - nu_weight))
    }

    pub fn graded_frame(&self) -> Vec<(i32, Vec<Rat>)> {
        let mut out = Vec::new();
        for (&two_r, vecs) in &self.graded_w {
            for v in vecs {
                out.push((two_r, v.clone()));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.h
    }
}

/// Builds and validates the filtration pair: complementarity at every
/// level (the failing level is named), monotonicity of W, and isotropy
/// against the module pairing restricted to the classes.
pub fn build_filtrations(
    pair: &DeformationPair,
    classes: &[GradedElement<Rat>],
    w: WSpec,
) -> Result<SplitFiltrations> {
    let hodge = HodgeFiltration::from_classes(pair, classes)?;
    let h = classes.len();
    let (min, max) = hodge.range();

    // Class-level pairing matrix.
    let mut class_pairing = linalg::zeros(h, h);
    for i in 0..h {
        for j in 0..h {
            class_pairing[i][j] = pair.pair_rat(&classes[i], &classes[j])?;
        }
    }

    let mut projectors = BTreeMap::new();
    let mut graded_w = BTreeMap::new();
    for two_r in (min - 2)..=(max + 2) {
        let f_idx = hodge.level_indices(two_r);
        let sector = hodge.sector_indices(two_r);
        let w_space = w.space_at(h, two_r);
        let f_vectors: Vec<Vec<Rat>> = f_idx
            .iter()
            .map(|&i| {
                let mut v = vec![Rat::zero(); h];
                v[i] = Rat::one();
                v
            })
            .collect();
        let f_space = Subspace::from_vectors(h, &f_vectors);
        if f_space.dim() + w_space.dim() != sector.len() || f_space.intersect(&w_space).dim() != 0 {
            return Err(CoreError::Validation(format!(
                "complement check fails at level 2r = {two_r}: dim F = {}, dim W = {}, sector = {}",
                f_space.dim(),
                w_space.dim(),
                sector.len()
            )));
        }
        // Monotonicity within the sector.
        let prev = w.space_at(h, two_r - 2);
        if !w_space.contains_space(&prev) {
            return Err(CoreError::Validation(format!(
                "W is not increasing at level 2r = {two_r}"
            )));
        }
        // Projector onto F along W at this level: solve [F W] c = v.
        let mut columns: Vec<Vec<Rat>> = f_vectors.clone();
        columns.extend(w_space.basis().iter().cloned());
        let mut mat = linalg::zeros(h, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in 0..h {
                mat[i][j] = col[i].clone();
            }
        }
        let mut proj = linalg::zeros(h, h);
        for &cls in sector.iter() {
            let mut rhs = vec![Rat::zero(); h];
            rhs[cls] = Rat::one();
            let sol = linalg::solve(&mat, &rhs).ok_or_else(|| {
                CoreError::Validation(format!("splitting solve failed at level 2r = {two_r}"))
            })?;
            // The F-part of the class vector.
            let mut fpart = vec![Rat::zero(); h];
            for (k, fv) in f_vectors.iter().enumerate() {
                if !sol[k].is_zero() {
                    for i in 0..h {
                        fpart[i] += &(&sol[k] * &fv[i]);
                    }
                }
            }
            for (i, value) in fpart.into_iter().enumerate() {
                proj[i][cls] = value;
            }
        }
        projectors.insert(two_r, proj);
        // W-graded complement at this level.
        let complement = prev.extend_by(w_space.basis());
        graded_w.insert(two_r, complement);
    }

    // Isotropy: (W_{<= r}, W_{<= -r+1}) = 0.
    let mut isotropic = true;
    'iso: for two_r in (min - 2)..=(max + 2) {
        let a = w.space_at(h, two_r);
        let b = w.space_at(h, 2 - two_r);
        for va in a.basis() {
            for vb in b.basis() {
                let mut acc = Rat::zero();
                for i in 0..h {
                    if va[i].is_zero() {
                        continue;
                    }
                    for j in 0..h {
                        if !vb[j].is_zero() && !class_pairing[i][j].is_zero() {
                            acc += &(&(&va[i] * &vb[j]) * &class_pairing[i][j]);
                        }
                    }
                }
                if !acc.is_zero() {
                    isotropic = false;
                    break 'iso;
                }
            }
        }
    }

    Ok(SplitFiltrations {
        hodge,
        w,
        weight: pair.weight,
        h,
        projectors,
        graded_w,
        isotropic,
    })
}

/// Applies the rescaling: basis vector of bidegree (p, q) is multiplied
/// by nu^{n + q - p}.
pub fn apply_lhbar(pair: &DeformationPair, x: &HbarSeriesElement) -> Result<HbarSeriesElement> {
    let mut out = GradedElement::zero(x.basis());
    for (i, c) in x.components() {
        out.add_component(i, c.nu_shift(pair.lhbar_weight(i))?);
    }
    Ok(out)
}

/// The period map data: the series anchored at the calibration class,
/// the filtration splitting that produced it, and the transported frame.
#[derive(Clone, Debug)]
pub struct PeriodMap {
    pub pair: DeformationPair,
    pub sol: MCSolution,
    pub window: HbarWindow,
    pub classes: Vec<GradedElement<Rat>>,
    pub filtrations: SplitFiltrations,
    /// Psi in harmonic-class coordinates: class index -> hbar series.
    pub psi: Vec<SuperSeries<HbarLaurent>>,
}

/// Coordinates of a module element in the harmonic classes; errors when
/// the element leaves their span.
pub struct ClassCoords {
    class_matrix: Matrix,
    dim: usize,
    h: usize,
}

impl ClassCoords {
    pub fn new(m_dim: usize, classes: &[GradedElement<Rat>]) -> Self {
        let mut class_matrix = linalg::zeros(m_dim, classes.len());
        for (j, c) in classes.iter().enumerate() {
            for (i, v) in c.components() {
                class_matrix[i][j] = v.clone();
            }
        }
        ClassCoords {
            class_matrix,
            dim: m_dim,
            h: classes.len(),
        }
    }

    /// Expresses an hbar-series element in class coordinates.
    pub fn coords(&self, x: &HbarSeriesElement) -> Result<Vec<SuperSeries<HbarLaurent>>> {
        // Collect all (monomial, power) slots and solve column by column.
        let ring = x.components().next().map(|(_, c)| c.ring().clone());
        let Some(ring) = ring else {
            return Err(CoreError::Structural(
                "cannot infer ring of zero element".into(),
            ));
        };
        let mut slots: BTreeMap<(crate::series::Mono, i32), Vec<Rat>> = BTreeMap::new();
        for (i, c) in x.components() {
            for (m, laur) in c.terms() {
                for (w, r) in laur.terms() {
                    let v = slots
                        .entry((m.clone(), w))
                        .or_insert_with(|| vec![Rat::zero(); self.dim]);
                    v[i] = r.clone();
                }
            }
        }
        let mut out: Vec<SuperSeries<HbarLaurent>> = Vec::new();
        let sample_window = x
            .components()
            .flat_map(|(_, c)| c.terms().map(|(_, l)| l.window()))
            .next()
            .unwrap_or(HbarWindow::new(-1, 1));
        for _ in 0..self.h {
            out.push(SuperSeries::zero(&ring));
        }
        for ((m, w), v) in slots {
            let sol = linalg::solve(&self.class_matrix, &v).ok_or_else(|| {
                CoreError::Structural("element leaves the span of the harmonic classes".into())
            })?;
            // Verify exactness (solve() zeroes free variables).
            let back = linalg::mat_vec(&self.class_matrix, &sol);
            if back != v {
                return Err(CoreError::Structural(
                    "element leaves the span of the harmonic classes".into(),
                ));
            }
            for (c, value) in sol.into_iter().enumerate() {
                if value.is_zero() {
                    continue;
                }
                let laur = HbarLaurent::nu_pow(sample_window, w, value)?;
                out[c] = out[c].add(&SuperSeries::monomial(&ring, m.clone(), laur))?;
            }
        }
        Ok(out)
    }
}

/// Solves for the unique series through the calibration class: at every
/// parameter order the decreasing-filtration component of the defect is
/// cancelled by transported generators, leaving the rest in the
/// increasing filtration.
pub fn period_map(
    pair: &DeformationPair,
    sol: &MCSolution,
    filtrations: &SplitFiltrations,
    classes: &[GradedElement<Rat>],
    window: HbarWindow,
) -> Result<PeriodMap> {
    let n = pair.weight as i32;
    let order = sol.order;
    let gamma = lift_series_element(&sol.gamma, window);
    let coords = ClassCoords::new(pair.m_basis.dim(), classes);

    // Transported, rescaled generators, one per class.
    let mut generators: Vec<Vec<SuperSeries<HbarLaurent>>> = Vec::new();
    for class in classes {
        let lifted = crate::deformation::lift_to_series(class, &sol.ring).map_coeffs(|s| {
            s.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window has 0"))
        });
        let transported = transport_pos(&pair.circ, &gamma, &lifted)?;
        let rescaled = apply_lhbar(pair, &transported)?;
        generators.push(coords.coords(&rescaled)?);
    }

    // eta in class coordinates.
    let eta_coords = {
        let lifted = crate::deformation::lift_to_series(&pair.eta, &sol.ring).map_coeffs(|s| {
            s.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window has 0"))
        });
        coords.coords(&apply_lhbar(pair, &lifted)?)?
    };
    // The calibration class must be its own rescaling (weight zero).
    {
        let direct = coords.coords(
            &crate::deformation::lift_to_series(&pair.eta, &sol.ring).map_coeffs(|s| {
                s.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window has 0"))
            }),
        )?;
        if direct != eta_coords {
            return Err(CoreError::Config(
                "calibration class does not have rescaling weight zero".into(),
            ));
        }
    }

    // Start from the transported calibration class and remove, order by
    // order, the part of the defect that sticks out of the increasing
    // filtration.
    let eta_gen_idx = {
        // eta as a combination of classes at order zero.
        let mut idx = None;
        for (c, s) in eta_coords.iter().enumerate() {
            if !s.is_zero() {
                if idx.is_some() {
                    idx = None;
                    break;
                }
                idx = Some(c);
            }
        }
        idx
    };
    let mut psi: Vec<SuperSeries<HbarLaurent>> = match eta_gen_idx {
        Some(c) => {
            let scale = eta_coords[c]
                .constant_term()
                .expect("eta has a constant coordinate")
                .clone();
            generators[c]
                .iter()
                .map(|s| {
                    let unit = SuperSeries::constant(&sol.ring, scale.clone());
                    s.mul(&unit).expect("same ring")
                })
                .collect()
        }
        None => {
            return Err(CoreError::Config(
                "calibration class is not a single harmonic class".into(),
            ))
        }
    };

    let wt: Vec<i32> = (0..filtrations.dim())
        .map(|c| {
            let deg = classes[c]
                .bidegree_if_homogeneous()
                .expect("classes are homogeneous");
            n + deg.q - deg.p
        })
        .collect();

    for ord in 1..=order {
        // Defect at this order: project each nu-weight onto the
        // decreasing filtration along W.
        let mut corrections: Vec<(usize, i32, SuperSeries<Rat>, Rat)> = Vec::new();
        // (class, weight, monomial series, coefficient) assembled below.
        let mut defect_slots: BTreeMap<i32, Vec<SuperSeries<Rat>>> = BTreeMap::new();
        for (c, s) in psi.iter().enumerate() {
            let part = s.homogeneous_part(ord);
            for (m, laur) in part.terms() {
                for (w, r) in laur.terms() {
                    let entry = defect_slots
                        .entry(w)
                        .or_insert_with(|| vec![SuperSeries::zero(&sol.ring); psi.len()]);
                    entry[c] =
                        entry[c].add(&SuperSeries::monomial(&sol.ring, m.clone(), r.clone()))?;
                }
            }
        }
        for (w, slot) in defect_slots {
            let Some(proj) = filtrations.project_decreasing(w) else {
                continue;
            };
            // proj * slot picks the part to cancel.
            let h = filtrations.dim();
            for target in 0..h {
                let mut acc = SuperSeries::zero(&sol.ring);
                for c in 0..h {
                    if proj[target][c].is_zero() {
                        continue;
                    }
                    acc = acc.add(&slot[c].scale(&proj[target][c]))?;
                }
                if acc.is_zero() {
                    continue;
                }
                // Cancel with the generator anchored at (target, w):
                // requires w = wt[target] + 2k with k >= 0.
                let k2 = w - wt[target];
                if k2 < 0 || k2.rem_euclid(2) != 0 {
                    return Err(CoreError::Structural(format!(
                        "defect at weight {w} needs class {target} below its own weight {}",
                        wt[target]
                    )));
                }
                corrections.push((target, k2, acc, Rat::one()));
            }
        }
        for (target, k2, series, _) in corrections {
            // psi -= series * nu^{k2} * generator[target].
            for (c, g) in generators[target].iter().enumerate() {
                let shifted = g.nu_shift(k2)?;
                let scaled = lift_series(&series, window).mul(&shifted)?;
                psi[c] = psi[c].sub(&scaled)?;
            }
        }
    }

    // Exact coefficient-level assertions: Psi(0) = eta, and the defect
    // Psi - eta lies in the increasing filtration at every monomial and
    // weight.
    for (c, s) in psi.iter().enumerate() {
        let diff = s.sub(&eta_coords[c])?;
        if let Some(constant) = diff.constant_term() {
            if !constant.is_zero() {
                return Err(CoreError::Structural(
                    "period map does not restrict to the calibration class".into(),
                ));
            }
        }
    }
    verify_in_w(&psi, &eta_coords, filtrations)?;

    Ok(PeriodMap {
        pair: pair.clone(),
        sol: sol.clone(),
        window,
        classes: classes.to_vec(),
        filtrations: filtrations.clone(),
        psi,
    })
}

fn lift_series(s: &SuperSeries<Rat>, window: HbarWindow) -> SuperSeries<HbarLaurent> {
    s.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window has 0"))
}

fn verify_in_w(
    psi: &[SuperSeries<HbarLaurent>],
    eta: &[SuperSeries<HbarLaurent>],
    filtrations: &SplitFiltrations,
) -> Result<()> {
    let h = filtrations.dim();
    let mut slots: BTreeMap<(crate::series::Mono, i32), Vec<Rat>> = BTreeMap::new();
    for (c, s) in psi.iter().enumerate() {
        let diff = s.sub(&eta[c])?;
        for (m, laur) in diff.terms() {
            for (w, r) in laur.terms() {
                let v = slots
                    .entry((m.clone(), w))
                    .or_insert_with(|| vec![Rat::zero(); h]);
                v[c] = r.clone();
            }
        }
    }
    for ((m, w), v) in slots {
        let Some(proj) = filtrations.project_decreasing(w) else {
            continue;
        };
        let projected = linalg::mat_vec(proj, &v);
        if projected.iter().any(|x| !x.is_zero()) {
            return Err(CoreError::Structural(format!(
                "period defect leaks out of the increasing filtration at weight {w}, monomial degree {}",
                m.degree()
            )));
        }
    }
    Ok(())
}

/// Flat coordinates: the graded reduction of Psi - eta, its invertible
/// linear part, and the induced substitution t -> t_W.
#[derive(Clone, Debug)]
pub struct FlatCoordinates {
    /// tau[a] = a-th coordinate of the reduced period map, a series in t
    /// with linear part = t_a.
    pub tau: Vec<SuperSeries<Rat>>,
    /// The inverse substitution: t_a as a series in the flat coordinates.
    pub inverse: Vec<SuperSeries<Rat>>,
}

pub fn flat_coordinates(pm: &PeriodMap) -> Result<FlatCoordinates> {
    let h = pm.filtrations.dim();
    let n = pm.pair.weight as i32;
    // Graded reduction: for the graded frame vector at level 2r, read the
    // coefficient of Psi - eta at nu-weight n - 2r in that frame.
    let frame = pm.filtrations.graded_frame();
    if frame.len() != h {
        return Err(CoreError::Structural(
            "graded frame dimension mismatch".into(),
        ));
    }
    // Frame matrix per level: solve for coordinates of the defect vector
    // in [W_{<= r-1} basis | graded frame at r]; keep the graded part.
    let mut reduced: Vec<SuperSeries<Rat>> = vec![SuperSeries::zero(&pm.sol.ring); h];

    // Collect defect slots per (monomial, weight).
    let eta_zero: Vec<SuperSeries<HbarLaurent>> = {
        // eta's class coordinates are the order-zero part of psi.
        pm.psi
            .iter()
            .map(|s| {
                let mut c = SuperSeries::zero(&pm.sol.ring);
                if let Some(v) = s.constant_term() {
                    c = SuperSeries::constant(&pm.sol.ring, v.clone());
                }
                c
            })
            .collect()
    };
    let mut slots: BTreeMap<(crate::series::Mono, i32), Vec<Rat>> = BTreeMap::new();
    for (c, s) in pm.psi.iter().enumerate() {
        let diff = s.sub(&eta_zero[c])?;
        for (m, laur) in diff.terms() {
            for (w, r) in laur.terms() {
                let v = slots
                    .entry((m.clone(), w))
                    .or_insert_with(|| vec![Rat::zero(); h]);
                v[c] = r.clone();
            }
        }
    }
    for ((m, w), v) in &slots {
        let two_r = n - w;
        // Solve v = W_{<= r-1} part + graded part; keep graded coords.
        let prev = pm.filtrations.w.space_at(h, two_r - 2);
        let graded: Vec<(usize, &Vec<Rat>)> = frame
            .iter()
            .enumerate()
            .filter(|(_, (lvl, _))| *lvl == two_r)
            .map(|(i, (_, vec))| (i, vec))
            .collect();
        if graded.is_empty() && prev.dim() == 0 {
            if v.iter().any(|x| !x.is_zero()) {
                return Err(CoreError::Structural(format!(
                    "reduction slot at weight {w} has no frame"
                )));
            }
            continue;
        }
        let mut cols: Vec<Vec<Rat>> = graded.iter().map(|(_, v)| (*v).clone()).collect();
        cols.extend(prev.basis().iter().cloned());
        let mut mat = linalg::zeros(h, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for i in 0..h {
                mat[i][j] = col[i].clone();
            }
        }
        let solved = linalg::solve(&mat, v).ok_or_else(|| {
            CoreError::Structural(format!("graded reduction failed at weight {w}"))
        })?;
        for (k, (slot_idx, _)) in graded.iter().enumerate() {
            if solved[k].is_zero() {
                continue;
            }
            reduced[*slot_idx] = reduced[*slot_idx].add(&SuperSeries::monomial(
                &pm.sol.ring,
                m.clone(),
                solved[k].clone(),
            ))?;
        }
    }

    // Linear part in the frame slots must be invertible; normalize it to
    // the identity so tau_a = t_a + higher.
    let params = pm.sol.ring.param_count();
    if params != h {
        return Err(CoreError::Structural(format!(
            "{} parameters against {} module classes",
            params, h
        )));
    }
    let mut lin = linalg::zeros(h, h);
    for (slot, series) in reduced.iter().enumerate() {
        for (m, c) in series.terms() {
            if m.degree() == 1 {
                let a = (0..params).find(|&a| m.exp(a) == 1).expect("degree 1");
                lin[slot][a] = c.clone();
            }
        }
    }
    let lin_inv = linalg::invert(&lin).ok_or_else(|| {
        CoreError::SingularLinearPart(vec!["reduced period map has a singular linear part".into()])
    })?;
    let mut tau: Vec<SuperSeries<Rat>> = vec![SuperSeries::zero(&pm.sol.ring); h];
    for a in 0..h {
        for slot in 0..h {
            if lin_inv[a][slot].is_zero() {
                continue;
            }
            tau[a] = tau[a].add(&reduced[slot].scale(&lin_inv[a][slot]))?;
        }
    }
    // Parity sanity and linear-part-identity check.
    for (a, s) in tau.iter().enumerate() {
        match s.parity_if_homogeneous() {
            Some(p) if p == pm.sol.ring.param_parity(a) => {}
            other => {
                return Err(CoreError::Structural(format!(
                    "flat coordinate {a} has parity {other:?}, expected {}",
                    pm.sol.ring.param_parity(a)
                )))
            }
        }
    }
    let inverse = invert_map(&tau)?;
    Ok(FlatCoordinates { tau, inverse })
}

/// Re-expresses the period coordinates in the flat coordinates.
pub fn psi_in_flat(pm: &PeriodMap, fc: &FlatCoordinates) -> Result<Vec<SuperSeries<HbarLaurent>>> {
    let lifted: Vec<SuperSeries<HbarLaurent>> = fc
        .inverse
        .iter()
        .map(|s| lift_series(s, pm.window))
        .collect();
    pm.psi.iter().map(|s| s.substitute(&lifted)).collect()
}

/// The hbar-bilinear pairing of two class-coordinate vectors. When
/// `negate_second` is set, the second argument's hbar is negated relative
/// to each class's own rescaling anchor.
pub fn hbar_pairing(
    pm: &PeriodMap,
    u: &[SuperSeries<HbarLaurent>],
    v: &[SuperSeries<HbarLaurent>],
    negate_second: bool,
) -> Result<SuperSeries<HbarLaurent>> {
    let h = pm.filtrations.dim();
    let n = pm.pair.weight as i32;
    let mut class_pairing = linalg::zeros(h, h);
    for i in 0..h {
        for j in 0..h {
            class_pairing[i][j] = pm.pair.pair_rat(&pm.classes[i], &pm.classes[j])?;
        }
    }
    let mut acc = SuperSeries::zero(&pm.sol.ring);
    for i in 0..h {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..h {
            if class_pairing[i][j].is_zero() || v[j].is_zero() {
                continue;
            }
            let vj = if negate_second {
                // Negating hbar acts per class: powers counted from the
                // class's rescaling anchor alternate, and the model's
                // conjugation sign enters on top (the alternation alone
                // does not cancel the transports against the adjointness
                // pattern of the circ action).
                let deg = pm.classes[j]
                    .bidegree_if_homogeneous()
                    .expect("classes homogeneous");
                let anchor = n + deg.q - deg.p;
                let support = pm.classes[j].support();
                let negate_class = pm.pair.conjugation_sign[support[0]];
                if support
                    .iter()
                    .any(|&s| pm.pair.conjugation_sign[s] != negate_class)
                {
                    return Err(CoreError::Structural(
                        "class mixes conjugation signs".into(),
                    ));
                }
                let mut flipped = SuperSeries::zero(&pm.sol.ring);
                for (m, laur) in v[j].terms() {
                    let mut l = laur.negate_hbar_from(anchor)?;
                    if negate_class {
                        l = l.neg();
                    }
                    flipped = flipped.add(&SuperSeries::monomial(&pm.sol.ring, m.clone(), l))?;
                }
                flipped
            } else {
                v[j].clone()
            };
            // The second coefficient crosses the first class.
            let crossed = vj.koszul_flip(
                pm.classes[i]
                    .bidegree_if_homogeneous()
                    .expect("classes homogeneous")
                    .parity(),
            );
            acc = acc.add(&u[i].mul(&crossed)?.scale(&class_pairing[i][j]))?;
        }
    }
    Ok(acc)
}
