//! Order-by-order solution of the Maurer-Cartan equation
//! d Gamma + 1/2 [Gamma . Gamma] = 0 over the truncated parameter ring,
//! with the homotopy gauge, obstruction detection, the gauge-group
//! action, unit-direction normalization and the exponential transport.

use crate::bilinear::{BilinearTable, HbarBilinear};
use crate::coeff::Coeff;
use crate::cohomology::{cohomology, CohomologyData};
use crate::element::GradedElement;
use crate::error::{CoreError, Result};
use crate::grading::GradedBasis;
use crate::hbar::{HbarLaurent, HbarWindow};
use crate::koszul::Parity;
use crate::linop::LinearOp;
use crate::pair::DeformationPair;
use crate::rat::Rat;
use crate::series::{SeriesRing, SuperSeries};
use std::sync::Arc;

/// A dg Lie algebra presented by a bracket table and a differential.
#[derive(Clone, Debug)]
pub struct DgLieAlgebra {
    pub basis: Arc<GradedBasis>,
    pub bracket: BilinearTable,
    pub d: LinearOp,
    pub unit_lift: Option<usize>,
}

impl DgLieAlgebra {
    pub fn from_pair(p: &DeformationPair) -> Self {
        DgLieAlgebra {
            basis: p.g_basis.clone(),
            bracket: p.bracket.clone(),
            d: p.d_g.clone(),
            unit_lift: Some(p.unit_lift),
        }
    }

    pub fn from_dgbv(a: &crate::dgbv::DgbvAlgebra) -> Result<Self> {
        Ok(DgLieAlgebra {
            basis: a.basis.clone(),
            bracket: a.bracket_table()?,
            d: a.d.clone(),
            unit_lift: Some(a.unit),
        })
    }
}

pub type SeriesElement = GradedElement<SuperSeries<Rat>>;

/// The versal solution at a truncation order, with the splitting used to
/// build it and the obstruction classes met along the way.
#[derive(Clone, Debug)]
pub struct MCSolution {
    pub ring: Arc<SeriesRing>,
    pub order: usize,
    pub gamma: SeriesElement,
    pub splitting: CohomologyData,
    /// (order, harmonic class with its parameter coefficients) for every
    /// order whose quadratic term had a nonzero harmonic projection.
    pub obstructions: Vec<(usize, SeriesElement)>,
}

impl MCSolution {
    pub fn is_unobstructed(&self) -> bool {
        self.obstructions.is_empty()
    }
}

pub fn derive_element<C: crate::coeff::Coeff>(
    x: &GradedElement<SuperSeries<C>>,
    a: usize,
) -> GradedElement<SuperSeries<C>> {
    x.map_coeffs(|s| s.derive(a))
}

/// Parameter ring with one coordinate per harmonic representative, the
/// coordinate parity matching the representative.
pub fn moduli_ring(splitting: &CohomologyData, order: usize) -> Arc<SeriesRing> {
    let params: Vec<(String, Parity)> = splitting
        .reps()
        .iter()
        .enumerate()
        .map(|(i, rep)| {
            let parity = rep
                .bidegree_if_homogeneous()
                .expect("representatives are homogeneous")
                .parity();
            (format!("t{i}"), parity)
        })
        .collect();
    SeriesRing::new(params, order)
}

fn linear_part(ring: &Arc<SeriesRing>, splitting: &CohomologyData) -> SeriesElement {
    let basis = splitting.basis();
    let mut gamma = GradedElement::zero(basis);
    for (a, rep) in splitting.reps().iter().enumerate() {
        for (i, c) in rep.components() {
            gamma.add_component(i, SuperSeries::var_times(ring, a, c.clone()));
        }
    }
    gamma
}

/// The exact residual d Gamma + 1/2 [Gamma . Gamma].
pub fn mc_residual(g: &DgLieAlgebra, gamma: &SeriesElement) -> Result<SeriesElement> {
    let quad = g.bracket.apply(gamma, gamma)?;
    g.d.apply(gamma)?.add(&quad.scale(&Rat::new(1, 2)))
}

/// Solves order by order; higher corrections are constrained to the image
/// of the homotopy, which makes the output a deterministic function of
/// the basis order. Obstructions are recorded, not raised.
pub fn solve_mc(g: &DgLieAlgebra, order: usize) -> Result<MCSolution> {
    if order < 1 {
        return Err(CoreError::Argument("truncation order must be >= 1".into()));
    }
    let splitting = cohomology(&g.d)?;
    solve_mc_with_splitting(g, order, splitting)
}

/// Same as `solve_mc` but with an externally chosen splitting, used to
/// compare gauges.
pub fn solve_mc_with_splitting(
    g: &DgLieAlgebra,
    order: usize,
    splitting: CohomologyData,
) -> Result<MCSolution> {
    let ring = moduli_ring(&splitting, order);
    let mut gamma = linear_part(&ring, &splitting);
    let mut obstructions = Vec::new();
    for k in 2..=order {
        let quad = g.bracket.apply(&gamma, &gamma)?.scale(&Rat::new(1, 2));
        let rk = quad.map_coeffs(|s| s.homogeneous_part(k));
        if rk.is_zero() {
            continue;
        }
        let harmonic = splitting.project(&rk)?;
        if !harmonic.is_zero() {
            obstructions.push((k, harmonic));
        }
        let correction = splitting.homotopy().apply(&rk)?;
        gamma = gamma.sub(&correction)?;
    }
    Ok(MCSolution {
        ring,
        order,
        gamma,
        splitting,
        obstructions,
    })
}

/// Gauge action Gamma -> e^{ad_g} Gamma - sum_k ad_g^k(d g)/(k+1)!.
/// The gauge parameter must be odd of order >= 1, so the series truncate.
pub fn gauge_transform(
    g: &DgLieAlgebra,
    gamma: &SeriesElement,
    gauge: &SeriesElement,
) -> Result<SeriesElement> {
    let (even, odd) = gauge.split_total_parity();
    if !even.is_zero() {
        return Err(CoreError::Argument(
            "gauge parameter must have odd total parity".into(),
        ));
    }
    let order_ok = odd.components().all(|(_, s)| s.constant_term().is_none());
    if !order_ok {
        return Err(CoreError::Argument(
            "gauge parameter must vanish at the base point".into(),
        ));
    }

    // e^{ad_g} Gamma
    let mut result = gamma.clone();
    let mut term = gamma.clone();
    let mut k = 1i64;
    loop {
        term = g.bracket.apply(gauge, &term)?.scale(&Rat::new(1, k));
        if term.is_zero() {
            break;
        }
        result = result.add(&term)?;
        k += 1;
    }
    // sum_k ad_g^k (d g)/(k+1)!
    let mut tk = g.d.apply(gauge)?;
    let mut factorial = Rat::one(); // (k+1)! running
    let mut k = 0i64;
    loop {
        factorial = factorial * Rat::from_int(k + 1);
        let contribution = tk.scale(&factorial.recip().expect("factorial nonzero"));
        if contribution.is_zero() && tk.is_zero() {
            break;
        }
        result = result.sub(&contribution)?;
        tk = g.bracket.apply(gauge, &tk)?;
        if tk.is_zero() {
            break;
        }
        k += 1;
    }
    Ok(result)
}

/// Index of the parameter dual to the unit class; errors when the unit
/// lift is not itself a chosen harmonic representative.
pub fn unit_parameter(g: &DgLieAlgebra, splitting: &CohomologyData) -> Result<usize> {
    let Some(u) = g.unit_lift else {
        return Err(CoreError::Config("algebra declares no unit lift".into()));
    };
    let unit = GradedElement::single(&g.basis, u, Rat::one());
    splitting
        .reps()
        .iter()
        .position(|r| *r == unit)
        .ok_or_else(|| {
            CoreError::Config("unit lift is not among the harmonic representatives".into())
        })
}

/// Gauge-fixes the solution so that its derivative along the unit
/// parameter is exactly the unit lift, i.e. the unit parameter only
/// appears in the linear term. Already-normalized solutions are returned
/// unchanged.
pub fn normalize_unit(g: &DgLieAlgebra, sol: &MCSolution) -> Result<MCSolution> {
    let u = unit_parameter(g, &sol.splitting)?;
    let mut gamma = sol.gamma.clone();
    let unit_term = {
        let unit_idx = g.unit_lift.expect("checked above");
        GradedElement::single(
            &g.basis,
            unit_idx,
            SuperSeries::var_times(&sol.ring, u, Rat::one()),
        )
    };

    for _pass in 0..=sol.order {
        // Anomaly: every t_u-dependent term beyond the linear one.
        let anomaly = gamma.sub(&unit_term)?.map_coeffs(|s| {
            let mut kept = SuperSeries::zero(&sol.ring);
            for (m, c) in s.terms() {
                if m.exp(u) > 0 {
                    kept = kept
                        .add(&SuperSeries::monomial(&sol.ring, m.clone(), c.clone()))
                        .expect("same ring");
                }
            }
            kept
        });
        if anomaly.is_zero() {
            let residual = mc_residual(g, &gamma)?;
            if !residual.is_zero() {
                return Err(CoreError::Structural(
                    "normalization left a nonzero residual".into(),
                ));
            }
            return Ok(MCSolution {
                ring: sol.ring.clone(),
                order: sol.order,
                gamma,
                splitting: sol.splitting.clone(),
                obstructions: sol.obstructions.clone(),
            });
        }
        let min_order = anomaly
            .components()
            .filter_map(|(_, s)| s.min_degree())
            .min()
            .expect("anomaly nonzero");
        if min_order < 2 {
            return Err(CoreError::Config(
                "unit anomaly in the linear term cannot be gauged away".into(),
            ));
        }
        let theta = anomaly.map_coeffs(|s| s.homogeneous_part(min_order as usize));
        // Solvability: the anomaly must be exact.
        if !g.d.apply(&theta)?.is_zero() || !sol.splitting.project(&theta)?.is_zero() {
            return Err(CoreError::Config(
                "unit anomaly is not exact; normalization impossible".into(),
            ));
        }
        let gauge = sol.splitting.homotopy().apply(&theta)?;
        gamma = gauge_transform(g, &gamma, &gauge)?;
    }
    Err(CoreError::Structural(
        "unit normalization did not terminate".into(),
    ))
}

pub type HbarSeriesElement = GradedElement<SuperSeries<HbarLaurent>>;

pub fn lift_series_element(x: &SeriesElement, window: HbarWindow) -> HbarSeriesElement {
    x.map_coeffs(|s| {
        s.map_coeffs(|r| HbarLaurent::nu_pow(window, 0, r.clone()).expect("window contains 0"))
    })
}

pub fn lift_to_series<CIn: crate::coeff::Coeff>(
    x: &GradedElement<CIn>,
    ring: &Arc<SeriesRing>,
) -> GradedElement<SuperSeries<CIn>> {
    x.map_coeffs(|c| SuperSeries::constant(ring, c.clone()))
}

/// e^{-Gamma o} a = sum_k (-1)^k (Gamma o)^k a / k!, exact in the
/// truncated ring; each application of the circ action raises the
/// parameter order, so the sum is finite.
pub fn transport(
    circ: &HbarBilinear,
    gamma: &HbarSeriesElement,
    a: &HbarSeriesElement,
) -> Result<HbarSeriesElement> {
    transport_signed(circ, gamma, a, true)
}

/// e^{+Gamma o} a.
pub fn transport_pos(
    circ: &HbarBilinear,
    gamma: &HbarSeriesElement,
    a: &HbarSeriesElement,
) -> Result<HbarSeriesElement> {
    transport_signed(circ, gamma, a, false)
}

fn transport_signed(
    circ: &HbarBilinear,
    gamma: &HbarSeriesElement,
    a: &HbarSeriesElement,
    negate: bool,
) -> Result<HbarSeriesElement> {
    let mut acc = a.clone();
    let mut term = a.clone();
    let mut k = 1i64;
    loop {
        term = circ.apply(gamma, &term)?.scale(&Rat::new(1, k));
        if negate {
            term = term.neg();
        }
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
        k += 1;
        if k > 10_000 {
            return Err(CoreError::Structural(
                "transport series failed to terminate".into(),
            ));
        }
    }
    Ok(acc)
}

/// Covariant-derivative commutation relations over an unobstructed
/// solution: [nabla_a, nabla_b] = 0 and [nabla_a, D] = 0 modulo the top
/// parameter order, where nabla_a = d/dt_a + (d Gamma/d t_a) o (.) and
/// D = d_m + Gamma bullet (.), checked on every module basis vector.
pub fn verify_flatness(
    pair: &DeformationPair,
    sol: &MCSolution,
    window: HbarWindow,
) -> Result<crate::report::Report> {
    use crate::report::Report;
    let mut rep = Report::new("flat structure identities");
    if !sol.is_unobstructed() {
        rep.fail("solution is unobstructed", "obstruction list is nonempty");
        return Ok(rep);
    }
    let gamma = lift_series_element(&sol.gamma, window);
    let params = sol.ring.param_count();
    let cutoff = sol.order.saturating_sub(1);

    let nabla = |a: usize, x: &HbarSeriesElement| -> Result<HbarSeriesElement> {
        let da = derive_element(x, a);
        let dgamma = derive_element(&gamma, a);
        da.add(&pair.circ.apply(&dgamma, x)?)
    };
    let dop = |x: &HbarSeriesElement| -> Result<HbarSeriesElement> {
        pair.d_m.apply(x)?.add(&pair.bullet.apply(&gamma, x)?)
    };
    let truncate = |x: HbarSeriesElement| x.map_coeffs(|s| s.truncate(cutoff));

    let mut witness_nn: Option<String> = None;
    let mut witness_nd: Option<String> = None;
    for v in 0..pair.m_basis.dim() {
        let base = GradedElement::single(
            &pair.m_basis,
            v,
            SuperSeries::constant(
                &sol.ring,
                HbarLaurent::one(window).expect("window contains zero"),
            ),
        );
        for a in 0..params {
            let pa = sol.ring.param_parity(a);
            for b in 0..params {
                let pb = sol.ring.param_parity(b);
                let ab = nabla(a, &nabla(b, &base)?)?;
                let ba = nabla(b, &nabla(a, &base)?)?;
                let sign = crate::koszul::Sign::swap(pa, pb);
                let comm = truncate(ab.sub(&ba.apply_sign(sign))?);
                if !comm.is_zero() && witness_nn.is_none() {
                    witness_nn = Some(format!(
                        "[nabla_{a}, nabla_{b}] on {}",
                        pair.m_basis.symbol(v)
                    ));
                }
            }
            let nd = nabla(a, &dop(&base)?)?;
            let dn = dop(&nabla(a, &base)?)?;
            let comm = truncate(nd.sub(&dn.apply_sign(crate::koszul::Sign::flip(pa)))?);
            if !comm.is_zero() && witness_nd.is_none() {
                witness_nd = Some(format!("[nabla_{a}, D] on {}", pair.m_basis.symbol(v)));
            }
        }
    }
    rep.record("covariant derivatives commute", witness_nn);
    rep.record("covariant derivatives commute with D", witness_nd);
    Ok(rep)
}
