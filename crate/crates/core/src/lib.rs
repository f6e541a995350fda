//! Exact computer algebra for differential Gerstenhaber-Batalin-Vilkovisky
//! algebras and the structures built on top of them: Maurer-Cartan
//! deformations, semi-infinite Hodge filtrations, period maps, Frobenius
//! manifolds and dual-torus mirror pairs.
//!
//! Everything is computed over the rationals with no floating point, so
//! every identity that is supposed to hold, holds exactly.

pub mod bilinear;
pub mod coeff;
pub mod cohomology;
pub mod deformation;
pub mod dgbv;
pub mod element;
pub mod error;
pub mod frobenius;
pub mod grading;
pub mod hbar;
pub mod kahler;
pub mod koszul;
pub mod linalg;
pub mod linop;
pub mod mirror;
pub mod models;
pub mod pair;
pub mod prng;
pub mod rat;
pub mod report;
pub mod section;
pub mod series;
pub mod specfile;
pub mod vhs;

pub use bilinear::{BilinearTable, HbarBilinear, HbarOp, SlotParity};
pub use coeff::Coeff;
pub use cohomology::{cohomology, CohomologyData};
pub use deformation::{
    gauge_transform, mc_residual, normalize_unit, solve_mc, transport, DgLieAlgebra, MCSolution,
};
pub use dgbv::{
    check_dgbv_axioms, check_manin, check_module_axioms, check_odd_lie, DgbvAlgebra, ManinReport,
    ModulePair, Product,
};
pub use element::GradedElement;
pub use error::{CoreError, Result};
pub use frobenius::{frobenius_data, verify_frobenius, FrobeniusData};
pub use grading::{Bidegree, GradedBasis};
pub use hbar::{HbarLaurent, HbarWindow};
pub use koszul::{koszul_sign, Parity, Sign};
pub use linop::LinearOp;
pub use mirror::{verify_intertwining, verify_mirror_theorem, FlatTorusPair};
pub use pair::{CrossMap, DeformationPair};
pub use rat::Rat;
pub use report::{Check, Report};
pub use series::{invert_map, Mono, SeriesRing, SuperSeries};
pub use vhs::{
    build_filtrations, flat_coordinates, harmonic_reps, hbar_pairing, period_map, FlatCoordinates,
    PeriodMap, WSpec,
};
