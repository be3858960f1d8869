//! Exact-arithmetic toolkit for graded algebras on computable models.
//!
//! The crate provides, over the rationals and with no floating point in any
//! computational path:
//!
//! * a kernel of sparse polynomials, declared-denominator rational
//!   functions and canonical echelon bases ([`poly`], [`ratfun`],
//!   [`basis`]);
//! * flag multivaluations and full valuation images of subspaces
//!   ([`valuation`]);
//! * computable graded-algebra models: section rings of (infinite) divisors
//!   on the projective line, Laurent-monomial families, generated
//!   subalgebras and rescalings ([`algebra`]);
//! * valuation semigroups, convex-body approximations and exact volumes
//!   ([`okounkov`], [`hull`]);
//! * approximability diagnostics: saturation tables, rank ratios and
//!   structured verdicts ([`diagnostics`]);
//! * pole divisors, their per-degree suprema and the truncated limit
//!   divisor with decay and inclusion checks ([`divisor`]).
//!
//! Degree sweeps and table fills are data-parallel; build without the
//! default `parallel` feature for a fully sequential library with the same
//! API.

pub mod algebra;
pub mod basis;
pub mod diagnostics;
pub mod divisor;
pub mod error;
pub mod hull;
pub mod okounkov;
pub(crate) mod par;
pub mod poly;
pub mod ratfun;
pub mod scalar;
pub mod valuation;

pub use algebra::{
    big_line_bundle_curve, curve_section_ring, dyadic_curve, explicit_monomial, generated,
    parity_monomial, polytope_monomial, subalgebra_rescale, tail_family, validate_model,
    CoeffRule, GradedAlgebraModel, InfiniteDivisorSpec, ModelKind, SliceRule, ValidationReport,
};
pub use basis::{echelonize, product_space, Basis};
pub use diagnostics::{
    approximability_verdict, default_schedule, liminf_estimate, rank_ratio_check,
    saturation_table, schedule_for_epsilons, verdict_from_table, SaturationTable, ScheduleEntry,
    Verdict,
};
pub use divisor::{
    check_divisibility_monotonicity, check_section_inclusion, coefficient_decay,
    limit_divisor_estimate, pole_divisor, sup_pole_divisor, DivisorEstimate, FiniteDivisor,
    Geometry, PrimeDivisor,
};
pub use error::{Error, Result};
pub use okounkov::{
    body_approximation, body_volume, check_volume_identity, collect_semigroup, volume_sequence,
    OkounkovSample, Polytope, VolumeIdentityReport,
};
pub use poly::{Exponents, Poly};
pub use ratfun::{DenFactor, Denominator, RationalFunction};
pub use scalar::Scalar;
pub use valuation::{
    leading_term, multivaluation, valuation_image, CurveLocus, Flag, ValuationImage,
    ValuationVector,
};
