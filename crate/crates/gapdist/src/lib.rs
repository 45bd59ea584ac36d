//! Reflection-generated circle packings in the upper half-plane.
//!
//! The library works with packings obtained from an initial chain of circles
//! pinched between the two horizontal lines `Im z = 0` and `Im z = 1`, closed
//! up by reflecting through the dual circles of the triangular gaps. It
//! provides:
//!
//! * [`geom`] — inversive geometry: generalized circles in Hermitian form,
//!   Möbius and anti-Möbius actions, dual circles, tangency extraction.
//! * [`config`] — the initial configurations (three built-ins plus JSON
//!   input), their validity checks, and the packing constants derived from
//!   them.
//! * [`enumerate`] — all tangencies on the base line with curvature up to a
//!   bound, by recursive gap subdivision with curvature pruning.
//! * [`stats`] — empirical nearest-neighbour gap statistics and conformal
//!   transport of tangency sets.
//! * [`theory`] — the limiting gap distribution, computed as a weighted sum
//!   of areas of plane regions cut out by bilinear inequalities.
//! * [`groups`] — the matrix groups acting on the packings: generators,
//!   Hecke groups, conjugation identities, Iwasawa/Bruhat coordinates, and a
//!   lattice-point census.
//!
//! All core math is generic over the scalar type through [`Scalar`];
//! concrete `f64` aliases are exported at the crate root.

// Comparisons written as `!(a < b)` are deliberate: a NaN fails the
// predicate instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod config;
pub mod enumerate;
pub mod geom;
pub mod groups;
pub mod stats;
pub mod theory;

/// Floating-point scalar the geometry is generic over (`f32`, `f64`, ...).
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Default relative tolerance for geometric predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Shorthand used throughout the crate to inject literals into generic code.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Default tolerance as a scalar.
pub fn default_tol<T: Scalar>() -> T {
    real(DEFAULT_TOL)
}

/// Half-open interval `[lo, hi)` on the base line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x < self.hi
    }
}

pub type Circle64 = geom::GeneralizedCircle<f64>;
pub type Mobius64 = geom::MobiusMap<f64>;
pub type AntiMobius64 = geom::AntiMobiusMap<f64>;
pub type Motion64 = geom::Motion<f64>;
pub type FordConfig64 = config::FordConfig<f64>;
pub type PackingConstants64 = config::PackingConstants<f64>;
pub type Tangency64 = enumerate::Tangency<f64>;
pub type EmpiricalCdf64 = stats::EmpiricalCdf<f64>;
pub type Region64 = theory::Region<f64>;
pub type GroupElement64 = groups::GroupElement<f64>;

pub type Circle32 = geom::GeneralizedCircle<f32>;
pub type Mobius32 = geom::MobiusMap<f32>;
