//! Recovery of finite parametric sources from spherical-mean data.
//!
//! The library reconstructs three families of unknown signals from values of
//! their spherical mean transform taken at finitely many sensor points:
//!
//! - weighted point masses `f = Σ a_k δ_{x_k}` ([`pipeline::recover_points`]),
//! - weighted hyperplane measures `f = Σ a_k δ_{(θ_k, ρ_k)}`
//!   ([`pipeline::recover_hyperplanes`]),
//! - sums of translated radial kernels `f(x) = Σ a_k g(|x − x_k|)`
//!   ([`pipeline::recover_radial`]).
//!
//! In each case, probing the transform with a suitable test family (monomials
//! `t^l`, Gaussians `e^{−l t²}`, or a Hankel-transform projection of a sampled
//! trace) produces per-sensor moment sequences `τ_l = Σ a_k λ_k^l` — a Prony
//! system whose nodes `λ_k` encode distances from the sensor to the unknown
//! sources. Solving the Prony system at enough sensors in general position,
//! matching roots to sources via the known amplitudes, and inverting the
//! resulting distance data geometrically (trilateration, or unsigned-distance
//! hyperplane fitting) recovers the full parameter set.
//!
//! Module map:
//!
//! - [`model`]: source/sensor types, admissibility conditions, sensor-count
//!   formulas, scenario (de)serialization.
//! - [`forward`]: exact synthetic data — moment vectors and sampled traces.
//! - [`prony`]: Hankel system assembly, degeneracy detection, coefficient and
//!   amplitude solves, companion-matrix root extraction.
//! - [`correspondence`]: root-to-source assignment by exhaustive permutation
//!   search, plus the power-difference kernel property used as a test oracle.
//! - [`geometry`]: trilateration, bisector/equidistance hyperplanes, and
//!   hyperplane recovery from unsigned distances.
//! - [`hankel`]: normalized Bessel functions, the order-(n/2 − 1) Hankel
//!   transform, and even-moment extraction from traces.
//! - [`pipeline`]: end-to-end recovery with per-sensor reports.
//! - [`gen`]: seeded random scenario synthesis for tests and the CLI.

pub mod correspondence;
pub mod forward;
pub mod gen;
pub mod geometry;
pub mod hankel;
pub mod model;
pub mod pipeline;
pub mod prony;
pub mod quad;

pub use forward::{MomentVector, ProbeFamily, SphericalMeanTrace};
pub use hankel::{HankelProfile, RadialKernel};
pub use model::{
    HyperplaneSources, ModelKind, PointSources, RadialSources, Scenario, SensorSet, SourceModel,
};
pub use pipeline::{PipelineConfig, RecoveryError, RecoveryReport};
pub use prony::{HankelSystem, PronySolution};
