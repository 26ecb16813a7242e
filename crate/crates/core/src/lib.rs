//! Parameter-plane machinery for the meromorphic family f_λ(z) = λ·tan z².
//!
//! The asymptotic values ±λi are the only free singular values; following
//! their orbit classifies each parameter as a capture parameter (the orbit
//! lands in the basin of the superattracting fixed point 0, with a depth),
//! a shell parameter (an attracting cycle of some period captures it), or
//! unresolved. On top of the classifier sit solvers for the coded capture
//! centers and virtual centers, the period-one parametrization λ = S(u)
//! with multiplier H(u) = 2u/sin u, internal-ray continuation, bud and
//! quadruplet probes, deterministic renderers, and the verification suites.

pub mod classify;
pub mod cycles;
pub mod kernel;
pub mod render;
pub mod shell;
pub mod solve;
pub mod verify;

pub use classify::{classify, symmetry_images, Classification, SymmetryOrbit};
pub use cycles::{detect_cycle, refine_cycle, Cycle, Stability};
pub use kernel::{eval_df, eval_f, inverse_branch, orbit, tract_of, ExtendedValue, OrbitOutcome};
pub use render::{render_dynamic_plane, render_parameter_plane, Raster, Region};
pub use solve::{capture_center, newton_param, poles, virtual_center, ComponentCode, SolveReport};
