//! Numerical toolkit for nonlocal function spaces with a finite interaction
//! horizon: truncated singular kernels, horizon-weighted energy (`S`) and
//! trace (`T`) seminorms, Whitney-type extension operators on half spaces,
//! collar geometry for Lipschitz graph domains, and an experiment harness
//! that exercises the trace / inverse-trace / scaling / embedding /
//! local-limit behaviour of these objects at desk scale (d = 1, 2).

pub mod dsl;
pub mod error;
pub mod extension;
pub mod field;
pub mod kernels;
pub mod plot;
pub mod point;
pub mod geometry;
pub mod quad;
pub mod seminorms;
pub mod study;
pub mod whitney;

pub use error::{Error, Result};
pub use field::{Field, Smoothness};
pub use kernels::{kernel_eval, kernel_normalization, kernel_pth_moment, nonlocal_laplacian, KernelSpec};
pub use point::Point;
pub use quad::{QuadratureSpec, SeminormResult};
