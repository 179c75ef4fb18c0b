#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bergman;
pub mod error;
pub mod fuchsian;
pub mod jetext;
pub mod mobius;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

pub use bergman::{
    DifferentialNormList, KernelAssembler, KernelBasis, KernelConfig, KernelFamily,
    SurfaceQuadrature,
};
pub use fuchsian::{GeneratorSet, GroupBall, SeriesSum};
pub use jetext::{JetSpec, NDifferential};
pub use mobius::{DiskPoint, MobiusTransform, PointPair};
pub use num_complex::Complex64;
pub use quadrature::QuadratureSpec;
pub use specfun::SeriesValue;
pub use verify::{RunReport, VerifyConfig};
