//! Lower bounds for the first Dirichlet eigenvalue of the p-Laplacian from a
//! Hardy inequality whose weight is singular at the centre and on the boundary
//! of the ball, sharpened by a logarithmic supersolution.
//!
//! Module map:
//!
//! * [`kernel`]: closed-form radial ingredients and classical comparison values
//! * [`quadrature`]: endpoint-singular adaptive quadrature, sphere and ball constants
//! * [`poisson`]: radial solutions of the p-Laplace Poisson problem
//! * [`hardy`]: the functionals `L`, `K`, `N` on trial functions and inequality checks
//! * [`search`]: golden-section search with grid bracketing
//! * [`eigen`]: sup-inf eigenvalue bounds, Faber-Krahn reduction, comparisons
//! * [`shooting`]: reference eigenvalues of the radial problem by shooting
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which is what the tolerances are tuned for.

pub mod eigen;
pub mod error;
pub mod hardy;
pub mod kernel;
pub mod poisson;
pub mod quadrature;
pub mod scalar;
pub mod search;
pub mod shooting;

pub use error::{Endpoint, Error, Result};
pub use kernel::{
    b_threshold, bessel_first_zero, classical_bound, default_b, eigen_1d_closed_form,
    eigen_2_ball_closed_form, validate, RawParams, SPolicy,
};
pub use quadrature::{ball_volume, integrate, sphere_area, QuadConfig};
pub use scalar::Real;

pub type Params = kernel::ProblemParams<f64>;
pub type Raw = kernel::RawParams<f64>;
pub type QuadResult = quadrature::QuadResult<f64>;
pub type RadialSolution = poisson::RadialSolution<f64>;
pub type TrialFunction = hardy::TrialFunction<f64>;
pub type BoundResult = eigen::BoundResult<f64>;
pub type Comparison = eigen::Comparison<f64>;
pub type EigenRefResult = shooting::EigenRefResult<f64>;

pub type ParamsF32 = kernel::ProblemParams<f32>;
