//! Time evolution of squeezed n-photon states in variable media.
//!
//! A time-dependent quadratic Hamiltonian is reduced to an Ermakov-type
//! system of six real ODEs. Its solutions give the parameters of the
//! evolution operator (rotation, squeeze, displacement), photon-number
//! amplitudes in the Fock basis, and Heisenberg-picture operator
//! coefficients. A dense truncated-Fock-space oracle cross-checks each of
//! these independently.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod ermakov;
pub mod error;
pub mod export;
pub mod fock_oracle;
pub mod hamiltonian;
pub mod heisenberg;
pub mod hypergeometric;
pub mod linalg;
pub mod matrix_elements;
pub mod ode;
pub mod scalar;
pub mod squeeze_params;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Complex64 = num_complex::Complex<f64>;
pub type CoefficientSet64 = hamiltonian::CoefficientSet<f64>;
pub type HamiltonianSpec64 = hamiltonian::HamiltonianSpec<f64>;
pub type ErmakovState64 = ermakov::ErmakovState<f64>;
pub type Trajectory64 = ermakov::Trajectory<f64>;
pub type SqueezeParameters64 = squeeze_params::SqueezeParameters<f64>;
pub type FockMatrix64 = matrix_elements::FockMatrix<f64>;
pub type AmplitudeVector64 = amplitudes::AmplitudeVector<f64>;
pub type OperatorCoefficients64 = heisenberg::OperatorCoefficients<f64>;
pub type QuadratureCoefficients64 = heisenberg::QuadratureCoefficients<f64>;
pub type TruncatedBasis64 = fock_oracle::TruncatedBasis<f64>;
pub type Propagator64 = fock_oracle::Propagator<f64>;
