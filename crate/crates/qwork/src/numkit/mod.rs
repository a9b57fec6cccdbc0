//! Low-level numerics: dense complex matrices, a Hermitian eigensolver,
//! and the special functions used by the driven-oscillator closed forms.

pub mod eig;
pub mod matrix;
pub mod special;

pub use eig::{hermitian_eig, unitarity_residual, unitary_exp, Spectrum};
pub use matrix::ComplexMatrix;
pub use special::{airy, gamma_fn, hyp0f1, AiryValues};
