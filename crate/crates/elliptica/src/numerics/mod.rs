//! Shared numerical kernels: quadrature, ODE stepping, tridiagonal
//! eigenvalues, MINRES, interpolation.

pub mod interp;
pub mod minres;
pub mod ode;
pub mod quad;
pub mod tridiag;
