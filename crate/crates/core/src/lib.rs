//! Achievable rates of rotationally invariant input distributions over the
//! AWGN channel.
//!
//! * [`specfun`]: log-domain Bessel and gamma functions.
//! * [`radial`]: channel parameters, multisphere sets, chi kernels and
//!   output radial densities.
//! * [`mi`]: the quadrature engine, AWGN capacity and the dual radial forms
//!   of the output entropy.
//! * [`mc_oracle`]: independent Monte Carlo estimators of the same rates.
//! * [`manakov`]: split-step Manakov propagation and a Jones-rotation
//!   invariance test.
//! * [`cli`]: sweeps, crossover and invariance drivers behind the `rotinv`
//!   binary.

pub mod cli;
pub mod error;
pub mod manakov;
pub mod mc_oracle;
pub mod mi;
pub mod quad;
pub mod radial;
pub mod specfun;

pub use error::{Error, Result};
pub use manakov::{FiberParams, FieldGrid, JonesUnitary};
pub use mc_oracle::McEstimate;
pub use mi::{MiResult, QuadratureConfig};
pub use radial::{ChannelParams, RadialLaw, SphereSet};
