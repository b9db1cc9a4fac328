//! # waelab
//!
//! A desk-scale statistical laboratory for Wasserstein autoencoders.
//!
//! The crate bundles the pieces needed to check concentration and rate
//! claims about f-WAEs (W1 reconstruction plus a total-variation latent
//! penalty) by direct simulation:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`measures`] | compact-support density families, samplers, empirical measures, pushforwards |
//! | [`transport`] | exact W1 (network simplex), dual certificates, Sinkhorn, 1-D closed forms |
//! | [`variation`] | total variation, Scheffé sets, Yatracos norm and minimum-distance estimator |
//! | [`geometry`] | covering numbers, upper Wasserstein dimension, quasi-isometry and Hölder checks |
//! | [`autoencoder`] | tiny MLPs with manual backprop, f-WAE objective, training, 1-D Monge maps, error decomposition |
//! | [`harness`] | experiment drivers, rate fits, tail reports, CSV output |
//!
//! Every random quantity is driven by a seeded ChaCha8 stream (see [`rng`]),
//! so experiments are reproducible byte for byte.

pub mod autoencoder;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod transport;
pub mod variation;

pub use error::{Error, Result};
pub use measures::{DensityModel, DiscreteMeasure, ModelFamily};
pub use stats::{fit_rate, RateFit};
pub use transport::{CostMatrix, MetricTag, TransportPlan};
