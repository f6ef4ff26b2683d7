//! Finite-dimensional fusion frames and K-fusion frames.
//!
//! [`numerics`] is the dense complex substrate, [`frame`] holds classical and
//! fusion frames, [`kfusion`] decides K-fusion membership with optimal
//! bounds, [`theorems`] checks the characterization, erasure and
//! perturbation bounds on concrete instances, and [`instances`] generates
//! seeded instances with known hypothesis constants.

pub mod numerics;
pub mod float_repr;
pub mod frame;
pub mod kfusion;
pub mod rng;
pub mod theorems;
pub mod instances;
