//! Finiteness and structure of the group of weighted small-step walk models
//! in the orthant.
//!
//! The crate is organised bottom-up: [`model`] holds exact step inventories,
//! [`group`] searches orbits of the birational involutions, [`geometry`]
//! computes the critical point and the associated reflection group,
//! [`elliptic`] handles the two-dimensional kernel curve, [`classify`] drives
//! the census and family checks, and [`walk`] counts confined walks exactly.

pub mod analysis;
pub mod catalog;
pub mod classify;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod group;
pub mod model;
pub mod poly;
pub mod rational;
pub mod special;
pub mod walk;

pub use error::{Error, Result};
pub use group::{GroupVerdict, Order, OrbitConfig};
pub use model::{H1Verdict, SliceModel, Step, WeightedModel};
pub use rational::Q;
