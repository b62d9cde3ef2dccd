//! Liquid state genetic programming.
//!
//! A tree-GP solver whose terminals are the items of a "liquid": a pool of
//! behavior vectors (one output per fitness case) that is itself evolved by
//! elementwise recombination and insertion of raw inputs. A standard GP
//! baseline over the raw inputs shares the same engine.
//!
//! ```
//! use lsgp::{gp::GpParams, liquid::LiquidParams, model::FunctionSet, problems::make_parity};
//! use rand::SeedableRng;
//!
//! let problem = make_parity(3).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let result = lsgp::gp::run_lsgp(
//!     &problem,
//!     &GpParams::new(100, 50),
//!     &LiquidParams::for_inputs(3),
//!     &FunctionSet::boolean(),
//!     false,
//!     &mut rng,
//! )
//! .unwrap();
//! assert!(result.archive.is_consistent(&problem));
//! ```

pub mod error;
pub mod eval;
pub mod gp;
pub mod harness;
pub mod ledger;
pub mod liquid;
pub mod model;
pub mod packed;
pub mod par;
pub mod problems;

pub use error::{Error, Result};
