//! Supersparse linear integer models.
//!
//! Trains scoring systems (small integer coefficients, few features) by
//! exactly minimizing the 0–1 loss plus an ℓ0 penalty with a built-in
//! branch-and-bound solver. Also provides LP-based data reduction,
//! operational constraints, model variants with tiered or binary
//! coefficients, and calculators for discretization and generalization bounds.
//!
//! ```
//! use supersparse::data::Dataset;
//! use supersparse::formulate::{build_slim, SlimParams};
//! use supersparse::milp::{branch_and_bound, SolveOptions};
//!
//! let data = Dataset::new(
//!     vec!["a".into(), "b".into()],
//!     vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
//!     vec![1, 1, -1, -1],
//! )
//! .unwrap();
//! let params = SlimParams::new(&data, 0.05, 3, 3);
//! let instance = build_slim(&data, &params, &[]).unwrap();
//! let result = branch_and_bound(&instance, &SolveOptions::default());
//! let model = instance.decode(&result).unwrap();
//! assert_eq!(supersparse::scoring::zero_one_loss(&model, &data).unwrap().errors, 0);
//! ```

pub mod data;
pub mod error;
pub mod experiment;
pub mod formulate;
pub mod milp;
pub mod reduce;
pub mod scoring;
pub mod theory;

pub use error::{Error, Result};
