//! Least absolute deviations regression by exact coordinate descent.
//!
//! Minimizes `L(β) = Σ_i |y_i − x_iᵀβ|`. Every coordinate subproblem is
//! solved in closed form by a (weighted) median, and the optimized driver
//! keeps the residual `y − Xβ` up to date in place so a sweep over all `p`
//! coordinates costs `O(p n log n)`.
//!
//! ```
//! use ladcd::{optimized_cd, Coefficients, Dataset, SolverConfig};
//!
//! let d = Dataset::from_rows(
//!     &[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]],
//!     vec![0.0, 1.0, 5.0],
//!     Some(0),
//! )?;
//! let fit = optimized_cd(&d, &Coefficients::zeros(2), &SolverConfig::default())?;
//! assert!((fit.final_objective - 1.5).abs() < 1e-12);
//! # Ok::<(), ladcd::LadError>(())
//! ```

pub mod data;
pub mod error;
pub mod experiment;
pub mod init;
pub mod median;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod stall;

pub use data::{contaminate, generate_synthetic, load_csv, mae, read_csv, write_csv, ContamSpec, LoadOptions, ResponseColumn, SynthSpec};
pub use error::{LadError, Result};
pub use init::{fit, ga_fitness, ga_search, multi_start, ridge_fit, zero_init, GaConfig, InitStrategy, RidgeConfig};
pub use median::{check_weighted_median, median, weighted_median, WeightedSample};
pub use model::{lad_objective, validate_dataset, Coefficients, Dataset, FitReport, FitResult, InitMethod, SolverConfig};
pub use oracle::{exact_lad_small, ols_fit, OracleSolution};
pub use solver::{coordinate_optimality_check, coordinate_update, naive_cd, optimized_cd, partial_residual, ResidualState};
