//! Hyperbolastic type-I (H1) diffusion process.
//!
//! * [`curve`]: the reparametrized H1 growth curve, its asymptote and inflections.
//! * [`process`]: exact path simulation, lognormal transition laws and moments.
//! * [`likelihood`]: log-likelihood, the reduced objective `f_o`, its gradient
//!   and the profiled diffusion variance.
//! * [`bounds`]: stagewise bounding of the parameter space.
//! * [`firefly`]: a box-constrained firefly optimizer with generation traces.
//! * [`estimator`]: the end-to-end fit and the replication-study harness.
//! * [`io`] and [`cli`]: file formats and the command line front end.

pub mod bounds;
pub mod cli;
pub mod curve;
pub mod error;
pub mod estimator;
pub mod firefly;
pub mod io;
pub mod likelihood;
pub mod numeric;
pub mod process;

pub use curve::{ClassicalParams, CurveParams};
pub use error::{H1Error, Result};
pub use firefly::FireflyConfig;
pub use likelihood::{initial_mle, SufficientStats, ThetaVector};
pub use estimator::{fit, fitted_mean_error, replicate_study, FitResult, StudySpec};
pub use process::{H1Params, InitialLaw, PathPanel, SamplePath, TimeGrid};
