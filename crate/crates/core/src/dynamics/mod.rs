//! Three-mode light–spin model, steady states, and output noise spectra.

pub mod elimination;
pub mod lyapunov;
pub mod model;
pub mod spectrum;
pub mod stochastic;

pub use elimination::{adiabatic_eliminate, CollectiveJump, EliminatedModel};
pub use lyapunov::{evolve_cov, solve_lyapunov, steady_state_cov};
pub use model::{build_model, drift_diffusion, DriftDiffusion, ModelParams, OutputPort, ThreeModeModel};
pub use spectrum::{
    centered_grid, fwhm, intracavity_spectrum, output_covariance, output_noise_spectrum, output_transfer,
    NoiseSpectrum, Selector,
};
pub use stochastic::{stochastic_trajectory_spectrum, StochasticConfig, StochasticSpectrum};
