//! Correlation witnesses: the `Q` metric and Gaussian discord.

pub mod discord;
pub mod oracle;
pub mod q;

pub use discord::{entropy_h, gaussian_discord, gaussian_discord_with, Branch, DiscordResult, Formula, MeasuredMode};
pub use oracle::{discord_by_minimization, OracleResult};
pub use q::{
    covariance_from_homodyne, joint_variances_from_cov, q_from_cov, quadratures_from_stokes, quantum_correlation_q,
    Channel, JointVariances,
};
