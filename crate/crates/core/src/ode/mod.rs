//! The mean-field ODE system of the `And(K)` process and its singularity.

pub mod asymptotic;
pub mod closed_form;
pub mod dopri;
pub mod rhs;
pub mod singularity;
pub mod trajectory;

pub use asymptotic::{asymptotic_tg, asymptotic_u, asymptotic_z};
pub use closed_form::{closed_form_k0, closed_form_k1, isolated_hitting_time, x_c_k0, ClosedForm};
pub use rhs::{rhs, rhs_reciprocal, Derivatives};
pub use singularity::{
    find_singularity, find_singularity_with, SingularityMethod, SingularityResult,
};
pub use trajectory::{integrate, integrate_at, OdeParams, Trajectory, TrajectorySample};
