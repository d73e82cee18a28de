//! Exact (rational) and high-precision (real) evaluation of every moment
//! sequence: mu_n, J_n, the central moments of Y_n, nu_n, zeta_m, and
//! pointwise values of the Poisson transform and its modified Laplace
//! transform.

mod jn;
mod laplace;
mod moments;
mod mu;
mod nu;
mod poisson;
mod table;
mod weights;

pub use jn::{j_direct, j_direct_table, jbar_recurrence};
pub use laplace::{euler_transform_partial, laplace_star, laplace_star_complex, laplace_star_residual, Complex};
pub use moments::{central_moments, central_moments_split, CentralMoments};
pub use mu::{
    mu_closed_form_exact, mu_closed_form_exact_table, mu_closed_form_real, mu_positive_form_exact, mu_positive_form_real, mu_recurrence,
    mu_tilde_table,
};
pub use nu::{nu_factorial_integers, nu_recurrence, z_second_moments, zeta_moments, zeta_ode_residuals};
pub use poisson::{eval_alternating, eval_alternating_checked, PoissonGf};
pub use table::{MomentTable, TableSpec};
pub use weights::{binomial_weights, delta_row, pi_recurrence, BinomialWeights};
