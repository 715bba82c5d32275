//! Chebyshev basis evaluation, domain compactification, quadrature rules and
//! the operator matrices built from them.

mod chebyshev;
mod domain;
mod matrices;
mod quadrature;

pub use chebyshev::{
    basis_derivatives_into, basis_phi, basis_values, basis_values_into, chebyshev_t,
    chebyshev_t_derivative, chebyshev_u, kappa, BasisSpec, ENDPOINT_CLAMP,
};
pub use domain::OutputDomain;
pub use matrices::{
    derivative_matrix, exceedance_matrix, gram_matrix, interval_indicator_matrix,
    lebesgue_gram_matrix, observable_matrix, potential_matrix, stiffness_matrix, BasisOperators,
    Potential, DENSE_NODES_PER_MODE,
};
pub use quadrature::{
    default_mu_nodes, gauss_chebyshev_rule, gauss_legendre_y_rule, interior_y_rule,
    uniform_y_rule, Measure, QuadratureRule, DEFAULT_Y_NODES,
};
