//! Special functions, quadrature rules and root finding.

pub mod legendre;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use legendre::assoc_legendre_p;
pub use quadrature::{
    cached_rule, gauss_hermite, gauss_legendre, integrate_adaptive, integrate_semi_infinite, scale_breakpoints,
    Integral, QuadratureRule, RuleKind, Tolerance,
};
pub use roots::{bisect_monotone, bisect_monotone_with, BisectionStop};
pub use special::{lower_inc_gamma, regularized_lower_gamma, regularized_upper_gamma, upper_inc_gamma};
