//! Maximal functions, Calderón–Zygmund decomposition, shifted square
//! functions and the pointwise inequality checks built on them.

mod checks;
mod cz;
mod interaction;
mod maximal;
mod shifted;

pub use checks::{
    cancellation_bound_check, dual_pointwise_check, rubio_de_francia_ratio, window_nu, windowed_energy_check, DualCheck,
    InequalityCheck, StabilityReport, RATIO_FLOOR, STABILITY_FACTOR,
};
pub use cz::{cz_decompose, dyadic_step_function, CzDecomposition, CzInterval, CzInvariants, CzTree, NodeKind, CZ_TOL};
pub use interaction::{c_gamma_outer, decay_separations, interaction_decay_fit, interaction_decay_fit_over, interaction_kernel, mu_cutoff, nu_cutoff, DecayFit};
pub use maximal::{dyadic_max, hardy_littlewood_max, uncentered_max};
pub use shifted::{
    khintchine_check, lp_band, lp_j_range, norm_growth_in_shift, q_star, randomized_operator, shifted_square_function, sign_draw,
    weak_type_profile, KhintchineReport, NormGrowth, ShiftedSquareData,
};
