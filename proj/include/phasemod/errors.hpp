#pragma once

#include <stdexcept>
#include <string>

namespace phasemod {

// Base class for all library errors. CLI maps config_error -> exit 2,
// everything else derived from error -> exit 3.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input outside the physical domain (flux range, invalid parameters).
struct domain_error : error {
    using error::error;
};

// Quadrature non-convergence, integrator step-size failures and the like.
struct numeric_error : error {
    using error::error;
};

// Config file schema or invariant violations.
struct config_error : error {
    using error::error;
};

// Root finding asked for a value outside the reachable range.
struct no_solution_error : error {
    using error::error;
};

// Operations that need a finite drive frequency got omega_p = 0.
struct degenerate_drive_error : error {
    using error::error;
};

// Effective drive frequencies (after sweet-spot doubling) or time-averaged
// qubit frequencies do not satisfy the requested resonance condition.
struct resonance_mismatch_error : error {
    using error::error;
};

// Dispersive coupler model used outside its validity window.
struct model_validity_error : error {
    using error::error;
};

// Trace has no spectral peak above the noise floor; signals near-zero coupling.
struct no_oscillation_error : error {
    using error::error;
};

// Bisection bracket does not contain a sign change.
struct no_zero_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

} // namespace phasemod
