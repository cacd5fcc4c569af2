#pragma once

#include <string>
#include <vector>

#include "phasemod/errors.hpp"

namespace phasemod {

// Flux-line transfer function: attenuation factor vs drive frequency.
// Rows must be strictly increasing in frequency with factors in (0, 1].
struct TransferTable {
    struct Row {
        double omega_p = 0.0; // [GHz]
        double factor = 1.0;  // (0, 1]
    };
    std::vector<Row> rows;

    void validate() const;

    // Linear interpolation inside the tabulated range; queries outside it are
    // a config_error (no extrapolation).
    double factor_at(double omega_p) const;

    double min_frequency() const;
    double max_frequency() const;
};

// Two-column CSV (omega_p, factor); '#' lines are comments.
TransferTable read_transfer_table(const std::string& path);

} // namespace phasemod
