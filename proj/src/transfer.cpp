#include "phasemod/transfer.hpp"

#include <fstream>
#include <sstream>

namespace phasemod {

void TransferTable::validate() const {
    if (rows.size() < 2) throw config_error("transfer table: at least two rows required");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].factor > 0.0) || rows[i].factor > 1.0)
            throw config_error("transfer table: factors must lie in (0, 1]");
        if (i > 0 && !(rows[i].omega_p > rows[i - 1].omega_p))
            throw config_error("transfer table: frequencies must be strictly increasing");
    }
}

double TransferTable::factor_at(double omega_p) const {
    if (rows.size() < 2 || omega_p < rows.front().omega_p || omega_p > rows.back().omega_p) {
        std::ostringstream msg;
        msg << "transfer table: omega_p " << omega_p << " GHz outside the tabulated range";
        throw config_error(msg.str());
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (omega_p <= rows[i].omega_p) {
            const double t = (omega_p - rows[i - 1].omega_p) /
                             (rows[i].omega_p - rows[i - 1].omega_p);
            return rows[i - 1].factor + t * (rows[i].factor - rows[i - 1].factor);
        }
    }
    return rows.back().factor;
}

double TransferTable::min_frequency() const {
    if (rows.empty()) throw config_error("transfer table: empty");
    return rows.front().omega_p;
}

double TransferTable::max_frequency() const {
    if (rows.empty()) throw config_error("transfer table: empty");
    return rows.back().omega_p;
}

TransferTable read_transfer_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("transfer table '" + path + "' cannot be opened");
    TransferTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double omega = 0.0, factor = 0.0;
        if (!(row >> omega >> factor))
            throw config_error("transfer table '" + path + "': expected two numeric columns");
        table.rows.push_back({omega, factor});
    }
    table.validate();
    return table;
}

} // namespace phasemod
