#include "phasemod/grid_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace phasemod {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw io_error("grid file '" + path + "': bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string summary_path(const std::string& path) {
    const std::size_t dot = path.rfind('.');
    const std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
    return stem + ".summary.csv";
}

} // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void write_grid(const SweepGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_grid: cannot open '" + path + "' for writing");

    out << "# phasemod grid v1\n";
    out << "# x_name=" << grid.x_name << "\n";
    out << "# y_name=" << grid.y_name << "\n";
    out << "# nx=" << grid.x.size() << "\n";
    out << "# ny=" << grid.y.size() << "\n";
    for (const auto& [key, value] : grid.metadata) out << "# " << key << "=" << value << "\n";
    out << "# columns=x,y,z\n";
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
        for (std::size_t iy = 0; iy < grid.y.size(); ++iy) {
            const double z = ix < grid.z.size() && iy < grid.z[ix].size() ? grid.z[ix][iy] : 0.0;
            out << format_double(grid.x[ix]) << ',' << format_double(grid.y[iy]) << ','
                << format_double(z) << '\n';
        }
    }
    if (!out) throw io_error("write_grid: write to '" + path + "' failed");
    out.close();

    std::ofstream sum(summary_path(path));
    if (!sum) throw io_error("write_grid: cannot open '" + summary_path(path) + "' for writing");
    sum << "# phasemod summary v1\n";
    sum << "# x_name=" << grid.x_name << "\n";
    for (const auto& [key, value] : grid.metadata) sum << "# " << key << "=" << value << "\n";
    sum << "# columns=x,value,uncertainty,flag,analytic\n";
    for (const auto& row : grid.summary) {
        sum << format_double(row.x) << ',' << format_double(row.value) << ','
            << format_double(row.uncertainty) << ',' << row.flag << ','
            << format_double(row.analytic) << '\n';
    }
    if (!sum) throw io_error("write_grid: write to '" + summary_path(path) + "' failed");
}

SweepGrid read_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_grid: cannot open '" + path + "'");

    SweepGrid grid;
    std::size_t nx = 0, ny = 0;
    std::string line;
    std::vector<double> zs;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) continue; // banner line
            const std::string key = body.substr(0, eq);
            const std::string value = body.substr(eq + 1);
            if (key == "x_name") grid.x_name = value;
            else if (key == "y_name") grid.y_name = value;
            else if (key == "nx") nx = std::stoul(value);
            else if (key == "ny") ny = std::stoul(value);
            else if (key != "columns") grid.metadata[key] = value;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 3) throw io_error("read_grid: '" + path + "': expected 3 columns");
        xs.push_back(parse_double(cells[0], path));
        ys.push_back(parse_double(cells[1], path));
        zs.push_back(parse_double(cells[2], path));
    }
    if (zs.size() != nx * ny)
        throw io_error("read_grid: '" + path + "': row count does not match nx*ny");
    grid.x.resize(nx);
    grid.y.resize(ny);
    grid.z.assign(nx, std::vector<double>(ny, 0.0));
    for (std::size_t ix = 0; ix < nx; ++ix) {
        grid.x[ix] = xs[ix * ny];
        for (std::size_t iy = 0; iy < ny; ++iy) {
            if (ix == 0) grid.y[iy] = ys[iy];
            grid.z[ix][iy] = zs[ix * ny + iy];
        }
    }

    std::ifstream sum(summary_path(path));
    if (sum) {
        while (std::getline(sum, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto cells = split(line, ',');
            if (cells.size() != 5)
                throw io_error("read_grid: summary '" + summary_path(path) +
                               "': expected 5 columns");
            SweepGrid::SummaryRow row;
            row.x = parse_double(cells[0], path);
            row.value = parse_double(cells[1], path);
            row.uncertainty = parse_double(cells[2], path);
            row.flag = static_cast<int>(parse_double(cells[3], path));
            row.analytic = parse_double(cells[4], path);
            grid.summary.push_back(row);
        }
    }
    return grid;
}

} // namespace phasemod
