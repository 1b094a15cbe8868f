#include "aspdc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace aspdc::io {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_pgm16(const std::filesystem::path& path, const RealMap& intensity) {
    const auto& g = intensity.grid;
    const double peak = *std::max_element(intensity.values.begin(), intensity.values.end());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << g.n << " " << g.n << "\n65535\n";
    for (double v : intensity.values) {
        const double s = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
        const auto q = static_cast<unsigned>(s * 65535.0 + 0.5);
        out.put(static_cast<char>((q >> 8) & 0xff));
        out.put(static_cast<char>(q & 0xff));
    }
}

void write_map_csv(const std::filesystem::path& path, const RealMap& map) {
    std::string text;
    const auto n = map.grid.n;
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            if (ix) text += ',';
            text += format_number(map.at(ix, iy));
        }
        text += '\n';
    }
    write_text(path, text);
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            ++col;
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            const std::string t = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
                throw ParameterError(path.string() + ":" + std::to_string(lineno) + ": column " +
                                     std::to_string(col) + " is not a number");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

RealMap read_square_csv(const std::filesystem::path& path, double pitch) {
    const auto rows = read_csv_rows(path);
    const std::size_t n = rows.size();
    for (std::size_t r = 0; r < n; ++r)
        if (rows[r].size() != n)
            throw ParameterError(path.string() + ":" + std::to_string(r + 1) + ": expected " + std::to_string(n) +
                                 " columns for a square grid, found " + std::to_string(rows[r].size()));
    RealMap map(GridSpec(n, pitch));
    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix) map.at(ix, iy) = rows[iy][ix];
    return map;
}

} // namespace aspdc::io
