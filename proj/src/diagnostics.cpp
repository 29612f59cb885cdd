#include "degenwave/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace degenwave {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::series(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ValidationError("csv column '" + name + "' not found");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "# degenwave-csv v1\n";
    for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << format_double(r[i]) << (i + 1 < r.size() ? "," : "\n");
    }
}

CsvTable CsvTable::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                t.meta[key] = line.substr(eq + 1);
            }
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        if (!have_header) {
            while (std::getline(row, cell, ',')) t.columns.push_back(cell);
            have_header = true;
            continue;
        }
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != t.columns.size())
            throw ParseError("ragged csv row in " + path);
        t.rows.push_back(std::move(vals));
    }
    return t;
}

namespace {
std::string norm_label(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream s;
    s << v;
    return s.str();
}
}  // namespace

CsvTable records_to_table(const std::vector<DiagnosticsRecord>& records,
                          const std::vector<double>& s_list, const std::vector<double>& p_list) {
    CsvTable t;
    t.columns = {"t", "l2_b", "l2_u", "energy", "energy_rate_measured", "energy_rate_predicted",
                 "test_bb", "test_uu", "visc_pairing_accum", "omega_mean", "tail_fraction"};
    for (double s : s_list) t.columns.push_back("hs" + norm_label(s) + "_b");
    for (double p : p_list) t.columns.push_back("lp" + norm_label(p) + "_bz");
    for (const auto& r : records) {
        std::vector<double> row = {r.t,
                                   r.l2_b,
                                   r.l2_u,
                                   r.energy,
                                   r.energy_rate_measured,
                                   r.energy_rate_predicted,
                                   r.test_bb,
                                   r.test_uu,
                                   r.visc_pairing_accum,
                                   r.omega_mean,
                                   r.tail_fraction};
        for (double s : s_list) row.push_back(r.hs_b.count(s) ? r.hs_b.at(s) : 0.0);
        for (double p : p_list) row.push_back(r.lp_bz.count(p) ? r.lp_bz.at(p) : 0.0);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace degenwave
