#pragma once

#include <map>
#include <string>
#include <vector>

#include "degenwave/solver.hpp"

namespace degenwave {

// Minimal CSV table: "# degenwave-csv v1" header, optional "# key=value"
// metadata lines, one header row, numeric cells.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> meta;

    int column(const std::string& name) const;  // -1 if absent
    std::vector<double> series(const std::string& name) const;

    void write(const std::string& path) const;
    static CsvTable read(const std::string& path);
};

CsvTable records_to_table(const std::vector<DiagnosticsRecord>& records,
                          const std::vector<double>& s_list, const std::vector<double>& p_list);

std::string format_double(double v);

}  // namespace degenwave
