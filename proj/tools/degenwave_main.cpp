#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "degenwave/experiments.hpp"

using namespace degenwave;

namespace {

int run_one(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, bool dry_run, int threads, bool plot_data) {
    ExperimentConfig cfg = config_path.empty()
                               ? parse_config_text("experiment = " + experiment + "\n")
                               : parse_config(config_path);
    if (cfg.experiment != experiment)
        throw ValidationError("config declares experiment '" + cfg.experiment +
                              "' but the subcommand is '" + experiment + "'");
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    cfg.plot_data = plot_data;
    if (dry_run) {
        std::cout << dump_config(cfg);
        return 0;
    }
    const ExperimentReport rep = run_experiment(cfg);
    for (const auto& v : rep.verdicts) {
        std::printf("%-44s %s  value=%.6g admissible=[%.6g, %.6g]\n", v.name.c_str(),
                    v.pass ? "PASS" : "FAIL", v.value, v.lo, v.hi);
    }
    if (cfg.plot_data) {
        for (const auto& csv : rep.csv_files) {
            const CsvTable t = CsvTable::read(csv);
            const int tc = t.column("t");
            if (tc < 0) continue;
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                if (static_cast<int>(c) == tc) continue;
                const std::string path = csv.substr(0, csv.size() - 4) + "_" + t.columns[c] + ".dat";
                std::ofstream out(path);
                for (const auto& r : t.rows)
                    out << format_double(r[tc]) << " " << format_double(r[c]) << "\n";
            }
        }
    }
    std::cout << (rep.pass() ? "all verdicts pass" : "verdict failure") << "; report at "
              << cfg.output_dir << "/report.json\n";
    return rep.pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"degenwave: degenerating wave packets and 2.5D electron/Hall MHD experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool dry_run = false, plot_data = false;
    int threads = 0;

    const std::vector<std::string> experiments = {"rays",        "packet_validate",
                                                  "norm_growth", "degeneration",
                                                  "fradiss",     "hall_growth",
                                                  "nonlinear_demo"};
    for (const auto& name : experiments) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "config file (sectioned key=value)");
        sub->add_option("--out", out_dir, "output directory for CSVs and report.json");
        sub->add_option("--threads", threads, "workers across the lambda sweep");
        sub->add_flag("--dry-run", dry_run, "print the resolved config and exit");
        sub->add_flag("--plot-data", plot_data, "emit two-column .dat files per CSV column");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string chosen = app.get_subcommands().front()->get_name();
    try {
        return run_one(chosen, config_path, out_dir, dry_run, threads, plot_data);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
