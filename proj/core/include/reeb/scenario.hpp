#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reeb {

// ---------------------------------------------------------------------------
// Scenario files: flat, versioned key = value text (strings quoted, # starts
// a comment).  Parse errors carry line and column.
// ---------------------------------------------------------------------------

struct ScenarioParseError : std::runtime_error {
    int line, column;
    ScenarioParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ")"),
          line(line_),
          column(col_) {}
};

struct Scenario {
    int schema_version = 1;
    int n = 1;
    std::string regime = "thm1";
    std::vector<std::string> stages = {"build", "certify"};
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    // binding chart
    double T = -6.283185307179586476925286766559;
    double a = 1.4142135623730951;
    double r_inner = 0.25;
    int grid_size = 10000;

    // integrator
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;

    // twist-map persistence stage
    double kappa_over_2pi = 0.29289321881345254;  // (2 - sqrt 2)/2
    std::vector<double> kam_deltas = {1e-5, 1e-4, 1e-3};
    double dioph_alpha = 0.2;
    double dioph_beta = 2.0;
    long dioph_K = 10000;

    // binding continuation stage
    double appc_delta = 1e-4;
    double probe_radius = 0.05;
    int n_probes = 1000;

    // handle-annulus model stage
    double morse_C = 2.4674011002723395;  // pi^2/4
    double epsilon_trim_factor = 0.1;

    // canonical key=value text (sorted keys), used for hashing and echoing
    std::string canonical_text() const;
    std::uint64_t hash() const;
    void validate() const;  // throws std::invalid_argument
};

Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(const Scenario& s, const std::filesystem::path& path);

}  // namespace reeb
