#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "reeb/scenario.hpp"

namespace reeb {

// ---------------------------------------------------------------------------
// Experiment orchestration: runs the requested stages in dependency order
// (build -> flow -> certify -> kam -> morse -> appc), writes JSON/CSV
// artifacts into the scenario's output directory and returns a run record.
// A failing stage stops the run but leaves earlier artifacts in place.
// ---------------------------------------------------------------------------

struct StageStatus {
    std::string name;
    bool ok = false;
    std::string error;  // empty on success
    double wall_ms = 0.0;
    std::vector<std::string> artifacts;
};

struct RunRecord {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    std::vector<StageStatus> stages;
    std::string out_dir;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

struct RunOptions {
    bool transcript = false;                // also write the certificate transcript
    std::filesystem::path schema_dir = {};  // where schemas/ lives; searched if empty
};

// Executes the scenario's stage list (or `only_stages` when non-empty).
// Acquires the output-directory lock for the duration of the run.
RunRecord run_scenario(const Scenario& s, const RunOptions& opt = {},
                       const std::vector<std::string>& only_stages = {});

// Figure-data export from a completed run; the stage producing the data must
// have succeeded.  Known ids: "f1f2", "morse-levels", "blocks".
// Returns the paths written.
std::vector<std::filesystem::path> export_figure_data(const Scenario& s, const RunRecord& record,
                                                      const std::string& figure_id);

RunRecord load_run_record(const std::filesystem::path& out_dir);

}  // namespace reeb
