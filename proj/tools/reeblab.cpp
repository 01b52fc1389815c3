// reeblab: build book-sum open books, run their flows, certify lower bounds
// on the boundary-component count of global surfaces of section, and probe
// persistence under perturbation.  Stages write JSON/CSV artifacts into the
// scenario's output directory.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reeb/harness.hpp"
#include "reeb/scenario.hpp"

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out_override;
    std::optional<std::uint64_t> seed_override;
    bool transcript = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "scenario file (key = value text)")
        ->required();
    cmd->add_option("--out", args.out_override, "override the scenario's output directory");
    auto* seed = cmd->add_option("--seed", "override the scenario's PRNG seed");
    seed->each([&args](const std::string& v) { args.seed_override = std::stoull(v); });
    cmd->add_flag("--transcript", args.transcript,
                  "also write a human-readable certificate transcript");
}

reeb::Scenario load_with_overrides(const CommonArgs& args) {
    reeb::Scenario s = reeb::load_scenario(args.scenario_path);
    if (!args.out_override.empty()) s.out_dir = args.out_override;
    if (args.seed_override) s.seed = *args.seed_override;
    s.validate();
    return s;
}

int run_stages(const CommonArgs& args, const std::vector<std::string>& stages) {
    const reeb::Scenario s = load_with_overrides(args);
    reeb::RunOptions opt;
    opt.transcript = args.transcript;
    const reeb::RunRecord record = reeb::run_scenario(s, opt, stages);
    bool all_ok = true;
    for (const auto& st : record.stages) {
        std::printf("%-8s %s (%.1f ms)%s%s\n", st.name.c_str(), st.ok ? "ok" : "FAILED",
                    st.wall_ms, st.error.empty() ? "" : ": ", st.error.c_str());
        if (!st.ok) all_ok = false;
    }
    std::printf("run record: %s/run_record.json (scenario %s)\n", record.out_dir.c_str(),
                record.scenario_hash.c_str());
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reeb flows on book-summed open books: construction, certification, persistence"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string figure_id;

    std::vector<std::pair<std::string, std::string>> verbs = {
        {"build", "construct the chain, decompose it, validate the contact profile"},
        {"flow", "integrate the chart flows and locate the handle orbit"},
        {"certify", "certify the boundary-component lower bound"},
        {"kam", "twist-map rotation numbers and invariant circles"},
        {"morse", "handle-annulus model verification and level sets"},
        {"appc", "binding-orbit continuation and transversality margin"},
    };
    for (const auto& [name, desc] : verbs) add_common(app.add_subcommand(name, desc), args);
    add_common(app.add_subcommand("all", "run every stage in dependency order"), args);
    auto* exp = app.add_subcommand("export", "export figure data from a completed run");
    add_common(exp, args);
    exp->add_option("figure", figure_id, "figure id: f1f2, morse-levels, blocks")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "export") {
            const reeb::Scenario s = load_with_overrides(args);
            const reeb::RunRecord record = reeb::load_run_record(s.out_dir);
            const auto written = reeb::export_figure_data(s, record, figure_id);
            for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
            return 0;
        }
        if (verb == "all")
            return run_stages(args, {"build", "flow", "certify", "kam", "morse", "appc"});
        return run_stages(args, {verb});
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
