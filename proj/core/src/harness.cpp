#include "reeb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "reeb/contact.hpp"
#include "reeb/flow.hpp"
#include "reeb/kam.hpp"
#include "reeb/linking.hpp"
#include "reeb/morse.hpp"
#include "reeb/open_book.hpp"
#include "reeb/schema.hpp"
#include "reeb/util.hpp"

namespace reeb {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_json_artifact(const json& doc, const fs::path& path, const fs::path& schema_dir) {
    validate_artifact(doc, schema_dir);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write artifact: " + path.string());
    out << doc.dump(2) << "\n";
}

int annuli_for(const Scenario& s) {
    // thm1 chains carry n+1 annuli; thm2 chains carry 3n+2
    return s.regime == "thm1" ? s.n + 1 : 3 * s.n + 2;
}

struct StageContext {
    const Scenario& s;
    fs::path out;
    fs::path schema_dir;
    std::vector<std::string> artifacts;

    void emit(const json& doc, const std::string& filename) {
        write_json_artifact(doc, out / filename, schema_dir);
        artifacts.push_back(filename);
    }
};

// ---------------------------------------------------------------- build ----
void stage_build(StageContext& ctx) {
    const Scenario& s = ctx.s;
    const BookSumChain chain = build_chain(make_base_book(), annuli_for(s));
    const BlockDecomposition dec = decompose(chain);

    json blocks = json::array();
    for (const auto& b : dec.blocks) {
        blocks.push_back({{"label", b.label},
                          {"tag", b.tag == BlockTag::page_set
                                      ? "page_set"
                                      : b.tag == BlockTag::handle_set ? "handle_set"
                                                                      : "binding_neighborhood"},
                          {"index", b.index},
                          {"position", b.position}});
    }
    json zero_pairs = json::array();
    for (std::size_t i = 0; i < dec.blocks.size(); ++i)
        for (std::size_t j = i + 1; j < dec.blocks.size(); ++j)
            if (dec.zero_link(dec.blocks[i], dec.blocks[j]))
                zero_pairs.push_back({dec.blocks[i].label, dec.blocks[j].label});
    json doc{{"schema", "blocks/v1"},
             {"n", s.n},
             {"regime", s.regime},
             {"summands", dec.summands()},
             {"joins", dec.joins()},
             {"free_labels", chain.free_labels()},
             {"blocks", blocks},
             {"forced_zero_pairs", zero_pairs}};
    ctx.emit(doc, "blocks.json");

    const BindingChart chart = build_profile(s.T, s.a, s.r_inner);
    const double margin = validate_contact(chart, s.grid_size);
    const ReebVelocity inner = reeb_at(chart, s.r_inner / 2.0);
    json contact{{"schema", "contact_report/v1"},
                 {"T", s.T},
                 {"a", s.a},
                 {"r_inner", s.r_inner},
                 {"grid_size", s.grid_size},
                 {"margin", margin},
                 {"margin_positive", margin > 0.0},
                 {"inner_frequencies", {inner.v_theta1, inner.v_theta2}}};
    ctx.emit(contact, "contact_report.json");
}

// ----------------------------------------------------------------- flow ----
void stage_flow(StageContext& ctx) {
    const Scenario& s = ctx.s;
    IntegrateOptions opt;
    opt.abs_tol = s.abs_tol;
    opt.rel_tol = s.rel_tol;

    // monodromy reproduction in the annulus mapping torus
    const AbstractOpenBook annulus = make_annulus_book();
    const auto wrap = mapping_torus_wrap(annulus.monodromy);
    double worst = 0.0;
    const int samples = 100;
    for (int i = 0; i < samples; ++i) {
        const double x = -1.0 + 2.0 * i / (samples - 1);
        const double period = -annulus.monodromy.shift(x);
        auto traj = integrate<3>(mapping_torus_field(), State<3>(x, 0.3, 0.0), period, opt, {wrap},
                                 "mapping_torus");
        const State<3> end = mapping_torus_normalize(annulus.monodromy, traj.back());
        const double expect = wrap_angle(0.3 + annulus.monodromy.twist(x));
        double defect = std::abs(wrap_angle(end[1]) - expect);
        defect = std::min(defect, kTwoPi - defect);
        worst = std::max(worst, defect);
    }

    // binding-chart trajectory and its slope check
    const BindingChart chart = build_profile(s.T, s.a, s.r_inner);
    auto traj = integrate<3>(binding_field(chart), State<3>(0.0, s.r_inner / 2.0, 0.0), 20.0, opt,
                             {}, "binding");
    write_trajectory_csv(ctx.out / "flow_trajectory.csv", traj);
    ctx.artifacts.push_back("flow_trajectory.csv");
    const double slope = (traj.back()[2] - traj.x.front()[2]) / (traj.back()[0] - traj.x.front()[0]);

    // handle saddle orbit of the glued model
    HandleAnnulusModel model;
    model.C = s.morse_C;
    model.epsilon_trim = s.epsilon_trim_factor * s.morse_C;
    Field<2> f2 = [&model](const State<2>& z) -> State<2> {
        const Eigen::Vector2d v = model.field(z[0], z[1]);
        return State<2>(v[0], v[1]);
    };
    IntegrateOptions o2 = opt;
    o2.record = false;
    ReturnMap2 unit_map;
    unit_map.F = [&](const Eigen::Vector2d& z) {
        const auto tr = integrate<2>(f2, State<2>(z[0], z[1]), 1.0, o2);
        return std::make_pair(Eigen::Vector2d(tr.back()[0], tr.back()[1]), 1.0);
    };
    const PeriodicOrbit saddle = find_periodic_orbit(unit_map, {1.46, 0.02}, 1e-9);
    {
        CsvWriter csv(ctx.out / "flow_orbits.csv",
                      {"label", "r", "theta", "period", "mult1_abs", "mult2_abs", "residual"});
        csv.row_mixed({"handle_saddle", format_double(saddle.section_point[0]),
                       format_double(saddle.section_point[1]), format_double(saddle.period),
                       format_double(std::abs(saddle.mult1)), format_double(std::abs(saddle.mult2)),
                       format_double(saddle.residual)});
        ctx.artifacts.push_back("flow_orbits.csv");
    }

    json doc{{"schema", "flow_report/v1"},
             {"monodromy_defect", worst},
             {"monodromy_samples", samples},
             {"binding_slope_measured", slope},
             {"binding_slope_expected", s.a},
             {"saddle", {saddle.section_point[0], saddle.section_point[1]}},
             {"saddle_multiplier_abs", std::abs(saddle.mult1) > 1.0 ? std::abs(saddle.mult1)
                                                                    : std::abs(saddle.mult2)}};
    ctx.emit(doc, "flow_report.json");
}

// -------------------------------------------------------------- certify ----
void stage_certify(StageContext& ctx, bool transcript) {
    const Scenario& s = ctx.s;
    const Regime regime = regime_from_string(s.regime);
    const BookSumChain chain = build_chain(make_base_book(), annuli_for(s));
    const BlockDecomposition dec = decompose(chain);
    const LinkingCertificate cert = certify_lower_bound(dec, regime);
    const int oracle = brute_force_bound(dec, std::min(6, cert.bound + 1), regime);

    // numeric cross-check of the forced-zero rules on the standard embedding
    json checks = json::array();
    if (dec.joins() >= 2) {
        const auto h0 = embedded_handle_orbit(dec, 0);
        const auto core0 = embedded_binding_core(dec, 0);
        const auto core1 = embedded_binding_core(dec, 1);
        const auto p0 = embedded_page_orbit(dec, 0);
        checks.push_back({{"pair", "H0 vs N0 core"},
                          {"rule", "unconstrained"},
                          {"gauss", gauss_link(h0, core0).value}});
        checks.push_back({{"pair", "H0 vs N1 core"},
                          {"rule", "forced_zero"},
                          {"gauss", gauss_link(h0, core1).value}});
        checks.push_back({{"pair", "P0 vs N0 core"},
                          {"rule", "unconstrained"},
                          {"gauss", gauss_link(p0, core0).value}});
    }

    json steps = json::array();
    for (const auto& st : cert.log)
        steps.push_back({{"handle", st.handle},
                         {"allowed", st.allowed},
                         {"excluded_prior", st.excluded_prior}});
    json doc{{"schema", "certificate/v1"},
             {"regime", cert.regime},
             {"n", s.n},
             {"chain_summary", cert.chain_summary},
             {"handle_count", cert.handle_count},
             {"bound", cert.bound},
             {"oracle_bound", oracle},
             {"oracle_agrees", oracle == cert.bound},
             {"witness_replay_ok", replay_witness(cert)},
             {"witness", steps},
             {"embedding_checks", checks}};
    ctx.emit(doc, "certificate.json");

    if (transcript) {
        std::ofstream out(ctx.out / "transcript.txt");
        out << certificate_transcript(cert);
        ctx.artifacts.push_back("transcript.txt");
    }
}

// ------------------------------------------------------------------ kam ----
void stage_kam(StageContext& ctx) {
    const Scenario& s = ctx.s;
    const double kappa = s.kappa_over_2pi * kTwoPi;

    const auto slope_check = diophantine(s.a, s.dioph_alpha, s.dioph_beta, s.dioph_K);
    const ModifiedHamiltonian flat = ModifiedHamiltonian::flat(s.a);
    const ModifiedHamiltonian shaped = ModifiedHamiltonian::with_default_ramp(s.a);
    const double det_flat = nondegeneracy(flat, 0.12, 0.22, 101);
    const double det_shaped = nondegeneracy(shaped, 0.12, 0.22, 101);

    json circles = json::array();
    CircleSearchOptions copt;
    copt.dioph_alpha = s.dioph_alpha;
    copt.dioph_beta = s.dioph_beta;
    copt.dioph_K = s.dioph_K;
    for (double delta : s.kam_deltas) {
        const TwistMap map = make_twist_map(delta, s.seed);
        const InvariantCircle circle = find_invariant_circle(map, kappa, copt);
        circles.push_back({{"delta", delta},
                           {"kappa_over_2pi", kappa / kTwoPi},
                           {"r0", circle.r0},
                           {"modes", circle.modes},
                           {"residual", circle.residual},
                           {"g1_sup", circle.g1_sup},
                           {"g1_deriv_sup", circle.g1_deriv_sup},
                           {"g2_sup", circle.g2_sup},
                           {"g2_deriv_sup", circle.g2_deriv_sup}});
        CsvWriter csv(ctx.out / ("kam_circle_" + format_double(delta) + ".csv"),
                      {"gamma", "r", "theta"});
        for (int i = 0; i <= 512; ++i) {
            const double g = kTwoPi * i / 512;
            csv.row({g, circle.r0 + circle.eval_g1(g), g + circle.eval_g2(g)});
        }
        ctx.artifacts.push_back("kam_circle_" + format_double(delta) + ".csv");
    }

    const TwistMap bare = make_twist_map(0.0, s.seed);
    json rotation = json::array();
    for (double r0 : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        double err = 0.0;
        const double turns = rotation_number(bare, r0, 4096, &err);
        rotation.push_back({{"r0", r0}, {"turns", turns}, {"error_estimate", err}});
    }

    json doc{{"schema", "kam_report/v1"},
             {"slope", s.a},
             {"slope_diophantine_pass", slope_check.pass},
             {"slope_worst_margin", slope_check.worst_margin},
             {"slope_worst_rational", {slope_check.p, slope_check.q}},
             {"hessian_det_flat", det_flat},
             {"hessian_det_shaped", det_shaped},
             {"rotation_numbers", rotation},
             {"invariant_circles", circles}};
    ctx.emit(doc, "kam_report.json");
}

// ---------------------------------------------------------------- morse ----
void stage_morse(StageContext& ctx) {
    const Scenario& s = ctx.s;
    HandleAnnulusModel model;
    model.C = s.morse_C;
    model.epsilon_trim = s.epsilon_trim_factor * s.morse_C;
    IntegrateOptions opt;
    opt.abs_tol = s.abs_tol;
    opt.rel_tol = s.rel_tol;

    const TrimReport trim = trim_domain(model);
    const MorseProperties props = verify_properties(model, 20, opt);

    json rot = json::array();
    for (const auto& [r, turns] : props.rotation_samples)
        rot.push_back({{"r", r}, {"turns", turns}});
    json doc{{"schema", "morse_report/v1"},
             {"C", model.C},
             {"epsilon_trim", model.epsilon_trim},
             {"trim_level", trim.level},
             {"trim_min_grad", trim.min_grad_norm},
             {"trim_min_discontinuity_dist", trim.min_discontinuity_dist},
             {"saddle", {props.saddle_location[0], props.saddle_location[1]}},
             {"multiplier_expanding", std::abs(props.mult_expanding)},
             {"multiplier_contracting", std::abs(props.mult_contracting)},
             {"multiplier_rel_error", props.mult_rel_error},
             {"max_rotation_error", props.max_rotation_error},
             {"boundary_displacement", props.boundary_displacement},
             {"energy_drift_per_time", props.energy_drift_per_time},
             {"saddle_unique", props.saddle_unique},
             {"rotation_samples", rot}};
    ctx.emit(doc, "morse_report.json");

    // level polylines around the saddle value and through the annulus band
    const std::vector<double> levels = {trim.level, model.saddle_value(),
                                        model.saddle_value() + model.epsilon_trim,
                                        morse_h0(model, 0.0, 0.0), morse_h0(model, -0.5, 0.0),
                                        morse_h0(model, 0.5, 0.0)};
    CsvWriter csv(ctx.out / "morse_levels.csv", {"polyline", "level", "r", "theta"});
    const auto lines = morse_level_sets(model, levels);
    int id = 0;
    for (const auto& line : lines) {
        for (const auto& p : line.points)
            csv.row({static_cast<double>(id), line.level, p[0], p[1]});
        ++id;
    }
    ctx.artifacts.push_back("morse_levels.csv");

    CsvWriter fcsv(ctx.out / "morse_field.csv", {"r", "theta", "vr", "vtheta", "h0"});
    for (int i = 0; i <= 70; ++i) {
        for (int j = 0; j <= 40; ++j) {
            const double r = -1.0 + 3.5 * i / 70.0;
            const double th = -kPi + kTwoPi * j / 40.0;
            if (!model.in_domain(r, th)) continue;
            const Eigen::Vector2d v = model.field(r, th);
            fcsv.row({r, th, v[0], v[1], model.h0(r, th)});
        }
    }
    ctx.artifacts.push_back("morse_field.csv");
}

// ----------------------------------------------------------------- appc ----
void stage_appc(StageContext& ctx) {
    const Scenario& s = ctx.s;
    IntegrateOptions opt;
    opt.abs_tol = s.abs_tol;
    opt.rel_tol = s.rel_tol;
    const BindingChart chart = build_profile(s.T, s.a, s.r_inner);
    const BindingPerturbation pert = make_binding_perturbation(s.seed, 0.8 * s.r_inner);

    const BindingContinuation c1 = continue_binding_orbit(chart, pert, s.appc_delta, opt);
    const BindingContinuation c2 = continue_binding_orbit(chart, pert, s.appc_delta / 2.0, opt);
    const double ratio = c1.displacement > 0.0 ? c2.displacement / c1.displacement : 0.0;

    const TransversalityReport margin = transversality_margin(
        chart, pert, s.appc_delta, s.probe_radius, s.n_probes, s.seed + 1, opt);
    const TransversalityReport margin0 =
        transversality_margin(chart, pert, 0.0, s.probe_radius, s.n_probes, s.seed + 1, opt);

    json doc{{"schema", "appc_report/v1"},
             {"delta", s.appc_delta},
             {"continuation_ok", c1.success},
             {"residual", c1.residual},
             {"displacement", c1.displacement},
             {"half_delta_displacement", c2.displacement},
             {"displacement_ratio", ratio},
             {"period", c1.period},
             {"margin", margin.margin},
             {"margin_probes", margin.probes_used},
             {"margin_delta_zero", margin0.margin},
             {"normalized_form",
              {margin0.normalized_form(0, 0), margin0.normalized_form(0, 1),
               margin0.normalized_form(1, 0), margin0.normalized_form(1, 1)}},
             {"slope_a", s.a}};
    ctx.emit(doc, "appc_report.json");
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
    json st = json::array();
    for (const auto& s : stages)
        st.push_back({{"name", s.name},
                      {"ok", s.ok},
                      {"error", s.error},
                      {"wall_ms", s.wall_ms},
                      {"artifacts", s.artifacts}});
    return json{{"schema", "run_record/v1"},
                {"scenario_hash", scenario_hash},
                {"seed", seed},
                {"out_dir", out_dir},
                {"stages", st}};
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
    RunRecord r;
    r.scenario_hash = j.at("scenario_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.out_dir = j.at("out_dir").get<std::string>();
    for (const auto& st : j.at("stages")) {
        StageStatus s;
        s.name = st.at("name").get<std::string>();
        s.ok = st.at("ok").get<bool>();
        s.error = st.at("error").get<std::string>();
        s.wall_ms = st.at("wall_ms").get<double>();
        for (const auto& a : st.at("artifacts")) s.artifacts.push_back(a.get<std::string>());
        r.stages.push_back(std::move(s));
    }
    return r;
}

RunRecord run_scenario(const Scenario& s, const RunOptions& opt,
                       const std::vector<std::string>& only_stages) {
    s.validate();
    const fs::path out(s.out_dir);
    DirLock lock(out);

    fs::path schema_dir = opt.schema_dir;
    if (schema_dir.empty()) schema_dir = find_schema_file("run_record.v1").parent_path();

    RunRecord record;
    record.scenario_hash = format_double(0);  // replaced below
    char hashbuf[24];
    std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                  static_cast<unsigned long long>(s.hash()));
    record.scenario_hash = hashbuf;
    record.seed = s.seed;
    record.out_dir = s.out_dir;

    write_scenario(s, out / "scenario.resolved");

    static const std::vector<std::string> order = {"build", "flow", "certify",
                                                   "kam",   "morse", "appc"};
    const std::vector<std::string>& wanted = only_stages.empty() ? s.stages : only_stages;
    bool failed = false;
    for (const auto& stage : order) {
        if (std::find(wanted.begin(), wanted.end(), stage) == wanted.end()) continue;
        StageStatus st;
        st.name = stage;
        if (failed) {
            st.error = "skipped: an earlier stage failed";
            record.stages.push_back(st);
            continue;
        }
        StageContext ctx{s, out, schema_dir, {}};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (stage == "build")
                stage_build(ctx);
            else if (stage == "flow")
                stage_flow(ctx);
            else if (stage == "certify")
                stage_certify(ctx, opt.transcript);
            else if (stage == "kam")
                stage_kam(ctx);
            else if (stage == "morse")
                stage_morse(ctx);
            else if (stage == "appc")
                stage_appc(ctx);
            st.ok = true;
        } catch (const std::exception& e) {
            st.ok = false;
            st.error = e.what();
            failed = true;
        }
        const auto t1 = std::chrono::steady_clock::now();
        st.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        st.artifacts = ctx.artifacts;
        record.stages.push_back(std::move(st));
    }

    write_json_artifact(record.to_json(), out / "run_record.json", schema_dir);
    return record;
}

std::vector<fs::path> export_figure_data(const Scenario& s, const RunRecord& record,
                                         const std::string& figure_id) {
    const fs::path out(s.out_dir);
    auto stage_ok = [&](const std::string& name) {
        for (const auto& st : record.stages)
            if (st.name == name && st.ok) return true;
        return false;
    };
    std::vector<fs::path> written;
    if (figure_id == "f1f2") {
        if (!stage_ok("build")) throw std::runtime_error("figure f1f2 needs the build stage");
        const BindingChart chart = build_profile(s.T, s.a, s.r_inner);
        const fs::path p = out / "fig_f1f2.csv";
        CsvWriter csv(p, {"r", "f1", "f2"});
        for (int i = 0; i <= 1000; ++i) {
            const double r = static_cast<double>(i) / 1000.0;
            csv.row({r, chart.f1(r), chart.f2(r)});
        }
        written.push_back(p);
    } else if (figure_id == "morse-levels") {
        if (!stage_ok("morse"))
            throw std::runtime_error("figure morse-levels needs the morse stage");
        const fs::path src = out / "morse_levels.csv";
        if (!fs::exists(src)) throw std::runtime_error("morse stage artifact missing");
        const fs::path p = out / "fig_morse-levels.csv";
        fs::copy_file(src, p, fs::copy_options::overwrite_existing);
        written.push_back(p);
    } else if (figure_id == "blocks") {
        if (!stage_ok("build")) throw std::runtime_error("figure blocks needs the build stage");
        const BookSumChain chain = build_chain(make_base_book(), annuli_for(s));
        const BlockDecomposition dec = decompose(chain);
        const fs::path p = out / "fig_blocks.csv";
        CsvWriter csv(p, {"label", "tag", "index", "x_lo", "x_hi"});
        for (const auto& b : dec.blocks) {
            const double lo = b.position, hi = b.position + 1.0;
            const char* tag = b.tag == BlockTag::page_set
                                  ? "P"
                                  : b.tag == BlockTag::handle_set ? "H" : "N";
            csv.row_mixed({b.label, tag, std::to_string(b.index), format_double(lo),
                           format_double(hi)});
        }
        written.push_back(p);
    } else {
        throw std::invalid_argument("unknown figure id: " + figure_id);
    }
    return written;
}

RunRecord load_run_record(const fs::path& out_dir) {
    std::ifstream in(out_dir / "run_record.json");
    if (!in) throw std::runtime_error("no run record in " + out_dir.string());
    json j;
    in >> j;
    return RunRecord::from_json(j);
}

}  // namespace reeb
