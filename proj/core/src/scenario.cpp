#include "reeb/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "reeb/util.hpp"

namespace reeb {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct KeyValue {
    std::string value;
    int line, col;
};

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    std::map<std::string, KeyValue> kv;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioParseError("expected key = value", lineno,
                                     static_cast<int>(first) + 1);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ScenarioParseError("empty key", lineno, 1);
        if (value.empty())
            throw ScenarioParseError("empty value for key '" + key + "'", lineno,
                                     static_cast<int>(eq) + 2);
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (kv.count(key))
            throw ScenarioParseError("duplicate key '" + key + "'", lineno, 1);
        kv[key] = {value, lineno, static_cast<int>(eq) + 2};
    }

    Scenario s;
    auto take = [&](const char* key) -> const KeyValue* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto as_double = [&](const KeyValue& v, const char* key) -> double {
        try {
            std::size_t used = 0;
            const double d = std::stod(v.value, &used);
            if (used != v.value.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ScenarioParseError(std::string("invalid number for '") + key + "'", v.line,
                                     v.col);
        }
    };
    auto as_int = [&](const KeyValue& v, const char* key) -> long long {
        try {
            std::size_t used = 0;
            const long long d = std::stoll(v.value, &used);
            if (used != v.value.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ScenarioParseError(std::string("invalid integer for '") + key + "'", v.line,
                                     v.col);
        }
    };

    const KeyValue* v;
    if (!(v = take("schema_version")))
        throw ScenarioParseError("missing mandatory key 'schema_version'", 1, 1);
    s.schema_version = static_cast<int>(as_int(*v, "schema_version"));
    if (s.schema_version != 1)
        throw ScenarioParseError("unsupported schema_version " + v->value, v->line, v->col);

    if ((v = take("n"))) s.n = static_cast<int>(as_int(*v, "n"));
    if ((v = take("regime"))) s.regime = v->value;
    if ((v = take("stages"))) s.stages = split_list(v->value);
    if ((v = take("seed"))) s.seed = static_cast<std::uint64_t>(as_int(*v, "seed"));
    if ((v = take("out_dir"))) s.out_dir = v->value;
    if ((v = take("T"))) s.T = as_double(*v, "T");
    if ((v = take("a"))) s.a = as_double(*v, "a");
    if ((v = take("r_inner"))) s.r_inner = as_double(*v, "r_inner");
    if ((v = take("grid_size"))) s.grid_size = static_cast<int>(as_int(*v, "grid_size"));
    if ((v = take("abs_tol"))) s.abs_tol = as_double(*v, "abs_tol");
    if ((v = take("rel_tol"))) s.rel_tol = as_double(*v, "rel_tol");
    if ((v = take("kappa_over_2pi"))) s.kappa_over_2pi = as_double(*v, "kappa_over_2pi");
    if ((v = take("kam_deltas"))) {
        s.kam_deltas.clear();
        for (const auto& item : split_list(v->value)) {
            try {
                s.kam_deltas.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ScenarioParseError("invalid number in 'kam_deltas'", v->line, v->col);
            }
        }
    }
    if ((v = take("dioph_alpha"))) s.dioph_alpha = as_double(*v, "dioph_alpha");
    if ((v = take("dioph_beta"))) s.dioph_beta = as_double(*v, "dioph_beta");
    if ((v = take("dioph_K"))) s.dioph_K = as_int(*v, "dioph_K");
    if ((v = take("appc_delta"))) s.appc_delta = as_double(*v, "appc_delta");
    if ((v = take("probe_radius"))) s.probe_radius = as_double(*v, "probe_radius");
    if ((v = take("n_probes"))) s.n_probes = static_cast<int>(as_int(*v, "n_probes"));
    if ((v = take("morse_C"))) s.morse_C = as_double(*v, "morse_C");
    if ((v = take("epsilon_trim_factor")))
        s.epsilon_trim_factor = as_double(*v, "epsilon_trim_factor");

    static const char* known[] = {
        "schema_version", "n", "regime", "stages", "seed", "out_dir", "T", "a", "r_inner",
        "grid_size", "abs_tol", "rel_tol", "kappa_over_2pi", "kam_deltas", "dioph_alpha",
        "dioph_beta", "dioph_K", "appc_delta", "probe_radius", "n_probes", "morse_C",
        "epsilon_trim_factor"};
    for (const auto& [key, val] : kv) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw ScenarioParseError("unknown key '" + key + "'", val.line, 1);
    }

    s.validate();
    return s;
}

void Scenario::validate() const {
    if (n < 1) throw std::invalid_argument("scenario: n must be a positive integer");
    if (regime != "thm1" && regime != "thm2")
        throw std::invalid_argument("scenario: regime must be thm1 or thm2");
    static const char* stage_names[] = {"build", "flow", "certify", "kam", "morse", "appc"};
    for (const auto& st : stages) {
        if (std::find_if(std::begin(stage_names), std::end(stage_names),
                         [&](const char* k) { return st == k; }) == std::end(stage_names))
            throw std::invalid_argument("scenario: unknown stage '" + st + "'");
    }
    if (!(T < 0.0)) throw std::invalid_argument("scenario: T must be negative");
    if (!(a > 0.0)) throw std::invalid_argument("scenario: a must be positive");
    if (!(r_inner > 0.0 && r_inner < 0.5))
        throw std::invalid_argument("scenario: r_inner must lie in (0, 1/2)");
    if (grid_size < 100) throw std::invalid_argument("scenario: grid_size must be >= 100");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw std::invalid_argument("scenario: integrator tolerances must be positive");
    if (!(kappa_over_2pi > 0.0 && kappa_over_2pi < 1.0))
        throw std::invalid_argument("scenario: kappa_over_2pi must lie in (0,1)");
    if (kam_deltas.empty())
        throw std::invalid_argument("scenario: kam_deltas must not be empty");
    for (double d : kam_deltas)
        if (d < 0.0) throw std::invalid_argument("scenario: kam_deltas must be non-negative");
    if (!std::is_sorted(kam_deltas.begin(), kam_deltas.end()))
        throw std::invalid_argument("scenario: kam_deltas must be sorted ascending");
    if (!(dioph_alpha > 0.0) || !(dioph_beta > 0.0) || dioph_K < 100)
        throw std::invalid_argument("scenario: Diophantine parameters out of range");
    if (!(appc_delta >= 0.0)) throw std::invalid_argument("scenario: appc_delta must be >= 0");
    if (!(probe_radius > 0.0 && probe_radius < r_inner))
        throw std::invalid_argument("scenario: probe_radius must lie in (0, r_inner)");
    if (n_probes < 1) throw std::invalid_argument("scenario: n_probes must be positive");
    if (!(morse_C > 0.0)) throw std::invalid_argument("scenario: morse_C must be positive");
    if (!(epsilon_trim_factor > 0.0 && epsilon_trim_factor < 0.25))
        throw std::invalid_argument("scenario: epsilon_trim_factor must lie in (0, 1/4)");
}

std::string Scenario::canonical_text() const {
    std::ostringstream os;
    os << "schema_version = " << schema_version << "\n";
    os << "n = " << n << "\n";
    os << "regime = \"" << regime << "\"\n";
    os << "stages = \"";
    for (std::size_t i = 0; i < stages.size(); ++i)
        os << stages[i] << (i + 1 < stages.size() ? "," : "");
    os << "\"\n";
    os << "seed = " << seed << "\n";
    os << "out_dir = \"" << out_dir << "\"\n";
    os << "T = " << format_double(T) << "\n";
    os << "a = " << format_double(a) << "\n";
    os << "r_inner = " << format_double(r_inner) << "\n";
    os << "grid_size = " << grid_size << "\n";
    os << "abs_tol = " << format_double(abs_tol) << "\n";
    os << "rel_tol = " << format_double(rel_tol) << "\n";
    os << "kappa_over_2pi = " << format_double(kappa_over_2pi) << "\n";
    os << "kam_deltas = \"";
    for (std::size_t i = 0; i < kam_deltas.size(); ++i)
        os << format_double(kam_deltas[i]) << (i + 1 < kam_deltas.size() ? "," : "");
    os << "\"\n";
    os << "dioph_alpha = " << format_double(dioph_alpha) << "\n";
    os << "dioph_beta = " << format_double(dioph_beta) << "\n";
    os << "dioph_K = " << dioph_K << "\n";
    os << "appc_delta = " << format_double(appc_delta) << "\n";
    os << "probe_radius = " << format_double(probe_radius) << "\n";
    os << "n_probes = " << n_probes << "\n";
    os << "morse_C = " << format_double(morse_C) << "\n";
    os << "epsilon_trim_factor = " << format_double(epsilon_trim_factor) << "\n";
    return os.str();
}

std::uint64_t Scenario::hash() const { return fnv1a(canonical_text()); }

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
    out << s.canonical_text();
}

}  // namespace reeb
