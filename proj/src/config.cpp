#include "snnbp/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <stdexcept>

#include "snnbp/io.hpp"

namespace snnbp {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (start <= raw.size()) {
        const auto comma = raw.find(',', start);
        const auto end = (comma == std::string::npos) ? raw.size() : comma;
        const std::string piece = trim(raw.substr(start, end - start));
        if (!piece.empty()) parts.push_back(piece);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return parts;
}

double parse_f64(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE) {
        throw std::invalid_argument(key + ": expected a real number, got '" + raw + "'");
    }
    return v;
}

std::int64_t parse_i64(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(raw.c_str(), &end, 10);
    if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE) {
        throw std::invalid_argument(key + ": expected an integer, got '" + raw + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& raw) {
    if (!raw.empty() && raw[0] == '-') {
        throw std::invalid_argument(key + ": expected an unsigned integer, got '" + raw + "'");
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
    if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE) {
        throw std::invalid_argument(key + ": expected an unsigned integer, got '" + raw + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "on" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "off" || raw == "no") return false;
    throw std::invalid_argument(key + ": expected a boolean, got '" + raw + "'");
}

enum class FieldType { f64, i64, u64, boolean, text, int_list, i64_list };

struct FieldSpec {
    const char* key;
    FieldType type;
    const char* preset;
};

void check_type(const FieldSpec& field, const std::string& raw) {
    switch (field.type) {
        case FieldType::f64:
            parse_f64(field.key, raw);
            break;
        case FieldType::i64:
            parse_i64(field.key, raw);
            break;
        case FieldType::u64:
            parse_u64(field.key, raw);
            break;
        case FieldType::boolean:
            parse_bool(field.key, raw);
            break;
        case FieldType::text:
            break;
        case FieldType::int_list:
        case FieldType::i64_list:
            for (const auto& piece : split_list(raw)) parse_i64(field.key, piece);
            break;
    }
}

const std::vector<FieldSpec> kRunFields = {
    {"run.seed", FieldType::u64, "1"},
    {"run.threads", FieldType::i64, "1"},
    {"run.output", FieldType::text, "out"},
    {"run.plots", FieldType::boolean, "true"},
};

const std::vector<FieldSpec> kScheduleFields = {
    {"optimizer.schedule", FieldType::text, "harmonic"},
    {"optimizer.eta", FieldType::f64, "0.05"},
    {"optimizer.theta", FieldType::f64, "2"},
    {"optimizer.M", FieldType::i64, "3"},
};

const std::vector<FieldSpec> kNetFields = {
    {"net.layers", FieldType::i64, "8"},
    {"net.neurons", FieldType::i64, "4"},
    {"net.sigmoids", FieldType::i64, "4"},
};

const std::vector<FieldSpec> kSnnProblemFields = {
    {"problem.diffusion_floor", FieldType::f64, "0.005"},
    {"problem.lambda_reg", FieldType::f64, "0.0001"},
    {"init.g0", FieldType::f64, "0.05"},
    {"init.range", FieldType::f64, "0.5"},
    {"box.a", FieldType::f64, "4.5"},
    {"box.w", FieldType::f64, "10"},
};

std::vector<FieldSpec> concat(std::initializer_list<std::vector<FieldSpec>> groups) {
    std::vector<FieldSpec> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
}

std::map<std::string, std::vector<FieldSpec>> build_schemas() {
    std::map<std::string, std::vector<FieldSpec>> schemas;

    schemas["lq-convergence-n"] = concat({kRunFields,
                                          {
                                              {"study.sigma", FieldType::f64, "0.5"},
                                              {"study.T", FieldType::f64, "1"},
                                              {"study.N_list", FieldType::int_list,
                                               "20,30,40,50,60,70,80,90,100"},
                                              {"study.kappa", FieldType::f64, "0.2"},
                                              {"study.repeats", FieldType::i64, "50"},
                                              {"study.batch", FieldType::i64, "1"},
                                              {"study.box", FieldType::f64, "1000000"},
                                              {"study.init", FieldType::text, "zero"},
                                          },
                                          kScheduleFields});

    schemas["lq-convergence-k"] = concat({kRunFields,
                                          {
                                              {"study.sigma", FieldType::f64, "0.5"},
                                              {"study.T", FieldType::f64, "1"},
                                              {"study.N", FieldType::i64, "60"},
                                              {"study.K_list", FieldType::i64_list,
                                               "200,2000,4000,8000,16000"},
                                              {"study.repeats", FieldType::i64, "10"},
                                              {"study.batch", FieldType::i64, "64"},
                                              {"study.box", FieldType::f64, "1000000"},
                                          },
                                          kScheduleFields});

    schemas["gradient-decay"] = concat({kRunFields,
                                        kNetFields,
                                        {
                                            {"data.n", FieldType::i64, "10000"},
                                            {"data.noise", FieldType::f64, "0.05"},
                                        },
                                        kSnnProblemFields,
                                        {
                                            {"optimizer.schedule", FieldType::text, "harmonic"},
                                            {"optimizer.eta", FieldType::f64, "0.05"},
                                            {"optimizer.theta", FieldType::f64, "600"},
                                            {"optimizer.M", FieldType::i64, "10000"},
                                            {"optimizer.batch", FieldType::i64, "1"},
                                            {"optimizer.K", FieldType::i64, "200000"},
                                            {"optimizer.oracle_M", FieldType::i64, "4000"},
                                            {"optimizer.checkpoints", FieldType::i64_list,
                                             "0,25000,50000,100000,150000,200000"},
                                        }});

    schemas["funcapprox-1d"] = concat({kRunFields,
                                       kNetFields,
                                       {
                                           {"data.n", FieldType::i64, "10000"},
                                           {"data.noise", FieldType::f64, "0.05"},
                                       },
                                       kSnnProblemFields,
                                       {
                                           {"optimizer.schedule", FieldType::text, "constant"},
                                           {"optimizer.eta", FieldType::f64, "0.05"},
                                           {"optimizer.theta", FieldType::f64, "2"},
                                           {"optimizer.M", FieldType::i64, "3"},
                                           {"optimizer.batch", FieldType::i64, "1"},
                                           {"optimizer.K", FieldType::i64, "2000000"},
                                           {"optimizer.diagnostics_every", FieldType::i64, "0"},
                                           {"optimizer.oracle_M", FieldType::i64, "0"},
                                           {"eval.points", FieldType::i64, "101"},
                                           {"eval.band_M", FieldType::i64, "400"},
                                       }});

    schemas["funcapprox-8d"] = concat({kRunFields,
                                       {
                                           {"net.layers", FieldType::i64, "15"},
                                           {"net.neurons", FieldType::i64, "40"},
                                           {"net.sigmoids", FieldType::i64, "40"},
                                           {"data.points_per_dim", FieldType::i64, "6"},
                                           {"data.noise", FieldType::f64, "0.05"},
                                       },
                                       kSnnProblemFields,
                                       {
                                           {"optimizer.schedule", FieldType::text, "constant"},
                                           {"optimizer.eta", FieldType::f64, "0.02"},
                                           {"optimizer.theta", FieldType::f64, "2"},
                                           {"optimizer.M", FieldType::i64, "3"},
                                           {"optimizer.batch", FieldType::i64, "1"},
                                           {"optimizer.K", FieldType::i64, "3000000"},
                                           {"optimizer.diagnostics_every", FieldType::i64, "0"},
                                           {"optimizer.oracle_M", FieldType::i64, "0"},
                                           {"eval.sections", FieldType::i64, "26"},
                                           {"eval.surface", FieldType::i64, "21"},
                                           {"eval.band_M", FieldType::i64, "400"},
                                       }});

    schemas["gradient-check"] = concat({kRunFields,
                                        kNetFields,
                                        {
                                            {"problem.name", FieldType::text, "lq"},
                                            {"problem.sigma", FieldType::f64, "0.5"},
                                            {"problem.T", FieldType::f64, "1"},
                                            {"problem.N", FieldType::i64, "10"},
                                            {"data.n", FieldType::i64, "512"},
                                            {"data.noise", FieldType::f64, "0.05"},
                                            {"problem.diffusion_floor", FieldType::f64, "0.005"},
                                            {"problem.lambda_reg", FieldType::f64, "0.0001"},
                                            {"init.g0", FieldType::f64, "0.05"},
                                            {"init.range", FieldType::f64, "0.5"},
                                            {"check.M", FieldType::i64, "100000"},
                                            {"check.fd_M", FieldType::i64, "10000"},
                                            {"check.eps", FieldType::f64, "0.0001"},
                                            {"check.tol_abs", FieldType::f64, "0.002"},
                                            {"check.tol_se", FieldType::f64, "5"},
                                        }});

    schemas["derivative-check"] = concat({kRunFields,
                                          kNetFields,
                                          {
                                              {"data.n", FieldType::i64, "256"},
                                              {"data.noise", FieldType::f64, "0.05"},
                                              {"problem.diffusion_floor", FieldType::f64,
                                               "0.005"},
                                              {"problem.lambda_reg", FieldType::f64, "0.0001"},
                                              {"problem.T", FieldType::f64, "1"},
                                              {"check.trials", FieldType::i64, "100"},
                                              {"check.tol_lq", FieldType::f64, "0.000001"},
                                              {"check.tol_snn", FieldType::f64, "0.0001"},
                                          }});
    return schemas;
}

const std::map<std::string, std::vector<FieldSpec>>& schemas() {
    static const auto table = build_schemas();
    return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw std::invalid_argument(key + ": " + what);
}

void check_positive_list(const RunConfig& rc, const std::string& key, std::int64_t lo) {
    const auto values = rc.i64_list(key);
    require(!values.empty(), key, "must not be empty");
    for (auto v : values) {
        require(v >= lo, key, "entries must be >= " + std::to_string(lo));
    }
}

void check_schedule(const RunConfig& rc) {
    const auto kind = rc.str("optimizer.schedule");
    require(kind == "constant" || kind == "harmonic", "optimizer.schedule",
            "must be 'constant' or 'harmonic'");
    require(rc.f64("optimizer.eta") > 0.0, "optimizer.eta", "must be > 0");
    require(rc.f64("optimizer.theta") > 0.0, "optimizer.theta", "must be > 0");
    require(rc.i64("optimizer.M") >= 1, "optimizer.M", "must be >= 1");
}

void check_net(const RunConfig& rc) {
    require(rc.i64("net.layers") >= 1, "net.layers", "must be >= 1");
    require(rc.i64("net.neurons") >= 1, "net.neurons", "must be >= 1");
    require(rc.i64("net.sigmoids") >= 1, "net.sigmoids", "must be >= 1");
}

void check_snn_problem(const RunConfig& rc) {
    require(rc.f64("problem.diffusion_floor") > 0.0, "problem.diffusion_floor", "must be > 0");
    require(rc.f64("problem.lambda_reg") >= 0.0, "problem.lambda_reg", "must be >= 0");
    require(rc.f64("init.g0") > rc.f64("problem.diffusion_floor"), "init.g0",
            "must exceed problem.diffusion_floor");
    require(rc.f64("init.range") >= 0.0, "init.range", "must be >= 0");
    require(rc.f64("box.a") > 0.0, "box.a", "must be > 0");
    require(rc.f64("box.w") > 0.0, "box.w", "must be > 0");
}

void check_constraints(const RunConfig& rc) {
    require(rc.i64("run.threads") >= 1, "run.threads", "must be >= 1");
    require(!rc.str("run.output").empty(), "run.output", "must not be empty");

    const auto& cmd = rc.command;
    if (cmd == "lq-convergence-n") {
        require(rc.f64("study.sigma") > 0.0, "study.sigma", "must be > 0");
        require(rc.f64("study.T") > 0.0, "study.T", "must be > 0");
        check_positive_list(rc, "study.N_list", 1);
        require(rc.f64("study.kappa") >= 0.0, "study.kappa", "must be >= 0");
        require(rc.i64("study.repeats") >= 1, "study.repeats", "must be >= 1");
        require(rc.i64("study.batch") >= 1, "study.batch", "must be >= 1");
        require(rc.f64("study.box") > 0.0, "study.box", "must be > 0");
        const auto init = rc.str("study.init");
        require(init == "zero" || init == "optimum", "study.init",
                "must be 'zero' or 'optimum'");
        check_schedule(rc);
    } else if (cmd == "lq-convergence-k") {
        require(rc.f64("study.sigma") > 0.0, "study.sigma", "must be > 0");
        require(rc.f64("study.T") > 0.0, "study.T", "must be > 0");
        require(rc.i64("study.N") >= 1, "study.N", "must be >= 1");
        check_positive_list(rc, "study.K_list", 0);
        require(rc.i64("study.repeats") >= 1, "study.repeats", "must be >= 1");
        require(rc.i64("study.batch") >= 1, "study.batch", "must be >= 1");
        require(rc.f64("study.box") > 0.0, "study.box", "must be > 0");
        check_schedule(rc);
    } else if (cmd == "gradient-decay") {
        check_net(rc);
        require(rc.i64("data.n") >= 1, "data.n", "must be >= 1");
        require(rc.f64("data.noise") >= 0.0, "data.noise", "must be >= 0");
        check_snn_problem(rc);
        check_schedule(rc);
        require(rc.i64("optimizer.batch") >= 1, "optimizer.batch", "must be >= 1");
        require(rc.i64("optimizer.K") >= 1, "optimizer.K", "must be >= 1");
        require(rc.i64("optimizer.oracle_M") >= 1, "optimizer.oracle_M", "must be >= 1");
        check_positive_list(rc, "optimizer.checkpoints", 0);
    } else if (cmd == "funcapprox-1d" || cmd == "funcapprox-8d") {
        check_net(rc);
        if (cmd == "funcapprox-1d") {
            require(rc.i64("data.n") >= 1, "data.n", "must be >= 1");
        } else {
            require(rc.i64("data.points_per_dim") >= 2, "data.points_per_dim", "must be >= 2");
        }
        require(rc.f64("data.noise") >= 0.0, "data.noise", "must be >= 0");
        check_snn_problem(rc);
        check_schedule(rc);
        require(rc.i64("optimizer.batch") >= 1, "optimizer.batch", "must be >= 1");
        require(rc.i64("optimizer.K") >= 0, "optimizer.K", "must be >= 0");
        require(rc.i64("optimizer.diagnostics_every") >= 0, "optimizer.diagnostics_every",
                "must be >= 0");
        require(rc.i64("optimizer.oracle_M") >= 0, "optimizer.oracle_M", "must be >= 0");
        if (cmd == "funcapprox-1d") {
            require(rc.i64("eval.points") >= 2, "eval.points", "must be >= 2");
        } else {
            require(rc.i64("eval.sections") >= 2, "eval.sections", "must be >= 2");
            require(rc.i64("eval.surface") >= 2, "eval.surface", "must be >= 2");
        }
        require(rc.i64("eval.band_M") >= 2, "eval.band_M", "must be >= 2");
    } else if (cmd == "gradient-check") {
        const auto name = rc.str("problem.name");
        require(name == "lq" || name == "snn", "problem.name", "must be 'lq' or 'snn'");
        require(rc.f64("problem.sigma") > 0.0, "problem.sigma", "must be > 0");
        require(rc.f64("problem.T") > 0.0, "problem.T", "must be > 0");
        require(rc.i64("problem.N") >= 1, "problem.N", "must be >= 1");
        check_net(rc);
        require(rc.i64("data.n") >= 1, "data.n", "must be >= 1");
        require(rc.f64("data.noise") >= 0.0, "data.noise", "must be >= 0");
        require(rc.f64("problem.diffusion_floor") > 0.0, "problem.diffusion_floor",
                "must be > 0");
        require(rc.f64("problem.lambda_reg") >= 0.0, "problem.lambda_reg", "must be >= 0");
        require(rc.f64("init.g0") > rc.f64("problem.diffusion_floor"), "init.g0",
                "must exceed problem.diffusion_floor");
        require(rc.f64("init.range") >= 0.0, "init.range", "must be >= 0");
        require(rc.i64("check.M") >= 2, "check.M", "must be >= 2");
        require(rc.i64("check.fd_M") >= 2, "check.fd_M", "must be >= 2");
        require(rc.f64("check.eps") > 0.0, "check.eps", "must be > 0");
        require(rc.f64("check.tol_abs") > 0.0, "check.tol_abs", "must be > 0");
        require(rc.f64("check.tol_se") > 0.0, "check.tol_se", "must be > 0");
    } else if (cmd == "derivative-check") {
        check_net(rc);
        require(rc.i64("data.n") >= 1, "data.n", "must be >= 1");
        require(rc.f64("data.noise") >= 0.0, "data.noise", "must be >= 0");
        require(rc.f64("problem.diffusion_floor") > 0.0, "problem.diffusion_floor",
                "must be > 0");
        require(rc.f64("problem.lambda_reg") >= 0.0, "problem.lambda_reg", "must be >= 0");
        require(rc.f64("problem.T") > 0.0, "problem.T", "must be > 0");
        require(rc.i64("check.trials") >= 1, "check.trials", "must be >= 1");
        require(rc.f64("check.tol_lq") > 0.0, "check.tol_lq", "must be > 0");
        require(rc.f64("check.tol_snn") > 0.0, "check.tol_snn", "must be > 0");
    }
}

}  // namespace

const std::string& Config::raw(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("missing config key '" + key + "'");
    return it->second;
}

Config parse_config_text(const std::string& text) {
    Config config;
    std::string section;
    std::size_t line_no = 0;
    std::string::size_type pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto end = (nl == std::string::npos) ? text.size() : nl;
        const std::string line = trim(text.substr(pos, end - pos));
        ++line_no;
        pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty section name");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key");
        }
        config.set(section.empty() ? key : section + "." + key, value);
    }
    return config;
}

Config load_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text(path));
}

void apply_override(Config& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override '" + assignment + "': expected KEY=VALUE");
    }
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty()) {
        throw std::invalid_argument("override '" + assignment + "': empty key");
    }
    config.set(key, trim(assignment.substr(eq + 1)));
}

std::string render_config(const Config& config) {
    std::string out;
    std::string current;
    bool first = true;
    for (const auto& [key, value] : config.values) {
        const auto dot = key.find('.');
        const std::string section = (dot == std::string::npos) ? "" : key.substr(0, dot);
        const std::string name = (dot == std::string::npos) ? key : key.substr(dot + 1);
        if (section != current || first) {
            if (!first) out += "\n";
            if (!section.empty()) out += "[" + section + "]\n";
            current = section;
            first = false;
        }
        out += name + " = " + value + "\n";
    }
    return out;
}

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> commands = {
        "lq-convergence-n", "lq-convergence-k", "gradient-decay",    "funcapprox-1d",
        "funcapprox-8d",    "gradient-check",   "derivative-check",
    };
    return commands;
}

double RunConfig::f64(const std::string& key) const { return parse_f64(key, table.raw(key)); }

std::int64_t RunConfig::i64(const std::string& key) const {
    return parse_i64(key, table.raw(key));
}

int RunConfig::i32(const std::string& key) const {
    const auto v = i64(key);
    if (v < INT32_MIN || v > INT32_MAX) {
        throw std::invalid_argument(key + ": out of 32-bit range");
    }
    return int(v);
}

std::uint64_t RunConfig::u64(const std::string& key) const {
    return parse_u64(key, table.raw(key));
}

bool RunConfig::flag(const std::string& key) const { return parse_bool(key, table.raw(key)); }

std::string RunConfig::str(const std::string& key) const { return table.raw(key); }

std::vector<int> RunConfig::int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& piece : split_list(table.raw(key))) {
        const auto v = parse_i64(key, piece);
        if (v < INT32_MIN || v > INT32_MAX) {
            throw std::invalid_argument(key + ": entry out of 32-bit range");
        }
        out.push_back(int(v));
    }
    return out;
}

std::vector<std::int64_t> RunConfig::i64_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& piece : split_list(table.raw(key))) out.push_back(parse_i64(key, piece));
    return out;
}

RunConfig parse_config(const std::string& command, const std::filesystem::path& config_path,
                       const std::vector<std::string>& overrides) {
    const auto schema_it = schemas().find(command);
    if (schema_it == schemas().end()) {
        throw std::invalid_argument("unknown command '" + command + "'");
    }
    const auto& schema = schema_it->second;

    Config table;
    if (!config_path.empty()) table = load_config_file(config_path);
    for (const auto& assignment : overrides) apply_override(table, assignment);

    for (const auto& [key, value] : table.values) {
        const bool known = std::any_of(schema.begin(), schema.end(),
                                       [&](const FieldSpec& f) { return key == f.key; });
        if (!known) {
            throw std::invalid_argument("unknown key '" + key + "' for command '" + command +
                                        "'");
        }
        (void)value;
    }
    for (const auto& field : schema) {
        if (!table.has(field.key)) table.set(field.key, field.preset);
        check_type(field, table.raw(field.key));
    }

    RunConfig rc;
    rc.command = command;
    rc.table = std::move(table);
    check_constraints(rc);
    rc.output_dir = rc.str("run.output");
    rc.emit_plots = rc.flag("run.plots");
    rc.seed = rc.u64("run.seed");
    rc.threads = rc.i32("run.threads");
    return rc;
}

}  // namespace snnbp
