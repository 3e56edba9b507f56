#include "dawc/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dawc/recovery.hpp"

namespace dawc {

using nlohmann::json;

ConfigError::ConfigError(const std::string& field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(field) {}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
}

const json& need(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing");
    return obj.at(key);
}

const json& need_object(const json& obj, const std::string& path, const char* key) {
    const json& v = need(obj, path, key);
    if (!v.is_object()) throw ConfigError(join(path, key), "expected object");
    return v;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected finite number");
    return x;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected integer");
    const auto x = v.get<long long>();
    if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(path, "integer out of range");
    return static_cast<int>(x);
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at_index(path, i)));
    return out;
}

SignalTemplate parse_signal(const json& j, const std::string& path) {
    reject_unknown(j, path, {"n_sig", "bandwidth_pool_hz", "f_max_hz", "window_s"});
    SignalTemplate s;
    const json& n = need(j, path, "n_sig");
    const std::string np = join(path, "n_sig");
    if (n.is_array()) {
        if (n.size() != 2) throw ConfigError(np, "expected integer or [min, max]");
        s.n_sig_min = integer(n[0], at_index(np, 0));
        s.n_sig_max = integer(n[1], at_index(np, 1));
    } else {
        s.n_sig_min = s.n_sig_max = integer(n, np);
    }
    s.bandwidth_pool_hz = number_list(need(j, path, "bandwidth_pool_hz"), join(path, "bandwidth_pool_hz"));
    s.f_max_hz = number(need(j, path, "f_max_hz"), join(path, "f_max_hz"));
    s.window_s = number(need(j, path, "window_s"), join(path, "window_s"));
    return s;
}

FrontendTemplate parse_frontend(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected object");
    reject_unknown(j, path, {"architecture", "f_p_hz", "f_c_hz", "f_s_hz", "n", "r"});
    FrontendTemplate f;
    const json& arch = need(j, path, "architecture");
    if (!arch.is_string()) throw ConfigError(join(path, "architecture"), "expected string");
    try {
        f.architecture = architecture_from_string(arch.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(join(path, "architecture"), e.what());
    }
    f.f_p_hz = number(need(j, path, "f_p_hz"), join(path, "f_p_hz"));
    f.f_s_hz = number(need(j, path, "f_s_hz"), join(path, "f_s_hz"));
    if (f.architecture == Architecture::dawc) {
        f.f_c_hz = number(need(j, path, "f_c_hz"), join(path, "f_c_hz"));
        f.n = integer(need(j, path, "n"), join(path, "n"));
    } else {
        if (j.contains("f_c_hz")) f.f_c_hz = number(j.at("f_c_hz"), join(path, "f_c_hz"));
        if (j.contains("n")) f.n = integer(j.at("n"), join(path, "n"));
    }
    if (j.contains("r")) f.r = integer(j.at("r"), join(path, "r"));
    return f;
}

SweepAxes parse_sweep(const json& j, const std::string& path) {
    reject_unknown(j, path, {"channels", "rate_hz", "snr_db"});
    SweepAxes s;
    const bool ch = j.contains("channels"), rt = j.contains("rate_hz");
    if (ch == rt) throw ConfigError(path, "exactly one of channels or rate_hz is required");
    if (ch) {
        s.kind = RateAxis::channels;
        const json& v = j.at("channels");
        const std::string vp = join(path, "channels");
        if (!v.is_array()) throw ConfigError(vp, "expected array");
        for (std::size_t i = 0; i < v.size(); ++i) s.values.push_back(integer(v[i], at_index(vp, i)));
    } else {
        s.kind = RateAxis::rate_hz;
        s.values = number_list(j.at("rate_hz"), join(path, "rate_hz"));
    }
    const json& snr = need(j, path, "snr_db");
    const std::string sp = join(path, "snr_db");
    if (!snr.is_array()) throw ConfigError(sp, "expected array");
    for (std::size_t i = 0; i < snr.size(); ++i) {
        if (snr[i].is_null())
            s.snr_db.emplace_back(std::nullopt);
        else if (snr[i].is_number())
            s.snr_db.emplace_back(number(snr[i], at_index(sp, i)));
        else
            throw ConfigError(at_index(sp, i), "expected number or null");
    }
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed json: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("$", "expected object");
    reject_unknown(j, "", {"name", "signal", "frontends", "sweep", "algorithms", "omega", "sparsity",
                           "max_iterations", "reconstruction_snr_f", "blocks_N", "trials", "base_seed", "outputs",
                           "acceptance"});
    ExperimentConfig c;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw ConfigError("name", "expected string");
        c.name = j.at("name").get<std::string>();
    }
    c.signal = parse_signal(need_object(j, "", "signal"), "signal");

    const json& fes = need(j, "", "frontends");
    if (!fes.is_array()) throw ConfigError("frontends", "expected array");
    for (std::size_t i = 0; i < fes.size(); ++i) c.frontends.push_back(parse_frontend(fes[i], at_index("frontends", i)));

    c.sweep = parse_sweep(need_object(j, "", "sweep"), "sweep");

    if (j.contains("algorithms")) {
        const json& al = j.at("algorithms");
        if (!al.is_array()) throw ConfigError("algorithms", "expected array");
        c.algorithms.clear();
        for (std::size_t i = 0; i < al.size(); ++i) {
            if (!al[i].is_string()) throw ConfigError(at_index("algorithms", i), "expected string");
            c.algorithms.push_back(al[i].get<std::string>());
        }
    }
    if (j.contains("omega")) c.omega = number(j.at("omega"), "omega");
    if (j.contains("sparsity")) {
        const json& s = j.at("sparsity");
        if (s.is_string()) {
            if (s.get<std::string>() != "oracle") throw ConfigError("sparsity", "expected \"oracle\" or integer");
            c.sparsity.reset();
        } else {
            c.sparsity = integer(s, "sparsity");
        }
    }
    if (j.contains("max_iterations")) c.max_iterations = integer(j.at("max_iterations"), "max_iterations");
    if (j.contains("reconstruction_snr_f")) {
        const json& v = j.at("reconstruction_snr_f");
        if (v.is_null())
            c.reconstruction_snr_f.reset();
        else
            c.reconstruction_snr_f = number(v, "reconstruction_snr_f");
    }
    if (j.contains("blocks_N")) c.blocks_N = integer(j.at("blocks_N"), "blocks_N");
    if (j.contains("trials")) c.trials = integer(j.at("trials"), "trials");
    if (j.contains("base_seed")) {
        const json& v = j.at("base_seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("base_seed", "expected non-negative integer");
        c.base_seed = v.get<std::uint64_t>();
    }
    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        if (!o.is_object()) throw ConfigError("outputs", "expected object");
        reject_unknown(o, "outputs", {"summary_csv", "trials_csv", "svg"});
        for (const char* key : {"summary_csv", "trials_csv", "svg"}) {
            if (!o.contains(key)) continue;
            if (!o.at(key).is_string()) throw ConfigError(join("outputs", key), "expected string");
        }
        if (o.contains("summary_csv")) c.outputs.summary_csv = o.at("summary_csv").get<std::string>();
        if (o.contains("trials_csv")) c.outputs.trials_csv = o.at("trials_csv").get<std::string>();
        if (o.contains("svg")) c.outputs.svg = o.at("svg").get<std::string>();
    }
    if (j.contains("acceptance")) {
        const json& a = j.at("acceptance");
        if (!a.is_object()) throw ConfigError("acceptance", "expected object");
        reject_unknown(a, "acceptance", {"min_pd", "max_pf", "max_nmse"});
        if (a.contains("min_pd")) c.acceptance.min_pd = number(a.at("min_pd"), "acceptance.min_pd");
        if (a.contains("max_pf")) c.acceptance.max_pf = number(a.at("max_pf"), "acceptance.max_pf");
        if (a.contains("max_nmse")) c.acceptance.max_nmse = number(a.at("max_nmse"), "acceptance.max_nmse");
    }
    validate_config(c);
    return c;
}

void validate_config(const ExperimentConfig& c) {
    const auto& s = c.signal;
    if (s.n_sig_min < 1 || s.n_sig_max < s.n_sig_min) throw ConfigError("signal.n_sig", "need 1 <= min <= max");
    if (s.bandwidth_pool_hz.empty()) throw ConfigError("signal.bandwidth_pool_hz", "must be nonempty");
    double b_max = 0.0;
    for (std::size_t i = 0; i < s.bandwidth_pool_hz.size(); ++i) {
        if (!(s.bandwidth_pool_hz[i] > 0.0))
            throw ConfigError(at_index("signal.bandwidth_pool_hz", i), "must be positive");
        b_max = std::max(b_max, s.bandwidth_pool_hz[i]);
    }
    if (!(s.f_max_hz > b_max)) throw ConfigError("signal.f_max_hz", "must exceed every pool bandwidth");
    if (!(s.window_s > 0.0)) throw ConfigError("signal.window_s", "must be positive");

    if (c.frontends.empty()) throw ConfigError("frontends", "must be nonempty");
    for (std::size_t i = 0; i < c.frontends.size(); ++i) {
        const auto& f = c.frontends[i];
        const std::string path = at_index("frontends", i);
        if (!(f.f_p_hz > 0.0)) throw ConfigError(path + ".f_p_hz", "must be positive");
        if (!(f.f_s_hz > 0.0)) throw ConfigError(path + ".f_s_hz", "must be positive");
        if (f.r < 1) throw ConfigError(path + ".r", "must be at least 1");
        const double l = 2.0 * s.f_max_hz / f.f_p_hz;
        if (std::abs(l - std::round(l)) > 1e-9 * l || std::round(l) < 1)
            throw ConfigError(path + ".f_p_hz", "2 f_max / f_p must be a positive integer");
        FrontendConfig probe;
        probe.architecture = f.architecture;
        probe.f_p_hz = f.f_p_hz;
        probe.f_c_hz = f.f_c_hz;
        probe.f_s_hz = f.f_s_hz;
        probe.n = f.n;
        probe.L = static_cast<int>(std::round(l));
        probe.r = f.r;
        probe.N = 2;
        const auto rep = validate_params(probe);
        if (!rep.ordering || !rep.disjoint)
            throw ConfigError(path, rep.messages.empty() ? "invalid front end" : rep.messages.front());
        if (f.architecture == Architecture::dawc && f.n < 2) throw ConfigError(path + ".n", "dawc needs n >= 2");
    }

    const std::string axis = c.sweep.kind == RateAxis::channels ? "sweep.channels" : "sweep.rate_hz";
    if (c.sweep.values.empty()) throw ConfigError(axis, "must be nonempty");
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i)
        if (!(c.sweep.values[i] > 0.0)) throw ConfigError(at_index(axis, i), "must be positive");
    if (c.sweep.snr_db.empty()) throw ConfigError("sweep.snr_db", "must be nonempty");

    if (c.algorithms.empty()) throw ConfigError("algorithms", "must be nonempty");
    for (std::size_t i = 0; i < c.algorithms.size(); ++i)
        if (!is_known_algorithm(c.algorithms[i]))
            throw ConfigError(at_index("algorithms", i), "unknown algorithm '" + c.algorithms[i] + "'");
    if (!(c.omega >= 0.0 && c.omega <= 1.0)) throw ConfigError("omega", "must lie in [0, 1]");
    if (c.sparsity && *c.sparsity < 1) throw ConfigError("sparsity", "must be at least 1");
    if (c.max_iterations < 0) throw ConfigError("max_iterations", "must be non-negative");
    if (c.reconstruction_snr_f && !(*c.reconstruction_snr_f > 0.0))
        throw ConfigError("reconstruction_snr_f", "must be positive or null");
    if (c.blocks_N && *c.blocks_N < 1) throw ConfigError("blocks_N", "must be at least 1");
    if (c.trials < 1) throw ConfigError("trials", "must be at least 1");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("$", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["signal"] = {{"n_sig", {c.signal.n_sig_min, c.signal.n_sig_max}},
                   {"bandwidth_pool_hz", c.signal.bandwidth_pool_hz},
                   {"f_max_hz", c.signal.f_max_hz},
                   {"window_s", c.signal.window_s}};
    j["frontends"] = json::array();
    for (const auto& f : c.frontends)
        j["frontends"].push_back({{"architecture", std::string(to_string(f.architecture))},
                                  {"f_p_hz", f.f_p_hz},
                                  {"f_c_hz", f.f_c_hz},
                                  {"f_s_hz", f.f_s_hz},
                                  {"n", f.n},
                                  {"r", f.r}});
    json sweep;
    if (c.sweep.kind == RateAxis::channels) {
        sweep["channels"] = json::array();
        for (double v : c.sweep.values) sweep["channels"].push_back(static_cast<int>(v));
    } else {
        sweep["rate_hz"] = c.sweep.values;
    }
    sweep["snr_db"] = json::array();
    for (const auto& v : c.sweep.snr_db) sweep["snr_db"].push_back(v ? json(*v) : json(nullptr));
    j["sweep"] = sweep;
    j["algorithms"] = c.algorithms;
    j["omega"] = c.omega;
    j["sparsity"] = c.sparsity ? json(*c.sparsity) : json("oracle");
    j["max_iterations"] = c.max_iterations;
    j["reconstruction_snr_f"] = c.reconstruction_snr_f ? json(*c.reconstruction_snr_f) : json(nullptr);
    if (c.blocks_N) j["blocks_N"] = *c.blocks_N;
    j["trials"] = c.trials;
    j["base_seed"] = c.base_seed;
    j["outputs"] = {{"summary_csv", c.outputs.summary_csv},
                    {"trials_csv", c.outputs.trials_csv},
                    {"svg", c.outputs.svg}};
    json acc = json::object();
    if (c.acceptance.min_pd) acc["min_pd"] = *c.acceptance.min_pd;
    if (c.acceptance.max_pf) acc["max_pf"] = *c.acceptance.max_pf;
    if (c.acceptance.max_nmse) acc["max_nmse"] = *c.acceptance.max_nmse;
    j["acceptance"] = acc;
    return j.dump(2);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << config_to_json(cfg) << '\n';
}

}  // namespace dawc
