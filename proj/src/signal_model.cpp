#include "dawc/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dawc/frontend.hpp"

namespace dawc {

using nlohmann::json;

double MultibandSpec::total_bandwidth_hz() const {
    double total = 0.0;
    for (const auto& sb : subbands) total += sb.bandwidth_hz;
    return total;
}

double MultibandSpec::min_bandwidth_hz() const {
    if (subbands.empty()) return 0.0;
    double b = subbands.front().bandwidth_hz;
    for (const auto& sb : subbands) b = std::min(b, sb.bandwidth_hz);
    return b;
}

void MultibandSpec::validate() const {
    if (!(f_max_hz > 0.0)) throw std::invalid_argument("f_max must be positive");
    if (window_s < 0.0) throw std::invalid_argument("window must be non-negative");
    for (std::size_t i = 0; i < subbands.size(); ++i) {
        const auto& sb = subbands[i];
        std::string tag = "subband " + std::to_string(i) + ": ";
        if (!(sb.bandwidth_hz > 0.0)) throw std::invalid_argument(tag + "bandwidth must be positive");
        if (!std::isfinite(sb.amplitude) || sb.amplitude == 0.0)
            throw std::invalid_argument(tag + "amplitude must be finite and nonzero");
        if (std::abs(sb.carrier_hz) + 0.5 * sb.bandwidth_hz > f_max_hz)
            throw std::invalid_argument(tag + "extends past f_max");
    }
    std::vector<std::pair<double, double>> iv;
    for (const auto& sb : subbands) iv.emplace_back(sb.lower_edge_hz(), sb.upper_edge_hz());
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i)
        if (iv[i].first < iv[i - 1].second) throw std::invalid_argument("subbands overlap");
    if (total_bandwidth_hz() >= nyquist_rate_hz())
        throw std::invalid_argument("total bandwidth must be below the Nyquist rate");
}

double sinc(double u) {
    if (u == 0.0) return 1.0;
    const double x = std::numbers::pi * u;
    return std::sin(x) / x;
}

MultibandSpec make_random_spec(int n_sig,
                               const std::vector<double>& bandwidth_pool_hz,
                               double f_max_hz,
                               double window_s,
                               std::uint64_t seed,
                               int max_attempts) {
    if (n_sig < 1) throw std::invalid_argument("n_sig must be at least 1");
    if (bandwidth_pool_hz.empty()) throw std::invalid_argument("bandwidth pool is empty");
    const double b_max = *std::max_element(bandwidth_pool_hz.begin(), bandwidth_pool_hz.end());
    if (!(f_max_hz > b_max)) throw std::invalid_argument("f_max must exceed every pool bandwidth");
    for (double b : bandwidth_pool_hz)
        if (!(b > 0.0)) throw std::invalid_argument("pool bandwidths must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, bandwidth_pool_hz.size() - 1);

    MultibandSpec spec;
    spec.f_max_hz = f_max_hz;
    spec.window_s = window_s;
    spec.subbands.resize(static_cast<std::size_t>(n_sig));

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (auto& sb : spec.subbands) {
            sb.bandwidth_hz = bandwidth_pool_hz[pick(rng)];
            std::uniform_real_distribution<double> fc(-f_max_hz + 0.5 * sb.bandwidth_hz,
                                                      f_max_hz - 0.5 * sb.bandwidth_hz);
            sb.carrier_hz = fc(rng);
        }
        std::vector<std::pair<double, double>> iv;
        for (const auto& sb : spec.subbands) iv.emplace_back(sb.lower_edge_hz(), sb.upper_edge_hz());
        std::sort(iv.begin(), iv.end());
        bool ok = true;
        for (std::size_t i = 1; i < iv.size() && ok; ++i) ok = iv[i].first >= iv[i - 1].second;
        if (!ok) continue;

        std::uniform_real_distribution<double> delay(0.1 * window_s, 0.9 * window_s);
        for (auto& sb : spec.subbands) sb.delay_s = delay(rng);
        return spec;
    }
    throw std::runtime_error("could not place " + std::to_string(n_sig) + " disjoint subbands in " +
                             std::to_string(max_attempts) + " attempts");
}

cplx spectrum_at(const MultibandSpec& spec, double f_hz) {
    cplx acc(0.0, 0.0);
    for (const auto& sb : spec.subbands) {
        const double lo = sb.lower_edge_hz(), hi = sb.upper_edge_hz();
        if (f_hz < lo || f_hz > hi) continue;
        // the inverse transform converges to the midpoint of the jump
        const double level = (f_hz == lo || f_hz == hi) ? 0.5 : 1.0;
        const double phase = -2.0 * std::numbers::pi * (f_hz - sb.carrier_hz) * sb.delay_s;
        acc += (level * sb.amplitude / sb.bandwidth_hz) * std::polar(1.0, phase);
    }
    return acc;
}

cplx time_signal_at(const MultibandSpec& spec, double t_s) {
    cplx acc(0.0, 0.0);
    for (const auto& sb : spec.subbands) {
        const double env = sb.amplitude * sinc(sb.bandwidth_hz * (t_s - sb.delay_s));
        acc += env * std::polar(1.0, 2.0 * std::numbers::pi * sb.carrier_hz * t_s);
    }
    return acc;
}

IndexSet oracle_support(const MultibandSpec& spec, const FrontendConfig& cfg) {
    IndexSet out;
    const int d = cfg.row_count();
    for (int row = 0; row < d; ++row) {
        const double lo = segment_start(cfg, row);
        for (const auto& sb : spec.subbands) {
            if (segment_meets(cfg, lo, sb)) {
                out.push_back(row);
                break;
            }
        }
    }
    return out;
}

std::string to_json(const MultibandSpec& spec) {
    json j;
    j["f_max_hz"] = spec.f_max_hz;
    j["window_s"] = spec.window_s;
    j["subbands"] = json::array();
    for (const auto& sb : spec.subbands) {
        j["subbands"].push_back({{"amplitude", sb.amplitude},
                                 {"bandwidth_hz", sb.bandwidth_hz},
                                 {"carrier_hz", sb.carrier_hz},
                                 {"delay_s", sb.delay_s}});
    }
    return j.dump(2);
}

MultibandSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("spec json: ") + e.what());
    }
    auto number = [](const json& obj, const char* key, const std::string& path) {
        if (!obj.contains(key) || !obj.at(key).is_number())
            throw std::invalid_argument(path + key + ": expected number");
        return obj.at(key).get<double>();
    };
    MultibandSpec spec;
    spec.f_max_hz = number(j, "f_max_hz", "");
    spec.window_s = number(j, "window_s", "");
    if (!j.contains("subbands") || !j.at("subbands").is_array())
        throw std::invalid_argument("subbands: expected array");
    for (std::size_t i = 0; i < j.at("subbands").size(); ++i) {
        const auto& e = j.at("subbands")[i];
        const std::string path = "subbands[" + std::to_string(i) + "].";
        Subband sb;
        sb.amplitude = e.contains("amplitude") ? number(e, "amplitude", path) : 1.0;
        sb.bandwidth_hz = number(e, "bandwidth_hz", path);
        sb.carrier_hz = number(e, "carrier_hz", path);
        sb.delay_s = number(e, "delay_s", path);
        spec.subbands.push_back(sb);
    }
    return spec;
}

}  // namespace dawc
