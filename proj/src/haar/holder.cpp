#include "kmt/haar/holder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "kmt/haar/haar.hpp"
#include "kmt/math/rng.hpp"

namespace kmt::haar {

HolderCertificate measure_certificate(const std::function<double(double)>& f, double L,
                                      int grid_level) {
    const int n = (1 << grid_level) + 1;
    const double h = std::ldexp(1.0, -grid_level);
    std::vector<double> v(n);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = f(i * h);
        sup = std::max(sup, std::fabs(v[i]));
    }
    // One pass per gap: the division by sqrt(gap*h) happens once per gap.
    double modulus = 0.0;
    for (int gap = 1; gap < n; ++gap) {
        double worst = 0.0;
        for (int i = 0; i + gap < n; ++i)
            worst = std::max(worst, std::fabs(v[i + gap] - v[i]));
        modulus = std::max(modulus, worst / std::sqrt(gap * h));
    }
    HolderCertificate c;
    c.grid_spacing = h;
    c.measured_modulus = modulus;
    c.margin = L - modulus;
    c.sup_norm = sup;
    return c;
}

HolderKind holder_kind_from_string(const std::string& name) {
    if (name == "const") return HolderKind::constant;
    if (name == "sqrt") return HolderKind::sqrt_root;
    if (name == "sqrt_shift") return HolderKind::sqrt_shift;
    if (name == "sine") return HolderKind::sine;
    if (name == "haar_series") return HolderKind::haar_series;
    throw std::invalid_argument("unknown test-function kind '" + name + "'");
}

std::string to_string(HolderKind kind) {
    switch (kind) {
        case HolderKind::constant: return "const";
        case HolderKind::sqrt_root: return "sqrt";
        case HolderKind::sqrt_shift: return "sqrt_shift";
        case HolderKind::sine: return "sine";
        case HolderKind::haar_series: return "haar_series";
    }
    return "?";
}

namespace {

std::function<double(double)> build_evaluator(double L, std::uint64_t seed,
                                              HolderKind kind, double amplitude_factor,
                                              double sign) {
    math::RandomStream rs(math::substream_seed(seed, 101, static_cast<std::uint64_t>(kind)));
    switch (kind) {
        case HolderKind::constant:
            return [](double) { return 0.0; };
        case HolderKind::sqrt_root: {
            const double a = sign * 0.5 * L * amplitude_factor;
            return [a](double t) { return a * std::sqrt(t); };
        }
        case HolderKind::sqrt_shift: {
            const double c = 0.1 + 0.5 * rs.uniform();
            const double a = sign * 0.9 * L * amplitude_factor;
            const double cap = 0.5 * L;
            return [a, c, cap](double t) {
                const double v = a * std::sqrt(std::max(t - c, 0.0));
                return std::clamp(v, -cap, cap);
            };
        }
        case HolderKind::sine: {
            const double omega = 1.0 + std::floor(6.0 * rs.uniform());
            const double phase = 2.0 * M_PI * rs.uniform();
            // The exact 1/2-Holder modulus of A sin(2 pi w t) is about
            // 2A sqrt(pi w); keep A safely inside the ball.
            const double a = sign * amplitude_factor * 0.85 *
                             std::min(0.5 * L, 0.5 * L / std::sqrt(M_PI * omega));
            return [a, omega, phase](double t) {
                return a * std::sin(2.0 * M_PI * omega * t + phase);
            };
        }
        case HolderKind::haar_series: {
            const int levels = 8;
            const double rho = 0.5 * amplitude_factor;
            const double c0 = (2.0 * rs.uniform() - 1.0) * rho * 0.5 * L;
            std::vector<std::vector<double>> coeffs(levels);
            for (int k = 0; k < levels; ++k) {
                coeffs[k].resize(std::size_t{1} << k);
                const double bound = rho * std::pow(2.0, -1.5) * L * std::pow(2.0, -k);
                for (auto& c : coeffs[k]) c = (2.0 * rs.uniform() - 1.0) * bound;
            }
            auto exp_ptr = std::make_shared<HaarExpansion>(c0, std::move(coeffs));
            return [exp_ptr, sign](double t) { return sign * exp_ptr->evaluate(t); };
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

HolderFunction sample_holder(double L, std::uint64_t seed, HolderKind kind, double sign) {
    if (!(L > 0.0)) throw std::invalid_argument("sample_holder: L must be positive");
    double factor = 1.0;
    for (int attempt = 0; attempt <= 20; ++attempt) {
        auto eval = build_evaluator(L, seed, kind, factor, sign);
        HolderCertificate cert = measure_certificate(eval, L);
        if (cert.margin >= 0.0 && cert.sup_norm <= 0.5 * L) {
            const std::string id = to_string(kind) + "#" + std::to_string(seed) +
                                   (sign < 0.0 ? "-" : "");
            return HolderFunction(id, std::move(eval), L, cert);
        }
        factor *= 0.7;
    }
    throw std::runtime_error("sample_holder: certification failed after 20 retries (kind " +
                             to_string(kind) + ")");
}

std::vector<HolderFunction> make_battery(const BatteryOptions& options) {
    static const HolderKind cycle[] = {HolderKind::sqrt_root, HolderKind::haar_series,
                                       HolderKind::sine, HolderKind::haar_series,
                                       HolderKind::sqrt_shift, HolderKind::haar_series,
                                       HolderKind::constant};
    std::vector<HolderFunction> out;
    for (int i = 0; i < options.count; ++i) {
        const HolderKind kind = cycle[i % (sizeof(cycle) / sizeof(cycle[0]))];
        out.push_back(sample_holder(options.L, options.seed + i, kind));
    }
    if (options.mirrored) {
        const int base = static_cast<int>(out.size());
        for (int i = 0; i < base; ++i) {
            const HolderKind kind = cycle[i % (sizeof(cycle) / sizeof(cycle[0]))];
            out.push_back(sample_holder(options.L, options.seed + i, kind, -1.0));
        }
    }
    return out;
}

std::vector<HolderFunction> parse_battery(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::vector<HolderFunction> out;
    for (const auto& e : j.at("functions")) {
        for (const auto& [key, _] : e.items())
            if (key != "kind" && key != "L" && key != "seed" && key != "sign")
                throw std::invalid_argument("battery: unknown key '" + key + "'");
        out.push_back(sample_holder(e.at("L").get<double>(), e.at("seed").get<std::uint64_t>(),
                                    holder_kind_from_string(e.at("kind").get<std::string>()),
                                    e.value("sign", 1.0)));
    }
    return out;
}

std::string battery_to_json(const BatteryOptions& options) {
    static const char* cycle[] = {"sqrt", "haar_series", "sine", "haar_series",
                                  "sqrt_shift", "haar_series", "const"};
    nlohmann::json fns = nlohmann::json::array();
    for (int i = 0; i < options.count; ++i)
        fns.push_back({{"kind", cycle[i % 7]},
                       {"L", options.L},
                       {"seed", options.seed + i}});
    if (options.mirrored)
        for (int i = 0; i < options.count; ++i)
            fns.push_back({{"kind", cycle[i % 7]},
                           {"L", options.L},
                           {"seed", options.seed + i},
                           {"sign", -1.0}});
    return nlohmann::json{{"functions", fns}}.dump(2);
}

}  // namespace kmt::haar
