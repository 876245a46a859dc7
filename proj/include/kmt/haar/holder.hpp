#ifndef KMT_HAAR_HOLDER_HPP
#define KMT_HAAR_HOLDER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kmt::haar {

struct HolderCertificate {
    double grid_spacing = 0.0;
    double measured_modulus = 0.0;  // max |f(x)-f(y)| / |x-y|^{1/2} over grid pairs
    double margin = 0.0;            // L - measured_modulus
    double sup_norm = 0.0;
};

/// A function on [0,1] certified to sit in the 1/2-Holder ball of radius L:
/// modulus and sup norm are checked over all pairs of a dyadic grid.
class HolderFunction {
public:
    HolderFunction(std::string id, std::function<double(double)> evaluator,
                   double holder_constant, HolderCertificate certificate)
        : id_(std::move(id)),
          eval_(std::move(evaluator)),
          L_(holder_constant),
          cert_(certificate) {}

    const std::string& id() const { return id_; }
    double holder_constant() const { return L_; }
    const HolderCertificate& certificate() const { return cert_; }
    double operator()(double t) const { return eval_(t); }

private:
    std::string id_;
    std::function<double(double)> eval_;
    double L_;
    HolderCertificate cert_;
};

/// Measure the grid certificate of an arbitrary evaluator (grid spacing
/// 2^{-grid_level}, all pairs).
HolderCertificate measure_certificate(const std::function<double(double)>& f, double L,
                                      int grid_level = 12);

/// Generator kinds; each is deterministic in (seed, kind).
enum class HolderKind { constant, sqrt_root, sqrt_shift, sine, haar_series };

HolderKind holder_kind_from_string(const std::string& name);
std::string to_string(HolderKind kind);

/// Deterministic certified test function.  Generation retries with shrunken
/// amplitude (at most 20 times) until the certificate margin is nonnegative;
/// throws if certification keeps failing.
HolderFunction sample_holder(double L, std::uint64_t seed, HolderKind kind,
                             double sign = 1.0);

struct BatteryOptions {
    int count = 20;
    double L = 1.0;
    std::uint64_t seed = 1;
    bool mirrored = false;  // append -f for every f
};

/// Battery spanning the generator kinds, with extra weight on the
/// adversarial Haar-series kind.
std::vector<HolderFunction> make_battery(const BatteryOptions& options);

/// Battery description file (JSON): {"functions":[{kind,L,seed,sign?},...]}.
std::vector<HolderFunction> parse_battery(const std::string& json_text);
std::string battery_to_json(const BatteryOptions& options);

}  // namespace kmt::haar

#endif
