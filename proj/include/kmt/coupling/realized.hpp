#ifndef KMT_COUPLING_REALIZED_HPP
#define KMT_COUPLING_REALIZED_HPP

#include <cstdint>

namespace kmt::coupling {

/// A realized value together with its exact lattice bookkeeping: when
/// `exact` is set, value sits on the owning law's lattice at `index`
/// (relative to that law's origin).  Sums and differences of exact values
/// keep integer indices exact, which is what makes discrete conditioning
/// immune to floating-point drift.
struct Realized {
    double value = 0.0;
    std::int64_t index = 0;
    bool exact = false;

    static Realized continuous(double v) { return {v, 0, false}; }
    static Realized lattice(double v, std::int64_t idx) { return {v, idx, true}; }

    friend Realized operator+(const Realized& a, const Realized& b) {
        return {a.value + b.value, a.index + b.index, a.exact && b.exact};
    }
    friend Realized operator-(const Realized& a, const Realized& b) {
        return {a.value - b.value, a.index - b.index, a.exact && b.exact};
    }
};

}  // namespace kmt::coupling

#endif
