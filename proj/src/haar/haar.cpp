#include "kmt/haar/haar.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kmt/math/quadrature.hpp"

namespace kmt::haar {

double DyadicCell::left() const {
    return (position - 1) * std::ldexp(1.0, -level);
}

double DyadicCell::right() const { return position * std::ldexp(1.0, -level); }

bool DyadicCell::contains(double t) const {
    if (position == 1) return t >= 0.0 && t <= right();
    return t > left() && t <= right();
}

int cell_position(int level, double t) {
    if (level < 0) throw std::invalid_argument("cell_position: negative level");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("cell_position: t outside [0,1]");
    if (t <= 0.0) return 1;
    const int n = 1 << level;
    int j = static_cast<int>(std::ceil(t * static_cast<double>(n)));
    if (j < 1) j = 1;
    if (j > n) j = n;
    return j;
}

double haar_eval(int k, int j, double t) {
    if (k < 0 || j < 1 || j > (1 << k))
        throw std::invalid_argument("haar_eval: index (" + std::to_string(k) + "," +
                                    std::to_string(j) + ") out of range");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("haar_eval: t outside [0,1]");
    const int child = cell_position(k + 1, t);
    const double amp = std::sqrt(std::ldexp(1.0, k));
    if (child == 2 * j - 1) return amp;
    if (child == 2 * j) return -amp;
    return 0.0;
}

HaarExpansion::HaarExpansion(double c0, std::vector<std::vector<double>> coeffs)
    : c0_(c0), coeffs_(std::move(coeffs)) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        if (coeffs_[k].size() != (std::size_t{1} << k))
            throw std::invalid_argument("HaarExpansion: level " + std::to_string(k) +
                                        " must hold 2^k coefficients");
}

double HaarExpansion::evaluate(double t) const {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("evaluate: t outside [0,1]");
    double acc = c0_;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const int child = cell_position(static_cast<int>(k) + 1, t);
        const int j = (child + 1) / 2;
        const double amp = std::sqrt(std::ldexp(1.0, static_cast<int>(k)));
        acc += coeffs_[k][j - 1] * ((child % 2 == 1) ? amp : -amp);
    }
    return acc;
}

double HaarExpansion::sum_of_squares() const {
    double acc = c0_ * c0_;
    for (const auto& level : coeffs_)
        for (double c : level) acc += c * c;
    return acc;
}

std::string HaarExpansion::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "k,j,coefficient\n";
    out << -1 << "," << 0 << "," << c0_ << "\n";
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        for (std::size_t j = 1; j <= coeffs_[k].size(); ++j)
            out << k << "," << j << "," << coeffs_[k][j - 1] << "\n";
    return out.str();
}

HaarExpansion haar_coeffs(const std::function<double(double)>& f, int m) {
    if (m < 1) throw std::invalid_argument("haar_coeffs: m must be >= 1");
    const int n = 1 << m;
    const double width = std::ldexp(1.0, -m);
    std::vector<double> cell(n);
    for (int j = 0; j < n; ++j)
        cell[j] = math::gauss_legendre_16(f, j * width, (j + 1) * width);
    // Aggregate upward: at each level the coefficient is 2^{k/2} times the
    // difference of the two half-cell integrals.
    std::vector<std::vector<double>> coeffs(m);
    for (int k = m - 1; k >= 0; --k) {
        const int cells = 1 << k;
        coeffs[k].resize(cells);
        std::vector<double> up(cells);
        const double amp = std::sqrt(std::ldexp(1.0, k));
        for (int j = 0; j < cells; ++j) {
            coeffs[k][j] = amp * (cell[2 * j] - cell[2 * j + 1]);
            up[j] = cell[2 * j] + cell[2 * j + 1];
        }
        cell.swap(up);
    }
    return HaarExpansion(cell[0], std::move(coeffs));
}

}  // namespace kmt::haar
