#ifndef KMT_HAAR_HAAR_HPP
#define KMT_HAAR_HAAR_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kmt::haar {

/// Dyadic cell at level k, position j in 1..2^k: (s_{k,j-1}, s_{k,j}] with
/// s_{k,j} = j 2^{-k}, the first cell closed at 0.
struct DyadicCell {
    int level;
    int position;

    double left() const;
    double right() const;
    bool contains(double t) const;
};

/// Index of the level-k cell containing t in [0,1].
int cell_position(int level, double t);

/// Haar function h_{k,j}(t) = 2^{k/2} (1(t in cell(k+1,2j-1)) - 1(t in cell(k+1,2j))).
double haar_eval(int k, int j, double t);

/// Truncated expansion c0 h0 + sum_{k<m} sum_j c_{k,j} h_{k,j}.
class HaarExpansion {
public:
    HaarExpansion(double c0, std::vector<std::vector<double>> coeffs);

    double c0() const { return c0_; }
    int truncation_level() const { return static_cast<int>(coeffs_.size()); }
    double coeff(int k, int j) const { return coeffs_.at(k).at(j - 1); }
    const std::vector<std::vector<double>>& coeffs() const { return coeffs_; }

    double evaluate(double t) const;
    double sum_of_squares() const;  // c0^2 + sum coeffs^2

    /// CSV dump with columns k, j, coefficient (c0 appears as k=-1, j=0).
    std::string to_csv() const;

private:
    double c0_;
    std::vector<std::vector<double>> coeffs_;  // coeffs_[k][j-1], k = 0..m-1
};

/// Fourier-Haar coefficients of f up to truncation level m (>= 1), computed
/// from 16-node Gauss-Legendre integrals of f over the level-m cells and an
/// exact dyadic aggregation.
HaarExpansion haar_coeffs(const std::function<double(double)>& f, int m);

}  // namespace kmt::haar

#endif
