#pragma once

// Graded multi-index sets and normalized probabilists' Hermite polynomials.
//
// h_0 = 1, h_1 = x, h_{n+1} = (x h_n - sqrt(n) h_{n-1}) / sqrt(n+1). The
// tensor products h_alpha(x) = prod_i h_{alpha_i}(x_i) form an orthonormal
// basis of L^2(gamma_k) and diagonalize the Ornstein-Uhlenbeck operator
// (eigenvalue -|alpha|).

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gfpk {

struct MultiIndex {
  std::vector<int> exponents;

  int degree() const;
  std::size_t dimension() const { return exponents.size(); }
  int operator[](std::size_t i) const { return exponents[i]; }

  bool operator==(const MultiIndex&) const = default;
};

inline constexpr std::size_t kDefaultBasisCap = 5000;

/// All multi-indices of dimension k with total degree <= N, graded
/// lexicographic: degree-major, and within one degree the exponent vectors in
/// descending lexicographic order, e.g. (2,0), (1,1), (0,2).
class ChaosBasis {
 public:
  ChaosBasis(int dimension, int max_degree, std::size_t cap = kDefaultBasisCap);

  int dimension() const { return dimension_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::optional<std::size_t> position(std::span<const int> exponents) const;

  /// Position of alpha - e_i, or nullopt when alpha_i == 0.
  std::optional<std::size_t> lowered(std::size_t alpha, int coordinate) const {
    const auto p = lowered_[alpha * dimension_ + coordinate];
    return p < 0 ? std::nullopt : std::optional<std::size_t>(p);
  }

  /// Row vector (h_alpha(x))_alpha.
  Eigen::RowVectorXd evaluate(std::span<const double> x) const;

  /// points is k x n; result is n x size() with entry (j, alpha) = h_alpha(x_j).
  Eigen::MatrixXd evaluate_all(const Eigen::MatrixXd& points) const;

 private:
  int dimension_;
  int max_degree_;
  std::vector<MultiIndex> indices_;
  std::map<std::vector<int>, std::size_t> lookup_;
  std::vector<long> lowered_;
};

using BasisPtr = std::shared_ptr<const ChaosBasis>;

/// Throws SizeError when binomial(N+k, k) exceeds cap.
BasisPtr enumerate_basis(int k, int N, std::size_t cap = kDefaultBasisCap);

/// binomial(N+k, k) as a double (never overflows for the sizes of interest).
double basis_size(int k, int N);

double hermite_eval(int n, double x);

/// Fills out[0..max_degree] with h_0(x)..h_max_degree(x).
void hermite_values(int max_degree, double x, std::span<double> out);

/// Sum_n coefficients[n] h_n(x), by the three-term recurrence.
double hermite_series(std::span<const double> coefficients, double x);

}  // namespace gfpk
