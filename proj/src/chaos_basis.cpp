#include "gfpk/chaos_basis.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gfpk/error.hpp"

namespace gfpk {

int MultiIndex::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

double basis_size(int k, int N) {
  // binomial(N + k, k) built incrementally to stay exact in the useful range.
  double size = 1.0;
  for (int i = 1; i <= k; ++i) size = size * (N + i) / i;
  return std::round(size);
}

namespace {

void compositions(int remaining, std::size_t slot, std::vector<int>& current,
                  std::vector<MultiIndex>& out) {
  if (slot + 1 == current.size()) {
    current[slot] = remaining;
    out.push_back(MultiIndex{current});
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[slot] = e;
    compositions(remaining - e, slot + 1, current, out);
  }
}

}  // namespace

ChaosBasis::ChaosBasis(int dimension, int max_degree, std::size_t cap)
    : dimension_(dimension), max_degree_(max_degree) {
  if (dimension < 1) throw ArgumentError("basis dimension must be >= 1");
  if (max_degree < 0) throw ArgumentError("basis degree must be >= 0");
  const double count = basis_size(dimension, max_degree);
  if (count > static_cast<double>(cap)) {
    throw SizeError("chaos basis of dimension " + std::to_string(dimension) + " and degree " +
                    std::to_string(max_degree) + " has " +
                    std::to_string(static_cast<long long>(count)) +
                    " elements, above the cap of " + std::to_string(cap));
  }
  indices_.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(static_cast<std::size_t>(dimension), 0);
  for (int d = 0; d <= max_degree; ++d) compositions(d, 0, current, indices_);

  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(indices_[i].exponents, i);

  lowered_.assign(indices_.size() * static_cast<std::size_t>(dimension), -1);
  for (std::size_t a = 0; a < indices_.size(); ++a) {
    auto e = indices_[a].exponents;
    for (int i = 0; i < dimension; ++i) {
      if (e[i] == 0) continue;
      --e[i];
      lowered_[a * dimension + i] = static_cast<long>(lookup_.at(e));
      ++e[i];
    }
  }
}

std::optional<std::size_t> ChaosBasis::position(std::span<const int> exponents) const {
  if (exponents.size() != static_cast<std::size_t>(dimension_)) return std::nullopt;
  auto it = lookup_.find(std::vector<int>(exponents.begin(), exponents.end()));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Eigen::RowVectorXd ChaosBasis::evaluate(std::span<const double> x) const {
  Eigen::MatrixXd point(dimension_, 1);
  for (int i = 0; i < dimension_; ++i) point(i, 0) = x[i];
  return evaluate_all(point).row(0);
}

Eigen::MatrixXd ChaosBasis::evaluate_all(const Eigen::MatrixXd& points) const {
  if (points.rows() != dimension_) throw ArgumentError("point dimension does not match basis");
  const Eigen::Index n = points.cols();
  const int stride = max_degree_ + 1;
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(indices_.size()));
  std::vector<double> table(static_cast<std::size_t>(dimension_ * stride));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int i = 0; i < dimension_; ++i) {
      hermite_values(max_degree_, points(i, j),
                     std::span<double>(table).subspan(static_cast<std::size_t>(i * stride), stride));
    }
    for (std::size_t a = 0; a < indices_.size(); ++a) {
      double v = 1.0;
      const auto& e = indices_[a].exponents;
      for (int i = 0; i < dimension_; ++i) v *= table[i * stride + e[i]];
      out(j, static_cast<Eigen::Index>(a)) = v;
    }
  }
  return out;
}

BasisPtr enumerate_basis(int k, int N, std::size_t cap) {
  return std::make_shared<const ChaosBasis>(k, N, cap);
}

void hermite_values(int max_degree, double x, std::span<double> out) {
  out[0] = 1.0;
  if (max_degree >= 1) out[1] = x;
  for (int n = 1; n < max_degree; ++n) {
    out[n + 1] = (x * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) /
                 std::sqrt(static_cast<double>(n + 1));
  }
}

double hermite_eval(int n, double x) {
  if (n < 0) throw ArgumentError("Hermite degree must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = x;
  for (int m = 1; m < n; ++m) {
    const double next = (x * cur - std::sqrt(static_cast<double>(m)) * prev) /
                        std::sqrt(static_cast<double>(m + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_series(std::span<const double> coefficients, double x) {
  if (coefficients.empty()) return 0.0;
  double prev = 1.0;
  double sum = coefficients[0];
  if (coefficients.size() == 1) return sum;
  double cur = x;
  sum += coefficients[1] * cur;
  for (std::size_t m = 1; m + 1 < coefficients.size(); ++m) {
    const double next = (x * cur - std::sqrt(static_cast<double>(m)) * prev) /
                        std::sqrt(static_cast<double>(m + 1));
    prev = cur;
    cur = next;
    sum += coefficients[m + 1] * cur;
  }
  return sum;
}

}  // namespace gfpk
