#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hclab {

using cplx = std::complex<double>;

/// Dense complex polynomial, coefficients in ascending order.
class polynomial {
 public:
  polynomial() = default;
  explicit polynomial(std::vector<cplx> coefficients) : c_(std::move(coefficients)) { trim(); }
  polynomial(std::initializer_list<cplx> coefficients) : c_(coefficients) { trim(); }

  static polynomial constant(cplx value) { return polynomial({value}); }
  static polynomial identity() { return polynomial({cplx{0.0}, cplx{1.0}}); }

  bool is_zero() const { return c_.empty(); }
  /// Degree, with the zero polynomial reported as 0.
  std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }
  const std::vector<cplx>& coefficients() const { return c_; }

  cplx coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : cplx{}; }

  cplx operator()(cplx z) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return polynomial(std::move(d));
  }

  /// Coefficients of u -> p(center + u) (Taylor shift, synthetic division).
  std::vector<cplx> taylor_at(cplx center) const {
    std::vector<cplx> a = c_;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t k = n - 1; k > i; --k) a[k - 1] += center * a[k];
    return a;
  }

  /// Upper bound for max |p| on the circle |z| = r by the triangle inequality.
  double coefficient_bound(double r) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }

  friend bool operator==(const polynomial&, const polynomial&) = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
  }

  std::vector<cplx> c_;
};

}  // namespace hclab
