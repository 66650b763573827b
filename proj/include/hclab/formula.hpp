#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hclab/error.hpp"

namespace hclab {

/// Closed-form sequence term in the index variable n, e.g. "n^2", "3*2^n",
/// "1+1/n". Grammar: + - * / ^ (right associative), unary minus,
/// parentheses, decimal literals, the variable n and the imaginary unit i.
class formula {
 public:
  static formula parse(const std::string& text) {
    parser p{text, 0};
    auto root = p.expression();
    p.skip_space();
    if (p.pos != text.size())
      throw error(errc::parameter, "formula: unexpected '" + text.substr(p.pos) + "' in \"" + text + "\"");
    formula f;
    f.text_ = text;
    f.root_ = std::move(root);
    return f;
  }

  const std::string& text() const { return text_; }

  std::complex<double> operator()(double n) const { return eval(*root_, n); }

  /// Leading behaviour of an expression of the form sum_k c_k n^{p_k}: the
  /// largest exponent with a nonzero coefficient and that coefficient.
  /// Empty when the expression is not such a finite power sum.
  struct power_law {
    double exponent;
    double coefficient;
  };
  std::optional<power_law> leading_power() const {
    auto terms = power_sum(*root_);
    if (!terms) return std::nullopt;
    for (auto it = terms->rbegin(); it != terms->rend(); ++it)
      if (it->second != 0.0) return power_law{it->first, it->second};
    return std::nullopt;
  }

 private:
  enum class kind { number, imag, var, add, sub, mul, div, pow, neg };

  struct node {
    kind k;
    double value = 0.0;
    std::shared_ptr<const node> lhs, rhs;
  };
  using node_ptr = std::shared_ptr<const node>;

  static node_ptr make(kind k, node_ptr l = {}, node_ptr r = {}, double v = 0.0) {
    return std::make_shared<const node>(node{k, v, std::move(l), std::move(r)});
  }

  struct parser {
    const std::string& s;
    std::size_t pos;

    void skip_space() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    node_ptr expression() {
      auto lhs = term();
      for (;;) {
        if (accept('+'))
          lhs = make(kind::add, lhs, term());
        else if (accept('-'))
          lhs = make(kind::sub, lhs, term());
        else
          return lhs;
      }
    }
    node_ptr term() {
      auto lhs = unary();
      for (;;) {
        if (accept('*'))
          lhs = make(kind::mul, lhs, unary());
        else if (accept('/'))
          lhs = make(kind::div, lhs, unary());
        else
          return lhs;
      }
    }
    node_ptr unary() {
      if (accept('-')) return make(kind::neg, unary());
      if (accept('+')) return unary();
      return power();
    }
    node_ptr power() {
      auto base = primary();
      if (accept('^')) return make(kind::pow, base, unary());
      return base;
    }
    node_ptr primary() {
      skip_space();
      if (pos >= s.size()) throw error(errc::parameter, "formula: unexpected end of \"" + s + "\"");
      if (accept('(')) {
        auto e = expression();
        if (!accept(')')) throw error(errc::parameter, "formula: missing ')' in \"" + s + "\"");
        return e;
      }
      const char c = s[pos];
      if (c == 'n') {
        ++pos;
        return make(kind::var);
      }
      if (c == 'i') {
        ++pos;
        return make(kind::imag);
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        const double v = std::stod(s.substr(pos), &used);
        pos += used;
        return make(kind::number, {}, {}, v);
      }
      throw error(errc::parameter, std::string("formula: unexpected '") + c + "' in \"" + s + "\"");
    }
  };

  static std::complex<double> eval(const node& e, double n) {
    using C = std::complex<double>;
    switch (e.k) {
      case kind::number: return C{e.value};
      case kind::imag: return C{0.0, 1.0};
      case kind::var: return C{n};
      case kind::neg: return -eval(*e.lhs, n);
      case kind::add: return eval(*e.lhs, n) + eval(*e.rhs, n);
      case kind::sub: return eval(*e.lhs, n) - eval(*e.rhs, n);
      case kind::mul: return eval(*e.lhs, n) * eval(*e.rhs, n);
      case kind::div: return eval(*e.lhs, n) / eval(*e.rhs, n);
      case kind::pow: {
        const C b = eval(*e.lhs, n);
        const C x = eval(*e.rhs, n);
        // Real powers keep integer powers like 3^n exact.
        if (b.imag() == 0.0 && x.imag() == 0.0 && (b.real() >= 0.0 || x.real() == std::floor(x.real())))
          return C{std::pow(b.real(), x.real())};
        return std::pow(b, x);
      }
    }
    return {};
  }

  using terms = std::map<double, double>;  // exponent -> coefficient

  static std::optional<double> constant_of(const node& e) {
    auto t = power_sum(e);
    if (!t) return std::nullopt;
    double c = 0.0;
    for (auto [p, v] : *t) {
      if (v == 0.0) continue;
      if (p != 0.0) return std::nullopt;
      c = v;
    }
    return c;
  }

  static std::optional<terms> power_sum(const node& e) {
    switch (e.k) {
      case kind::number: return terms{{0.0, e.value}};
      case kind::var: return terms{{1.0, 1.0}};
      case kind::imag: return std::nullopt;
      case kind::neg: {
        auto t = power_sum(*e.lhs);
        if (!t) return std::nullopt;
        for (auto& [p, v] : *t) v = -v;
        return t;
      }
      case kind::add:
      case kind::sub: {
        auto a = power_sum(*e.lhs);
        auto b = power_sum(*e.rhs);
        if (!a || !b) return std::nullopt;
        const double sign = e.k == kind::add ? 1.0 : -1.0;
        for (auto [p, v] : *b) (*a)[p] += sign * v;
        return a;
      }
      case kind::mul: {
        auto a = power_sum(*e.lhs);
        auto b = power_sum(*e.rhs);
        if (!a || !b) return std::nullopt;
        terms out;
        for (auto [pa, va] : *a)
          for (auto [pb, vb] : *b) out[pa + pb] += va * vb;
        return out;
      }
      case kind::div: {
        auto a = power_sum(*e.lhs);
        auto b = power_sum(*e.rhs);
        if (!a || !b) return std::nullopt;
        std::optional<std::pair<double, double>> single;
        for (auto [p, v] : *b) {
          if (v == 0.0) continue;
          if (single) return std::nullopt;
          single = std::pair{p, v};
        }
        if (!single) return std::nullopt;
        terms out;
        for (auto [p, v] : *a) out[p - single->first] += v / single->second;
        return out;
      }
      case kind::pow: {
        auto x = constant_of(*e.rhs);
        if (!x) return std::nullopt;
        if (auto c = constant_of(*e.lhs)) return terms{{0.0, std::pow(*c, *x)}};
        auto b = power_sum(*e.lhs);
        if (!b) return std::nullopt;
        std::optional<std::pair<double, double>> single;
        for (auto [p, v] : *b) {
          if (v == 0.0) continue;
          if (single) return std::nullopt;
          single = std::pair{p, v};
        }
        if (!single || single->second <= 0.0) return std::nullopt;
        return terms{{single->first * *x, std::pow(single->second, *x)}};
      }
    }
    return std::nullopt;
  }

  std::string text_;
  node_ptr root_;
};

}  // namespace hclab
