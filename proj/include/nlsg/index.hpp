#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nlsg {

/// Thrown for arguments outside an operation's mathematical domain
/// (q < 1, sigma <= 0, kappa <= 1, shape mismatch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Lebesgue exponent q in [1, inf]. Infinity is a tagged state, never a large float.
class LebesgueIndex {
 public:
  static LebesgueIndex finite(double q) {
    if (!std::isfinite(q) || q < 1.0) {
      throw DomainError("Lebesgue index must be a finite value >= 1, got " + std::to_string(q));
    }
    return LebesgueIndex(q, false);
  }
  static LebesgueIndex infinity() { return LebesgueIndex(0.0, true); }

  /// Accepts "inf", "infinity", "Inf" or a number.
  static LebesgueIndex parse(std::string_view text) {
    if (text == "inf" || text == "Inf" || text == "infinity" || text == "INF") return infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text), &pos);
    } catch (const std::exception&) {
      throw DomainError("cannot parse Lebesgue index '" + std::string(text) + "'");
    }
    if (pos != text.size()) throw DomainError("cannot parse Lebesgue index '" + std::string(text) + "'");
    return finite(v);
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw DomainError("value() called on the infinite Lebesgue index");
    return q_;
  }

  /// q as a double, +inf for the infinite index. For formulas only.
  double as_double() const { return infinite_ ? std::numeric_limits<double>::infinity() : q_; }

  std::string to_string() const {
    if (infinite_) return "inf";
    std::string s = std::to_string(q_);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  friend bool operator==(const LebesgueIndex& a, const LebesgueIndex& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.q_ == b.q_);
  }

 private:
  LebesgueIndex(double q, bool inf) : q_(q), infinite_(inf) {}
  double q_;
  bool infinite_;
};

}  // namespace nlsg
