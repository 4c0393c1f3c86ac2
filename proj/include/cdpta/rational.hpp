#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cdpta {

/// Exact rational number; all model arithmetic is carried out in this type.
/// Floating point enters only in the solvers. Expression templates are off so
/// arithmetic results are plain values.
using Rat = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

/// Error with a stable machine-readable code ("OUT_OF_DOMAIN", "PRE_VIOLATION", ...).
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

inline Rat rat(long long num, long long den = 1) {
  return Rat(BigInt(num), BigInt(den));
}

inline double to_double(const Rat& q) { return q.convert_to<double>(); }

/// Renders as "n" or "n/d" with the sign on the numerator.
inline std::string rat_to_string(const Rat& q) {
  BigInt n = numerator(q), d = denominator(q);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

/// Accepts "INT" or "INT/NAT" (denominator positive).
inline std::optional<Rat> rat_from_string(std::string_view s) {
  auto is_int = [](std::string_view t) {
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
    if (t.empty()) return false;
    for (char c : t)
      if (c < '0' || c > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) {
      if (!is_int(s)) return std::nullopt;
      return Rat(BigInt(std::string(s)));
    }
    std::string_view num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) return std::nullopt;
    BigInt d{std::string(den)};
    if (d <= 0) return std::nullopt;
    return Rat(BigInt(std::string(num)), d);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

/// Double-quotes a string, escaping embedded quotes and backslashes.
inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  out += '"';
  return out;
}

/// Best rational approximation of x with denominator at most max_den,
/// via the continued-fraction convergent/semiconvergent walk.
inline Rat best_rational(double x, long long max_den = 1000000) {
  if (max_den < 1) max_den = 1;
  bool neg = x < 0;
  if (neg) x = -x;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int it = 0; it < 64; ++it) {
    double fa = std::floor(frac);
    if (fa > 9.0e18) break;
    long long a = static_cast<long long>(fa);
    if (q1 != 0 && a > (max_den - q0) / q1) {
      // take the largest admissible semiconvergent
      long long amax = (max_den - q0) / q1;
      if (2 * amax >= a) {  // semiconvergent at least as close as previous convergent
        p0 = p0 + amax * p1;
        q0 = q0 + amax * q1;
        std::swap(p0, p1);
        std::swap(q0, q1);
      }
      break;
    }
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double rem = frac - fa;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  Rat best(p1, q1 == 0 ? 1 : q1);
  Rat alt(p0, q0 == 0 ? 1 : q0);
  Rat xr;
  try {
    xr = Rat(x);
  } catch (...) {
    xr = best;
  }
  auto dist = [&](const Rat& r) {
    Rat d = r - xr;
    return d < 0 ? Rat(-d) : d;
  };
  Rat result = (q0 != 0 && dist(alt) < dist(best)) ? alt : best;
  return neg ? Rat(-result) : result;
}

}  // namespace cdpta
