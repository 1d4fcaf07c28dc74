#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <stdexcept>
#include <string>

namespace lenspec {

inline constexpr long kDefaultBits = 128;
inline constexpr long kMaxBits = 16384;

/// Raised when certified refinement would need more than kMaxBits.
class PrecisionCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Closed interval [lower, upper] with dyadic (hence exact rational)
/// endpoints. Every operation rounds outward, so the true value of any
/// expression evaluated on containing intervals lies in the result.
class RealInterval {
 public:
  explicit RealInterval(long bits = kDefaultBits);
  RealInterval(const mpq_class& q, long bits);
  RealInterval(const mpq_class& lo, const mpq_class& hi, long bits);
  static RealInterval from_double(double v, long bits = kDefaultBits);
  static RealInterval from_int(long v, long bits = kDefaultBits);
  static RealInterval pi(long bits);
  static RealInterval hull(const RealInterval& a, const RealInterval& b);

  RealInterval(const RealInterval& other);
  RealInterval(RealInterval&& other) noexcept;
  RealInterval& operator=(const RealInterval& other);
  RealInterval& operator=(RealInterval&& other) noexcept;
  ~RealInterval();

  long bits() const { return bits_; }
  mpq_class lower() const;
  mpq_class upper() const;
  double lower_double() const;  // rounded down
  double upper_double() const;  // rounded up
  double mid() const;
  double width() const;  // rounded up

  bool contains(const mpq_class& q) const;
  bool contains(double v) const;
  bool contains(const RealInterval& inner) const;
  bool intersects(const RealInterval& other) const;
  bool certainly_less(const RealInterval& other) const;
  bool certainly_positive() const;
  bool certainly_negative() const;

  RealInterval abs() const;
  RealInterval square() const;

  friend RealInterval operator+(const RealInterval& a, const RealInterval& b);
  friend RealInterval operator-(const RealInterval& a, const RealInterval& b);
  friend RealInterval operator*(const RealInterval& a, const RealInterval& b);
  friend RealInterval operator/(const RealInterval& a, const RealInterval& b);
  friend RealInterval operator-(const RealInterval& a);

  friend RealInterval sqrt(const RealInterval& x);
  friend RealInterval cos(const RealInterval& x);
  friend RealInterval sin(const RealInterval& x);
  friend RealInterval cosh(const RealInterval& x);
  friend RealInterval sinh(const RealInterval& x);
  friend RealInterval acosh(const RealInterval& x);
  friend RealInterval asinh(const RealInterval& x);
  friend RealInterval exp(const RealInterval& x);
  friend RealInterval log(const RealInterval& x);

  std::string to_string(int digits = 20) const;

 private:
  void init(long bits);
  mpfr_t lo_;
  mpfr_t hi_;
  long bits_ = 0;
};

RealInterval pow(const RealInterval& base, const RealInterval& exponent);

}  // namespace lenspec
