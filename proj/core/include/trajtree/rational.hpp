#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace trajtree {

/// Exact non-negative-denominator rational, always stored in lowest terms.
///
/// Comparisons cross-multiply in 128-bit arithmetic, so scores built from
/// path counts never round. Node scores and the critical threshold both use
/// this type.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den);
    static Rational integer(std::int64_t v) { return Rational(v, 1); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// "num/den" in lowest terms; integers keep the "/1".
    std::string str() const;

    /// Accepts "a/b", an integer, or a finite decimal literal such as "0.5".
    static Rational parse(std::string_view text);

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace trajtree
