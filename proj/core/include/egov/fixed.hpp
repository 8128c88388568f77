#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace egov {

// Fixed-point decimal with 4 fractional digits. Energy quantities, tariffs and
// balances use this type so consensus-relevant state never contains binary
// floating point.
class Fixed4 {
public:
    static constexpr int64_t kScale = 10'000;

    constexpr Fixed4() : raw_(0) {}

    static constexpr Fixed4 from_raw(int64_t raw) { return Fixed4(raw); }
    static constexpr Fixed4 from_int(int64_t whole) { return Fixed4(whole * kScale); }

    // Accepts "14", "-0.1", "1.5000"; at most 4 fractional digits.
    static std::optional<Fixed4> parse(std::string_view text);

    int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) / kScale; }

    // Always 4 decimals, e.g. "1.5000", "-0.1500".
    std::string str() const;

    Fixed4 operator+(Fixed4 o) const { return Fixed4(raw_ + o.raw_); }
    Fixed4 operator-(Fixed4 o) const { return Fixed4(raw_ - o.raw_); }
    Fixed4 operator-() const { return Fixed4(-raw_); }

    // Product rounded half-even to 4 decimal places.
    Fixed4 mul(Fixed4 o) const;

    // Nearest Fixed4 to a double, half-even on the exact tie only.
    static Fixed4 from_double_rounded(double v);

    auto operator<=>(const Fixed4&) const = default;

private:
    explicit constexpr Fixed4(int64_t raw) : raw_(raw) {}
    int64_t raw_;
};

}  // namespace egov
