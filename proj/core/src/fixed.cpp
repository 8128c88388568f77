#include "egov/fixed.hpp"

#include <cmath>
#include <cstdlib>

namespace egov {

std::optional<Fixed4> Fixed4::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    size_t i = 0;
    bool neg = false;
    if (text[0] == '+' || text[0] == '-') {
        neg = text[0] == '-';
        i = 1;
    }
    if (i >= text.size()) return std::nullopt;

    int64_t whole = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
        whole = whole * 10 + (text[i] - '0');
        if (whole > 900'000'000'000'000) return std::nullopt;  // overflow guard
        any_digit = true;
    }
    int64_t frac = 0;
    int frac_digits = 0;
    if (i < text.size()) {  // text[i] == '.'
        ++i;
        if (i >= text.size()) return std::nullopt;
        for (; i < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9') return std::nullopt;
            if (++frac_digits > 4) return std::nullopt;
            frac = frac * 10 + (text[i] - '0');
            any_digit = true;
        }
    }
    if (!any_digit) return std::nullopt;
    while (frac_digits < 4) {
        frac *= 10;
        ++frac_digits;
    }
    int64_t raw = whole * kScale + frac;
    return from_raw(neg ? -raw : raw);
}

std::string Fixed4::str() const {
    int64_t r = raw_;
    std::string sign;
    if (r < 0) {
        sign = "-";
        r = -r;
    }
    int64_t whole = r / kScale;
    int64_t frac = r % kScale;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04lld", static_cast<long long>(frac));
    return sign + std::to_string(whole) + "." + buf;
}

Fixed4 Fixed4::mul(Fixed4 o) const {
    __int128 p = static_cast<__int128>(raw_) * o.raw_;
    bool neg = p < 0;
    if (neg) p = -p;
    __int128 q = p / kScale;
    __int128 rem = p % kScale;
    // round half to even
    if (rem * 2 > kScale || (rem * 2 == kScale && (q & 1) != 0)) ++q;
    int64_t out = static_cast<int64_t>(q);
    return from_raw(neg ? -out : out);
}

Fixed4 Fixed4::from_double_rounded(double v) {
    double scaled = v * kScale;
    double nearest = std::nearbyint(scaled);  // default FE_TONEAREST = half-even
    return from_raw(static_cast<int64_t>(nearest));
}

}  // namespace egov
