#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace criticgate {

// Exact rational arithmetic for reward values and metrics. Rewards live in
// [0,1] with tiny denominators (per-aspect components are 0, 4/5 or 1), so
// int64 never gets close to overflow at the scales this runtime handles.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend Rational operator/(const Rational& a, std::int64_t k) {
        return Rational(a.num, a.den * k);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) {
        return a.num * b.den <= b.num * a.den;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

// Mean of a range of rationals; empty input is the caller's error.
template <typename It>
Rational rational_mean(It first, It last) {
    Rational sum;
    std::int64_t n = 0;
    for (It it = first; it != last; ++it, ++n) sum = sum + *it;
    if (n == 0) throw std::invalid_argument("rational_mean: empty range");
    return sum / n;
}

}  // namespace criticgate
