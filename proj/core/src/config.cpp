#include "sddetem/config.hpp"

#include <cctype>
#include <cstdlib>
#include <string>

#include "sddetem/errors.hpp"

namespace sddetem {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_number(const std::string& s, const std::string& why) {
    throw ConfigError("invalid number '" + s + "': " + why);
}

}  // namespace

Decimal Decimal::parse(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) bad_number(s, "empty");
    Decimal d;
    d.text = t;
    std::size_t i = 0;
    bool negative = false;
    if (t[i] == '+' || t[i] == '-') {
        negative = t[i] == '-';
        ++i;
    }
    constexpr long long kCap = 922337203685477580LL;  // (2^63 - 1) / 10, pre-shift bound
    long long mant = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool seen_dot = false;
    for (; i < t.size(); ++i) {
        const char c = t[i];
        if (c == '.') {
            if (seen_dot) bad_number(s, "repeated decimal point");
            seen_dot = true;
            continue;
        }
        if (c == 'e' || c == 'E') break;
        if (c < '0' || c > '9') bad_number(s, "unexpected character");
        if (mant > kCap || (mant == kCap && c > '7'))
            bad_number(s, "too many significant digits");
        mant = mant * 10 + (c - '0');
        if (seen_dot) ++frac_digits;
        any_digit = true;
    }
    if (!any_digit) bad_number(s, "no digits");
    int exp_part = 0;
    if (i < t.size()) {  // exponent marker consumed by the break above
        ++i;
        bool exp_neg = false;
        if (i < t.size() && (t[i] == '+' || t[i] == '-')) {
            exp_neg = t[i] == '-';
            ++i;
        }
        if (i >= t.size()) bad_number(s, "empty exponent");
        for (; i < t.size(); ++i) {
            const char c = t[i];
            if (c < '0' || c > '9') bad_number(s, "unexpected character in exponent");
            exp_part = exp_part * 10 + (c - '0');
            if (exp_part > 9999) bad_number(s, "exponent too large");
        }
        if (exp_neg) exp_part = -exp_part;
    }
    d.mantissa = negative ? -mant : mant;
    d.exp10 = exp_part - frac_digits;
    d.value = std::strtod(t.c_str(), nullptr);
    return d;
}

std::optional<long long> exact_ratio(const Decimal& num, const Decimal& den) {
    if (den.mantissa == 0) return std::nullopt;
    __int128 a = num.mantissa;
    __int128 b = den.mantissa;
    int shift = num.exp10 - den.exp10;
    // Fold the power-of-ten difference into whichever side it enlarges; bail out rather
    // than overflow (38 decimal digits is the __int128 capacity).
    while (shift > 0) {
        if (a > static_cast<__int128>(1) << 120 || a < -(static_cast<__int128>(1) << 120))
            return std::nullopt;
        a *= 10;
        --shift;
    }
    while (shift < 0) {
        if (b > static_cast<__int128>(1) << 120 || b < -(static_cast<__int128>(1) << 120))
            return std::nullopt;
        b *= 10;
        ++shift;
    }
    if (a % b != 0) return std::nullopt;
    const __int128 q = a / b;
    if (q > static_cast<__int128>(9223372036854775807LL) ||
        q < -static_cast<__int128>(9223372036854775807LL))
        return std::nullopt;
    return static_cast<long long>(q);
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (out.count(key))
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        out.emplace(key, value);
    }
    return out;
}

}  // namespace sddetem
