#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace sddetem {

// Decimal number parsed exactly as mantissa * 10^exp10, keeping the user's spelling.
// Step sizes and horizons are handled in this form so integrality checks like tau/delta
// are exact integer arithmetic, not floating-point remainder tests ("1e-2" with tau = 2
// must give exactly M = 200).
struct Decimal {
    long long mantissa = 0;
    int exp10 = 0;
    std::string text;    // original spelling, echoed in output headers
    double value = 0.0;  // nearest double, used for arithmetic after validation

    // Accepts [sign] digits [. digits] [e|E [sign] digits]. Throws ConfigError on
    // anything else or on mantissa overflow.
    static Decimal parse(const std::string& s);
};

// num/den as an exact integer if the ratio is integral, else nullopt. Exact: computed in
// 128-bit integer arithmetic on the decimal representations.
std::optional<long long> exact_ratio(const Decimal& num, const Decimal& den);

// key = value lines; '#' starts a comment, blank lines ignored. Duplicate keys and
// malformed lines raise ConfigError with the line number.
std::map<std::string, std::string> parse_key_values(std::istream& in);

}  // namespace sddetem
