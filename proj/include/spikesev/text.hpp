#ifndef SPIKESEV_TEXT_HPP
#define SPIKESEV_TEXT_HPP

// Small string helpers shared by the text formats.

#include <string>
#include <string_view>
#include <vector>

namespace spikesev::text {

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);

/// Fixed-point rendering with `decimals` digits; locale independent.
std::string fixed(double value, int decimals);

/// Shortest round-trip decimal rendering of a double.
std::string exact(double value);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace spikesev::text

#endif  // SPIKESEV_TEXT_HPP
