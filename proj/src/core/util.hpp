#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rivlab {

/// Deterministic 64-bit generator (xoshiro256**). Behaves identically on
/// every platform, unlike the distributions in <random>.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Integer in [0, n).
    uint64_t uniform_index(uint64_t n);
    /// Standard normal via Box-Muller (deterministic across platforms).
    double normal();
    /// Uniform direction on the unit sphere.
    std::array<double, 3> unit_vector();

private:
    std::array<uint64_t, 4> state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// --- hashing ---------------------------------------------------------------

/// SHA-256 of a byte buffer, as a lowercase hex string.
std::string sha256_hex(const void* data, size_t len);

/// SHA-256 of a file's contents. Throws on I/O failure.
std::string sha256_file(const std::filesystem::path& path);

// --- number formatting -------------------------------------------------------

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

/// Compact uncertainty notation: value 1.098, err 0.009 -> "1.098(9)".
/// Falls back to "value +/- err" when the error has no sensible short form.
std::string format_uncertainty(double value, double err);

/// Parse "1.098(9)" -> {1.098, 0.009}. Throws std::invalid_argument on
/// malformed input.
struct ValueWithError {
    double value;
    double error;
};
ValueWithError parse_uncertainty(std::string_view text);

// --- misc -------------------------------------------------------------------

/// Split on a delimiter; keeps empty tokens.
std::vector<std::string> split(std::string_view s, char delim);

/// Strip leading/trailing whitespace.
std::string_view trim(std::string_view s);

/// Read an entire file into a string. Throws on failure.
std::string read_file(const std::filesystem::path& path);

/// Write a string to a file atomically enough for this project (tmp+rename).
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Global worker-thread cap shared by all parallel kernels. 0 = hardware.
void set_max_threads(int n);
int max_threads();

}  // namespace rivlab
