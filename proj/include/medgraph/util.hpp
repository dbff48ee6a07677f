#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace medgraph {

// Deterministic RNG for everything seeded. mt19937_64 produces the same
// stream on every platform; next_below avoids std::uniform_int_distribution,
// whose bit-to-range mapping is implementation-defined and would break
// byte-identical reruns across standard libraries.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // n must be > 0. Modulo bias is acceptable: n is tiny everywhere this
    // is used and determinism, not uniformity, is the requirement.
    std::size_t next_below(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    // [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

std::string trim(const std::string& s);

// ASCII-only lowercase; leaves multi-byte UTF-8 sequences untouched.
std::string ascii_lower(const std::string& s);

// Canonical entity label: trimmed + ASCII-lowercased.
std::string canonical_label(const std::string& s);

}  // namespace medgraph
