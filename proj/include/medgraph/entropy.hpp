#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace medgraph::entropy {

// Absolute tolerance for all entropy comparisons.
inline constexpr double kEps = 1e-9;

// Shannon entropy (bits) of one connected component's degree distribution:
//   H = -sum (d_i/Vol) * log2(d_i/Vol), Vol = sum d_i.
// A component with no edges (Vol = 0) has entropy 0. Degrees are incident
// weight sums and must be non-negative.
double component_entropy(const std::vector<double>& degrees);

// One-dimensional structural entropy: the volume-weighted average of
// component entropies. Empty or edgeless graphs give 0.
double structural_entropy(const std::vector<std::vector<double>>& components);

// Minimum entropy of a remainder that stays connected after one node is
// removed, given the n survivors' pre-removal unit degrees (each >= 1):
//   -sum ((d_i - 1) / (2(n-1))) * log2((d_i - 1) / (2(n-1)))
// with 0*log0 := 0. Throws if n < 2 or any degree < 1.
double contradiction_lower_bound(std::size_t n, const std::vector<double>& degrees);

// Maximum entropy of a remainder split into an isolated survivor plus a
// connected rest when the removed node had exactly two edges. degrees are
// the n survivors' pre-removal unit degrees, vol the original total volume.
// One survivor is excluded as the isolated one and one other survivor loses
// a degree; all (excluded, neighbor) assignments are enumerated and the
// maximum returned. Assignments where a positive numerator meets a
// non-positive denominator are invalid (zero numerators contribute 0 even
// then); empty optional when no assignment is valid. Throws if n < 2.
std::optional<double> denial_upper_bound(const std::vector<double>& degrees, double vol);

// Least possible entropy of any connected remainder on n >= 2 survivors,
// attained when one survivor touched everything and the rest form a tree:
// 1 + log2(n-1)/2. Strictly increasing in n.
double connected_floor(std::size_t n);

// Maximum entropy of a remainder split into an isolated survivor plus the
// rest when the removed node had removed_degree >= 1 edges: one degree-1
// survivor is excluded as the isolated node, the other removed_degree - 1
// edges each subtract 1 from the largest remaining degrees (the most even
// mass vector maximizes entropy), and the result is the single-component
// entropy at the true remaining volume sum(degrees) - removed_degree.
// Empty optional when no survivor has degree 1 or removed_degree < 1.
std::optional<double> isolation_upper_bound(const std::vector<double>& degrees,
                                            std::size_t removed_degree);

struct SeparationRow {
    std::size_t n = 0;
    std::vector<int> degrees;  // survivor pre-removal unit degrees
    double lower = 0.0;
    double upper = 0.0;
    double margin = 0.0;
    bool pass = false;
};

struct SeparationReport {
    std::vector<SeparationRow> rows;
    std::size_t violations = 0;
    // connected_floor(n) strictly increases over the checked range.
    bool floor_monotone = false;
};

// Checks lower > upper for every admissible worst-case degree sequence with
// 2..n_max survivors: tree degree sequences lifted by one (every survivor
// also touched the removed node), with the removed node adjacent to all
// survivors. Violations are reported, never thrown.
SeparationReport verify_separation(std::size_t n_max);

}  // namespace medgraph::entropy
