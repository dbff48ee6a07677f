#include "medgraph/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "medgraph/kernels.hpp"

namespace medgraph::entropy {

double component_entropy(const std::vector<double>& degrees) {
    double vol = 0.0;
    for (double d : degrees) {
        if (d < 0.0) throw std::invalid_argument("component_entropy: negative degree");
        vol += d;
    }
    return kernels::neg_plogp_sum(degrees.data(), degrees.size(), vol);
}

double structural_entropy(const std::vector<std::vector<double>>& components) {
    double total_vol = 0.0;
    for (const auto& c : components) {
        for (double d : c) {
            if (d < 0.0) throw std::invalid_argument("structural_entropy: negative degree");
            total_vol += d;
        }
    }
    if (total_vol <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& c : components) {
        double vol = 0.0;
        for (double d : c) vol += d;
        if (vol > 0.0) acc += vol * kernels::neg_plogp_sum(c.data(), c.size(), vol);
    }
    return acc / total_vol;
}

double contradiction_lower_bound(std::size_t n, const std::vector<double>& degrees) {
    if (n < 2) throw std::invalid_argument("contradiction_lower_bound: n < 2");
    if (degrees.size() != n) {
        throw std::invalid_argument("contradiction_lower_bound: degree count != n");
    }
    std::vector<double> masses(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (degrees[i] < 1.0) {
            throw std::invalid_argument("contradiction_lower_bound: degree < 1");
        }
        masses[i] = degrees[i] - 1.0;
    }
    const double denom = 2.0 * static_cast<double>(n - 1);
    return kernels::neg_plogp_sum(masses.data(), masses.size(), denom);
}

std::optional<double> denial_upper_bound(const std::vector<double>& degrees, double vol) {
    const std::size_t n = degrees.size();
    if (n < 2) throw std::invalid_argument("denial_upper_bound: fewer than 2 survivors");
    const double denom = vol - 4.0;
    std::optional<double> best;
    std::vector<double> masses;
    masses.reserve(n - 1);
    for (std::size_t excluded = 0; excluded < n; ++excluded) {
        for (std::size_t neighbor = 0; neighbor < n; ++neighbor) {
            if (neighbor == excluded) continue;
            masses.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (i == excluded) continue;
                masses.push_back(i == neighbor ? degrees[i] - 1.0 : degrees[i]);
            }
            bool valid = true;
            for (double m : masses) {
                if (m < -kEps || (m > kEps && denom <= 0.0)) {
                    valid = false;
                    break;
                }
            }
            if (!valid) continue;
            const double value =
                kernels::neg_plogp_sum(masses.data(), masses.size(), denom);
            if (!best || value > *best) best = value;
        }
    }
    return best;
}

double connected_floor(std::size_t n) {
    if (n < 2) throw std::invalid_argument("connected_floor: n < 2");
    return 1.0 + 0.5 * std::log2(static_cast<double>(n - 1));
}

std::optional<double> isolation_upper_bound(const std::vector<double>& degrees,
                                            std::size_t removed_degree) {
    const std::size_t n = degrees.size();
    if (n < 2 || removed_degree < 1) return std::nullopt;
    if (removed_degree - 1 > n - 1) return std::nullopt;
    // One survivor whose single edge went to the removed node ends isolated.
    std::size_t iso = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(degrees[i] - 1.0) <= kEps) {
            iso = i;
            break;
        }
    }
    if (iso == n) return std::nullopt;
    std::vector<double> rest;
    rest.reserve(n - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += degrees[i];
        if (i != iso) rest.push_back(degrees[i]);
    }
    std::sort(rest.begin(), rest.end(), std::greater<>());
    for (std::size_t i = 0; i + 1 < removed_degree && i < rest.size(); ++i) {
        rest[i] -= 1.0;
    }
    const double vol_post = total - static_cast<double>(removed_degree);
    return kernels::neg_plogp_sum(rest.data(), rest.size(), vol_post);
}

namespace {

// Non-increasing integer sequences of the given length summing to total,
// each entry >= 1 (tree degree sequences when total = 2(length-1)).
void enumerate_partitions(std::size_t length, int total, int max_entry,
                          std::vector<int>& prefix,
                          const std::function<void(const std::vector<int>&)>& emit) {
    if (length == 0) {
        if (total == 0) emit(prefix);
        return;
    }
    const int remaining_min = static_cast<int>(length) - 1;
    for (int v = std::min(max_entry, total - remaining_min); v >= 1; --v) {
        prefix.push_back(v);
        enumerate_partitions(length - 1, total - v, v, prefix, emit);
        prefix.pop_back();
    }
}

}  // namespace

SeparationReport verify_separation(std::size_t n_max) {
    if (n_max < 2) throw std::invalid_argument("verify_separation: n_max < 2");
    SeparationReport report;
    report.floor_monotone = true;
    double prev_floor = -1.0;
    for (std::size_t n = 2; n <= n_max; ++n) {
        const double floor_n = connected_floor(n);
        if (floor_n <= prev_floor + kEps) report.floor_monotone = false;
        prev_floor = floor_n;

        std::vector<int> prefix;
        enumerate_partitions(
            n, 2 * (static_cast<int>(n) - 1), 2 * (static_cast<int>(n) - 1), prefix,
            [&](const std::vector<int>& tree_degrees) {
                SeparationRow row;
                row.n = n;
                std::vector<double> d(n);
                double sum_d = 0.0;
                row.degrees.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    row.degrees[i] = tree_degrees[i] + 1;
                    d[i] = static_cast<double>(row.degrees[i]);
                    sum_d += d[i];
                }
                const double vol = sum_d + static_cast<double>(n);
                row.lower = contradiction_lower_bound(n, d);
                const auto upper = denial_upper_bound(d, vol);
                row.upper = upper.value_or(0.0);
                row.margin = row.lower - row.upper;
                row.pass = upper.has_value() && row.margin > kEps;
                if (!row.pass) ++report.violations;
                report.rows.push_back(std::move(row));
            });
    }
    return report;
}

}  // namespace medgraph::entropy
