#include <cmath>

#include "medgraph/kernels.hpp"

namespace medgraph::kernels::detail {

// Rewrites -sum (v/vol)*log2(v/vol) as (sum_v*log2(vol) - sum v*log2(v))/vol
// so the loop needs one log per entry and no divisions.
double neg_plogp_sum_scalar(const double* v, std::size_t n, double vol) {
    if (vol <= 0.0) return 0.0;
    double sum_v = 0.0;
    double sum_vlog = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = v[i];
        if (x > 0.0) {
            sum_v += x;
            sum_vlog += x * std::log2(x);
        }
    }
    return (sum_v * std::log2(vol) - sum_vlog) / vol;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace medgraph::kernels::detail
