#include "medgraph/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace medgraph::kernels {
namespace {

Backend resolve_backend() {
    const char* env = std::getenv("MEDGRAPH_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::Scalar;
#if defined(MEDGRAPH_HAVE_AVX2)
    const bool cpu_ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (env != nullptr && std::strcmp(env, "avx2") == 0) {
        return cpu_ok ? Backend::Avx2 : Backend::Scalar;
    }
    if (cpu_ok) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = resolve_backend();
    return b;
}

const char* backend_name() {
    return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

double neg_plogp_sum(const double* v, std::size_t n, double vol) {
#if defined(MEDGRAPH_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return detail::neg_plogp_sum_avx2(v, n, vol);
#endif
    return detail::neg_plogp_sum_scalar(v, n, vol);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(MEDGRAPH_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return detail::dot_avx2(a, b, n);
#endif
    return detail::dot_scalar(a, b, n);
}

}  // namespace medgraph::kernels
