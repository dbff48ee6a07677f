#pragma once

#include <cstddef>

namespace medgraph::kernels {

// Shannon-style accumulation shared by all entropy code:
//   sum over i of -(v[i]/vol) * log2(v[i]/vol)
// Entries <= 0 contribute nothing (0*log0 := 0); vol <= 0 returns 0.
// The numerators need not sum to vol (the classification bounds use
// denominators that differ from the mass total).
double neg_plogp_sum(const double* v, std::size_t n, double vol);

// Plain dot product; used for sparse-vector cosines after gathering the
// matched coordinates into dense arrays.
double dot(const double* a, const double* b, std::size_t n);

// Active backend, resolved once per process: AVX2+FMA when the CPU has it,
// scalar otherwise. MEDGRAPH_KERNELS=scalar|avx2 overrides (avx2 silently
// falls back to scalar when unsupported).
enum class Backend { Scalar, Avx2 };
Backend active_backend();
const char* backend_name();

namespace detail {
double neg_plogp_sum_scalar(const double* v, std::size_t n, double vol);
double dot_scalar(const double* a, const double* b, std::size_t n);
#if defined(MEDGRAPH_HAVE_AVX2)
double neg_plogp_sum_avx2(const double* v, std::size_t n, double vol);
double dot_avx2(const double* a, const double* b, std::size_t n);
#endif
}  // namespace detail

}  // namespace medgraph::kernels
