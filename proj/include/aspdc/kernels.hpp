#pragma once

// Hot inner loops. Every kernel has a plain serial reference and an OpenMP
// version; the OpenMP versions reduce per row and then combine the row
// partials in index order, so results do not depend on the thread count.

#include <cstddef>
#include <span>

#include "aspdc/field.hpp"

namespace aspdc::kernels {

namespace serial {
cplx inner(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);
void multiply(std::span<cplx> a, std::span<const cplx> b);
/// sum over x of a(x) * b(x) * c(x), no conjugation.
cplx triple(std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c);
} // namespace serial

namespace parallel {
cplx inner(std::span<const cplx> a, std::span<const cplx> b, std::size_t row);
double norm2(std::span<const cplx> a, std::size_t row);
void multiply(std::span<cplx> a, std::span<const cplx> b);
cplx triple(std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c,
            std::size_t row);
} // namespace parallel

/// Worker count used by the parallel kernels; honors SPDC_ADAPT_THREADS.
int thread_count();

} // namespace aspdc::kernels

namespace aspdc::kernels {

namespace serial {
/// out[r] = sum_c m[r * cols + c] * conj(v[c])
void matvec_conj(std::span<const cplx> m, std::span<const cplx> v, std::span<cplx> out);
} // namespace serial

namespace parallel {
void matvec_conj(std::span<const cplx> m, std::span<const cplx> v, std::span<cplx> out);
} // namespace parallel

} // namespace aspdc::kernels
