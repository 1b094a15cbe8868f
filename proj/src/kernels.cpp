#include "aspdc/kernels.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aspdc::kernels {

int thread_count() {
    static const int count = [] {
        int n = 1;
#ifdef _OPENMP
        n = omp_get_max_threads();
#endif
        if (const char* env = std::getenv("SPDC_ADAPT_THREADS")) {
            try {
                const int cap = std::stoi(env);
                if (cap > 0 && cap < n) n = cap;
            } catch (const std::exception&) {
            }
        }
        return n;
    }();
    return count;
}

namespace serial {

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(std::span<const cplx> a) {
    double acc = 0.0;
    for (const auto& v : a) acc += std::norm(v);
    return acc;
}

void multiply(std::span<cplx> a, std::span<const cplx> b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
}

cplx triple(std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

} // namespace serial

namespace parallel {
namespace {

template <typename T, typename RowFn>
T reduce_rows(std::size_t total, std::size_t row, RowFn&& fn) {
    if (row == 0 || total % row != 0) row = total == 0 ? 1 : total;
    const auto rows = static_cast<long>(total / row);
    std::vector<T> partial(static_cast<std::size_t>(rows), T{});
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long r = 0; r < rows; ++r) {
        partial[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r) * row, row);
    }
    T acc{};
    for (const auto& p : partial) acc += p;
    return acc;
}

} // namespace

cplx inner(std::span<const cplx> a, std::span<const cplx> b, std::size_t row) {
    return reduce_rows<cplx>(a.size(), row, [&](std::size_t off, std::size_t len) {
        return serial::inner(a.subspan(off, len), b.subspan(off, len));
    });
}

double norm2(std::span<const cplx> a, std::size_t row) {
    return reduce_rows<double>(a.size(), row, [&](std::size_t off, std::size_t len) {
        return serial::norm2(a.subspan(off, len));
    });
}

void multiply(std::span<cplx> a, std::span<const cplx> b) {
    const auto n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] *= b[static_cast<std::size_t>(i)];
}

cplx triple(std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c,
            std::size_t row) {
    return reduce_rows<cplx>(a.size(), row, [&](std::size_t off, std::size_t len) {
        return serial::triple(a.subspan(off, len), b.subspan(off, len), c.subspan(off, len));
    });
}

} // namespace parallel
} // namespace aspdc::kernels

namespace aspdc::kernels {

namespace serial {
void matvec_conj(std::span<const cplx> m, std::span<const cplx> v, std::span<cplx> out) {
    const std::size_t cols = v.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        cplx acc{0.0, 0.0};
        const cplx* row = &m[r * cols];
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * std::conj(v[c]);
        out[r] = acc;
    }
}
} // namespace serial

namespace parallel {
void matvec_conj(std::span<const cplx> m, std::span<const cplx> v, std::span<cplx> out) {
    const std::size_t cols = v.size();
    const auto rows = static_cast<long>(out.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long r = 0; r < rows; ++r) {
        cplx acc{0.0, 0.0};
        const cplx* row = &m[static_cast<std::size_t>(r) * cols];
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * std::conj(v[c]);
        out[static_cast<std::size_t>(r)] = acc;
    }
}
} // namespace parallel

} // namespace aspdc::kernels
