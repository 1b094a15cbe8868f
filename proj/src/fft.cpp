#include "aspdc/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace aspdc::fft {
namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex);
        auto it = plans.find({n, sign});
        if (it != plans.end()) return it->second;
        // Planning scratch only; execution uses fftw_execute_dft on caller buffers.
        auto* scratch = fftw_alloc_complex(n * n);
        const int ni = static_cast<int>(n);
        fftw_plan plan = fftw_plan_dft_2d(ni, ni, scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans.emplace(std::make_pair(n, sign), plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

} // namespace

void swap_quadrants(std::span<cplx> data, std::size_t n) {
    if (n % 2 != 0) throw ParameterError("swap_quadrants requires an even grid size");
    const std::size_t h = n / 2;
    for (std::size_t iy = 0; iy < h; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            const std::size_t jx = (ix + h) % n;
            std::swap(data[iy * n + ix], data[(iy + h) * n + jx]);
        }
    }
}

void centered_dft2(std::span<cplx> data, std::size_t n, Direction dir) {
    if (data.size() != n * n) throw ParameterError("centered_dft2: buffer size mismatch");
    const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan = cache().get(n, sign);
    swap_quadrants(data, n);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
    swap_quadrants(data, n);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
}

} // namespace aspdc::fft
