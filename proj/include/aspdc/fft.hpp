#pragma once

#include <cstddef>
#include <span>

#include "aspdc/field.hpp"

namespace aspdc::fft {

enum class Direction { Forward, Inverse };

/// Unitary 2-D DFT on an n x n row-major array stored in centered order
/// (index n/2 is the zero coordinate/frequency). Forward uses exp(-2 pi i jk/n).
/// Thread-safe: plans are created once per size under a lock and executed with
/// the new-array interface.
void centered_dft2(std::span<cplx> data, std::size_t n, Direction dir);

/// Swaps quadrants (fftshift for even n; it is its own inverse).
void swap_quadrants(std::span<cplx> data, std::size_t n);

} // namespace aspdc::fft
