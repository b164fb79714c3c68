#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace bhtbp {

using Complex = std::complex<double>;

/// Real-to-complex FFT of a zero-padded length-`size` signal. `size` must be
/// a power of two; `out` holds size / 2 + 1 bins.
///
/// Plans are created once per size (estimate mode, alignment-agnostic) and
/// shared; execution is thread-safe.
void forward_fft(std::span<const double> in, std::size_t size, std::span<Complex> out);

/// Inverse of forward_fft including the 1 / size scaling. `spectrum` is
/// clobbered.
void inverse_fft(std::span<Complex> spectrum, std::size_t size, std::span<double> out);

std::size_t next_pow2(std::size_t n);

}  // namespace bhtbp
