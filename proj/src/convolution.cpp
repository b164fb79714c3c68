#include "bhtbp/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <vector>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW's planner is not thread-safe; plan execution with new arrays is.
// FFTW_ESTIMATE keeps plan selection (and so every bit of the output)
// independent of timing.
const PlanPair& plans_for(std::size_t size) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;

  std::vector<double> real(size);
  std::vector<Complex> spec(size / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  const int n = static_cast<int>(size);
  constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(n, real.data(), c, kFlags);
  p.inverse = fftw_plan_dft_c2r_1d(n, c, real.data(), kFlags);
  if (!p.forward || !p.inverse) throw NumericalError(fmt::format("FFTW plan failed for {}", size));
  return cache.emplace(size, p).first->second;
}

thread_local std::vector<double> t_real;

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void forward_fft(std::span<const double> in, std::size_t size, std::span<Complex> out) {
  if (in.size() > size || out.size() < size / 2 + 1) {
    throw DimensionError("forward_fft: buffer sizes inconsistent with transform size");
  }
  const PlanPair& p = plans_for(size);
  t_real.assign(size, 0.0);
  std::copy(in.begin(), in.end(), t_real.begin());
  fftw_execute_dft_r2c(p.forward, t_real.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_fft(std::span<Complex> spectrum, std::size_t size, std::span<double> out) {
  if (spectrum.size() < size / 2 + 1 || out.size() < size) {
    throw DimensionError("inverse_fft: buffer sizes inconsistent with transform size");
  }
  const PlanPair& p = plans_for(size);
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t k = 0; k < size; ++k) out[k] *= scale;
}

}  // namespace bhtbp
