#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace rieszlab {

namespace {

// One cached plan pair per grid shape, with dedicated aligned buffers; data
// is staged through them under a lock (FFTW planning is not thread-safe and
// execution must match the planned buffers).
struct PlanEntry {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  std::size_t size = 0;
};

std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanEntry>& plan_cache() {
  static std::map<std::pair<int, int>, PlanEntry> cache;
  return cache;
}

PlanEntry& entry_for(const Grid& g) {
  auto key = std::make_pair(g.d, g.n);
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanEntry e;
  e.size = g.num_points();
  e.in = fftw_alloc_complex(e.size);
  e.out = fftw_alloc_complex(e.size);
  if (!e.in || !e.out) throw std::runtime_error("fft: allocation failed");
  int dims[3] = {g.n, g.n, g.n};
  e.fwd = fftw_plan_dft(g.d, dims, e.in, e.out, FFTW_FORWARD, FFTW_ESTIMATE);
  e.bwd = fftw_plan_dft(g.d, dims, e.in, e.out, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!e.fwd || !e.bwd) throw std::runtime_error("fft: planning failed");
  return cache.emplace(key, e).first->second;
}

}  // namespace

std::vector<std::complex<double>> fft_forward(const Grid& g,
                                              const std::vector<double>& in) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanEntry& e = entry_for(g);
  for (std::size_t i = 0; i < e.size; ++i) {
    e.in[i][0] = in[i];
    e.in[i][1] = 0.0;
  }
  fftw_execute(e.fwd);
  std::vector<std::complex<double>> out(e.size);
  for (std::size_t i = 0; i < e.size; ++i)
    out[i] = {e.out[i][0], e.out[i][1]};
  return out;
}

std::vector<double> fft_inverse(const Grid& g,
                                const std::vector<std::complex<double>>& in) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanEntry& e = entry_for(g);
  for (std::size_t i = 0; i < e.size; ++i) {
    e.in[i][0] = in[i].real();
    e.in[i][1] = in[i].imag();
  }
  fftw_execute(e.bwd);
  std::vector<double> out(e.size);
  const double scale = 1.0 / static_cast<double>(e.size);
  for (std::size_t i = 0; i < e.size; ++i) out[i] = e.out[i][0] * scale;
  return out;
}

}  // namespace rieszlab
