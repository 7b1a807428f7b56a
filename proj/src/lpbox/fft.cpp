#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace lpb {
namespace fft {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::map<std::pair<int, int>, PlanPair>& cache() {
  static std::map<std::pair<int, int>, PlanPair> c;
  return c;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

PlanPair& plans_for(const Grid& g) {
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto key = std::make_pair(g.n, g.N);
  auto it = cache().find(key);
  if (it != cache().end()) return it->second;

  // scratch buffer only for planning; execution uses fftw_execute_dft
  std::int64_t m = g.points();
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(m));
  int dims[3] = {g.N, g.N, g.N};
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.fwd = fftw_plan_dft(g.n, dims, buf, buf, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft(g.n, dims, buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  return cache().emplace(key, p).first->second;
}

} // namespace

void forward(const Grid& g, std::complex<double>* data) {
  PlanPair& p = plans_for(g);
  fftw_complex* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p.fwd, d, d);
  const double scale = 1.0 / static_cast<double>(g.points());
  const std::int64_t m = g.points();
  for (std::int64_t i = 0; i < m; ++i) data[i] *= scale;
}

void inverse(const Grid& g, std::complex<double>* data) {
  PlanPair& p = plans_for(g);
  fftw_complex* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p.bwd, d, d);
}

void set_threads(int) {
  // serial FFTW build; accepted for interface stability
}

} // namespace fft
} // namespace lpb
