#include "bhk/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <tuple>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

namespace bhk {

namespace {

std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plans;

fftw_plan get_plan(const Grid& g, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(g.n, g.N, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  int dims[3] = {g.N, g.N, g.N};
  fftw_complex* buf = fftw_alloc_complex(g.size());
  fftw_plan p = fftw_plan_dft(g.n, dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  plans.emplace(key, p);
  return p;
}

}  // namespace

void fft_forward_inplace(const Grid& g, cplx* data) {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(get_plan(g, FFTW_FORWARD), d, d);
}

Spectrum fft_forward(const Grid& g, const double* in) {
  Spectrum s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = cplx(in[i], 0.0);
  fft_forward_inplace(g, s.data());
  return s;
}

void fft_inverse_real(const Grid& g, cplx* data, double* out) {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(get_plan(g, FFTW_BACKWARD), d, d);
  const std::size_t M = g.size();
  const double inv = 1.0 / static_cast<double>(M);
  for (std::size_t i = 0; i < M; ++i) out[i] = data[i].real() * inv;
}

std::vector<double> fft_inverse_real(const Grid& g, Spectrum data) {
  std::vector<double> out(g.size());
  fft_inverse_real(g, data.data(), out.data());
  return out;
}

int thread_count() {
  static const int count = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("BHK_THREADS")) {
      int cap = std::atoi(env);
      if (cap > 0 && cap < hw) hw = cap;
    }
    return hw;
  }();
  return count;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace bhk
