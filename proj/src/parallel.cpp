#include "wasser_dual/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

#include "wasser_dual/dense_matrix.hpp"

namespace wd {
namespace {

int read_env_cap() {
  const char* raw = std::getenv("WASSER_DUAL_THREADS");
  if (raw == nullptr) return 0;
  try {
    int value = std::stoi(raw);
    return value > 0 ? value : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

std::atomic<int>& cap_storage() {
  static std::atomic<int> cap{read_env_cap()};
  return cap;
}

}  // namespace

int thread_count() {
  int cap = cap_storage().load(std::memory_order_relaxed);
  int available = omp_get_max_threads();
  return cap > 0 && cap < available ? cap : available;
}

void set_thread_cap(int cap) { cap_storage().store(cap > 0 ? cap : 0); }

void reload_thread_cap_from_env() { cap_storage().store(read_env_cap()); }

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  const auto rows = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long i = 0; i < rows; ++i) {
    auto out_row = out.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(static_cast<std::size_t>(i), k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

}  // namespace wd
