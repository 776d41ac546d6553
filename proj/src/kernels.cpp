#include "qrg/kernels.hpp"

#include <cmath>

#include <omp.h>

#include "qrg/markov.hpp"

namespace qrg {

namespace {

inline void evolve_row(const TransitionKernel& k, const double* mu, double* out) {
  for (int y = 0; y < k.n; ++y) {
    double s = 0.0;
    for (int e = k.t_row_ptr[y]; e < k.t_row_ptr[y + 1]; ++e) s += mu[k.t_col[e]] * k.t_val[e];
    out[y] = s;
  }
}

inline double row_tv(const double* mu, const double* pi, int n) {
  double s = 0.0;
  for (int y = 0; y < n; ++y) s += std::abs(mu[y] - pi[y]);
  return 0.5 * s;
}

}  // namespace

void evolve_batch_serial(const TransitionKernel& k, std::span<const double> in,
                         std::span<double> out, int m) {
  const std::size_t n = k.n;
  for (int i = 0; i < m; ++i) evolve_row(k, in.data() + i * n, out.data() + i * n);
}

void evolve_batch_parallel(const TransitionKernel& k, std::span<const double> in,
                           std::span<double> out, int m) {
  const std::size_t n = k.n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) evolve_row(k, in.data() + i * n, out.data() + i * n);
}

void batch_tv_serial(std::span<const double> rows, std::span<const double> pi, int m,
                     std::span<double> tv) {
  const int n = static_cast<int>(pi.size());
  for (int i = 0; i < m; ++i) tv[i] = row_tv(rows.data() + std::size_t(i) * n, pi.data(), n);
}

void batch_tv_parallel(std::span<const double> rows, std::span<const double> pi, int m,
                       std::span<double> tv) {
  const int n = static_cast<int>(pi.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) tv[i] = row_tv(rows.data() + std::size_t(i) * n, pi.data(), n);
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace qrg
