#pragma once

#include <span>
#include <vector>

namespace qrg {

struct TransitionKernel;

// A batch of m distributions over n states, row-major (m x n).
// Each call advances every row one step: mu_i <- mu_i P.
// The serial versions are the reference the OpenMP versions are tested against.
void evolve_batch_serial(const TransitionKernel& k, std::span<const double> in,
                         std::span<double> out, int m);
void evolve_batch_parallel(const TransitionKernel& k, std::span<const double> in,
                           std::span<double> out, int m);

// Per-row TV distance to pi.
void batch_tv_serial(std::span<const double> rows, std::span<const double> pi, int m,
                     std::span<double> tv);
void batch_tv_parallel(std::span<const double> rows, std::span<const double> pi, int m,
                       std::span<double> tv);

void set_threads(int threads);
int max_threads();

}  // namespace qrg
