#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace gmmlab {

enum class Exec { Serial, OpenMp };

// Process-wide default execution mode for the batched kernels.
Exec default_exec();
void set_default_exec(Exec exec);
int max_threads();

// Fixed batch size shared by the serial and OpenMP paths. Results are
// combined in batch-index order, so both paths produce identical bits and
// the result does not depend on the number of threads.
inline constexpr std::int64_t kReduceBatch = 4096;

inline std::int64_t batch_count(std::int64_t n) {
  return (n + kReduceBatch - 1) / kReduceBatch;
}

// acc = zero; for each batch b: body(part_b, begin, end); fold parts in order.
template <class Acc, class Body, class Combine>
Acc reduce_batches(std::int64_t count, const Acc& zero, Body&& body,
                   Combine&& combine, Exec exec) {
  const std::int64_t nb = batch_count(count);
  Acc acc = zero;
  if (nb <= 0) return acc;
  if (exec == Exec::Serial || nb == 1) {
    for (std::int64_t b = 0; b < nb; ++b) {
      Acc part = zero;
      body(part, b * kReduceBatch, std::min(count, (b + 1) * kReduceBatch));
      combine(acc, part);
    }
    return acc;
  }
  std::vector<Acc> parts(static_cast<std::size_t>(nb), zero);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    body(parts[static_cast<std::size_t>(b)], b * kReduceBatch,
         std::min(count, (b + 1) * kReduceBatch));
  }
  for (std::int64_t b = 0; b < nb; ++b) {
    combine(acc, parts[static_cast<std::size_t>(b)]);
  }
  return acc;
}

template <class Acc, class Body, class Combine>
Acc reduce_batches(std::int64_t count, const Acc& zero, Body&& body,
                   Combine&& combine) {
  return reduce_batches(count, zero, std::forward<Body>(body),
                        std::forward<Combine>(combine), default_exec());
}

// Independent per-batch side effects (e.g. filling disjoint rows).
template <class Body>
void for_batches(std::int64_t count, Body&& body, Exec exec) {
  const std::int64_t nb = batch_count(count);
  if (nb <= 0) return;
  if (exec == Exec::Serial || nb == 1) {
    for (std::int64_t b = 0; b < nb; ++b) {
      body(b * kReduceBatch, std::min(count, (b + 1) * kReduceBatch));
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    body(b * kReduceBatch, std::min(count, (b + 1) * kReduceBatch));
  }
}

template <class Body>
void for_batches(std::int64_t count, Body&& body) {
  for_batches(count, std::forward<Body>(body), default_exec());
}

}  // namespace gmmlab
