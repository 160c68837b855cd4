#include "gmmlab/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmmlab {

namespace {
std::atomic<Exec> g_exec{
#ifdef _OPENMP
    Exec::OpenMp
#else
    Exec::Serial
#endif
};
}  // namespace

Exec default_exec() { return g_exec.load(std::memory_order_relaxed); }

void set_default_exec(Exec exec) {
  g_exec.store(exec, std::memory_order_relaxed);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace gmmlab
