#include "mondrian/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mondrian {

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  const char* raw = std::getenv("MK_THREADS");
  if (!raw) return;
  try {
    const int cap = std::stoi(raw);
    if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
  } catch (...) {
    // Ignore malformed values; the default thread count stands.
  }
#endif
}

int effective_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace mondrian
