#include "waterline/parallel.hpp"

#include <omp.h>

namespace waterline {

namespace {
int g_jobs = 0;
}

void set_jobs(int n) {
  g_jobs = n < 1 ? omp_get_num_procs() : n;
  omp_set_num_threads(g_jobs);
}

int jobs() { return g_jobs < 1 ? omp_get_max_threads() : g_jobs; }

}  // namespace waterline
