#include "ensemblekit/parallel.hpp"

#include <omp.h>

namespace ensemblekit {

int max_threads() { return omp_get_max_threads(); }

}  // namespace ensemblekit
