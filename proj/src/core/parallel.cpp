#include "mobigg/core/parallel.hpp"

#include <cstdlib>
#include <string>

namespace mobigg::core {

unsigned default_thread_count() {
  if (const char* env = std::getenv("MOBIGG_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace mobigg::core
