#include "shardlearn/parallel.hpp"

#include <cstdlib>

namespace shardlearn {

static int g_override = -1;

void set_thread_override(int n) { g_override = n; }

int thread_count() {
  if (g_override >= 0) return g_override;
  const char* env = std::getenv("SHARDLEARN_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || v < 0) return 0;
  return static_cast<int>(v);
}

}  // namespace shardlearn
