#pragma once

namespace shardlearn {

// Worker threads for the optional parallel paths. 0 or 1 means serial, which
// is the normative mode; parallel paths must produce bit-identical results.
// Resolution order: explicit override, then SHARDLEARN_THREADS, then serial.
int thread_count();
void set_thread_override(int n);  // -1 clears the override

}  // namespace shardlearn
