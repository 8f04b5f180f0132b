#include "rebirthlab/parallel.hpp"

namespace rebirthlab {

namespace {
std::atomic<int> g_worker_override{0};
}

void set_worker_override(int n) { g_worker_override.store(n); }

int worker_count() {
    const int forced = g_worker_override.load();
    if (forced > 0) return forced;
    if (const char* env = std::getenv("REBIRTHLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace rebirthlab
