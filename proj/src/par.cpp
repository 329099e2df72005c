#include "zoll/par.hpp"

#include <atomic>

namespace zoll::par {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n); }
int threads() { return g_threads.load(); }

}  // namespace zoll::par
