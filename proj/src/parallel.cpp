#include "objir/parallel.hpp"

#include <cstdlib>
#include <string>

namespace objir {

int thread_count() {
    if (const char* env = std::getenv("RETARGET_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace objir
