#include "spatial_link/parallel.hpp"

#include <cstdlib>
#include <string>

namespace spatial_link {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPATIAL_LINK_THREADS")) {
        try {
            const auto n = std::stoul(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace spatial_link
