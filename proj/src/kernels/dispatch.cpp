#include "sketchcbr/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "sketchcbr/errors.hpp"

namespace sketchcbr::kernels {

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* resolve_default() {
    if (const char* env = std::getenv("SKETCHCBR_SIMD")) {
        const std::string name(env);
        if (name == "scalar") return &scalar_table();
        if (name == "avx2") {
            if (const KernelTable* t = avx2_table()) return t;
            throw ConfigError("SKETCHCBR_SIMD=avx2 but AVX2 is not available on this CPU");
        }
        throw ConfigError("unknown SKETCHCBR_SIMD value: " + name);
    }
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
}

}  // namespace

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = resolve_default();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void set_active(const std::string& name) {
    if (name == "scalar") {
        g_active.store(&scalar_table(), std::memory_order_release);
        return;
    }
    if (name == "avx2") {
        if (const KernelTable* t = avx2_table()) {
            g_active.store(t, std::memory_order_release);
            return;
        }
        throw ConfigError("AVX2 kernels are not available on this CPU");
    }
    throw ConfigError("unknown kernel variant: " + name);
}

std::vector<std::string> available_variants() {
    std::vector<std::string> names{"scalar"};
    if (avx2_table()) names.emplace_back("avx2");
    return names;
}

}  // namespace sketchcbr::kernels
