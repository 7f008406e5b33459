#include "slowenv/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace slowenv::kernels {

#if defined(__x86_64__) || defined(__i386__)
const Ops* avx2_ops_impl();
#endif
#if defined(__aarch64__)
const Ops* neon_ops_impl();
#endif

namespace {

const Ops* pick_backend() {
    const char* env = std::getenv("SLOWENV_KERNELS");
    std::string_view want = env ? std::string_view(env) : std::string_view("auto");
    if (want == "scalar") return &scalar_ops();
    if (const Ops* named = (want == "auto") ? nullptr : ops_by_name(want)) return named;
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops_impl();
#endif
#if defined(__aarch64__)
    return neon_ops_impl();
#endif
    return &scalar_ops();
}

}  // namespace

const Ops* ops_by_name(std::string_view name) {
    if (name == "scalar") return &scalar_ops();
#if defined(__x86_64__) || defined(__i386__)
    if (name == "avx2" && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_ops_impl();
#endif
#if defined(__aarch64__)
    if (name == "neon") return neon_ops_impl();
#endif
    return nullptr;
}

const Ops& active() {
    static const Ops* chosen = pick_backend();
    return *chosen;
}

}  // namespace slowenv::kernels
