#include "iel/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace iel::kernels {

#if !defined(IELSEG_HAVE_AVX2)
const Backend* avx2() { return nullptr; }
#endif
#if !defined(IELSEG_HAVE_NEON)
const Backend* neon() { return nullptr; }
#endif

namespace {

const Backend* detect() {
    if (const char* env = std::getenv("IELSEG_BACKEND")) {
        std::string want(env);
        if (want == "scalar") return &scalar();
        if (want == "avx2" && avx2()) return avx2();
        if (want == "neon" && neon()) return neon();
        // unknown or unsupported request: fall through to detection
    }
    if (const Backend* b = avx2()) return b;
    if (const Backend* b = neon()) return b;
    return &scalar();
}

const Backend*& current() {
    static const Backend* b = detect();
    return b;
}

}  // namespace

const Backend& active() { return *current(); }

void set_backend(const std::string& name) {
    if (name == "auto") {
        current() = detect();
        return;
    }
    if (name == "scalar") {
        current() = &scalar();
        return;
    }
    if (name == "avx2") {
        if (const Backend* b = avx2()) {
            current() = b;
            return;
        }
        throw std::invalid_argument("avx2 backend not available on this CPU");
    }
    if (name == "neon") {
        if (const Backend* b = neon()) {
            current() = b;
            return;
        }
        throw std::invalid_argument("neon backend not available on this CPU");
    }
    throw std::invalid_argument("unknown kernel backend: " + name);
}

}  // namespace iel::kernels
