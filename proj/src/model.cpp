#include "basilic/model.hpp"

#include <stdexcept>

namespace basilic {

bool some_threshold_works(uint32_t n, uint32_t t, uint32_t d, uint32_t q) {
    // A valid h0 in (n/2, n] satisfying d+t < 2h0-n and q+t <= n-h0 exists
    // iff n > 3t+d+2q.  Checked directly to stay independent of algebra.
    for (uint32_t h = n / 2 + 1; h <= n; ++h) {
        const bool safety = static_cast<int64_t>(d) + t < 2 * static_cast<int64_t>(h) - n;
        const bool liveness = static_cast<int64_t>(q) + t <= static_cast<int64_t>(n) - h;
        if (safety && liveness) return true;
    }
    return false;
}

ConfigVerdict validate_config(const FaultConfig& cfg) {
    ConfigVerdict v;
    const int64_t n = cfg.n, t = cfg.t, d = cfg.d, q = cfg.q, h0 = cfg.h0;

    if (n < 1) v.reasons.push_back("n must be at least 1");
    if (t + d + q >= n)
        v.reasons.push_back("t+d+q < n violated: " + std::to_string(t + d + q) +
                            " >= " + std::to_string(n));
    if (!(2 * h0 > n && h0 <= n))
        v.reasons.push_back("h0 in (n/2, n] violated: h0=" + std::to_string(h0) +
                            ", n=" + std::to_string(n));
    if (!(d + t < 2 * h0 - n))
        v.reasons.push_back("safety d+t < 2*h0-n violated: " + std::to_string(d + t) +
                            " >= " + std::to_string(2 * h0 - n));
    if (!(q + t <= n - h0))
        v.reasons.push_back("liveness q+t <= n-h0 violated: " + std::to_string(q + t) +
                            " > " + std::to_string(n - h0));
    if (!v.reasons.empty() && !some_threshold_works(cfg.n, cfg.t, cfg.d, cfg.q))
        v.reasons.push_back("no threshold can work: n <= 3t+d+2q (" + std::to_string(n) +
                            " <= " + std::to_string(3 * t + d + 2 * q) + ")");
    v.accepted = v.reasons.empty();
    return v;
}

uint32_t threshold(uint32_t h0, uint32_t d_r) {
    if (d_r >= h0)
        throw std::domain_error("committee collapsed: d_r=" + std::to_string(d_r) +
                                " >= h0=" + std::to_string(h0));
    return h0 - d_r;
}

int64_t amplification_threshold(uint32_t n, uint32_t q, uint32_t t, uint32_t d_r) {
    const int64_t base = (static_cast<int64_t>(n) - q - t) / 2;
    return base - static_cast<int64_t>(d_r) + 1;
}

}  // namespace basilic
