#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace basilic {

/// Index of a process in the initial committee [0, n0).  Stable for the
/// lifetime of a run; removal never reuses an id.
using ProcessId = uint32_t;

/// Fault-model configuration shared by every process of a run.  t, d and q
/// are the assumed maximum counts of Byzantine, deceitful and benign
/// processes; h0 is the initial voting threshold.
struct FaultConfig {
    uint32_t n = 0;
    uint32_t t = 0;
    uint32_t d = 0;
    uint32_t q = 0;
    uint32_t h0 = 0;

    bool operator==(const FaultConfig&) const = default;
};

/// Result of validating a FaultConfig against the resilience bounds.
struct ConfigVerdict {
    bool accepted = false;
    std::vector<std::string> reasons;  // each violated inequality, spelled out
};

/// Accepts iff h0 lies in (n/2, n], d+t < 2*h0-n (safety) and
/// q+t <= n-h0 (liveness).  When no threshold in (n/2, n] could satisfy
/// both bounds, the threshold-free bound n > 3t+d+2q is reported as well.
ConfigVerdict validate_config(const FaultConfig& cfg);

/// True iff some integer h0 in (n/2, n] would satisfy both bounds.
/// Equivalent to n > 3t+d+2q.
bool some_threshold_works(uint32_t n, uint32_t t, uint32_t d, uint32_t q);

/// Adaptive voting threshold h(d_r) = h0 - d_r.  Throws std::domain_error
/// when d_r >= h0: the committee collapsed, i.e. the scenario exceeded
/// every tolerated bound.
uint32_t threshold(uint32_t h0, uint32_t d_r);

/// Echo-amplification threshold floor((n-q-t)/2) - d_r + 1, computed over
/// the *initial* n and the assumed bounds q and t.  May return a value
/// below 1; callers treat that as a committee-collapse signal.
int64_t amplification_threshold(uint32_t n, uint32_t q, uint32_t t, uint32_t d_r);

/// Round phase of the binary-consensus loop.  Round parity (r mod 2)
/// drives the decision rule.
enum class Phase : uint8_t { Phase1 = 1, Phase2 = 2, Decision = 3 };

struct RoundPhase {
    uint32_t round = 1;  // positive
    Phase phase = Phase::Phase1;

    uint8_t parity() const { return static_cast<uint8_t>(round % 2); }
};

class ProofOfFraud;  // evidence.hpp

/// Per-process view of the committee: live members, detected-deceitful
/// set and the adaptive threshold.  Shared across all protocol instances
/// of one process; mutated only inside that process's event handler.
class CommitteeView {
public:
    CommitteeView() = default;
    CommitteeView(uint32_t n0, uint32_t h0) : n0_(n0), h0_(h0) {}

    uint32_t initial_n() const { return n0_; }
    uint32_t h0() const { return h0_; }
    uint32_t removed_count() const { return static_cast<uint32_t>(removed_.size()); }
    uint32_t current_threshold() const { return threshold(h0_, removed_count()); }

    bool is_removed(ProcessId p) const { return removed_.count(p) != 0; }
    const std::set<ProcessId>& removed() const { return removed_; }

    /// Moves p out of the live membership.  Removal only grows; returns
    /// false when p was already removed.
    bool remove(ProcessId p) {
        if (p >= n0_) return false;
        return removed_.insert(p).second;
    }

private:
    uint32_t n0_ = 0;
    uint32_t h0_ = 0;
    std::set<ProcessId> removed_;
};

}  // namespace basilic
