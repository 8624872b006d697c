#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "basilic/model.hpp"

namespace basilic {

/// Wire tags.  EST is the initial binary-value broadcast of a round;
/// BVECHO is the amplification re-broadcast.  They tally together but only
/// EST participates in the conflict table.
enum class Tag : uint8_t {
    INIT = 0,
    ECHO_RB = 1,
    READY_RB = 2,
    EST = 3,
    BVECHO = 4,
    BVREADY = 5,
    COORD = 6,
    ECHO_BC = 7,
    DECIDE = 8,
    POFS = 9,
    RELAY = 10,
};

const char* tag_name(Tag t);

enum class InstanceKind : uint8_t { Aarb = 0, Aabc = 1 };

/// Protocol-instance id: AARB_k or AABC_k where k is the proposer index.
struct Instance {
    InstanceKind kind = InstanceKind::Aarb;
    uint32_t index = 0;

    bool operator==(const Instance&) const = default;
    auto operator<=>(const Instance&) const = default;
};

std::string instance_name(const Instance& inst);

class SignedMessage;
using MsgPtr = std::shared_ptr<const SignedMessage>;

/// A set of signed votes justifying (instance, round, value).  Validity is
/// threshold-relative: votes from removed signers are filtered, never
/// deleted.
struct Certificate {
    Instance inst;
    uint32_t round = 0;
    uint64_t value = 0;
    std::vector<MsgPtr> votes;

    bool empty() const { return votes.empty(); }
};

/// A pair of conflicting signed messages from one signer; transferable
/// evidence verifiable by any third party.
struct ProofOfFraud {
    ProcessId culprit = 0;
    MsgPtr msg_a;
    MsgPtr msg_b;

    uint64_t id() const;  // stable identity for dedup
};

/// Tag-dependent message body.  Unused fields stay at their defaults and
/// are not encoded.
struct Payload {
    uint64_t value = 0;                   // proposal value or binary estimate
    std::vector<uint8_t> aux;             // ECHO_BC: sorted value set
    std::optional<Certificate> cert;      // justification (tag-dependent)
    std::optional<Certificate> bv_cert;   // BVREADY: h(d_r) echo-family votes
    std::vector<ProofOfFraud> pofs;       // POFS
    std::vector<MsgPtr> inner;            // RELAY: original signed messages
};

/// Immutable protocol message bound to its signer.  The signature covers
/// the canonical encoding of (signer, tag, instance, round, payload), so
/// embedded certificates and relayed messages are authenticated as
/// attached.
class SignedMessage {
public:
    SignedMessage(ProcessId signer, Tag tag, Instance inst, uint32_t round, Payload payload,
                  std::vector<uint8_t> sig);

    ProcessId signer() const { return signer_; }
    Tag tag() const { return tag_; }
    const Instance& inst() const { return inst_; }
    uint32_t round() const { return round_; }
    const Payload& payload() const { return payload_; }
    std::span<const uint8_t> sig() const { return sig_; }

    /// Canonical bytes the signature covers.
    const std::vector<uint8_t>& signing_bytes() const { return signing_bytes_; }
    /// signing_bytes plus the length-prefixed signature.
    const std::vector<uint8_t>& wire_bytes() const { return wire_bytes_; }
    /// FNV-1a over wire_bytes; message identity for dedup and traces.
    uint64_t hash() const { return hash_; }

    /// Total signatures carried: own plus everything embedded, recursively.
    /// Unit of bit-complexity accounting.
    uint32_t signature_count() const { return sig_count_; }

    /// Short human-readable summary of the semantic content.
    std::string describe() const;

private:
    ProcessId signer_;
    Tag tag_;
    Instance inst_;
    uint32_t round_;
    Payload payload_;
    std::vector<uint8_t> sig_;
    std::vector<uint8_t> signing_bytes_;
    std::vector<uint8_t> wire_bytes_;
    uint64_t hash_ = 0;
    uint32_t sig_count_ = 0;
};

/// Signature scheme behind one interface; the simulator owns the key
/// material, processes only ever hold a Signer bound to their own id.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual std::string name() const = 0;
    virtual size_t sig_len() const = 0;  // lambda, in bytes
    virtual std::vector<uint8_t> sign(ProcessId signer, std::span<const uint8_t> data) const = 0;
    virtual bool verify(ProcessId signer, std::span<const uint8_t> data,
                        std::span<const uint8_t> sig) const = 0;
};

/// Deterministic keyed-tag scheme: sig = SHA-256(key_i || data), truncated
/// or extended to lambda bytes.  Fast path for exhaustive tests.
std::unique_ptr<SignatureScheme> make_keyed_scheme(uint64_t seed, uint32_t n, size_t lambda);

/// Ed25519 via libsodium, keypairs derived deterministically from seed.
std::unique_ptr<SignatureScheme> make_ed25519_scheme(uint64_t seed, uint32_t n);

std::unique_ptr<SignatureScheme> make_scheme(const std::string& name, uint64_t seed, uint32_t n,
                                             size_t lambda);

/// Signing capability for exactly one process id.
class Signer {
public:
    Signer() = default;
    Signer(const SignatureScheme* scheme, ProcessId self) : scheme_(scheme), self_(self) {}

    ProcessId self() const { return self_; }
    MsgPtr sign(Tag tag, Instance inst, uint32_t round, Payload payload) const;

private:
    const SignatureScheme* scheme_ = nullptr;
    ProcessId self_ = 0;
};

bool verify_message(const SignatureScheme& scheme, const SignedMessage& msg);

/// Conflict table: true iff same signer, same instance and the pair matches
/// a row (INIT, ECHO_RB, READY_RB, EST, COORD: same-slot different value;
/// ECHO_BC: same round different aux set; DECIDE: different decided value
/// in any rounds).  Symmetric; false for identical messages; BVECHO
/// amplifications and BVREADY never conflict.
bool conflicts(const SignedMessage& a, const SignedMessage& b);

bool verify_pof(const SignatureScheme& scheme, const ProofOfFraud& pof);
bool verify_pofs(const SignatureScheme& scheme, const std::vector<ProofOfFraud>& pofs);

/// Append-only store of every delivered and self-sent signed message,
/// including messages embedded in certificates and relays.
class MessageStore {
public:
    /// Adds msg if unseen.  Returns true when newly stored.
    bool add(const MsgPtr& msg);

    bool contains(uint64_t wire_hash) const { return seen_.count(wire_hash) != 0; }

    /// Messages from one signer in one slot, arrival order.
    const std::vector<MsgPtr>* slot(ProcessId signer, Tag tag, const Instance& inst,
                                    uint32_t round) const;

    /// Distinct signers with a message of tag in `tags` for (inst, round)
    /// whose semantic value matches `value` (ECHO_BC compares against the
    /// singleton set {value}).  Removed signers are skipped when `view` is
    /// given.
    std::set<ProcessId> supporters(std::initializer_list<Tag> tags, const Instance& inst,
                                   uint32_t round, uint64_t value,
                                   const CommitteeView* view) const;

    /// First h supporting messages (arrival order, one per signer).
    std::vector<MsgPtr> collect_votes(std::initializer_list<Tag> tags, const Instance& inst,
                                      uint32_t round, uint64_t value, const CommitteeView* view,
                                      size_t h) const;

    /// All stored messages of an instance with round >= round_min, arrival
    /// order (RELAY and POFS excluded: relays restate evidence).
    std::vector<MsgPtr> instance_slice(const Instance& inst, uint32_t round_min) const;

    /// ECHO_BC messages for (inst, round), one per non-removed signer,
    /// arrival order.
    std::vector<MsgPtr> echo_bc_messages(const Instance& inst, uint32_t round,
                                         const CommitteeView* view) const;

    /// Monotone counter bumped on every add; cheap change detection.
    uint64_t version() const { return version_; }

    size_t size() const { return arrival_.size(); }

private:
    friend std::vector<ProofOfFraud> check_conflicts(const std::vector<MsgPtr>&, MessageStore&,
                                                     const CommitteeView*);

    using SlotKey = std::tuple<ProcessId, Tag, Instance, uint32_t>;
    std::map<SlotKey, std::vector<MsgPtr>> slots_;
    std::unordered_set<uint64_t> seen_;
    std::vector<MsgPtr> arrival_;
    uint64_t version_ = 0;
};

/// Unpacks certificates and relays into individual signed messages, then
/// returns one PoF per newly-discoverable culprit: the earliest stored
/// conflicting message paired with the incoming one.  The store is
/// extended with everything processed.  Culprits already removed in `view`
/// yield no fresh PoFs.
std::vector<ProofOfFraud> check_conflicts(const std::vector<MsgPtr>& incoming, MessageStore& store,
                                          const CommitteeView* view = nullptr);

/// True iff distinct non-removed signers supporting cert.{inst,round,value}
/// number at least threshold(view.h0, view.d_r), every vote's signature
/// verifies and all votes share one tag family.
bool certificate_valid(const SignatureScheme& scheme, const Certificate& cert,
                       const CommitteeView& view);

/// Structural check without the threshold: signatures, slot matching and
/// value support.
bool certificate_well_formed(const SignatureScheme& scheme, const Certificate& cert);

/// Distinct non-removed supporting signers in the certificate.
uint32_t certificate_usable_votes(const Certificate& cert, const CommitteeView& view);

}  // namespace basilic
