#include "basilic/evidence.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace basilic {

const char* tag_name(Tag t) {
    switch (t) {
        case Tag::INIT: return "INIT";
        case Tag::ECHO_RB: return "ECHO_RB";
        case Tag::READY_RB: return "READY_RB";
        case Tag::EST: return "EST";
        case Tag::BVECHO: return "BVECHO";
        case Tag::BVREADY: return "BVREADY";
        case Tag::COORD: return "COORD";
        case Tag::ECHO_BC: return "ECHO_BC";
        case Tag::DECIDE: return "DECIDE";
        case Tag::POFS: return "POFS";
        case Tag::RELAY: return "RELAY";
    }
    return "?";
}

std::string instance_name(const Instance& inst) {
    return (inst.kind == InstanceKind::Aarb ? "AARB_" : "AABC_") + std::to_string(inst.index);
}

// ---------------------------------------------------------------------------
// Canonical encoding: fixed field order, little-endian fixed-width integers,
// length-prefixed variable parts.  Equal logical content is bit-equal.
// ---------------------------------------------------------------------------

namespace {

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_bytes(std::vector<uint8_t>& out, std::span<const uint8_t> b) {
    put_u32(out, static_cast<uint32_t>(b.size()));
    out.insert(out.end(), b.begin(), b.end());
}

void put_wire(std::vector<uint8_t>& out, const SignedMessage& m) {
    put_bytes(out, m.wire_bytes());
}

void put_cert(std::vector<uint8_t>& out, const std::optional<Certificate>& cert) {
    if (!cert || cert->empty()) {
        put_u8(out, 0);
        return;
    }
    put_u8(out, 1);
    put_u8(out, static_cast<uint8_t>(cert->inst.kind));
    put_u32(out, cert->inst.index);
    put_u32(out, cert->round);
    put_u64(out, cert->value);
    put_u32(out, static_cast<uint32_t>(cert->votes.size()));
    for (const auto& v : cert->votes) put_wire(out, *v);
}

std::vector<uint8_t> encode_signing_bytes(ProcessId signer, Tag tag, const Instance& inst,
                                          uint32_t round, const Payload& p) {
    std::vector<uint8_t> out;
    put_u8(out, static_cast<uint8_t>(tag));
    put_u8(out, static_cast<uint8_t>(inst.kind));
    put_u32(out, inst.index);
    put_u32(out, round);
    put_u32(out, signer);
    switch (tag) {
        case Tag::INIT:
        case Tag::ECHO_RB:
            put_u64(out, p.value);
            break;
        case Tag::READY_RB:
            put_u64(out, p.value);
            put_cert(out, p.cert);
            break;
        case Tag::EST:
        case Tag::BVECHO:
            put_u8(out, static_cast<uint8_t>(p.value));
            put_cert(out, p.cert);
            break;
        case Tag::BVREADY:
            put_u8(out, static_cast<uint8_t>(p.value));
            put_cert(out, p.cert);
            put_cert(out, p.bv_cert);
            break;
        case Tag::COORD:
            put_u8(out, static_cast<uint8_t>(p.value));
            break;
        case Tag::ECHO_BC:
            put_u8(out, static_cast<uint8_t>(p.aux.size()));
            for (uint8_t b : p.aux) put_u8(out, b);
            break;
        case Tag::DECIDE:
            put_u8(out, static_cast<uint8_t>(p.value));
            put_cert(out, p.cert);
            break;
        case Tag::POFS:
            put_u32(out, static_cast<uint32_t>(p.pofs.size()));
            for (const auto& pof : p.pofs) {
                put_u32(out, pof.culprit);
                put_wire(out, *pof.msg_a);
                put_wire(out, *pof.msg_b);
            }
            break;
        case Tag::RELAY:
            put_u32(out, static_cast<uint32_t>(p.inner.size()));
            for (const auto& m : p.inner) put_wire(out, *m);
            break;
    }
    return out;
}

uint64_t fnv1a(std::span<const uint8_t> data) {
    uint64_t h = 1469598103934665603ull;
    for (uint8_t b : data) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

uint32_t count_cert_sigs(const std::optional<Certificate>& cert) {
    if (!cert) return 0;
    uint32_t n = 0;
    for (const auto& v : cert->votes) n += v->signature_count();
    return n;
}

}  // namespace

SignedMessage::SignedMessage(ProcessId signer, Tag tag, Instance inst, uint32_t round,
                             Payload payload, std::vector<uint8_t> sig)
    : signer_(signer),
      tag_(tag),
      inst_(inst),
      round_(round),
      payload_(std::move(payload)),
      sig_(std::move(sig)) {
    signing_bytes_ = encode_signing_bytes(signer_, tag_, inst_, round_, payload_);
    wire_bytes_ = signing_bytes_;
    put_bytes(wire_bytes_, sig_);
    hash_ = fnv1a(wire_bytes_);
    sig_count_ = 1 + count_cert_sigs(payload_.cert) + count_cert_sigs(payload_.bv_cert);
    for (const auto& m : payload_.inner) sig_count_ += m->signature_count();
    for (const auto& pof : payload_.pofs)
        sig_count_ += pof.msg_a->signature_count() + pof.msg_b->signature_count();
}

std::string SignedMessage::describe() const {
    std::ostringstream os;
    os << tag_name(tag_) << "[" << instance_name(inst_) << " r" << round_ << "] p" << signer_;
    switch (tag_) {
        case Tag::ECHO_BC: {
            os << " aux={";
            for (size_t i = 0; i < payload_.aux.size(); ++i)
                os << (i ? "," : "") << int(payload_.aux[i]);
            os << "}";
            break;
        }
        case Tag::POFS:
            os << " pofs=" << payload_.pofs.size();
            break;
        case Tag::RELAY:
            os << " inner=" << payload_.inner.size();
            break;
        default:
            os << " v=" << payload_.value;
    }
    return os.str();
}

uint64_t ProofOfFraud::id() const {
    uint64_t a = msg_a ? msg_a->hash() : 0;
    uint64_t b = msg_b ? msg_b->hash() : 0;
    if (a > b) std::swap(a, b);
    uint64_t h = 0x9e3779b97f4a7c15ull ^ culprit;
    h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

// ---------------------------------------------------------------------------
// Signature schemes
// ---------------------------------------------------------------------------

namespace {

struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    }
};

void ensure_sodium() { static SodiumInit init; }

class KeyedScheme final : public SignatureScheme {
public:
    KeyedScheme(uint64_t seed, uint32_t n, size_t lambda) : lambda_(lambda) {
        ensure_sodium();
        keys_.resize(n);
        for (uint32_t i = 0; i < n; ++i) {
            std::vector<uint8_t> material;
            put_u64(material, seed);
            put_u32(material, i);
            keys_[i].resize(crypto_hash_sha256_BYTES);
            crypto_hash_sha256(keys_[i].data(), material.data(), material.size());
        }
    }

    std::string name() const override { return "keyed"; }
    size_t sig_len() const override { return lambda_; }

    std::vector<uint8_t> sign(ProcessId signer, std::span<const uint8_t> data) const override {
        if (signer >= keys_.size()) throw std::invalid_argument("unknown signer");
        uint8_t digest[crypto_hash_sha256_BYTES];
        crypto_hash_sha256_state st;
        crypto_hash_sha256_init(&st);
        crypto_hash_sha256_update(&st, keys_[signer].data(), keys_[signer].size());
        crypto_hash_sha256_update(&st, data.data(), data.size());
        crypto_hash_sha256_final(&st, digest);
        std::vector<uint8_t> sig(lambda_);
        for (size_t i = 0; i < lambda_; ++i) sig[i] = digest[i % crypto_hash_sha256_BYTES] ^ static_cast<uint8_t>(i / crypto_hash_sha256_BYTES);
        return sig;
    }

    bool verify(ProcessId signer, std::span<const uint8_t> data,
                std::span<const uint8_t> sig) const override {
        if (signer >= keys_.size()) return false;
        const auto expect = sign(signer, data);
        return sig.size() == expect.size() && std::equal(sig.begin(), sig.end(), expect.begin());
    }

private:
    size_t lambda_;
    std::vector<std::vector<uint8_t>> keys_;
};

class Ed25519Scheme final : public SignatureScheme {
public:
    Ed25519Scheme(uint64_t seed, uint32_t n) {
        ensure_sodium();
        pks_.resize(n);
        sks_.resize(n);
        for (uint32_t i = 0; i < n; ++i) {
            std::vector<uint8_t> material;
            put_u64(material, seed);
            put_u32(material, i);
            uint8_t kseed[crypto_sign_SEEDBYTES];
            crypto_hash_sha256(kseed, material.data(), material.size());
            pks_[i].resize(crypto_sign_PUBLICKEYBYTES);
            sks_[i].resize(crypto_sign_SECRETKEYBYTES);
            crypto_sign_seed_keypair(pks_[i].data(), sks_[i].data(), kseed);
        }
    }

    std::string name() const override { return "ed25519"; }
    size_t sig_len() const override { return crypto_sign_BYTES; }

    std::vector<uint8_t> sign(ProcessId signer, std::span<const uint8_t> data) const override {
        if (signer >= sks_.size()) throw std::invalid_argument("unknown signer");
        std::vector<uint8_t> sig(crypto_sign_BYTES);
        unsigned long long len = 0;
        crypto_sign_detached(sig.data(), &len, data.data(), data.size(), sks_[signer].data());
        sig.resize(len);
        return sig;
    }

    bool verify(ProcessId signer, std::span<const uint8_t> data,
                std::span<const uint8_t> sig) const override {
        if (signer >= pks_.size() || sig.size() != crypto_sign_BYTES) return false;
        return crypto_sign_verify_detached(sig.data(), data.data(), data.size(),
                                           pks_[signer].data()) == 0;
    }

private:
    std::vector<std::vector<uint8_t>> pks_;
    std::vector<std::vector<uint8_t>> sks_;
};

}  // namespace

std::unique_ptr<SignatureScheme> make_keyed_scheme(uint64_t seed, uint32_t n, size_t lambda) {
    return std::make_unique<KeyedScheme>(seed, n, lambda);
}

std::unique_ptr<SignatureScheme> make_ed25519_scheme(uint64_t seed, uint32_t n) {
    return std::make_unique<Ed25519Scheme>(seed, n);
}

std::unique_ptr<SignatureScheme> make_scheme(const std::string& name, uint64_t seed, uint32_t n,
                                             size_t lambda) {
    if (name == "keyed") return make_keyed_scheme(seed, n, lambda);
    if (name == "ed25519") return make_ed25519_scheme(seed, n);
    throw std::invalid_argument("unknown signature scheme: " + name);
}

MsgPtr Signer::sign(Tag tag, Instance inst, uint32_t round, Payload payload) const {
    if (!scheme_) throw std::logic_error("signer not bound to a scheme");
    auto bytes = encode_signing_bytes(self_, tag, inst, round, payload);
    auto sig = scheme_->sign(self_, bytes);
    return std::make_shared<SignedMessage>(self_, tag, inst, round, std::move(payload),
                                           std::move(sig));
}

bool verify_message(const SignatureScheme& scheme, const SignedMessage& msg) {
    return scheme.verify(msg.signer(), msg.signing_bytes(), msg.sig());
}

// ---------------------------------------------------------------------------
// Conflict table
// ---------------------------------------------------------------------------

bool conflicts(const SignedMessage& a, const SignedMessage& b) {
    if (a.signer() != b.signer()) return false;
    if (a.tag() != b.tag()) return false;
    if (!(a.inst() == b.inst())) return false;
    if (a.hash() == b.hash()) return false;
    switch (a.tag()) {
        case Tag::INIT:
        case Tag::ECHO_RB:
        case Tag::READY_RB:
            return a.payload().value != b.payload().value;
        case Tag::EST:
        case Tag::COORD:
            return a.round() == b.round() && a.payload().value != b.payload().value;
        case Tag::ECHO_BC:
            return a.round() == b.round() && a.payload().aux != b.payload().aux;
        case Tag::DECIDE:
            return a.payload().value != b.payload().value;
        default:
            return false;  // BVECHO re-broadcasts, BVREADY, POFS, RELAY
    }
}

bool verify_pof(const SignatureScheme& scheme, const ProofOfFraud& pof) {
    if (!pof.msg_a || !pof.msg_b) return false;
    if (pof.msg_a->signer() != pof.culprit || pof.msg_b->signer() != pof.culprit) return false;
    if (!verify_message(scheme, *pof.msg_a) || !verify_message(scheme, *pof.msg_b)) return false;
    return conflicts(*pof.msg_a, *pof.msg_b);
}

bool verify_pofs(const SignatureScheme& scheme, const std::vector<ProofOfFraud>& pofs) {
    for (const auto& p : pofs)
        if (!verify_pof(scheme, p)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// MessageStore
// ---------------------------------------------------------------------------

namespace {

/// Semantic support of a message for value v (certificate vote semantics).
bool supports_value(const SignedMessage& m, uint64_t v) {
    switch (m.tag()) {
        case Tag::ECHO_BC:
            return m.payload().aux.size() == 1 && m.payload().aux[0] == v;
        case Tag::INIT:
        case Tag::ECHO_RB:
        case Tag::EST:
        case Tag::BVECHO:
            return m.payload().value == v;
        default:
            return false;
    }
}

}  // namespace

bool MessageStore::add(const MsgPtr& msg) {
    if (!seen_.insert(msg->hash()).second) return false;
    slots_[{msg->signer(), msg->tag(), msg->inst(), msg->round()}].push_back(msg);
    arrival_.push_back(msg);
    ++version_;
    return true;
}

const std::vector<MsgPtr>* MessageStore::slot(ProcessId signer, Tag tag, const Instance& inst,
                                              uint32_t round) const {
    auto it = slots_.find({signer, tag, inst, round});
    return it == slots_.end() ? nullptr : &it->second;
}

std::set<ProcessId> MessageStore::supporters(std::initializer_list<Tag> tags, const Instance& inst,
                                             uint32_t round, uint64_t value,
                                             const CommitteeView* view) const {
    std::set<ProcessId> out;
    for (const auto& m : arrival_) {
        if (!(m->inst() == inst) || m->round() != round) continue;
        if (std::find(tags.begin(), tags.end(), m->tag()) == tags.end()) continue;
        if (view && view->is_removed(m->signer())) continue;
        if (supports_value(*m, value)) out.insert(m->signer());
    }
    return out;
}

std::vector<MsgPtr> MessageStore::collect_votes(std::initializer_list<Tag> tags,
                                                const Instance& inst, uint32_t round,
                                                uint64_t value, const CommitteeView* view,
                                                size_t h) const {
    std::vector<MsgPtr> out;
    std::set<ProcessId> taken;
    for (const auto& m : arrival_) {
        if (out.size() >= h) break;
        if (!(m->inst() == inst) || m->round() != round) continue;
        if (std::find(tags.begin(), tags.end(), m->tag()) == tags.end()) continue;
        if (view && view->is_removed(m->signer())) continue;
        if (!supports_value(*m, value)) continue;
        if (!taken.insert(m->signer()).second) continue;
        out.push_back(m);
    }
    return out;
}

std::vector<MsgPtr> MessageStore::instance_slice(const Instance& inst, uint32_t round_min) const {
    std::vector<MsgPtr> out;
    for (const auto& m : arrival_) {
        if (!(m->inst() == inst)) continue;
        if (m->tag() == Tag::RELAY || m->tag() == Tag::POFS) continue;
        if (m->round() < round_min && m->tag() != Tag::DECIDE) continue;
        out.push_back(m);
    }
    return out;
}

std::vector<MsgPtr> MessageStore::echo_bc_messages(const Instance& inst, uint32_t round,
                                                   const CommitteeView* view) const {
    std::vector<MsgPtr> out;
    std::set<ProcessId> taken;
    for (const auto& m : arrival_) {
        if (m->tag() != Tag::ECHO_BC || !(m->inst() == inst) || m->round() != round) continue;
        if (view && view->is_removed(m->signer())) continue;
        if (!taken.insert(m->signer()).second) continue;
        out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conflict checking over incoming messages
// ---------------------------------------------------------------------------

namespace {

void flatten(const MsgPtr& msg, std::vector<MsgPtr>& out) {
    out.push_back(msg);
    const auto& p = msg->payload();
    if (p.cert)
        for (const auto& v : p.cert->votes) flatten(v, out);
    if (p.bv_cert)
        for (const auto& v : p.bv_cert->votes) flatten(v, out);
    for (const auto& m : p.inner) flatten(m, out);
}

}  // namespace

std::vector<ProofOfFraud> check_conflicts(const std::vector<MsgPtr>& incoming, MessageStore& store,
                                          const CommitteeView* view) {
    std::vector<MsgPtr> flat;
    for (const auto& m : incoming) flatten(m, flat);

    std::vector<ProofOfFraud> pofs;
    std::set<ProcessId> accused;
    for (const auto& m : flat) {
        if (store.contains(m->hash())) continue;
        const bool removed = view && view->is_removed(m->signer());
        if (!removed && !accused.count(m->signer())) {
            // earliest stored conflicting partner for this signer
            const MsgPtr* partner = nullptr;
            for (const auto& stored : store.arrival_) {
                if (stored->signer() != m->signer()) continue;
                if (conflicts(*stored, *m)) {
                    partner = &stored;
                    break;
                }
            }
            if (partner) {
                pofs.push_back(ProofOfFraud{m->signer(), *partner, m});
                accused.insert(m->signer());
            }
        }
        store.add(m);
    }
    return pofs;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

namespace {

/// Tag family a certificate's votes must share.  EST and BVECHO mix.
int tag_family(Tag t) {
    switch (t) {
        case Tag::EST:
        case Tag::BVECHO: return 0;
        case Tag::ECHO_BC: return 1;
        case Tag::ECHO_RB: return 2;
        default: return -1;
    }
}

}  // namespace

bool certificate_well_formed(const SignatureScheme& scheme, const Certificate& cert) {
    if (cert.votes.empty()) return false;
    int family = tag_family(cert.votes.front()->tag());
    if (family < 0) return false;
    for (const auto& v : cert.votes) {
        if (tag_family(v->tag()) != family) return false;
        if (!(v->inst() == cert.inst) || v->round() != cert.round) return false;
        if (!supports_value(*v, cert.value)) return false;
        if (!verify_message(scheme, *v)) return false;
    }
    return true;
}

uint32_t certificate_usable_votes(const Certificate& cert, const CommitteeView& view) {
    std::set<ProcessId> signers;
    for (const auto& v : cert.votes)
        if (!view.is_removed(v->signer())) signers.insert(v->signer());
    return static_cast<uint32_t>(signers.size());
}

bool certificate_valid(const SignatureScheme& scheme, const Certificate& cert,
                       const CommitteeView& view) {
    if (!certificate_well_formed(scheme, cert)) return false;
    return certificate_usable_votes(cert, view) >= view.current_threshold();
}

}  // namespace basilic
