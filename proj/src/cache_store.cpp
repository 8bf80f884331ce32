#include "gdo/cache_store.hpp"

#include <cstring>

#include "gdo/error.hpp"

namespace gdo {

namespace {

constexpr char kMagic[4] = {'G', 'D', 'O', 'C'};
constexpr std::uint32_t kVersion = 1;

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint64_t read_u64(const std::string& buf, std::size_t& pos) {
    if (pos + 8 > buf.size()) {
        throw GdoError(ErrorCode::backend_unavailable, "corrupt cache store: truncated integer");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
}

std::string read_bytes(const std::string& buf, std::size_t& pos, std::uint64_t len) {
    if (pos + len > buf.size()) {
        throw GdoError(ErrorCode::backend_unavailable, "corrupt cache store: truncated record");
    }
    std::string out = buf.substr(pos, len);
    pos += len;
    return out;
}

std::string serialize_record(const CachedResponse& r) {
    std::string out;
    append_u64(out, r.text.size());
    out += r.text;
    append_u64(out, static_cast<std::uint64_t>(r.prompt_tokens));
    append_u64(out, static_cast<std::uint64_t>(r.completion_tokens));
    append_u64(out, static_cast<std::uint64_t>(r.latency_ms));
    out += static_cast<char>(r.note ? 1 : 0);
    if (r.note) {
        append_u64(out, r.note->size());
        out += *r.note;
    }
    return out;
}

CachedResponse deserialize_record(const std::string& payload) {
    CachedResponse r;
    std::size_t pos = 0;
    r.text = read_bytes(payload, pos, read_u64(payload, pos));
    r.prompt_tokens = static_cast<std::int64_t>(read_u64(payload, pos));
    r.completion_tokens = static_cast<std::int64_t>(read_u64(payload, pos));
    r.latency_ms = static_cast<std::int64_t>(read_u64(payload, pos));
    if (pos >= payload.size()) {
        throw GdoError(ErrorCode::backend_unavailable, "corrupt cache store: truncated record");
    }
    if (payload[pos++] != 0) {
        r.note = read_bytes(payload, pos, read_u64(payload, pos));
    }
    if (pos != payload.size()) {
        throw GdoError(ErrorCode::backend_unavailable, "corrupt cache store: trailing bytes");
    }
    return r;
}

}  // namespace

std::string cache_key_hex(const CacheKey& key) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char b : key) {
        out += digits[b >> 4];
        out += digits[b & 0xF];
    }
    return out;
}

ResponseCacheStore::ResponseCacheStore(std::filesystem::path path) : path_(std::move(path)) {
    load();
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) {
        throw GdoError(ErrorCode::backend_unavailable,
                       "cannot open cache store '" + path_.string() + "' for append");
    }
}

void ResponseCacheStore::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        // fresh store: write the header
        std::ofstream create(path_, std::ios::binary);
        if (!create) {
            throw GdoError(ErrorCode::backend_unavailable,
                           "cannot create cache store '" + path_.string() + "'");
        }
        create.write(kMagic, sizeof(kMagic));
        const std::uint32_t version = kVersion;
        create.write(reinterpret_cast<const char*>(&version), sizeof(version));
        return;
    }
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw GdoError(ErrorCode::backend_unavailable,
                       "corrupt cache store '" + path_.string() + "': bad header");
    }
    std::size_t pos = 8;
    while (pos < buf.size()) {
        CacheKey key{};
        if (pos + key.size() > buf.size()) {
            throw GdoError(ErrorCode::backend_unavailable, "corrupt cache store: truncated key");
        }
        std::memcpy(key.data(), buf.data() + pos, key.size());
        pos += key.size();
        const std::uint64_t len = read_u64(buf, pos);
        entries_[key] = deserialize_record(read_bytes(buf, pos, len));
    }
}

std::optional<CachedResponse> ResponseCacheStore::get(const CacheKey& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCacheStore::put(const CacheKey& key, const CachedResponse& response) {
    std::lock_guard lock(mutex_);
    const std::string payload = serialize_record(response);
    std::string record;
    record.append(reinterpret_cast<const char*>(key.data()), key.size());
    append_u64(record, payload.size());
    record += payload;
    out_.write(record.data(), static_cast<std::streamsize>(record.size()));
    out_.flush();
    if (!out_) {
        throw GdoError(ErrorCode::backend_unavailable,
                       "write to cache store '" + path_.string() + "' failed");
    }
    entries_[key] = response;
}

std::size_t ResponseCacheStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

}  // namespace gdo
