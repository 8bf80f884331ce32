#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace gdo {

using CacheKey = std::array<unsigned char, 32>;

std::string cache_key_hex(const CacheKey& key);

struct CachedResponse {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
    std::optional<std::string> note;

    bool operator==(const CachedResponse&) const = default;
};

/// Append-only on-disk key-value file: a small header, then
/// [32-byte key][u64 record length][record bytes] repeated. The whole file
/// is loaded at open; writes are serialized, reads may be concurrent.
/// No eviction. I/O failures surface as GdoError(backend_unavailable).
class ResponseCacheStore {
public:
    explicit ResponseCacheStore(std::filesystem::path path);

    std::optional<CachedResponse> get(const CacheKey& key) const;
    void put(const CacheKey& key, const CachedResponse& response);

    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    void load();

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<CacheKey, CachedResponse> entries_;
    std::ofstream out_;
};

}  // namespace gdo
