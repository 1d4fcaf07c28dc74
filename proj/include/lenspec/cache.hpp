#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "lenspec/config.hpp"
#include "lenspec/enumerate.hpp"

namespace lenspec {

inline constexpr const char* kCodeVersion = "lenspec-1";
inline constexpr int kCacheFormat = 1;

/// Missing, corrupted or mismatched cache file.
class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

uint64_t fnv1a(const void* data, std::size_t n, uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(uint64_t v);

/// Hash of (signature, mode, bound, word cap, code version). Precision is not part of it.
std::string cache_key(const RunConfig& cfg);
std::string cache_path(const RunConfig& cfg);

/// Digest of every exact quadruple in the store.
uint64_t quad_digest(const ElementStore& store);
/// Digest of the floating data (matrices, error bounds, displacements), bitwise.
uint64_t matrix_digest(const ElementStore& store);

/// Writes the store atomically (temporary file, then rename). Records hold the
/// parent index and letter of each element; loading replays the exact
/// extensions and the same floating products.
void save_store(const ElementStore& store, const RunConfig& cfg, const std::string& path);
/// Rebuilds the store, checking the checksum and both digests.
ElementStore load_store(const std::string& path);

}  // namespace lenspec
