#include "lenspec/cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

namespace lenspec {

using nlohmann::json;

uint64_t fnv1a(const void* data, std::size_t n, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

// the fields a stored ball depends on
std::string key_text(const RunConfig& cfg) {
  std::string s = "signature=" + cfg.sig.to_string() + "\nmode=" + to_string(cfg.mode) + "\n";
  if (cfg.max_length) s += "max_length=" + format_double(*cfg.max_length) + "\n";
  if (cfg.max_trace) s += "max_trace=" + format_double(*cfg.max_trace) + "\n";
  s += "word_cap=" + std::to_string(cfg.word_cap) + "\n";
  return s;
}

uint64_t mix(uint64_t h, double v) { return fnv1a(&v, sizeof v, h); }

const char* status_name(EnumerationStatus s) { return s == EnumerationStatus::Complete ? "complete" : "partial"; }

}  // namespace

std::string cache_key(const RunConfig& cfg) {
  const std::string s = key_text(cfg) + "code_version=" + kCodeVersion + "\n";
  return hex64(fnv1a(s.data(), s.size()));
}

std::string cache_path(const RunConfig& cfg) {
  std::string sig = cfg.sig.to_string();
  for (char& c : sig)
    if (c == ',') c = '_';
  return (std::filesystem::path(cfg.cache_dir) / (sig + "-" + cache_key(cfg) + ".json")).string();
}

uint64_t quad_digest(const ElementStore& store) {
  return fnv1a(store.quad_data(), store.size() * store.stride() * sizeof(int64_t));
}

uint64_t matrix_digest(const ElementStore& store) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Mat2& m = store.matrix(i);
    for (double v : {m.a, m.b, m.c, m.d, m.err, store.cosh_displacement(i)}) h = mix(h, v);
  }
  return h;
}

void save_store(const ElementStore& store, const RunConfig& cfg, const std::string& path) {
  const auto gens = generator_matrices(*store.group);
  json parents = json::array();
  std::string letters;
  letters.reserve(store.size());
  letters.push_back('-');
  for (std::size_t i = 1; i < store.size(); ++i) {
    const uint32_t p = store.parent(i);
    const int l = store.last_letter(i);
    const Mat2 direct = mul(store.matrix(p), gens[l]);
    const Mat2& m = store.matrix(i);
    const bool same = std::memcmp(&direct, &m, sizeof(Mat2)) == 0;
    parents.push_back(p);
    letters.push_back(static_cast<char>('0' + l + (same ? 0 : 4)));
  }
  const StoreStats& st = store.stats;
  json payload = {
      {"format", "lenspec-store"},
      {"version", kCacheFormat},
      {"code_version", kCodeVersion},
      {"key", cache_key(cfg)},
      {"config", key_text(cfg) + "bits=" + std::to_string(cfg.bits) + "\n"},
      {"field", {{"N", store.group->ambient_N}, {"degree", store.group->ring.degree()}}},
      {"r_cut", store.r_cut},
      {"eps", store.eps},
      {"status", status_name(store.status)},
      {"stats",
       {{"frontier_sizes", st.frontier_sizes},
        {"pruned", st.pruned},
        {"dedup_hits", st.dedup_hits},
        {"ambiguous", st.ambiguous},
        {"boundary_kept", st.boundary_kept},
        {"max_word_length", st.max_word_length}}},
      {"size", store.size()},
      {"parents", std::move(parents)},
      {"letters", std::move(letters)},
      {"quad_digest", hex64(quad_digest(store))},
      {"matrix_digest", hex64(matrix_digest(store))},
  };
  const std::string body = payload.dump();
  json doc = {{"checksum", hex64(fnv1a(body.data(), body.size()))}, {"payload", std::move(payload)}};

  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot write " + tmp.string());
    out << doc.dump() << '\n';
    out.flush();
    if (!out) throw CacheError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

ElementStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cache file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw CacheError("cache file " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("checksum") || !doc.contains("payload")) throw CacheError("cache file " + path + " lacks a checksum");
  const json& payload = doc["payload"];
  const std::string body = payload.dump();
  if (doc["checksum"].get<std::string>() != hex64(fnv1a(body.data(), body.size())))
    throw CacheError("checksum mismatch in " + path);
  if (payload.value("format", "") != "lenspec-store" || payload.value("version", 0) != kCacheFormat)
    throw CacheError("unsupported cache format in " + path);
  if (payload.value("code_version", "") != kCodeVersion)
    throw CacheError("cache " + path + " was written by " + payload.value("code_version", "?"));

  try {
    const RunConfig cfg = RunConfig::parse(payload["config"].get<std::string>());
    const Group g = TriangleGroup::build(cfg.sig, cfg.bits);
    ElementStore store;
    store.config = cfg.enumeration();
    store.geometry = domain_geometry(*g);
    store.r_cut = payload["r_cut"].get<double>();
    store.eps = payload["eps"].get<double>();
    store.status = payload["status"].get<std::string>() == "complete" ? EnumerationStatus::Complete
                                                                       : EnumerationStatus::Partial;
    const json& st = payload["stats"];
    store.stats.frontier_sizes = st["frontier_sizes"].get<std::vector<std::size_t>>();
    store.stats.pruned = st["pruned"].get<std::size_t>();
    store.stats.dedup_hits = st["dedup_hits"].get<std::size_t>();
    store.stats.ambiguous = st["ambiguous"].get<std::size_t>();
    store.stats.boundary_kept = st["boundary_kept"].get<std::size_t>();
    store.stats.max_word_length = st["max_word_length"].get<int>();

    const int d = g->ring.degree();
    const int stride = 4 * d;
    store.init(g, stride);
    std::vector<int64_t> q(stride);
    {
      Quad e = g->identity_quad();
      for (int k = 0; k < 4; ++k) g->ring.from_element(e[k], q.data() + k * d);
      canonicalize_sign(q.data(), stride);
      store.insert(0, 255, q.data(), hash_coeffs(q.data(), stride), Mat2{}, 1.0);
    }
    const auto gens = generator_matrices(*g);
    const json& parents = payload["parents"];
    const std::string letters = payload["letters"].get<std::string>();
    const std::size_t n = payload["size"].get<std::size_t>();
    if (letters.size() != n || parents.size() + 1 != n) throw CacheError("record count mismatch in " + path);
    for (std::size_t i = 1; i < n; ++i) {
      const uint32_t p = parents[i - 1].get<uint32_t>();
      const int code = letters[i] - '0';
      if (p >= i || code < 0 || code > 7) throw CacheError("bad record " + std::to_string(i) + " in " + path);
      const int l = code & 3;
      g->extend(store.quad(p), l, q.data());
      canonicalize_sign(q.data(), stride);
      Mat2 m;
      if (code < 4) {
        m = mul(store.matrix(p), gens[l]);
      } else {
        std::vector<int> w = store.word(p);
        w.push_back(l);
        m = balanced_product(gens, w);
      }
      const double cd = cosh_displacement(m);
      store.insert(p, static_cast<uint8_t>(l), q.data(), hash_coeffs(q.data(), stride), m, cd);
    }
    if (hex64(quad_digest(store)) != payload["quad_digest"].get<std::string>())
      throw CacheError("exact data of " + path + " does not replay");
    if (hex64(matrix_digest(store)) != payload["matrix_digest"].get<std::string>())
      throw CacheError("floating data of " + path + " does not replay bit-exactly");
    return store;
  } catch (const json::exception& e) {
    throw CacheError("malformed cache " + path + ": " + e.what());
  }
}

}  // namespace lenspec
