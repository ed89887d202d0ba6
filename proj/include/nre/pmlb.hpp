#pragma once

#ifdef NRE_WITH_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif
#include <httplib.h>

#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>

#include "nre/dataset.hpp"
#include "nre/detail/table_io.hpp"
#include "nre/error.hpp"

// Penn Machine Learning Benchmark download and cache.
namespace nre {

inline constexpr const char* default_pmlb_url_template =
    "https://github.com/EpistasisLab/pmlb/raw/master/datasets/{name}/{name}.tsv.gz";

inline constexpr const char* pmlb_target_column = "target";

// Explicit setting (flag or config file) first, then NRE_PMLB_BASE_URL, then
// the public repository.
inline std::string resolve_pmlb_url_template(const std::optional<std::string>& configured = std::nullopt) {
  if (configured && !configured->empty()) return *configured;
  if (const char* env = std::getenv("NRE_PMLB_BASE_URL"); env != nullptr && *env != '\0') return env;
  return default_pmlb_url_template;
}

// Substitutes {name}; a template without the placeholder is treated as a base
// directory laid out like the upstream repository.
inline std::string pmlb_url(const std::string& url_template, const std::string& name) {
  if (url_template.find("{name}") == std::string::npos) {
    std::string base = url_template;
    while (!base.empty() && base.back() == '/') base.pop_back();
    return fmt::format("{}/{}/{}.tsv.gz", base, name, name);
  }
  std::string url = url_template;
  for (auto pos = url.find("{name}"); pos != std::string::npos; pos = url.find("{name}", pos + name.size())) {
    url.replace(pos, 6, name);
  }
  return url;
}

namespace detail {

inline void check_dataset_name(const std::string& name) {
  static const std::regex ok("[A-Za-z0-9_.-]+");
  if (name.empty() || name == "." || name == ".." || !std::regex_match(name, ok)) {
    throw DataError("invalid dataset name: '" + name + "'");
  }
}

inline std::string http_get(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw FetchError("unsupported URL: " + url, 0);
  const std::string host = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(host);
  client.set_follow_location(true);
  client.set_connection_timeout(20);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) throw FetchError(fmt::format("download failed for {}: {}", url, httplib::to_string(res.error())), 0);
  if (res->status != 200) throw FetchError(fmt::format("download failed for {}: HTTP {}", url, res->status), res->status);
  return res->body;
}

}  // namespace detail

// Path of a cached raw download for `name`, if one exists.
inline std::optional<std::filesystem::path> pmlb_cached_file(const std::string& name,
                                                              const std::filesystem::path& cache_dir) {
  for (const auto* ext : {".tsv.gz", ".tsv"}) {
    auto p = cache_dir / (name + ext);
    if (std::filesystem::exists(p)) return p;
  }
  return std::nullopt;
}

// Returns the named benchmark, downloading it on a cache miss. Raw upstream
// bytes are stored verbatim as <cache_dir>/<name>.tsv.gz (or .tsv when the
// server sent plain text) and parsed with the "target" column as label.
inline Dataset fetch_pmlb(const std::string& name, const std::filesystem::path& cache_dir,
                          const std::optional<std::string>& url_template = std::nullopt) {
  detail::check_dataset_name(name);
  if (auto cached = pmlb_cached_file(name, cache_dir)) return load_table(*cached, std::string(pmlb_target_column));

  const auto url = pmlb_url(resolve_pmlb_url_template(url_template), name);
  const auto body = detail::http_get(url);
  std::filesystem::create_directories(cache_dir);
  const auto target = cache_dir / (name + (detail::is_gzip(body) ? ".tsv.gz" : ".tsv"));
  auto tmp = target;
  tmp += ".part";
  detail::write_file_bytes(tmp, body);
  std::filesystem::rename(tmp, target);
  return load_table(target, std::string(pmlb_target_column));
}

}  // namespace nre
