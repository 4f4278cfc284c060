#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "affdim/ifs.hpp"
#include "affdim/measures.hpp"
#include "affdim/sft.hpp"
#include "affdim/stats.hpp"

namespace affdim::cli {

using Json = nlohmann::json;

/// Parses a config file (JSON, // and /* */ comments allowed).
Json load_config(const std::string& path);

/// Typed access with field paths in error messages. Every getter throws
/// ConfigInvalid naming the field.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Section sub(const std::string& key) const;  // empty object when absent
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Json& raw() const { return j_; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::vector<double>> matrix(const std::string& key) const;

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  double in_range(const std::string& key, double lo, double hi, std::optional<double> fallback = std::nullopt) const;
  std::int64_t count(const std::string& key, std::int64_t lo, std::int64_t hi,
                     std::optional<std::int64_t> fallback = std::nullopt) const;

  [[noreturn]] void fail(const std::string& key, const std::string& reason) const;

 private:
  const Json& at(const std::string& key) const;
  static const Json& empty_object();
  const Json& j_;
  std::string path_;
};

/// Maps from `ifs.matrices` (row-major d x d arrays).
std::vector<Matrix> parse_maps(const Section& root);
/// `ifs.translations`: explicit m x d array, or absent (zero vectors).
Translations parse_translations(const Section& root, int d, int m);
TreeMeasure parse_measure(const Section& root, int m, const SftSpec* set);
/// `set`: {"kind": "full"} or {"kind": "sft", "allowed": [[...]]}. Empty when full.
std::optional<SftSpec> parse_set(const Section& root, int m);
ScaleGrid parse_grid(const Section& s, const std::string& key, const ScaleGrid& fallback);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace affdim::cli
