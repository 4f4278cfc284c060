#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "affdim/errors.hpp"

namespace affdim::cli {

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    Json j = Json::parse(ss.str(), nullptr, true, true);
    if (!j.is_object()) throw ConfigInvalid("config: top level must be an object");
    return j;
  } catch (const Json::parse_error& e) {
    throw ConfigInvalid(std::string("config: parse error: ") + e.what());
  }
}

const Json& Section::empty_object() {
  static const Json e = Json::object();
  return e;
}

void Section::fail(const std::string& key, const std::string& reason) const {
  throw ConfigInvalid(field(key) + ": " + reason);
}

const Json& Section::at(const std::string& key) const {
  if (!has(key)) fail(key, "missing");
  return j_.at(key);
}

Section Section::sub(const std::string& key) const {
  if (!has(key)) return Section(empty_object(), field(key));
  if (!j_.at(key).is_object()) fail(key, "must be an object");
  return Section(j_.at(key), field(key));
}

double Section::number(const std::string& key, std::optional<double> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "missing");
  }
  const Json& v = at(key);
  if (!v.is_number()) fail(key, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

std::int64_t Section::integer(const std::string& key, std::optional<std::int64_t> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "missing");
  }
  const Json& v = at(key);
  if (!v.is_number_integer()) fail(key, "must be an integer");
  return v.get<std::int64_t>();
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "missing");
  }
  const Json& v = at(key);
  if (!v.is_string()) fail(key, "must be a string");
  return v.get<std::string>();
}

bool Section::flag(const std::string& key, std::optional<bool> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    fail(key, "missing");
  }
  const Json& v = at(key);
  if (!v.is_boolean()) fail(key, "must be true or false");
  return v.get<bool>();
}

std::vector<double> Section::numbers(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_array()) fail(key, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(key, "must be an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) fail(key, "entries must be finite");
  }
  return out;
}

std::vector<std::vector<double>> Section::matrix(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_array() || v.empty()) fail(key, "must be a non-empty array of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) {
    if (!row.is_array()) fail(key, "rows must be arrays");
    std::vector<double> r;
    for (const auto& x : row) {
      if (!x.is_number()) fail(key, "entries must be numbers");
      r.push_back(x.get<double>());
    }
    if (!out.empty() && r.size() != out.front().size()) fail(key, "rows have different lengths");
    out.push_back(std::move(r));
  }
  return out;
}

double Section::positive(const std::string& key, std::optional<double> fallback) const {
  const double x = number(key, fallback);
  if (!(x > 0.0)) fail(key, "must be positive");
  return x;
}

double Section::in_range(const std::string& key, double lo, double hi, std::optional<double> fallback) const {
  const double x = number(key, fallback);
  if (!(x >= lo && x <= hi)) {
    std::ostringstream os;
    os << "must lie in [" << lo << ", " << hi << "]";
    fail(key, os.str());
  }
  return x;
}

std::int64_t Section::count(const std::string& key, std::int64_t lo, std::int64_t hi,
                            std::optional<std::int64_t> fallback) const {
  const std::int64_t x = integer(key, fallback);
  if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::vector<Matrix> parse_maps(const Section& root) {
  const Section ifs = root.sub("ifs");
  if (!ifs.has("matrices")) ifs.fail("matrices", "missing");
  const Json& list = ifs.raw().at("matrices");
  if (!list.is_array() || list.empty()) ifs.fail("matrices", "must be a non-empty array of d x d matrices");
  std::vector<Matrix> maps;
  int d = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string key = "matrices[" + std::to_string(i) + "]";
    const Json& mj = list[i];
    if (!mj.is_array() || mj.empty()) ifs.fail(key, "must be a d x d array");
    std::vector<std::vector<double>> rows;
    for (const auto& row : mj) {
      if (!row.is_array() || row.size() != mj.size()) ifs.fail(key, "must be square");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) ifs.fail(key, "entries must be numbers");
        r.push_back(x.get<double>());
        if (!std::isfinite(r.back())) ifs.fail(key, "entries must be finite");
      }
      rows.push_back(std::move(r));
    }
    if (d == 0) d = static_cast<int>(rows.size());
    if (static_cast<int>(rows.size()) != d) ifs.fail(key, "all matrices must have the same dimension");
    if (d > kMaxDim) ifs.fail(key, "dimension above 8 is not supported");
    maps.push_back(Matrix::from_rows(rows));
  }
  return maps;
}

Translations parse_translations(const Section& root, int d, int m) {
  const Section ifs = root.sub("ifs");
  if (!ifs.has("translations")) return Translations(m, Vec(d, 0.0));
  const auto rows = ifs.matrix("translations");
  if (static_cast<int>(rows.size()) != m || static_cast<int>(rows.front().size()) != d) {
    ifs.fail("translations", "must be an m x d array (" + std::to_string(m) + " x " + std::to_string(d) + ")");
  }
  return rows;
}

std::optional<SftSpec> parse_set(const Section& root, int m) {
  const Section set = root.sub("set");
  const std::string kind = set.text("kind", std::string("full"));
  if (kind == "full") return std::nullopt;
  if (kind != "sft") set.fail("kind", "must be \"full\" or \"sft\"");
  const auto rows = set.matrix("allowed");
  std::vector<std::vector<int>> allowed;
  for (const auto& r : rows) {
    std::vector<int> row;
    for (double x : r) {
      if (x != 0.0 && x != 1.0) set.fail("allowed", "entries must be 0 or 1");
      row.push_back(static_cast<int>(x));
    }
    allowed.push_back(std::move(row));
  }
  if (static_cast<int>(allowed.size()) != m || static_cast<int>(allowed.front().size()) != m) {
    set.fail("allowed", "must be m x m with m = " + std::to_string(m));
  }
  try {
    return SftSpec(std::move(allowed));
  } catch (const DomainError& e) {
    set.fail("allowed", e.what());
  }
}

TreeMeasure parse_measure(const Section& root, int m, const SftSpec* set) {
  const Section mu = root.sub("measure");
  const std::string kind = mu.text("kind", std::string(set ? "sft_uniform" : "bernoulli"));
  try {
    if (kind == "bernoulli") {
      std::vector<double> w = mu.has("weights") ? mu.numbers("weights") : std::vector<double>(m, 1.0 / m);
      if (static_cast<int>(w.size()) != m) mu.fail("weights", "needs one weight per map");
      return TreeMeasure::bernoulli(std::move(w));
    }
    if (kind == "markov") {
      auto initial = mu.numbers("initial");
      auto transition = mu.matrix("transition");
      if (static_cast<int>(initial.size()) != m) mu.fail("initial", "needs one entry per map");
      return TreeMeasure::markov(std::move(initial), std::move(transition));
    }
    if (kind == "sft_uniform") {
      if (!set) mu.fail("kind", "sft_uniform needs set.kind = \"sft\"");
      return TreeMeasure::sft_uniform(*set);
    }
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    mu.fail("kind", e.what());
  }
  mu.fail("kind", "must be bernoulli, markov or sft_uniform");
}

ScaleGrid parse_grid(const Section& s, const std::string& key, const ScaleGrid& fallback) {
  if (!s.has(key)) return fallback;
  const Section g = s.sub(key);
  ScaleGrid grid;
  grid.gamma = g.in_range("gamma", 1e-6, 1.0 - 1e-9, fallback.gamma);
  grid.n_min = static_cast<int>(g.count("n_min", -1000, 10000, fallback.n_min));
  grid.n_max = static_cast<int>(g.count("n_max", grid.n_min, 10000, fallback.n_max));
  grid.scale = g.positive("scale", fallback.scale);
  return grid;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace affdim::cli
