/*
 * Copyright 2026 The hmddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef HMDDP_CLI_MANIFEST_HPP
#define HMDDP_CLI_MANIFEST_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hmddp::cli {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { Number, Integer, Bool, String, Vector, Matrix };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Number: return "number";
    case Kind::Integer: return "integer";
    case Kind::Bool: return "bool";
    case Kind::String: return "string";
    case Kind::Vector: return "array of numbers";
    case Kind::Matrix: return "array of number arrays";
  }
  return "?";
}

using NumberRows = std::vector<std::vector<double>>;
using Value = std::variant<double, bool, std::string, std::vector<double>, NumberRows>;

/// Every key a manifest may carry. Keys under "meta." are free-form strings.
inline const std::map<std::string, Kind>& schema() {
  static const std::map<std::string, Kind> keys = {
      {"problem.system", Kind::String},
      {"problem.duration", Kind::Number},
      {"problem.dt", Kind::Number},
      {"problem.horizon", Kind::Integer},
      {"problem.segments", Kind::Integer},
      {"problem.x_init", Kind::Vector},
      {"problem.x_goal", Kind::Vector},
      {"problem.seed", Kind::Integer},
      {"cost.q", Kind::Number},
      {"cost.r", Kind::Number},
      {"cost.qf", Kind::Number},
      {"init.mode", Kind::String},
      {"init.node_file", Kind::String},
      {"init.default_control", Kind::Vector},
      {"cartpole.cart_mass", Kind::Number},
      {"cartpole.pole_mass", Kind::Number},
      {"cartpole.pole_length", Kind::Number},
      {"cartpole.gravity", Kind::Number},
      {"cartpole.force_max", Kind::Number},
      {"cartpole.rail_half_length", Kind::Number},
      {"car2d.omega_max", Kind::Number},
      {"car2d.accel_max", Kind::Number},
      {"car2d.obstacles", Kind::Matrix},
      {"quadrotor.mass", Kind::Number},
      {"quadrotor.inertia", Kind::Number},
      {"quadrotor.arm_length", Kind::Number},
      {"quadrotor.gravity", Kind::Number},
      {"quadrotor.thrust_min", Kind::Number},
      {"quadrotor.tilt_max", Kind::Number},
      {"quadrotor.obstacles", Kind::Matrix},
      {"lqr.n", Kind::Integer},
      {"lqr.m", Kind::Integer},
      {"linear.A", Kind::Matrix},
      {"linear.B", Kind::Matrix},
      {"linear.jac_A", Kind::Matrix},
      {"linear.jac_B", Kind::Matrix},
      {"linear.u_min", Kind::Vector},
      {"linear.u_max", Kind::Vector},
      {"mddp.eps_v", Kind::Number},
      {"mddp.eps_q", Kind::Number},
      {"mddp.d_max", Kind::Number},
      {"mddp.max_iter", Kind::Integer},
      {"linesearch.alpha0", Kind::Number},
      {"linesearch.factor", Kind::Number},
      {"linesearch.trials", Kind::Integer},
      {"linesearch.defect_weight", Kind::Number},
      {"linesearch.r_lo", Kind::Number},
      {"linesearch.r_hi", Kind::Number},
      {"reg.mu", Kind::Number},
      {"reg.mu0", Kind::Number},
      {"reg.sigma", Kind::Number},
      {"reg.mu_max", Kind::Number},
      {"al.lambda0", Kind::Number},
      {"al.mu0", Kind::Number},
      {"al.phi", Kind::Number},
      {"al.c_max", Kind::Number},
      {"al.max_outer", Kind::Integer},
      {"al.require_inner_convergence", Kind::Bool},
      {"rlb.psi0", Kind::Number},
      {"rlb.delta0", Kind::Number},
      {"rlb.omega1", Kind::Number},
      {"rlb.omega2", Kind::Number},
      {"rlb.delta_min", Kind::Number},
      {"rlb.tol", Kind::Number},
      {"rlb.psi_stop", Kind::Number},
      {"rlb.max_outer", Kind::Integer},
      {"verify.samples", Kind::Integer},
      {"verify.tolerance", Kind::Number},
      {"verify.radius", Kind::Number},
  };
  return keys;
}

inline std::optional<Kind> kind_of(const std::string& key) {
  if (key.rfind("meta.", 0) == 0 && key.size() > 5) return Kind::String;
  const auto& s = schema();
  auto it = s.find(key);
  if (it == s.end()) return std::nullopt;
  return it->second;
}

namespace detail {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

/// Recursive-descent reader for scalars, strings and (nested) number arrays.
class ValueReader {
 public:
  explicit ValueReader(std::string_view text) : s_(text) {}

  Value read() {
    skip();
    Value v = value();
    skip();
    if (pos_ != s_.size()) fail("trailing characters after value");
    return v;
  }

 private:
  Value value() {
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    if (s_.substr(pos_, 4) == "true") { pos_ += 4; return true; }
    if (s_.substr(pos_, 5) == "false") { pos_ += 5; return false; }
    return number();
  }

  double number() {
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    if (begin < end && *begin == '+') ++begin;
    auto r = std::from_chars(begin, end, v);
    if (r.ec != std::errc{}) fail("expected a number, string, bool or array");
    pos_ = static_cast<std::size_t>(r.ptr - s_.data());
    return v;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value array() {
    ++pos_;
    skip();
    std::vector<double> flat;
    NumberRows rows;
    bool nested = false;
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return flat;
    }
    for (int i = 0;; ++i) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == '[') {
        if (i > 0 && !nested) fail("mixed scalars and arrays");
        nested = true;
        Value inner = array();
        auto* row = std::get_if<std::vector<double>>(&inner);
        if (!row) fail("arrays nest at most two levels");
        rows.push_back(*row);
      } else {
        if (nested) fail("mixed scalars and arrays");
        flat.push_back(number());
      }
      skip();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        break;
      }
      if (s_[pos_] != ',') fail("expected ',' or ']' in array");
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        break;
      }
    }
    if (nested) return rows;
    return flat;
  }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
                                s_[pos_] == '\r')) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ManifestError(what + " (at column " + std::to_string(pos_ + 1) + ")");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

/// Coerces a parsed literal to the schema kind of `key`.
inline Value coerce(const std::string& key, Kind kind, Value v) {
  auto bad = [&]() -> ManifestError {
    return ManifestError("key '" + key + "' expects " + to_string(kind));
  };
  switch (kind) {
    case Kind::Number:
      if (!std::holds_alternative<double>(v)) throw bad();
      return v;
    case Kind::Integer: {
      auto* d = std::get_if<double>(&v);
      if (!d || *d != static_cast<double>(static_cast<long long>(*d))) throw bad();
      return v;
    }
    case Kind::Bool:
      if (!std::holds_alternative<bool>(v)) throw bad();
      return v;
    case Kind::String:
      if (!std::holds_alternative<std::string>(v)) throw bad();
      return v;
    case Kind::Vector:
      if (!std::holds_alternative<std::vector<double>>(v)) throw bad();
      return v;
    case Kind::Matrix:
      if (auto* flat = std::get_if<std::vector<double>>(&v); flat && flat->empty()) {
        return NumberRows{};
      }
      if (!std::holds_alternative<NumberRows>(v)) throw bad();
      return v;
  }
  throw bad();
}

}  // namespace detail

/**
 * @brief Parsed key/value manifest over the closed schema().
 *
 * Text format: `[section]` headers, `key = value` lines, `#` comments.
 * Values are numbers, `true`/`false`, double-quoted strings, number arrays
 * and arrays of number arrays; an array may span several lines.
 */
class Manifest {
 public:
  static Manifest parse(const std::string& text, const std::string& origin = "<manifest>") {
    Manifest m;
    m.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const int start_line = line_no;
      std::string line = detail::strip_comment(raw);
      auto body = detail::trim(line);
      if (body.empty()) continue;
      try {
        if (body.front() == '[' && body.find('=') == std::string_view::npos) {
          if (body.back() != ']') throw ManifestError("malformed section header");
          section = std::string(detail::trim(body.substr(1, body.size() - 2)));
          if (section.empty()) throw ManifestError("empty section name");
          continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ManifestError("expected 'key = value'");
        std::string key(detail::trim(body.substr(0, eq)));
        if (key.empty()) throw ManifestError("missing key");
        std::string value(detail::trim(body.substr(eq + 1)));
        // Arrays may continue on following lines until brackets balance.
        while (depth(value) > 0 && std::getline(in, raw)) {
          ++line_no;
          value += " " + std::string(detail::trim(detail::strip_comment(raw)));
        }
        if (depth(value) != 0) throw ManifestError("unbalanced brackets");
        if (!section.empty()) key = section + "." + key;
        if (m.values_.count(key)) throw ManifestError("duplicate key '" + key + "'");
        m.set(key, detail::ValueReader(value).read());
        m.lines_[key] = start_line;
      } catch (const ManifestError& e) {
        throw ManifestError(origin + ":" + std::to_string(start_line) + ": " + e.what());
      }
    }
    return m;
  }

  static Manifest load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ManifestError(path + ":0: cannot open manifest");
    std::ostringstream ss;
    ss << in.rdbuf();
    Manifest m = parse(ss.str(), path);
    m.path_ = path;
    return m;
  }

  /// `key=value` with the same value syntax; the key must exist in the schema.
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw ManifestError("override '" + assignment + "': expected key=value");
    }
    const std::string key(detail::trim(std::string_view(assignment).substr(0, eq)));
    try {
      set(key, detail::ValueReader(std::string_view(assignment).substr(eq + 1)).read());
    } catch (const ManifestError& e) {
      throw ManifestError("override '" + assignment + "': " + e.what());
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    return has(key) ? std::get<double>(values_.at(key)) : fallback;
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? static_cast<int>(std::get<double>(values_.at(key))) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) const {
    return has(key) ? std::get<bool>(values_.at(key)) : fallback;
  }
  std::string string(const std::string& key, const std::string& fallback = "") const {
    return has(key) ? std::get<std::string>(values_.at(key)) : fallback;
  }
  std::vector<double> vector(const std::string& key) const {
    return has(key) ? std::get<std::vector<double>>(values_.at(key)) : std::vector<double>{};
  }
  NumberRows rows(const std::string& key) const {
    return has(key) ? std::get<NumberRows>(values_.at(key)) : NumberRows{};
  }

  /// Throws a line-numbered error when `key` is absent.
  void require(const std::string& key) const {
    if (!has(key)) throw ManifestError(origin_ + ":0: missing required key '" + key + "'");
  }

  /// Line-numbered error attached to the line that set `key` (0 if not from the file).
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = lines_.find(key);
    const int line = it == lines_.end() ? 0 : it->second;
    throw ManifestError(origin_ + ":" + std::to_string(line) + ": " + key + ": " + what);
  }

  /// Sorted `key = value` lines of the resolved manifest (after overrides).
  std::string canonical() const {
    std::string out;
    for (const auto& [key, v] : values_) {
      out += key + " = " + render(v) + "\n";
    }
    return out;
  }

  /// FNV-1a 64-bit hash of canonical(), as 16 hex digits.
  std::string hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  const std::string& path() const { return path_; }
  const std::string& origin() const { return origin_; }
  const std::map<std::string, Value>& values() const { return values_; }

 private:
  static int depth(const std::string& s) {
    int d = 0;
    bool quoted = false;
    for (char c : s) {
      if (c == '"') quoted = !quoted;
      if (quoted) continue;
      if (c == '[') ++d;
      if (c == ']') --d;
    }
    return d;
  }

  void set(const std::string& key, Value v) {
    const auto kind = kind_of(key);
    if (!kind) throw ManifestError("unknown key '" + key + "'");
    values_[key] = detail::coerce(key, *kind, std::move(v));
  }

  static std::string render(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return detail::format_double(*d);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
    auto list = [](const std::vector<double>& xs) {
      std::string out = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ", " : "") + detail::format_double(xs[i]);
      }
      return out + "]";
    };
    if (auto* xs = std::get_if<std::vector<double>>(&v)) return list(*xs);
    const auto& rows = std::get<NumberRows>(v);
    std::string out = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) out += (i ? ", " : "") + list(rows[i]);
    return out + "]";
  }

  std::map<std::string, Value> values_;
  std::map<std::string, int> lines_;
  std::string origin_;
  std::string path_;
};

}  // namespace hmddp::cli

#endif  // HMDDP_CLI_MANIFEST_HPP
