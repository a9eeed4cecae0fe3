// Copyright 2026 The saddlelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "saddlelab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace saddlelab {

const std::vector<KeySpec>& config_keys() {
  using V = ConfigValue;
  static const std::vector<KeySpec> keys = {
      {"schedule.a", ValueType::Float, V{0.5}},
      {"schedule.p", ValueType::Float, V{0.7}},
      {"schedule.n0", ValueType::Int, V{std::int64_t{0}}},
      {"objective.name", ValueType::String, std::nullopt},
      {"objective.matrix", ValueType::FloatList, V{std::vector<double>{}}},
      {"oracle.model", ValueType::String, V{std::string("sphere")}},
      {"oracle.sigma", ValueType::Float, V{0.5}},
      {"oracle.c", ValueType::Float, V{1.0}},
      {"method.name", ValueType::String, std::nullopt},
      {"method.beta", ValueType::Float, V{0.0}},
      {"init.point", ValueType::FloatList, V{std::vector<double>{}}},
      {"init.radius", ValueType::Float, V{0.0}},
      {"experiment.horizon", ValueType::Int, V{std::int64_t{200000}}},
      {"experiment.record_stride", ValueType::Int, V{std::int64_t{1000}}},
      {"experiment.saddle_tolerance", ValueType::Float, V{0.1}},
      {"experiment.minimum_tolerance", ValueType::Float, V{0.1}},
      {"experiment.tail_fraction", ValueType::Float, V{0.9}},
      {"experiment.max_saddle_count", ValueType::Int, V{std::int64_t{2}}},
      {"check.lo", ValueType::Float, V{-3.0}},
      {"check.hi", ValueType::Float, V{3.0}},
      {"check.samples", ValueType::Int, V{std::int64_t{1000}}},
      {"check.abc_draws", ValueType::Int, V{std::int64_t{1000}}},
      {"check.directions", ValueType::Int, V{std::int64_t{64}}},
      {"check.excitation_draws", ValueType::Int, V{std::int64_t{100000}}},
      {"check.radii", ValueType::FloatList, V{std::vector<double>{5.0, 10.0, 20.0}}},
      {"check.shell_samples", ValueType::Int, V{std::int64_t{1000}}},
      {"check.nonflat_threshold", ValueType::Float, V{0.1}},
      {"check.local_bound_draws", ValueType::Int, V{std::int64_t{100000}}},
      {"seed", ValueType::UInt, std::nullopt},
      {"trials", ValueType::Int, V{std::int64_t{200}}},
      {"parallelism", ValueType::Int, V{std::int64_t{1}}},
      {"output.dir", ValueType::String, V{std::string("out")}},
  };
  return keys;
}

namespace {

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : config_keys()) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

std::string where(int line) {
  return line > 0 ? "line " + std::to_string(line) + ": " : std::string();
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::Int: return "integer";
    case ValueType::UInt: return "unsigned integer";
    case ValueType::Float: return "float";
    case ValueType::String: return "string";
    case ValueType::FloatList: return "float list";
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) return std::nullopt;
  }
  return value;
}

std::optional<std::string> parse_quoted(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      out.push_back(s[++i]);
    } else if (s[i] == '"') {
      return std::nullopt;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

[[noreturn]] void mismatch(std::string_view key, ValueType expected, const std::string& got,
                           int line) {
  throw Error(ErrorCode::TypeMismatch, where(line) + "key '" + std::string(key) + "' expects " +
                                           type_name(expected) + ", got " + got);
}

std::string literal_kind(std::string_view lit) {
  if (!lit.empty() && lit.front() == '[') return "list '" + std::string(lit) + "'";
  if (parse_number<std::int64_t>(lit) || parse_number<std::uint64_t>(lit)) {
    return "integer '" + std::string(lit) + "'";
  }
  if (parse_number<double>(lit)) return "float '" + std::string(lit) + "'";
  return "string '" + std::string(lit) + "'";
}

// Comment start outside double quotes.
std::size_t comment_start(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return i;
    }
  }
  return std::string_view::npos;
}

}  // namespace

ConfigValue parse_value(std::string_view key, std::string_view literal, int line) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) {
    throw Error(ErrorCode::UnknownKey, where(line) + "unknown key '" + std::string(key) + "'");
  }
  const std::string_view lit = trim(literal);
  switch (spec->type) {
    case ValueType::Int:
      if (auto v = parse_number<std::int64_t>(lit)) return *v;
      break;
    case ValueType::UInt:
      if (auto v = parse_number<std::uint64_t>(lit)) return *v;
      break;
    case ValueType::Float:
      if (auto v = parse_number<double>(lit)) return *v;
      break;
    case ValueType::String:
      if (auto q = parse_quoted(lit)) return *q;
      if (!lit.empty() && lit.front() != '[' && lit.front() != '"') return std::string(lit);
      break;
    case ValueType::FloatList: {
      if (lit.size() < 2 || lit.front() != '[' || lit.back() != ']') break;
      std::vector<double> out;
      const std::string_view body = trim(lit.substr(1, lit.size() - 2));
      if (body.empty()) return out;
      std::size_t pos = 0;
      while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        const auto item = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
        const auto v = parse_number<double>(item);
        if (!v) mismatch(key, spec->type, "list element '" + std::string(item) + "'", line);
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      return out;
    }
  }
  mismatch(key, spec->type, literal_kind(lit), line);
}

ConfigEntries parse_entries(std::string_view text) {
  ConfigEntries entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    ++line_no;
    line = trim(line.substr(0, comment_start(line)));
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::InvalidArgument,
                    where(line_no) + "expected 'key = value', got '" + std::string(line) + "'");
      }
      const std::string key(trim(line.substr(0, eq)));
      if (find_key(key) == nullptr) {
        throw Error(ErrorCode::UnknownKey, where(line_no) + "unknown key '" + key + "'");
      }
      if (entries.contains(key)) {
        throw Error(ErrorCode::InvalidArgument, where(line_no) + "duplicate key '" + key + "'");
      }
      entries[key] = parse_value(key, line.substr(eq + 1), line_no);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return entries;
}

double RunConfigDocument::number(const std::string& key) const {
  return std::get<double>(values.at(key));
}
std::int64_t RunConfigDocument::integer(const std::string& key) const {
  return std::get<std::int64_t>(values.at(key));
}
std::uint64_t RunConfigDocument::seed() const { return std::get<std::uint64_t>(values.at("seed")); }
const std::string& RunConfigDocument::text(const std::string& key) const {
  return std::get<std::string>(values.at(key));
}
const std::vector<double>& RunConfigDocument::list(const std::string& key) const {
  return std::get<std::vector<double>>(values.at(key));
}

namespace {

// Re-raises construction errors with the config key that caused them.
template <typename F>
auto with_key(const std::string& key, F&& build) {
  try {
    return build();
  } catch (const Error& e) {
    throw Error(e.code(), "key '" + key + "': " + e.what());
  }
}

void require_positive(const RunConfigDocument& doc, const std::string& key) {
  if (doc.integer(key) < 1) {
    throw Error(ErrorCode::InvalidArgument, "key '" + key + "' must be >= 1");
  }
}

}  // namespace

RunConfigDocument finalize(ConfigEntries entries) {
  RunConfigDocument doc;
  for (const auto& spec : config_keys()) {
    const std::string key(spec.key);
    if (auto it = entries.find(key); it != entries.end()) {
      doc.values[key] = it->second;
    } else if (spec.default_value) {
      doc.values[key] = *spec.default_value;
    } else {
      throw Error(ErrorCode::MissingMandatory, "mandatory key '" + key + "' is missing");
    }
  }
  for (const auto& [key, value] : entries) {
    if (find_key(key) == nullptr) throw Error(ErrorCode::UnknownKey, "unknown key '" + key + "'");
  }
  // Validate by building every component once.
  make_trial_config(doc);
  make_check_settings(doc);
  for (const char* key : {"trials", "parallelism", "experiment.max_saddle_count"}) {
    if (doc.integer(key) < (std::string(key) == "experiment.max_saddle_count" ? 0 : 1)) {
      throw Error(ErrorCode::InvalidArgument, std::string("key '") + key + "' is out of range");
    }
  }
  const double tail = doc.number("experiment.tail_fraction");
  if (!(tail > 0 && tail <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "key 'experiment.tail_fraction' must lie in (0, 1]");
  }
  return doc;
}

RunConfigDocument parse_config(std::string_view text) { return finalize(parse_entries(text)); }

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_value(const ConfigValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          const bool bare = !v.empty() && std::all_of(v.begin(), v.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                   c == '/' || c == '-' || c == '+';
          });
          if (bare) return v;
          std::string out = "\"";
          for (char c : v) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
          }
          return out + "\"";
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out = "[";
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += format_double(v[i]);
          }
          return out + "]";
        } else {
          return std::to_string(v);
        }
      },
      value);
}

std::string serialize_config(const RunConfigDocument& doc) {
  std::string out;
  for (const auto& [key, value] : doc.values) out += key + " = " + format_value(value) + "\n";
  return out;
}

Objective<double> make_objective(const RunConfigDocument& doc) {
  const std::string& name = doc.text("objective.name");
  if (name == "double_well_2d") return double_well_2d<double>();
  if (name == "saddle_circle_3d") return saddle_circle_3d<double>();
  if (name == "quadratic") {
    return with_key("objective.matrix", [&] {
      const auto& entries = doc.list("objective.matrix");
      const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(entries.size()))));
      if (d == 0 || static_cast<std::size_t>(d * d) != entries.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    "quadratic needs a non-empty square row-major matrix");
      }
      Eigen::MatrixXd a(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = entries[static_cast<std::size_t>(i * d + j)];
      }
      return quadratic<double>(a);
    });
  }
  throw Error(ErrorCode::InvalidArgument, "key 'objective.name': unknown objective '" + name + "'");
}

NoiseOracle<double> make_oracle(const RunConfigDocument& doc) {
  const auto base = make_objective(doc);
  const auto model = with_key("oracle.model", [&] { return noise_model_from_string(doc.text("oracle.model")); });
  const std::string key = model == NoiseModel::FiniteSum ? "oracle.c" : "oracle.sigma";
  return with_key(key, [&] { return NoiseOracle<double>(base, model, doc.number(key)); });
}

MethodConfig<double> make_method(const RunConfigDocument& doc) {
  const auto schedule = [&] {
    try {
      return StepSchedule<double>::validate(doc.number("schedule.a"), doc.number("schedule.p"),
                                            doc.integer("schedule.n0"));
    } catch (const Error& e) {
      const std::string key = e.code() == ErrorCode::NonPositiveScale ? "schedule.a"
                              : e.code() == ErrorCode::InvalidArgument ? "schedule.n0"
                                                                       : "schedule.p";
      throw Error(e.code(), "key '" + key + "': " + e.what());
    }
  }();
  const auto method = with_key("method.name", [&] { return method_from_string(doc.text("method.name")); });
  return with_key("method.beta",
                  [&] { return MethodConfig<double>::make(method, doc.number("method.beta"), schedule); });
}

TrialConfig make_trial_config(const RunConfigDocument& doc) {
  TrialConfig config{make_oracle(doc), make_method(doc), {}, 0, 0, 0, 0.1, 0.1};
  const auto& f = config.objective();
  const auto& point = doc.list("init.point");
  if (point.empty()) {
    // Default start: the first saddle component, the worst case for escape.
    const auto& comps = f.critical_components();
    auto saddle = std::find_if(comps.begin(), comps.end(), [](const auto& c) { return c.is_saddle(); });
    config.init.center = saddle != comps.end() ? saddle->representative : comps.front().representative;
  } else {
    config.init.center = Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size()));
  }
  config.init.radius = doc.number("init.radius");
  config.horizon = doc.integer("experiment.horizon");
  config.record_stride = doc.integer("experiment.record_stride");
  config.master_seed = doc.seed();
  config.saddle_tolerance = doc.number("experiment.saddle_tolerance");
  config.minimum_tolerance = doc.number("experiment.minimum_tolerance");
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("experiment/init keys: ") + e.what());
  }
  return config;
}

CheckSettings make_check_settings(const RunConfigDocument& doc) {
  const int d = make_objective(doc).dimension();
  CheckSettings s;
  for (const char* key : {"check.samples", "check.abc_draws", "check.directions",
                          "check.excitation_draws", "check.shell_samples",
                          "check.local_bound_draws"}) {
    require_positive(doc, key);
  }
  s.probe = with_key("check.lo", [&] {
    return RegionProbe::cube(d, doc.number("check.lo"), doc.number("check.hi"),
                             static_cast<int>(doc.integer("check.samples")), doc.seed());
  });
  s.abc_draws_per_point = static_cast<int>(doc.integer("check.abc_draws"));
  s.excitation_directions = static_cast<int>(doc.integer("check.directions"));
  s.excitation_draws = static_cast<int>(doc.integer("check.excitation_draws"));
  s.radii = doc.list("check.radii");
  if (s.radii.empty() || !std::is_sorted(s.radii.begin(), s.radii.end())) {
    throw Error(ErrorCode::InvalidArgument, "key 'check.radii' must be a non-empty increasing list");
  }
  s.shell_samples = static_cast<int>(doc.integer("check.shell_samples"));
  s.nonflat_threshold = doc.number("check.nonflat_threshold");
  s.local_bound_draws = static_cast<int>(doc.integer("check.local_bound_draws"));
  return s;
}

}  // namespace saddlelab
