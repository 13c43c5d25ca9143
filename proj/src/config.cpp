#include "nch/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nch/errors.hpp"
#include "nch/io.hpp"

namespace nch {

namespace {

constexpr int kMaxGrid = 8192;

struct Entry {
  std::string value;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const Entry& e) {
  T value{};
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key, "cannot parse '" + e.value + "' as a number", e.line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, "must be finite", e.line);
  }
  return value;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  template <typename T>
  void number(const std::string& key, T& out) {
    if (const Entry* e = take(key)) out = parse_number<T>(key, *e);
  }
  void text(const std::string& key, std::string& out) {
    if (const Entry* e = take(key)) out = e->value;
  }
  /// Rejects a key that is present but does not apply.
  void forbid(const std::string& key, const std::string& reason) {
    if (has(key)) throw ConfigError(key, "not allowed " + reason, line(key));
  }
  void reject_leftovers() const {
    for (const auto& [key, e] : entries_) {
      if (!used_.count(key)) throw ConfigError(key, "unknown key", e.line);
    }
  }

 private:
  const Entry* take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_[key] = true;
    return &it->second;
  }

  std::map<std::string, Entry> entries_;
  std::map<std::string, bool> used_;
};

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

bool RunConfig::operator==(const RunConfig& o) const {
  // base_dir is provenance, not content.
  return emit_config(*this) == emit_config(o);
}

void validate(const RunConfig& c) {
  require(c.grid_n >= 2 && c.grid_n <= kMaxGrid, "grid.N",
          "must lie in [2, " + std::to_string(kMaxGrid) + "]");
  require(c.grid_l > 0.0 && std::isfinite(c.grid_l), "grid.L", "must be positive");
  require(c.epsilon > 0.0, "model.epsilon", "must be positive");
  if (c.kernel_type == "gaussian") {
    require(c.kernel_cj > 0.0, "model.kernel.cJ", "must be positive");
    require(c.kernel_xi > 0.0, "model.kernel.xi", "must be positive");
    require(c.kernel_images >= 0 && c.kernel_images <= 64, "model.kernel.images",
            "must lie in [0, 64]");
  } else if (c.kernel_type == "constant") {
    require(c.kernel_cj > 0.0, "model.kernel.cJ", "must be positive");
  } else if (c.kernel_type == "tabulated") {
    require(!c.kernel_path.empty(), "model.kernel.path", "required for a tabulated kernel");
    require(std::filesystem::is_regular_file(c.resolve(c.kernel_path)), "model.kernel.path",
            "file '" + c.resolve(c.kernel_path).string() + "' does not exist");
  } else {
    throw ConfigError("model.kernel.type", "expected gaussian, constant or tabulated, got '" +
                                               c.kernel_type + "'");
  }
  if (c.potential_type == "truncated") {
    require(c.potential_k > 1.0, "model.potential.K", "must be > 1");
  } else if (c.potential_type != "double_well") {
    throw ConfigError("model.potential.type",
                      "expected double_well or truncated, got '" + c.potential_type + "'");
  }
  if (c.model_cj) require(*c.model_cj > 0.0, "model.CJ", "must be positive");
  require(c.max_steps >= 0, "run.max_steps", "must be non-negative");
  require(c.eq_tol > 0.0, "run.eq_tol", "must be positive");
  require(c.record_every >= 1, "run.record_every", "must be at least 1");
  require(c.snapshot_every >= 0, "run.snapshot_every", "must be non-negative");
  require(c.init_delta >= 0.0, "run.init.delta", "must be non-negative");
  if (!c.init_snapshot_path.empty()) {
    require(std::filesystem::is_regular_file(c.resolve(c.init_snapshot_path)),
            "run.init.snapshot_path",
            "file '" + c.resolve(c.init_snapshot_path).string() + "' does not exist");
  }
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
  scheme_config(c).validate();
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "expected 'key = value'", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "missing key before '='", line_no);
    if (value.empty()) throw ConfigError(key, "missing value", line_no);
    if (entries.count(key)) {
      throw ConfigError(key, "duplicate key (first set on line " +
                                 std::to_string(entries[key].line) + ")",
                        line_no);
    }
    entries[key] = Entry{value, line_no};
  }

  RunConfig c;
  c.base_dir = base_dir;
  Reader r(std::move(entries));
  r.number("grid.N", c.grid_n);
  r.number("grid.L", c.grid_l);
  r.number("model.epsilon", c.epsilon);
  r.text("model.kernel.type", c.kernel_type);
  if (c.kernel_type == "gaussian") {
    r.number("model.kernel.cJ", c.kernel_cj);
    r.number("model.kernel.xi", c.kernel_xi);
    r.number("model.kernel.images", c.kernel_images);
    r.forbid("model.kernel.path", "for a gaussian kernel");
  } else if (c.kernel_type == "constant") {
    r.number("model.kernel.cJ", c.kernel_cj);
    r.forbid("model.kernel.xi", "for a constant kernel");
    r.forbid("model.kernel.images", "for a constant kernel");
    r.forbid("model.kernel.path", "for a constant kernel");
  } else if (c.kernel_type == "tabulated") {
    r.text("model.kernel.path", c.kernel_path);
    r.forbid("model.kernel.cJ", "for a tabulated kernel");
    r.forbid("model.kernel.xi", "for a tabulated kernel");
    r.forbid("model.kernel.images", "for a tabulated kernel");
  } else {
    throw ConfigError("model.kernel.type",
                      "expected gaussian, constant or tabulated, got '" + c.kernel_type + "'",
                      r.line("model.kernel.type"));
  }
  r.text("model.potential.type", c.potential_type);
  if (c.potential_type == "truncated") {
    r.number("model.potential.K", c.potential_k);
  } else {
    r.forbid("model.potential.K", "unless model.potential.type = truncated");
  }
  if (r.has("model.CJ")) {
    double cj = 0.0;
    r.number("model.CJ", cj);
    c.model_cj = cj;
  }

  std::string name;
  r.text("scheme.name", name);
  if (!name.empty()) {
    const auto s = parse_scheme(name);
    if (!s) {
      throw ConfigError("scheme.name",
                        "expected backward_euler, convex_splitting, ssi1, bdf2 or two_li, got '" +
                            name + "'",
                        r.line("scheme.name"));
    }
    c.scheme = *s;
  }
  r.number("scheme.tau", c.tau);
  r.number("scheme.S", c.stabilization);
  std::string policy;
  r.text("scheme.stability_policy", policy);
  if (!policy.empty()) {
    const auto p = parse_policy(policy);
    if (!p) {
      throw ConfigError("scheme.stability_policy",
                        "expected enforce, warn or ignore, got '" + policy + "'",
                        r.line("scheme.stability_policy"));
    }
    c.stability_policy = *p;
  }
  r.number("solver.newton_tol", c.newton_tol);
  r.number("solver.newton_max_iter", c.newton_max_iter);
  r.number("solver.krylov_tol", c.krylov_tol);
  r.number("run.max_steps", c.max_steps);
  r.number("run.eq_tol", c.eq_tol);
  r.number("run.record_every", c.record_every);
  r.number("run.snapshot_every", c.snapshot_every);
  r.number("run.seed", c.seed);
  r.text("run.init.snapshot_path", c.init_snapshot_path);
  if (!c.init_snapshot_path.empty()) {
    r.forbid("run.init.mean", "together with run.init.snapshot_path");
    r.forbid("run.init.delta", "together with run.init.snapshot_path");
  }
  r.number("run.init.mean", c.init_mean);
  r.number("run.init.delta", c.init_delta);
  r.text("output.dir", c.output_dir);
  r.reject_leftovers();

  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(e.key(), e.message(), r.line(e.key()));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream out;
  const auto kv = [&](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  const auto num = [&](const char* key, double value) { kv(key, format_double(value)); };
  kv("grid.N", std::to_string(c.grid_n));
  num("grid.L", c.grid_l);
  out << '\n';
  num("model.epsilon", c.epsilon);
  kv("model.kernel.type", c.kernel_type);
  if (c.kernel_type == "gaussian") {
    num("model.kernel.cJ", c.kernel_cj);
    num("model.kernel.xi", c.kernel_xi);
    kv("model.kernel.images", std::to_string(c.kernel_images));
  } else if (c.kernel_type == "constant") {
    num("model.kernel.cJ", c.kernel_cj);
  } else {
    kv("model.kernel.path", c.kernel_path);
  }
  kv("model.potential.type", c.potential_type);
  if (c.potential_type == "truncated") num("model.potential.K", c.potential_k);
  if (c.model_cj) num("model.CJ", *c.model_cj);
  out << '\n';
  kv("scheme.name", std::string(to_string(c.scheme)));
  num("scheme.tau", c.tau);
  num("scheme.S", c.stabilization);
  kv("scheme.stability_policy", std::string(to_string(c.stability_policy)));
  out << '\n';
  num("solver.newton_tol", c.newton_tol);
  kv("solver.newton_max_iter", std::to_string(c.newton_max_iter));
  num("solver.krylov_tol", c.krylov_tol);
  out << '\n';
  kv("run.max_steps", std::to_string(c.max_steps));
  num("run.eq_tol", c.eq_tol);
  kv("run.record_every", std::to_string(c.record_every));
  kv("run.snapshot_every", std::to_string(c.snapshot_every));
  kv("run.seed", std::to_string(c.seed));
  if (c.init_snapshot_path.empty()) {
    num("run.init.mean", c.init_mean);
    num("run.init.delta", c.init_delta);
  } else {
    kv("run.init.snapshot_path", c.init_snapshot_path);
  }
  out << '\n';
  kv("output.dir", c.output_dir);
  return out.str();
}

PotentialParams potential_params(const RunConfig& c) {
  return c.potential_type == "truncated" ? PotentialParams::truncated(c.potential_k)
                                         : PotentialParams::double_well();
}

SchemeConfig scheme_config(const RunConfig& c) {
  SchemeConfig s;
  s.scheme = c.scheme;
  s.tau = c.tau;
  s.epsilon = c.epsilon;
  s.stabilization = c.stabilization;
  try {
    s.potential = potential_params(c);
  } catch (const ConfigError& e) {
    throw ConfigError("model.potential.K", e.message());
  }
  s.newton_tol = c.newton_tol;
  s.newton_max_iter = c.newton_max_iter;
  s.krylov_tol = c.krylov_tol;
  s.stability_policy = c.stability_policy;
  s.cj = c.model_cj;
  return s;
}

KernelParams kernel_params(const RunConfig& c) {
  KernelParams params;
  if (c.kernel_type == "gaussian") {
    params.shape = GaussianKernel{c.kernel_cj, c.kernel_xi};
    params.images = c.kernel_images;
  } else if (c.kernel_type == "constant") {
    params.shape = ConstantKernel{c.kernel_cj};
  } else {
    std::optional<Snapshot> loaded;
    try {
      loaded.emplace(read_field(c.resolve(c.kernel_path)));
    } catch (const Error& e) {
      throw ConfigError("model.kernel.path", e.what());
    }
    const Snapshot& table = *loaded;
    if (table.field.geometry().n() != c.grid_n) {
      throw ConfigError("model.kernel.path", "table is " +
                                                 std::to_string(table.field.geometry().n()) +
                                                 "^2, grid is " + std::to_string(c.grid_n) + "^2");
    }
    const auto v = table.field.values();
    params.shape = TabulatedKernel{c.grid_n, std::vector<double>(v.begin(), v.end())};
  }
  return params;
}

RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.max_steps = c.max_steps;
  o.eq_tol = c.eq_tol;
  o.record_every = c.record_every;
  o.snapshot_every = c.snapshot_every;
  return o;
}

Field initial_field(const RunConfig& c, const GridGeometry& geometry) {
  if (c.init_snapshot_path.empty()) {
    return random_initial_field(geometry, c.seed, c.init_mean, c.init_delta);
  }
  Snapshot snap = read_field(c.resolve(c.init_snapshot_path));
  if (!(snap.field.geometry() == geometry)) {
    throw ConfigError("run.init.snapshot_path", "snapshot grid does not match grid.N / grid.L");
  }
  return std::move(snap.field);
}

}  // namespace nch
