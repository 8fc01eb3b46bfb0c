#include "ringdiode/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace ringdiode {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::two_level: return "two_level";
    case Mode::three_level: return "three_level";
    case Mode::classical: return "classical";
  }
  return "?";
}

std::string_view to_string(SubtractionRule r) {
  return r == SubtractionRule::velocity ? "velocity" : "energy";
}

std::string_view to_string(AbsorberSplitting s) {
  return s == AbsorberSplitting::strang ? "strang" : "exact";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError("key '" + std::string(key) + "' = '" + std::string(value) + "': " + std::string(why));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.size() > 0 && v.front() == '+') {
    auto r = std::from_chars(v.data() + 1, v.data() + v.size(), out);
    ptr = r.ptr;
    ec = r.ec;
  }
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "not a finite number");
  return out;
}

long long to_integer(std::string_view key, std::string_view v) {
  // Accept "1e4"-style integers as long as they are exact.
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::fabs(d) > 9.0e15) bad_value(key, v, "not an integer");
  return static_cast<long long>(d);
}

std::uint64_t to_seed(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  const auto i = to_integer(key, v);
  if (i < 0) bad_value(key, v, "must be non-negative");
  return static_cast<std::uint64_t>(i);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "expected true or false");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Key {
  std::function<void(ParameterSet&, std::string_view)> set;
  std::function<std::string(const ParameterSet&)> get;
};

template <typename Member>
Key real_key(std::string name, Member member) {
  return {[name, member](ParameterSet& p, std::string_view v) { p.*member = to_double(name, v); },
          [member](const ParameterSet& p) { return fmt(p.*member); }};
}

template <typename Member>
Key int_key(std::string name, Member member) {
  return {[name, member](ParameterSet& p, std::string_view v) {
            const auto i = to_integer(name, v);
            using T = std::remove_reference_t<decltype(p.*member)>;
            if (std::is_unsigned_v<T> && i < 0) bad_value(name, v, "must be non-negative");
            if (std::is_same_v<T, int> && (i > 2147483647LL || i < -2147483648LL))
              bad_value(name, v, "out of range");
            p.*member = static_cast<T>(i);
          },
          [member](const ParameterSet& p) { return std::to_string(p.*member); }};
}

template <typename Member>
Key bool_key(std::string name, Member member) {
  return {[name, member](ParameterSet& p, std::string_view v) { p.*member = to_bool(name, v); },
          [member](const ParameterSet& p) { return std::string(p.*member ? "true" : "false"); }};
}

const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> t;
    t.emplace_back("mode", Key{[](ParameterSet& p, std::string_view v) {
                                 if (v == "two_level") p.mode = Mode::two_level;
                                 else if (v == "three_level") p.mode = Mode::three_level;
                                 else if (v == "classical") p.mode = Mode::classical;
                                 else bad_value("mode", v, "expected two_level, three_level or classical");
                               },
                               [](const ParameterSet& p) { return std::string(to_string(p.mode)); }});
    t.emplace_back("ring_length", real_key("ring_length", &ParameterSet::ring_length));
    t.emplace_back("mass", real_key("mass", &ParameterSet::mass));
    t.emplace_back("omega_P_hat", real_key("omega_P_hat", &ParameterSet::omega_P_hat));
    t.emplace_back("W1_hat", real_key("W1_hat", &ParameterSet::W1_hat));
    t.emplace_back("W2_hat", real_key("W2_hat", &ParameterSet::W2_hat));
    t.emplace_back("W_T_hat", real_key("W_T_hat", &ParameterSet::W_T_hat));
    t.emplace_back("W_Q_hat", real_key("W_Q_hat", &ParameterSet::W_Q_hat));
    t.emplace_back("x_W2", real_key("x_W2", &ParameterSet::x_W2));
    t.emplace_back("x_P", real_key("x_P", &ParameterSet::x_P));
    t.emplace_back("x_W1", real_key("x_W1", &ParameterSet::x_W1));
    t.emplace_back("x_T", real_key("x_T", &ParameterSet::x_T));
    t.emplace_back("x_Q", real_key("x_Q", &ParameterSet::x_Q));
    t.emplace_back("sigma", real_key("sigma", &ParameterSet::sigma));
    t.emplace_back("sigma_T", real_key("sigma_T", &ParameterSet::sigma_T));
    t.emplace_back("sigma_Q", real_key("sigma_Q", &ParameterSet::sigma_Q));
    t.emplace_back("v_rec", real_key("v_rec", &ParameterSet::v_rec));
    t.emplace_back("gamma3", real_key("gamma3", &ParameterSet::gamma3));
    t.emplace_back("omega_Q_hat", real_key("omega_Q_hat", &ParameterSet::omega_Q_hat));
    t.emplace_back("x0", real_key("x0", &ParameterSet::x0));
    t.emplace_back("v0", real_key("v0", &ParameterSet::v0));
    t.emplace_back("delta_v", real_key("delta_v", &ParameterSet::delta_v));
    t.emplace_back("t0", real_key("t0", &ParameterSet::t0));
    t.emplace_back("x_D", real_key("x_D", &ParameterSet::x_D));
    t.emplace_back("v_T", real_key("v_T", &ParameterSet::v_T));
    t.emplace_back("subtraction_rule",
                   Key{[](ParameterSet& p, std::string_view v) {
                         if (v == "velocity") p.subtraction_rule = SubtractionRule::velocity;
                         else if (v == "energy") p.subtraction_rule = SubtractionRule::energy;
                         else bad_value("subtraction_rule", v, "expected velocity or energy");
                       },
                       [](const ParameterSet& p) { return std::string(to_string(p.subtraction_rule)); }});
    t.emplace_back("correlated_sampling", bool_key("correlated_sampling", &ParameterSet::correlated_sampling));
    t.emplace_back("grid_points", int_key("grid_points", &ParameterSet::grid_points));
    t.emplace_back("dt", real_key("dt", &ParameterSet::dt));
    t.emplace_back("t_final", real_key("t_final", &ParameterSet::t_final));
    t.emplace_back("sample_interval", real_key("sample_interval", &ParameterSet::sample_interval));
    t.emplace_back("n_trajectories", int_key("n_trajectories", &ParameterSet::n_trajectories));
    t.emplace_back("rng_seed", Key{[](ParameterSet& p, std::string_view v) { p.rng_seed = to_seed("rng_seed", v); },
                                   [](const ParameterSet& p) { return std::to_string(p.rng_seed); }});
    t.emplace_back("absorber_splitting",
                   Key{[](ParameterSet& p, std::string_view v) {
                         if (v == "strang") p.absorber_splitting = AbsorberSplitting::strang;
                         else if (v == "exact") p.absorber_splitting = AbsorberSplitting::exact;
                         else bad_value("absorber_splitting", v, "expected strang or exact");
                       },
                       [](const ParameterSet& p) { return std::string(to_string(p.absorber_splitting)); }});
    t.emplace_back("refine_jump_time", bool_key("refine_jump_time", &ParameterSet::refine_jump_time));
    t.emplace_back("commensurate_recoil", bool_key("commensurate_recoil", &ParameterSet::commensurate_recoil));
    t.emplace_back("x_min", real_key("x_min", &ParameterSet::x_min));
    t.emplace_back("x_max", real_key("x_max", &ParameterSet::x_max));
    t.emplace_back("map_x_bins", int_key("map_x_bins", &ParameterSet::map_x_bins));
    t.emplace_back("map_v_bins", int_key("map_v_bins", &ParameterSet::map_v_bins));
    t.emplace_back("map_v_max", real_key("map_v_max", &ParameterSet::map_v_max));
    return t;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const auto& [k, key] : key_table())
    if (k == name) return &key;
  return nullptr;
}

std::pair<std::string_view, std::string_view> split_assignment(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError("malformed line '" + std::string(line) + "': expected key = value");
  const auto key = trim(line.substr(0, eq));
  const auto value = trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError("malformed line '" + std::string(line) + "': empty key");
  if (value.empty()) throw ConfigError("key '" + std::string(key) + "': empty value");
  return {key, value};
}

void set_key(ParameterSet& p, std::string_view key, std::string_view value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + std::string(key) + "' (value '" + std::string(value) + "')");
  k->set(p, value);
}

void require(bool ok, std::string_view key, double value, std::string_view why) {
  if (!ok) bad_value(key, fmt(value), why);
}

bool is_power_of_two(long long n) { return n > 1 && (n & (n - 1)) == 0; }

}  // namespace

ParameterSet parse_config(std::string_view text) {
  ParameterSet p;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto [key, value] = split_assignment(line);
    if (!seen.insert(std::string(key)).second) throw ConfigError("key '" + std::string(key) + "' given twice");
    set_key(p, key, value);
  }
  if (!seen.contains("mode")) throw ConfigError("missing mandatory key 'mode'");
  validate(p);
  return p;
}

void apply_override(ParameterSet& p, std::string_view assignment) {
  const auto [key, value] = split_assignment(trim(assignment));
  set_key(p, key, value);
  validate(p);
}

std::string render_config(const ParameterSet& p) {
  std::ostringstream out;
  for (const auto& [name, key] : key_table()) out << name << " = " << key.get(p) << '\n';
  return out.str();
}

void validate(const ParameterSet& p) {
  const double half = p.ring_length / 2;
  require(p.ring_length > 0, "ring_length", p.ring_length, "must be positive");
  require(p.mass > 0, "mass", p.mass, "must be positive");
  require(is_power_of_two(p.grid_points), "grid_points", p.grid_points, "not a power of two");
  require(p.dt > 0, "dt", p.dt, "must be positive");
  require(p.t_final >= 0, "t_final", p.t_final, "must be non-negative");
  require(p.sample_interval > 0, "sample_interval", p.sample_interval, "must be positive");
  require(p.sigma > 0, "sigma", p.sigma, "must be positive");
  require(p.sigma_T > 0, "sigma_T", p.sigma_T, "must be positive");
  require(p.sigma_Q > 0, "sigma_Q", p.sigma_Q, "must be positive");
  require(p.W_T_hat <= 0, "W_T_hat", p.W_T_hat, "trap peak must be non-positive");
  require(p.W_Q_hat >= 0, "W_Q_hat", p.W_Q_hat, "quench peak must be non-negative");
  require(p.v_rec >= 0, "v_rec", p.v_rec, "must be non-negative");
  require(p.v_T >= 0, "v_T", p.v_T, "must be non-negative");
  require(p.t0 >= 0, "t0", p.t0, "must be non-negative");
  require(p.n_trajectories >= 1, "n_trajectories", p.n_trajectories, "must be at least 1");
  // The classical model admits a sharp velocity; the wave packet needs a width.
  if (p.is_quantum())
    require(p.delta_v > 0, "delta_v", p.delta_v, "must be positive");
  else
    require(p.delta_v >= 0, "delta_v", p.delta_v, "must be non-negative");

  const std::pair<const char*, double> centres[] = {{"x_W2", p.x_W2}, {"x_P", p.x_P}, {"x_W1", p.x_W1},
                                                    {"x_T", p.x_T},   {"x_Q", p.x_Q}, {"x0", p.x0},
                                                    {"x_D", p.x_D}};
  for (const auto& [name, x] : centres)
    require(x >= -half && x < half, name, x, "must lie in [-l/2, l/2)");

  require(p.x_min >= -half && p.x_min <= half, "x_min", p.x_min, "must lie in [-l/2, l/2]");
  require(p.x_max >= -half && p.x_max <= half, "x_max", p.x_max, "must lie in [-l/2, l/2]");
  require(p.x_min < p.x_max, "x_min", p.x_min, "must be below x_max");
  require(p.map_x_bins >= 1, "map_x_bins", p.map_x_bins, "must be at least 1");
  require(p.map_v_bins >= 1, "map_v_bins", p.map_v_bins, "must be at least 1");
  require(p.map_v_max > 0, "map_v_max", p.map_v_max, "must be positive");

  if (p.mode == Mode::three_level) {
    require(p.gamma3 > 0, "gamma3", p.gamma3, "three_level mode needs a positive decay rate");
    const double implied = derive_quench_peak(p.omega_Q_hat, p.gamma3);
    const double scale = std::max(std::fabs(p.W_Q_hat), std::fabs(implied));
    require(std::fabs(implied - p.W_Q_hat) <= 1e-12 * scale, "omega_Q_hat", p.omega_Q_hat,
            "omega_Q_hat^2 / gamma3 must equal W_Q_hat (got " + fmt(implied) + ")");
  }
}

double derive_trap_velocity(const ParameterSet& p) {
  return std::sqrt(p.hbar_over_m() * std::fabs(p.W_T_hat));
}

double derive_quench_peak(double omega_Q_hat, double gamma3) {
  if (!(gamma3 > 0)) throw std::invalid_argument("gamma3 must be positive, got " + fmt(gamma3));
  return omega_Q_hat * omega_Q_hat / gamma3;
}

double quench_width_from_rabi_width(double rabi_width) { return rabi_width / std::sqrt(2.0); }
double rabi_width_from_quench_width(double quench_width) { return quench_width * std::sqrt(2.0); }

double max_grid_velocity(const ParameterSet& p) {
  const double k_max = M_PI * p.grid_points / p.ring_length;
  return p.hbar_over_m() * k_max;
}

}  // namespace ringdiode
