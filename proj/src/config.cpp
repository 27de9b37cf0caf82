#include "legvio/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace legvio {

namespace {

// ---------------------------------------------------------------------------
// TOML subset reader

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Strips a trailing comment outside of quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& origin, int line, const std::string& msg)
      : ConfigError(origin + ":" + std::to_string(line) + ": " + msg) {}
};

std::optional<double> parse_number(std::string_view s) {
  std::string buf;
  for (char c : s) {
    if (c != '_') buf.push_back(c);
  }
  if (buf.empty()) return std::nullopt;
  const char* b = buf.data();
  const char* e = buf.data() + buf.size();
  if (*b == '+') ++b;
  double v = 0.0;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) return std::nullopt;
  return v;
}

std::optional<std::string> parse_string(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
  s = s.substr(1, s.size() - 2);
  if (s.find('"') != std::string_view::npos) return std::nullopt;
  return std::string(s);
}

std::optional<TomlValue> parse_value(std::string_view s) {
  s = trim(s);
  if (s == "true") return TomlValue(true);
  if (s == "false") return TomlValue(false);
  if (auto str = parse_string(s)) return TomlValue(*str);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') return std::nullopt;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    std::vector<double> nums;
    std::vector<std::string> strs;
    while (!body.empty()) {
      const std::size_t comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      if (!item.empty()) {
        if (auto n = parse_number(item)) {
          nums.push_back(*n);
        } else if (auto t = parse_string(item)) {
          strs.push_back(*t);
        } else {
          return std::nullopt;
        }
      }
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    if (!nums.empty() && !strs.empty()) return std::nullopt;
    if (!strs.empty()) return TomlValue(strs);
    return TomlValue(nums);
  }
  if (auto n = parse_number(s)) return TomlValue(*n);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Key bindings

enum class Check { none, positive, nonneg, unit_open };

struct Binding {
  std::string key;
  std::function<void(const TomlValue&)> set;
  std::function<std::string()> get;
  std::function<double()> number;  // for range checks, may be empty
  Check check = Check::none;
};

std::string num_str(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double as_number(const TomlValue& v, const std::string& key) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("key " + key + " expects a number", {key});
}

struct BindingTable {
  std::vector<Binding> items;

  void real(const std::string& key, double& ref, Check check = Check::nonneg, double scale = 1.0) {
    items.push_back({key, [&ref, key, scale](const TomlValue& v) { ref = as_number(v, key) * scale; },
                     [&ref, scale] { return num_str(ref / scale); }, [&ref] { return ref; }, check});
  }
  void integer(const std::string& key, int& ref, Check check = Check::positive) {
    items.push_back({key,
                     [&ref, key](const TomlValue& v) {
                       const double d = as_number(v, key);
                       if (d != std::floor(d)) throw ConfigError("key " + key + " expects an integer", {key});
                       ref = static_cast<int>(d);
                     },
                     [&ref] { return std::to_string(ref); }, [&ref] { return static_cast<double>(ref); }, check});
  }
  void boolean(const std::string& key, bool& ref) {
    items.push_back({key,
                     [&ref, key](const TomlValue& v) {
                       const bool* b = std::get_if<bool>(&v);
                       if (!b) throw ConfigError("key " + key + " expects true or false", {key});
                       ref = *b;
                     },
                     [&ref] { return std::string(ref ? "true" : "false"); }, {}, Check::none});
  }
  void vec3(const std::string& key, Vec3& ref, double scale = 1.0) {
    items.push_back({key,
                     [&ref, key, scale](const TomlValue& v) {
                       const auto* a = std::get_if<std::vector<double>>(&v);
                       if (!a || a->size() != 3) throw ConfigError("key " + key + " expects [x, y, z]", {key});
                       ref = Vec3((*a)[0], (*a)[1], (*a)[2]) * scale;
                     },
                     [&ref, scale] {
                       return "[" + num_str(ref.x() / scale) + ", " + num_str(ref.y() / scale) + ", " +
                              num_str(ref.z() / scale) + "]";
                     },
                     {}, Check::none});
  }
  const Binding* find(const std::string& key) const {
    for (const Binding& b : items) {
      if (b.key == key) return &b;
    }
    return nullptr;
  }
};

void bind_imu(BindingTable& t, const std::string& p, ImuNoise& n) {
  t.real(p + "accel_noise", n.accel_noise);
  t.real(p + "gyro_noise", n.gyro_noise);
  t.real(p + "accel_bias_rw", n.accel_bias_rw);
  t.real(p + "gyro_bias_rw", n.gyro_bias_rw);
  t.vec3(p + "accel_bias", n.accel_bias);
  t.vec3(p + "gyro_bias", n.gyro_bias);
  t.real(p + "accel_bias_std", n.accel_bias_std);
  t.real(p + "gyro_bias_std", n.gyro_bias_std);
  t.real(p + "impact_accel_std", n.impact_accel_std);
  t.real(p + "impact_duration", n.impact_duration);
}

void bind_ekf(BindingTable& t, const std::string& p, NoiseConfig& n) {
  const double deg = deg2rad(1.0);
  t.real(p + "accel_noise", n.accel_noise, Check::positive);
  t.real(p + "gyro_noise", n.gyro_noise, Check::positive);
  t.real(p + "accel_bias_rw", n.accel_bias_rw, Check::positive);
  t.real(p + "gyro_bias_rw", n.gyro_bias_rw, Check::positive);
  t.real(p + "height_bias_rw", n.height_bias_rw, Check::positive);
  t.real(p + "legvel_std", n.legvel_std, Check::positive);
  t.real(p + "vio_pos_std", n.vio_pos_std, Check::positive);
  t.vec3(p + "vio_rot_std_deg", n.vio_rot_std, deg);
  t.real(p + "vio_vel_std", n.vio_vel_std, Check::positive);
  t.real(p + "height_std", n.height_std, Check::positive);
  t.real(p + "vicon_pos_std", n.vicon_pos_std, Check::positive);
  t.real(p + "vicon_rot_std_deg", n.vicon_rot_std, Check::positive, deg);
  t.real(p + "gate_probability", n.gate_probability, Check::unit_open);
  t.boolean(p + "gate_enabled", n.gate_enabled);
  t.real(p + "init_pos_var", n.init_pos_var, Check::positive);
  t.real(p + "init_rot_var", n.init_rot_var, Check::positive);
  t.real(p + "init_vel_var", n.init_vel_var, Check::positive);
  t.real(p + "init_accel_bias_var", n.init_accel_bias_var, Check::positive);
  t.real(p + "init_gyro_bias_var", n.init_gyro_bias_var, Check::positive);
  t.real(p + "init_bdz_var", n.init_bdz_var, Check::positive);
}

BindingTable bindings(RunConfig& c) {
  BindingTable t;
  const double deg = deg2rad(1.0);
  RobotModel& r = c.scenario.robot;

  auto leg_length = [&t, &r](const std::string& key, double LegModel::*member) {
    t.items.push_back({key,
                       [&r, key, member](const TomlValue& v) {
                         const double d = as_number(v, key);
                         for (LegModel& leg : r.legs) leg.*member = d;
                       },
                       [&r, member] { return num_str(r.legs[0].*member); }, [&r, member] { return r.legs[0].*member; },
                       Check::positive});
  };
  t.real("robot.mass", r.mass, Check::positive);
  leg_length("robot.upper_length", &LegModel::upper_length);
  leg_length("robot.lower_length", &LegModel::lower_length);
  t.vec3("robot.imu_offset", r.imu.translation);
  t.vec3("robot.vio_offset", r.vio.translation);

  MotionOptions& m = c.scenario.motion;
  t.real("motion.stand_height", m.stand_height, Check::positive);
  t.real("motion.ramp_time", m.ramp_time);
  t.real("motion.yaw_deg", m.yaw, Check::none, deg);

  SensorRates& rt = c.scenario.rates;
  t.real("rates.imu", rt.imu, Check::positive);
  t.real("rates.joints", rt.joints, Check::positive);
  t.real("rates.vicon", rt.vicon, Check::positive);
  t.real("rates.truth", rt.truth, Check::positive);
  t.real("rates.vio_frame", rt.vio_frame, Check::positive);
  t.real("rates.vio_gyro", rt.vio_gyro, Check::positive);
  t.real("rates.vio_accel", rt.vio_accel, Check::positive);

  SensorNoiseSpec& n = c.scenario.noise;
  bind_imu(t, "noise.imu_", n.robot_imu);
  bind_imu(t, "noise.vio_imu_", n.vio_imu);
  t.real("noise.encoder", n.encoder_noise);
  t.real("noise.encoder_vel", n.encoder_vel_noise);
  t.real("noise.torque", n.torque_noise);
  t.real("noise.leg_length_error", n.leg_length_error, Check::none);
  t.real("noise.vicon_pos", n.vicon_pos_noise);
  t.real("noise.vicon_rot_deg", n.vicon_rot_noise, Check::nonneg, deg);

  VioNoise& v = n.vio;
  t.real("vio.pos_walk", v.pos_walk);
  t.real("vio.z_walk", v.z_walk);
  t.real("vio.z_walk_dynamic", v.z_walk_dynamic);
  t.real("vio.yaw_walk_deg", v.yaw_walk, Check::nonneg, deg);
  t.real("vio.roll_pitch_std_deg", v.roll_pitch_std, Check::nonneg, deg);
  t.real("vio.roll_pitch_tau", v.roll_pitch_tau, Check::positive);
  t.real("vio.pos_noise", v.pos_noise);
  t.real("vio.rot_noise_deg", v.rot_noise, Check::nonneg, deg);
  t.real("vio.vel_noise", v.vel_noise);
  t.real("vio.z_offset", v.z_offset, Check::none);
  t.real("vio.latency_mean_ms", v.latency_mean_ms);
  t.real("vio.latency_std_ms", v.latency_std_ms);
  t.real("vio.frame_delay_ms", v.frame_delay_ms);
  t.real("vio.comm_delay_ms", v.comm_delay_ms);
  t.real("vio.dropout_prob", v.dropout_prob);
  t.real("vio.bias_error_accel", v.bias_error_accel);
  t.real("vio.bias_error_gyro", v.bias_error_gyro);

  RetractionSpikes& s = n.spikes;
  t.boolean("spikes.enabled", s.enabled);
  t.real("spikes.force", s.force);
  t.real("spikes.delay", s.delay);
  t.real("spikes.duration", s.duration);

  ContactOptions& k = c.estimator.contact;
  t.real("contact.f_hi", k.f_hi, Check::positive);
  t.real("contact.f_lo", k.f_lo, Check::positive);
  t.integer("contact.n_contact", k.n_contact);
  t.integer("contact.n_standing", k.n_standing);

  EstimatorConfig& e = c.estimator;
  t.real("estimator.init_duration", e.init_duration_s);
  t.boolean("estimator.freeze_biases", e.freeze_biases);
  t.real("estimator.vio_max_age", e.vio_max_age_s, Check::positive);
  t.boolean("estimator.rotate_feet", e.rotate_feet);
  bind_ekf(t, "ekf.", e.noise);
  bind_ekf(t, "ekf_leg.", e.noise_leg);

  t.items.push_back({"eval.stride",
                     [&c](const TomlValue& val) {
                       const double d = as_number(val, "eval.stride");
                       if (!(d >= 1.0) || d != std::floor(d)) {
                         throw ConfigError("eval.stride must be a positive integer", {"eval.stride"});
                       }
                       c.rpe.stride = static_cast<std::size_t>(d);
                     },
                     [&c] { return std::to_string(c.rpe.stride); }, {}, Check::none});
  return t;
}

GaitSpec parse_gait(const TomlTable& table, std::size_t index) {
  GaitSpec g;
  const std::string prefix = "gait[" + std::to_string(index) + "].";
  std::vector<std::string> unknown;
  for (const auto& [key, value] : table) {
    const std::string full = prefix + key;
    if (key == "kind") {
      const auto* s = std::get_if<std::string>(&value);
      if (!s) throw ConfigError(full + " expects a string", {full});
      if (*s == "stand") {
        g.kind = GaitKind::stand;
      } else if (*s == "trot") {
        g.kind = GaitKind::trot;
      } else if (*s == "jump") {
        g.kind = GaitKind::jump;
      } else {
        throw ConfigError(full + " must be stand, trot or jump", {full});
      }
      continue;
    }
    double* target = nullptr;
    double scale = 1.0;
    if (key == "vx") target = &g.vx;
    if (key == "vy") target = &g.vy;
    if (key == "period") target = &g.period;
    if (key == "vertical_amplitude") target = &g.vertical_amplitude;
    if (key == "jump_height") target = &g.jump_height;
    if (key == "flight_fraction") target = &g.flight_fraction;
    if (key == "duty_factor") target = &g.duty_factor;
    if (key == "step_height") target = &g.step_height;
    if (key == "attitude_amplitude_deg") {
      target = &g.attitude_amplitude;
      scale = deg2rad(1.0);
    }
    if (key == "sway_amplitude") target = &g.sway_amplitude;
    if (key == "duration") target = &g.duration;
    if (!target) {
      unknown.push_back(full);
      continue;
    }
    *target = as_number(value, full) * scale;
  }
  if (!unknown.empty()) {
    std::string msg = "unknown gait keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg, unknown);
  }
  if (g.kind == GaitKind::jump && !table.count("step_height")) g.step_height = 0.08;
  return g;
}

std::string gait_dump(const GaitSpec& g) {
  std::ostringstream os;
  os << "kind = \"" << gait_name(g.kind) << "\"\n"
     << "vx = " << num_str(g.vx) << "\n"
     << "vy = " << num_str(g.vy) << "\n"
     << "period = " << num_str(g.period) << "\n"
     << "vertical_amplitude = " << num_str(g.vertical_amplitude) << "\n"
     << "jump_height = " << num_str(g.jump_height) << "\n"
     << "flight_fraction = " << num_str(g.flight_fraction) << "\n"
     << "duty_factor = " << num_str(g.duty_factor) << "\n"
     << "step_height = " << num_str(g.step_height) << "\n"
     << "attitude_amplitude_deg = " << num_str(rad2deg(g.attitude_amplitude)) << "\n"
     << "sway_amplitude = " << num_str(g.sway_amplitude) << "\n"
     << "duration = " << num_str(g.duration) << "\n";
  return os.str();
}

}  // namespace

TomlDocument parse_toml(std::string_view text, const std::string& origin) {
  TomlDocument doc;
  std::string section;
  TomlTable* table = nullptr;  // current [[array]] entry
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(strip_comment(text.substr(pos, eol - pos)));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.substr(0, 2) == "[[") {
      if (line.size() < 4 || line.substr(line.size() - 2) != "]]") throw ParseError(origin, line_no, "bad table header");
      const std::string name(trim(line.substr(2, line.size() - 4)));
      if (!valid_key(name)) throw ParseError(origin, line_no, "bad table name");
      doc.arrays[name].emplace_back();
      table = &doc.arrays[name].back();
      section.clear();
    } else if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(origin, line_no, "bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) throw ParseError(origin, line_no, "bad section name");
      table = nullptr;
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(origin, line_no, "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (!valid_key(key)) throw ParseError(origin, line_no, "bad key '" + key + "'");
      const auto value = parse_value(line.substr(eq + 1));
      if (!value) throw ParseError(origin, line_no, "cannot parse value for '" + key + "'");
      if (table) {
        if (!table->emplace(key, *value).second) throw ParseError(origin, line_no, "duplicate key '" + key + "'");
      } else {
        const std::string full = section.empty() ? key : section + "." + key;
        if (!doc.values.emplace(full, *value).second) {
          throw ParseError(origin, line_no, "duplicate key '" + full + "'");
        }
      }
    }
    if (eol == text.size()) break;
  }
  return doc;
}

RunConfig default_config() {
  RunConfig c;
  c.scenario.noise = SensorNoiseSpec::realistic();
  c.scenario.gaits = {GaitSpec{}};
  c.estimator.contact = ContactOptions::for_mass(c.scenario.robot.mass);
  return c;
}

namespace {

void apply_noise_preset(RunConfig& c, const TomlValue& value) {
  const auto* s = std::get_if<std::string>(&value);
  if (s && *s == "noiseless") {
    c.scenario.noise = SensorNoiseSpec::noiseless();
  } else if (s && *s == "realistic") {
    c.scenario.noise = SensorNoiseSpec::realistic();
  } else {
    throw ConfigError("noise.preset must be \"realistic\" or \"noiseless\"", {"noise.preset"});
  }
}

void apply_contact_preset(RunConfig& c, const TomlValue& value) {
  const auto* s = std::get_if<std::string>(&value);
  if (s && *s == "conservative") {
    c.estimator.contact.n_contact = 20;
    c.estimator.contact.n_standing = 20;
  } else if (s && *s == "default") {
    const ContactOptions d = ContactOptions::for_mass(c.scenario.robot.mass);
    c.estimator.contact.n_contact = d.n_contact;
    c.estimator.contact.n_standing = d.n_standing;
  } else {
    throw ConfigError("contact.preset must be \"default\" or \"conservative\"", {"contact.preset"});
  }
}

// Keys without a scalar binding. Returns false for anything else.
bool apply_list_key(RunConfig& c, const std::string& key, const TomlValue& value) {
  if (key == "run.name") {
    const auto* s = std::get_if<std::string>(&value);
    if (!s) throw ConfigError("run.name expects a string", {key});
    c.name = *s;
  } else if (key == "run.seeds") {
    std::vector<double> a;
    if (const auto* d = std::get_if<double>(&value)) a = {*d};
    if (const auto* l = std::get_if<std::vector<double>>(&value)) a = *l;
    if (a.empty()) throw ConfigError("run.seeds expects a non-empty list of integers", {key});
    c.seeds.clear();
    for (double d : a) {
      if (d < 0 || d != std::floor(d)) throw ConfigError("run.seeds entries must be non-negative integers", {key});
      c.seeds.push_back(static_cast<std::uint64_t>(d));
    }
  } else if (key == "run.variants") {
    std::vector<std::string> a;
    if (const auto* s = std::get_if<std::string>(&value)) a = {*s};
    if (const auto* l = std::get_if<std::vector<std::string>>(&value)) a = *l;
    if (a.empty()) throw ConfigError("run.variants expects a non-empty list of names", {key});
    c.variants.clear();
    for (const auto& name : a) {
      const auto v = parse_variant(name);
      if (!v) throw ConfigError("unknown variant '" + name + "' in run.variants", {key});
      c.variants.push_back(*v);
    }
  } else if (key == "eval.intervals") {
    std::vector<double> a;
    if (const auto* d = std::get_if<double>(&value)) a = {*d};
    if (const auto* l = std::get_if<std::vector<double>>(&value)) a = *l;
    if (a.empty()) throw ConfigError("eval.intervals expects a non-empty list", {key});
    c.rpe.intervals = a;
  } else {
    return false;
  }
  return true;
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& origin) {
  const TomlDocument doc = parse_toml(text, origin);
  RunConfig c = default_config();

  // Presets first, every other key on top.
  if (auto it = doc.values.find("noise.preset"); it != doc.values.end()) apply_noise_preset(c, it->second);
  if (auto it = doc.values.find("contact.preset"); it != doc.values.end()) apply_contact_preset(c, it->second);

  BindingTable table = bindings(c);
  std::vector<std::string> unknown;
  bool explicit_thresholds = false;
  for (const auto& [key, value] : doc.values) {
    if (key == "noise.preset" || key == "contact.preset") continue;
    if (apply_list_key(c, key, value)) continue;
    if (const Binding* b = table.find(key)) {
      b->set(value);
      if (key == "contact.f_hi" || key == "contact.f_lo") explicit_thresholds = true;
    } else {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) {
    std::string msg = origin + ": unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg, unknown);
  }
  if (!explicit_thresholds) {
    const ContactOptions m = ContactOptions::for_mass(c.scenario.robot.mass);
    c.estimator.contact.f_hi = m.f_hi;
    c.estimator.contact.f_lo = m.f_lo;
  }

  if (auto it = doc.arrays.find("gait"); it != doc.arrays.end()) {
    c.scenario.gaits.clear();
    for (std::size_t i = 0; i < it->second.size(); ++i) c.scenario.gaits.push_back(parse_gait(it->second[i], i));
  }
  for (const auto& [name, tables] : doc.arrays) {
    if (name != "gait") throw ConfigError(origin + ": unknown table array [[" + name + "]]", {name});
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file: " + path.string(), {"--scenario"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void validate_config(const RunConfig& config) {
  RunConfig copy = config;
  BindingTable table = bindings(copy);
  std::vector<std::string> bad;
  for (const Binding& b : table.items) {
    if (!b.number || b.check == Check::none) continue;
    const double v = b.number();
    const bool ok = std::isfinite(v) && ((b.check == Check::positive && v > 0.0) ||
                                         (b.check == Check::nonneg && v >= 0.0) ||
                                         (b.check == Check::unit_open && v > 0.0 && v < 1.0));
    if (!ok) bad.push_back(b.key);
  }
  const auto& rot = config.estimator.noise.vio_rot_std;
  if (!(rot.minCoeff() > 0.0)) bad.emplace_back("ekf.vio_rot_std_deg");
  if (!(config.estimator.noise_leg.vio_rot_std.minCoeff() > 0.0)) bad.emplace_back("ekf_leg.vio_rot_std_deg");
  if (!(config.estimator.contact.f_hi > config.estimator.contact.f_lo)) bad.emplace_back("contact.f_hi");
  if (config.scenario.noise.vio.dropout_prob >= 1.0) bad.emplace_back("vio.dropout_prob");
  if (config.scenario.rates.truth != config.scenario.rates.imu) bad.emplace_back("rates.truth");
  if (config.rpe.intervals.empty() ||
      std::any_of(config.rpe.intervals.begin(), config.rpe.intervals.end(), [](double d) { return !(d > 0.0); })) {
    bad.emplace_back("eval.intervals");
  }
  if (config.seeds.empty()) bad.emplace_back("run.seeds");
  if (config.variants.empty()) bad.emplace_back("run.variants");
  if (!bad.empty()) {
    std::string msg = "invalid configuration values:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }
  try {
    config.scenario.robot.validate();
    config.scenario.noise.validate();
    config.estimator.validate();
    RobotModel true_robot = config.scenario.robot;
    for (LegModel& leg : true_robot.legs) {
      leg.upper_length *= 1.0 + config.scenario.noise.leg_length_error;
      leg.lower_length *= 1.0 + config.scenario.noise.leg_length_error;
    }
    validate_gaits(config.scenario.gaits, true_robot, config.scenario.motion);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), {"gait"});
  }
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  auto parsed = parse_value(value);
  // Bare words are accepted for string keys ("noise.preset=noiseless").
  if (!parsed && !value.empty() && value.find_first_of("\"[],=") == std::string::npos) parsed = TomlValue(value);
  if (!parsed) throw ConfigError("cannot parse value '" + value + "' for " + key, {key});
  if (key == "noise.preset") return apply_noise_preset(config, *parsed);
  if (key == "contact.preset") return apply_contact_preset(config, *parsed);
  if (apply_list_key(config, key, *parsed)) return;
  BindingTable table = bindings(config);
  const Binding* b = table.find(key);
  if (!b) throw ConfigError("unknown configuration key '" + key + "'", {key});
  b->set(*parsed);
}

std::vector<std::string> config_keys() {
  RunConfig c;
  std::vector<std::string> keys;
  for (const Binding& b : bindings(c).items) keys.push_back(b.key);
  keys.insert(keys.end(), {"run.name", "run.seeds", "run.variants", "eval.intervals", "noise.preset",
                           "contact.preset"});
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string dump_config(const RunConfig& config) {
  RunConfig copy = config;
  BindingTable table = bindings(copy);
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  auto put = [&sections](const std::string& key, const std::string& value) {
    const std::size_t dot = key.find('.');
    sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
  };
  for (const Binding& b : table.items) put(b.key, b.get());
  put("run.name", "\"" + config.name + "\"");
  std::string seeds = "[";
  for (std::size_t i = 0; i < config.seeds.size(); ++i) seeds += (i ? ", " : "") + std::to_string(config.seeds[i]);
  put("run.seeds", seeds + "]");
  std::string variants = "[";
  for (std::size_t i = 0; i < config.variants.size(); ++i) {
    variants += std::string(i ? ", " : "") + "\"" + variant_name(config.variants[i]) + "\"";
  }
  put("run.variants", variants + "]");
  std::string intervals = "[";
  for (std::size_t i = 0; i < config.rpe.intervals.size(); ++i) {
    intervals += (i ? ", " : "") + num_str(config.rpe.intervals[i]);
  }
  put("eval.intervals", intervals + "]");

  std::string out;
  for (auto& [name, kv] : sections) {
    std::sort(kv.begin(), kv.end());
    out += "[" + name + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    out += "\n";
  }
  for (const GaitSpec& g : config.scenario.gaits) out += "[[gait]]\n" + gait_dump(g) + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  RunConfig copy = config;
  copy.seeds.clear();
  for (unsigned char ch : dump_config(copy)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace legvio
