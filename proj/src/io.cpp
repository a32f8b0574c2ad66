// Copyright 2026 The tlslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "tlslab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

namespace tlslab {

void schema_error(const std::string& path, const std::string& message) {
  fail(ErrorKind::Schema, path, message);
}

JsonReader::JsonReader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
  if (!node_.is_object()) schema_error(path_, "expected an object");
}

std::string JsonReader::child_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool JsonReader::has(std::string_view key) const {
  seen_.emplace_back(key);
  return node_.contains(std::string(key)) && !node_.at(std::string(key)).is_null();
}

const Json& JsonReader::at(std::string_view key) const {
  if (!has(key)) schema_error(child_path(key), "missing required field");
  return node_.at(std::string(key));
}

double JsonReader::number(std::string_view key) const {
  const Json& v = at(key);
  if (!v.is_number()) schema_error(child_path(key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(child_path(key), "must be finite");
  return d;
}

double JsonReader::number(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::uint64_t JsonReader::unsigned_integer(std::string_view key) const {
  const Json& v = at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    schema_error(child_path(key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t JsonReader::unsigned_integer(std::string_view key, std::uint64_t fallback) const {
  return has(key) ? unsigned_integer(key) : fallback;
}

int JsonReader::integer(std::string_view key, int fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_number_integer()) schema_error(child_path(key), "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    schema_error(child_path(key), "integer out of range");
  }
  return static_cast<int>(i);
}

bool JsonReader::boolean(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) schema_error(child_path(key), "expected true or false");
  return v.get<bool>();
}

std::string JsonReader::string(std::string_view key) const {
  const Json& v = at(key);
  if (!v.is_string()) schema_error(child_path(key), "expected a string");
  return v.get<std::string>();
}

std::string JsonReader::string(std::string_view key, std::string_view fallback) const {
  return has(key) ? string(key) : std::string(fallback);
}

std::vector<double> JsonReader::numbers(std::string_view key) const {
  const Json& v = at(key);
  const std::string p = child_path(key);
  if (!v.is_array()) schema_error(p, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) schema_error(p + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
    if (!std::isfinite(out.back())) schema_error(p + "[" + std::to_string(i) + "]", "must be finite");
  }
  return out;
}

std::vector<double> JsonReader::numbers(std::string_view key, std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

void JsonReader::reject_unknown() const {
  for (auto it = node_.begin(); it != node_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
      schema_error(child_path(it.key()), "unknown field");
    }
  }
}

namespace {

struct DeviceField {
  const char* name;
  double DeviceParams::*member;
};

constexpr DeviceField kDeviceFields[] = {
    {"f_q1", &DeviceParams::f_q1},
    {"f_q2", &DeviceParams::f_q2},
    {"f_c", &DeviceParams::f_c},
    {"f_tls", &DeviceParams::f_tls},
    {"g1", &DeviceParams::g1},
    {"g2", &DeviceParams::g2},
    {"g_t", &DeviceParams::g_t},
    {"gamma1_q1", &DeviceParams::gamma1_q1},
    {"gamma1_q2", &DeviceParams::gamma1_q2},
    {"gamma1_c", &DeviceParams::gamma1_c},
    {"gamma1_tls", &DeviceParams::gamma1_tls},
    {"gamma_phi_q1", &DeviceParams::gamma_phi_q1},
    {"gamma_phi_q2", &DeviceParams::gamma_phi_q2},
    {"gamma_phi_c", &DeviceParams::gamma_phi_c},
    {"gamma_phi_tls", &DeviceParams::gamma_phi_tls},
};

// Violation strings start with the offending field name.
void raise_violations(const std::vector<std::string>& violations, const std::string& path) {
  if (violations.empty()) return;
  const std::string& first = violations.front();
  const auto space = first.find(' ');
  const std::string field = first.substr(0, space);
  const std::string rest = space == std::string::npos ? first : first.substr(space + 1);
  schema_error(path.empty() ? field : path + "." + field, rest);
}

}  // namespace

Json to_json(const DeviceParams& p) {
  Json j = Json::object();
  for (const auto& f : kDeviceFields) j[f.name] = p.*(f.member);
  return j;
}

DeviceParams device_from_json(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  DeviceParams p;
  for (const auto& f : kDeviceFields) p.*(f.member) = r.number(f.name, p.*(f.member));
  r.reject_unknown();
  raise_violations(p.violations(), path);
  return p;
}

Json to_json(const NoiseModel& m) {
  Json fl = Json::array();
  for (const auto& f : m.fluctuators) {
    fl.push_back({{"a_hz", f.amplitude_hz}, {"gamma_hz", f.switch_rate}, {"p_up", f.p_up}});
  }
  return {{"fluctuators", fl}, {"white_level", m.white_level}, {"quasi_static_sigma_hz", m.quasi_static_sigma_hz}};
}

NoiseModel noise_from_json(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  NoiseModel m;
  if (r.has("fluctuators")) {
    const Json& arr = r.at("fluctuators");
    const std::string ap = r.child_path("fluctuators");
    if (!arr.is_array()) schema_error(ap, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader fr(arr[i], ap + "[" + std::to_string(i) + "]");
      TelegraphFluctuator f;
      f.amplitude_hz = fr.number("a_hz");
      f.switch_rate = fr.number("gamma_hz");
      f.p_up = fr.number("p_up", 0.5);
      fr.reject_unknown();
      if (f.amplitude_hz < 0.0) schema_error(fr.child_path("a_hz"), "must be >= 0");
      if (!(f.switch_rate > 0.0)) schema_error(fr.child_path("gamma_hz"), "must be > 0");
      if (f.p_up < 0.0 || f.p_up > 1.0) schema_error(fr.child_path("p_up"), "must lie in [0, 1]");
      m.fluctuators.push_back(f);
    }
  }
  if (r.has("one_over_f")) {
    JsonReader sr(r.at("one_over_f"), r.child_path("one_over_f"));
    const double level = sr.number("level_at_1hz");
    const double alpha = sr.number("alpha", 1.0);
    const double rate_min = sr.number("rate_min_hz");
    const double rate_max = sr.number("rate_max_hz");
    const int count = sr.integer("count", 10);
    sr.reject_unknown();
    if (!(level > 0.0)) schema_error(sr.child_path("level_at_1hz"), "must be > 0");
    if (!(rate_min > 0.0)) schema_error(sr.child_path("rate_min_hz"), "must be > 0");
    if (!(rate_max > rate_min)) schema_error(sr.child_path("rate_max_hz"), "must exceed rate_min_hz");
    if (count < 1 || count > 10000) schema_error(sr.child_path("count"), "must lie in [1, 10000]");
    for (const auto& f : synthesize_one_over_f(level, alpha, rate_min, rate_max, count).model.fluctuators) {
      m.fluctuators.push_back(f);
    }
  }
  m.white_level = r.number("white_level", 0.0);
  m.quasi_static_sigma_hz = r.number("quasi_static_sigma_hz", 0.0);
  r.reject_unknown();
  if (m.white_level < 0.0) schema_error(r.child_path("white_level"), "must be >= 0");
  if (m.quasi_static_sigma_hz < 0.0) schema_error(r.child_path("quasi_static_sigma_hz"), "must be >= 0");
  return m;
}

namespace {

Json drive_to_json(const DriveTerm& d) {
  return {{"element", std::string(element_name(d.element))},
          {"rabi_hz", d.rabi_hz},
          {"phase_rad", d.phase_rad},
          {"detuning_hz", d.detuning_hz}};
}

Element element_field(const JsonReader& r, std::string_view key) {
  const std::string name = r.string(key);
  for (Element e : kAllElements) {
    if (element_name(e) == name) return e;
  }
  schema_error(r.child_path(key), "unknown element '" + name + "'");
}

}  // namespace

Json to_json(const PulseSchedule& s) {
  Json segs = Json::array();
  for (const auto& seg : s.segments) {
    Json freq = Json::object();
    for (Element e : kAllElements) {
      if (seg.freq_hz[element_index(e)]) freq[std::string(element_name(e))] = *seg.freq_hz[element_index(e)];
    }
    Json drives = Json::array();
    for (const auto& d : seg.drives) drives.push_back(drive_to_json(d));
    segs.push_back({{"duration", seg.duration}, {"freq_hz", freq}, {"drives", drives}, {"rise_fall", seg.rise_fall}});
  }
  Json ops = Json::array();
  for (const auto& op : s.instant_ops) {
    Json o = {{"time", op.time}};
    if (const auto* rot = std::get_if<Rotation>(&op.op)) {
      o["op"] = "rotation";
      o["element"] = std::string(element_name(rot->element));
      o["axis"] = std::string(axis_name(rot->axis));
      o["angle_rad"] = rot->angle_rad;
      o["phase_rad"] = rot->phase_rad;
    } else if (const auto* reset = std::get_if<Reset>(&op.op)) {
      o["op"] = "reset";
      o["element"] = std::string(element_name(reset->element));
    } else {
      o["op"] = "barrier";
    }
    ops.push_back(o);
  }
  return {{"segments", segs}, {"instant_ops", ops}};
}

PulseSchedule schedule_from_json(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  PulseSchedule s;
  const Json& segs = r.at("segments");
  if (!segs.is_array()) schema_error(r.child_path("segments"), "expected an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    JsonReader sr(segs[i], r.child_path("segments") + "[" + std::to_string(i) + "]");
    Segment seg;
    seg.duration = sr.number("duration");
    seg.rise_fall = sr.number("rise_fall", 0.0);
    if (sr.has("freq_hz")) {
      JsonReader fr(sr.at("freq_hz"), sr.child_path("freq_hz"));
      for (Element e : kAllElements) {
        const std::string name(element_name(e));
        if (fr.has(name)) seg.freq_hz[element_index(e)] = fr.number(name);
      }
      fr.reject_unknown();
    }
    if (sr.has("drives")) {
      const Json& drives = sr.at("drives");
      if (!drives.is_array()) schema_error(sr.child_path("drives"), "expected an array");
      for (std::size_t k = 0; k < drives.size(); ++k) {
        JsonReader dr(drives[k], sr.child_path("drives") + "[" + std::to_string(k) + "]");
        DriveTerm d;
        d.element = element_field(dr, "element");
        d.rabi_hz = dr.number("rabi_hz");
        d.phase_rad = dr.number("phase_rad", 0.0);
        d.detuning_hz = dr.number("detuning_hz", 0.0);
        dr.reject_unknown();
        seg.drives.push_back(d);
      }
    }
    sr.reject_unknown();
    s.segments.push_back(std::move(seg));
  }
  if (r.has("instant_ops")) {
    const Json& ops = r.at("instant_ops");
    if (!ops.is_array()) schema_error(r.child_path("instant_ops"), "expected an array");
    for (std::size_t i = 0; i < ops.size(); ++i) {
      JsonReader orr(ops[i], r.child_path("instant_ops") + "[" + std::to_string(i) + "]");
      const double t = orr.number("time");
      const std::string kind = orr.string("op");
      if (kind == "rotation") {
        Rotation rot;
        rot.element = element_field(orr, "element");
        const std::string axis = orr.string("axis");
        if (axis != "x" && axis != "y" && axis != "z") schema_error(orr.child_path("axis"), "unknown axis '" + axis + "'");
        rot.axis = parse_axis(axis);
        rot.angle_rad = orr.number("angle_rad");
        rot.phase_rad = orr.number("phase_rad", 0.0);
        s.instant_ops.push_back({t, rot});
      } else if (kind == "reset") {
        s.instant_ops.push_back({t, Reset{element_field(orr, "element")}});
      } else if (kind == "barrier") {
        s.instant_ops.push_back({t, Barrier{}});
      } else {
        schema_error(orr.child_path("op"), "unknown operation '" + kind + "'");
      }
      orr.reject_unknown();
    }
  }
  r.reject_unknown();
  try {
    s.validate();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return s;
}

Json to_json(const Eigen::MatrixXcd& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array();
    Json ir = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ir.push_back(m(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return {{"real", re}, {"imag", im}};
}

Eigen::MatrixXcd complex_matrix_from_json(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  const Json& re = r.at("real");
  const Json& im = r.at("imag");
  r.reject_unknown();
  if (!re.is_array() || !im.is_array() || re.size() != im.size() || re.empty()) {
    schema_error(path, "real and imag must be matching non-empty row arrays");
  }
  const auto rows = static_cast<Eigen::Index>(re.size());
  const auto cols = static_cast<Eigen::Index>(re[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& rr = re[static_cast<std::size_t>(i)];
    const Json& ir = im[static_cast<std::size_t>(i)];
    if (!rr.is_array() || !ir.is_array() || static_cast<Eigen::Index>(rr.size()) != cols ||
        static_cast<Eigen::Index>(ir.size()) != cols) {
      schema_error(path + ".real[" + std::to_string(i) + "]", "ragged matrix row");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& a = rr[static_cast<std::size_t>(k)];
      const Json& b = ir[static_cast<std::size_t>(k)];
      if (!a.is_number() || !b.is_number()) schema_error(path, "matrix entries must be numbers");
      m(i, k) = cplx(a.get<double>(), b.get<double>());
    }
  }
  return m;
}

Json to_json(const FitResult& f) {
  Json params = Json::array();
  for (const auto& p : f.params) {
    params.push_back({{"name", p.name}, {"unit", p.unit}, {"value", p.value}, {"sigma", p.sigma}});
  }
  return {{"model", f.model},
          {"params", params},
          {"residual_norm", f.residual_norm},
          {"converged", f.converged},
          {"flags", f.flags}};
}

Json to_json(const TomoResult& t) {
  return {{"rho_est", to_json(Eigen::MatrixXcd(t.rho_est))},
          {"purity", t.purity},
          {"concurrence", t.concurrence},
          {"shots_per_basis", t.shots_per_basis}};
}

Json to_json(const ProcessMatrix& p) { return {{"choi", to_json(Eigen::MatrixXcd(p.choi))}}; }

Json to_json(const SimResult& r) {
  Json obs = Json::object();
  for (const auto& o : r.observables) obs[o.name] = o.values;
  Json j = {{"times", r.times},
            {"observables", obs},
            {"seed", r.seed},
            {"n_trajectories", r.n_trajectories},
            {"flags", r.flags}};
  if (!r.rho_snapshots.empty()) {
    Json snaps = Json::array();
    for (const auto& rho : r.rho_snapshots) snaps.push_back(to_json(Eigen::MatrixXcd(rho)));
    j["rho_snapshots"] = snaps;
  }
  return j;
}

Json to_json(const SpectrumEstimate& s) {
  return {{"freqs", s.freqs},
          {"psd", s.psd},
          {"variance", s.variance},
          {"source", std::string(source_name(s.source))},
          {"convention", s.convention},
          {"flags", s.flags}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

std::string column_name(const std::string& name, const std::string& unit) {
  if (unit.empty()) return name;
  std::string u;
  for (char c : unit) {
    if (std::isalnum(static_cast<unsigned char>(c))) u += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return u.empty() ? name : name + "_" + u;
}

}  // namespace

std::string sim_result_csv(const SimResult& r) {
  std::ostringstream out;
  out << "# seed: " << r.seed << "\n# n_trajectories: " << r.n_trajectories << "\n";
  if (!r.flags.empty()) out << "# flags: " << join_flags(r.flags) << "\n";
  out << "time_s";
  for (const auto& o : r.observables) out << ',' << o.name;
  out << '\n';
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out << format_double(r.times[i]);
    for (const auto& o : r.observables) out << ',' << format_double(o.values[i]);
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult2D& s) {
  s.validate();
  std::ostringstream out;
  out << "# x: " << s.x_name << " (" << s.x_unit << ")\n";
  out << "# y: " << s.y_name << " (" << s.y_unit << ")\n";
  out << "# z: " << s.z_name << "\n";
  out << "# shape: " << s.y.size() << " x " << s.x.size() << "\n";
  out << column_name(s.y_name, s.y_unit) << ',' << column_name(s.x_name, s.x_unit) << ',' << s.z_name << '\n';
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out << format_double(s.y[i]) << ',' << format_double(s.x[k]) << ','
          << format_double(s.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) << '\n';
    }
  }
  return out.str();
}

std::string spectrum_csv(const SpectrumEstimate& s) {
  std::ostringstream out;
  out << "# convention: " << s.convention << "\n";
  if (!s.flags.empty()) out << "# flags: " << join_flags(s.flags) << "\n";
  out << "freq_hz,psd_hz2_per_hz,var,source\n";
  const std::string src(source_name(s.source));
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_double(s.freqs[i]) << ',' << format_double(s.psd[i]) << ',' << format_double(s.variance[i]) << ','
        << src << '\n';
  }
  return out.str();
}

namespace {

double parse_double(std::string_view field, const std::string& where) {
  double v = 0.0;
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    schema_error(where, "malformed number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

SpectrumEstimate spectrum_from_csv(std::string_view text) {
  SpectrumEstimate s;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view conv = "# convention: ";
      constexpr std::string_view flags = "# flags: ";
      if (line.rfind(conv, 0) == 0) s.convention = line.substr(conv.size());
      if (line.rfind(flags, 0) == 0) {
        std::istringstream fs(line.substr(flags.size()));
        std::string f;
        while (std::getline(fs, f, ';')) s.flags.push_back(f);
      }
      continue;
    }
    if (!header) {
      if (line != "freq_hz,psd_hz2_per_hz,var,source") schema_error("spectrum_csv", "unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const std::string where = "spectrum_csv.row[" + std::to_string(row++) + "]";
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 4) schema_error(where, "expected 4 columns");
    s.freqs.push_back(parse_double(cols[0], where));
    s.psd.push_back(parse_double(cols[1], where));
    s.variance.push_back(parse_double(cols[2], where));
    s.source = parse_source(cols[3]);
  }
  if (!header) schema_error("spectrum_csv", "missing header row");
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, path, "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::Io, path, "write failed");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::Numerical, "io.sha256_hex", "digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace tlslab
