#include "legvio/streams.hpp"

#include "csv_writer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace legvio {

std::vector<EventRef> merge_by_availability(std::span<const std::vector<Timestamp>> streams) {
  std::vector<EventRef> events;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  events.reserve(total);
  for (std::size_t k = 0; k < streams.size(); ++k) {
    for (std::size_t i = 0; i < streams[k].size(); ++i) {
      events.push_back(EventRef{streams[k][i], k, i});
    }
  }
  std::sort(events.begin(), events.end(), [](const EventRef& a, const EventRef& b) {
    if (a.available != b.available) return a.available < b.available;
    if (a.stream != b.stream) return a.stream < b.stream;
    return a.index < b.index;
  });
  return events;
}

std::vector<EventRef> merge_log(const SensorLog& log) {
  std::vector<std::vector<Timestamp>> times(4);
  times[0].reserve(log.imu.size());
  for (const auto& s : log.imu) times[0].push_back(s.t);
  times[1].reserve(log.joints.size());
  for (const auto& s : log.joints) times[1].push_back(s.t);
  times[2].reserve(log.vio.size());
  for (const auto& s : log.vio) times[2].push_back(s.t_available);
  times[3].reserve(log.vicon.size());
  for (const auto& s : log.vicon) times[3].push_back(s.t);
  if (!std::is_sorted(times[2].begin(), times[2].end())) {
    throw std::invalid_argument("vio stream must be sorted by t_available");
  }
  return merge_by_availability(times);
}

// ---------------------------------------------------------------------------
// CSV

using detail::CsvWriter;

namespace {

class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const std::vector<std::string>& expected)
      : in_(path), path_(path.string()) {
    if (!in_) throw std::runtime_error("cannot open: " + path_);
    std::string line;
    if (!std::getline(in_, line)) throw std::runtime_error("missing header row: " + path_);
    auto cols = split(line);
    if (cols.size() != expected.size()) {
      throw std::runtime_error(path_ + ": expected " + std::to_string(expected.size()) +
                               " columns, got " + std::to_string(cols.size()));
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (trim(cols[i]) != expected[i]) {
        throw std::runtime_error(path_ + ": column " + std::to_string(i) + " is '" + cols[i] +
                                 "', expected '" + expected[i] + "'");
      }
    }
    ncols_ = expected.size();
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      fields_ = split(line);
      if (fields_.size() != ncols_) {
        throw std::runtime_error(path_ + ":" + std::to_string(line_no_ + 1) + ": wrong field count");
      }
      pos_ = 0;
      return true;
    }
    return false;
  }

  std::int64_t integer() {
    const std::string f = trim(fields_.at(pos_++));
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size()) fail(f);
    return v;
  }
  double real() {
    const std::string f = trim(fields_.at(pos_++));
    double v = 0.0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size()) fail(f);
    return v;
  }
  Vec3 vec() {
    const double x = real();
    const double y = real();
    const double z = real();
    return Vec3(x, y, z);
  }
  Rotation quat() {
    const double w = real();
    const double x = real();
    const double y = real();
    const double z = real();
    return Rotation(w, x, y, z);
  }
  std::string text() { return trim(fields_.at(pos_++)); }

 private:
  [[noreturn]] void fail(const std::string& f) const {
    throw std::runtime_error(path_ + ":" + std::to_string(line_no_ + 1) + ": cannot parse '" + f + "'");
  }
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  }
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::ifstream in_;
  std::string path_;
  std::vector<std::string> fields_;
  std::size_t ncols_ = 0;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

const std::vector<std::string> kImuCols{"t_ns", "ax", "ay", "az", "gx", "gy", "gz"};
const std::vector<std::string> kVioCols{"t_capture_ns", "t_available_ns", "px", "py", "pz", "qw", "qx",
                                        "qy", "qz", "vx", "vy", "vz", "kind"};
const std::vector<std::string> kViconCols{"t_ns", "px", "py", "pz", "qw", "qx", "qy", "qz"};
const std::vector<std::string> kTrajCols{"t_ns", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz"};

std::vector<std::string> joint_cols() {
  static const char* joints[] = {"haa", "hfe", "kfe"};
  std::vector<std::string> cols{"t_ns"};
  for (const char* prefix : {"q", "dq", "tau"}) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      for (const char* j : joints) {
        cols.push_back(std::string(prefix) + "_" + kLegNames[leg] + "_" + j);
      }
    }
  }
  return cols;
}

}  // namespace

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> imu) {
  CsvWriter w(path);
  w.header(kImuCols);
  for (const auto& s : imu) {
    w.integer(s.t.ns()).vec(s.accel).vec(s.gyro).end_row();
  }
}

void write_joints_csv(const std::filesystem::path& path, std::span<const JointSample> joints) {
  CsvWriter w(path);
  w.header(joint_cols());
  for (const auto& s : joints) {
    w.integer(s.t.ns());
    for (const auto& v : s.q) w.vec(v);
    for (const auto& v : s.dq) w.vec(v);
    for (const auto& v : s.tau) w.vec(v);
    w.end_row();
  }
}

void write_vio_csv(const std::filesystem::path& path, std::span<const VioEstimate> vio) {
  CsvWriter w(path);
  w.header(kVioCols);
  for (const auto& s : vio) {
    w.integer(s.t_capture.ns()).integer(s.t_available.ns());
    w.vec(s.pose.position).quat(s.pose.orientation).vec(s.vel_world);
    w.text(s.kind == VioKind::frame ? "frame" : "predicted").end_row();
  }
}

void write_vicon_csv(const std::filesystem::path& path, std::span<const PoseSample> vicon) {
  CsvWriter w(path);
  w.header(kViconCols);
  for (const auto& s : vicon) {
    w.integer(s.t.ns()).vec(s.pose.position).quat(s.pose.orientation).end_row();
  }
}

void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrajectorySample> traj) {
  CsvWriter w(path);
  w.header(kTrajCols);
  for (const auto& s : traj) {
    w.integer(s.t.ns()).vec(s.pose.position).quat(s.pose.orientation).vec(s.vel_world).end_row();
  }
}

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path, ImuSource source) {
  CsvReader r(path, kImuCols);
  std::vector<ImuSample> out;
  while (r.next()) {
    ImuSample s;
    s.t = Timestamp(r.integer());
    s.accel = r.vec();
    s.gyro = r.vec();
    s.source = source;
    out.push_back(s);
  }
  return out;
}

std::vector<JointSample> read_joints_csv(const std::filesystem::path& path) {
  CsvReader r(path, joint_cols());
  std::vector<JointSample> out;
  while (r.next()) {
    JointSample s;
    s.t = Timestamp(r.integer());
    for (auto& v : s.q) v = r.vec();
    for (auto& v : s.dq) v = r.vec();
    for (auto& v : s.tau) v = r.vec();
    out.push_back(s);
  }
  return out;
}

std::vector<VioEstimate> read_vio_csv(const std::filesystem::path& path) {
  CsvReader r(path, kVioCols);
  std::vector<VioEstimate> out;
  while (r.next()) {
    VioEstimate s;
    s.t_capture = Timestamp(r.integer());
    s.t_available = Timestamp(r.integer());
    s.pose.position = r.vec();
    s.pose.orientation = r.quat();
    s.vel_world = r.vec();
    const std::string kind = r.text();
    if (kind == "frame") {
      s.kind = VioKind::frame;
    } else if (kind == "predicted") {
      s.kind = VioKind::predicted;
    } else {
      throw std::runtime_error(path.string() + ": unknown vio kind '" + kind + "'");
    }
    if (s.t_available < s.t_capture) {
      throw std::runtime_error(path.string() + ": t_available earlier than t_capture");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<PoseSample> read_vicon_csv(const std::filesystem::path& path) {
  CsvReader r(path, kViconCols);
  std::vector<PoseSample> out;
  while (r.next()) {
    PoseSample s;
    s.t = Timestamp(r.integer());
    s.pose.position = r.vec();
    s.pose.orientation = r.quat();
    out.push_back(s);
  }
  return out;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  CsvReader r(path, kTrajCols);
  Trajectory out;
  while (r.next()) {
    TrajectorySample s;
    s.t = Timestamp(r.integer());
    s.pose.position = r.vec();
    s.pose.orientation = r.quat();
    s.vel_world = r.vec();
    out.push_back(s);
  }
  return out;
}

}  // namespace legvio
