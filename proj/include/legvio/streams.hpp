#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "legvio/mathcore.hpp"

namespace legvio {

/// Nanoseconds since run start.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t ns) : ns_(ns) {}

  static constexpr Timestamp from_seconds(double s) {
    return Timestamp(static_cast<std::int64_t>(s * 1e9 + (s >= 0 ? 0.5 : -0.5)));
  }
  static constexpr Timestamp from_ms(std::int64_t ms) { return Timestamp(ms * 1'000'000); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

  constexpr auto operator<=>(const Timestamp&) const = default;
  constexpr Timestamp operator+(std::int64_t dns) const { return Timestamp(ns_ + dns); }
  constexpr Timestamp operator-(std::int64_t dns) const { return Timestamp(ns_ - dns); }
  constexpr std::int64_t operator-(Timestamp other) const { return ns_ - other.ns_; }

 private:
  std::int64_t ns_ = 0;
};

/// Difference in seconds, b - a.
inline double seconds_between(Timestamp a, Timestamp b) { return static_cast<double>(b - a) * 1e-9; }

enum class ImuSource { robot_imu, vio_imu };

struct ImuSample {
  Timestamp t;
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force
  Vec3 gyro = Vec3::Zero();   // rad/s
  ImuSource source = ImuSource::robot_imu;
};

enum Leg : int { FL = 0, FR = 1, HL = 2, HR = 3 };
constexpr int kNumLegs = 4;
constexpr std::array<const char*, kNumLegs> kLegNames{"FL", "FR", "HL", "HR"};

/// Joint order inside each leg vector: HAA, HFE, KFE.
struct JointSample {
  Timestamp t;
  std::array<Vec3, kNumLegs> q{};    // rad
  std::array<Vec3, kNumLegs> dq{};   // rad/s
  std::array<Vec3, kNumLegs> tau{};  // N m
};

enum class VioKind { frame, predicted };

struct VioEstimate {
  Timestamp t_capture;    // time of validity
  Timestamp t_available;  // arrival time, >= t_capture
  Pose pose;
  Vec3 vel_world = Vec3::Zero();
  VioKind kind = VioKind::frame;
};

/// Motion-capture pose sample.
struct PoseSample {
  Timestamp t;
  Pose pose;
};

/// Pose with world-frame velocity; used for truth and for estimator output.
struct TrajectorySample {
  Timestamp t;
  Pose pose;
  Vec3 vel_world = Vec3::Zero();
};

using Trajectory = std::vector<TrajectorySample>;

/// All recorded streams of one run.
struct SensorLog {
  std::vector<ImuSample> imu;
  std::vector<JointSample> joints;
  std::vector<VioEstimate> vio;
  std::vector<PoseSample> vicon;
};

// ---------------------------------------------------------------------------
// Multi-rate handling

/// Zero-order hold of `samples` (sorted by t) onto the grid k*period_ns.
///
/// Output covers grid points from the first to the last input timestamp;
/// each output carries the latest input with t <= grid t.
template <typename Sample>
std::vector<Sample> upsample_hold(std::span<const Sample> samples, std::int64_t period_ns) {
  std::vector<Sample> out;
  if (samples.empty() || period_ns <= 0) return out;
  const std::int64_t first = samples.front().t.ns();
  const std::int64_t last = samples.back().t.ns();
  // First grid point at or after the first sample.
  std::int64_t g = first >= 0 ? ((first + period_ns - 1) / period_ns) * period_ns
                              : -((-first) / period_ns) * period_ns;
  std::size_t idx = 0;
  out.reserve(static_cast<std::size_t>((last - g) / period_ns + 1));
  for (; g <= last; g += period_ns) {
    while (idx + 1 < samples.size() && samples[idx + 1].t.ns() <= g) ++idx;
    Sample s = samples[idx];
    s.t = Timestamp(g);
    out.push_back(s);
  }
  return out;
}

/// Reference into one of several input streams.
struct EventRef {
  Timestamp available;
  std::size_t stream = 0;  // priority order: lower index wins ties
  std::size_t index = 0;   // position inside that stream
};

/// Merges per-stream availability times into one ordered sequence.
///
/// Each input vector must be sorted. Ties break by stream order, then by
/// in-stream position, so the result is a deterministic permutation.
std::vector<EventRef> merge_by_availability(std::span<const std::vector<Timestamp>> streams);

/// Availability times of a sensor log in the estimator's priority order:
/// robot IMU, joints, VIO, Vicon.
enum class StreamId : std::size_t { imu = 0, joints = 1, vio = 2, vicon = 3 };
std::vector<EventRef> merge_log(const SensorLog& log);

// ---------------------------------------------------------------------------
// CSV logs (one file per stream, header row required)

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> imu);
void write_joints_csv(const std::filesystem::path& path, std::span<const JointSample> joints);
void write_vio_csv(const std::filesystem::path& path, std::span<const VioEstimate> vio);
void write_vicon_csv(const std::filesystem::path& path, std::span<const PoseSample> vicon);
void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrajectorySample> traj);

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path,
                                    ImuSource source = ImuSource::robot_imu);
std::vector<JointSample> read_joints_csv(const std::filesystem::path& path);
std::vector<VioEstimate> read_vio_csv(const std::filesystem::path& path);
std::vector<PoseSample> read_vicon_csv(const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace legvio
