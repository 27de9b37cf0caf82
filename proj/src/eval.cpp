#include "legvio/eval.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "csv_writer.hpp"

namespace legvio {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void check_grids(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size()) {
    throw std::invalid_argument("trajectories are not time-aligned: " + std::to_string(est.size()) + " vs " +
                                std::to_string(gt.size()) + " samples");
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].t != gt[i].t) {
      throw std::invalid_argument("trajectories are not time-aligned at sample " + std::to_string(i));
    }
  }
  if (gt.size() < 2) return;
  const std::int64_t step = gt[1].t - gt[0].t;
  if (step <= 0) throw std::invalid_argument("trajectory grid is not increasing");
  for (std::size_t i = 1; i < gt.size(); ++i) {
    if (gt[i].t - gt[i - 1].t != step) throw std::invalid_argument("trajectory grid is not uniform");
  }
}

}  // namespace

const RpeInterval* RpeReport::find(double interval_s) const {
  for (const RpeInterval& r : intervals) {
    if (std::abs(r.interval_s - interval_s) < 1e-9) return &r;
  }
  return nullptr;
}

YawGravity yaw_gravity_decompose(const Rotation& R_err) {
  const Vec3 ez = Vec3::UnitZ();
  const Vec3 g = R_err * ez;
  YawGravity out;
  out.gravity_deg = rad2deg(std::acos(std::clamp(g.dot(ez), -1.0, 1.0)));
  const Rotation tilt(Eigen::Quaterniond::FromTwoVectors(ez, g));
  out.yaw_deg = rad2deg(so3_log(tilt.inverse() * R_err).norm());
  return out;
}

RpeReport rpe(const Trajectory& est, const Trajectory& gt, const RpeOptions& options) {
  check_grids(est, gt);
  if (options.stride == 0) throw std::invalid_argument("rpe stride must be >= 1");
  RpeReport report;
  const double dt = gt.size() >= 2 ? seconds_between(gt[0].t, gt[1].t) : 0.0;
  for (double interval : options.intervals) {
    RpeInterval row;
    row.interval_s = interval;
    std::array<double, kNumComponents> sum{}, sum2{}, mx{};
    std::size_t n = 0;
    const auto steps = dt > 0.0 ? static_cast<std::size_t>(std::llround(interval / dt)) : 0;
    if (steps > 0 && steps < gt.size()) {
      for (std::size_t i = 0; i + steps < gt.size(); i += options.stride) {
        const std::size_t j = i + steps;
        const Pose& Ti = est[i].pose;
        const Pose& Tj = est[j].pose;
        const Pose& Gi = gt[i].pose;
        const Pose& Gj = gt[j].pose;
        const Vec3 ep = Gi.orientation * (Ti.orientation.inverse() * (Tj.position - Ti.position)) -
                        (Gj.position - Gi.position);
        const Rotation E = Gi.orientation * Ti.orientation.inverse() * Tj.orientation * Gj.orientation.inverse();
        const YawGravity yg = yaw_gravity_decompose(E);
        const std::array<double, kNumComponents> e{ep.head<2>().norm(), std::abs(ep.z()), yg.yaw_deg,
                                                   yg.gravity_deg};
        for (int c = 0; c < kNumComponents; ++c) {
          sum[c] += e[c];
          sum2[c] += e[c] * e[c];
          mx[c] = std::max(mx[c], e[c]);
          if (options.keep_samples) row.samples[c].push_back(e[c]);
        }
        ++n;
      }
    }
    for (int c = 0; c < kNumComponents; ++c) {
      RpeStats& s = row.stats[c];
      s.count = n;
      if (n > 0) {
        s.mean = sum[c] / static_cast<double>(n);
        s.max = mx[c];
        s.rmse = std::sqrt(sum2[c] / static_cast<double>(n));
      }
    }
    report.intervals.push_back(std::move(row));
  }

  for (int c = 0; c < kNumComponents; ++c) {
    RpeStats& a = report.all[c];
    std::size_t used = 0;
    for (const RpeInterval& r : report.intervals) {
      const RpeStats& s = r.stats[c];
      if (s.count == 0) continue;
      a.mean += s.mean;
      a.rmse += s.rmse;
      a.max = std::max(a.max, s.max);
      a.count += s.count;
      ++used;
    }
    if (used > 0) {
      a.mean /= static_cast<double>(used);
      a.rmse /= static_cast<double>(used);
    }
  }
  return report;
}

void write_rpe_csv(const std::filesystem::path& path, const std::vector<NamedReport>& reports) {
  detail::CsvWriter w(path);
  w.header({"variant", "interval_s", "component", "mean", "max", "rmse", "count"});
  for (const auto& [name, rep] : reports) {
    for (const RpeInterval& r : rep.intervals) {
      for (int c = 0; c < kNumComponents; ++c) {
        const RpeStats& s = r.stats[c];
        w.text(name).real(r.interval_s).text(kComponentNames[c]).real(s.mean).real(s.max).real(s.rmse);
        w.integer(static_cast<std::int64_t>(s.count)).end_row();
      }
    }
    for (int c = 0; c < kNumComponents; ++c) {
      const RpeStats& s = rep.all[c];
      w.text(name).text("all").text(kComponentNames[c]).real(s.mean).real(s.max).real(s.rmse);
      w.integer(static_cast<std::int64_t>(s.count)).end_row();
    }
  }
}

std::string comparison_table(const std::vector<NamedReport>& reports) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"RPE (mean over intervals)"};
  for (const auto& r : reports) head.push_back(r.first);
  cells.push_back(head);
  for (int c = 0; c < kNumComponents; ++c) {
    for (int k = 0; k < 2; ++k) {
      std::vector<std::string> row{std::string(kComponentNames[c]) + (k == 0 ? " mean" : " max") + " [" +
                                   kComponentUnits[c] + "]"};
      for (const auto& r : reports) {
        const RpeStats& s = r.second.all[c];
        row.push_back(fmt(c < 2 ? "%.3f" : "%.2f", k == 0 ? s.mean : s.max));
      }
      cells.push_back(row);
    }
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      out += i == 0 ? row[i] + pad : "  " + pad + row[i];
    }
    out += '\n';
  }
  return out;
}

void write_plot_data(const std::filesystem::path& dir, const std::vector<NamedReport>& reports) {
  std::filesystem::create_directories(dir);
  for (int c = 0; c < kNumComponents; ++c) {
    const std::filesystem::path data = dir / (std::string("rpe_") + kComponentNames[c] + ".dat");
    std::ofstream out(data);
    if (!out) throw std::runtime_error("cannot open for writing: " + data.string());
    out << "# interval_index interval_s variant_index min q1 median q3 max  (variant order:";
    for (const auto& r : reports) out << ' ' << r.first;
    out << ")\n";
    for (std::size_t v = 0; v < reports.size(); ++v) {
      const RpeReport& rep = reports[v].second;
      for (std::size_t i = 0; i < rep.intervals.size(); ++i) {
        const RpeInterval& r = rep.intervals[i];
        const auto& s = r.samples[c];
        if (r.stats[c].count == 0) continue;
        double lo, q1, med, q3, hi;
        if (s.empty()) {
          lo = q1 = med = q3 = r.stats[c].mean;
          hi = r.stats[c].max;
        } else {
          lo = quantile(s, 0.0);
          q1 = quantile(s, 0.25);
          med = quantile(s, 0.5);
          q3 = quantile(s, 0.75);
          hi = quantile(s, 1.0);
        }
        out << i << ' ' << r.interval_s << ' ' << v << ' ' << fmt("%.9g", lo) << ' ' << fmt("%.9g", q1) << ' '
            << fmt("%.9g", med) << ' ' << fmt("%.9g", q3) << ' ' << fmt("%.9g", hi) << '\n';
      }
    }
  }

  const std::filesystem::path script = dir / "rpe.gp";
  std::ofstream gp(script);
  if (!gp) throw std::runtime_error("cannot open for writing: " + script.string());
  const double width = 0.8 / std::max<std::size_t>(1, reports.size());
  gp << "# gnuplot " << script.filename().string() << "\n"
     << "set terminal pngcairo size 1400,900\n"
     << "set style fill solid 0.4 border -1\n"
     << "set boxwidth " << width * 0.9 << "\n"
     << "set xtics ('0.1' 0, '0.2' 1, '0.5' 2, '1' 3, '2' 4, '5' 5, '10' 6, '20' 7, '50' 8)\n"
     << "set xlabel 'interval [s]'\n";
  for (int c = 0; c < kNumComponents; ++c) {
    const std::string name = kComponentNames[c];
    gp << "set output 'rpe_" << name << ".png'\n"
       << "set ylabel '" << name << " [" << kComponentUnits[c] << "]'\n"
       << "plot ";
    for (std::size_t v = 0; v < reports.size(); ++v) {
      if (v) gp << ", \\\n     ";
      const double off = (static_cast<double>(v) - 0.5 * static_cast<double>(reports.size() - 1)) * width;
      gp << "'rpe_" << name << ".dat' using ($3==" << v << " ? $1+" << off
         << " : NaN):5:4:8:7 with candlesticks whiskerbars title '" << reports[v].first << "', \\\n"
         << "     '' using ($3==" << v << " ? $1+" << off << " : NaN):6:6:6:6 with candlesticks lt -1 notitle";
    }
    gp << "\n";
  }
}

}  // namespace legvio
