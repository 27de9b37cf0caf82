#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "legvio/mathcore.hpp"

namespace legvio::detail {

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
  }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out_ << ',';
      out_ << cols[i];
    }
    out_ << '\n';
  }
  CsvWriter& integer(std::int64_t v) {
    sep();
    out_ << v;
    return *this;
  }
  CsvWriter& real(double v) {
    sep();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out_ << buf;
    return *this;
  }
  CsvWriter& vec(const Vec3& v) { return real(v.x()).real(v.y()).real(v.z()); }
  CsvWriter& quat(const Rotation& r) { return real(r.w()).real(r.x()).real(r.y()).real(r.z()); }
  CsvWriter& text(const std::string& s) {
    sep();
    out_ << s;
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace legvio::detail
