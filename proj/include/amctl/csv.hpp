#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace amctl {

// Minimal CSV emitter; doubles are written with 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& cell(std::string_view text) {
    separate();
    out_ << text;
    return *this;
  }
  CsvWriter& cell(const char* text) { return cell(std::string_view(text)); }
  CsvWriter& cell(const std::string& text) { return cell(std::string_view(text)); }
  CsvWriter& cell(double value) { return cell(std::string_view(format(value))); }
  template <typename Int, std::enable_if_t<std::is_integral_v<Int>, int> = 0>
  CsvWriter& cell(Int value) {
    separate();
    out_ << value;
    return *this;
  }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    (cell(cells), ...);
    end_row();
  }

  static std::string format(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
  }

 private:
  void separate() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace amctl
