#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

namespace floqlat::io {

using json = nlohmann::json;

/// Fixed "%.12g" number formatting so equal inputs give byte-identical files.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// CSV with a unit-annotated header row, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << "\n";
  }

  void row_mixed(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

/// Minimal SVG scatter/line rendering. Convenience output only.
class SvgPlot {
 public:
  SvgPlot(double xmin, double xmax, double ymin, double ymax, int w = 800, int h = 600)
      : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), w_(w), h_(h) {}

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color) {
    std::string pts;
    for (size_t i = 0; i < x.size(); ++i)
      pts += fmt(px(x[i])) + "," + fmt(py(y[i])) + " ";
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" points=\"" +
             pts + "\"/>\n";
  }

  void dots(const std::vector<double>& x, const std::vector<double>& y,
            const std::string& color, double r = 1.5) {
    for (size_t i = 0; i < x.size(); ++i)
      body_ += "<circle cx=\"" + fmt(px(x[i])) + "\" cy=\"" + fmt(py(y[i])) + "\" r=\"" +
               fmt(r) + "\" fill=\"" + color + "\"/>\n";
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_ << "</svg>\n";
  }

 private:
  double px(double x) const { return (x - xmin_) / (xmax_ - xmin_) * (w_ - 80) + 40; }
  double py(double y) const { return h_ - 40 - (y - ymin_) / (ymax_ - ymin_) * (h_ - 80); }
  double xmin_, xmax_, ymin_, ymax_;
  int w_, h_;
  std::string body_;
};

}  // namespace floqlat::io
