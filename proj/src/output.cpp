#include "nlh/output.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nlh {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_loglog_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 480, L = 80, R = 170, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = xmin; d <= xmax + 1e-9; d += 1) {
    os << "<line x1=\"" << px(d) << "\" y1=\"" << T << "\" x2=\"" << px(d) << "\" y2=\"" << H - B
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << px(d) << "\" y=\"" << H - B + 16
       << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = ymin; d <= ymax + 1e-9; d += 1) {
    os << "<line x1=\"" << L << "\" y1=\"" << py(d) << "\" x2=\"" << W - R << "\" y2=\"" << py(d)
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << py(d) + 4
       << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (T + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    std::string points;
    for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i) {
      const double x = series[s].x[i], y = series[s].y[i];
      if (!(x > 0.0) || !(y > 0.0)) continue;
      const double cx = px(std::log10(x)), cy = py(std::log10(y));
      points += std::to_string(cx) + "," + std::to_string(cy) + " ";
      os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    os << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = T + 14 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << W - R + 42 << "\" y=\"" << ly << "\">"
       << escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_solution_text(std::ostream& os, const FeField& field) {
  os.precision(17);
  const auto& c = field.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) os << i << " " << c[i].real() << " " << c[i].imag() << "\n";
}

}  // namespace nlh
