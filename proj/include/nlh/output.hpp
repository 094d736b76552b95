#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlh/fe_space.hpp"

namespace nlh {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal self-contained SVG log-log plot: axes with decade ticks, one
/// polyline with markers per series, legend. Non-positive points are skipped.
void write_loglog_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<PlotSeries>& series);

/// Writes `path` through a temporary sibling file and a rename, so readers
/// never see a partial file. Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);

/// One line per coefficient: "index re im".
void write_solution_text(std::ostream& os, const FeField& field);

}  // namespace nlh
