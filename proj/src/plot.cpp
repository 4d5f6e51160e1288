#include "artic/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "artic/common.hpp"

namespace artic::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void polyline(std::ostringstream& os, const std::vector<std::pair<double, double>>& pts,
              const char* color, const char* dash) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\"";
  if (dash[0]) os << " stroke-dasharray=\"" << dash << "\"";
  os << " points=\"";
  for (const auto& [x, y] : pts) os << fmt(x) << ',' << fmt(y) << ' ';
  os << "\"/>\n";
}

}  // namespace

std::string trajectory_svg(const MatX& truth, const MatX& predicted,
                           const corpus::PhonemeAlignment& alignment,
                           const std::vector<int>& channels, double frame_rate_hz) {
  if (channels.empty()) throw ConfigError("trajectory_svg: no channels selected");
  const int W = 860, panel_h = 150, margin = 44;
  const int H = margin + static_cast<int>(channels.size()) * (panel_h + 26);
  const double t_max = std::max(truth.rows(), predicted.rows()) / frame_rate_hz;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto x_of = [&](double t) { return margin + t / t_max * (W - 2 * margin); };

  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    const int c = channels[ci];
    if (c < 0 || c >= corpus::kNumChannels) throw ConfigError("trajectory_svg: bad channel index");
    const double top = margin + static_cast<double>(ci) * (panel_h + 26);
    double lo = truth.col(c).minCoeff(), hi = truth.col(c).maxCoeff();
    if (predicted.rows() > 0) {
      lo = std::min(lo, predicted.col(c).minCoeff());
      hi = std::max(hi, predicted.col(c).maxCoeff());
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    auto y_of = [&](double v) { return top + panel_h - (v - lo) / (hi - lo) * panel_h; };

    os << "<text x=\"" << margin << "\" y=\"" << fmt(top - 6) << "\">"
       << corpus::channel_names()[static_cast<std::size_t>(c)] << "</text>\n";
    // phoneme boundaries
    for (const auto& iv : alignment.intervals) {
      const double x = x_of(iv.start_s);
      os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(x)
         << "\" y2=\"" << fmt(top + panel_h) << "\" stroke=\"#bbbbbb\" stroke-width=\"0.6\"/>\n";
      if (ci == 0)
        os << "<text x=\"" << fmt(x_of(0.5 * (iv.start_s + iv.end_s)) - 4) << "\" y=\""
           << fmt(top - 18) << "\" fill=\"#555555\">" << iv.phoneme << "</text>\n";
    }
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index t = 0; t < truth.rows(); ++t)
      pts.push_back({x_of(t / frame_rate_hz), y_of(truth(t, c))});
    polyline(os, pts, "#1f6fb2", "");
    pts.clear();
    for (Eigen::Index t = 0; t < predicted.rows(); ++t)
      pts.push_back({x_of(t / frame_rate_hz), y_of(predicted(t, c))});
    polyline(os, pts, "#d0541c", "4,3");
  }
  os << "<text x=\"" << margin << "\" y=\"" << H - 8
     << "\" fill=\"#1f6fb2\">ground truth</text>\n";
  os << "<text x=\"" << margin + 110 << "\" y=\"" << H - 8
     << "\" fill=\"#d0541c\">predicted</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string attention_svg(const MatX& alphas, const std::vector<std::string>& labels) {
  if (alphas.size() == 0) throw DimensionError("attention_svg: empty attention matrix");
  if (static_cast<Eigen::Index>(labels.size()) != alphas.cols())
    throw DimensionError("attention_svg: label count does not match tokens");
  const int margin = 60, cell_w = 4;
  const int cell_h = std::max(6, std::min(18, 480 / static_cast<int>(alphas.cols())));
  const int W = margin * 2 + cell_w * static_cast<int>(alphas.rows());
  const int H = margin * 2 + cell_h * static_cast<int>(alphas.cols());

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index n = 0; n < alphas.cols(); ++n) {
    os << "<text x=\"6\" y=\"" << margin + static_cast<int>(n) * cell_h + cell_h - 2 << "\">"
       << labels[static_cast<std::size_t>(n)] << "</text>\n";
    for (Eigen::Index t = 0; t < alphas.rows(); ++t) {
      const double a = std::clamp(alphas(t, n), 0.0, 1.0);
      const int shade = static_cast<int>(255.0 * (1.0 - a));
      os << "<rect x=\"" << margin + static_cast<int>(t) * cell_w << "\" y=\""
         << margin + static_cast<int>(n) * cell_h << "\" width=\"" << cell_w << "\" height=\""
         << cell_h << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\"/>\n";
    }
  }
  os << "<text x=\"" << margin << "\" y=\"" << margin - 8
     << "\">decoder frames (10 ms) vs phoneme tokens</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace artic::cli
