#include "mcsforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcsforge {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// round limits outward to a tidy tick step
void nice_limits(double& lo, double& hi, double& step) {
  if (hi <= lo) hi = lo + 1.0;
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  step = (norm <= 1.0 ? 1.0 : norm <= 2.0 ? 2.0 : norm <= 5.0 ? 5.0 : 10.0) * mag;
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
}

}  // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          int width, int height) {
  const int ml = 70, mr = 150, mt = 40, mb = 50;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!any) {
        xmin = xmax = s.x[k];
        ymin = ymax = s.y[k];
        any = true;
      }
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  double xstep, ystep;
  nice_limits(xmin, xmax, xstep);
  nice_limits(ymin, ymax, ystep);

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";

  for (double t = ymin; t <= ymax + 1e-9; t += ystep) {
    const double y = py(t);
    os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\""
       << y << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  for (double t = xmin; t <= xmax + 1e-9; t += xstep) {
    const double x = px(t);
    os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
       << mt + ph << "\" stroke=\"#eeeeee\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 16
       << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
     << ph << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << mt + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < series[s].x.size(); ++k)
      os << px(series[s].x[k]) << "," << py(series[s].y[k]) << " ";
    os << "\"/>\n";
    const double ly = mt + 14.0 * s;
    os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly + 4 << "\" x2=\""
       << ml + pw + 30 << "\" y2=\"" << ly + 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 34 << "\" y=\"" << ly + 8 << "\">"
       << escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_heatmap(const ReturnMatrix& matrix, const std::vector<std::string>& labels,
                        const std::string& title, int cell_size) {
  const int K = matrix.K;
  const int ml = 90, mt = 70;
  const int width = ml + K * cell_size + 30;
  const int height = mt + K * cell_size + 30;

  double lo = matrix.values.empty() ? 0.0 : matrix.values[0];
  double hi = lo;
  for (double v : matrix.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";

  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) {
      const double t = (matrix.at(r, c) - lo) / (hi - lo);
      const int red = static_cast<int>(255 * t);
      const int blue = static_cast<int>(255 * (1.0 - t));
      const int green = static_cast<int>(120 + 60 * (1.0 - std::abs(2 * t - 1)));
      const int x = ml + c * cell_size;
      const int y = mt + r * cell_size;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_size
         << "\" height=\"" << cell_size << "\" fill=\"rgb(" << red << "," << green << ","
         << blue << ")\" stroke=\"white\"/>\n";
      os << "<text x=\"" << x + cell_size / 2 << "\" y=\"" << y + cell_size / 2 + 4
         << "\" text-anchor=\"middle\" fill=\"white\">" << fmt(matrix.at(r, c))
         << "</text>\n";
    }
  for (int k = 0; k < K; ++k) {
    const std::string name = k < static_cast<int>(labels.size()) ? labels[k]
                                                                 : std::to_string(k);
    os << "<text x=\"" << ml + k * cell_size + cell_size / 2 << "\" y=\"" << mt - 8
       << "\" text-anchor=\"middle\">" << escape(name) << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << mt + k * cell_size + cell_size / 2 + 4
       << "\" text-anchor=\"end\">" << escape(name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mcsforge
