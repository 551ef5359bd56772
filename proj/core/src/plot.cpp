#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "semcom/evaluation.hpp"

namespace semcom {
namespace {

constexpr int kW = 640, kH = 440;
constexpr int kLeft = 70, kRight = 160, kTop = 30, kBottom = 50;

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string series_key(const EvalRow& r) {
  std::ostringstream os;
  os << "w_P=" << r.w_p;
  if (r.perturb != "none") os << " " << r.perturb;
  return os.str();
}

double nice_step(double span) {
  if (span <= 0) return 1;
  double raw = span / 5, mag = std::pow(10, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10 * mag;
}

void write_svg(const std::string& path, const std::string& ylabel,
               const std::map<std::string, std::vector<std::pair<double, double>>>& series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [k, pts] : series)
    for (auto [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (1 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ofstream f(path);
  if (!f) throw IoError("cannot write plot: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
    << "' font-family='sans-serif' font-size='12'>\n"
    << "<rect width='100%' height='100%' fill='white'/>\n"
    << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << pw << "' height='" << ph
    << "' fill='none' stroke='#333'/>\n";

  double xs = nice_step(xmax - xmin), ys = nice_step(ymax - ymin);
  for (double x = std::ceil(xmin / xs) * xs; x <= xmax + 1e-9; x += xs) {
    f << "<line x1='" << px(x) << "' y1='" << kTop << "' x2='" << px(x) << "' y2='"
      << kTop + ph << "' stroke='#ddd'/>\n"
      << "<text x='" << px(x) << "' y='" << kTop + ph + 18
      << "' text-anchor='middle'>" << x << "</text>\n";
  }
  for (double y = std::ceil(ymin / ys) * ys; y <= ymax + 1e-9; y += ys) {
    f << "<line x1='" << kLeft << "' y1='" << py(y) << "' x2='" << kLeft + pw << "' y2='"
      << py(y) << "' stroke='#ddd'/>\n"
      << "<text x='" << kLeft - 8 << "' y='" << py(y) + 4
      << "' text-anchor='end'>" << y << "</text>\n";
  }
  f << "<text x='" << kLeft + pw / 2 << "' y='" << kH - 12
    << "' text-anchor='middle'>Eve SNR (dB)</text>\n"
    << "<text x='16' y='" << kTop + ph / 2 << "' text-anchor='middle' transform='rotate(-90 16 "
    << kTop + ph / 2 << ")'>" << ylabel << "</text>\n";

  int si = 0;
  for (const auto& [name, pts] : series) {
    const char* col = kColors[si % 8];
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    f << "<polyline fill='none' stroke='" << col << "' stroke-width='2' points='";
    for (auto [x, y] : sorted) f << px(x) << ',' << py(y) << ' ';
    f << "'/>\n";
    for (auto [x, y] : sorted)
      f << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << col
        << "'/>\n";
    double ly = kTop + 14 + 18 * si;
    f << "<line x1='" << kLeft + pw + 12 << "' y1='" << ly << "' x2='" << kLeft + pw + 34
      << "' y2='" << ly << "' stroke='" << col << "' stroke-width='2'/>\n"
      << "<text x='" << kLeft + pw + 40 << "' y='" << ly + 4 << "'>" << name
      << "</text>\n";
    ++si;
  }
  f << "</svg>\n";
  if (!f) throw IoError("short write to plot: " + path);
}

}  // namespace

std::vector<std::string> plot_report(const EvalReport& report,
                                     const std::string& path_prefix) {
  if (report.rows.empty()) throw ContractViolation("plot_report: empty report");
  struct MetricDef {
    const char* suffix;
    const char* label;
    double EvalRow::* field;
  };
  const MetricDef defs[] = {{"bob_acc", "Bob accuracy", &EvalRow::bob_acc},
                            {"eve_acc", "Eve accuracy", &EvalRow::eve_acc},
                            {"gap", "Accuracy gap (Bob - Eve)", &EvalRow::gap},
                            {"psnr", "PSNR (dB)", &EvalRow::psnr_db},
                            {"ssim", "SSIM", &EvalRow::ssim}};
  std::vector<std::string> out;
  for (const auto& d : defs) {
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& r : report.rows)
      series[series_key(r)].emplace_back(r.eve_snr_db, r.*d.field);
    std::string path = path_prefix + "_" + d.suffix + ".svg";
    write_svg(path, d.label, series);
    out.push_back(path);
  }
  return out;
}

}  // namespace semcom
