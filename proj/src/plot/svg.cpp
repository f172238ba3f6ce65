#include "abstain/plot/svg.hpp"

#include <algorithm>
#include <cstdio>

#include "abstain/common/error.hpp"
#include "abstain/common/fs.hpp"

namespace abstain::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

double x_pix(double coverage) {
  return kMargin + coverage * (kWidth - 2.0 * kMargin);
}

double y_pix(double risk, double max_risk) {
  const double frac = max_risk > 0.0 ? risk / max_risk : 0.0;
  return kHeight - kMargin - frac * (kHeight - 2.0 * kMargin);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_risk_coverage_svg(const std::vector<metrics::RiskCoveragePoint>& curve,
                             const std::filesystem::path& path) {
  if (curve.empty()) throw ValidationError("cannot plot an empty curve");

  std::vector<metrics::RiskCoveragePoint> points = curve;
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.coverage < b.coverage; });
  double max_risk = 0.0;
  for (const auto& p : points) max_risk = std::max(max_risk, p.risk);
  if (max_risk == 0.0) max_risk = 1.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) +
         "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" +
         num(kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2.0) + "\" y=\"" + num(kHeight - 16.0) +
         "\" text-anchor=\"middle\" font-size=\"14\">coverage</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2.0) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " +
         num(kHeight / 2.0) + ")\">risk</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double f = tick / 4.0;
    svg += "<text x=\"" + num(x_pix(f)) + "\" y=\"" + num(kHeight - kMargin + 18.0) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(f) + "</text>\n";
    svg += "<text x=\"" + num(kMargin - 8.0) + "\" y=\"" +
           num(y_pix(f * max_risk, max_risk) + 4.0) +
           "\" text-anchor=\"end\" font-size=\"11\">" + num(f * max_risk) +
           "</text>\n";
  }

  std::string poly;
  for (const auto& p : points) {
    if (p.coverage == 0.0) continue;  // risk undefined with nothing answered
    poly += num(x_pix(p.coverage)) + "," + num(y_pix(p.risk, max_risk)) + " ";
  }
  svg += "<polyline points=\"" + poly +
         "\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n";
  svg += "</svg>\n";
  atomic_write_file(path, svg);
}

}  // namespace abstain::plot
