#pragma once

#include <filesystem>
#include <vector>

#include "abstain/metrics/metrics.hpp"

namespace abstain::plot {

// Static risk-vs-coverage chart; points are sorted by coverage. No styling
// knobs on purpose: reports are consumed offline.
void write_risk_coverage_svg(const std::vector<metrics::RiskCoveragePoint>& curve,
                             const std::filesystem::path& path);

}  // namespace abstain::plot
