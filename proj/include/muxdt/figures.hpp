#pragma once

#include <optional>
#include <string>
#include <vector>

#include "muxdt/solve.hpp"
#include "muxdt/sweep.hpp"

namespace muxdt {

/// One emitted table of a figure command: either DTF-curve rows or
/// rate-solve rows, optionally with a quadratic fit attached.
struct FigureDataset {
  std::string name;
  std::vector<CurveRow> curve_rows;
  std::vector<RateRow> rate_rows;
  std::optional<PolyFit2> fit;  // fit of rate vs detector count, when taken
};

struct FigureData {
  std::string figure;
  std::vector<FigureDataset> datasets;
};

const std::vector<std::string>& figure_names();

/// Datasets behind the named figure with the canonical parameters baked
/// in (50 ns detectors; N = 1..12 for fig3; N = 1..5 at 82/410 MHz for
/// fig5/fig6).
FigureData build_figure(const std::string& name, Engine engine, const McParams& mc,
                        int workers);

}  // namespace muxdt
