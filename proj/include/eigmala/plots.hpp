// Static, self-contained SVG output: boxplots of ESS diagnostics grouped by
// (scheme, dimension) and log-scale eigenvector-recovery traces. Bytes are
// deterministic for identical inputs.
#pragma once

#include "eigmala/runner.hpp"

#include <string>
#include <vector>

namespace eigmala {

// Boxplot of `values[i]` grouped by `labels[i]`; groups keep first-seen order.
std::string boxplot_svg(const std::vector<std::string>& labels,
                        const std::vector<double>& values, const std::string& title,
                        const std::string& y_label);

// Recovery traces on a log10 axis; values below 1e-16 are floored there and
// a footnote marks that flooring happened.
std::string sin2_trace_svg(const std::vector<RecoveryTrace>& traces);

// Writes ess_boxplot.svg and ess_per_second_boxplot.svg (plus
// sin2_trace.svg when traces are present) into `outdir`.
void emit_plots(const std::vector<RunRecord>& records,
                const std::vector<RecoveryTrace>& traces, const std::string& outdir);

}  // namespace eigmala
