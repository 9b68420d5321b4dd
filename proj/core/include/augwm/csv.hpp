#pragma once

#include "augwm/context_adapter.hpp"
#include "augwm/eval.hpp"
#include "augwm/trainer.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace augwm {

/// Shortest decimal that reads back to the same double; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_double(double x);

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& rows);
/// mass_scale,damping_scale,seed,mean_return
void write_grid_csv(std::ostream& out, const EvalGridResult& r);

struct SummaryRow {
  std::string config_name;
  double mean = 0.0;
  double std = 0.0;
  /// Empty for the baseline row itself.
  std::optional<double> p_vs_baseline;
};
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// One row per step: t, mode, reward, r2, then context and oracle context components.
void write_step_log_csv(std::ostream& out, const AdaptResult& r);
/// Step log plus rolling reward and cumulative return.
void write_switch_csv(std::ostream& out, const SwitchTrace& trace);

/// Writes `body` through a temporary and renames it into place.
void write_file(const std::filesystem::path& path, const std::string& body);

}  // namespace augwm
