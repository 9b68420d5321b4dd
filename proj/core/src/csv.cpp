#include "augwm/csv.hpp"

#include "augwm/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace augwm {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& rows) {
  out << "epoch,mean_model_return,critic_loss,actor_loss,buffer_size,nonfinite\n";
  for (const auto& m : rows)
    out << m.epoch << ',' << format_double(m.mean_model_return) << ',' << format_double(m.critic_loss) << ','
        << format_double(m.actor_loss) << ',' << m.buffer_size << ',' << m.nonfinite << '\n';
}

void write_grid_csv(std::ostream& out, const EvalGridResult& r) {
  r.validate();
  out << "mass_scale,damping_scale,seed,mean_return\n";
  for (std::size_t i = 0; i < r.mass.size(); ++i)
    for (std::size_t j = 0; j < r.damping.size(); ++j)
      for (std::size_t k = 0; k < r.seeds.size(); ++k)
        out << format_double(r.mass[i]) << ',' << format_double(r.damping[j]) << ',' << r.seeds[k] << ','
            << format_double(r.at(i, j, k)) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "config_name,mean,std,p_vs_baseline\n";
  for (const auto& r : rows) {
    out << r.config_name << ',' << format_double(r.mean) << ',' << format_double(r.std) << ',';
    if (r.p_vs_baseline) out << format_double(*r.p_vs_baseline);
    out << '\n';
  }
}

namespace {

void step_header(std::ostream& out, std::size_t dim) {
  out << "t,mode,reward,r2";
  for (std::size_t i = 0; i < dim; ++i) out << ",context_" << i;
  for (std::size_t i = 0; i < dim; ++i) out << ",oracle_" << i;
}

void step_fields(std::ostream& out, ContextMode mode, const AdaptStep& s) {
  out << s.t << ',' << to_string(mode) << ',' << format_double(s.reward) << ',' << format_double(s.r2);
  for (Eigen::Index i = 0; i < s.context.size(); ++i) out << ',' << format_double(s.context[i]);
  for (Eigen::Index i = 0; i < s.oracle_context.size(); ++i) out << ',' << format_double(s.oracle_context[i]);
}

std::size_t log_dim(const AdaptResult& r) {
  return r.log.empty() ? 0 : static_cast<std::size_t>(r.log.front().context.size());
}

}  // namespace

void write_step_log_csv(std::ostream& out, const AdaptResult& r) {
  step_header(out, log_dim(r));
  out << '\n';
  for (const auto& s : r.log) {
    step_fields(out, r.mode, s);
    out << '\n';
  }
}

void write_switch_csv(std::ostream& out, const SwitchTrace& trace) {
  step_header(out, log_dim(trace.rollout));
  out << ",rolling_reward,cumulative_return\n";
  for (std::size_t i = 0; i < trace.rollout.log.size(); ++i) {
    step_fields(out, trace.rollout.mode, trace.rollout.log[i]);
    out << ',' << format_double(trace.rolling_reward[i]) << ',' << format_double(trace.cumulative_return[i]) << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << body;
    if (!out) throw IoError(path.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path.string(), "rename failed: " + ec.message());
}

}  // namespace augwm
