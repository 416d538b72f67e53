#include "qkdmm/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "parallel.hpp"
#include "qkdmm/errors.hpp"
#include "qkdmm/keyrate.hpp"
#include "qkdmm/virtual_filter.hpp"

namespace qkdmm {
namespace {

constexpr double kRowSlack = 1e-4;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void solve_row(SweepRow& row, const DetectorPair& pair, const VirtualFilter& filter,
               const SweepOptions& options) {
  SolverConfig config = options.solver;
  config.threads = 1;
  const ObservedRates observed{row.e_obs, row.e_obs};
  try {
    row.p_succ_opt = minimize_filtering_probability(pair, filter, observed, config).value;
    row.e_p_opt = maximize_virtual_phase_error(pair, filter, observed, config).value;
  } catch (const Error& e) {
    row.p_succ_opt = row.e_p_opt = row.rate_opt = kNaN;
    row.status = std::string(to_string(e.code()));
    return;
  }
  row.rate_opt = noisy_rate(row.p_succ_opt, row.e_p_opt, row.e_obs).rate_raw;
  const bool consistent = row.p_succ_opt >= row.p_succ_bound - kRowSlack &&
                          row.e_p_opt <= row.e_p_bound + kRowSlack &&
                          row.rate_opt >= row.rate_bound - kRowSlack;
  row.status = consistent ? "ok" : "check_failed";
}

}  // namespace

std::vector<SweepRow> run_sweep(const DetectorPair& pair, const SweepOptions& options) {
  if (!(options.e_max >= 0.0 && options.e_max <= 0.25)) {
    throw Error(ErrorCode::DomainError, "e_max must lie in [0, 0.25]");
  }
  if (options.steps < 2) throw Error(ErrorCode::DomainError, "steps must be at least 2");

  const MismatchSpectrum spectrum = mismatch_spectrum(pair);
  const VirtualFilter filter = compute_virtual_filter(spectrum, pair);
  const SuboptimalBounds bounds = suboptimal_bounds(spectrum);

  std::vector<SweepRow> rows(static_cast<std::size_t>(options.steps));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    SweepRow& row = rows[k];
    row.e_obs = options.e_max * static_cast<double>(k) / static_cast<double>(options.steps - 1);
    row.p_succ_bound = bounds.p_succ_lower;
    row.e_p_bound = bounds.ep_ratio_upper * row.e_obs;
    row.rate_bound = noisy_rate(row.p_succ_bound, row.e_p_bound, row.e_obs).rate_raw;
    row.rate_4phase = four_phase_rate(row.e_obs, row.e_obs).rate_raw;
    if (options.bounds_only) {
      row.p_succ_opt = row.e_p_opt = row.rate_opt = kNaN;
      row.status = "bounds_only";
    }
  }
  if (!options.bounds_only) {
    detail::parallel_for(rows.size(), options.threads,
                         [&](std::size_t k) { solve_row(rows[k], pair, filter, options); });
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "e_obs,p_succ_bound,p_succ_opt,e_p_bound,e_p_opt,rate_bound,rate_opt,rate_4phase,status\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const SweepRow& r : rows) {
    out << r.e_obs << ',' << r.p_succ_bound << ',' << r.p_succ_opt << ',' << r.e_p_bound << ','
        << r.e_p_opt << ',' << r.rate_bound << ',' << r.rate_opt << ',' << r.rate_4phase << ','
        << r.status << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace qkdmm
