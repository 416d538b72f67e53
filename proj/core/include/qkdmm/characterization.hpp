#pragma once

// Finite-dimensional efficiency matrices from time-dependent detector
// responses. A Gaussian band-limiting filter of bandwidth B in front of the
// detector means every input is a train of Gaussian pulses on a grid spaced
// 1/(2B); the detector is then characterised on the pulses inside the gate.
//
// Model: the detector acts as multiplication by eta(t) on the pulse envelope.
// The matrix is that operator expressed in the symmetrically orthonormalised
// pulse basis, so a flat response eta gives exactly eta * I.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "qkdmm/detector_model.hpp"

namespace qkdmm {

struct FilteredGate {
  double bandwidth_hz = 0.0;
  double gate_start_s = 0.0;
  double gate_end_s = 0.0;
  std::vector<double> sample_times_s;

  Index dim() const noexcept { return static_cast<Index>(sample_times_s.size()); }
  double spacing_s() const noexcept { return 1.0 / (2.0 * bandwidth_hz); }
  /// Pulse standard deviation 1 / (2 pi B sqrt 2).
  double pulse_sigma_s() const noexcept;
};

/// Tabulated efficiency eta(t) in [0, 1], linearly interpolated and held
/// constant beyond the first and last samples.
class ContinuousResponse {
 public:
  /// Throws DomainError unless times are strictly increasing (at least two
  /// samples) and every value lies in [0, 1].
  ContinuousResponse(std::vector<double> times_s, std::vector<double> values);

  double operator()(double t_s) const;
  double first_time() const noexcept { return times_.front(); }
  double last_time() const noexcept { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// CSV with header line and columns time_ns, efficiency. Throws ParseError.
ContinuousResponse parse_response_csv(std::istream& in);
ContinuousResponse read_response_csv(const std::filesystem::path& path);

/// Throws InvalidGate unless B > 0 and gate_end > gate_start.
FilteredGate sample_grid(double bandwidth_hz, double gate_start_s, double gate_end_s);

/// Full matrix, entries from Gaussian-windowed overlaps integrated with
/// composite Simpson at 20 points per grid spacing. Throws CoverageError when
/// the tabulation does not span the gate, NonPhysical when the result needs
/// more than 1e-6 of clipping to satisfy 0 <= E <= I.
EfficiencyResponse discretize_response(const ContinuousResponse& response,
                                       const FilteredGate& gate);

/// diag(eta(t_1), ..., eta(t_d)): the response sampled at the grid points with
/// no cross-time correlations.
EfficiencyResponse diagonal_only_response(const ContinuousResponse& response,
                                          const FilteredGate& gate);

}  // namespace qkdmm
