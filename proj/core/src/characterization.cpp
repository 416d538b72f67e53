#include "qkdmm/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

constexpr int kPointsPerSpacing = 20;
constexpr double kTailSigmas = 8.0;
constexpr double kClipLimit = 1e-6;

void require_coverage(const ContinuousResponse& response, const FilteredGate& gate) {
  const double slack = 1e-6 * gate.spacing_s();
  if (response.first_time() > gate.gate_start_s + slack ||
      response.last_time() < gate.gate_end_s - slack) {
    throw Error(ErrorCode::CoverageError, "response tabulation does not cover the gate window");
  }
}

// Clamps the spectrum into [0, 1]; reports how far it had to move.
ComplexMatrix clip_to_unit_interval(const ComplexMatrix& e, double& clipped) {
  HermitianEigenSystem eig = hermitian_eig(e);
  clipped = 0.0;
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double value = eig.eigenvalues(i);
    const double bounded = std::clamp(value, 0.0, 1.0);
    clipped = std::max(clipped, std::abs(value - bounded));
    eig.eigenvalues(i) = bounded;
  }
  return hermitian_part(eig.reconstruct());
}

}  // namespace

double FilteredGate::pulse_sigma_s() const noexcept {
  return 1.0 / (2.0 * std::numbers::pi * bandwidth_hz * std::numbers::sqrt2);
}

ContinuousResponse::ContinuousResponse(std::vector<double> times_s, std::vector<double> values)
    : times_(std::move(times_s)), values_(std::move(values)) {
  if (times_.size() != values_.size() || times_.size() < 2) {
    throw Error(ErrorCode::DomainError, "response needs at least two (time, value) samples");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !(values_[i] >= 0.0 && values_[i] <= 1.0)) {
      throw Error(ErrorCode::DomainError,
                  "efficiency sample " + std::to_string(i) + " outside [0, 1]");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw Error(ErrorCode::DomainError, "response times must be strictly increasing");
    }
  }
}

double ContinuousResponse::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto upper = std::upper_bound(times_.begin(), times_.end(), t);
  const auto hi = static_cast<std::size_t>(upper - times_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

ContinuousResponse parse_response_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty response CSV");
  std::vector<double> times;
  std::vector<double> values;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double time_ns = 0.0;
    double efficiency = 0.0;
    if (!(fields >> time_ns >> efficiency)) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_number) + ": expected time_ns,efficiency");
    }
    times.push_back(time_ns * 1e-9);
    values.push_back(efficiency);
  }
  return ContinuousResponse(std::move(times), std::move(values));
}

ContinuousResponse read_response_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return parse_response_csv(in);
}

FilteredGate sample_grid(double bandwidth_hz, double gate_start_s, double gate_end_s) {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz) || !std::isfinite(gate_start_s) ||
      !(gate_end_s > gate_start_s)) {
    throw Error(ErrorCode::InvalidGate, "need B > 0 and gate_end > gate_start");
  }
  FilteredGate gate;
  gate.bandwidth_hz = bandwidth_hz;
  gate.gate_start_s = gate_start_s;
  gate.gate_end_s = gate_end_s;
  const double spacing = gate.spacing_s();
  const auto intervals =
      static_cast<long long>(std::floor((gate_end_s - gate_start_s) / spacing + 1e-9));
  for (long long k = 0; k <= intervals; ++k) {
    gate.sample_times_s.push_back(gate_start_s + static_cast<double>(k) * spacing);
  }
  return gate;
}

EfficiencyResponse discretize_response(const ContinuousResponse& response,
                                       const FilteredGate& gate) {
  require_coverage(response, gate);
  const Index d = gate.dim();
  const double sigma = gate.pulse_sigma_s();
  const double lo = gate.sample_times_s.front() - kTailSigmas * sigma;
  const double hi = gate.sample_times_s.back() + kTailSigmas * sigma;
  const double target_step = gate.spacing_s() / kPointsPerSpacing;
  long long intervals = static_cast<long long>(std::ceil((hi - lo) / target_step));
  if (intervals % 2 != 0) ++intervals;
  const double h = (hi - lo) / static_cast<double>(intervals);

  // overlap accumulates <g_j|g_k>, weighted accumulates <g_j|eta|g_k>.
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd pulses(d);
  for (long long i = 0; i <= intervals; ++i) {
    const double t = lo + static_cast<double>(i) * h;
    const double simpson = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (Index j = 0; j < d; ++j) {
      const double u = (t - gate.sample_times_s[static_cast<std::size_t>(j)]) / sigma;
      pulses(j) = std::exp(-0.25 * u * u);
    }
    const Eigen::MatrixXd outer = pulses * pulses.transpose();
    overlap += simpson * outer;
    weighted += simpson * response(t) * outer;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(overlap);
  if (gram.info() != Eigen::Success || gram.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorCode::NumericalFailure, "pulse overlap matrix is not positive definite");
  }
  const Eigen::MatrixXd inv_sqrt = gram.operatorInverseSqrt();
  Eigen::MatrixXd e = inv_sqrt * weighted * inv_sqrt;
  e = 0.5 * (e + e.transpose());

  double clipped = 0.0;
  const ComplexMatrix bounded = clip_to_unit_interval(e.cast<Complex>(), clipped);
  if (clipped > kClipLimit) {
    throw Error(ErrorCode::NonPhysical,
                "discretised response leaves [0, I] by " + std::to_string(clipped));
  }
  return EfficiencyResponse(bounded);
}

EfficiencyResponse diagonal_only_response(const ContinuousResponse& response,
                                          const FilteredGate& gate) {
  require_coverage(response, gate);
  RealVector diag(gate.dim());
  for (Index j = 0; j < gate.dim(); ++j) {
    diag(j) = response(gate.sample_times_s[static_cast<std::size_t>(j)]);
  }
  return EfficiencyResponse(diag.cast<Complex>().asDiagonal().toDenseMatrix());
}

}  // namespace qkdmm
