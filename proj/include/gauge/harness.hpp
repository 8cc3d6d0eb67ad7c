#pragma once

#include "gauge/apps.hpp"
#include "gauge/recover.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gauge {

struct GaussianInstance {
  DualProblem prob;
  CVec x0;
};

/// Noiseless phase-retrieval instance: x0 standard complex normal,
/// b = A(x0 x0^*), eps = 0.
GaussianInstance gen_gaussian_instance(Eigen::Index n, Eigen::Index L,
                                       std::uint64_t seed,
                                       MaskKind kind = MaskKind::gaussian);

struct CertifiedInstance {
  DualProblem prob;
  CVec x0;    // unit norm; x0 x0^* is the certified primal solution
  RVec y_opt; // certified dual solution, <b, y> - eps ||y|| = 1
};

/// Noisy instance with a known primal-dual optimal pair: octanary masks,
/// Gaussian y, x0 a unit rightmost eigenvector of A^* y, eps chosen so
/// eps = eta ||b|| with b = A(x0 x0^*) + eps y/||y||, then y rescaled to
/// activate the dual constraint. eta = 0 gives a noiseless certified
/// instance. Throws numeric_error if resampling cannot produce a positive
/// rightmost eigenvalue.
CertifiedInstance gen_certified_noisy_instance(Eigen::Index n, Eigen::Index L,
                                               double eta, std::uint64_t seed);

struct BlindDeconvInstance {
  DualProblem prob;             // Hermitian embedding, real measurements
  std::shared_ptr<const BlindDeconvMap> amap;
  std::shared_ptr<const EmbeddedMap> emap;
  RVec x1;                      // Haar coefficients of the signal
  RVec x2;                      // mask
};

/// Blind deconvolution instance: real Gaussian x1 (n1 Haar coefficients)
/// and x2 (n2 mask entries), b = B1 x1 circularly convolved with B2 x2.
BlindDeconvInstance gen_bd_instance(Eigen::Index m, Eigen::Index n1,
                                    Eigen::Index n2, std::uint64_t seed);

/// Lifted relative error ||x0 x0^* - Z Z^*||_F / ||x0||^2, computed from
/// Gram matrices of the concatenated factors (never densified).
double metric_xerr(const CVec& x0, const CMat& Zhat);

/// Relative error of xhat against x up to a complex scale:
/// min_c ||x - c xhat|| / ||x||.
double metric_scale_err(const CVec& x, const CVec& xhat);

/// Residuals of the five optimality conditions for (X = Z Z^*, y):
/// primal feasibility excess, dual feasibility deficit, residual-alignment
/// error, eigenspace complementarity error, and |trace(X) lambda_1 - 1|.
/// All five vanish exactly at an optimal pair.
Eigen::Matrix<double, 5, 1> optimality_residuals(const DualProblem& prob,
                                                 const CMat& Z, const RVec& y);

struct ProblemDescriptor {
  std::string type = "phase-retrieval";  // phase-retrieval | blind-deconv | dense
  Eigen::Index n = 32;
  Eigen::Index L = 6;
  Eigen::Index m = 64, n1 = 16, n2 = 16; // blind-deconv shape
  MaskKind mask_kind = MaskKind::gaussian;
  double eta = 0.0;
  bool certified = false;                // certified generator (even at eta = 0)
  double tol_feas = 1e-5;
  double tol_gap = 1e-5;
  int max_iter = 1000;
};

struct ExperimentConfig {
  ProblemDescriptor problem;
  int instances = 20;
  double success_threshold = 1e-2;
  std::vector<Mode> modes{Mode::gauge};
  std::uint64_t seed_base = 1;
  bool timing = false;                   // seconds column stays 0 when off

  void validate() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);

struct RunRecord {
  std::string mode;
  Eigen::Index L = 0;
  double eta = 0.0;
  Eigen::Index n = 0;
  int instance = 0;
  Status status = Status::max_iter;
  int iterations = 0;
  std::uint64_t nDFT = 0, nDWT = 0;
  double xErr = 0.0, rErr = 0.0, gap = 0.0, seconds = 0.0;
};

struct ModeAggregate {
  std::string mode;
  int runs = 0;
  int successes = 0;              // xErr <= threshold
  double median_xerr = 0.0;
  double median_rerr = 0.0;
  std::uint64_t total_ndft = 0, total_ndwt = 0;
  double median_ndft = 0.0;       // per-instance median
  double total_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<ModeAggregate> aggregates;
  std::string csv;   // per-run rows plus one aggregate row per mode
  std::string json;  // same content with named aggregate fields
};

/// Runs every instance through every mode. Deterministic for a fixed
/// config; per-instance failures are recorded, never rethrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Property and oracle suite behind the `check` subcommand. Prints one
/// line per property; returns the number of failures.
int run_check(std::ostream& out);

/// CLI entry point (subcommands solve / experiment / check).
/// Exit codes: 0 success, 1 solver or check failure, 2 bad arguments.
int run_cli(int argc, const char* const* argv);

}  // namespace gauge
