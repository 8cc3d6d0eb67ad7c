#include "gauge/harness.hpp"
#include "gauge/rng.hpp"

#include "doctest.h"

#include <sstream>

using namespace gauge;

TEST_CASE("lifted error metric") {
  Rng rng(1);
  const CVec x = rng.cnormal_vec(8);
  CHECK(metric_xerr(x, x) <= 1e-12);
  // Invariance under a global phase of the factor.
  CHECK(metric_xerr(x, CMat(x * std::polar(1.0, 1.2))) <= 1e-7);
  // Orthogonal unit vectors: ||e1 e1^* - e2 e2^*||_F = sqrt(2).
  const CVec e1 = CVec::Unit(8, 0);
  CHECK(metric_xerr(e1, CMat(CVec::Unit(8, 1))) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("scale-invariant vector error") {
  Rng rng(2);
  const CVec x = rng.cnormal_vec(6);
  // The metric is a sqrt of a cancellation, so accuracy is ~sqrt(eps).
  CHECK(metric_scale_err(x, CVec(x * Complex(0.3, -2.0))) <= 1e-7);
  CVec orth = rng.cnormal_vec(6);
  orth -= x * (x.dot(orth) / x.squaredNorm());
  CHECK(metric_scale_err(x, orth) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("certified instances satisfy the optimality conditions") {
  for (double eta : {0.0, 0.01}) {
    auto inst = gen_certified_noisy_instance(24, 6, eta, 5);
    const auto conds =
        optimality_residuals(inst.prob, CMat(inst.x0), inst.y_opt);
    CHECK(conds.maxCoeff() <= 1e-8);
    CHECK(inst.prob.eps == doctest::Approx(eta * inst.prob.b.norm()).epsilon(1e-10));
  }
}

TEST_CASE("config parsing") {
  const auto cfg = config_from_json_text(R"({
    "problem": {"type": "phase-retrieval", "n": 24, "L": 9, "eta": 0.01,
                "certified": true, "mask_kind": "octanary", "max_iter": 50},
    "instances": 4, "success_threshold": 0.05,
    "modes": ["gauge", "gauge-nodfp"], "seed_base": 7, "timing": false
  })");
  CHECK(cfg.problem.n == 24);
  CHECK(cfg.problem.L == 9);
  CHECK(cfg.problem.eta == 0.01);
  CHECK(cfg.problem.certified);
  CHECK(cfg.problem.mask_kind == MaskKind::octanary);
  CHECK(cfg.instances == 4);
  CHECK(cfg.modes.size() == 2);
  CHECK(cfg.seed_base == 7);
  CHECK_THROWS(config_from_json_text(R"({"modes": ["bogus"]})"));
}

TEST_CASE("experiment bookkeeping and determinism") {
  ExperimentConfig cfg;
  cfg.problem.type = "phase-retrieval";
  cfg.problem.n = 16;
  cfg.problem.L = 6;
  cfg.problem.certified = true;
  cfg.problem.max_iter = 60;
  cfg.instances = 2;
  cfg.modes = {Mode::gauge, Mode::gauge_nodfp};
  cfg.seed_base = 3;

  const auto a = run_experiment(cfg);
  CHECK(a.runs.size() == 4);
  CHECK(a.aggregates.size() == 2);

  // Header plus one row per run plus one aggregate row per mode.
  std::istringstream csv(a.csv);
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + 4 + 2);
  CHECK(a.csv.rfind("mode,L,eta,n,instance,status,iterations,nDFT,nDWT,"
                    "xErr,rErr,gap,seconds\n", 0) == 0);

  // Bit-identical on a rerun.
  const auto b = run_experiment(cfg);
  CHECK(a.csv == b.csv);
  CHECK(a.json == b.json);
}

TEST_CASE("noiseless certified experiment succeeds at small size") {
  ExperimentConfig cfg;
  cfg.problem.n = 24;
  cfg.problem.L = 9;
  cfg.problem.certified = true;
  cfg.problem.max_iter = 300;
  cfg.instances = 3;
  cfg.modes = {Mode::gauge};
  cfg.seed_base = 1;
  const auto res = run_experiment(cfg);
  REQUIRE(res.aggregates.size() == 1);
  CHECK(res.aggregates[0].successes == 3);
  CHECK(res.aggregates[0].median_xerr <= 1e-3);
}
