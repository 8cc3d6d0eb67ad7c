#include "gauge/harness.hpp"

#include "gauge/fft.hpp"
#include "gauge/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace gauge {

namespace {

using nlohmann::json;

EigRequest tight_eig() {
  EigRequest req;
  req.tol = 1e-12;
  return req;
}

}  // namespace

GaussianInstance gen_gaussian_instance(Eigen::Index n, Eigen::Index L,
                                       std::uint64_t seed, MaskKind kind) {
  require(n >= 1 && L >= 1, "gen_gaussian_instance: n, L must be positive");
  auto map = pr_make_operator(PhaseRetrievalSpec::make(n, L, kind, seed));
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  GaussianInstance inst;
  inst.x0 = rng.cnormal_vec(n);
  inst.prob.map = map;
  inst.prob.b = map->forward_factored(inst.x0);
  inst.prob.eps = 0.0;
  return inst;
}

CertifiedInstance gen_certified_noisy_instance(Eigen::Index n, Eigen::Index L,
                                               double eta, std::uint64_t seed) {
  require(eta >= 0.0 && eta < 1.0, "gen_certified_noisy_instance: requires 0 <= eta < 1");
  auto map = pr_make_operator(PhaseRetrievalSpec::make(n, L, MaskKind::octanary, seed));
  Rng rng(seed ^ 0xd1b54a32d192ed03ull);

  constexpr int kMaxResample = 50;
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    RVec y = rng.normal_vec(map->m());
    auto apply = [&](const CVec& v) { return map->adjoint_apply(y, v); };
    const EigResult eig = rightmost_eigpairs(apply, n, tight_eig());
    if (!eig.top_converged() || eig.values[0] <= 1e-8) continue;

    CertifiedInstance inst;
    inst.x0 = eig.vectors.col(0);
    const RVec a = map->forward_factored(inst.x0);
    const RVec u = y / y.norm();

    // eps = eta ||a + eps u|| reduces to the quadratic
    // (1 - eta^2) eps^2 - 2 eta^2 <a,u> eps - eta^2 ||a||^2 = 0; the
    // positive root exists for every eta < 1.
    const double au = a.dot(u);
    const double e2 = eta * eta;
    const double eps =
        (e2 * au + std::sqrt(e2 * e2 * au * au + (1.0 - e2) * e2 * a.squaredNorm())) /
        (1.0 - e2);

    inst.prob.map = map;
    inst.prob.b = a + eps * u;
    inst.prob.eps = eps;

    // <b, y> - eps ||y|| collapses to <a, y> = lambda_1 > 0; dividing y by
    // it activates the dual constraint and makes trace * lambda_1 = 1.
    const double scale = a.dot(y);
    if (scale <= 1e-10) continue;
    inst.y_opt = y / scale;
    inst.prob.validate();
    return inst;
  }
  throw numeric_error("gen_certified_noisy_instance: resample limit exceeded");
}

BlindDeconvInstance gen_bd_instance(Eigen::Index m, Eigen::Index n1,
                                    Eigen::Index n2, std::uint64_t seed) {
  BlindDeconvInstance inst;
  inst.amap = bd_make_operator({m, n1, n2, seed});
  inst.emap = embed_asymmetric(inst.amap, /*real_measurements=*/true);
  Rng rng(seed ^ 0xa0761d6478bd642full);
  inst.x1 = rng.normal_vec(n1);
  inst.x2 = rng.normal_vec(n2);
  const CVec w =
      inst.amap->forward_factored(inst.x1.cast<Complex>(), inst.x2.cast<Complex>());
  inst.prob.map = inst.emap;
  inst.prob.b = w.real();  // real measurements: the convolution of real signals
  inst.prob.eps = 0.0;
  return inst;
}

double metric_xerr(const CVec& x0, const CMat& Zhat) {
  require(x0.size() == Zhat.rows(), "metric_xerr: shape mismatch");
  // ||x0 x0^* - Z Z^*||_F^2 = ||x0||^4 + ||Z^* Z||_F^2 - 2 ||Z^* x0||^2.
  const double nx2 = x0.squaredNorm();
  const CMat gram = Zhat.adjoint() * Zhat;
  const double err2 =
      nx2 * nx2 + gram.squaredNorm() - 2.0 * (Zhat.adjoint() * x0).squaredNorm();
  return std::sqrt(std::max(0.0, err2)) / nx2;
}

double metric_scale_err(const CVec& x, const CVec& xhat) {
  require(x.size() == xhat.size(), "metric_scale_err: shape mismatch");
  const double nx2 = x.squaredNorm(), nh2 = xhat.squaredNorm();
  if (nh2 == 0.0) return 1.0;
  const double err2 = nx2 - std::norm(xhat.dot(x)) / nh2;
  return std::sqrt(std::max(0.0, err2) / nx2);
}

Eigen::Matrix<double, 5, 1> optimality_residuals(const DualProblem& prob,
                                                 const CMat& Z, const RVec& y) {
  prob.validate();
  const RVec a = prob.map->forward_factored(Z);
  const RVec r = prob.b - a;
  const double ny = y.norm();
  const double trace = Z.squaredNorm();

  EigRequest req = tight_eig();
  const DualObjective obj = dual_objective(prob, y, req);

  Eigen::Matrix<double, 5, 1> out;
  out[0] = std::max(0.0, r.norm() - prob.eps);                       // primal feasible
  out[1] = std::max(0.0, 1.0 - dual_constraint_value(prob.b, prob.eps, y));
  out[2] = std::abs(y.dot(r) - prob.eps * ny);                       // aligned residual
  out[3] = std::abs(a.dot(y) - obj.f * trace);                       // complementarity
  out[4] = std::abs(trace * obj.f - 1.0);                            // gauge product
  return out;
}

void ExperimentConfig::validate() const {
  require(instances >= 1, "ExperimentConfig: instances must be >= 1");
  require(success_threshold > 0.0, "ExperimentConfig: threshold must be positive");
  require(!modes.empty(), "ExperimentConfig: at least one mode");
  const std::string& t = problem.type;
  require(t == "phase-retrieval" || t == "blind-deconv" || t == "dense",
          "ExperimentConfig: unknown problem type");
}

namespace {

Mode mode_from_string(const std::string& s) {
  if (s == "gauge") return Mode::gauge;
  if (s == "gauge-feas") return Mode::gauge_feas;
  if (s == "gauge-nodfp") return Mode::gauge_nodfp;
  throw contract_error("unknown mode: " + s);
}

MaskKind mask_from_string(const std::string& s) {
  if (s == "gaussian") return MaskKind::gaussian;
  if (s == "octanary") return MaskKind::octanary;
  throw contract_error("unknown mask kind: " + s);
}

ProblemDescriptor descriptor_from_json(const json& j) {
  ProblemDescriptor d;
  d.type = j.value("type", d.type);
  d.n = j.value("n", d.n);
  d.L = j.value("L", d.L);
  d.m = j.value("m", d.m);
  d.n1 = j.value("n1", d.n1);
  d.n2 = j.value("n2", d.n2);
  if (j.contains("mask_kind")) d.mask_kind = mask_from_string(j.at("mask_kind"));
  d.eta = j.value("eta", d.eta);
  d.certified = j.value("certified", d.certified);
  d.tol_feas = j.value("tol_feas", d.tol_feas);
  d.tol_gap = j.value("tol_gap", d.tol_gap);
  d.max_iter = j.value("max_iter", d.max_iter);
  return d;
}

std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_seconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct InstanceData {
  DualProblem prob;
  CVec x0;                                       // empty for blind deconv
  std::shared_ptr<const EmbeddedMap> emap;       // blind deconv only
  RVec x1;
};

InstanceData make_instance(const ProblemDescriptor& d, std::uint64_t seed) {
  InstanceData data;
  if (d.type == "phase-retrieval") {
    if (d.certified || d.eta > 0.0) {
      CertifiedInstance inst = gen_certified_noisy_instance(d.n, d.L, d.eta, seed);
      data.prob = inst.prob;
      data.x0 = inst.x0;
    } else {
      GaussianInstance inst = gen_gaussian_instance(d.n, d.L, seed, d.mask_kind);
      data.prob = inst.prob;
      data.x0 = inst.x0;
    }
  } else if (d.type == "blind-deconv") {
    BlindDeconvInstance inst = gen_bd_instance(d.m, d.n1, d.n2, seed);
    data.prob = inst.prob;
    data.emap = inst.emap;
    data.x1 = inst.x1;
  } else {
    auto map = DenseHermitianMap::random(d.n, 3 * d.n, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    data.x0 = rng.cnormal_vec(d.n).normalized();
    data.prob.map = map;
    data.prob.b = map->forward_factored(data.x0);
    data.prob.eps = 0.0;
  }
  return data;
}

RunRecord solve_one(const ProblemDescriptor& d, Mode mode, int instance,
                    std::uint64_t seed, bool timing, std::ostream* log) {
  RunRecord rec;
  rec.mode = to_string(mode);
  rec.L = d.type == "blind-deconv" ? 0 : d.L;
  rec.eta = d.eta;
  rec.n = d.type == "blind-deconv" ? d.n1 + d.n2 : d.n;
  rec.instance = instance;
  try {
    const InstanceData data = make_instance(d, seed);

    SolveOpts opts;
    opts.mode = mode;
    opts.max_iter = d.max_iter;
    opts.tol_feas = d.tol_feas;
    opts.tol_gap = d.tol_gap;
    opts.log = log;

    const OpCounts before = data.prob.map->counter().snapshot();
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult res = solve_gauge(data.prob, opts);
    const auto t1 = std::chrono::steady_clock::now();
    const OpCounts used = data.prob.map->counter().snapshot() - before;

    rec.status = res.status;
    rec.iterations = res.iterations;
    rec.nDFT = used.dft;
    rec.nDWT = used.dwt;
    rec.rErr = res.residual / data.prob.b.norm();
    rec.gap = res.gap;
    if (timing)
      rec.seconds = std::chrono::duration<double>(t1 - t0).count();

    if (data.emap) {
      // Rank-one readout of the off-diagonal block against the true x1.
      const CMat X12 = data.emap->extract_offdiag(res.factor.Z);
      Eigen::JacobiSVD<CMat> svd(X12, Eigen::ComputeThinU);
      rec.xErr = metric_scale_err(data.x1.cast<Complex>(), svd.matrixU().col(0));
    } else {
      rec.xErr = metric_xerr(data.x0, res.factor.Z);
    }
  } catch (const std::exception&) {
    rec.status = Status::max_iter;
    rec.xErr = rec.rErr = rec.gap = std::numeric_limits<double>::infinity();
  }
  return rec;
}

void append_csv_row(std::string& csv, const RunRecord& r, bool timing) {
  csv += r.mode;
  csv += ',' + std::to_string(r.L) + ',' + fmt_g(r.eta) + ',' + std::to_string(r.n);
  csv += ',' + std::to_string(r.instance) + ',' + std::string(to_string(r.status));
  csv += ',' + std::to_string(r.iterations);
  csv += ',' + std::to_string(r.nDFT) + ',' + std::to_string(r.nDWT);
  csv += ',' + fmt_g(r.xErr) + ',' + fmt_g(r.rErr) + ',' + fmt_g(r.gap);
  csv += ',' + (timing ? fmt_seconds(r.seconds) : std::string("0.000"));
  csv += '\n';
}

json record_to_json(const RunRecord& r) {
  return json{{"mode", r.mode},       {"L", r.L},
              {"eta", r.eta},         {"n", r.n},
              {"instance", r.instance}, {"status", to_string(r.status)},
              {"iterations", r.iterations}, {"nDFT", r.nDFT},
              {"nDWT", r.nDWT},       {"xErr", r.xErr},
              {"rErr", r.rErr},       {"gap", r.gap},
              {"seconds", r.seconds}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.csv = "mode,L,eta,n,instance,status,iterations,nDFT,nDWT,xErr,rErr,gap,seconds\n";

  for (Mode mode : cfg.modes) {
    std::vector<RunRecord> rows;
    for (int i = 0; i < cfg.instances; ++i)
      rows.push_back(solve_one(cfg.problem, mode, i, cfg.seed_base + i, cfg.timing,
                               nullptr));

    ModeAggregate agg;
    agg.mode = to_string(mode);
    agg.runs = static_cast<int>(rows.size());
    std::vector<double> xerrs, rerrs, ndfts;
    for (const RunRecord& r : rows) {
      if (r.xErr <= cfg.success_threshold) ++agg.successes;
      xerrs.push_back(r.xErr);
      rerrs.push_back(r.rErr);
      ndfts.push_back(static_cast<double>(r.nDFT));
      agg.total_ndft += r.nDFT;
      agg.total_ndwt += r.nDWT;
      agg.total_seconds += r.seconds;
      append_csv_row(out.csv, r, cfg.timing);
      out.runs.push_back(r);
    }
    agg.median_xerr = median(xerrs);
    agg.median_rerr = median(rerrs);
    agg.median_ndft = median(ndfts);
    out.aggregates.push_back(agg);

    // Aggregate row reuses the run columns: instance -1, iterations carries
    // the success count, xErr/rErr the medians, gap the success fraction.
    RunRecord arow;
    arow.mode = agg.mode;
    arow.L = cfg.problem.type == "blind-deconv" ? 0 : cfg.problem.L;
    arow.eta = cfg.problem.eta;
    arow.n = rows.empty() ? cfg.problem.n : rows.front().n;
    arow.instance = -1;
    arow.iterations = agg.successes;
    arow.nDFT = agg.total_ndft;
    arow.nDWT = agg.total_ndwt;
    arow.xErr = agg.median_xerr;
    arow.rErr = agg.median_rerr;
    arow.gap = static_cast<double>(agg.successes) / std::max(1, agg.runs);
    arow.seconds = agg.total_seconds;
    out.csv += agg.mode;
    out.csv += ',' + std::to_string(arow.L) + ',' + fmt_g(arow.eta) + ',' +
               std::to_string(arow.n) + ",-1,aggregate," +
               std::to_string(arow.iterations) + ',' + std::to_string(arow.nDFT) +
               ',' + std::to_string(arow.nDWT) + ',' + fmt_g(arow.xErr) + ',' +
               fmt_g(arow.rErr) + ',' + fmt_g(arow.gap) + ',' +
               (cfg.timing ? fmt_seconds(arow.seconds) : std::string("0.000")) + '\n';
  }

  json j;
  j["runs"] = json::array();
  for (const RunRecord& r : out.runs) j["runs"].push_back(record_to_json(r));
  j["aggregates"] = json::array();
  for (const ModeAggregate& a : out.aggregates)
    j["aggregates"].push_back(json{{"mode", a.mode},
                                   {"runs", a.runs},
                                   {"successes", a.successes},
                                   {"success_rate",
                                    static_cast<double>(a.successes) /
                                        std::max(1, a.runs)},
                                   {"median_xerr", a.median_xerr},
                                   {"median_rerr", a.median_rerr},
                                   {"total_ndft", a.total_ndft},
                                   {"total_ndwt", a.total_ndwt},
                                   {"median_ndft", a.median_ndft},
                                   {"total_seconds", a.total_seconds}});
  out.json = j.dump(2);
  out.json += '\n';
  return out;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("problem")) cfg.problem = descriptor_from_json(j.at("problem"));
  cfg.instances = j.value("instances", cfg.instances);
  cfg.success_threshold = j.value("success_threshold", cfg.success_threshold);
  if (j.contains("modes")) {
    cfg.modes.clear();
    for (const auto& s : j.at("modes")) cfg.modes.push_back(mode_from_string(s));
  }
  cfg.seed_base = j.value("seed_base", cfg.seed_base);
  cfg.timing = j.value("timing", cfg.timing);
  cfg.validate();
  return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config_from_json_file: cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

// ---------------------------------------------------------------------------
// Property suite (`check` subcommand).

namespace {

using CheckFn = std::function<bool(std::ostream&)>;

bool report(std::ostream& out, const std::string& name, double worst, double tol) {
  const bool pass = worst <= tol && std::isfinite(worst);
  out << (pass ? "[PASS] " : "[FAIL] ") << name << "  (worst " << fmt_g(worst)
      << ", tol " << fmt_g(tol) << ")\n";
  return pass;
}

double hermitian_adjoint_err(const MeasurementMap& map, Rng& rng) {
  const CMat Z = rng.cnormal_mat(map.n(), 2);
  const RVec y = rng.normal_vec(map.m());
  const double lhs = y.dot(map.forward_factored(Z));
  double rhs = 0.0;
  for (Eigen::Index j = 0; j < Z.cols(); ++j)
    rhs += Z.col(j).dot(map.adjoint_apply(y, Z.col(j))).real();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

double asymmetric_adjoint_err(const AsymmetricMap& map, Rng& rng) {
  const CMat Z1 = rng.cnormal_mat(map.n1(), 2);
  const CMat Z2 = rng.cnormal_mat(map.n2(), 2);
  const CVec y = rng.cnormal_vec(map.m());
  // <A(Z1 Z2^*), y> = <Z1, (A^* y) Z2> and the mirrored identity for the
  // conjugate action.
  Complex lhs = map.forward_factored(Z1, Z2).dot(y);
  Complex rhs = 0.0, rhs_h = 0.0;
  for (Eigen::Index j = 0; j < Z1.cols(); ++j) {
    rhs += Z1.col(j).dot(map.adjoint_apply(y, Z2.col(j)));
    rhs_h += map.adjoint_apply_h(y, Z1.col(j)).dot(Z2.col(j));
  }
  const double scale = std::max(1.0, std::abs(lhs));
  return std::max(std::abs(lhs - rhs), std::abs(lhs - rhs_h)) / scale;
}

CMat densify_adjoint(const MeasurementMap& map, const RVec& y) {
  const Eigen::Index n = map.n();
  CMat M(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    M.col(j) = map.adjoint_apply(y, CVec::Unit(n, j));
  return M;
}

bool check_adjoints(std::ostream& out) {
  Rng rng(11);
  double worst = 0.0;
  worst = std::max(worst, hermitian_adjoint_err(
      *pr_make_operator(PhaseRetrievalSpec::make(16, 3, MaskKind::gaussian, 1)), rng));
  worst = std::max(worst, hermitian_adjoint_err(
      *pr_make_operator(PhaseRetrievalSpec::make(16, 4, MaskKind::octanary, 2)), rng));
  worst = std::max(worst, hermitian_adjoint_err(*DenseHermitianMap::random(8, 20, 3), rng));
  worst = std::max(worst, hermitian_adjoint_err(*DenseHermitianMap::diag_extraction(8), rng));
  const auto asym = DenseAsymmetricMap::random(4, 6, 10, 4);
  worst = std::max(worst, asymmetric_adjoint_err(*asym, rng));
  worst = std::max(worst, hermitian_adjoint_err(*embed_asymmetric(asym, false), rng));
  worst = std::max(worst, hermitian_adjoint_err(*embed_asymmetric(asym, true), rng));
  const auto bd = bd_make_operator({16, 8, 4, 5});
  worst = std::max(worst, asymmetric_adjoint_err(*bd, rng));
  worst = std::max(worst, hermitian_adjoint_err(*embed_asymmetric(bd, true), rng));
  return report(out, "adjoint consistency on all shipped operators", worst, 1e-10);
}

bool check_refine_gradient(std::ostream& out) {
  Rng rng(21);
  const auto map = DenseHermitianMap::random(6, 12, 21);
  const RVec b_eps = rng.normal_vec(12);
  const CMat Z = rng.cnormal_mat(6, 2);

  auto h = [&](const CMat& W) {
    return 0.25 * (map->forward_factored(W) - b_eps).squaredNorm();
  };
  const RVec r = map->forward_factored(Z) - b_eps;
  CMat grad(6, 2);
  for (Eigen::Index j = 0; j < 2; ++j) grad.col(j) = map->adjoint_apply(r, Z.col(j));

  double worst = 0.0;
  const double t = 1e-5;
  for (int trial = 0; trial < 8; ++trial) {
    const CMat E = rng.cnormal_mat(6, 2);
    const double fd = (h(Z + t * E) - h(Z - t * E)) / (2.0 * t);
    const double an = (grad.array().conjugate() * E.array()).sum().real();
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  return report(out, "refinement gradient vs central differences", worst, 1e-6);
}

bool check_projection(std::ostream& out) {
  double worst = 0.0;

  RVec b(2);
  b << 1.0, 0.0;
  const RVec p = project_feasible(b, 0.5, RVec::Zero(2));
  worst = std::max(worst, std::abs(p[0] - 2.0) + std::abs(p[1]));

  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 3 + static_cast<Eigen::Index>(rng.bits() % 6);
    const RVec bb = rng.normal_vec(m) * (0.5 + 2.0 * rng.uniform());
    const double eps = (trial % 2) ? 0.0 : 0.3 * bb.norm() * rng.uniform();
    const RVec y = rng.normal_vec(m) * 3.0;
    const RVec py = project_feasible(bb, eps, y);
    worst = std::max(worst, std::max(0.0, 1.0 - dual_constraint_value(bb, eps, py)));
    const RVec ppy = project_feasible(bb, eps, py);
    worst = std::max(worst, (ppy - py).norm() / std::max(1.0, py.norm()));
  }
  return report(out, "projection idempotence, feasibility, analytic case", worst, 1e-8);
}

bool check_subgradient(std::ostream& out) {
  Rng rng(41);
  const auto map = DenseHermitianMap::random(8, 14, 41);
  DualProblem prob{map, rng.normal_vec(14).cwiseAbs() + RVec::Ones(14), 0.0};

  auto lam1 = [&](const RVec& y) {
    Eigen::SelfAdjointEigenSolver<CMat> es(densify_adjoint(*map, y));
    return es.eigenvalues().maxCoeff();
  };

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RVec y = rng.normal_vec(14);
    const RVec yp = rng.normal_vec(14);
    const DualObjective obj = dual_objective(prob, y, tight_eig());
    const RVec g = subgradient(prob, obj.eig);
    // Convexity: f(y') >= f(y) + <g, y' - y>.
    worst = std::max(worst, obj.f + g.dot(yp - y) - lam1(yp));
  }
  return report(out, "subgradient inequality on 100 random pairs", worst, 1e-8);
}

bool check_lanczos(std::ostream& out) {
  Rng rng(51);
  double worst = 0.0;
  for (Eigen::Index n : {13, 32, 64}) {
    CMat M = rng.cnormal_mat(n, n);
    M = ((M + M.adjoint()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(M);
    EigRequest req;
    req.tol = 1e-10;
    const EigResult got =
        rightmost_eigpairs([&](const CVec& v) { return CVec(M * v); }, n, req);
    for (int i = 0; i < 2; ++i)
      worst = std::max(worst,
                       std::abs(got.values[i] - es.eigenvalues()[n - 1 - i]) /
                           std::max(1.0, std::abs(es.eigenvalues()[n - 1])));
  }
  return report(out, "Lanczos vs dense eigendecomposition (n <= 64)", worst, 1e-8);
}

bool check_recover_rank1(std::ostream& out) {
  Rng rng(61);
  const auto map = DenseHermitianMap::random(8, 18, 61);
  DualProblem prob{map, rng.normal_vec(18).cwiseAbs() + RVec::Ones(18), 0.0};
  const RVec y = project_feasible(prob.b, 0.0, rng.normal_vec(18));
  const DualObjective obj = dual_objective(prob, y, tight_eig());

  const RecoveryResult rec = recover_S(prob, obj.eig, y);

  // Independent oracle: the one-dimensional nonnegative least squares along
  // a = A(u1 u1^*) built from the dense coefficients.
  const CVec u1 = obj.eig.vectors.col(0);
  RVec a(18);
  for (Eigen::Index k = 0; k < 18; ++k)
    a[k] = (u1.adjoint() * map->coefficient(k) * u1).value().real();
  const double s = std::max(0.0, a.dot(prob.b) / a.squaredNorm());

  double worst = std::abs(rec.s_scalar - s);
  worst = std::max(worst, std::abs(rec.residual - (s * a - prob.b).norm()));
  return report(out, "rank-1 recovery vs PSD least-squares oracle", worst, 1e-8);
}

bool check_weighted(std::ostream& out) {
  Rng rng(71);
  double worst = 0.0;

  // lambda_1(A^* y, C) against the dense symmetric reduction.
  const auto map = DenseHermitianMap::random(6, 10, 71);
  DualProblem prob{map, RVec::Ones(10), 0.0};
  const RVec y = project_feasible(prob.b, 0.0, rng.normal_vec(10));
  CMat C = rng.cnormal_mat(6, 6);
  C = (C * C.adjoint() + 0.5 * CMat::Identity(6, 6)).eval();
  const DualObjective wobj = weighted_trace_dual(prob, C, y, tight_eig());
  Eigen::SelfAdjointEigenSolver<CMat> ces(C);
  const CMat chalf_inv = ces.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<CMat> wes(chalf_inv * densify_adjoint(*map, y) *
                                          chalf_inv);
  worst = std::max(worst, std::abs(wobj.f - wes.eigenvalues().maxCoeff()));

  // sigma_1(C1^{-1} (A^* y) C2^{-*}) against a dense SVD.
  const auto asym = DenseAsymmetricMap::random(3, 4, 9, 72);
  const CVec ya = rng.cnormal_vec(9);
  CMat C1 = rng.cnormal_mat(3, 3) + 3.0 * CMat::Identity(3, 3);
  CMat C2 = rng.cnormal_mat(4, 4) + 3.0 * CMat::Identity(4, 4);
  CMat N(3, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    N.col(j) = asym->adjoint_apply(ya, CVec::Unit(4, j));
  const CMat weighted = C1.inverse() * N * C2.adjoint().inverse();
  const double sigma = weighted.jacobiSvd().singularValues()[0];
  const WeightedNuclearResult wnd = weighted_nuclear_dual(*asym, C1, C2, ya, tight_eig());
  worst = std::max(worst, std::abs(wnd.value - sigma));

  // Implicit reweight factor against the dense inverse.
  const CMat Zhat = rng.cnormal_mat(8, 2);
  const double delta = 0.37;
  const WeightedSpec spec = reweight(Zhat, delta);
  const CMat dense_c =
      (delta * CMat::Identity(8, 8) + Zhat * Zhat.adjoint()).inverse();
  for (int trial = 0; trial < 5; ++trial) {
    const CVec v = rng.cnormal_vec(8);
    worst = std::max(worst, (spec.apply_c(v) - dense_c * v).norm());
    // R^{-1} action squares back to C^{-1}.
    const CVec rr = spec.factor.apply_rinv(spec.factor.apply_rinv_h(v));
    worst = std::max(worst,
                     (rr - (delta * v + Zhat * (Zhat.adjoint() * v))).norm() /
                         std::max(1.0, v.norm()));
  }
  return report(out, "weighted dual identities vs dense oracles", worst, 1e-10);
}

bool check_certified(std::ostream& out) {
  double worst = 0.0;
  for (double eta : {0.0, 0.001, 0.01}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const CertifiedInstance inst = gen_certified_noisy_instance(24, 6, eta, seed);
      const auto res = optimality_residuals(inst.prob, inst.x0, inst.y_opt);
      worst = std::max(worst, res.maxCoeff());
    }
  }
  return report(out, "certified instances satisfy all optimality conditions", worst,
                1e-8);
}

bool check_infeasibility(std::ostream& out) {
  // diag(X) = -1 is infeasible over X >= 0; the scaled y = -1/n certifies it.
  const Eigen::Index n = 6;
  DualProblem prob{DenseHermitianMap::diag_extraction(n), -RVec::Ones(n), 0.0};
  const RVec y = -RVec::Ones(n) / static_cast<double>(n);
  const DualObjective obj = dual_objective(prob, y, tight_eig());
  const bool direct = infeasibility_certificate(prob, y, obj.f);

  SolveOpts opts;
  opts.max_iter = 50;
  const SolveResult res = solve_gauge(prob, opts);
  const bool solved = res.status == Status::infeasible;

  const double worst = (direct && solved) ? 0.0 : 1.0;
  return report(out, "infeasibility certificate fires on the constructed instance",
                worst, 0.5);
}

}  // namespace

int run_check(std::ostream& out) {
  const std::vector<CheckFn> checks = {
      check_adjoints,   check_refine_gradient, check_projection,
      check_subgradient, check_lanczos,        check_recover_rank1,
      check_weighted,   check_certified,       check_infeasibility};
  int failures = 0;
  for (const CheckFn& fn : checks) {
    bool ok = false;
    try {
      ok = fn(out);
    } catch (const std::exception& e) {
      out << "[FAIL] check threw: " << e.what() << "\n";
    }
    if (!ok) ++failures;
  }
  out << (failures == 0 ? "all checks passed" : "checks failed") << " ("
      << checks.size() - static_cast<std::size_t>(failures) << "/" << checks.size()
      << ")\n";
  return failures;
}

// ---------------------------------------------------------------------------
// CLI.

namespace {

int cmd_solve(const ProblemDescriptor& d, const std::string& mode_str,
              std::uint64_t seed, const std::string& out_path,
              const std::string& jsonl_path) {
  const Mode mode = mode_from_string(mode_str);

  std::ofstream jsonl;
  std::ostream* log = nullptr;
  if (!jsonl_path.empty()) {
    jsonl.open(jsonl_path);
    require(jsonl.good(), "cannot open --log-jsonl path");
    log = &jsonl;
  }

  const InstanceData data = make_instance(d, seed);
  SolveOpts opts;
  opts.mode = mode;
  opts.max_iter = d.max_iter;
  opts.tol_feas = d.tol_feas;
  opts.tol_gap = d.tol_gap;
  opts.log = log;

  const OpCounts before = data.prob.map->counter().snapshot();
  const SolveResult res = solve_gauge(data.prob, opts);
  const OpCounts used = data.prob.map->counter().snapshot() - before;

  json j{{"status", to_string(res.status)},
         {"mode", mode_str},
         {"iterations", res.iterations},
         {"lambda1", res.f},
         {"gap", res.gap},
         {"residual", res.residual},
         {"trace", res.factor.trace()},
         {"nDFT", used.dft},
         {"nDWT", used.dwt}};
  if (data.x0.size() > 0) j["xErr"] = metric_xerr(data.x0, res.factor.Z);

  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path);
    require(f.good(), "cannot open --out path");
    f << text;
  }
  return (res.status == Status::optimal || res.status == Status::feasible) ? 0 : 1;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path) {
  ExperimentConfig cfg = config_from_json_file(config_path);
  const ExperimentResult result = run_experiment(cfg);
  if (out_path.empty()) {
    std::cout << result.csv;
  } else {
    std::ofstream f(out_path);
    require(f.good(), "cannot open --out path");
    f << result.csv;
    std::ofstream fj(out_path + ".json");
    require(fj.good(), "cannot open JSON output path");
    fj << result.json;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"matrix-free gauge-dual solver for low-rank spectral optimization"};
  app.require_subcommand(1);

  ProblemDescriptor d;
  std::string mode_str = "gauge";
  std::uint64_t seed = 1;
  std::string out_path, jsonl_path, config_path;

  CLI::App* solve = app.add_subcommand("solve", "solve one seeded instance");
  solve->add_option("--type", d.type, "phase-retrieval | blind-deconv | dense");
  solve->add_option("--mode", mode_str, "gauge | gauge-feas | gauge-nodfp")
      ->check(CLI::IsMember({"gauge", "gauge-feas", "gauge-nodfp"}));
  solve->add_option("--n", d.n, "signal length");
  solve->add_option("--L", d.L, "mask count");
  solve->add_option("--m", d.m, "blind-deconv measurement length");
  solve->add_option("--n1", d.n1, "blind-deconv coefficient count");
  solve->add_option("--n2", d.n2, "blind-deconv mask support");
  solve->add_option("--eta", d.eta, "noise level (certified generator when > 0)");
  solve->add_flag("--certified", d.certified, "use the certified generator at eta 0");
  solve->add_option("--seed", seed, "instance seed");
  solve->add_option("--tol-feas", d.tol_feas, "primal feasibility tolerance");
  solve->add_option("--tol-gap", d.tol_gap, "duality gap tolerance");
  solve->add_option("--max-iter", d.max_iter, "iteration cap");
  solve->add_option("--out", out_path, "write the JSON result here");
  solve->add_option("--log-jsonl", jsonl_path, "per-iteration JSON-lines log");

  CLI::App* exp = app.add_subcommand("experiment", "run a config sweep");
  exp->add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  exp->add_option("--out", out_path, "CSV output path (JSON written alongside)");

  CLI::App* chk = app.add_subcommand("check", "run the property/oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(d, mode_str, seed, out_path, jsonl_path);
    if (exp->parsed()) return cmd_experiment(config_path, out_path);
    if (chk->parsed()) return run_check(std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gauge
