#include "specdist/simharness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

namespace specdist {

namespace {

double pairwise(const double *v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(v, h) + pairwise(v + h, n - h);
}

bool is_known(EstimatorTag t) {
  return t == EstimatorTag::PlugInKnownC1 || t == EstimatorTag::RMTKnownC1;
}

template <typename Scalar>
void draw(const ExperimentConfig &cfg, const Eigen::MatrixXd &c2, RngStream &rng,
          bool need_full, bool need_known, SpectralModel *full, SpectralModel *known) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat x1 = sample_gaussian<Scalar>(Eigen::MatrixXd::Identity(cfg.p, cfg.p),
                                         cfg.n1, rng);
  const Mat x2 = sample_gaussian<Scalar>(c2, cfg.n2, rng);
  if (need_full) *full = sample_eigenvalues(x1, x2);
  if (need_known) {
    Mat s = Mat::Zero(cfg.p, cfg.p);
    s.template selfadjointView<Eigen::Lower>().rankUpdate(x2, 1.0 / double(cfg.n2));
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    for (auto &v : lam)
      if (v < 1e-12 * top) v = 0.0;
    *known = make_model(std::move(lam), cfg.n1, cfg.n2);
  }
}

} // namespace

RngStream trial_stream(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(trial), std::uint32_t(trial >> 32)};
  return RngStream(seq);
}

Eigen::MatrixXd toeplitz_matrix(int p, double a) {
  if (!(std::abs(a) < 1.0)) throw DomainError("Toeplitz parameter must satisfy |a| < 1");
  if (p < 1) throw DomainError("p must be positive");
  Eigen::MatrixXd t(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) t(i, j) = std::pow(a, std::abs(i - j));
  return t;
}

Eigen::VectorXd toeplitz_spectrum(int p, double a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(toeplitz_matrix(p, a),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues();
}

const char *estimator_name(EstimatorTag t) {
  switch (t) {
  case EstimatorTag::PlugIn: return "plugin";
  case EstimatorTag::RMT: return "rmt";
  case EstimatorTag::RMTExact: return "rmt-exact";
  case EstimatorTag::Contour: return "contour";
  case EstimatorTag::PlugInKnownC1: return "plugin-c1known";
  case EstimatorTag::RMTKnownC1: return "rmt-c1known";
  }
  return "?";
}

EstimatorTag parse_estimator(const std::string &name) {
  for (auto t : {EstimatorTag::PlugIn, EstimatorTag::RMT, EstimatorTag::RMTExact,
                 EstimatorTag::Contour, EstimatorTag::PlugInKnownC1,
                 EstimatorTag::RMTKnownC1})
    if (name == estimator_name(t)) return t;
  throw DomainError("unknown estimator '" + name + "'");
}

const MethodSummary &TrialSummary::method(EstimatorTag t) const {
  for (const auto &m : methods)
    if (m.tag == t) return m;
  throw DomainError(std::string("estimator not in summary: ") + estimator_name(t));
}

int worker_count(int requested) {
  int n = requested;
  if (n <= 0) {
    n = int(std::thread::hardware_concurrency());
    if (const char *env = std::getenv("SPECDIST_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n = cap;
    }
  }
  return std::max(1, n);
}

TrialSummary run_experiment(const ExperimentConfig &cfg) {
  if (cfg.p < 1 || cfg.n1 <= cfg.p) throw DomainError("n1 must exceed p");
  if (cfg.n2 < 1) throw DomainError("n2 must be positive");
  if (cfg.trials < 1) throw DomainError("trials must be positive");
  if (cfg.estimators.empty()) throw DomainError("no estimator requested");

  const Eigen::MatrixXd c2 = toeplitz_matrix(cfg.p, cfg.toeplitz_a);
  const Eigen::VectorXd spectrum = toeplitz_spectrum(cfg.p, cfg.toeplitz_a);
  const auto nm = Eigen::Index(cfg.estimators.size());

  bool need_full = false, need_known = false;
  for (auto t : cfg.estimators) (is_known(t) ? need_known : need_full) = true;

  TrialSummary out;
  out.population = population_distance(spectrum, cfg.kind, cfg.kl);
  out.trials_run = cfg.trials;
  out.values = Eigen::MatrixXd::Constant(cfg.trials, nm,
                                         std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<std::string>> errors(std::size_t(cfg.trials * nm));

  auto run_trial = [&](int trial) {
    RngStream rng = trial_stream(cfg.seed, std::uint64_t(trial));
    SpectralModel full, known;
    std::string draw_error;
    try {
      if (cfg.field == Field::Real)
        draw<double>(cfg, c2, rng, need_full, need_known, &full, &known);
      else
        draw<cplx>(cfg, c2, rng, need_full, need_known, &full, &known);
    } catch (const Error &e) {
      draw_error = std::string(e.name()) + ": " + e.what();
    }
    for (Eigen::Index m = 0; m < nm; ++m) {
      auto &err = errors[std::size_t(trial * nm + m)];
      if (!draw_error.empty()) {
        err.push_back(draw_error);
        continue;
      }
      const EstimatorTag tag = cfg.estimators[std::size_t(m)];
      DistanceOptions opts;
      opts.kl = cfg.kl;
      opts.c1_known = is_known(tag);
      opts.fisher_exact = tag == EstimatorTag::RMTExact;
      opts.method = tag == EstimatorTag::PlugIn || tag == EstimatorTag::PlugInKnownC1
                        ? DistanceMethod::PlugIn
                    : tag == EstimatorTag::Contour ? DistanceMethod::Contour
                                                   : DistanceMethod::RMT;
      try {
        const EstimateReport r = distance(is_known(tag) ? known : full, cfg.kind, opts);
        if (!r.validity) {
          err.push_back("invalid estimate");
          continue;
        }
        out.values(trial, m) = r.value;
      } catch (const Error &e) {
        err.push_back(std::string(e.name()) + ": " + e.what());
      }
    }
  };

  const int workers = std::min(worker_count(cfg.threads), cfg.trials);
  if (workers == 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int t = next++; t < cfg.trials; t = next++) run_trial(t);
      });
    for (auto &th : pool) th.join();
  }

  for (Eigen::Index m = 0; m < nm; ++m) {
    MethodSummary s;
    s.tag = cfg.estimators[std::size_t(m)];
    std::vector<double> ok, abs_rel;
    std::string first_error;
    for (int t = 0; t < cfg.trials; ++t) {
      const double v = out.values(t, m);
      if (std::isnan(v)) {
        ++s.failed;
        const auto &err = errors[std::size_t(t * nm + m)];
        if (first_error.empty() && !err.empty()) first_error = err.front();
        continue;
      }
      ok.push_back(v);
    }
    s.succeeded = int(ok.size());
    if (!ok.empty()) {
      s.mean = pairwise(ok.data(), ok.size()) / double(ok.size());
      std::vector<double> dev(ok.size());
      for (std::size_t i = 0; i < ok.size(); ++i) dev[i] = (ok[i] - s.mean) * (ok[i] - s.mean);
      s.std = ok.size() > 1 ? std::sqrt(pairwise(dev.data(), dev.size()) / double(ok.size() - 1))
                            : 0.0;
      const double denom = out.population != 0.0 ? std::abs(out.population) : 1.0;
      s.rel_error = std::abs(s.mean - out.population) / denom;
      for (std::size_t i = 0; i < ok.size(); ++i) dev[i] = std::abs(ok[i] - out.population) / denom;
      s.mean_abs_rel_error = pairwise(dev.data(), dev.size()) / double(ok.size());
    }
    if (s.failed > 0)
      s.note = std::to_string(s.failed) + " failed trials excluded (" + first_error + ")";
    out.methods.push_back(std::move(s));
  }
  return out;
}

} // namespace specdist
