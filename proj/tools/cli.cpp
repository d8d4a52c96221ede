#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specdist/distances.hpp"
#include "specdist/simharness.hpp"
#include "verify_suites.hpp"

namespace specdist::cli {

using json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view s, double &out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Accepts "x", "a+bi", "a-bi", "bi", "i", "-i".
bool parse_field(std::string_view s, cplx &out, bool &is_complex) {
  s = trim(s);
  is_complex = false;
  if (s.empty()) return false;
  if (s.back() != 'i') {
    double re;
    if (!parse_real(s, re)) return false;
    out = re;
    return true;
  }
  is_complex = true;
  std::string_view body = s.substr(0, s.size() - 1);
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  auto imag_of = [](std::string_view t, double &v) {
    t = trim(t);
    if (t.empty() || t == "+") return v = 1.0, true;
    if (t == "-") return v = -1.0, true;
    return parse_real(t, v);
  };
  double re = 0.0, im = 0.0;
  if (split == std::string_view::npos) {
    if (!imag_of(body, im)) return false;
  } else {
    if (!parse_real(body.substr(0, split), re) || !imag_of(body.substr(split), im))
      return false;
  }
  out = {re, im};
  return true;
}

json report_json(const EstimateReport &r) {
  json j;
  j["value"] = r.value;
  j["method"] = method_name(r.method);
  j["kappa0"] = r.kappa0 ? json(*r.kappa0) : json(nullptr);
  j["warnings"] = r.warnings;
  j["validity"] = r.validity;
  return j;
}

json manifest(const std::string &command, const json &config, double seconds,
              const std::vector<std::string> &outputs, bool timing) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["library_version"] = kLibraryVersion;
  m["duration_seconds"] = timing ? json(seconds) : json(nullptr);
  m["outputs"] = outputs;
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit(const json &doc, const std::string &path, std::ostream &out) {
  const std::string text = doc.dump(2) + "\n";
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.emplace_back(trim(item));
  return out;
}

DistanceKind distance_kind(const std::string &name, double alpha) {
  DistanceKind k;
  if (name == "fisher") k.type = DistanceType::FisherSq;
  else if (name == "bhattacharyya") k.type = DistanceType::Bhattacharyya;
  else if (name == "kl") k.type = DistanceType::KL;
  else if (name == "renyi") k = DistanceKind::renyi(alpha);
  else throw InputError("unknown distance '" + name + "'");
  return k;
}

KLConvention kl_convention(const std::string &s) {
  return s == "standard" ? KLConvention::Standard : KLConvention::Paper;
}

const std::vector<std::string> kDistances{"fisher", "bhattacharyya", "kl", "renyi"};
const std::vector<std::string> kConventions{"paper", "standard"};

// ---- estimate ----

struct EstimateArgs {
  std::string x1, x2, distance = "fisher", method = "rmt", kl = "paper", output = "-";
  double alpha = 0.5;
  bool c1_known = false, exact = false, timing = true;
};

int cmd_estimate(const EstimateArgs &a, std::ostream &out) {
  const auto t0 = std::chrono::steady_clock::now();
  json config;
  config["x1"] = a.x1;
  config["x2"] = a.x2;
  config["distance"] = a.distance;
  config["alpha"] = a.alpha;
  config["method"] = a.method;
  config["c1_known"] = a.c1_known;
  config["exact"] = a.exact;
  config["kl_convention"] = a.kl;
  std::vector<std::string> outputs{a.output};

  json doc;
  doc["schema_version"] = kSchemaVersion;
  int code = kExitOk;
  try {
    const SampleMatrix s1 = read_samples(a.x1);
    const SampleMatrix s2 = read_samples(a.x2);
    const SpectralModel model = std::visit(
        [](const auto &m1, const auto &m2) { return sample_eigenvalues(m1, m2); }, s1, s2);
    DistanceOptions opts;
    opts.method = a.method == "plugin"    ? DistanceMethod::PlugIn
                  : a.method == "contour" ? DistanceMethod::Contour
                                          : DistanceMethod::RMT;
    opts.c1_known = a.c1_known;
    opts.fisher_exact = a.exact;
    opts.kl = kl_convention(a.kl);
    const DistanceKind kind = distance_kind(a.distance, a.alpha);
    const EstimateReport r = distance(model, kind, opts);
    json result;
    result["distance"] = a.distance;
    result["p"] = model.p();
    result["n1"] = model.n1;
    result["n2"] = model.n2;
    result.update(report_json(r));
    doc["result"] = result;
  } catch (const InputError &) {
    throw;
  } catch (const Error &e) {
    doc["error"] = std::string(e.name()) + ": " + e.what();
    code = kExitDomain;
  }
  doc["manifest"] = manifest("estimate", config, seconds_since(t0), outputs, a.timing);
  emit(doc, a.output, out);
  return code;
}

// ---- simulate ----

struct SimulateArgs {
  std::string p_list = "2,32", field = "real", distance = "fisher", estimators = "plugin,rmt";
  std::string kl = "paper", out_dir = ".";
  std::int64_t n1 = 1024, n2 = 2048;
  double c1 = 0.0, c2 = 0.0, toeplitz_a = 0.3, alpha = 0.5;
  int trials = 100, threads = 0;
  std::uint64_t seed = 0;
  bool timing = true;
};

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> ps;
  for (const auto &s : split_list(a.p_list)) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
      throw InputError("bad --p-list entry '" + s + "'");
    ps.push_back(v);
  }
  std::vector<EstimatorTag> tags;
  for (const auto &s : split_list(a.estimators)) {
    try {
      tags.push_back(parse_estimator(s));
    } catch (const Error &) {
      throw InputError("unknown estimator '" + s + "'");
    }
  }
  if (ps.empty() || tags.empty()) throw InputError("empty --p-list or --estimators");
  const bool ratios = a.c1 > 0.0 || a.c2 > 0.0;
  if (ratios && !(a.c1 > 0.0 && a.c2 > 0.0))
    throw InputError("--c1 and --c2 must be given together");
  DistanceKind kind;
  try {
    kind = distance_kind(a.distance, a.alpha);
  } catch (const Error &e) {
    throw InputError(e.what());
  }

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  const std::string csv_path = (std::filesystem::path(a.out_dir) / "results.csv").string();
  const std::string man_path = (std::filesystem::path(a.out_dir) / "manifest.json").string();
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw InputError("cannot write " + csv_path);
  csv << "p,n1,n2,method,mean,std,rel_error,population,trials,note\n";

  for (int p : ps) {
    ExperimentConfig cfg;
    cfg.p = p;
    cfg.n1 = ratios ? std::llround(p / a.c1) : a.n1;
    cfg.n2 = ratios ? std::llround(p / a.c2) : a.n2;
    cfg.toeplitz_a = a.toeplitz_a;
    cfg.field = a.field == "complex" ? Field::Complex : Field::Real;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.estimators = tags;
    cfg.kind = kind;
    cfg.kl = kl_convention(a.kl);
    cfg.threads = a.threads;
    const std::string head = std::to_string(p) + "," + std::to_string(cfg.n1) + "," +
                             std::to_string(cfg.n2) + ",";
    try {
      const TrialSummary sum = run_experiment(cfg);
      for (const auto &m : sum.methods) {
        const bool any = m.succeeded > 0;
        csv << head << estimator_name(m.tag) << ","
            << (any ? format_double(m.mean) : "") << ","
            << (any ? format_double(m.std) : "") << ","
            << (any ? format_double(m.rel_error) : "") << ","
            << format_double(sum.population) << "," << m.succeeded << ","
            << csv_field(m.note) << "\n";
      }
    } catch (const Error &e) {
      for (auto t : tags)
        csv << head << estimator_name(t) << ",,,,,0,"
            << csv_field(std::string(e.name()) + ": " + e.what()) << "\n";
    }
  }
  csv.close();

  json config;
  config["p_list"] = ps;
  if (ratios) {
    config["c1"] = a.c1;
    config["c2"] = a.c2;
  } else {
    config["n1"] = a.n1;
    config["n2"] = a.n2;
  }
  config["toeplitz_a"] = a.toeplitz_a;
  config["field"] = a.field;
  config["trials"] = a.trials;
  config["seed"] = a.seed;
  config["distance"] = a.distance;
  config["alpha"] = a.alpha;
  config["estimators"] = split_list(a.estimators);
  config["kl_convention"] = a.kl;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["manifest"] =
      manifest("simulate", config, seconds_since(t0), {csv_path, man_path}, a.timing);
  emit(doc, man_path, out);
  out << csv_path << "\n";
  return kExitOk;
}

// ---- verify ----

struct VerifyArgs {
  std::string suite = "all", output;
  int models = 0;
  std::uint64_t seed = 1;
  bool timing = true;
};

int cmd_verify(const VerifyArgs &a, std::ostream &out) {
  const auto t0 = std::chrono::steady_clock::now();
  verify::SuiteOptions opt;
  opt.models = a.models;
  opt.seed = a.seed;
  const auto checks = verify::run_suite(a.suite, opt);
  const bool ok = verify::all_passed(checks);

  out << std::left << std::setw(6) << "status" << "  " << std::setw(9) << "suite"
      << "  " << std::setw(40) << "check" << "  " << std::setw(8) << "cases"
      << "  worst / tolerance\n";
  json arr = json::array();
  for (const auto &c : checks) {
    out << std::setw(6) << (c.passed ? "PASS" : "FAIL") << "  " << std::setw(9) << c.suite
        << "  " << std::setw(40) << c.name << "  " << std::setw(8) << c.cases << "  "
        << std::setprecision(3) << c.worst << " / " << c.tolerance;
    if (!c.passed) out << "  [" << c.detail << "]";
    out << "\n";
    json j;
    j["suite"] = c.suite;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["cases"] = c.cases;
    j["worst"] = c.worst;
    j["tolerance"] = c.tolerance;
    if (!c.passed) j["detail"] = c.detail;
    arr.push_back(j);
  }
  out << (ok ? "all checks passed" : "verification FAILED") << "\n";

  if (!a.output.empty()) {
    json config;
    config["suite"] = a.suite;
    config["models"] = a.models;
    config["seed"] = a.seed;
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["passed"] = ok;
    doc["checks"] = arr;
    doc["manifest"] = manifest("verify", config, seconds_since(t0), {a.output}, a.timing);
    emit(doc, a.output, out);
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

} // namespace

SampleMatrix parse_samples(std::istream &in, const std::string &label) {
  std::vector<std::vector<cplx>> rows;
  bool any_complex = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<cplx> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      cplx v;
      bool is_c = false;
      if (!parse_field(field, v, is_c))
        throw InputError(label + ":" + std::to_string(lineno) + ": cannot parse '" +
                         std::string(trim(field)) + "'");
      any_complex = any_complex || is_c;
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(label + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(label + ": no observations");
  const Eigen::Index n = Eigen::Index(rows.size()), p = Eigen::Index(rows.front().size());
  Eigen::MatrixXcd m(p, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) m(i, j) = rows[std::size_t(j)][std::size_t(i)];
  if (any_complex) return m;
  return Eigen::MatrixXd(m.real());
}

SampleMatrix read_samples(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  return parse_samples(f, path);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Covariance distance estimation from two sample sets"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto *e = app.add_subcommand("estimate", "Estimate a distance between two sample covariances");
  e->add_option("--x1", est.x1, "CSV of samples from the first population")->required();
  e->add_option("--x2", est.x2, "CSV of samples from the second population")->required();
  e->add_option("--distance", est.distance)->check(CLI::IsMember(kDistances));
  e->add_option("--alpha", est.alpha, "Renyi order in (0,1)");
  e->add_option("--method", est.method)->check(CLI::IsMember({"rmt", "plugin", "contour"}));
  e->add_flag("--c1-known", est.c1_known, "Treat the first covariance as known");
  e->add_flag("--exact", est.exact, "Exact dilogarithm form for the Fisher distance");
  e->add_option("--kl-convention", est.kl)->check(CLI::IsMember(kConventions));
  e->add_option("--output", est.output, "Output path or -");
  e->add_flag("!--no-timing", est.timing, "Omit wall-clock time from the manifest");

  SimulateArgs sim;
  auto *s = app.add_subcommand("simulate", "Monte Carlo sweep with C1 = I, C2 = Toeplitz(a)");
  s->add_option("--p-list", sim.p_list, "Comma-separated dimensions");
  s->add_option("--n1", sim.n1);
  s->add_option("--n2", sim.n2);
  s->add_option("--c1", sim.c1, "Fixed p/n1 ratio");
  s->add_option("--c2", sim.c2, "Fixed p/n2 ratio");
  s->add_option("--toeplitz-a", sim.toeplitz_a);
  s->add_option("--field", sim.field)->check(CLI::IsMember({"real", "complex"}));
  s->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed);
  s->add_option("--distance", sim.distance)->check(CLI::IsMember(kDistances));
  s->add_option("--alpha", sim.alpha);
  s->add_option("--estimators", sim.estimators,
                "plugin,rmt,rmt-exact,contour,plugin-c1known,rmt-c1known");
  s->add_option("--kl-convention", sim.kl)->check(CLI::IsMember(kConventions));
  s->add_option("--threads", sim.threads);
  s->add_option("--out-dir", sim.out_dir);
  s->add_flag("!--no-timing", sim.timing);

  VerifyArgs ver;
  auto *v = app.add_subcommand("verify", "Run the invariant suites");
  v->add_option("--suite", ver.suite)
      ->check(CLI::IsMember({"all", "spectral", "dilog", "oracle", "limits"}));
  v->add_option("--models", ver.models, "Models (or points) per suite");
  v->add_option("--seed", ver.seed);
  v->add_option("--json", ver.output, "Write the JSON report to a path or -");
  v->add_flag("!--no-timing", ver.timing);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError &pe) {
    if (pe.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
      return kExitOk;
    }
    err << pe.what() << "\n";
    return kExitInput;
  }
  try {
    if (*e) return cmd_estimate(est, out);
    if (*s) return cmd_simulate(sim, out);
    return cmd_verify(ver, out);
  } catch (const InputError &ie) {
    err << "input error: " << ie.what() << "\n";
    return kExitInput;
  } catch (const Error &de) {
    err << de.name() << ": " << de.what() << "\n";
    return kExitDomain;
  }
}

} // namespace specdist::cli
