#include "expmix/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "expmix/applications.hpp"
#include "expmix/cone.hpp"
#include "expmix/dynamics.hpp"
#include "expmix/suspension.hpp"
#include "expmix/transfer.hpp"
#include "expmix/uni.hpp"
#include "json.hpp"

namespace expmix::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  auto b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& raw) {
  std::string s = trim(raw);
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    double num = std::stod(s.substr(0, slash));
    double den = std::stod(s.substr(slash + 1));
    return num / den;
  }
  return std::stod(s);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section = "run";
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed config line: " + line);
    cfg.set(section + "." + trim(line.substr(0, eq)),
            trim(line.substr(eq + 1)));
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_str(const std::string& key,
                            const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return parse_number(it->second);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + it->second);
  }
}

int Config::get_int(const std::string& key, int def) const {
  return static_cast<int>(get_double(key, def));
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  return std::stoull(it->second);
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(parse_number(tok));
  }
  if (out.empty())
    throw ConfigError("empty list for " + key);
  return out;
}

namespace {

struct RunContext {
  Config cfg;
  ModelConfig model;
  int N;
  int M;
  std::size_t samples;
  std::uint64_t seed;
  int workers;
  std::filesystem::path out;
};

RunContext make_context(Config cfg) {
  std::string model_name = cfg.get_str("run.model", "doubling-quadratic");
  ModelConfig model = model_zoo(model_name);
  int N = cfg.get_int("run.grid_n", 1024);
  if (N < 8) throw ConfigError("run.grid_n must be >= 8");
  std::size_t samples =
      static_cast<std::size_t>(cfg.get_double("run.samples", 100000));
  int workers = cfg.get_int("run.workers", 0);
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  RunContext ctx{std::move(cfg),
                 std::move(model),
                 N,
                 0,
                 samples,
                 0,
                 workers,
                 {}};
  ctx.M = ctx.cfg.get_int("run.truncation_m", 64);
  ctx.seed = ctx.cfg.get_u64("run.seed", 42);
  ctx.out = ctx.cfg.get_str("run.out", "out");
  std::filesystem::create_directories(ctx.out);
  return ctx;
}

json config_echo(const RunContext& ctx) {
  json j;
  j["schema_version"] = 1;
  j["seed"] = ctx.seed;
  json c;
  for (const auto& [k, v] : ctx.cfg.items()) c[k] = v;
  j["config"] = c;
  return j;
}

std::string csv_header(const RunContext& ctx, const std::string& columns) {
  std::string head;
  head += "# schema_version=1\n";
  head += "# seed=" + std::to_string(ctx.seed) + "\n";
  for (const auto& [k, v] : ctx.cfg.items())
    head += "# " + k + "=" + v + "\n";
  head += columns + "\n";
  return head;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct LedgerBundle {
  SpectralData spectral0;
  std::optional<UNIWitness> witness;
  LyReport ly;
  std::optional<ConstantsLedger> ledger;
};

LedgerBundle build_ledger_bundle(const RunContext& ctx) {
  LedgerBundle b{leading_spectrum(ctx.model.map, ctx.model.roof, 0.0, ctx.N),
                 {},
                 {},
                 {}};
  int n_min = ctx.cfg.get_int("uni.n_min", 1);
  int n_max = ctx.cfg.get_int("uni.n_max", 1);
  std::vector<int> n_range;
  for (int n = n_min; n <= n_max; ++n) n_range.push_back(n);
  b.witness = uni_scan(ctx.model.map, ctx.model.roof, n_range,
                       ctx.cfg.get_int("uni.grid", 4096),
                       ctx.cfg.get_double("uni.floor", 1e-8), ctx.M,
                       ctx.workers);
  std::vector<Complex> s_list = {{0.0, 1.0}, {0.0, 10.0}, {0.0, 100.0}};
  std::vector<int> nl = {1, 2, 3, 4, 5, 6, 7, 8};
  double rho = std::pow(ctx.model.map.rho0(), ctx.model.map.alpha());
  b.ly = ly_report(ctx.model.map, ctx.model.roof, s_list, nl,
                   ly_sample_suite(ctx.N, ctx.model.map.alpha(), ctx.seed),
                   rho, ctx.workers);
  if (b.witness)
    b.ledger = build_ledger(ctx.model.map, ctx.model.roof, b.spectral0,
                            b.witness, b.ly.C3);
  return b;
}

Observable default_observable() {
  return Observable{
      [](double y, double) { return std::cos(6.283185307179586 * y); },
      nullptr, nullptr, 6.283185307179586};
}

// ----- subcommands ---------------------------------------------------

int cmd_check(const RunContext& ctx) {
  ExpandingMap map = ctx.model.map;
  if (ctx.cfg.has("check.declared_C1") || ctx.cfg.has("check.declared_rho0"))
    map = map.with_declared(
        ctx.cfg.get_double("check.declared_C1", map.C1()),
        ctx.cfg.get_double("check.declared_rho0", map.rho0()));
  ConditionReport rep =
      verify_conditions(map, ctx.model.roof,
                        ctx.cfg.get_int("check.samples_per_cell", 64), ctx.M);
  json j = config_echo(ctx);
  j["cond_i"] = rep.cond_i;
  j["cond_ii"] = rep.cond_ii;
  j["cond_iii"] = rep.cond_iii;
  j["cond_iv"] = rep.cond_iv;
  j["distortion"] = rep.distortion;
  j["measured_C1"] = rep.measured_C1;
  j["measured_rho0"] = rep.measured_rho0;
  j["measured_distortion"] = rep.measured_distortion;
  j["moment_sum"] = rep.moment_sum;
  j["moment_tail"] = rep.moment_tail;
  j["exp_moment_mu"] = rep.exp_moment_mu;
  json wit = json::array();
  for (const auto& w : rep.witnesses)
    wit.push_back({{"condition", w.condition},
                   {"location", w.location},
                   {"measured", w.measured},
                   {"allowed", w.allowed}});
  j["witnesses"] = wit;
  j["pass"] = rep.all_pass();
  write_file(ctx.out / "check.json", j.dump(2) + "\n");
  return rep.all_pass() ? 0 : 1;
}

int cmd_uni(const RunContext& ctx) {
  LedgerBundle b = build_ledger_bundle(ctx);
  json j = config_echo(ctx);
  j["C3_measured"] = b.ly.C3;
  if (!b.witness) {
    j["witness"] = nullptr;
    write_file(ctx.out / "uni.json", j.dump(2) + "\n");
    return 0;
  }
  json w;
  w["n0"] = b.witness->n0;
  w["word1"] = b.witness->word1.indices();
  w["word2"] = b.witness->word2.indices();
  w["D"] = b.witness->D;
  w["argmin_y"] = b.witness->argmin_y;
  j["witness"] = w;
  j["ledger"] = json::parse(b.ledger->to_json_string());
  AdmissibilityReport adm = n0_admissible(*b.ledger, b.witness->n0);
  json a;
  a["n0"] = adm.n0;
  a["cancel_scale_ok"] = adm.cancel_scale_ok;
  a["cone_scale_ok"] = adm.cone_scale_ok;
  a["seminorm_scale_ok"] = adm.seminorm_scale_ok;
  a["c4_dominates"] = adm.c4_dominates;
  a["smallest_admissible"] = adm.smallest_admissible;
  j["admissibility"] = a;
  write_file(ctx.out / "uni.json", j.dump(2) + "\n");
  return 0;
}

int cmd_spectrum(const RunContext& ctx) {
  auto sigmas = ctx.cfg.get_list("spectrum.sigmas", {-0.05, 0.0, 0.05});
  std::string csv = csv_header(ctx, "sigma,lambda,residual,f_min,f_max");
  json j = config_echo(ctx);
  json rows = json::array();
  for (double s : sigmas) {
    SpectralData sd = leading_spectrum(ctx.model.map, ctx.model.roof, s,
                                       ctx.N);
    csv += fmt(s) + "," + fmt(sd.lambda) + "," + fmt(sd.residual) + "," +
           fmt(sd.f.min_real()) + "," + fmt(sd.f.max_real()) + "\n";
    rows.push_back({{"sigma", s},
                    {"lambda", sd.lambda},
                    {"residual", sd.residual}});
  }
  j["spectra"] = rows;
  write_file(ctx.out / "spectrum.csv", csv);
  write_file(ctx.out / "spectrum.json", j.dump(2) + "\n");
  return 0;
}

int cmd_dolgopyat(const RunContext& ctx) {
  LedgerBundle b = build_ledger_bundle(ctx);
  if (!b.ledger) throw NoUNIWitness("dolgopyat probe needs a UNI witness");
  auto b_list = ctx.cfg.get_list("dolgopyat.b_list", {40.0, 100.0});
  DolgopyatResult res = dolgopyat_probe(
      ctx.model.map, ctx.model.roof, *b.ledger, b_list,
      ctx.cfg.get_int("dolgopyat.samples", 2), ctx.seed, ctx.N,
      ctx.cfg.get_int("dolgopyat.max_blocks", 400), ctx.workers);
  std::string csv = csv_header(ctx, "b,n,norm_b,ratio");
  for (const auto& c : res.curves)
    for (std::size_t i = 0; i < c.n.size(); ++i)
      csv += fmt(c.b) + "," + std::to_string(c.n[i]) + "," +
             fmt(c.norm_b[i]) + "," + fmt(c.ratio[i]) + "\n";
  write_file(ctx.out / "dolgopyat.csv", csv);
  json j = config_echo(ctx);
  json rows = json::array();
  for (const auto& c : res.curves)
    rows.push_back({{"b", c.b},
                    {"gamma_fit", c.gamma_fit},
                    {"fit_start", c.fit_start},
                    {"in_theorem_range", c.in_theorem_range}});
  j["curves"] = rows;
  j["gamma"] = res.gamma;
  bool ok = !ctx.model.uni_expected || res.gamma < 1.0;
  j["pass"] = ok;
  write_file(ctx.out / "dolgopyat.json", j.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_cone(const RunContext& ctx) {
  LedgerBundle b = build_ledger_bundle(ctx);
  if (!b.ledger) throw NoUNIWitness("cone diagnostics need a UNI witness");
  auto b_list = ctx.cfg.get_list("cone.b_list", {50.0, 100.0});
  int m_steps = ctx.cfg.get_int("cone.m", 10);
  int pairs = ctx.cfg.get_int("cone.pairs", 3);
  double sigma = ctx.cfg.get_double("cone.sigma", 0.0);
  SpectralData sd = sigma == 0.0
                        ? b.spectral0
                        : leading_spectrum(ctx.model.map, ctx.model.roof,
                                           sigma, ctx.N);

  std::string csv = csv_header(
      ctx, "b,pair,m,r_m,margin_dominated,margin_log_u,margin_v_reg,"
           "cancellation_margin");
  json j = config_echo(ctx);
  json runs = json::array();
  bool ok = true;
  for (double bb : b_list) {
    for (int p = 0; p < pairs; ++p) {
      ConePair pair = sample_cone(bb, *b.ledger, ctx.seed + p, ctx.N);
      // normalized start (1, v/|v|_inf)
      ConePair start;
      start.b = bb;
      start.C4 = b.ledger->C4;
      start.u = GridFunction(ctx.N, ctx.model.map.alpha(), 1.0);
      start.v = pair.v;
      start.v *= Complex(1.0 / pair.v.sup_norm(), 0.0);
      ChiFunction chi =
          build_chi(bb, start, *b.ledger, *b.witness, sd, ctx.workers);
      if (p == 0)
        write_file(ctx.out / ("chi_b" + std::to_string(int(bb)) + ".json"),
                   chi.to_json_string() + "\n");
      ConeIterateResult it =
          cone_iterate(Complex(sigma, bb), start, m_steps, *b.ledger,
                       *b.witness, sd, ctx.workers);
      for (const auto& st : it.steps) {
        csv += fmt(bb) + "," + std::to_string(p) + "," +
               std::to_string(st.m) + "," + fmt(st.r) + "," +
               fmt(st.membership.margin_dominated) + "," +
               fmt(st.membership.margin_log_u) + "," +
               fmt(st.membership.margin_v_reg) + "," +
               fmt(st.cancellation_margin) + "\n";
        if (ctx.model.uni_expected && st.r >= 1.0) ok = false;
      }
      runs.push_back({{"b", bb},
                      {"pair", p},
                      {"beta_hat", it.beta_hat},
                      {"chi_slope_bound", chi.slope_bound()},
                      {"chi_intervals", chi.intervals().size()}});
    }
  }
  j["runs"] = runs;
  j["pass"] = ok;
  write_file(ctx.out / "cone.csv", csv);
  write_file(ctx.out / "cone.json", j.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_correlate(const RunContext& ctx) {
  SpectralData sd = leading_spectrum(ctx.model.map, ctx.model.roof, 0.0,
                                     ctx.N);
  GridFunction Rg = GridFunction::from_fn(
      ctx.N, ctx.model.map.alpha(),
      [&](double y) { return Complex(ctx.model.roof.R(y), 0.0); });
  double Rbar = mu_integral(Rg, sd.f).real();
  auto t_grid = default_t_grid(Rbar);

  Observable v = default_observable();
  Observable w = default_observable();

  auto samples = sample_muR(ctx.model.map, ctx.model.roof, sd.f, ctx.samples,
                            ctx.seed);
  CorrelationCurve direct = correlation_direct(
      ctx.model.map, ctx.model.roof, v, w, t_grid, samples, ctx.workers);
  CorrelationCurve series = correlation_series_curve(
      ctx.model.map, ctx.model.roof, sd.f, v, w, t_grid,
      ctx.cfg.get_int("correlate.series_nodes", 2048), ctx.workers);

  auto dump_curve = [&](const CorrelationCurve& c, const std::string& file) {
    std::string csv = csv_header(ctx, "t,estimate,se,method");
    for (const auto& e : c.entries)
      csv += fmt(e.t) + "," + fmt(e.estimate) + "," + fmt(e.se) + "," +
             c.method + "\n";
    write_file(ctx.out / file, csv);
  };
  dump_curve(direct, "correlate_direct.csv");
  dump_curve(series, "correlate_series.csv");

  bool cross_ok = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < direct.entries.size(); ++i) {
    double diff =
        std::abs(direct.entries[i].estimate - series.entries[i].estimate);
    double tol = 3.0 * direct.entries[i].se + 1e-9;
    worst_z = std::max(worst_z, diff / tol * 3.0);
    if (diff > tol) cross_ok = false;
  }

  json j = config_echo(ctx);
  j["cross_validation_pass"] = cross_ok;
  j["worst_z"] = worst_z;
  bool fit_ok = true;
  try {
    DecayFit fit = decay_fit(direct);
    j["fit"] = {{"C", fit.C},       {"c", fit.c},
                {"r2", fit.r2},     {"window_lo", fit.window_lo},
                {"window_hi", fit.window_hi}, {"points", fit.points}};
    if (ctx.model.uni_expected && fit.c <= 0.0) fit_ok = false;
  } catch (const WindowTooShort& e) {
    j["fit"] = nullptr;
    j["fit_error"] = e.what();
    if (ctx.model.uni_expected) fit_ok = false;
  }
  bool ok = cross_ok && fit_ok;
  j["pass"] = ok;
  write_file(ctx.out / "correlate.json", j.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_laplace(const RunContext& ctx) {
  SpectralData sd = leading_spectrum(ctx.model.map, ctx.model.roof, 0.0,
                                     ctx.N);
  Observable v = default_observable();
  Observable w = default_observable();
  auto s_list = ctx.cfg.get_list("laplace.s_list", {0.3, 0.5, 1.0});
  int nterms = ctx.cfg.get_int("laplace.nterms", 40);

  std::string csv =
      csv_header(ctx, "s_re,s_im,value_re,value_im,j0_re,j0_im,last_term");
  json j = config_echo(ctx);
  json rows = json::array();
  for (double s : s_list) {
    LaplaceValue lv =
        laplace_rho(ctx.model.map, ctx.model.roof, sd.f, v, w,
                    Complex(s, 0.0), nterms, 1e-8,
                    ctx.cfg.get_int("laplace.y_nodes", 1024));
    csv += fmt(s) + ",0," + fmt(lv.value.real()) + "," +
           fmt(lv.value.imag()) + "," + fmt(lv.j0.real()) + "," +
           fmt(lv.j0.imag()) + "," + fmt(lv.last_term) + "\n";
    rows.push_back({{"s", s},
                    {"value_re", lv.value.real()},
                    {"value_im", lv.value.imag()},
                    {"last_term", lv.last_term},
                    {"j0_bound", lv.j0_bound}});
  }
  j["values"] = rows;
  write_file(ctx.out / "laplace.csv", csv);
  write_file(ctx.out / "laplace.json", j.dump(2) + "\n");
  return 0;
}

int cmd_skew(const RunContext& ctx) {
  if (!ctx.model.fiber) throw ConfigError("model has no fiber map");
  SkewMap f = *ctx.model.fiber;
  SpectralData sd = leading_spectrum(f.base, ctx.model.roof, 0.0, ctx.N);

  ContractionReport contraction =
      contraction_check(f, ctx.cfg.get_int("skew.pairs", 64),
                        {1, 2, 3, 4, 5, 6, 7, 8}, ctx.seed);
  f.C = contraction.C;
  f.gamma0 = contraction.gamma0;
  bool ok = contraction.degenerate || contraction.gamma0 < 1.0;

  // eta_y(1) = 1 and the disintegration identity for a fiber observable
  auto one = [](double, double) { return 1.0; };
  EtaAverageResult eta1 =
      eta_average(f, ctx.model.roof, sd, one, 0.3, 8, ctx.N);
  auto vx = [](double y, double z) {
    return z + 0.5 * std::cos(6.283185307179586 * y);
  };
  // disintegration depth stays below log2 of the grid so the fiber paths
  // remain resolvable on the base grid
  int disint_n = ctx.cfg.get_int("skew.disint_n", 8);
  EtaAverageResult etav =
      eta_average(f, ctx.model.roof, sd, vx, 0.3, disint_n, ctx.N, 1e-6);
  MuXIntegral mx =
      muX_integral(f, ctx.model.roof, sd, vx, 3.14159265358979323846, 1.0,
                   ctx.cfg.get_int("skew.envelope_n", 8));
  double vbar_int = mu_integral(etav.vbar, sd.f).real();
  double disint_err = std::abs(mx.value - vbar_int);
  // honest budget: envelope half-gap plus the geometric tail of the
  // disintegration increments plus a quadrature margin
  double g0 = contraction.degenerate ? 0.5 : contraction.gamma0;
  double disint_tol = 0.5 * mx.gap +
                      etav.increments.back() / (1.0 - g0) + 1e-4;
  ok = ok && std::abs(eta1.value - 1.0) < 1e-9 && disint_err < disint_tol;

  SkewObservable vo{[](double y, double z, double) {
                      return std::cos(6.283185307179586 * y) + z;
                    },
                    1.0, 6.283185307179586, 1.0};
  SkewObservable wo{[](double y, double z, double) {
                      return z + 0.5 * std::cos(6.283185307179586 * y);
                    },
                    1.0, 3.14159265358979323846, 1.0};

  GridFunction Rg = GridFunction::from_fn(
      ctx.N, f.base.alpha(),
      [&](double y) { return Complex(ctx.model.roof.R(y), 0.0); });
  double Rbar = mu_integral(Rg, sd.f).real();
  auto t_grid = default_t_grid(Rbar);

  FlowCorrelationOptions opts;
  opts.samples = ctx.samples;
  opts.diag_samples =
      static_cast<std::size_t>(ctx.cfg.get_double("skew.diag_samples", 20000));
  opts.eta_mc = ctx.cfg.get_int("skew.eta_mc", 32);
  opts.burn_in = ctx.cfg.get_int("skew.burn_in", 25);
  opts.seed = ctx.seed;
  opts.workers = ctx.workers;
  FlowCorrelationResult fc =
      flow_correlation(f, ctx.model.roof, sd, vo, wo, t_grid, opts);

  std::string csv =
      csv_header(ctx, "t,I1_abs,I1_se,envelope,I2,quotient_corr");
  bool env_ok = true;
  for (const auto& row : fc.table) {
    csv += fmt(row.t) + "," + fmt(std::abs(row.I1)) + "," + fmt(row.I1_se) +
           "," + fmt(row.envelope) + "," + fmt(row.I2) + "," +
           fmt(row.quotient_corr) + "\n";
    if (std::abs(row.I1) > row.envelope + 3.0 * row.I1_se) env_ok = false;
  }
  write_file(ctx.out / "skew.csv", csv);

  std::string ccsv = csv_header(ctx, "t,estimate,se,method");
  for (const auto& e : fc.curve.entries)
    ccsv += fmt(e.t) + "," + fmt(e.estimate) + "," + fmt(e.se) + ",direct\n";
  write_file(ctx.out / "skew_curve.csv", ccsv);

  json j = config_echo(ctx);
  j["gamma0"] = contraction.gamma0;
  j["C"] = contraction.C;
  j["degenerate"] = contraction.degenerate;
  j["eta_of_one"] = eta1.value;
  j["disintegration_error"] = disint_err;
  j["disintegration_gap_bound"] = mx.gap;
  j["vbar_holder"] = etav.vbar_holder;
  j["envelope_pass"] = env_ok;
  ok = ok && env_ok;
  j["pass"] = ok;
  write_file(ctx.out / "skew.json", j.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_lorenz(const RunContext& ctx) {
  EquilibriumSpectrum sp = lorenz_spectrum(
      ctx.cfg.get_double("lorenz.sigma", 10.0),
      ctx.cfg.get_double("lorenz.rho", 28.0),
      ctx.cfg.get_double("lorenz.beta", 8.0 / 3.0));
  json j = config_echo(ctx);
  j["spectrum"] = json::parse(sp.to_json_string());
  write_file(ctx.out / "lorenz.json", j.dump(2) + "\n");
  return 0;
}

}  // namespace

int run(const std::string& subcommand, Config cfg) {
  try {
    RunContext ctx = make_context(std::move(cfg));
    if (subcommand == "check") return cmd_check(ctx);
    if (subcommand == "uni") return cmd_uni(ctx);
    if (subcommand == "spectrum") return cmd_spectrum(ctx);
    if (subcommand == "dolgopyat") return cmd_dolgopyat(ctx);
    if (subcommand == "cone") return cmd_cone(ctx);
    if (subcommand == "correlate") return cmd_correlate(ctx);
    if (subcommand == "laplace") return cmd_laplace(ctx);
    if (subcommand == "skew") return cmd_skew(ctx);
    if (subcommand == "lorenz") return cmd_lorenz(ctx);
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UnknownModel& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "check failed: %s\n", e.what());
    return 1;
  }
}

}  // namespace expmix::cli
