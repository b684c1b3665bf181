#pragma once

// Command-line front end: lanczos | autocorr | fit | oed | evolve-class | verify.
//
// Exit codes: 0 success, 1 verification failure or other error, 2 config
// error, 3 budget or cap hit (partial output written), 4 internal invariant
// violation, 5 unphysical extrapolation.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quditops/config.hpp"
#include "quditops/fragmentation.hpp"
#include "quditops/io.hpp"
#include "quditops/lanczos.hpp"
#include "quditops/models.hpp"
#include "quditops/recursion.hpp"
#include "quditops/verify.hpp"

namespace quditops::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kBudgetHit = 3,
  kInternalError = 4,
  kUnphysical = 5,
};

struct Context {
  RunConfig config;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;

  std::string path(const std::string& name) const {
    return (std::filesystem::path(config.output_dir) / name).string();
  }
};

// ------------------------------------------------------------------ helpers

inline Json config_json(const RunConfig& c) {
  Json j = Json::object();
  for (const auto& [section, keys] : parse_sections(to_config_text(c))) {
    for (const auto& [key, value] : keys) j[section][key] = value;
  }
  return j;
}

/// Fields every JSON output starts with.
inline Json header(const std::string& schema, const RunConfig& c) {
  Json j;
  j["schema"] = schema + "/" + std::to_string(io::kSchemaVersion);
  j["artifact"] = io::kArtifactVersion;
  j["config_fingerprint"] = config_fingerprint(c);
  j["config"] = config_json(c);
  return j;
}

inline std::vector<std::string> table_comments(const std::string& schema, const RunConfig& c) {
  return {"schema " + schema + "/" + std::to_string(io::kSchemaVersion), "artifact " + std::string(io::kArtifactVersion),
          "config_fingerprint " + config_fingerprint(c)};
}

namespace detail {

// nlohmann prints the shortest round-trip form; outputs use %.17g instead.
inline void dump_to(std::ostream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_number_float()) {
    os << io::format_double(j.get<double>());
  } else if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      os << (first ? "" : ",\n") << pad << Json(key).dump() << ": ";
      dump_to(os, value, indent + 2);
      first = false;
    }
    os << '\n' << close << '}';
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << (i ? ",\n" : "") << pad;
      dump_to(os, j[i], indent + 2);
    }
    os << '\n' << close << ']';
  } else {
    os << j.dump();
  }
}

}  // namespace detail

/// Two-space indented JSON with 17 significant digits for every float.
inline std::string dump(const Json& j) {
  std::ostringstream os;
  detail::dump_to(os, j, 0);
  os << '\n';
  return os.str();
}

inline Json model_params(const ModelSpec& spec) {
  Json p = Json::object();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsingModel>) {
          p["J"] = m.J;
          p["hx"] = m.hx;
          p["hz"] = m.hz;
        } else if constexpr (std::is_same_v<T, PottsModel>) {
          p["J"] = m.J;
          p["h"] = m.h;
        } else {
          Json jx = Json::array(), jy = Json::array();
          for (auto v : m.jx) jx.push_back(v.real());
          for (auto v : m.jy) jy.push_back(v.real());
          p["jx"] = jx;
          p["jy"] = jy;
          p["hermitian_closure"] = m.hermitian_closure;
          p["periodic"] = m.periodic;
        }
      },
      spec);
  return p;
}

inline std::string lattice_name(const LatticeSpec& l) { return l.dimension == 1 ? "chain" : "square"; }

inline void ensure_output_dir(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + c.output_dir + "': " + ec.message());
}

// ----------------------------------------------------------------- commands

inline int cmd_lanczos(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ModelSpec spec = resolve_model(c);
  if (c.n_max < 1) throw ConfigError("lanczos.n_max must be at least 1");
  ensure_output_dir(c);
  const auto space = model_space(spec);
  const TermList h = build_hamiltonian(spec, space);
  const SpinValue spin = model_spin(spec);
  LanczosOptions opts;
  opts.n_max = c.n_max;
  opts.entry_budget = c.budget;
  opts.memory_bytes = c.memory_mb * (std::uint64_t{1} << 20);
  opts.apply.threads = std::max(1u, c.threads);
  if (!c.checkpoint.empty()) {
    const std::string target = c.checkpoint;
    opts.on_step = [target](const LanczosState& s) {
      std::ostringstream os;
      io::write_checkpoint(os, s);
      io::write_file(target, os.str());
    };
  }
  LanczosResult result;
  if (!c.resume.empty()) {
    std::istringstream is(io::read_file(c.resume));
    LanczosState state = io::read_checkpoint(is);
    if (!(state.current.space() == *space)) throw ConfigError("checkpoint does not match the configured model");
    result = resume_lanczos(h, std::move(state), opts);
  } else {
    result = run_lanczos(h, build_total_magnetization(spin, space), opts);
  }
  const LatticeSpec lattice = space->lattice();
  Json j = header("quditops.bn", c);
  j["model"] = model_name(spec);
  j["params"] = model_params(spec);
  j["d"] = space->d();
  j["spin"] = spin.value();
  j["lattice"] = lattice_name(lattice);
  j["boundary"] = to_string(lattice.boundary);
  j["size"] = lattice.finite() ? Json(io::lattice_tag(lattice)) : Json(nullptr);
  j["n_max"] = c.n_max;
  j["b"] = result.b;
  j["support_sizes"] = result.support_sizes;
  j["initial_support"] = result.initial_support;
  j["terminated"] = to_string(result.terminated);
  j["exhausted_at"] = result.exhausted_at;
  j["message"] = result.message;
  j["model_fingerprint"] = model_fingerprint(spec);
  io::write_file(ctx.path("bn.json"), dump(j));
  io::Table t;
  t.comments = table_comments("quditops.bn", c);
  t.columns = {"n", "b_n", "support"};
  for (std::size_t i = 0; i < result.b.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), result.b[i], static_cast<double>(result.support_sizes[i])});
  }
  io::write_table(ctx.path("bn.csv"), t);
  *ctx.out << "lanczos: " << result.b.size() << " coefficients, terminated " << to_string(result.terminated)
           << (result.message.empty() ? "" : " (" + result.message + ")") << '\n';
  return result.terminated == Termination::budget_exceeded ? kBudgetHit : kOk;
}

struct BnInput {
  std::vector<double> b;
  bool closed = false;
};

/// bn.json (schema quditops.bn) or a CSV/.dat table whose second column is b_n.
inline BnInput read_bn(const std::string& path) {
  const std::string text = io::read_file(path);
  BnInput in;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
      in.b = j.at("b").get<std::vector<double>>();
      in.closed = j.value("terminated", std::string{}) == "subspace_exhausted";
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot read '" + path + "': " + e.what());
    }
  } else {
    const auto t = io::parse_table(text);
    for (const auto& row : t.rows) {
      if (row.size() < 2) throw ConfigError("'" + path + "': rows need at least two columns");
      in.b.push_back(row[1]);
    }
  }
  if (in.b.empty()) throw ConfigError("'" + path + "' holds no coefficients");
  return in;
}

inline Json fit_json(const FitParams& f) {
  Json j;
  j["form"] = to_string(f.form);
  j["alpha"] = f.alpha;
  j["gamma"] = f.gamma;
  j["c"] = f.form == FitForm::linear_log ? Json(f.c) : Json(nullptr);
  j["n_min"] = f.n_min;
  j["n_max"] = f.n_max;
  j["rms"] = f.rms;
  return j;
}

inline FitParams run_fit(const RunConfig& c, const std::vector<double>& b) {
  try {
    return fit_bn(b, parse_fit_form(c.fit_form), c.fit_n_min, c.fit_n_max);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

inline int cmd_fit(const Context& ctx) {
  const RunConfig& c = ctx.config;
  ensure_output_dir(c);
  const BnInput in = read_bn(c.input);
  const FitParams f = run_fit(c, in.b);
  Json j = header("quditops.fit", c);
  j["input"] = c.input;
  j["fit"] = fit_json(f);
  io::write_file(ctx.path("fit.json"), dump(j));
  *ctx.out << "fit " << to_string(f.form) << ": alpha=" << io::format_double(f.alpha)
           << " gamma=" << io::format_double(f.gamma);
  if (f.form == FitForm::linear_log) *ctx.out << " c=" << io::format_double(f.c);
  *ctx.out << " rms=" << io::format_double(f.rms) << '\n';
  return kOk;
}

inline int cmd_autocorr(const Context& ctx) {
  const RunConfig& c = ctx.config;
  ensure_output_dir(c);
  const BnInput in = read_bn(c.input);
  std::vector<double> chain = in.b;
  Json fit = nullptr;
  // a chain closed by subspace exhaustion needs no extension
  if (c.extrapolate && !in.closed) {
    const FitParams f = run_fit(c, in.b);
    fit = fit_json(f);
    if (c.n_total < static_cast<int>(in.b.size())) throw ConfigError("autocorr.n_total is shorter than the input");
    chain = extrapolate_bn(in.b, f, static_cast<std::size_t>(c.n_total));
  }
  const auto grid = uniform_grid(c.t_max, c.dt);
  ChainOptions chain_opts;
  chain_opts.closed = in.closed;
  AutocorrSeries series;
  try {
    series = autocorrelation(chain, grid, chain_opts);
  } catch (const ChainReflection& e) {
    throw ConfigError(e.what());
  }
  Json fj = header("quditops.fit", c);
  fj["input"] = c.input;
  fj["fit"] = fit;
  fj["chain_length"] = series.chain_length;
  fj["integrator"] = series.fingerprint;
  io::write_file(ctx.path("fit.json"), dump(fj));
  io::Table t;
  t.comments = table_comments("quditops.ct", c);
  t.comments.push_back("integrator " + series.fingerprint);
  t.columns = {"t", "C"};
  for (std::size_t i = 0; i < series.times.size(); ++i) t.rows.push_back({series.times[i], series.values[i]});
  io::write_table(ctx.path("ct.csv"), t);
  *ctx.out << "autocorr: " << series.times.size() << " points on a chain of " << series.chain_length << '\n';
  return kOk;
}

struct OedDiagnostic {
  std::string interpretation;
  long long predicted = 0;
  bool matches = false;
};

/// Closed-form count 3^{N-1} - (1 + (-1)^N) for the Kitaev-Potts chain at d = 3.
inline long long oed_formula(int n) {
  long long p = 1;
  for (int i = 0; i < n - 1; ++i) p *= 3;
  return p - (n % 2 == 0 ? 2 : 0);
}

inline int cmd_oed(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ModelSpec spec = resolve_model(c);
  const auto space = model_space(spec);
  if (space->translation_invariant()) throw ConfigError("oed needs a finite lattice (boundary ring, torus or open)");
  ensure_output_dir(c);
  const TermList h(space, hamiltonian_terms(spec));
  const auto seed_terms = parse_seed(c.seed, space->d());
  for (const auto& t : seed_terms) {
    if (t.string.factors().front().site.x >= space->lattice().site_count()) {
      throw ConfigError("seed site outside the lattice");
    }
  }
  const auto seed = OperatorVector::from_terms(space, seed_terms);
  const auto report = equivalence_classes(seed, h, c.cap);
  Json j = header("quditops.oed", c);
  j["model"] = model_name(spec);
  j["params"] = model_params(spec);
  j["d"] = space->d();
  j["sites"] = space->lattice().site_count();
  j["seed"] = report.seed;
  j["class_count"] = report.class_count;
  j["class_sizes"] = report.class_sizes;
  j["oed"] = report.oed;
  j["cap"] = c.cap;
  j["cap_hit"] = report.cap_hit;
  j["oed_is_lower_bound"] = report.cap_hit;
  if (std::holds_alternative<KitaevPottsModel>(spec) && space->d() == 3) {
    const int n = space->lattice().site_count();
    std::vector<OedDiagnostic> diags;
    diags.push_back({"L = number of sites", oed_formula(n), false});
    if (n % 2 == 0) diags.push_back({"L = number of two-site unit cells", oed_formula(n / 2), false});
    Json arr = Json::array();
    for (auto& dgn : diags) {
      dgn.matches = !report.cap_hit && static_cast<long long>(report.oed) == dgn.predicted;
      arr.push_back({{"interpretation", dgn.interpretation}, {"predicted", dgn.predicted}, {"matches", dgn.matches}});
    }
    j["formula"] = "3^(L-1) - (1 + (-1)^L)";
    j["interpretations"] = arr;
  }
  io::write_file(ctx.path("oed.json"), dump(j));
  std::ostringstream inv;
  inv << "# " << table_comments("quditops.classes", c)[0] << '\n';
  inv << "# config_fingerprint " << config_fingerprint(c) << '\n';
  write_inventory(inv, report);
  io::write_file(ctx.path("classes.txt"), inv.str());
  *ctx.out << "oed: " << report.oed << (report.cap_hit ? " (lower bound, cap hit)" : "") << " in "
           << report.class_count << " class(es)\n";
  return report.cap_hit ? kBudgetHit : kOk;
}

inline int cmd_evolve_class(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ModelSpec spec = resolve_model(c);
  const auto space = model_space(spec);
  if (space->translation_invariant()) throw ConfigError("evolve-class needs a finite lattice");
  ensure_output_dir(c);
  const TermList h(space, hamiltonian_terms(spec));
  std::optional<TermList> quenched;
  if (c.quench_time > 0.0) {
    const auto* kp = std::get_if<KitaevPottsModel>(&spec);
    if (!kp) throw ConfigError("a quench needs the kitaev-potts model");
    KitaevPottsModel q = *kp;
    q.jx.assign(c.quench_jx.begin(), c.quench_jx.end());
    q.jy.assign(c.quench_jy.begin(), c.quench_jy.end());
    quenched.emplace(space, hamiltonian_terms(ModelSpec{q}));
  }
  // Classes follow the union of the nonzero patterns before and after a quench.
  std::set<WeylString> pattern;
  for (const auto& t : h.terms()) pattern.insert(t.string);
  if (quenched) {
    for (const auto& t : quenched->terms()) pattern.insert(t.string);
  }
  std::vector<PhasedString> unit_terms;
  for (const auto& s : pattern) unit_terms.push_back({Complex(1.0), s});
  const TermList connectivity(space, unit_terms);
  const auto seed = OperatorVector::from_terms(space, parse_seed(c.seed, space->d()));
  const auto report = equivalence_classes(seed, connectivity, c.cap);
  if (report.cap_hit) {
    *ctx.err << "evolve-class: class enumeration hit the cap of " << c.cap << '\n';
    return kBudgetHit;
  }
  const auto rl = restricted_liouvillian(report, h);
  std::vector<EvolutionSegment> segments{{c.quench_time, &rl}};
  RestrictedLiouvillian after;
  if (quenched) {
    after = restricted_liouvillian(report, *quenched);
    segments.push_back({c.quench_time + 1.0, &after});
  }
  const auto grid = uniform_grid(c.t_max, c.dt);
  const Eigen::VectorXcd f0 = class_coefficients(rl, seed);
  const auto traj = evolve_piecewise(segments, f0, grid);
  const double n0 = f0.squaredNorm();
  io::Table t;
  t.comments = table_comments("quditops.ft", c);
  t.comments.push_back("class dimension " + std::to_string(rl.dimension()));
  t.columns = {"t", "norm", "C_re", "C_im"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex ac = f0.dot(traj[i]) / n0;
    t.rows.push_back({grid[i], traj[i].squaredNorm() / n0, ac.real(), ac.imag()});
  }
  io::write_table(ctx.path("ft.csv"), t);
  std::ostringstream mtx;
  write_matrix_market(mtx, rl);
  io::write_file(ctx.path("liouvillian.mtx"), mtx.str());
  std::ostringstream inv;
  inv << "# config_fingerprint " << config_fingerprint(c) << '\n';
  write_inventory(inv, report);
  io::write_file(ctx.path("classes.txt"), inv.str());
  *ctx.out << "evolve-class: dimension " << rl.dimension() << ", " << grid.size() << " time points\n";
  return kOk;
}

inline int cmd_verify(const Context& ctx) {
  const RunConfig& c = ctx.config;
  verify::Hooks hooks;
  hooks.perturb_b = c.perturb;
  verify::Suite suite;
  try {
    suite = verify::make_suite(c.suite, hooks, c.random_seed);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  bool all = true;
  for (const auto& check : suite) {
    const auto r = check();
    all = all && r.passed;
    *ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << io::format_double(r.residual)
             << " tol=" << io::format_double(r.tolerance) << (r.detail.empty() ? "" : " (" + r.detail + ")") << '\n';
  }
  return all ? kOk : kFailure;
}

// -------------------------------------------------------------- entry point

/// Maps command-line flags onto config keys; only flags actually given
/// override the config file.
struct FlagBinding {
  std::string section;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Operator growth and fragmentation for qudit lattice models"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");  // frees -h; --h is the Potts field
  app.set_version_flag("--version", io::kArtifactVersion);
  std::string config_path;
  std::map<std::string, std::vector<std::unique_ptr<FlagBinding>>> bindings;
  std::map<std::string, std::pair<bool, bool>> switches;  // no-hc / no-extrapolation per command
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"lanczos", "Lanczos coefficients b_n of sum_i S^z_i"},
      {"autocorr", "autocorrelation C(t) from b_n by the recursion method"},
      {"fit", "fit a b_n sequence"},
      {"oed", "operator evolution dimension of a seed"},
      {"evolve-class", "exact evolution inside the seed's equivalence class"},
      {"verify", "oracle and invariant cross-checks"},
  };
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& section, const std::string& key,
                  const std::string& help) {
    auto b = std::make_unique<FlagBinding>();
    b->section = section;
    b->key = key;
    b->option = sub->add_option(flag, b->value, help);
    bindings[sub->get_name()].push_back(std::move(b));
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    subs[name] = sub;
    sub->add_option("--config", config_path, "config file (key = value with [sections])");
    bind(sub, "--out", "output", "dir", "output directory");
    bind(sub, "--threads", "lanczos", "threads", "worker threads");
    bind(sub, "--random-seed", "fit", "random_seed", "seed for randomized checks");
    if (name == "lanczos" || name == "oed" || name == "evolve-class") {
      bind(sub, "--model", "model", "name", "ising1d | ising2d | potts | kitaev-potts");
      bind(sub, "--spin", "model", "spin", "spin S, e.g. 1 or 3/2");
      bind(sub, "--d", "model", "d", "local dimension (potts, kitaev-potts)");
      bind(sub, "--J", "model", "J", "coupling, or auto for 1/sqrt(S(S+1))");
      bind(sub, "--hx", "model", "hx", "transverse field");
      bind(sub, "--hz", "model", "hz", "longitudinal field");
      bind(sub, "--h", "model", "h", "Potts field");
      bind(sub, "--boundary", "model", "boundary", "thermodynamic | ring | torus | open");
      bind(sub, "--L", "model", "L", "sites along x");
      bind(sub, "--Ly", "model", "Ly", "sites along y (torus)");
      bind(sub, "--sites", "model", "L", "number of sites");
      bind(sub, "--jx", "model", "jx", "comma-separated X-bond couplings");
      bind(sub, "--jy", "model", "jy", "comma-separated Z-bond couplings");
      sub->add_flag("--no-hc", switches[name].first, "literal generator without Hermitian conjugate terms");
    }
    if (name == "lanczos") {
      bind(sub, "--n", "lanczos", "n_max", "number of coefficients");
      bind(sub, "--budget", "lanczos", "budget", "cap on stored amplitude entries");
      bind(sub, "--memory-mb", "lanczos", "memory_mb", "memory envelope in MiB (0: 70% of RAM)");
      bind(sub, "--checkpoint", "lanczos", "checkpoint", "write resumable state to this file");
      bind(sub, "--resume", "lanczos", "resume", "continue from a checkpoint");
    }
    if (name == "autocorr" || name == "fit") {
      bind(sub, "--input", "autocorr", "input", "bn.json or a CSV with columns n, b_n");
      bind(sub, "--fit", "fit", "form", "linear_log | sqrt");
      bind(sub, "--n-min", "fit", "n_min", "first n in the fit");
      bind(sub, "--n-fit-max", "fit", "n_max", "last n in the fit (0: all)");
    }
    if (name == "autocorr" || name == "evolve-class") {
      bind(sub, "--tmax", "autocorr", "t_max", "final time");
      bind(sub, "--dt", "autocorr", "dt", "time step of the output grid");
    }
    if (name == "autocorr") {
      bind(sub, "--n-total", "autocorr", "n_total", "chain length after extrapolation");
      sub->add_flag("--no-extrapolation", switches[name].second, "use only the measured coefficients");
    }
    if (name == "oed" || name == "evolve-class") {
      bind(sub, "--seed", "oed", "seed", "seed operator, e.g. Z@1 or X2Z1@0+Z@3 (0-based sites)");
      bind(sub, "--cap", "oed", "cap", "maximum number of visited strings");
    }
    if (name == "evolve-class") {
      bind(sub, "--quench-time", "evolve", "quench_time", "switch couplings at this time (0: never)");
      bind(sub, "--quench-jx", "evolve", "quench_jx", "X-bond couplings after the quench");
      bind(sub, "--quench-jy", "evolve", "quench_jy", "Z-bond couplings after the quench");
    }
    if (name == "verify") {
      bind(sub, "--suite", "verify", "suite", "all | algebra | lanczos-oracle | moments | autocorr-oracle | fragmentation");
      bind(sub, "--perturb", "verify", "perturb", "add this to the engine's b_1 (sensitivity check)");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  try {
    RunConfig base;
    if (!config_path.empty()) {
      std::string text;
      try {
        text = io::read_file(config_path);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      base = parse_config_text(text);
    }
    ConfigSections overrides;
    for (const auto& b : bindings[command]) {
      if (b->option->count() > 0) overrides[b->section][b->key] = b->value;
    }
    if (switches[command].first) overrides["model"]["hermitian_closure"] = "false";
    if (switches[command].second) overrides["autocorr"]["extrapolate"] = "false";
    overrides["run"]["command"] = command;
    ctx.config = apply_sections(overrides, base);
    if (command == "lanczos") return cmd_lanczos(ctx);
    if (command == "autocorr") return cmd_autocorr(ctx);
    if (command == "fit") return cmd_fit(ctx);
    if (command == "oed") return cmd_oed(ctx);
    if (command == "evolve-class") return cmd_evolve_class(ctx);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedMode& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const CapacityExceeded& e) {
    err << "capacity: " << e.what() << '\n';
    return kBudgetHit;
  } catch (const BudgetExceeded& e) {
    err << "budget: " << e.what() << '\n';
    return kBudgetHit;
  } catch (const UnphysicalExtrapolation& e) {
    err << "unphysical extrapolation: " << e.what() << '\n';
    return kUnphysical;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace quditops::cli
