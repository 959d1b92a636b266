#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kuraduel/eigs.hpp"
#include "kuraduel/errors.hpp"
#include "kuraduel/expcli.hpp"
#include "kuraduel/fixedpoint.hpp"
#include "kuraduel/format.hpp"
#include "kuraduel/linearized.hpp"
#include "kuraduel/measures.hpp"

namespace kuraduel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

using GridSetter = void (*)(ExperimentConfig&, const Grid&);

class Session {
public:
  Session(const RunOptions& opt, std::string command, GridSetter set_grid) : command_(std::move(command)) {
    ExperimentConfig raw = load_config(opt.config);
    if (opt.grid) {
      if (!set_grid) throw ConfigError(command_ + " takes no grid");
      set_grid(raw, parse_grid(*opt.grid));
    }
    if (opt.seed && raw.frequencies.mode == "uniform") raw.frequencies.seed = *opt.seed;
    const fs::path base = opt.config.parent_path();
    model = build_model(raw, base);
    cfg = freeze(raw, model);
    out = !opt.out.empty() ? opt.out : (fs::path(cfg.output_dir).is_absolute() ? fs::path(cfg.output_dir) : base / cfg.output_dir);
    jobs = opt.jobs;
    fs::create_directories(out);

    const std::string text = print_config(cfg);
    write_text(out / "resolved.cfg", text);
    hash = sha256_hex(text);

    manifest = Manifest(out / "manifest.json");
    auto& d = manifest.data();
    d["tool"] = "kuraduel";
    d["version"] = tool_version;
    d["command"] = command_;
    d["status"] = "incomplete";
    d["config_file"] = "resolved.cfg";
    d["config_sha256"] = hash;
    d["source_config"] = opt.config.string();
    d["seed_override"] = opt.seed ? json(*opt.seed) : json(nullptr);
    d["frequencies"] = {{"omega", vec_json(model.omega)},
                        {"nu", vec_json(model.nu)},
                        {"mean_omega", model.mean_omega()},
                        {"mean_nu", model.mean_nu()},
                        {"delta", model.mean_omega() - model.mean_nu()}};
    d["networks"] = networks_json(model);
    d["outputs"] = json::object();
    manifest.write();
  }

  std::vector<std::string> header() const { return {"config_sha256=" + hash, "command=" + command_}; }

  void output(const std::string& name, const std::string& text) {
    write_text(out / name, text);
    manifest.add_output(out / name);
    manifest.write();
  }

  template <class Fn>
  json run(Fn&& body) {
    try {
      json summary = body();
      manifest.data()["summary"] = summary;
      manifest.set_status("complete");
      manifest.write();
      return summary;
    } catch (const std::exception& e) {
      manifest.set_status("failed", e.what());
      manifest.write();
      throw;
    }
  }

  LockOptions lock() const {
    LockOptions o;
    o.window_fraction = cfg.analysis.window_fraction;
    o.slope_tol = cfg.analysis.slope_tol;
    o.wind_tol = cfg.analysis.wind_tol;
    return o;
  }

  PhaseState initial() const {
    if (cfg.integration.initial == "random")
      return PhaseState::random(model.n_blue(), model.n_red(), cfg.integration.initial_seed);
    return PhaseState::zeros(model.n_blue(), model.n_red());
  }

  Trajectory simulate(const ModelConfig& m) const {
    return integrate(m, initial(), cfg.integration.t_end, cfg.integration.dt, cfg.integration.sample_every);
  }

  ExperimentConfig cfg;
  ModelConfig model;
  fs::path out;
  std::string hash;
  unsigned jobs = 0;
  Manifest manifest;

private:
  std::string command_;
};

json lock_json(const LockReport& r) {
  return {{"locked", r.locked},           {"plateau", r.plateau},   {"max_slope", r.max_slope},
          {"winding", r.winding},         {"slips", r.slip_times.size()},
          {"period", opt_json(r.period)}, {"window_start", r.window_start}};
}

double lambda1(const Matrix& m) { return lowest_nonzero_mode(eigs(m, EigOptions{false, true}), 1).lambda.real(); }

RedPartition checked_partition(const ModelConfig& m) { return partition_red(m.red, m.cross); }

std::string alpha_text(const std::optional<double>& a) { return format_optional(a); }

} // namespace

json cmd_simulate(const RunOptions& opt) {
  Session s(opt, "simulate", nullptr);
  return s.run([&] {
    const Trajectory traj = s.simulate(s.model);
    s.output("trajectory.csv", trajectory_csv(traj, s.header()));

    std::optional<RedPartition> part;
    if (s.cfg.analysis.three_cluster) part = checked_partition(s.model);
    const RedPartition* pp = part ? &*part : nullptr;
    const OrderSeries order = order_params(traj, pp);
    const CentroidSeries cent = centroids(traj, pp);
    s.output("measures.csv", measures_csv(order, cent, s.header()));

    const LockOptions lo = s.lock();
    json sum;
    sum["samples"] = traj.samples();
    sum["o_b"] = trailing_mean(order.o_b, lo);
    sum["o_r"] = trailing_mean(order.o_r, lo);
    sum["alpha"] = lock_json(detect_lock(cent.times, cent.alpha, lo));
    sum["local_lock_blue"] = detect_local_lock(traj, Population::blue, lo).locked;
    sum["local_lock_red"] = detect_local_lock(traj, Population::red, lo).locked;
    sum["alpha_slope"] = (cent.alpha.back() - cent.alpha.front()) / (cent.times.back() - cent.times.front());
    if (s.cfg.analysis.two_cluster) {
      const auto k = two_cluster_coeffs(s.model);
      json a{{"C", k.c}, {"S", k.s}, {"delta", k.delta}, {"K", k.k}};
      if (k.c != 0.0 || k.s != 0.0) {
        const SteadyState st = alpha_steady(k);
        if (const auto att = st.attracting()) a["alpha_stable"] = att->alpha;
        if (k.k < 0.0) a["period"] = 2 * pi / std::sqrt(-k.k);
      }
      sum["two_cluster"] = a;
    }
    if (part) {
      const FragClassification fc = classify_fragmentation(order, cent, FragThresholds{s.cfg.analysis.locked, s.cfg.analysis.splay, lo});
      sum["three_cluster"] = {{"state", std::string(to_string(fc.state))},
                              {"o_r1", fc.o_r1},
                              {"o_r2", fc.o_r2},
                              {"alpha_br1", lock_json(fc.alpha_br1)},
                              {"alpha_r1r2", lock_json(fc.alpha_r1r2)}};
    }
    return sum;
  });
}

json cmd_spectrum(const RunOptions& opt) {
  Session s(opt, "spectrum", [](ExperimentConfig& c, const Grid& g) { c.sweep.alpha = g; });
  return s.run([&] {
    const std::vector<double> grid = s.cfg.sweep.alpha ? s.cfg.sweep.alpha->points() : linear_grid(-pi, pi, 361);
    struct Row {
      double alpha;
      Complex lambda;
      std::string marker;
    };
    std::vector<Row> rows;
    const auto l = parallel_map(grid.size(), s.jobs, [&](std::size_t i) {
      return lowest_nonzero_mode(eigs(build_super_laplacian(s.model, grid[i]).m, EigOptions{false, true}), 1).lambda;
    });
    for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid[i], l[i], ""});

    json sum;
    json roots = json::array();
    const auto k = two_cluster_coeffs(s.model);
    sum["K"] = k.k;
    if (k.c != 0.0 || k.s != 0.0) {
      const SteadyState st = alpha_steady(k);
      for (const auto& a : st.angles) {
        const auto sl = build_super_laplacian(s.model, a.alpha);
        const Spectrum sp = eigs(sl.m);
        const Mode mode = lowest_nonzero_mode(sp, 1);
        rows.push_back({a.alpha, mode.lambda, a.attracting() ? "stable" : "unstable"});
        json r{{"alpha", a.alpha}, {"branch", a.branch}, {"attracting", a.attracting()},
               {"lambda1", mode.lambda.real()}, {"lambda1_im", mode.lambda.imag()}, {"symmetric", sl.symmetric_flag}};
        if (a.attracting()) {
          const StepProfile sp1 = eigenvector_step_profile(mode.vector, s.model.n_blue());
          r["step_profile"] = {{"population_step", sp1.population_step}, {"gap", sp1.gap},
                               {"blue_mean", sp1.blue_mean},             {"red_mean", sp1.red_mean},
                               {"blue_variance", sp1.blue_variance},     {"red_variance", sp1.red_variance}};
        }
        roots.push_back(r);
      }
    }
    sum["roots"] = roots;
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.alpha < b.alpha; });

    std::ostringstream csv;
    for (const auto& h : s.header()) csv << "# " << h << '\n';
    csv << "alpha,lambda1_re,lambda1_im,marker\n";
    for (const auto& r : rows)
      csv << format_double(r.alpha) << ',' << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag())
          << ',' << r.marker << '\n';
    s.output("spectrum.csv", csv.str());
    sum["points"] = grid.size();
    return sum;
  });
}

json cmd_optimize(const RunOptions& opt) {
  Session s(opt, "optimize", [](ExperimentConfig& c, const Grid& g) { c.sweep.phi = g; });
  return s.run([&] {
    const std::vector<double> grid = s.cfg.sweep.phi ? s.cfg.sweep.phi->points() : linear_grid(0.0, 0.99 * pi, 100);
    const double psi = s.model.psi;
    const PhiOptimum best = optimize_phi(s.model, psi, grid);

    std::ostringstream scan;
    for (const auto& h : s.header()) scan << "# " << h << '\n';
    scan << "phi,alpha_stable,alpha_unstable,K,lambda1_at_stable\n";
    for (const auto& r : best.scan)
      scan << format_double(r.phi) << ',' << alpha_text(r.alpha_stable) << ',' << alpha_text(r.alpha_unstable) << ','
           << format_double(r.k) << ',' << format_optional(r.lambda1_at_stable) << '\n';
    s.output("phi_scan.csv", scan.str());

    json sum{{"phi_opt", best.phi}, {"alpha_opt", best.alpha}, {"turning_point", best.turning_point}};
    const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
    for (auto [lo, hi] : {std::pair{*lo_it, *hi_it}, std::pair{0.0, pi}}) {
      try {
        sum["critical_phi"] = critical_phi(s.model, psi, lo, hi);
        break;
      } catch (const BracketError&) {
        sum["critical_phi"] = nullptr;
      }
    }

    const auto& spots = s.cfg.sweep.spot_phi;
    if (!spots.empty()) {
      const LockOptions lo = s.lock();
      struct Spot {
        LockReport lock;
        std::optional<double> analytic;
      };
      const auto res = parallel_map(spots.size(), s.jobs, [&](std::size_t i) {
        const ModelConfig m = s.model.with_frustrations(spots[i], psi);
        const Trajectory traj = s.simulate(m);
        const CentroidSeries c = centroids(traj);
        Spot out{detect_lock(c.times, c.alpha, lo), std::nullopt};
        if (const auto st = analyze_two_cluster(m).stable()) out.analytic = st->alpha;
        return out;
      });
      std::ostringstream csv;
      for (const auto& h : s.header()) csv << "# " << h << '\n';
      csv << "phi,alpha_numeric,alpha_analytic,locked,winding\n";
      json js = json::array();
      for (std::size_t i = 0; i < spots.size(); ++i) {
        csv << format_double(spots[i]) << ',' << format_double(res[i].lock.plateau) << ','
            << alpha_text(res[i].analytic) << ',' << (res[i].lock.locked ? 1 : 0) << ',' << res[i].lock.winding << '\n';
        js.push_back({{"phi", spots[i]}, {"alpha_numeric", res[i].lock.plateau}, {"alpha_analytic", opt_json(res[i].analytic)},
                      {"locked", res[i].lock.locked}});
      }
      s.output("spot.csv", csv.str());
      sum["spots"] = js;
    }
    return sum;
  });
}

json cmd_fragmentation(const RunOptions& opt) {
  Session s(opt, "fragmentation", [](ExperimentConfig& c, const Grid& g) { c.sweep.zeta = g; });
  return s.run([&] {
    if (!s.cfg.analysis.three_cluster) throw ConfigError("fragmentation needs [analysis] three_cluster = true");
    const RedPartition p = checked_partition(s.model);
    const std::vector<double> grid = s.cfg.sweep.zeta ? s.cfg.sweep.zeta->points() : linear_grid(0.5, 8.0, 16);
    const LockOptions lo = s.lock();
    const FragThresholds th{s.cfg.analysis.locked, s.cfg.analysis.splay, lo};

    std::ostringstream zs;
    for (const auto& h : s.header()) zs << "# " << h << '\n';
    zs << "zeta,sin_a_br1,sin_a_r1r2,J,exists\n";
    for (double z : grid) {
      const FragAngles fa = frag_angles(three_cluster_coeffs(s.model.with_cross_coupling(z), p));
      const FragBranch& b = fa.branches[0];
      zs << format_double(z) << ',' << (b.real ? format_double(b.sin_a_br1.real()) : "") << ','
         << (b.real ? format_double(b.sin_a_r1r2.real()) : "") << ',' << format_double(fa.coeffs.j) << ','
         << (b.exists ? 1 : 0) << '\n';
    }
    s.output("zeta_scan.csv", zs.str());

    struct Point {
      FragClassification cls;
      double j = 0.0;
      std::optional<double> a1, a2, l_an;
      double l_num = 0.0;
    };
    auto run_point = [&](double z) {
      const ModelConfig m = s.model.with_cross_coupling(z);
      const Trajectory traj = s.simulate(m);
      Point pt;
      pt.cls = classify_fragmentation(order_params(traj, &p), centroids(traj, &p), th);
      const FixedPointReport rep = analyze_three_cluster(m, p);
      pt.j = rep.discriminant;
      if (const auto st = rep.stable()) {
        pt.a1 = st->alpha;
        pt.a2 = st->alpha_r1r2;
        pt.l_an = st->lambda1.real();
      }
      pt.l_num = lambda1(build_frag_super_laplacian(m, p, pt.cls.alpha_br1.plateau, pt.cls.alpha_r1r2.plateau).m);
      return pt;
    };
    const auto pts = parallel_map(grid.size(), s.jobs, [&](std::size_t i) { return run_point(grid[i]); });

    std::ostringstream csv;
    for (const auto& h : s.header()) csv << "# " << h << '\n';
    csv << "zeta,state,O_B,O_R,O_R1,O_R2,alpha_br1_num,alpha_r1r2_num,alpha_br1_an,alpha_r1r2_an,J,lambda1_an,"
           "lambda1_num,locked_br1,locked_r1r2\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point& q = pts[i];
      csv << format_double(grid[i]) << ',' << to_string(q.cls.state) << ',' << format_double(q.cls.o_b) << ','
          << format_double(q.cls.o_r) << ',' << format_double(q.cls.o_r1) << ',' << format_double(q.cls.o_r2) << ','
          << format_double(q.cls.alpha_br1.plateau) << ',' << format_double(q.cls.alpha_r1r2.plateau) << ','
          << alpha_text(q.a1) << ',' << alpha_text(q.a2) << ',' << format_double(q.j) << ',' << format_optional(q.l_an)
          << ',' << format_double(q.l_num) << ',' << (q.cls.alpha_br1.locked ? 1 : 0) << ','
          << (q.cls.alpha_r1r2.locked ? 1 : 0) << '\n';
    }
    s.output("fragmentation.csv", csv.str());

    json sum;
    const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
    try {
      sum["critical_zeta_analytic"] = critical_zeta(s.model, p, *lo_it, *hi_it);
    } catch (const BracketError&) {
      sum["critical_zeta_analytic"] = nullptr;
    }
    // Numeric lock loss: first grid point where alpha_R1R2 stops locking,
    // refined by bisection against the preceding locked point.
    sum["lock_loss_zeta_numeric"] = nullptr;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (pts[i].cls.alpha_r1r2.locked || !pts[i - 1].cls.alpha_r1r2.locked) continue;
      double a = grid[i - 1], b = grid[i];
      while (b - a > s.cfg.sweep.zeta_tol) {
        const double mid = 0.5 * (a + b);
        const Trajectory traj = s.simulate(s.model.with_cross_coupling(mid));
        const CentroidSeries c = centroids(traj, &p);
        (detect_lock(c.times, c.alpha_r1r2, lo).locked ? a : b) = mid;
      }
      sum["lock_loss_zeta_numeric"] = 0.5 * (a + b);
      sum["lock_loss_bracket"] = {a, b};
      break;
    }
    if (!sum["critical_zeta_analytic"].is_null() && !sum["lock_loss_zeta_numeric"].is_null())
      sum["threshold_gap"] = std::abs(sum["critical_zeta_analytic"].get<double>() - sum["lock_loss_zeta_numeric"].get<double>());
    json states = json::array();
    for (const auto& q : pts) states.push_back(std::string(to_string(q.cls.state)));
    sum["states"] = states;
    sum["partition"] = {{"m1", p.m1()}, {"m2", p.m2()}, {"d_r1r2", p.d_r1r2}};
    return sum;
  });
}

json cmd_rerun(const fs::path& manifest_path, const fs::path& out, unsigned jobs) {
  const Manifest old = Manifest::load(manifest_path);
  if (old.data().value("status", std::string()) != "complete")
    throw ChecksumError("manifest " + manifest_path.string() + " does not describe a complete run");
  old.verify();
  RunOptions opt;
  opt.config = manifest_path.parent_path() / old.data().value("config_file", std::string("resolved.cfg"));
  opt.out = out.empty() ? manifest_path.parent_path() / "rerun" : out;
  opt.jobs = jobs;
  if (fs::equivalent(fs::absolute(opt.out), fs::absolute(manifest_path.parent_path())))
    throw ConfigError("rerun output must differ from the original run directory");
  const std::string cmd = old.data().at("command").get<std::string>();
  if (cmd == "simulate")
    cmd_simulate(opt);
  else if (cmd == "spectrum")
    cmd_spectrum(opt);
  else if (cmd == "optimize")
    cmd_optimize(opt);
  else if (cmd == "fragmentation")
    cmd_fragmentation(opt);
  else
    throw ChecksumError("manifest names an unknown command '" + cmd + "'");

  const Manifest fresh = Manifest::load(opt.out / "manifest.json");
  if (fresh.data().at("config_sha256") != old.data().at("config_sha256"))
    throw ChecksumError("rerun config hash differs from the original");
  const json& a = old.data().at("outputs");
  const json& b = fresh.data().at("outputs");
  for (const auto& [name, hash] : a.items()) {
    if (!b.contains(name) || b.at(name) != hash) throw ChecksumError("rerun output " + name + " differs from the original");
  }
  if (a.size() != b.size()) throw ChecksumError("rerun produced a different set of outputs");
  return {{"command", cmd}, {"identical", true}, {"outputs", a.size()}, {"out", opt.out.string()}};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const ChecksumError*>(&e))
    return 2;
  if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const DegeneratePartitionError*>(&e) ||
      dynamic_cast<const DegenerateSpectrumError*>(&e) || dynamic_cast<const NoInteractionError*>(&e))
    return 4;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const WindowError*>(&e)) return 3;
  return 1;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Blue vs Red frustrated Kuramoto experiments", "kuraduel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version));

  std::string config, out, grid, manifest;
  unsigned jobs = 0;
  auto common = [&](CLI::App* sub, bool with_grid) {
    sub->add_option("--config,-c", config, "experiment config file")->required();
    sub->add_option("--out,-o", out, "output directory (default: [output] dir next to the config)");
    sub->add_option("--jobs,-j", jobs, "worker threads, 0 = all cores");
    if (with_grid) sub->add_option("--grid", grid, "sweep grid, lo:hi:count or a comma list ('pi' suffix allowed)");
  };
  auto* sim = app.add_subcommand("simulate", "integrate one configuration and write trajectory and measures");
  common(sim, false);
  auto* spec = app.add_subcommand("spectrum", "lowest super-Laplacian eigenvalue over a centroid-angle grid");
  common(spec, true);
  auto* optz = app.add_subcommand("optimize", "scan the Blue frustration for the largest stable lead angle");
  common(optz, true);
  auto* frag = app.add_subcommand("fragmentation", "cross-coupling sweep of the three-cluster state");
  common(frag, true);
  auto* rerun = app.add_subcommand("rerun", "reproduce a run from its manifest and compare hashes");
  rerun->add_option("manifest,--manifest", manifest, "manifest.json of a finished run")->required();
  rerun->add_option("--out,-o", out, "output directory (default: <run>/rerun)");
  rerun->add_option("--jobs,-j", jobs, "worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json summary;
    if (rerun->parsed()) {
      summary = cmd_rerun(manifest, out, jobs);
    } else {
      RunOptions opt;
      opt.config = config;
      opt.out = out;
      opt.jobs = jobs;
      if (!grid.empty()) opt.grid = grid;
      if (const char* env = std::getenv("KURADUEL_SEED"); env && *env) {
        std::uint64_t v = 0;
        const std::string_view t(env);
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size())
          throw ConfigError("KURADUEL_SEED must be a non-negative integer, got '" + std::string(t) + "'");
        opt.seed = v;
      }
      if (sim->parsed()) summary = cmd_simulate(opt);
      if (spec->parsed()) summary = cmd_spectrum(opt);
      if (optz->parsed()) summary = cmd_optimize(opt);
      if (frag->parsed()) summary = cmd_fragmentation(opt);
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "kuraduel: error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (...) {
    std::cerr << "kuraduel: error: unknown failure\n";
    return 1;
  }
}

} // namespace kuraduel
