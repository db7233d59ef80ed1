#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "realsim/errors.hpp"
#include "realsim/imaging.hpp"
#include "realsim/io.hpp"
#include "realsim/metrics.hpp"
#include "realsim/sysid.hpp"
#include "realsim/urdf.hpp"

namespace realsim::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed_or_na(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Loaded inputs carry the file name in error messages.
template <class F>
auto with_file(const std::string& file, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(file + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(file + ": " + e.what());
  }
}

json load(const std::string& file) { return io::load_json(file); }

ChainSpec load_chain(const std::string& file) {
  return with_file(file, [&] { return io::chain_from_json(load(file)); });
}

io::RunConfig load_config(const std::string& file) {
  if (file.empty()) return io::RunConfig{};
  return with_file(file, [&] { return io::run_config_from_json(load(file)); });
}

// ---------------------------------------------------------------- metrics

struct MetricsReportArgs {
  std::vector<std::string> tables;
  std::string out = "-";
  std::string summary;
};

void metrics_report(const MetricsReportArgs& a) {
  std::vector<PairedEvalTable> tables;
  for (const auto& f : a.tables) {
    auto parsed = with_file(f, [&] { return io::tables_from_json(load(f)); });
    tables.insert(tables.end(), parsed.begin(), parsed.end());
  }

  std::ostringstream csv;
  csv << "task,policy,real,sim,max_rank_violation\n";
  json summary_tasks = json::array();
  double mmrv_sum = 0.0;
  for (const auto& t : tables) {
    std::vector<double> real, sim;
    for (std::size_t i = 0; i < t.evals.size(); ++i) {
      const auto& e = t.evals[i];
      real.push_back(e.real_rate);
      sim.push_back(e.sim_rate);
      csv << t.task << ',' << e.policy_id << ',' << fixed(e.real_rate, 3) << ',' << fixed(e.sim_rate, 3) << ','
          << fixed(max_rank_violation(t, i)) << '\n';
    }
    const double m = mmrv(t);
    const auto r = pearson(real, sim);
    const auto rho = spearman(real, sim);
    mmrv_sum += m;
    csv << t.task << ",MMRV,,," << fixed(m) << '\n';
    csv << t.task << ",pearson,,," << fixed_or_na(r) << '\n';
    csv << t.task << ",spearman,,," << fixed_or_na(rho) << '\n';

    json kw = json::array();
    for (const auto& e : t.evals) {
      if (!e.real_trials || !e.sim_trials) continue;
      const auto k = kruskal_wallis(std::span<const int>(*e.real_trials), std::span<const int>(*e.sim_trials));
      csv << t.task << ",kruskal_p:" << e.policy_id << ",,," << fixed(k.p) << '\n';
      kw.push_back(json{{"policy", e.policy_id}, {"h", k.h}, {"p", k.p}});
    }
    summary_tasks.push_back(json{{"task", t.task},
                                 {"policies", t.evals.size()},
                                 {"mmrv", m},
                                 {"pearson", number_or_null(r)},
                                 {"spearman", number_or_null(rho)},
                                 {"kruskal_wallis", kw}});
  }
  io::write_text(a.out, csv.str());
  if (!a.summary.empty()) {
    const json summary{{"tasks", summary_tasks},
                       {"mean_mmrv", tables.empty() ? 0.0 : mmrv_sum / static_cast<double>(tables.size())}};
    io::write_text(a.summary, dump(summary));
  }
}

struct MetricsShiftArgs {
  std::string in;
  std::string out = "-";
};

void metrics_shift(const MetricsShiftArgs& a) {
  const auto entries = with_file(a.in, [&] { return io::shifts_from_json(load(a.in)); });
  std::ostringstream csv;
  csv << "policy,task,factor,base,variants,delta_signed,delta_abs\n";
  for (const auto& e : entries) {
    const auto d = delta_success(e.eval);
    std::string variants;
    for (std::size_t k = 0; k < e.eval.variant_rates.size(); ++k) {
      variants += (k ? "/" : "") + fixed(e.eval.variant_rates[k], 3);
    }
    csv << e.policy << ',' << e.task << ',' << e.factor << ',' << fixed(e.eval.base_rate, 3) << ',' << variants << ','
        << fixed(d.signed_mean) << ',' << fixed(d.abs_per_variant) << '\n';
  }
  io::write_text(a.out, csv.str());
}

// ---------------------------------------------------------------- sysid

std::vector<TrajectoryRecord> load_records(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("'" + dir + "' contains no .json trajectories");
  std::vector<TrajectoryRecord> records;
  for (const auto& f : files) {
    records.push_back(with_file(f.string(), [&] { return io::record_from_json(load(f.string())); }));
  }
  return records;
}

struct SysidFitArgs {
  std::string trajectories, chain, config, out = "-";
  std::optional<std::uint64_t> seed;
};

void sysid_fit(const SysidFitArgs& a) {
  const ChainSpec chain = load_chain(a.chain);
  io::RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.anneal.seed = *a.seed;
  if (!cfg.init || !cfg.range) throw ValidationError(a.config + ": sysid needs both 'init' and 'range'");
  SysIdProblem problem(load_records(a.trajectories), chain, cfg.dynamics_for(chain), cfg.controller, cfg.ctrl);
  const auto result = anneal_fit(problem, *cfg.init, *cfg.range, cfg.anneal);
  io::write_text(a.out, dump(io::sysid_result_to_json(result, cfg.anneal.seed)));
}

struct SysidSynthArgs {
  std::string chain, config, truth, out_dir;
  int records = 5;
  int actions = 30;
  std::uint64_t seed = 0;
};

void sysid_synth(const SysidSynthArgs& a) {
  const ChainSpec chain = load_chain(a.chain);
  const io::RunConfig cfg = load_config(a.config);
  const PDParams truth = with_file(a.truth, [&] { return io::pd_from_json(load(a.truth), ""); });
  SyntheticSpec spec;
  spec.records = a.records;
  spec.actions_per_record = a.actions;
  spec.seed = a.seed;
  const auto data = make_synthetic_dataset(chain, cfg.dynamics_for(chain), truth, cfg.controller, cfg.ctrl, spec);
  fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < data.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "record_%03zu.json", i);
    io::write_text((fs::path(a.out_dir) / name).string(), dump(io::record_to_json(data[i])));
  }
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
  std::string chain, config, trajectory, params, out = "-", dump_plan;
};

std::string plan_csv(const ReplayResult& res, const TrajectoryRecord& rec, const CtrlConfig& ctrl, ControllerKind kind,
                     int n) {
  std::ostringstream csv;
  csv << "t";
  for (int j = 0; j < n; ++j) csv << ",q" << j << ",v" << j << ",a" << j;
  if (kind == ControllerKind::Google) csv << ",q_grip,v_grip,a_grip";
  csv << '\n';
  CtrlConfig c = ctrl;
  c.ctrl_hz = rec.ctrl_frequency;
  const int steps = c.sim_steps_per_tick();
  auto row = [&](long k, const std::vector<JointState>& arm, const std::vector<JointState>* grip) {
    csv << fixed(static_cast<double>(k) / c.sim_hz, 9);
    for (const auto& s : arm) csv << ',' << fixed(s.q, 9) << ',' << fixed(s.v, 9) << ',' << fixed(s.a, 9);
    if (grip) csv << ',' << fixed((*grip)[0].q, 9) << ',' << fixed((*grip)[0].v, 9) << ',' << fixed((*grip)[0].a, 9);
    csv << '\n';
  };
  if (kind == ControllerKind::Google) {
    for (std::size_t tick = 0; tick < res.google_steps.size(); ++tick) {
      const auto& step = res.google_steps[tick];
      for (int i = 0; i < steps; ++i) {
        const double t = i / c.sim_hz;
        const auto grip = sample(step.grip_plan, t);
        row(static_cast<long>(tick) * steps + i, sample(step.arm_plan, t), &grip);
      }
    }
  } else {
    // No intermediate planning: the IK target is held at rest for the whole tick.
    for (std::size_t tick = 0; tick < res.widowx_targets.size(); ++tick) {
      std::vector<JointState> held;
      for (int j = 0; j < n; ++j) held.push_back(JointState{res.widowx_targets[tick].arm_q(j), 0.0, 0.0});
      for (int i = 0; i < steps; ++i) row(static_cast<long>(tick) * steps + i, held, nullptr);
    }
  }
  return csv.str();
}

void replay(const ReplayArgs& a) {
  const ChainSpec chain = load_chain(a.chain);
  const io::RunConfig cfg = load_config(a.config);
  const TrajectoryRecord rec = with_file(a.trajectory, [&] { return io::record_from_json(load(a.trajectory)); });
  PDParams pd;
  if (!a.params.empty()) {
    // Accepts a bare {p, d} object or a sysid result with a "best" entry.
    pd = with_file(a.params, [&] {
      const json j = load(a.params);
      return j.contains("best") ? io::pd_from_json(j["best"], "/best") : io::pd_from_json(j, "");
    });
  } else if (cfg.init) {
    pd = *cfg.init;
  } else {
    throw ValidationError("replay needs --params or an 'init' entry in the config");
  }
  const VecX q0 = initial_configuration(chain, rec, cfg.ctrl.ik);
  ReplayOptions opts;
  opts.keep_controller_steps = !a.dump_plan.empty();
  const auto res = replay_open_loop(chain, cfg.dynamics_for(chain), pd, cfg.controller, rec, q0, cfg.ctrl, opts);
  const auto l = trajectory_losses(rec.ee_poses, res.poses);

  json poses = json::array();
  for (const auto& p : res.poses) poses.push_back(io::pose_to_json(p));
  const json out{{"poses", poses},
                 {"ik_failures", res.ik_failures},
                 {"losses", {{"transl", l.transl}, {"rot", l.rot}, {"sysid", l.total}}}};
  io::write_text(a.out, dump(out));
  if (!a.dump_plan.empty()) {
    // When JSON goes to stdout the plan must go elsewhere.
    if (a.dump_plan == "-" && a.out == "-") throw ValidationError("--dump-plan and --out cannot both be stdout");
    io::write_text(a.dump_plan, plan_csv(res, rec, cfg.ctrl, cfg.controller, chain.size()));
  }
  std::ostream& log = a.out == "-" || a.dump_plan == "-" ? std::cerr : std::cout;
  log << "L_transl=" << fixed(l.transl, 9) << " L_rot=" << fixed(l.rot, 9) << " L_sysid=" << fixed(l.total, 9) << '\n';
}

// ---------------------------------------------------------------- composite, urdf

struct CompositeArgs {
  std::string sim, mask, real, out = "-";
  std::string mode = "hard";
};

void composite_cmd(const CompositeArgs& a) {
  const CompositeMode mode = a.mode == "soft" ? CompositeMode::Soft : CompositeMode::Hard;
  const ImageRGB8 sim = with_file(a.sim, [&] { return read_ppm(a.sim); });
  const MaskGray8 mask = with_file(a.mask, [&] { return read_pgm(a.mask); });
  const ImageRGB8 real = with_file(a.real, [&] { return read_ppm(a.real); });
  const std::string bytes = encode_ppm(composite(sim, mask, real, mode));
  if (a.out == "-") {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
  } else {
    io::write_text(a.out, bytes);
  }
}

struct UrdfArgs {
  std::string in, tip, out = "-";
};

void urdf_convert(const UrdfArgs& a) {
  const std::string xml = io::read_text(a.in);
  const ChainSpec chain = with_file(
      a.in, [&] { return parse_urdf_subset(xml, a.tip.empty() ? std::nullopt : std::optional<std::string>(a.tip)); });
  io::write_text(a.out, dump(io::chain_to_json(chain)));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Real-to-sim evaluation toolkit", "realsim"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* metrics = app.add_subcommand("metrics", "Correlation statistics over paired evaluation tables");
  metrics->require_subcommand(1);
  MetricsReportArgs mr;
  auto* report = metrics->add_subcommand("report", "MMRV, Pearson, Spearman and Kruskal-Wallis per task");
  report->add_option("--tables", mr.tables, "Table JSON files")->required()->expected(1, -1);
  report->add_option("--out", mr.out, "CSV report path, '-' for stdout");
  report->add_option("--summary", mr.summary, "Aggregate JSON path, '-' for stdout");
  MetricsShiftArgs ms;
  auto* shift = metrics->add_subcommand("shift", "Signed and absolute success deltas per shift factor");
  shift->add_option("--in", ms.in, "Shift JSON file")->required();
  shift->add_option("--out", ms.out, "CSV path, '-' for stdout");

  auto* sysid = app.add_subcommand("sysid", "PD-gain identification by open-loop replay");
  sysid->require_subcommand(1);
  SysidFitArgs sf;
  std::uint64_t fit_seed = 0;
  auto* fit = sysid->add_subcommand("fit", "Simulated-annealing fit over a trajectory directory");
  fit->add_option("--trajectories", sf.trajectories, "Directory of trajectory JSON files")->required();
  fit->add_option("--chain", sf.chain, "Chain JSON")->required();
  fit->add_option("--config", sf.config, "Run config JSON with init and range")->required();
  fit->add_option("--out", sf.out, "Result JSON path, '-' for stdout");
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "Overrides the config's annealing seed");
  SysidSynthArgs ss;
  auto* synth = sysid->add_subcommand("synth", "Generate trajectories under known gains");
  synth->add_option("--chain", ss.chain, "Chain JSON")->required();
  synth->add_option("--config", ss.config, "Run config JSON");
  synth->add_option("--truth", ss.truth, "Generating gains {p, d}")->required();
  synth->add_option("--out-dir", ss.out_dir, "Output directory")->required();
  synth->add_option("--records", ss.records, "Number of trajectories")->check(CLI::PositiveNumber);
  synth->add_option("--actions", ss.actions, "Actions per trajectory")->check(CLI::PositiveNumber);
  synth->add_option("--seed", ss.seed, "Random seed");

  ReplayArgs rp;
  auto* rep = app.add_subcommand("replay", "Open-loop replay of one trajectory");
  rep->add_option("--chain", rp.chain, "Chain JSON")->required();
  rep->add_option("--config", rp.config, "Run config JSON");
  rep->add_option("--trajectory", rp.trajectory, "Trajectory JSON")->required();
  rep->add_option("--params", rp.params, "Gains JSON ({p, d} or a sysid result)");
  rep->add_option("--out", rp.out, "Simulated poses and losses, '-' for stdout");
  rep->add_option("--dump-plan", rp.dump_plan, "CSV of planned t, q, v, a per joint");

  CompositeArgs ca;
  auto* comp = app.add_subcommand("composite", "Green-screen a simulated render onto a real background");
  comp->add_option("--sim", ca.sim, "Simulated render (P6)")->required();
  comp->add_option("--mask", ca.mask, "Foreground mask (P5)")->required();
  comp->add_option("--real", ca.real, "Real background (P6)")->required();
  comp->add_option("--mode", ca.mode, "hard or soft")->check(CLI::IsMember({"hard", "soft"}));
  comp->add_option("--out", ca.out, "Output P6 path, '-' for stdout");

  auto* urdf = app.add_subcommand("urdf", "URDF utilities");
  urdf->require_subcommand(1);
  UrdfArgs ua;
  auto* conv = urdf->add_subcommand("convert", "Extract a serial chain as chain JSON");
  conv->add_option("--in", ua.in, "URDF file")->required();
  conv->add_option("--tip", ua.tip, "End link of the chain");
  conv->add_option("--out", ua.out, "Chain JSON path, '-' for stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*fit_seed_opt) sf.seed = fit_seed;

  try {
    if (report->parsed())
      metrics_report(mr);
    else if (shift->parsed())
      metrics_shift(ms);
    else if (fit->parsed())
      sysid_fit(sf);
    else if (synth->parsed())
      sysid_synth(ss);
    else if (rep->parsed())
      replay(rp);
    else if (comp->parsed())
      composite_cmd(ca);
    else if (conv->parsed())
      urdf_convert(ua);
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace realsim::cli
