#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <tbb/global_control.h>

#include "seg/engine.hpp"
#include "seg/hji.hpp"
#include "seg/io.hpp"
#include "seg/scene.hpp"
#include "seg/server.hpp"
#include "seg/session.hpp"
#include "seg/visibility.hpp"

namespace seg::cli {
namespace fs = std::filesystem;
namespace {

Scene load_config_scene(const RunConfig& c) {
  Scene scene = load_scene(c.scene);
  if (c.f_p >= 0.0) scene.pursuer_speed = c.f_p;
  if (c.f_e >= 0.0) scene.evader_speed = c.f_e;
  if (!c.pursuers.empty()) scene.pursuers = static_cast<int>(parse_cells(c.pursuers).size());
  if (!c.evaders.empty()) scene.evaders = static_cast<int>(parse_cells(c.evaders).size());
  return scene;
}

AuxiliaryBase parse_auxiliary(const std::string& text) {
  if (text == "visibility") return AuxiliaryBase::kVisibility;
  if (text == "occluder") return AuxiliaryBase::kOccluder;
  throw std::invalid_argument("auxiliary must be 'visibility' or 'occluder'");
}

ControllerSpec config_controller(const RunConfig& c) {
  ControllerSpec spec = parse_controller(c.controller);
  spec.noise_fraction = c.noise;
  spec.dirichlet_alpha = c.alpha;
  spec.temperature = c.tau;
  return spec;
}

GameOptions game_options(const RunConfig& c) {
  GameOptions o;
  o.v_min = c.v_min;
  o.auxiliary = parse_auxiliary(c.auxiliary);
  return o;
}

GameState config_start(const RunConfig& c, const GameContext& ctx) {
  GameState start = default_start(ctx);
  if (!c.pursuers.empty()) start.pursuers = parse_cells(c.pursuers);
  if (!c.evaders.empty()) start.evaders = parse_cells(c.evaders);
  return start;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  io::write_text(path, j.dump(2) + "\n");
}

}  // namespace

int cmd_fields(const RunConfig& c) {
  const Scene scene = load_config_scene(c);
  const Grid2D grid(c.m);
  const ScalarField phi = signed_distance(scene, grid);
  const Point vantage = parse_point(c.vantage);
  const VantageFields f = vantage_fields(phi, vantage, parse_auxiliary(c.auxiliary));
  const fs::path out(c.out);
  const std::pair<const char*, const ScalarField*> panels[] = {
      {"phi", &f.occluder},         {"visibility", &f.visibility},
      {"grazing", &f.grazing},      {"auxiliary", &f.auxiliary},
      {"auxiliary_visibility", &f.auxiliary_visibility}, {"shadow", &f.shadow}};
  for (const auto& [name, field] : panels) {
    io::write_field(out / name, *field, name);
    io::write_pgm(out / (std::string(name) + ".pgm"), grid.m(), io::sign_palette(*field));
  }
  spdlog::info("wrote 6 fields for vantage ({}, {}) to {}", vantage.x, vantage.y, out.string());
  return 0;
}

int cmd_solve(const RunConfig& c) {
  const Scene scene = load_config_scene(c);
  const Grid2D grid(c.m);
  const fs::path out(c.out);
  fs::create_directories(out);
  std::ofstream log(out / "convergence.log", std::ios::trunc);
  log.precision(17);

  if (c.stationary) {
    StationaryOptions o;
    o.dt = c.dt;
    o.stop_tolerance = c.stop_tol;
    o.max_time = c.max_time;
    o.epsilon_cells = c.eps_cells;
    o.v_min = c.v_min;
    o.auxiliary = parse_auxiliary(c.auxiliary);
    const ScalarField phi = signed_distance(scene, grid);
    const StationarySolution sol =
        solve_stationary_pursuer(phi, parse_point(c.pursuer), scene.evader_speed, o);
    for (std::size_t n = 0; n < sol.change_log.size(); ++n) {
      log << n + 1 << ' ' << sol.change_log[n] << '\n';
    }
    ScalarField reported = sol.value;
    for (std::size_t k = 0; k < reported.size(); ++k) {
      if (!(phi[k] > 0.0)) reported[k] = kLarge;
    }
    io::write_field(out / "stationary", reported, "stationary_value");
    double top = 0.0;
    for (std::size_t k = 0; k < reported.size(); ++k) {
      if (phi[k] > 0.0) top = std::max(top, reported[k]);
    }
    io::write_pgm(out / "stationary.pgm", grid.m(), io::ramp_palette(reported, 0.0, top));
    spdlog::info("stationary solve: {} steps, final L1 change {:.3e}", sol.iterations,
                 sol.last_change);
    std::cout << "iterations " << sol.iterations << "\nlast_change " << sol.last_change << "\n";
    return 0;
  }

  HjiOptions o;
  o.horizon = c.horizon;
  o.dt = c.dt;
  o.stop_tolerance = c.stop_tol;
  o.epsilon_cells = c.eps_cells;
  o.v_min = c.v_min;
  o.auxiliary = parse_auxiliary(c.auxiliary);
  o.max_cells_per_side = c.max_side;
  o.on_step = [&](std::int64_t n, double change) {
    log << n << ' ' << change << '\n';
    if (n % 100 == 0) spdlog::debug("step {} L1 change {:.3e}", n, change);
  };
  const HjiProblem problem(scene, grid, o);
  ValueFunction4D v = solve_value_function(problem, o);
  v.values() = reported_values(problem, v);
  io::write_value(out / "value", v);
  spdlog::info("HJI solve: {} steps of dt {:.3e}, final L1 change {:.3e}", v.iterations, v.dt,
               v.last_change);
  std::cout << "iterations " << v.iterations << "\nlast_change " << v.last_change << "\n";
  return 0;
}

int cmd_slice(const RunConfig& c) {
  const ValueFunction4D v = io::read_value(c.value);
  if (c.fix_pursuer.empty() == c.fix_evader.empty()) {
    throw std::invalid_argument("give exactly one of --fix-pursuer or --fix-evader");
  }
  const bool pursuer = !c.fix_pursuer.empty();
  const Cell at = parse_cell(pursuer ? c.fix_pursuer : c.fix_evader);
  if (!v.grid().contains(at)) throw std::invalid_argument("slice cell outside the grid");
  const ScalarField slice = pursuer ? slice_fixed_pursuer(v, at) : slice_fixed_evader(v, at);
  const fs::path out(c.out);
  io::write_field(out / "slice", slice, pursuer ? "value_fixed_pursuer" : "value_fixed_evader");
  io::write_pgm(out / "slice.pgm", v.m(), io::ramp_palette(slice, 0.0, v.horizon));
  return 0;
}

int cmd_play(const RunConfig& c) {
  const Scene scene = load_config_scene(c);
  const fs::path out(c.out);

  if (!c.xp.empty() || !c.xe.empty()) {
    // Continuous playback under the HJI feedback controls.
    const ValueFunction4D v = io::read_value(c.value);
    HjiOptions o;
    o.epsilon_cells = c.eps_cells;
    o.v_min = c.v_min;
    o.auxiliary = parse_auxiliary(c.auxiliary);
    o.max_cells_per_side = std::max(c.max_side, v.m());
    const HjiProblem problem(scene, v.grid(), o);
    const double dt = c.dt > 0.0 ? c.dt
                                 : v.grid().h() / (4.0 * std::max(scene.pursuer_speed,
                                                                  scene.evader_speed));
    const Trajectory t =
        play_hji_trajectory(problem, v, parse_point(c.xp), parse_point(c.xe), dt, c.max_steps);
    nlohmann::json j;
    j["outcome"] = to_string(t.outcome);
    j["end_time"] = t.end_time;
    j["samples"] = nlohmann::json::array();
    for (const auto& s : t.samples) {
      j["samples"].push_back({{"t", s.time},
                              {"pursuer", {s.pursuer.x, s.pursuer.y}},
                              {"evader", {s.evader.x, s.evader.y}}});
    }
    write_json(out / "trajectory.json", j);
    std::cout << "outcome " << to_string(t.outcome) << "\nend_time " << t.end_time << "\n";
    return 0;
  }

  const GameContext ctx(scene, Grid2D(c.m), game_options(c));
  const GameState start = config_start(c, ctx);
  Controller controller(ctx, config_controller(c), c.k_max, c.seed);
  std::string traces;
  if (c.trace) {
    if (controller.spec().kind != ControllerKind::kMcts) {
      throw std::invalid_argument("--trace needs an mcts(...) controller");
    }
    controller.set_record_trace(true);
  }
  int turn = 0;
  GameRecord record = run_game(ctx, start, controller, c.k_max,
                               [&](const TurnRecord&, const Controller& ctl) {
                                 ++turn;
                                 if (!c.trace || !ctl.last_search()) return;
                                 for (const auto& e : ctl.last_search()->trace) {
                                   nlohmann::json j = {{"turn", turn}};
                                   j["iteration"] = e.iteration;
                                   j["path"] = e.path;
                                   j["depth"] = e.path.size();
                                   j["value"] = e.leaf_value;
                                   j["terminal"] = e.terminal;
                                   traces += j.dump() + "\n";
                                 }
                               });
  record.seed = c.seed;
  write_json(out / "record.json", to_json(record));
  if (c.trace) io::write_text(out / "trace.jsonl", traces);
  spdlog::info("{} after {} turns", to_string(record.outcome), record.length());
  std::cout << "outcome " << to_string(record.outcome) << "\nturns " << record.length() << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& c) {
  const Scene scene = load_config_scene(c);
  const GameContext ctx(scene, Grid2D(c.m), game_options(c));
  SweepOptions o;
  o.pursuers = parse_cells(c.pursuers);
  o.fixed_evaders = parse_cells(c.fixed_evaders);
  o.k_max = c.k_max;
  o.seed = c.seed;
  const ControllerSpec spec = config_controller(c);
  const SweepResult r = run_match_statistics(ctx, spec, o);
  const fs::path out(c.out);
  io::write_text(out / "sweep.csv", sweep_csv(r));
  nlohmann::json summary = sweep_summary(r);
  summary["controller"] = to_json(spec);
  summary["mean_turns"] = r.dt > 0.0 ? r.mean_time() / r.dt : 0.0;
  write_json(out / "summary.json", summary);
  const ScalarField slice = sweep_slice(ctx.grid(), r);
  io::write_field(out / "slice", slice, "game_length");
  io::write_pgm(out / "slice.pgm", c.m, io::ramp_palette(slice, 0.0, c.k_max));
  std::cout << "win_pct " << r.win_pct() << "\nmean_time " << r.mean_time() << "\nn_games "
            << r.games() << "\nfiltered " << r.filtered << "\n";
  return 0;
}

int cmd_histogram(const RunConfig& c) {
  const fs::path out(c.out);
  std::vector<mcts::TraceEntry> trace;
  double dt = c.dt;
  if (!c.trace_file.empty()) {
    trace = trace_from_json_lines(io::read_text(c.trace_file));
    if (!(dt > 0.0)) {
      const Scene scene = load_config_scene(c);
      dt = 1.5 * Grid2D(c.m).h() / scene.evader_speed;
    }
  } else {
    const Scene scene = load_config_scene(c);
    const GameContext ctx(scene, Grid2D(c.m), game_options(c));
    const ControllerSpec spec = config_controller(c);
    if (spec.kind != ControllerKind::kMcts) {
      throw std::invalid_argument("histogram needs --trace-file or an mcts(...) controller");
    }
    const GameState start = config_start(c, ctx);
    ctx.validate(start);
    mcts::SearchOptions o;
    o.iterations = spec.iterations;
    o.noise_fraction = spec.noise_fraction;
    o.dirichlet_alpha = spec.dirichlet_alpha;
    o.temperature = spec.temperature;
    o.seed = c.seed;
    o.record_trace = true;
    const Evaluator evaluator = make_evaluator(ctx, spec.evaluator, splitmix64(c.seed));
    const auto result = search_pursuer_move(ctx, start, evaluator, c.k_max, o);
    trace = result.trace;
    io::write_text(out / "trace.jsonl", trace_to_json_lines(trace));
    dt = ctx.dt();
  }
  const LeafDepthHistogram h = leaf_depth_histogram(trace, dt, c.block);
  write_json(out / "histogram.json", to_json(h));
  std::cout << "leaves " << h.total() << "\nblocks " << h.counts.size() << "\n";
  return 0;
}

int cmd_serve(const RunConfig& c) {
  SessionDefaults d;
  d.scene = load_config_scene(c);
  d.m = c.m;
  d.controller = c.controller;
  d.k_max = c.k_max;
  auto sessions = std::make_shared<SessionManager>(d);
  ServerOptions o;
  o.address = c.address;
  o.port = static_cast<unsigned short>(c.port);
  o.threads = c.workers > 0 ? c.workers : std::max(1u, std::thread::hardware_concurrency());
  o.handle_signals = true;
  Server server(sessions, o);
  const unsigned short port = server.start();
  spdlog::info("listening on http://{}:{}", c.address, port);
  std::cout << "listening on " << c.address << ":" << port << std::endl;
  server.wait();
  server.stop();
  return 0;
}

namespace {

void setup_logging() {
  auto logger = spdlog::get("seg");
  if (!logger) logger = spdlog::stderr_color_mt("seg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SEG_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

// Pre-scan so the config file's values become the flag defaults.
std::string find_config_path(int argc, char** argv) {
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--config" && k + 1 < argc) return argv[k + 1];
    if (arg.starts_with("--config=")) return arg.substr(9);
  }
  return {};
}

void add_shared(CLI::App* app, RunConfig& c) {
  app->add_option("--scene", c.scene, "Scene JSON file")->capture_default_str();
  app->add_option("--m", c.m, "Grid cells per side")->capture_default_str();
  app->add_option("--fp", c.f_p, "Pursuer speed override (negative keeps the scene's)")
      ->capture_default_str();
  app->add_option("--fe", c.f_e, "Evader speed override (negative keeps the scene's)")
      ->capture_default_str();
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--auxiliary", c.auxiliary, "Auxiliary base: visibility or occluder")
      ->capture_default_str();
  app->add_option("--v-min", c.v_min, "Speed inside obstacles")->capture_default_str();
}

void add_game(CLI::App* app, RunConfig& c) {
  app->add_option("--controller", c.controller,
                  "distance | shadow | blend | uniform | stay | mcts(<evaluator>,<M>)")
      ->capture_default_str();
  app->add_option("--k-max", c.k_max, "Turn limit K_max")->capture_default_str();
  app->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
  app->add_option("--noise", c.noise, "MCTS Dirichlet noise fraction")->capture_default_str();
  app->add_option("--alpha", c.alpha, "MCTS Dirichlet concentration")->capture_default_str();
  app->add_option("--tau", c.tau, "MCTS visit-count temperature")->capture_default_str();
  app->add_option("--pursuers", c.pursuers, "Pursuer cells i,j;i,j (empty: default)")
      ->capture_default_str();
}

}  // namespace

int run(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Surveillance-evasion game lab"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  try {
    config_path = find_config_path(argc, argv);
    if (!config_path.empty()) {
      apply_json(c, nlohmann::json::parse(io::read_text(config_path)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: config " << config_path << ": " << e.what() << "\n";
    return 2;
  }
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--workers", c.workers, "Worker threads (0 = all cores)")->capture_default_str();

  auto* fields = app.add_subcommand("fields", "Dump phi, psi, grazing, auxiliary and xi fields");
  add_shared(fields, c);
  fields->add_option("--vantage", c.vantage, "Vantage point x,y")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve the HJI value function");
  add_shared(solve, c);
  solve->add_option("--T", c.horizon, "Horizon T")->capture_default_str();
  solve->add_option("--dt", c.dt, "Time step (0: CFL limit, or h/20 when stationary)")
      ->capture_default_str();
  solve->add_option("--stop-tol", c.stop_tol, "Stop when the L1 change drops below this")
      ->capture_default_str();
  solve->add_option("--eps-cells", c.eps_cells, "Speed regularization width in cells")
      ->capture_default_str();
  solve->add_option("--max-side", c.max_side, "Largest m accepted by the 4-D solver")
      ->capture_default_str();
  solve->add_flag("--stationary", c.stationary, "Stationary pursuer (2-D) solve");
  solve->add_option("--pursuer", c.pursuer, "Stationary pursuer position x,y")
      ->capture_default_str();
  solve->add_option("--max-time", c.max_time, "Stationary solve time limit")
      ->capture_default_str();

  auto* slice = app.add_subcommand("slice", "Extract a 2-D slice of a value dump");
  slice->add_option("--value", c.value, "Value dump stem")->capture_default_str();
  slice->add_option("--fix-pursuer", c.fix_pursuer, "Pursuer cell i,j");
  slice->add_option("--fix-evader", c.fix_evader, "Evader cell i,j");
  slice->add_option("--out", c.out, "Output directory")->capture_default_str();

  auto* play = app.add_subcommand("play", "Play one game and write its GameRecord");
  add_shared(play, c);
  add_game(play, c);
  play->add_option("--evaders", c.evaders, "Evader cells i,j;i,j (empty: default)")
      ->capture_default_str();
  play->add_flag("--trace", c.trace, "Export MCTS search traces (JSON lines)");
  play->add_option("--value", c.value, "Value dump stem for HJI playback")->capture_default_str();
  play->add_option("--xp", c.xp, "HJI playback: pursuer start x,y");
  play->add_option("--xe", c.xe, "HJI playback: evader start x,y");
  play->add_option("--dt", c.dt, "HJI playback step (0: h / (4 max speed))")
      ->capture_default_str();
  play->add_option("--max-steps", c.max_steps, "HJI playback step limit")->capture_default_str();
  play->add_option("--eps-cells", c.eps_cells, "Speed regularization width in cells")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "One game per free evader start cell");
  add_shared(sweep, c);
  add_game(sweep, c);
  sweep->add_option("--fixed-evaders", c.fixed_evaders, "Cells of evaders 1.. i,j;i,j")
      ->capture_default_str();

  auto* histogram = app.add_subcommand("histogram", "Leaf-depth histogram of an MCTS search");
  add_shared(histogram, c);
  add_game(histogram, c);
  histogram->add_option("--evaders", c.evaders, "Evader cells i,j;i,j (empty: default)")
      ->capture_default_str();
  histogram->add_option("--trace-file", c.trace_file, "Existing trace (JSON lines)");
  histogram->add_option("--dt", c.dt, "Game time per depth level (0: 1.5 h / f_E)")
      ->capture_default_str();
  histogram->add_option("--block", c.block, "Iterations per histogram block")
      ->capture_default_str();

  auto* serve = app.add_subcommand("serve", "HTTP + WebSocket server for live play");
  add_shared(serve, c);
  serve->add_option("--controller", c.controller, "Default pursuer controller")
      ->capture_default_str();
  serve->add_option("--k-max", c.k_max, "Default turn limit")->capture_default_str();
  serve->add_option("--address", c.address, "Bind address")->capture_default_str();
  serve->add_option("--port", c.port, "Port (0 picks a free one)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  setup_logging();
  const int workers =
      c.workers > 0 ? c.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  tbb::global_control limit(tbb::global_control::max_allowed_parallelism, workers);

  try {
    if (*fields) return cmd_fields(c);
    if (*solve) return cmd_solve(c);
    if (*slice) return cmd_slice(c);
    if (*play) return cmd_play(c);
    if (*sweep) return cmd_sweep(c);
    if (*histogram) return cmd_histogram(c);
    if (*serve) return cmd_serve(c);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

}  // namespace seg::cli
