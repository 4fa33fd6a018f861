#include "cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/problem.hpp"
#include "cli/report.hpp"
#include "dgame/error.hpp"
#include "dgame/feedback.hpp"
#include "dgame/forward.hpp"
#include "dgame/inverse.hpp"

namespace dgame::cli {
namespace {

constexpr const char* kVersion = "0.1.0";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIrregularPencil:
    case ErrorKind::kImpulsiveModes:
    case ErrorKind::kNotStabilizable:
    case ErrorKind::kNotIndexPreserving:
      return kExitAssumption;
    case ErrorKind::kNoConvergence:
    case ErrorKind::kSingularLyapunov:
      return kExitNoEquilibrium;
    case ErrorKind::kNumericalRank:
      return kExitEmptySet;
    case ErrorKind::kUnstableLoop:
    case ErrorKind::kInconsistentState:
      return kExitUnstable;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kNotSymmetric:
    case ErrorKind::kDegenerateData:
      return kExitUsage;
  }
  return kExitUsage;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt(const Spectrum& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k > 0) out += ", ";
    out += fmt(s[k].real());
    if (s[k].imag() != 0.0) out += (s[k].imag() > 0 ? "+" : "-") + fmt(std::abs(s[k].imag())) + "i";
  }
  return out + "}";
}

class Context {
 public:
  Context(const std::filesystem::path& path, const Options& opts, std::ostream& out)
      : opts_(opts), out_(out), problem_(load_problem(path)) {
    report_["meta"] = {{"version", kVersion},
                       {"problem", path.filename().string()},
                       {"seed", opts.seed},
                       {"tol", opts.tol},
                       {"starts", opts.starts},
                       {"eps_pd", opts.eps_pd}};
  }

  const Problem& problem() const { return problem_; }
  const Options& opts() const { return opts_; }
  std::ostream& out() { return out_; }
  Json& report() { return report_; }

  ForwardOptions forward_options() const {
    ForwardOptions f;
    f.n_starts = opts_.starts;
    f.seed = opts_.seed;
    f.tol = opts_.tol;
    return f;
  }
  IdentifyOptions identify_options() const {
    IdentifyOptions o;
    o.eps_pd = opts_.eps_pd;
    o.seed = opts_.seed;
    return o;
  }

  // Pencil section; returns false (and sets the report) when the open-loop
  // pencil violates the standing assumptions.
  void pencil_section() {
    const Pencil p{problem_.game.e, problem_.game.a};
    Json pj;
    const bool regular = is_regular(p);
    pj["regular"] = regular;
    if (regular) {
      const int index = index_of(p);
      pj["index"] = index;
      if (index <= 1) {
        const WeierstrassData w = weierstrass(p);
        pj["r"] = w.r;
        pj["finite_spectrum"] = to_json(linalg::eigvals(w.j));
      }
    }
    report_["pencil"] = pj;
  }

  const ReducedGame& reduced() {
    if (!rg_) rg_ = reduce_game(problem_.game);
    return *rg_;
  }

  const CostParameters& costs() const {
    const CostParameters* c = select_costs(problem_, opts_.cost_set);
    if (!c) {
      throw Error(ErrorKind::kInvalidArgument,
                  opts_.cost_set.empty() ? "problem has no costs"
                                         : "no cost set named '" + opts_.cost_set + "'");
    }
    return *c;
  }

  Mat observed_f() {
    if (!opts_.trajectory.empty()) {
      const Trajectory t = read_trajectory_csv(opts_.trajectory, problem_.game.n(),
                                               problem_.game.m_total());
      const FeedbackFit fit = fit_feedback(t);
      report_["fit"] = {{"rank", fit.rank},
                        {"rank_deficient", fit.rank_deficient},
                        {"residual", fit.residual},
                        {"F", to_json(fit.f)}};
      return fit.f;
    }
    if (!problem_.f) throw Error(ErrorKind::kInvalidArgument, "problem has no observed F");
    return *problem_.f;
  }

  // Omega(F) after checking admissibility.
  Mat observed_f_bar(const Mat& f) {
    const FsCheck fs = in_fs(problem_.game, f);
    report_["observed"] = {{"admissible", fs.ok}, {"reason", fs.reason},
                           {"spectrum", to_json(fs.spectrum)}};
    if (!fs.ok) {
      const bool unstable = fs.reason == "finite spectrum not stable";
      throw Error(unstable ? ErrorKind::kUnstableLoop : ErrorKind::kNotIndexPreserving,
                  "observed feedback not admissible: " + fs.reason);
    }
    return omega(reduced(), f);
  }

  Vec x1_0() const {
    const Index r = rg_ ? rg_->r() : 0;
    if (opts_.x1.empty()) return Vec::Ones(r);
    if (static_cast<Index>(opts_.x1.size()) != r) {
      throw Error(ErrorKind::kInvalidArgument, "--x1 needs " + std::to_string(r) + " entries");
    }
    return Eigen::Map<const Vec>(opts_.x1.data(), r);
  }

  std::vector<Vec> thetas_from_file() const {
    std::ifstream in(opts_.theta_file);
    if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + opts_.theta_file);
    Json j;
    try {
      in >> j;
    } catch (const Json::parse_error& e) {
      throw Error(ErrorKind::kInvalidArgument, opts_.theta_file + ": " + e.what());
    }
    const Json& arr = j.is_object() && j.contains("theta") ? j["theta"] : j;
    return parse_thetas(arr, ThetaLayout::of(problem_.game));
  }

  void finish() {
    if (!opts_.out.empty()) write_atomic(opts_.out, dump(report_));
  }

 private:
  const Options& opts_;
  std::ostream& out_;
  Problem problem_;
  std::optional<ReducedGame> rg_;
  Json report_;
};

Json behaviors_json(const BehaviorReport& br) {
  Json list = Json::array();
  for (const Behavior& b : br.behaviors) {
    list.push_back({{"spectrum", to_json(b.solution.spectrum)},
                    {"f_bar", to_json(b.solution.f_bar)},
                    {"matches", b.matches},
                    {"distance", b.distance}});
  }
  return Json{{"count", br.behaviors.size()}, {"matching", br.matching()}, {"list", list}};
}

void print_behaviors(std::ostream& os, const BehaviorReport& br) {
  os << "behaviors: " << br.behaviors.size() << " (" << br.matching()
     << " matching the observation)\n";
  for (const Behavior& b : br.behaviors) {
    os << "  spectrum " << fmt(b.solution.spectrum) << "  distance " << fmt(b.distance)
       << (b.matches ? "  [match]" : "") << "\n";
  }
}

int cmd_reduce(Context& ctx) {
  ctx.pencil_section();
  const Json& pj = ctx.report()["pencil"];
  std::ostream& os = ctx.out();
  if (!pj["regular"].get<bool>()) {
    os << "pencil is not regular\n";
    throw Error(ErrorKind::kIrregularPencil, "irregular pencil");
  }
  const int index = pj["index"].get<int>();
  os << "regular pencil, index " << index << "\n";
  if (index >= 2) throw Error(ErrorKind::kImpulsiveModes, "impulsive modes present");
  const ReducedGame& rg = ctx.reduced();
  os << "rank E = " << rg.r() << ", finite spectrum " << fmt(linalg::eigvals(rg.j()))
     << "\n";
  if (index == 0) os << "E is invertible: standard LQ differential game\n";
  Json b1 = Json::array(), b2 = Json::array();
  for (Index i = 0; i < rg.n_players(); ++i) {
    b1.push_back(to_json(rg.b1[i]));
    b2.push_back(to_json(rg.b2[i]));
  }
  ctx.report()["reduced"] = {{"J", to_json(rg.j())}, {"B1", b1}, {"B2", b2},
                             {"X", to_json(rg.w.x)}, {"Y", to_json(rg.w.y)},
                             {"standard_game", index == 0}};
  return kExitOk;
}

int cmd_forward(Context& ctx) {
  ctx.pencil_section();
  const ReducedGame& rg = ctx.reduced();
  const CostParameters& c = ctx.costs();
  const ForwardResult res = solve_fbne(rg, c, ctx.forward_options());
  Json list = Json::array();
  for (const EquilibriumSolution& s : res.solutions) list.push_back(to_json(s));
  ctx.report()["forward"] = list;
  ctx.report()["forward_diagnostics"] = {
      {"starts_tried", res.diagnostics.starts_tried},
      {"starts_converged", res.diagnostics.starts_converged},
      {"starts_aborted", res.diagnostics.starts_aborted},
      {"scale", tolerance_scale(rg, c)}};
  std::ostream& os = ctx.out();
  os << res.solutions.size() << " stabilizing equilibri"
     << (res.solutions.size() == 1 ? "um" : "a") << "\n";
  for (const EquilibriumSolution& s : res.solutions) {
    os << "  spectrum " << fmt(s.spectrum) << "  stationarity residual "
       << fmt(s.stationarity_residual) << "\n";
  }
  return res.solutions.empty() ? kExitNoEquilibrium : kExitOk;
}

Json certificate_json(const InverseCertificate& cert, const ReducedGame& rg) {
  Json players = Json::array();
  for (std::size_t i = 0; i < cert.players.size(); ++i) {
    const PlayerCertificate& p = cert.players[i];
    const Index l = static_cast<Index>(p.support.size());
    players.push_back({{"residual", p.residual},
                       {"pd_margin", p.pd_margin},
                       {"feasible", p.feasible},
                       {"theta", to_json(p.theta)},
                       {"kernel_dim", p.kernel.cols()},
                       {"L", l},
                       {"bound", l - rg.r() * rg.m(i)}});
  }
  return players;
}

int cmd_inverse(Context& ctx) {
  ctx.pencil_section();
  const ReducedGame& rg = ctx.reduced();
  const Mat f_bar = ctx.observed_f_bar(ctx.observed_f());
  StructuralConstraints sc = ctx.problem().constraints;
  sc.diagonal_q = sc.diagonal_q || ctx.opts().diagonal_q;
  const InverseCertificate cert = identify(rg, f_bar, sc, ctx.identify_options());
  ctx.report()["inverse"] = certificate_json(cert, rg);
  dimension_report(cert, rg);
  std::ostream& os = ctx.out();
  for (std::size_t i = 0; i < cert.players.size(); ++i) {
    const PlayerCertificate& p = cert.players[i];
    os << "player " << i + 1 << ": residual " << fmt(p.residual) << ", margin "
       << fmt(p.pd_margin) << ", kernel dim " << p.kernel.cols() << " -> "
       << (p.feasible ? "feasible" : "infeasible") << "\n";
  }
  if (!cert.feasible()) {
    os << "solution set is empty\n";
    return kExitEmptySet;
  }
  const BehaviorReport br = rationalized_behaviors(rg, cert, f_bar, ctx.forward_options());
  ctx.report()["behaviors"] = behaviors_json(br);
  print_behaviors(os, br);
  return kExitOk;
}

int cmd_misspecify(Context& ctx) {
  ctx.pencil_section();
  const ReducedGame& rg = ctx.reduced();
  const Mat f = ctx.observed_f();
  const Mat f_bar = ctx.observed_f_bar(f);
  const Index n = ctx.problem().game.n();
  DescriptorGame ode = ctx.problem().game;
  ode.e = Mat::Identity(n, n);
  const ReducedGame rg_ode = reduce_game(ode);
  std::ostream& os = ctx.out();

  std::vector<Vec> thetas;
  Json mis;
  if (!ctx.opts().theta_file.empty()) {
    thetas = ctx.thetas_from_file();
    mis["source"] = "file";
  } else {
    // The observed feedback need not be stabilizing for the ODE model; the
    // conditions are then used as plain algebraic equations.
    const FsCheck fs = in_fs(ode, f);
    IdentifyOptions io = ctx.identify_options();
    io.require_stable = false;
    const InverseCertificate cert =
        identify(rg_ode, omega(rg_ode, f), ctx.problem().constraints, io);
    mis["source"] = "identified with E = I";
    mis["ode_loop_stable"] = fs.ok;
    if (!fs.ok) os << "note: observed feedback does not stabilize the E = I model\n";
    mis["ode_certificate"] = certificate_json(cert, rg_ode);
    if (!cert.feasible()) {
      ctx.report()["misspecify"] = mis;
      os << "identification under E = I is infeasible\n";
      return kExitEmptySet;
    }
    thetas = cert.thetas();
  }

  const ThetaLayout layout = ThetaLayout::of(ctx.problem().game);
  const std::vector<Mat> ms = assemble(rg, f_bar);
  Json players = Json::array();
  bool pd = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double res = (ms[i] * thetas[i]).norm();
    const double margin = gamma2_margin(rg, i, thetas[i], layout);
    pd = pd && margin > 0.0;
    players.push_back({{"theta", to_json(thetas[i])},
                       {"descriptor_residual", res},
                       {"pd_margin", margin}});
    os << "player " << i + 1 << ": descriptor residual " << fmt(res) << ", margin "
       << fmt(margin) << "\n";
  }
  mis["players"] = players;

  if (pd) {
    const CostParameters c = costs_from_thetas(layout, thetas);
    const BehaviorReport br = rationalized_behaviors(rg, c, f_bar, ctx.forward_options());
    ctx.report()["behaviors"] = behaviors_json(br);
    print_behaviors(os, br);
    if (!br.behaviors.empty() && !ctx.opts().csv.empty()) {
      const Vec x1 = ctx.x1_0();
      const Trajectory obs = simulate(rg, f_bar, x1, ctx.opts().horizon, ctx.opts().dt);
      const Trajectory fit = simulate(rg, br.behaviors.front().solution.f_bar, x1,
                                      ctx.opts().horizon, ctx.opts().dt);
      Trajectory err = obs;
      err.x = fit.x - obs.x;
      err.u = fit.u - obs.u;
      mis["error_sup"] = {{"state", linalg::max_abs(err.x)}, {"control", linalg::max_abs(err.u)}};
      std::ostringstream csv;
      write_trajectory_csv(csv, err);
      write_atomic(ctx.opts().csv, csv.str());
    }
  } else {
    mis["note"] = "R_bar_ii not positive definite; forward game not solved";
    os << "misspecified costs violate R_bar_ii > 0; forward game skipped\n";
  }
  ctx.report()["misspecify"] = mis;
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  ctx.pencil_section();
  const ReducedGame& rg = ctx.reduced();
  const Mat f_bar = ctx.observed_f_bar(ctx.observed_f());
  const ThetaLayout layout = ThetaLayout::of(ctx.problem().game);
  std::vector<Vec> thetas;
  if (!ctx.opts().theta_file.empty()) {
    thetas = ctx.thetas_from_file();
  } else if (ctx.problem().theta) {
    thetas = *ctx.problem().theta;
  } else {
    thetas = thetas_from_costs(layout, ctx.costs());
  }
  const std::vector<Mat> ms = assemble(rg, f_bar);
  std::ostream& os = ctx.out();
  Json players = Json::array();
  bool all = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double res = (ms[i] * thetas[i]).norm();
    const double margin = gamma2_margin(rg, i, thetas[i], layout);
    const double tn = thetas[i].norm();
    const bool in_kernel = res <= 1e-7 * (1.0 + ms[i].norm()) * tn;
    const bool member = in_kernel && margin > ctx.opts().eps_pd * (1.0 + tn);
    all = all && member;
    players.push_back({{"residual", res}, {"pd_margin", margin}, {"member", member}});
    os << "player " << i + 1 << ": residual " << fmt(res) << ", margin " << fmt(margin)
       << " -> " << (member ? "member" : "not a member") << "\n";
  }
  ctx.report()["verify"] = {{"players", players}, {"member", all}};
  if (all) {
    const CostParameters c = costs_from_thetas(layout, thetas);
    const ReducedCosts rc(rg, c);
    EquilibriumSolution sol;
    sol.f_bar = f_bar;
    sol.p = rc.values(f_bar);
    const NashCheck nc =
        verify_nash_local(rg, c, sol, ctx.opts().nash_trials, 0.5, ctx.opts().seed);
    ctx.report()["verify"]["nash_local"] = {{"ok", nc.ok},
                                            {"deviations_tested", nc.deviations_tested}};
    os << "local Nash check: " << (nc.ok ? "passed" : "failed") << " ("
       << nc.deviations_tested << " deviations)\n";
    if (!nc.ok) return kExitEmptySet;
  }
  return all ? kExitOk : kExitEmptySet;
}

int cmd_simulate(Context& ctx) {
  const ReducedGame& rg = ctx.reduced();
  Mat f = ctx.observed_f();
  const Mat f_bar = ctx.observed_f_bar(f);
  if (ctx.opts().preimage_seed) f = preimage_sample(rg, f_bar, *ctx.opts().preimage_seed);
  const Vec x0 = consistent_initial(rg.w, rg.b2_all, f_bar, ctx.x1_0());
  const Trajectory t = simulate_descriptor(ctx.problem().game, f, x0, ctx.opts().horizon,
                                           ctx.opts().dt);
  std::ostringstream csv;
  write_trajectory_csv(csv, t);
  if (ctx.opts().csv.empty()) {
    ctx.out() << csv.str();
  } else {
    write_atomic(ctx.opts().csv, csv.str());
    ctx.out() << t.t.size() << " samples written to " << ctx.opts().csv << "\n";
  }
  ctx.report()["simulate"] = {{"F", to_json(f)},
                              {"x0", to_json(x0)},
                              {"samples", t.t.size()},
                              {"final_state_norm", t.x.bottomRows(1).norm()}};
  return kExitOk;
}

}  // namespace

int run_command(const std::string& command, const std::filesystem::path& problem,
                const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    Context ctx(problem, opts, out);
    int code = kExitUsage;
    try {
      if (command == "reduce") code = cmd_reduce(ctx);
      else if (command == "forward") code = cmd_forward(ctx);
      else if (command == "inverse") code = cmd_inverse(ctx);
      else if (command == "misspecify") code = cmd_misspecify(ctx);
      else if (command == "verify") code = cmd_verify(ctx);
      else if (command == "simulate") code = cmd_simulate(ctx);
      else throw Error(ErrorKind::kInvalidArgument, "unknown command '" + command + "'");
    } catch (const Error& e) {
      code = exit_code_for(e.kind());
      ctx.report()["error"] = {{"kind", std::string(to_string(e.kind()))},
                               {"message", e.what()}};
      err << "error: " << e.what() << "\n";
    }
    ctx.report()["meta"]["exit_code"] = code;
    ctx.finish();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace dgame::cli
