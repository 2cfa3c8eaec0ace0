#include "lrbms/experiments.hpp"

#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "lrbms/enrich.hpp"
#include "lrbms/errest.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/fom.hpp"
#include "lrbms/greedy.hpp"
#include "lrbms/random.hpp"
#include "lrbms/rangefinder.hpp"
#include "lrbms/rom.hpp"
#include "lrbms/transfer.hpp"

namespace lrbms {

namespace {

class Csv {
 public:
  Csv(const std::string& path, const std::string& header) {
    f_ = std::fopen(path.c_str(), "wb");
    if (!f_) throw config_error("cannot write '" + path + "'");
    std::fputs(header.c_str(), f_);
    std::fputs("\n", f_);
  }
  ~Csv() {
    if (f_) std::fclose(f_);
  }
  void field(const std::string& s) {
    sep();
    std::fputs(s.c_str(), f_);
  }
  void field(long long v) {
    sep();
    std::fprintf(f_, "%lld", v);
  }
  void field(double v) {
    sep();
    std::fprintf(f_, "%.17g", v);
  }
  void endrow() {
    std::fputs("\n", f_);
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) std::fputs(",", f_);
    first_ = false;
  }
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

struct Instance {
  ParamProblem problem;
  FineGrid grid;
  DomainDecomposition dd;
  BlockSpace space;
  ProblemData data;
};

ParamProblem named_problem(const std::string& name) {
  if (name == "manufactured") return manufactured_problem();
  if (name == "channel") return channel_problem();
  if (name == "twoterm") return two_term_problem();
  throw config_error("unknown problem '" + name + "'");
}

SpaceKind named_kind(const std::string& name) {
  if (name == "cg") return SpaceKind::CG;
  if (name == "dg") return SpaceKind::DG;
  throw config_error("space kind must be cg or dg");
}

Instance build_instance(const ParamProblem& problem, int nx, int ny, int mx, int my, SpaceKind kind) {
  Instance inst;
  inst.problem = problem;
  inst.grid = build_grid(problem.domain, nx, ny);
  inst.dd = decompose(inst.grid, mx, my);
  inst.space = build_block_space(inst.grid, inst.dd, kind);
  inst.data = sample_problem(inst.problem, inst.grid);
  return inst;
}

Eigen::VectorXd uniform_mu(const ParamProblem& problem, NormalStream& rng) {
  Eigen::VectorXd mu(problem.p_lo.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    mu[i] = problem.p_lo[i] + (problem.p_hi[i] - problem.p_lo[i]) * rng.uniform();
  return mu;
}

std::string mu_string(const Eigen::VectorXd& mu) {
  char buf[32];
  std::string out;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", mu[i]);
    if (i) out += ";";
    out += buf;
  }
  return out;
}

void write_manifest(const Config& config, const std::string& out_dir) {
  std::FILE* f = std::fopen((out_dir + "/manifest.txt").c_str(), "wb");
  if (!f) throw config_error("cannot write manifest");
  std::fprintf(f, "tool = %s\n", kVersion);
  std::fprintf(f, "eigen = %d.%d.%d\n", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  for (const auto& [k, v] : config.resolved()) std::fprintf(f, "%s = %s\n", k.c_str(), v.c_str());
  std::fclose(f);
}

struct PatchContext {
  Instance inst;
  OversamplingPatch patch;
  TransferSetup setup;
};

PatchContext build_patch_context(Config& config) {
  PatchContext ctx;
  const ParamProblem problem = named_problem(config.get_string("problem", "channel"));
  const int nx = static_cast<int>(config.get_int("nx", 100));
  const int ny = static_cast<int>(config.get_int("ny", 20));
  const int mx = static_cast<int>(config.get_int("mx", 25));
  const int my = static_cast<int>(config.get_int("my", 5));
  const SpaceKind kind = named_kind(config.get_string("kind", "dg"));
  ctx.inst = build_instance(problem, nx, ny, mx, my, kind);
  const int ti = static_cast<int>(config.get_int("target_i", std::min(12, mx - 1)));
  const int tj = static_cast<int>(config.get_int("target_j", std::min(2, my - 1)));
  const int layers = static_cast<int>(config.get_int("layers", 1));
  ctx.patch = oversampling_patch(ctx.inst.grid, ctx.inst.dd, false, ctx.inst.dd.sub_index(ti, tj), layers);
  ctx.setup = make_transfer_setup(ctx.inst.problem, ctx.inst.grid, ctx.inst.dd, ctx.inst.space, ctx.patch,
                                  RangeKind::Subdomain);
  return ctx;
}

void run_fomcheck(Config& config, const std::string& out) {
  const ParamProblem problem = named_problem(config.get_string("problem", "manufactured"));
  const SpaceKind kind = named_kind(config.get_string("kind", "dg"));
  const int nx0 = static_cast<int>(config.get_int("nx0", 8));
  const int levels = static_cast<int>(config.get_int("refinements", 3));
  const int mx = static_cast<int>(config.get_int("mx", 2));
  const int my = static_cast<int>(config.get_int("my", 2));
  config.require_all_consumed();

  Csv csv(out + "/fomcheck.csv", "kind,nx,ny,l2_error,rate");
  double prev = 0.0;
  for (int l = 0; l < levels; ++l) {
    const int nx = nx0 << l;
    const Instance inst = build_instance(problem, nx, nx, mx, my, kind);
    const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space);
    const FomSolution sol = solve_fom(op, inst.problem, inst.problem.center());
    const double err = l2_error_against(inst.grid, inst.dd, inst.space, sol.u, [](double x, double y) {
      return std::sin(M_PI * x) * std::sin(M_PI * y);
    });
    csv.field(kind == SpaceKind::CG ? "cg" : "dg");
    csv.field(static_cast<long long>(nx));
    csv.field(static_cast<long long>(nx));
    csv.field(err);
    csv.field(l == 0 ? 0.0 : std::log2(prev / err));
    csv.endrow();
    prev = err;
  }
}

void run_eigdecay(Config& config, const std::string& out) {
  PatchContext ctx = build_patch_context(config);
  const Eigen::VectorXd mu =
      Eigen::VectorXd::Constant(ctx.inst.problem.p_lo.size(), config.get_double("mu", 0.3));
  const int n = static_cast<int>(config.get_int("n_eigs", 30));
  config.require_all_consumed();

  const TransferOperator op = make_transfer_operator(ctx.setup, ctx.inst.problem, ctx.inst.data, ctx.inst.grid,
                                                     ctx.inst.dd, ctx.inst.space, mu);
  const TransferEig eig = transfer_eigs(ctx.setup, op);
  Csv csv(out + "/eigdecay.csv", "n,lambda");
  for (int j = 0; j < std::min<int>(n, static_cast<int>(eig.lambda.size())); ++j) {
    csv.field(static_cast<long long>(j + 1));
    csv.field(eig.lambda[j]);
    csv.endrow();
  }
}

void run_randrange(Config& config, const std::string& out) {
  PatchContext ctx = build_patch_context(config);
  const Eigen::VectorXd mu =
      Eigen::VectorXd::Constant(ctx.inst.problem.p_lo.size(), config.get_double("mu", 0.3));
  const double tol_hi = config.get_double("tol_hi", 1.0);
  const int decades = static_cast<int>(config.get_int("tol_decades", 4));
  const int runs = static_cast<int>(config.get_int("runs", 10));
  const std::uint64_t seed = config.get_seed("seed", 1);
  RangefinderConfig rf;
  rf.n_t = static_cast<int>(config.get_int("n_t", 10));
  rf.eps_algofail = config.get_double("eps_algofail", 1e-10);
  config.require_all_consumed();

  const TransferOperator op = make_transfer_operator(ctx.setup, ctx.inst.problem, ctx.inst.data, ctx.inst.grid,
                                                     ctx.inst.dd, ctx.inst.space, mu);
  const Eigen::MatrixXd T = assemble_transfer_matrix(op);
  OperatorPair pair;
  pair.ns = ctx.setup.N_S;
  pair.nr = ctx.setup.N_R;
  pair.M_S = &ctx.setup.M_S;
  pair.M_R = &ctx.setup.M_R;
  pair.lambda_min_MS = smallest_eigenvalue_dense(ctx.setup.M_S);
  pair.apply = [&op](const Eigen::VectorXd& z) { return op.apply(z); };

  Csv csv(out + "/randrange.csv", "run,tol,n,true_err,estimator");
  long long run_id = 0;
  for (int d = 0; d < decades; ++d) {
    rf.tol = tol_hi * std::pow(10.0, -d);
    for (int r = 0; r < runs; ++r, ++run_id) {
      rf.seed = seed + static_cast<std::uint64_t>(run_id);
      const RangefinderResult res = adaptive_randomized_range(pair, rf);
      csv.field(run_id);
      csv.field(rf.tol);
      csv.field(static_cast<long long>(res.B.cols()));
      csv.field(projection_error_norm(T, ctx.setup.M_R, ctx.setup.M_S, res.B));
      csv.field(res.estimator_trace.back());
      csv.endrow();
    }
  }
}

void run_greedy(Config& config, const std::string& out) {
  PatchContext ctx = build_patch_context(config);
  GreedyConfig gc;
  gc.eps = config.get_double("epsilon", 1e-3);
  gc.builder = config.get_string("builder", "exact") == "randomized" ? SpaceBuilder::Randomized
                                                                     : SpaceBuilder::ExactEigs;
  gc.with_rhs = config.get_bool("with_rhs", true);
  gc.rangefinder.n_t = static_cast<int>(config.get_int("n_t", 10));
  gc.rangefinder.eps_algofail = config.get_double("eps_algofail", 1e-10);
  const int xi_count = static_cast<int>(config.get_int("xi_count", 8));
  NormalStream rng(config.get_seed("seed", 1));
  config.require_all_consumed();
  for (int i = 0; i < xi_count; ++i) gc.xi.push_back(uniform_mu(ctx.inst.problem, rng));

  const GreedyResult res =
      spectral_greedy(ctx.setup, ctx.inst.problem, ctx.inst.data, ctx.inst.grid, ctx.inst.dd, ctx.inst.space, gc);
  Csv csv(out + "/greedy.csv", "iteration,mu_star,E");
  for (std::size_t i = 0; i < res.deviation_trace.size(); ++i) {
    csv.field(static_cast<long long>(i));
    csv.field(i < res.chosen.size() ? mu_string(res.chosen[i]) : std::string());
    csv.field(res.deviation_trace[i]);
    csv.endrow();
  }
}

void run_enrichment(Config& config, const std::string& out) {
  const ParamProblem problem = named_problem(config.get_string("problem", "channel"));
  const int nx = static_cast<int>(config.get_int("nx", 100));
  const int ny = static_cast<int>(config.get_int("ny", 20));
  const int mx = static_cast<int>(config.get_int("mx", 25));
  const int my = static_cast<int>(config.get_int("my", 5));
  const SpaceKind kind = named_kind(config.get_string("kind", "dg"));
  const std::string marking_name = config.get_string("marking", "combined");
  const int n_online = static_cast<int>(config.get_int("n_online", 10));
  const bool snapshots = config.get_bool("snapshots", true);
  const double delta_factor = config.get_double("delta_factor", 1.05);
  const double delta_override = config.get_double("delta_online", 0.0);
  NormalStream rng(config.get_seed("seed", 1));
  config.require_all_consumed();

  MarkingConfig marking;
  if (marking_name == "uniform")
    marking.strategy = MarkingStrategy::Uniform;
  else if (marking_name == "doerfler")
    marking.strategy = MarkingStrategy::Doerfler;
  else if (marking_name == "age")
    marking.strategy = MarkingStrategy::Age;
  else if (marking_name == "combined")
    marking.strategy = MarkingStrategy::Combined;
  else
    throw config_error("unknown marking strategy '" + marking_name + "'");

  Instance inst = build_instance(problem, nx, ny, mx, my, kind);
  const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space);
  const InnerProduct vh = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
  RomState rom(op, inst.problem, inst.grid, inst.dd, inst.space, vh.M);
  seed_macro_q1(rom, inst.grid);
  if (snapshots) {
    rom.insert_global_snapshot(solve_fom(op, inst.problem, inst.problem.p_lo).u);
    rom.insert_global_snapshot(solve_fom(op, inst.problem, inst.problem.p_hi).u);
  }

  std::vector<Eigen::VectorXd> online;
  for (int i = 0; i < n_online; ++i) online.push_back(uniform_mu(inst.problem, rng));

  const Eigen::VectorXd mu_bar = inst.problem.center();
  const Estimator estimate = [&](const Eigen::VectorXd& mu, const Eigen::VectorXd& reduced) {
    return flux_estimate_rom(rom, inst.grid, inst.data, mu, reduced, mu_bar, mu_bar);
  };

  double delta_online = delta_override;
  if (delta_online <= 0.0) {
    double floor = 0.0;
    for (const auto& mu : online) {
      const FomSolution ref = solve_fom(op, inst.problem, mu);
      const ErrorReport rep =
          flux_estimate(inst.grid, inst.dd, inst.space, inst.problem, inst.data, op, ref.u, mu, mu_bar, mu_bar);
      floor = std::max(floor, rep.global);
    }
    delta_online = delta_factor * floor;
  }

  Csv csv(out + "/enrichment.csv", "step,mu,eta,marked,accepted,rejected,total_basis");
  std::vector<int> ages;
  long long step_id = 0;
  bool all_converged = true;
  for (const auto& mu : online) {
    const EnrichmentHistory hist = enrich_online(rom, inst.grid, estimate, mu, marking, delta_online, ages);
    all_converged = all_converged && hist.converged;
    for (const auto& s : hist.steps) {
      csv.field(step_id++);
      csv.field(mu_string(s.mu));
      csv.field(s.eta);
      csv.field(static_cast<long long>(s.marked));
      csv.field(static_cast<long long>(s.accepted));
      csv.field(static_cast<long long>(s.rejected));
      csv.field(static_cast<long long>(s.total_basis));
      csv.endrow();
    }
  }
  {
    Csv sizes(out + "/subdomain_sizes.csv", "m,I,J,size");
    for (int m = 0; m < rom.n_subdomains(); ++m) {
      const auto [I, J] = inst.dd.sub_ij(m);
      sizes.field(static_cast<long long>(m));
      sizes.field(static_cast<long long>(I));
      sizes.field(static_cast<long long>(J));
      sizes.field(static_cast<long long>(rom.basis_size(m)));
      sizes.endrow();
    }
  }
  if (!all_converged) throw numerical_error("enrichment hit the step cap before reaching the tolerance");
}

}  // namespace

void run_experiment(Config& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string experiment = config.require_string("experiment");
  if (experiment == "fomcheck")
    run_fomcheck(config, out_dir);
  else if (experiment == "eigdecay")
    run_eigdecay(config, out_dir);
  else if (experiment == "randrange")
    run_randrange(config, out_dir);
  else if (experiment == "greedy")
    run_greedy(config, out_dir);
  else if (experiment == "enrichment")
    run_enrichment(config, out_dir);
  else
    throw config_error("unknown experiment '" + experiment + "'");
  write_manifest(config, out_dir);
}

}  // namespace lrbms
