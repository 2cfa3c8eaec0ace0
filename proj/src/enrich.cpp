#include "lrbms/enrich.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "lrbms/errors.hpp"

namespace lrbms {

std::vector<int> mark(const Eigen::VectorXd& indicators, const MarkingConfig& config, const std::vector<int>& ages,
                      double eta, double delta_online) {
  const int M = static_cast<int>(indicators.size());
  if (indicators.minCoeff() < 0.0) throw config_error("indicators must be nonnegative");

  const auto uniform = [&] {
    std::vector<int> all(M);
    std::iota(all.begin(), all.end(), 0);
    return all;
  };
  const auto doerfler = [&] {
    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return indicators[a] != indicators[b] ? indicators[a] > indicators[b] : a < b;
    });
    const double total = indicators.squaredNorm();
    const double target = config.theta_doerf * config.theta_doerf * total;
    std::vector<int> out;
    double acc = 0.0;
    for (int m : order) {
      if (acc >= target) break;
      out.push_back(m);
      acc += indicators[m] * indicators[m];
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto aged = [&] {
    std::vector<int> out;
    for (int m = 0; m < M; ++m)
      if (ages[m] >= config.n_age) out.push_back(m);
    return out;
  };

  std::vector<int> marked;
  switch (config.strategy) {
    case MarkingStrategy::Uniform:
      marked = uniform();
      break;
    case MarkingStrategy::Doerfler:
      marked = doerfler();
      break;
    case MarkingStrategy::Age:
      marked = aged();
      break;
    case MarkingStrategy::Combined:
      if (eta > config.theta_uni * delta_online) {
        marked = uniform();
      } else {
        marked = doerfler();
        for (int m : aged())
          if (!std::binary_search(marked.begin(), marked.end(), m)) marked.push_back(m);
        std::sort(marked.begin(), marked.end());
      }
      break;
  }
  if (marked.empty() && eta > 0.0 && config.strategy != MarkingStrategy::Age)
    throw numerical_error("positive estimate with empty marking");
  return marked;
}

namespace {

struct CorrectorSystem {
  std::vector<int> dofs;       // global dofs of the patch, region order
  std::vector<char> fixed;     // strong zeros (CG patch boundary)
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

std::shared_ptr<CorrectorSystem> build_corrector(const FineGrid& grid, const DomainDecomposition& dd,
                                                 const BlockSpace& space, const Eigen::SparseMatrix<double>& A_mu,
                                                 int m) {
  auto sysp = std::make_shared<CorrectorSystem>();
  CorrectorSystem& sys = *sysp;
  std::vector<int> subs = {m};
  for (int n : dd.neighbors[m]) subs.push_back(n);
  const Region region = make_region(space, subs);

  sys.dofs.resize(region.dim);
  std::vector<int> to_local(space.dim, -1);
  for (std::size_t k = 0; k < region.subs.size(); ++k) {
    const int msub = region.subs[k];
    for (int l = 0; l < space.locals[msub].dim; ++l) {
      const int g = space.offsets[msub] + l;
      const int r = region.offsets[k] + l;
      sys.dofs[r] = g;
      to_local[g] = r;
    }
  }

  sys.fixed.assign(region.dim, 0);
  if (space.kind == SpaceKind::CG) {
    // strong zero on the patch boundary: vertices with a missing or exterior
    // neighbor cell
    for (int msub : region.subs) {
      const LocalSpace& ls = space.locals[msub];
      for (int jv = ls.cy0; jv <= ls.cy0 + ls.cny; ++jv)
        for (int iv = ls.cx0; iv <= ls.cx0 + ls.cnx; ++iv) {
          bool interior = true;
          for (int dj = -1; dj <= 0 && interior; ++dj)
            for (int di = -1; di <= 0 && interior; ++di) {
              const int ci = iv + di, cj = jv + dj;
              if (ci < 0 || ci >= grid.nx || cj < 0 || cj >= grid.ny)
                interior = false;
              else if (!region.contains(dd.subdomain_of_cell(grid.cell_index(ci, cj))))
                interior = false;
            }
          if (!interior) sys.fixed[region.dof(space, msub, (jv - ls.cy0) * (ls.cnx + 1) + (iv - ls.cx0))] = 1;
        }
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < region.subs.size(); ++k) {
    const int msub = region.subs[k];
    const int o = space.offsets[msub], d = space.locals[msub].dim;
    for (int col = o; col < o + d; ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_mu, col); it; ++it) {
        const int r = to_local[it.row()];
        const int c = to_local[col];
        if (r < 0) continue;
        if (sys.fixed[r] || sys.fixed[c]) continue;
        trip.emplace_back(r, c, it.value());
      }
  }
  for (int r = 0; r < region.dim; ++r)
    if (sys.fixed[r]) trip.emplace_back(r, r, 1.0);
  Eigen::SparseMatrix<double> A(region.dim, region.dim);
  A.setFromTriplets(trip.begin(), trip.end());
  sys.ldlt.compute(A);
  if (sys.ldlt.info() != Eigen::Success) throw numerical_error("corrector factorization failed");
  return sysp;
}

Eigen::VectorXd corrector_solve(const CorrectorSystem& sys, const BlockSpace& space,
                                const Eigen::VectorXd& residual, const Eigen::VectorXd& u_current, int m) {
  Eigen::VectorXd rhs(sys.dofs.size());
  for (std::size_t r = 0; r < sys.dofs.size(); ++r) rhs[r] = sys.fixed[r] ? 0.0 : residual[sys.dofs[r]];
  const Eigen::VectorXd phi = sys.ldlt.solve(rhs);
  const int o = space.offsets[m], d = space.locals[m].dim;
  Eigen::VectorXd candidate(d);
  // the patch region keeps block-local ordering, m's slice sits at its offset
  for (std::size_t r = 0; r < sys.dofs.size(); ++r) {
    const int g = sys.dofs[r];
    if (g >= o && g < o + d) candidate[g - o] = phi[r] + u_current[g];
  }
  return candidate;
}

}  // namespace

Eigen::VectorXd local_correction(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                 const Eigen::SparseMatrix<double>& A_mu, const Eigen::VectorXd& F,
                                 const Eigen::VectorXd& u_current, int m) {
  const auto sys = build_corrector(grid, dd, space, A_mu, m);
  const Eigen::VectorXd residual = F - A_mu * u_current;
  return corrector_solve(*sys, space, residual, u_current, m);
}

EnrichmentHistory enrich_online(RomState& rom, const FineGrid& grid, const Estimator& estimate,
                                const Eigen::VectorXd& mu, const MarkingConfig& marking, double delta_online,
                                std::vector<int>& ages, int step_cap) {
  if (delta_online <= 0.0) throw config_error("online tolerance must be positive");
  const DomainDecomposition& dd = rom.dd();
  const BlockSpace& space = rom.space();
  if (static_cast<int>(ages.size()) != dd.n_subdomains()) ages.assign(dd.n_subdomains(), 0);

  const Eigen::SparseMatrix<double> A_mu = rom.fom().combine(rom.problem(), mu);
  std::unordered_map<int, std::shared_ptr<CorrectorSystem>> correctors;

  EnrichmentHistory history;
  double best_eta = std::numeric_limits<double>::infinity();
  int stale_steps = 0;
  for (int step = 0; step < step_cap; ++step) {
    const Eigen::VectorXd U = rom.solve(mu);
    const ErrorReport report = estimate(mu, U);
    if (report.global <= delta_online) {
      history.converged = true;
      history.final_eta = report.global;
      return history;
    }
    const std::vector<int> marked = mark(report.indicators, marking, ages, report.global, delta_online);

    const Eigen::VectorXd u = rom.reconstruct(U);
    const Eigen::VectorXd residual = rom.fom().F - A_mu * u;
    EnrichmentStep rec;
    rec.mu = mu;
    rec.eta = report.global;
    rec.marked = static_cast<int>(marked.size());
    for (int m : marked) {
      auto it = correctors.find(m);
      if (it == correctors.end()) it = correctors.emplace(m, build_corrector(grid, dd, space, A_mu, m)).first;
      const Eigen::VectorXd candidate = corrector_solve(*it->second, space, residual, u, m);
      if (rom.extend_basis(m, candidate))
        ++rec.accepted;
      else
        ++rec.rejected;
    }
    std::set<int> marked_set(marked.begin(), marked.end());
    for (int m = 0; m < dd.n_subdomains(); ++m) ages[m] = marked_set.count(m) ? 0 : ages[m] + 1;
    rec.total_basis = rom.total_size();
    history.steps.push_back(rec);

    // stagnation guard on the running best estimate; uniform rounds can
    // overshoot for several steps before the estimate falls again
    if (report.global < best_eta - 1e-12) {
      best_eta = report.global;
      stale_steps = 0;
    } else if (rec.accepted > 0 && ++stale_steps >= 25) {
      throw numerical_error("enrichment stagnated");
    }
  }
  const Eigen::VectorXd U = rom.solve(mu);
  history.final_eta = estimate(mu, U).global;
  history.converged = history.final_eta <= delta_online;
  return history;
}

}  // namespace lrbms
