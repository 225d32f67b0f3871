#include "lrlab/lrbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lrlab::lrbounds {

namespace {

bool contains(const std::vector<long>& sorted, long x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

// Z intersects both X and its complement.
bool crosses(const std::vector<long>& Z, const std::vector<long>& X_sorted) {
  bool in = false, out = false;
  for (long z : Z) (contains(X_sorted, z) ? in : out) = true;
  return in && out;
}

bool meets(const std::vector<long>& Z, const std::vector<long>& X_sorted) {
  return std::any_of(Z.begin(), Z.end(),
                     [&](long z) { return contains(X_sorted, z); });
}

std::vector<long> sorted_copy(std::span<const long> X) {
  std::vector<long> s(X.begin(), X.end());
  std::sort(s.begin(), s.end());
  return s;
}

struct MergedTerm {
  std::vector<long> support;
  double norm = 0.0;
};

std::vector<MergedTerm> merged_terms(const Interaction& Phi) {
  std::vector<MergedTerm> out;
  for (auto& [sup, norm] : term_norms(Phi))
    if (norm > 0.0) out.push_back({sup, norm});
  return out;
}

}  // namespace

std::map<std::vector<long>, double> term_norms(const Interaction& Phi) {
  std::map<std::vector<long>, quantum::MatrixXcd> sums;
  for (const auto& term : Phi.terms) {
    term.validate();
    auto it = sums.find(term.support);
    if (it == sums.end())
      sums.emplace(term.support, term.mat);
    else
      it->second += term.mat;
  }
  std::map<std::vector<long>, double> norms;
  for (auto& [sup, mat] : sums) norms.emplace(sup, quantum::op_norm(mat));
  return norms;
}

double interaction_norm(const lattice::SiteSet& S, const Interaction& Phi,
                        const lattice::DecayFunction& F) {
  auto terms = merged_terms(Phi);
  double best = 0.0;
  std::map<std::pair<long, long>, double> pair_weight;
  for (const auto& term : terms)
    for (long x : term.support)
      for (long y : term.support)
        pair_weight[{x, y}] += term.norm;
  for (const auto& [xy, w] : pair_weight) {
    double d = double(lattice::torus_distance(S, xy.first, xy.second));
    best = std::max(best, w / F(d));
  }
  return best;
}

std::vector<long> phi_boundary(const lattice::SiteSet& S, const Interaction& Phi,
                               std::span<const long> X) {
  auto Xs = sorted_copy(X);
  for (long x : Xs)
    require(x >= 0 && x < S.size(), "phi_boundary: site index out of range");
  std::vector<long> out;
  for (const auto& term : merged_terms(Phi)) {
    if (!crosses(term.support, Xs)) continue;
    for (long z : term.support)
      if (contains(Xs, z)) out.push_back(z);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double d_factor(const lattice::SiteSet& S, const Interaction& Phi,
                const lattice::DecayFunction& F, std::span<const long> X,
                std::span<const long> Y) {
  require(lattice::set_distance(S, X, Y) > 0, "d_factor: sets must be disjoint");
  auto bX = phi_boundary(S, Phi, X);
  auto bY = phi_boundary(S, Phi, Y);
  auto cross_sum = [&](std::span<const long> A, std::span<const long> B) {
    double s = 0.0;
    for (long a : A)
      for (long b : B) s += F(double(lattice::torus_distance(S, a, b)));
    return s;
  };
  return std::min(cross_sum(bX, Y), cross_sum(X, bY));
}

BoundConstants bound_constants(const lattice::SiteSet& S, const Interaction& Phi,
                               const lattice::DecayFunction& F,
                               double conv_budget) {
  BoundConstants c;
  c.conv_C = lattice::convolution_constant_exact(S, F, conv_budget);
  c.phi_norm = interaction_norm(S, Phi, F);
  return c;
}

double lr_bound(const BoundConstants& c, double d_factor_xy, double t,
                double norm_a, double norm_b) {
  require(c.conv_C > 0.0, "lr_bound: convolution constant must be positive");
  return 2.0 * norm_a * norm_b / c.conv_C *
         std::expm1(2.0 * c.conv_C * c.phi_norm * std::abs(t)) * d_factor_xy;
}

double lr_velocity(const BoundConstants& c_mu, double mu) {
  require(mu > 0.0, "lr_velocity: mu must be positive");
  return 2.0 * c_mu.phi_norm * c_mu.conv_C / mu;
}

ExpBoundConstants exp_bound_constants(const lattice::SiteSet& S,
                                      const Interaction& Phi, int dim, double mu,
                                      double conv_budget) {
  require(mu > 0.0, "exp_bound_constants: mu must be positive");
  ExpBoundConstants c;
  c.mu = mu;
  c.weighted = bound_constants(S, Phi, lattice::DecayFunction{dim, mu}, conv_budget);
  c.uniform_F = lattice::uniform_integral(S, lattice::DecayFunction{dim, 0.0});
  c.velocity = lr_velocity(c.weighted, mu);
  return c;
}

double exp_bound(const ExpBoundConstants& c, double dist_xy, long boundary_x,
                 long boundary_y, double t, double norm_a, double norm_b) {
  require(dist_xy > 0.0, "exp_bound: supports must be disjoint");
  double pre = 2.0 * norm_a * norm_b / c.weighted.conv_C * c.uniform_F *
               double(std::min(boundary_x, boundary_y));
  return pre * std::exp(-c.mu * (dist_xy - c.velocity * std::abs(t)));
}

double series_coefficient(const lattice::SiteSet& S, const Interaction& Phi,
                          std::span<const long> X, std::span<const long> Y, int n,
                          long budget) {
  require(n >= 1, "series_coefficient: order must be >= 1");
  auto Xs = sorted_copy(X);
  auto Ys = sorted_copy(Y);
  for (long x : Xs)
    require(x >= 0 && x < S.size(), "series_coefficient: site out of range");
  auto terms = merged_terms(Phi);
  long visits = 0;
  auto go = [&](auto&& self, const std::vector<long>& cur, int remaining) -> double {
    double acc = 0.0;
    for (const auto& term : terms) {
      if (++visits > budget)
        throw resource_error("series_coefficient: chain budget exceeded");
      if (!crosses(term.support, cur)) continue;
      if (remaining == 1) {
        if (meets(term.support, Ys)) acc += term.norm;
      } else {
        acc += term.norm * self(self, term.support, remaining - 1);
      }
    }
    return acc;
  };
  return go(go, Xs, n);
}

double series_coefficient_bound(const lattice::SiteSet& S, const Interaction& Phi,
                                const lattice::DecayFunction& F,
                                std::span<const long> X, std::span<const long> Y,
                                int n, double conv_budget) {
  require(n >= 1, "series_coefficient_bound: order must be >= 1");
  auto c = bound_constants(S, Phi, F, conv_budget);
  auto bX = phi_boundary(S, Phi, X);
  double surface = 0.0;
  for (long x : bX)
    for (long y : Y) surface += F(double(lattice::torus_distance(S, x, y)));
  return std::pow(c.phi_norm, n) * std::pow(c.conv_C, n - 1) * surface;
}

BoundReport verify_lr(const lattice::SiteSet& S, const std::vector<int>& dims,
                      const Interaction& Phi, const lattice::DecayFunction& F,
                      const quantum::LocalOperator& A,
                      const quantum::LocalOperator& B,
                      const std::vector<double>& t_grid,
                      const std::vector<double>& mus, double eps_num) {
  require(!t_grid.empty(), "verify_lr: empty time grid");
  double dist = double(lattice::set_distance(S, A.support, B.support));
  require(dist > 0.0, "verify_lr: observable supports must be disjoint");

  auto model = quantum::assemble(S, dims, Phi.terms);
  if (!model.dense)
    throw resource_error("verify_lr: model dimension exceeds the dense path");

  BoundReport rep;
  rep.eps_num = eps_num;
  auto c = bound_constants(S, Phi, F);
  rep.conv_C = c.conv_C;
  rep.phi_norm = c.phi_norm;
  double D = d_factor(S, Phi, F, A.support, B.support);
  double na = quantum::op_norm(A.mat), nb = quantum::op_norm(B.mat);

  std::vector<ExpBoundConstants> expc;
  std::vector<std::string> exp_label;
  long bx = long(phi_boundary(S, Phi, A.support).size());
  long by = long(phi_boundary(S, Phi, B.support).size());
  for (double mu : mus) {
    expc.push_back(exp_bound_constants(S, Phi, S.dim, mu));
    std::ostringstream os;
    os << "exp mu=" << mu;
    exp_label.push_back(os.str());
    rep.velocities[os.str()] = expc.back().velocity;
  }

  rep.min_margin = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    auto At = quantum::heisenberg_evolve(model, A, t);
    double measured = quantum::commutator_norm(At, B);
    auto push = [&](const std::string& label, double bound) {
      BoundRow row{t, label, measured, bound, bound - measured,
                   measured <= bound + eps_num};
      rep.min_margin = std::min(rep.min_margin, row.margin);
      worst = std::max(worst, measured - bound);
      rep.rows.push_back(std::move(row));
    };
    push("growth", lr_bound(c, D, t, na, nb));
    for (size_t i = 0; i < expc.size(); ++i)
      push(exp_label[i], exp_bound(expc[i], dist, bx, by, t, na, nb));
  }
  rep.n_points = long(t_grid.size());
  rep.max_violation = std::max(0.0, worst);
  rep.passed = std::all_of(rep.rows.begin(), rep.rows.end(),
                           [](const BoundRow& r) { return r.pass; });
  return rep;
}

}  // namespace lrlab::lrbounds
