#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrlab/thermolimit.hpp"

using namespace lrlab;
using quantum::LocalOperator;
using quantum::MatrixXcd;
using quantum::local_op;
using quantum::pauli;
using thermolimit::ConvergenceOptions;
using thermolimit::VolumeFamily;

namespace {

lrbounds::Interaction ising_field(const lattice::SiteSet& S, double J, double h) {
  lrbounds::Interaction Phi;
  for (long i = 0; i < S.size(); ++i)
    for (long j = i + 1; j < S.size(); ++j)
      if (lattice::torus_distance(S, i, j) == 1)
        Phi.terms.push_back(local_op({i, j}, {2, 2}, J * quantum::kron(pauli(3), pauli(3))));
  for (long i = 0; i < S.size(); ++i) Phi.terms.push_back(local_op({i}, {2}, h * pauli(1)));
  return Phi;
}

// Centered 1-d chains so that every volume contains coordinate 0.
VolumeFamily chain_family(const std::vector<long>& sizes, double J, double h) {
  VolumeFamily fam;
  for (long n : sizes) {
    lattice::SiteSet S = lattice::path(n, -(n / 2));
    fam.dims.push_back(std::vector<int>(n, 2));
    fam.interactions.push_back(ising_field(S, J, h));
    fam.volumes.push_back(std::move(S));
  }
  return fam;
}

long coord_index(const lattice::SiteSet& S, long x) {
  lattice::Coord c(1);
  c(0) = x;
  return S.index_of(c);
}

const lattice::DecayFunction F1{1, 0.0};

}  // namespace

TEST_CASE("volume family validation") {
  CHECK_NOTHROW(chain_family({3, 5, 7}, 1.0, 0.8).validate());

  SUBCASE("strict nesting required") {
    auto bad = chain_family({5, 5}, 1.0, 0.8);
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
  SUBCASE("disjoint volumes rejected") {
    VolumeFamily bad;
    bad.volumes.push_back(lattice::path(3, -1));
    bad.volumes.push_back(lattice::path(5, 10));
    for (const auto& S : bad.volumes) {
      bad.dims.push_back(std::vector<int>(S.size(), 2));
      bad.interactions.push_back(ising_field(S, 1.0, 0.8));
    }
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
  SUBCASE("recipe must agree on shared supports") {
    auto bad = chain_family({3, 5}, 1.0, 0.8);
    bad.interactions[1] = ising_field(bad.volumes[1], 1.1, 0.8);
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
  SUBCASE("duplicate supports merge before comparing") {
    auto fam = chain_family({3, 5}, 1.0, 0.8);
    // split the small volume's field at coordinate 0 into two half terms
    auto& terms = fam.interactions[0].terms;
    long c = coord_index(fam.volumes[0], 0);
    std::erase_if(terms, [&](const LocalOperator& T) { return T.support == std::vector<long>{c}; });
    terms.push_back(local_op({c}, {2}, 0.3 * pauli(1)));
    terms.push_back(local_op({c}, {2}, 0.5 * pauli(1)));
    CHECK_NOTHROW(fam.validate());
  }
  SUBCASE("larger volume may not add interior terms") {
    auto bad = chain_family({3, 5}, 1.0, 0.8);
    bad.interactions[1].terms.push_back(
        local_op({1, 3}, {2, 2}, quantum::kron(pauli(1), pauli(1))));
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
  SUBCASE("smaller volume may not hold terms the larger one lacks") {
    auto bad = chain_family({3, 5}, 1.0, 0.8);
    bad.interactions[0].terms.push_back(
        local_op({0, 2}, {2, 2}, quantum::kron(pauli(1), pauli(1))));
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
  SUBCASE("local dimensions must match across volumes") {
    auto bad = chain_family({3, 5}, 1.0, 0.8);
    bad.dims[0][0] = 3;
    CHECK_THROWS_AS(bad.validate(), domain_error);
  }
}

TEST_CASE("identity observable evolves identically in every volume") {
  auto fam = chain_family({3, 5}, 1.0, 0.8);
  LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, MatrixXcd::Identity(2, 2));
  ConvergenceOptions o;
  o.grid = 5;
  o.max_doublings = 0;
  auto rep = thermolimit::volume_convergence(fam, A, 0.7, F1, o);
  REQUIRE(rep.steps.size() == 1);
  CHECK(rep.steps[0].delta <= 1e-12);
  CHECK(rep.passed);
}

TEST_CASE("zero time gives exactly zero differences") {
  auto fam = chain_family({3, 5, 7}, 1.0, 0.8);
  LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, pauli(3));
  auto rep = thermolimit::volume_convergence(fam, A, 0.0, F1, {});
  REQUIRE(rep.steps.size() == 2);
  for (const auto& s : rep.steps) {
    CHECK(s.delta == 0.0);
    CHECK(s.tail == 0.0);
    CHECK(s.pass);
  }
  CHECK(rep.grid_points == 1);
  CHECK(rep.grid_converged);
}

TEST_CASE("ising chain differences decrease and obey the proof tail") {
  auto fam = chain_family({3, 5, 7}, 1.0, 0.8);
  LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, pauli(3));
  ConvergenceOptions o;
  o.grid = 9;
  o.max_doublings = 0;
  const double T = 1.0;
  auto rep = thermolimit::volume_convergence(fam, A, T, F1, o);

  REQUIRE(rep.steps.size() == 2);
  CHECK(rep.steps[0].n == 3);
  CHECK(rep.steps[0].m == 5);
  CHECK(rep.steps[1].n == 5);
  CHECK(rep.steps[1].m == 7);
  CHECK(rep.steps[1].delta > 0.0);
  CHECK(rep.steps[1].delta < rep.steps[0].delta);
  CHECK(rep.decreasing);
  for (const auto& s : rep.steps) CHECK(s.delta <= s.tail);
  CHECK(rep.passed);
  CHECK(rep.grid_points == 9);
  CHECK_FALSE(rep.grid_converged);
  CHECK(rep.phi_norm > 0.0);
  CHECK(rep.conv_C >= 1.0);

  // tail oracle assembled from the public constants
  auto bc = lrbounds::bound_constants(fam.volumes.back(), fam.interactions.back(), F1);
  CHECK(rep.phi_norm == doctest::Approx(bc.phi_norm).epsilon(1e-14));
  CHECK(rep.conv_C == doctest::Approx(bc.conv_C).epsilon(1e-14));
  const double a = 2.0 * bc.phi_norm * bc.conv_C;
  const double integral = std::expm1(a * T) / a - T;
  for (size_t k = 0; k < rep.steps.size(); ++k) {
    const auto& Sn = fam.volumes[k];
    const auto& Sm = fam.volumes[k + 1];
    long xa = coord_index(Sm, 0);
    double ssum = 0.0;
    for (long y = 0; y < Sm.size(); ++y)
      if (Sn.index_of(Sm.site(y)) < 0) ssum += F1(double(lattice::torus_distance(Sm, xa, y)));
    const double tail = 2.0 * bc.phi_norm * integral * ssum;  // ||A|| = 1
    CHECK(rep.steps[k].tail == doctest::Approx(tail).epsilon(1e-12));
  }
}

TEST_CASE("grid refinement mechanics") {
  auto fam = chain_family({3, 5}, 1.0, 0.8);
  LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, pauli(3));
  ConvergenceOptions coarse;
  coarse.grid = 5;
  coarse.max_doublings = 0;
  auto r0 = thermolimit::volume_convergence(fam, A, 0.9, F1, coarse);
  CHECK(r0.grid_points == 5);
  CHECK_FALSE(r0.grid_converged);

  ConvergenceOptions lax = coarse;
  lax.max_doublings = 2;
  lax.grid_tol = 1e9;  // any change accepted, so one doubling settles it
  auto r1 = thermolimit::volume_convergence(fam, A, 0.9, F1, lax);
  CHECK(r1.grid_points == 9);
  CHECK(r1.grid_converged);
  CHECK(r1.steps[0].delta >= r0.steps[0].delta);  // refinement only adds points

  ConvergenceOptions direct = coarse;
  direct.grid = 9;
  auto r2 = thermolimit::volume_convergence(fam, A, 0.9, F1, direct);
  CHECK(r1.steps[0].delta == doctest::Approx(r2.steps[0].delta).epsilon(1e-12));
}

TEST_CASE("implicit and dense evaluation routes agree above the dense norm cap") {
  auto fam = chain_family({8, 10}, 1.0, 0.8);
  const double t = 1.5;  // long enough for the light cone to reach the boundary
  ConvergenceOptions o;
  o.grid = 2;
  o.max_doublings = 0;

  auto Mn = quantum::assemble(fam.volumes[0], fam.dims[0], fam.interactions[0].terms);
  auto Mm = quantum::assemble(fam.volumes[1], fam.dims[1], fam.interactions[1].terms);
  REQUIRE(Mm.dim == 1024);
  std::vector<long> pos(fam.volumes[0].size());
  for (long i = 0; i < fam.volumes[0].size(); ++i)
    pos[i] = fam.volumes[1].index_of(fam.volumes[0].site(i));
  auto plan = quantum::embed_plan(fam.dims[1], pos);

  auto oracle = [&](const MatrixXcd& obs) {
    auto An = local_op({coord_index(fam.volumes[0], 0)}, {2}, obs);
    auto Am = local_op({coord_index(fam.volumes[1], 0)}, {2}, obs);
    MatrixXcd D =
        quantum::heisenberg_evolve(Mm, Am, t).mat - quantum::embed(quantum::heisenberg_evolve(Mn, An, t).mat, plan);
    return quantum::op_norm(D);
  };

  SUBCASE("hermitian observable") {
    LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, pauli(3));
    auto rep = thermolimit::volume_convergence(fam, A, t, F1, o);
    double ref = oracle(A.mat);
    CHECK(ref > 1e-3);
    CHECK(rep.steps[0].delta == doctest::Approx(ref).epsilon(1e-6));
  }
  SUBCASE("non-hermitian observable") {
    MatrixXcd raise = 0.5 * (pauli(1) + cd(0.0, 1.0) * pauli(2));
    LocalOperator B = local_op({coord_index(fam.volumes[0], 0)}, {2}, raise);
    auto rep = thermolimit::volume_convergence(fam, B, t, F1, o);
    double ref = oracle(raise);
    CHECK(ref > 1e-3);
    CHECK(rep.steps[0].delta == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("oversized volumes are rejected before assembly") {
  auto fam = chain_family({12, 13}, 1.0, 0.8);
  LocalOperator A = local_op({coord_index(fam.volumes[0], 0)}, {2}, pauli(3));
  CHECK_THROWS_AS(thermolimit::volume_convergence(fam, A, 0.5, F1, {}), resource_error);
}

TEST_CASE("harmonic finite volumes approach the infinite kernel flow") {
  harmonic::HarmonicSpec base;
  base.d = 1;
  base.L = 0;
  base.omega = 1.0;
  base.lambda = {1.0};
  lattice::Coord origin(1);
  origin(0) = 0;
  auto f = harmonic::delta(base, origin);

  SUBCASE("zero time agrees for every volume") {
    std::vector<long> Ls{8, 16};
    auto rep = thermolimit::harmonic_volume_convergence(base, Ls, f, 0.0);
    REQUIRE(rep.steps.size() == 2);
    for (const auto& s : rep.steps) {
      CHECK(s.diff <= 1e-9);
      CHECK_FALSE(s.wraparound);
    }
  }
  SUBCASE("growing volumes converge below 1e-6") {
    std::vector<long> Ls{8, 16, 32, 64};
    auto rep = thermolimit::harmonic_volume_convergence(base, Ls, f, 1.0);
    REQUIRE(rep.steps.size() == 4);
    CHECK(rep.decreasing);
    CHECK(rep.steps.back().diff <= 1e-6);
    // the smallest torus carries genuine dispersive weight near its antipode
    // at this time, so the conservative detector may flag it
    for (const auto& s : rep.steps)
      if (s.L >= 16) CHECK_FALSE(s.wraparound);
  }
  SUBCASE("long times on a small torus raise the wraparound flag") {
    std::vector<long> Ls{8};
    auto rep = thermolimit::harmonic_volume_convergence(base, Ls, f, 10.0);
    REQUIRE(rep.steps.size() == 1);
    CHECK(rep.steps[0].wraparound);
    CHECK(rep.steps[0].beyond > 1e-9);
  }
  SUBCASE("input validation") {
    std::vector<long> empty;
    CHECK_THROWS_AS(thermolimit::harmonic_volume_convergence(base, empty, f, 1.0), domain_error);
    std::vector<long> flat{8, 8};
    CHECK_THROWS_AS(thermolimit::harmonic_volume_convergence(base, flat, f, 1.0), domain_error);
  }
}

TEST_CASE("dyson expansion reproduces the exact evolution") {
  lattice::SiteSet S = lattice::path(4);
  std::vector<int> dims(4, 2);
  std::vector<LocalOperator> terms;
  for (long x = 0; x + 1 < 4; ++x)
    terms.push_back(local_op({x, x + 1}, {2, 2}, quantum::kron(pauli(3), pauli(3))));
  for (long x = 0; x < 4; ++x) terms.push_back(local_op({x}, {2}, 0.9 * pauli(1)));
  auto H0 = quantum::assemble(S, dims, terms);
  LocalOperator V = local_op({2}, {2}, 0.3 * pauli(1));
  LocalOperator A = local_op({0}, {2}, pauli(3));

  SUBCASE("remainders shrink factorially and sit under the tail bound") {
    auto rep = thermolimit::dyson_truncation(H0, V, A, 0.5, 5);
    REQUIRE(rep.remainders.size() == 6);
    REQUIRE(rep.term_norms.size() == 5);
    REQUIRE(rep.tail_bounds.size() == 6);
    CHECK(rep.passed);
    CHECK(rep.remainders[0] > 1e-3);  // the perturbation genuinely acts
    for (int n = 0; n <= 5; ++n) CHECK(rep.remainders[n] <= rep.tail_bounds[n]);
    for (int n = 0; n < 5; ++n) CHECK(rep.remainders[n + 1] < rep.remainders[n]);
    for (int n = 0; n <= 5; ++n) {
      const double tail = std::pow(0.3, n + 1) / std::tgamma(n + 2.0) * std::exp(0.3);
      CHECK(rep.tail_bounds[n] == doctest::Approx(tail).epsilon(1e-12));
    }
  }
  SUBCASE("zero perturbation makes the zeroth order exact") {
    LocalOperator V0 = local_op({1}, {2}, MatrixXcd::Zero(2, 2));
    auto rep = thermolimit::dyson_truncation(H0, V0, A, 0.7, 3);
    for (double tn : rep.term_norms) CHECK(tn == 0.0);
    for (double r : rep.remainders) CHECK(r <= 1e-13);
    CHECK(rep.passed);
  }
  SUBCASE("commuting perturbation kills every order beyond zero") {
    std::vector<LocalOperator> bonds(terms.begin(), terms.begin() + 3);
    auto Hc = quantum::assemble(S, dims, bonds);
    LocalOperator Vc = local_op({1}, {2}, 0.4 * pauli(3));
    LocalOperator Ax = local_op({3}, {2}, pauli(1));
    auto rep = thermolimit::dyson_truncation(Hc, Vc, Ax, 0.6, 4);
    for (double tn : rep.term_norms) CHECK(tn <= 1e-12);
    for (double r : rep.remainders) CHECK(r <= 1e-12);
  }
  SUBCASE("zero time is exact at every order") {
    auto rep = thermolimit::dyson_truncation(H0, V, A, 0.0, 2);
    for (double tn : rep.term_norms) CHECK(tn == 0.0);
    for (double r : rep.remainders) CHECK(r <= 1e-12);
    CHECK(rep.passed);
  }
  SUBCASE("guards") {
    MatrixXcd raise = 0.5 * (pauli(1) + cd(0.0, 1.0) * pauli(2));
    CHECK_THROWS_AS(thermolimit::dyson_truncation(H0, local_op({0}, {2}, raise), A, 0.1, 2),
                    domain_error);
    CHECK_THROWS_AS(thermolimit::dyson_truncation(H0, V, A, 0.1, 9), domain_error);
    quantum::AssembleOptions ao;
    ao.dense_cap = 1;
    ao.lowest_k = 2;
    auto Hi = quantum::assemble(S, dims, terms, ao);
    REQUIRE_FALSE(Hi.dense);
    CHECK_THROWS_AS(thermolimit::dyson_truncation(Hi, V, A, 0.1, 2), domain_error);
  }
}
