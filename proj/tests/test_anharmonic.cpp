#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "lrlab/anharmonic.hpp"

using namespace lrlab;
using anharmonic::Atom;
using anharmonic::BoundConstants;
using anharmonic::MultiAtom;
using anharmonic::MultiSiteMeasure;
using anharmonic::SiteMeasure;
using harmonic::HarmonicSpec;
using harmonic::SiteFunction;

namespace {

HarmonicSpec chain_spec(long L, double omega = 1.0, double lambda = 1.0) {
  return HarmonicSpec{1, L, omega, {lambda}};
}

lattice::Coord coord1(long x) {
  lattice::Coord c(1);
  c(0) = x;
  return c;
}

SiteMeasure even_pair(long site, cd z, double w) {
  return SiteMeasure{coord1(site), {{z, w}, {-z, w}}};
}

MultiSiteMeasure two_site_pair(long x0, long x1, cd z0, cd z1, double w) {
  lattice::CoordMatrix supp(2, 1);
  supp << x0, x1;
  Eigen::VectorXcd z(2);
  z << z0, z1;
  return MultiSiteMeasure{supp, {{z, w}, {-z, w}}};
}

MultiSiteMeasure lift(const SiteMeasure& m) {
  lattice::CoordMatrix supp(1, 1);
  supp(0, 0) = m.site(0);
  MultiSiteMeasure out{supp, {}};
  for (const auto& a : m.atoms) {
    Eigen::VectorXcd z(1);
    z << a.z;
    out.atoms.push_back({z, a.w});
  }
  return out;
}

}  // namespace

TEST_CASE("measure validation") {
  even_pair(0, cd(1.0, 1.0), 1.0).validate();
  SiteMeasure{coord1(0), {{cd(0.0, 0.0), 2.0}}}.validate();

  CHECK_THROWS_AS((SiteMeasure{coord1(0), {{cd(1, 0), 0.0}, {cd(-1, 0), 0.0}}}
                       .validate()),
                  domain_error);
  CHECK_THROWS_AS((SiteMeasure{coord1(0), {{cd(1, 0), -1.0}, {cd(-1, 0), -1.0}}}
                       .validate()),
                  domain_error);
  CHECK_THROWS_AS((SiteMeasure{coord1(0), {{cd(1, 2), 1.0}}}.validate()),
                  domain_error);
  CHECK_THROWS_AS(
      (SiteMeasure{coord1(0), {{cd(1, 2), 1.0}, {cd(-1, -2), 2.0}}}.validate()),
      domain_error);

  // Atom lists merge before the evenness check: two half-weight copies of z
  // against one atom at -z carry the same measure.
  SiteMeasure split{coord1(0),
                    {{cd(2, 1), 1.0}, {cd(2, 1), 1.0}, {cd(-2, -1), 2.0}}};
  split.validate();

  two_site_pair(0, 1, cd(1, 0), cd(0, 1), 0.5).validate();

  lattice::CoordMatrix dup(2, 1);
  dup << 3, 3;
  Eigen::VectorXcd z2(2);
  z2 << cd(1, 0), cd(0, 1);
  CHECK_THROWS_AS((MultiSiteMeasure{dup, {{z2, 1.0}, {-z2, 1.0}}}.validate()),
                  domain_error);

  lattice::CoordMatrix supp(2, 1);
  supp << 0, 1;
  Eigen::VectorXcd z1(1);
  z1 << cd(1, 0);
  CHECK_THROWS_AS((MultiSiteMeasure{supp, {{z1, 1.0}}}.validate()), domain_error);

  Eigen::VectorXcd z3(2), z4(2);
  z3 << cd(1, 0), cd(0, 1);
  z4 << cd(-1, 0), cd(0, 1);  // second component not negated
  CHECK_THROWS_AS((MultiSiteMeasure{supp, {{z3, 1.0}, {z4, 1.0}}}.validate()),
                  domain_error);
}

TEST_CASE("kappa: cosine example and re-enumeration oracle") {
  CHECK(anharmonic::kappa({}) == 0.0);

  // V = 2 cos(q + p): atoms at +-(1 + i) with unit weight.
  CHECK(anharmonic::kappa({even_pair(0, cd(1.0, 1.0), 1.0)}) == 4.0);

  std::vector<SiteMeasure> ms = {
      even_pair(0, cd(0.5, -0.25), 2.0),
      even_pair(3, cd(1.0, 2.0), 0.25),
      even_pair(-2, cd(0.0, 1.5), 1.0),
      even_pair(3, cd(0.5, 0.0), 3.0),  // same site as the second entry
  };
  std::map<long, double> per_site;
  for (const auto& m : ms)
    for (const auto& a : m.atoms) per_site[m.site(0)] += a.w * std::norm(a.z);
  double expect = 0.0;
  for (const auto& [site, s] : per_site) expect = std::max(expect, s);
  CHECK(anharmonic::kappa(ms) == expect);

  CHECK_THROWS_AS(anharmonic::kappa({SiteMeasure{coord1(0), {{cd(1, 2), 1.0}}}}),
                  domain_error);
}

TEST_CASE("kappa_mu: reductions, explicit two-site ratio, torus metric") {
  auto spec = chain_spec(8);
  lattice::DecayFunction F{1, 0.5};

  auto empty = anharmonic::kappa_mu(spec, {}, F);
  CHECK(empty.value == 0.0);
  CHECK(empty.pass);

  // Single-site supports reduce to kappa exactly (F(0) = 1).
  std::vector<SiteMeasure> ms = {even_pair(0, cd(1.0, 1.0), 1.0),
                                 even_pair(2, cd(0.5, 0.0), 4.0)};
  std::vector<MultiSiteMeasure> lifted;
  for (const auto& m : ms) lifted.push_back(lift(m));
  CHECK(anharmonic::kappa_mu(spec, lifted, F).value == anharmonic::kappa(ms));

  // Two-site pair at +-(z0, z1): diagonal sums 2|z0|^2, 2|z1|^2 against F(0),
  // cross sum 2|z0||z1| against F(1).
  double z0 = 2.0, z1 = 0.5;
  auto kmu = anharmonic::kappa_mu(
      spec, {two_site_pair(0, 1, cd(z0, 0.0), cd(0.0, z1), 1.0)}, F);
  double expect = std::max({2 * z0 * z0, 2 * z1 * z1, 2 * z0 * z1 / F(1.0)});
  CHECK(kmu.value == doctest::Approx(expect).epsilon(1e-14));

  // Sites -3 and 4 on the L = 4 torus are adjacent; on Z^d they are 7 apart.
  auto wrap = anharmonic::kappa_mu(
      chain_spec(4), {two_site_pair(-3, 4, cd(1, 0), cd(1, 0), 1.0)}, F);
  auto flat = anharmonic::kappa_mu(
      HarmonicSpec{1, 0, 1.0, {1.0}},
      {two_site_pair(-3, 4, cd(1, 0), cd(1, 0), 1.0)}, F);
  CHECK(wrap.value == doctest::Approx(2.0 / F(1.0)).epsilon(1e-14));
  CHECK(flat.value == doctest::Approx(2.0 / F(7.0)).epsilon(1e-14));
  CHECK(flat.value > wrap.value);

  // F underflows at extreme separation: the certificate reports failure.
  auto far = anharmonic::kappa_mu(
      HarmonicSpec{1, 0, 1.0, {1.0}},
      {two_site_pair(0, 2000, cd(1, 0), cd(1, 0), 1.0)}, lattice::DecayFunction{1, 1.0});
  CHECK_FALSE(far.pass);
}

TEST_CASE("bound constants are volume independent") {
  double mu = 0.5, eps = 0.5;
  auto spec = chain_spec(16);
  auto k = anharmonic::bound_constants(spec, mu, eps);
  CHECK(k.c == harmonic::corollary_constant(spec, eps, mu));
  CHECK(k.v == (mu + eps) * harmonic::velocity(spec, mu + eps));
  CHECK(k.Cd == lattice::convolution_bound_power(1));
  CHECK(k.Cd > 1.0);

  auto inf = anharmonic::bound_constants(HarmonicSpec{1, 0, 1.0, {1.0}}, mu, eps);
  CHECK(inf.c == k.c);
  CHECK(inf.v == k.v);
  CHECK(inf.Cd == k.Cd);

  CHECK_THROWS_AS(anharmonic::bound_constants(spec, 0.0, eps), domain_error);
  CHECK_THROWS_AS(anharmonic::bound_constants(spec, mu, 0.0), domain_error);
}

TEST_CASE("single-site bound: harmonic reduction, prefactor, kappa scaling") {
  auto spec = chain_spec(12, 1.0, 0.75);
  auto f = harmonic::delta(spec, coord1(0), cd(0.8, -0.3));
  auto g = harmonic::delta(spec, coord1(5), cd(0.0, 1.1));
  double mu = 0.5;
  auto k = anharmonic::bound_constants(spec, mu);

  for (double t : {0.0, 0.4, 1.7})
    CHECK(anharmonic::anharmonic_bound(spec, k, 0.0, f, g, t) ==
          harmonic::corollary_bound(spec, f, g, t, mu));

  lattice::DecayFunction F{1, mu};
  double pref = k.c * std::abs(f.vals(0)) * std::abs(g.vals(0)) * F(5.0);
  CHECK(anharmonic::anharmonic_bound(spec, k, 4.0, f, g, 0.0) ==
        doctest::Approx(pref).epsilon(1e-14));

  double kap = 0.1, t = 0.5;
  double b1 = anharmonic::anharmonic_bound(spec, k, kap, f, g, t);
  double b2 = anharmonic::anharmonic_bound(spec, k, 2 * kap, f, g, t);
  CHECK(b2 / b1 == doctest::Approx(std::exp(k.c * kap * k.Cd * t)).epsilon(1e-12));

  CHECK(b1 > anharmonic::anharmonic_bound(spec, k, kap, f, g, 0.2));
  CHECK(anharmonic::anharmonic_bound(spec, k, kap, f, g, -t) == b1);

  // The envelope blows past double range for strong perturbations at late
  // times; it degrades to +inf, never NaN.
  double huge = anharmonic::anharmonic_bound(spec, k, 1e6, f, g, 1.0);
  CHECK(std::isinf(huge));
  CHECK(huge > 0.0);

  std::vector<SiteMeasure> ms = {even_pair(0, cd(1.0, 1.0), 1.0)};
  CHECK(anharmonic::anharmonic_bound(spec, ms, f, g, t, mu) ==
        anharmonic::anharmonic_bound(spec, k, anharmonic::kappa(ms), f, g, t));

  CHECK_THROWS_AS(anharmonic::anharmonic_bound(spec, k, -1.0, f, g, t),
                  domain_error);
}

TEST_CASE("multi-site bound: reduction gap and monotonicity") {
  auto spec = chain_spec(12);
  auto f = harmonic::delta(spec, coord1(0));
  auto g = harmonic::delta(spec, coord1(6));
  double mu = 0.5, t = 0.9;
  auto k = anharmonic::bound_constants(spec, mu);
  lattice::DecayFunction F{1, mu};

  CHECK(anharmonic::multisite_bound(spec, k, {0.0, true}, f, g, t) ==
        harmonic::corollary_bound(spec, f, g, t, mu));

  // Single-site perturbations admit both bounds; the multi-site route pays an
  // extra convolution factor in the exponent (the constants do not reconcile).
  std::vector<SiteMeasure> ms = {even_pair(0, cd(0.1, 0.1), 1.0)};
  auto kmu = anharmonic::kappa_mu(spec, {lift(ms[0])}, F);
  CHECK(kmu.value == anharmonic::kappa(ms));
  double single = anharmonic::anharmonic_bound(spec, k, anharmonic::kappa(ms), f, g, t);
  double multi = anharmonic::multisite_bound(spec, k, kmu, f, g, t);
  CHECK(multi > single);
  CHECK(multi / single ==
        doctest::Approx(std::exp(k.c * kmu.value * (k.Cd * k.Cd - k.Cd) * t))
            .epsilon(1e-12));

  CHECK(anharmonic::multisite_bound(spec, k, {0.02, true}, f, g, t) >
        anharmonic::multisite_bound(spec, k, {0.01, true}, f, g, t));

  CHECK_THROWS_AS(anharmonic::multisite_bound(spec, k, {1.0, false}, f, g, t),
                  domain_error);

  auto via_measures = anharmonic::multisite_bound(
      spec, {lift(ms[0])}, F, f, g, t, mu);
  CHECK(via_measures == multi);
}

TEST_CASE("infinite volume: metric gate and finite-L agreement") {
  HarmonicSpec inf{1, 0, 1.0, {1.0}};
  auto finite = chain_spec(64);
  std::vector<SiteMeasure> ms = {even_pair(0, cd(0.1, 0.1), 1.0)};
  double mu = 0.5;

  auto k = anharmonic::bound_constants(inf, mu);
  auto fi = harmonic::delta(inf, coord1(0));
  auto gi = harmonic::delta(inf, coord1(4));
  CHECK_THROWS_AS(
      anharmonic::infinite_volume_bound(finite, k, 0.04, fi, gi, 1.0),
      domain_error);

  CHECK(anharmonic::infinite_volume_bound(inf, k, 0.04, fi, gi, 1.3) ==
        anharmonic::anharmonic_bound(inf, k, 0.04, fi, gi, 1.3));

  // Supports well inside the L = 64 torus never see the wrap, so the two
  // metrics and hence the two bounds agree.
  lattice::CoordMatrix pts(3, 1);
  pts << -4, 0, 3;
  Eigen::VectorXcd vals(3);
  vals << cd(0.4, 0.1), cd(-0.2, 0.9), cd(1.0, -0.5);
  lattice::CoordMatrix qts(2, 1);
  qts << 2, -1;
  Eigen::VectorXcd wals(2);
  wals << cd(0.7, 0.0), cd(0.0, -0.6);

  auto f_fin = harmonic::site_function(finite, pts, vals);
  auto g_fin = harmonic::site_function(finite, qts, wals);
  auto f_inf = harmonic::site_function(inf, pts, vals);
  auto g_inf = harmonic::site_function(inf, qts, wals);

  for (double t : {0.0, 0.5, 1.0, 2.0})
    for (double m : {0.5, 1.0}) {
      double a = anharmonic::anharmonic_bound(finite, ms, f_fin, g_fin, t, m);
      double b = anharmonic::infinite_volume_bound(inf, ms, f_inf, g_inf, t, m);
      CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
    }
}
