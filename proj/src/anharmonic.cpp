#include "lrlab/anharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lrlab::anharmonic {

namespace {

double site_distance(const harmonic::HarmonicSpec& spec, const lattice::Coord& a,
                     const lattice::Coord& b) {
  long s = 0;
  for (int j = 0; j < spec.d; ++j) {
    long v = a(j) - b(j);
    if (spec.finite()) v = lattice::torus_wrap(v, spec.L);
    s += std::abs(v);
  }
  return double(s);
}

double site_distance(const harmonic::HarmonicSpec& spec,
                     const std::vector<long>& a, const std::vector<long>& b) {
  long s = 0;
  for (int j = 0; j < spec.d; ++j) {
    long v = a[j] - b[j];
    if (spec.finite()) v = lattice::torus_wrap(v, spec.L);
    s += std::abs(v);
  }
  return double(s);
}

double weighted_sum(const harmonic::HarmonicSpec& spec,
                    const harmonic::SiteFunction& f,
                    const harmonic::SiteFunction& g,
                    const lattice::DecayFunction& Fmu) {
  double acc = 0.0;
  for (long i = 0; i < f.size(); ++i)
    for (long j = 0; j < g.size(); ++j)
      acc += std::abs(f.vals(i)) * std::abs(g.vals(j)) *
             Fmu(site_distance(spec, f.pts.row(i), g.pts.row(j)));
  return acc;
}

using ZKey = std::vector<std::pair<double, double>>;

ZKey z_key(const Eigen::VectorXcd& z, double sign) {
  ZKey k(size_t(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i)
    k[size_t(i)] = {sign * z(i).real(), sign * z(i).imag()};
  return k;
}

// Merged atom mass at each point must match the mass at its negation. The map
// comparator identifies -0.0 with 0.0, so self-paired atoms at the origin work.
void check_even(const std::map<ZKey, double>& total, const char* what) {
  for (const auto& [z, w] : total) {
    ZKey neg(z.size());
    for (size_t i = 0; i < z.size(); ++i) neg[i] = {-z[i].first, -z[i].second};
    auto it = total.find(neg);
    require(it != total.end() && it->second == w, what);
  }
}

}  // namespace

void SiteMeasure::validate() const {
  std::map<ZKey, double> total;
  for (const auto& a : atoms) {
    require(a.w > 0.0, "SiteMeasure: weights must be positive");
    total[{{a.z.real(), a.z.imag()}}] += a.w;
  }
  check_even(total, "SiteMeasure: measure must be even (invariant under z -> -z)");
}

void MultiSiteMeasure::validate() const {
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    for (Eigen::Index k = i + 1; k < support.rows(); ++k)
      require(!(support.row(i).array() == support.row(k).array()).all(),
              "MultiSiteMeasure: duplicate support site");
  std::map<ZKey, double> total;
  for (const auto& a : atoms) {
    require(a.w > 0.0, "MultiSiteMeasure: weights must be positive");
    require(a.z.size() == support.rows(),
            "MultiSiteMeasure: atom dimension mismatch");
    total[z_key(a.z, 1.0)] += a.w;
  }
  check_even(total, "MultiSiteMeasure: measure must be even");
}

double kappa(const std::vector<SiteMeasure>& measures) {
  std::map<std::vector<long>, double> per_site;
  for (const auto& m : measures) {
    m.validate();
    std::vector<long> key(m.site.begin(), m.site.end());
    for (const auto& a : m.atoms) per_site[key] += a.w * std::norm(a.z);
  }
  double best = 0.0;
  for (const auto& [site, s] : per_site) best = std::max(best, s);
  return best;
}

KappaBound kappa_mu(const harmonic::HarmonicSpec& spec,
                    const std::vector<MultiSiteMeasure>& measures,
                    const lattice::DecayFunction& Fmu) {
  spec.validate();
  std::map<std::pair<std::vector<long>, std::vector<long>>, double> pair_sum;
  for (const auto& m : measures) {
    m.validate();
    for (Eigen::Index a = 0; a < m.support.rows(); ++a)
      for (Eigen::Index b = 0; b < m.support.rows(); ++b) {
        std::vector<long> ka(m.support.row(a).begin(), m.support.row(a).end());
        std::vector<long> kb(m.support.row(b).begin(), m.support.row(b).end());
        double s = 0.0;
        for (const auto& atom : m.atoms)
          s += a == b ? atom.w * std::norm(atom.z(a))
                      : atom.w * std::abs(atom.z(a)) * std::abs(atom.z(b));
        pair_sum[{ka, kb}] += s;
      }
  }
  KappaBound out;
  for (const auto& [xy, s] : pair_sum)
    out.value = std::max(out.value,
                         s / Fmu(site_distance(spec, xy.first, xy.second)));
  out.pass = std::isfinite(out.value);
  return out;
}

BoundConstants bound_constants(const harmonic::HarmonicSpec& spec, double mu,
                               double eps) {
  spec.validate();
  require(mu > 0.0 && eps > 0.0, "bound_constants: mu and eps must be positive");
  BoundConstants k;
  k.mu = mu;
  k.eps = eps;
  k.c = harmonic::corollary_constant(spec, eps, mu);
  k.v = (mu + eps) * harmonic::velocity(spec, mu + eps);
  k.Cd = lattice::convolution_bound_power(spec.d);
  return k;
}

double anharmonic_bound(const harmonic::HarmonicSpec& spec,
                        const BoundConstants& k, double kappa_value,
                        const harmonic::SiteFunction& f,
                        const harmonic::SiteFunction& g, double t) {
  require(kappa_value >= 0.0, "anharmonic_bound: negative kappa");
  lattice::DecayFunction Fmu{spec.d, k.mu};
  double rate = k.v + k.c * kappa_value * k.Cd;
  return k.c * std::exp(rate * std::abs(t)) * weighted_sum(spec, f, g, Fmu);
}

double anharmonic_bound(const harmonic::HarmonicSpec& spec,
                        const std::vector<SiteMeasure>& measures,
                        const harmonic::SiteFunction& f,
                        const harmonic::SiteFunction& g, double t, double mu,
                        double eps) {
  return anharmonic_bound(spec, bound_constants(spec, mu, eps), kappa(measures),
                          f, g, t);
}

double multisite_bound(const harmonic::HarmonicSpec& spec,
                       const BoundConstants& k, const KappaBound& kmu,
                       const harmonic::SiteFunction& f,
                       const harmonic::SiteFunction& g, double t) {
  require(kmu.pass, "multisite_bound: kappa_mu certificate failed");
  require(kmu.value >= 0.0, "multisite_bound: negative kappa_mu");
  lattice::DecayFunction Fmu{spec.d, k.mu};
  double rate = k.v + k.c * kmu.value * k.Cd * k.Cd;
  return k.c * std::exp(rate * std::abs(t)) * weighted_sum(spec, f, g, Fmu);
}

double multisite_bound(const harmonic::HarmonicSpec& spec,
                       const std::vector<MultiSiteMeasure>& measures,
                       const lattice::DecayFunction& Fmu1,
                       const harmonic::SiteFunction& f,
                       const harmonic::SiteFunction& g, double t, double mu,
                       double eps) {
  return multisite_bound(spec, bound_constants(spec, mu, eps),
                         kappa_mu(spec, measures, Fmu1), f, g, t);
}

double infinite_volume_bound(const harmonic::HarmonicSpec& spec,
                             const BoundConstants& k, double kappa_value,
                             const harmonic::SiteFunction& f,
                             const harmonic::SiteFunction& g, double t) {
  require(!spec.finite(),
          "infinite_volume_bound: infinite-volume spec required");
  return anharmonic_bound(spec, k, kappa_value, f, g, t);
}

double infinite_volume_bound(const harmonic::HarmonicSpec& spec,
                             const std::vector<SiteMeasure>& measures,
                             const harmonic::SiteFunction& f,
                             const harmonic::SiteFunction& g, double t,
                             double mu, double eps) {
  return infinite_volume_bound(spec, bound_constants(spec, mu, eps),
                               kappa(measures), f, g, t);
}

}  // namespace lrlab::anharmonic
