#pragma once

#include "lrlab/harmonic.hpp"

namespace lrlab::anharmonic {

// Finite even measure on C attached to one site: sum_i w_i delta_{z_i}.
struct Atom {
  cd z;
  double w = 0.0;
};

struct SiteMeasure {
  lattice::Coord site;
  std::vector<Atom> atoms;

  void validate() const;  // positive weights, invariance under z -> -z
};

// Finite even measure on C^X for a multi-site support.
struct MultiAtom {
  Eigen::VectorXcd z;
  double w = 0.0;
};

struct MultiSiteMeasure {
  lattice::CoordMatrix support;
  std::vector<MultiAtom> atoms;

  void validate() const;
};

// sup_x integral of |z|^2 d|mu_x|.
double kappa(const std::vector<SiteMeasure>& measures);

struct KappaBound {
  double value = 0.0;
  bool pass = true;
};

// Smallest kappa_mu with sum_{X containing x,y} int |z_x||z_y| d|mu_X| <=
// kappa_mu F_mu(d(x,y)) over all site pairs; metric from the spec.
KappaBound kappa_mu(const harmonic::HarmonicSpec& spec,
                    const std::vector<MultiSiteMeasure>& measures,
                    const lattice::DecayFunction& Fmu);

// Envelope constants shared by the perturbed-dynamics bounds. Cd is the full
// Z^d convolution series regardless of volume: it dominates every torus sum,
// keeps the bound rigorous, and makes finite- and infinite-volume evaluations
// differ only through the metric.
struct BoundConstants {
  double mu = 0.0;
  double eps = 0.5;
  double c = 0.0;   // C(eps, mu)
  double v = 0.0;   // (mu + eps) v_h(mu + eps)
  double Cd = 0.0;  // 2^{d+1} sum_{z in Z^d} (1+|z|)^{-(d+1)}
};

BoundConstants bound_constants(const harmonic::HarmonicSpec& spec, double mu,
                               double eps = 0.5);

// c e^{(v + c kappa Cd)|t|} sum |f||g| F_mu(d(x,y)); metric from the spec.
double anharmonic_bound(const harmonic::HarmonicSpec& spec,
                        const BoundConstants& k, double kappa_value,
                        const harmonic::SiteFunction& f,
                        const harmonic::SiteFunction& g, double t);
double anharmonic_bound(const harmonic::HarmonicSpec& spec,
                        const std::vector<SiteMeasure>& measures,
                        const harmonic::SiteFunction& f,
                        const harmonic::SiteFunction& g, double t, double mu,
                        double eps = 0.5);

// Multi-site variant: kappa_mu C_d^2 in the exponent. The measure-level
// overload takes the caller's F_{mu1} (mu <= mu1) for the pair sums.
double multisite_bound(const harmonic::HarmonicSpec& spec,
                       const BoundConstants& k, const KappaBound& kmu,
                       const harmonic::SiteFunction& f,
                       const harmonic::SiteFunction& g, double t);
double multisite_bound(const harmonic::HarmonicSpec& spec,
                       const std::vector<MultiSiteMeasure>& measures,
                       const lattice::DecayFunction& Fmu1,
                       const harmonic::SiteFunction& f,
                       const harmonic::SiteFunction& g, double t, double mu,
                       double eps = 0.5);

// Same formula on Z^d (spec must be infinite-volume).
double infinite_volume_bound(const harmonic::HarmonicSpec& spec,
                             const BoundConstants& k, double kappa_value,
                             const harmonic::SiteFunction& f,
                             const harmonic::SiteFunction& g, double t);
double infinite_volume_bound(const harmonic::HarmonicSpec& spec,
                             const std::vector<SiteMeasure>& measures,
                             const harmonic::SiteFunction& f,
                             const harmonic::SiteFunction& g, double t,
                             double mu, double eps = 0.5);

}  // namespace lrlab::anharmonic
