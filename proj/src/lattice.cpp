#include "lrlab/lattice.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace lrlab::lattice {

long SiteSet::index_of(const Coord& c) const {
  require(c.cols() == dim, "index_of: coordinate dimension mismatch");
  Coord cc = c;
  if (kind == MetricKind::torus) {
    for (int j = 0; j < dim; ++j) cc[j] = torus_wrap(cc[j], L);
    // torus sites are enumerated row-major over (-L, L]^dim
    long idx = 0;
    for (int j = 0; j < dim; ++j) idx = idx * (2 * L) + (cc[j] + L - 1);
    return idx;
  }
  for (long i = 0; i < size(); ++i)
    if ((sites.row(i).array() == cc.array()).all()) return i;
  return -1;
}

SiteSet torus(int dim, long L) {
  require(dim >= 1 && L >= 1, "torus: need dim >= 1 and L >= 1");
  long n = 1;
  for (int j = 0; j < dim; ++j) n *= 2 * L;
  SiteSet S;
  S.dim = dim;
  S.kind = MetricKind::torus;
  S.L = L;
  S.sites.resize(n, dim);
  for (long i = 0; i < n; ++i) {
    long rem = i;
    for (int j = dim - 1; j >= 0; --j) {
      S.sites(i, j) = rem % (2 * L) - (L - 1);
      rem /= 2 * L;
    }
  }
  return S;
}

SiteSet path(long n, long first) {
  require(n >= 1, "path: need n >= 1");
  SiteSet S;
  S.dim = 1;
  S.kind = MetricKind::zd;
  S.sites.resize(n, 1);
  for (long i = 0; i < n; ++i) S.sites(i, 0) = first + i;
  return S;
}

SiteSet box(int dim, long lo, long hi) {
  require(dim >= 1 && lo <= hi, "box: need dim >= 1 and lo <= hi");
  long side = hi - lo + 1, n = 1;
  for (int j = 0; j < dim; ++j) n *= side;
  SiteSet S;
  S.dim = dim;
  S.kind = MetricKind::zd;
  S.sites.resize(n, dim);
  for (long i = 0; i < n; ++i) {
    long rem = i;
    for (int j = dim - 1; j >= 0; --j) {
      S.sites(i, j) = lo + rem % side;
      rem /= side;
    }
  }
  return S;
}

long torus_wrap(long v, long L) {
  long m = ((v % (2 * L)) + 2 * L) % (2 * L);
  return m > L ? m - 2 * L : m;
}

Coord displacement(const SiteSet& S, long x, long y) {
  Coord d = S.sites.row(y) - S.sites.row(x);
  if (S.kind == MetricKind::torus)
    for (int j = 0; j < S.dim; ++j) d[j] = torus_wrap(d[j], S.L);
  return d;
}

long torus_distance(const SiteSet& S, long x, long y) {
  require(x >= 0 && x < S.size() && y >= 0 && y < S.size(),
          "torus_distance: site index out of range");
  return displacement(S, x, y).cwiseAbs().sum();
}

long set_distance(const SiteSet& S, std::span<const long> X, std::span<const long> Y) {
  require(!X.empty() && !Y.empty(), "set_distance: empty set");
  long best = std::numeric_limits<long>::max();
  for (long x : X)
    for (long y : Y) best = std::min(best, torus_distance(S, x, y));
  return best;
}

double DecayFunction::operator()(double r) const {
  require(r >= 0.0, "DecayFunction: negative distance");
  double f = std::pow(1.0 + r, -(dim + 1));
  return mu == 0.0 ? f : std::exp(-mu * r) * f;
}

double decay_value(const DecayFunction& F, double r) { return F(r); }

double convolution_constant_exact(const SiteSet& S, const DecayFunction& F,
                                  double budget) {
  const long n = S.size();
  if (static_cast<double>(n) * n * n > budget)
    throw resource_error("convolution_constant_exact: |S|^3 exceeds work budget");
  // cache pairwise decay values
  Eigen::MatrixXd FD(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) FD(i, j) = F(double(torus_distance(S, i, j)));
  double best = 0.0;
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < n; ++y) {
      double s = FD.row(x).dot(FD.row(y));  // FD symmetric
      best = std::max(best, s / FD(x, y));
    }
  return best;
}

double uniform_integral(const SiteSet& S, const DecayFunction& F) {
  const long n = S.size();
  double best = 0.0;
  for (long x = 0; x < n; ++x) {
    double s = 0.0;
    for (long y = 0; y < n; ++y) s += F(double(torus_distance(S, x, y)));
    best = std::max(best, s);
  }
  return best;
}

double convolution_bound_power(const SiteSet& S) {
  double sum = 0.0;
  for (long i = 0; i < S.size(); ++i) {
    double r;
    if (S.kind == MetricKind::torus) {
      long a = 0;
      for (int j = 0; j < S.dim; ++j) a += std::abs(torus_wrap(S.sites(i, j), S.L));
      r = double(a);
    } else {
      r = double(S.sites.row(i).cwiseAbs().sum());
    }
    sum += std::pow(1.0 + r, -(S.dim + 1));
  }
  return std::pow(2.0, S.dim + 1) * sum;
}

namespace {

// zeta(2..8)
constexpr double kZeta[] = {1.6449340668482264, 1.2020569031595943,
                            1.0823232337111382, 1.0369277551433699,
                            1.0173430619844491, 1.0083492773819228,
                            1.0040773561979443};

double zeta_int(int n) {
  require(n >= 2 && n <= 8, "zeta_int: argument out of table range");
  return kZeta[n - 2];
}

// number of z in Z^d with |z|_1 = r
double shell_count(int d, long r) {
  if (r == 0) return 1.0;
  double total = 0.0;
  // sum over k = number of nonzero coordinates
  double binom_dk = 1.0;
  for (int k = 1; k <= d && k <= r; ++k) {
    binom_dk = binom_dk * (d - k + 1) / k;
    // compositions of r into k positive parts: C(r-1, k-1)
    double comp = 1.0;
    for (int i = 1; i <= k - 1; ++i) comp = comp * (r - i) / i;
    total += std::pow(2.0, k) * binom_dk * comp;
  }
  return total;
}

}  // namespace

double convolution_bound_power(int dim) {
  require(dim >= 1 && dim <= 6, "convolution_bound_power: dim must be in [1,6]");
  // shell_count(dim, r) is a polynomial in s = r+1 of degree dim-1 for r >= 1;
  // recover its coefficients from dim samples and resum against zeta values.
  const int deg = dim - 1;
  Eigen::MatrixXd V(deg + 1, deg + 1);
  Eigen::VectorXd rhs(deg + 1);
  for (int i = 0; i <= deg; ++i) {
    double s = double(i + 2);  // r = i+1
    for (int j = 0; j <= deg; ++j) V(i, j) = std::pow(s, j);
    rhs(i) = shell_count(dim, i + 1);
  }
  Eigen::VectorXd coef = V.fullPivLu().solve(rhs);
  double sum = 1.0;  // r = 0 term
  for (int j = 0; j <= deg; ++j)
    sum += coef(j) * (zeta_int(dim + 1 - j) - 1.0);
  return std::pow(2.0, dim + 1) * sum;
}

}  // namespace lrlab::lattice
