#include "qcrb/rng.hpp"

#include <cmath>
#include <numbers>

#include "qcrb/errors.hpp"

namespace qcrb {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : root_seed_(seed), gen_(splitmix64(seed)) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : root_seed_(mix(seed, stream)), gen_(mix(seed, stream)) {}

Rng Rng::substream(std::uint64_t stream) const { return Rng(root_seed_, stream + 1); }

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

RealVector Rng::normal_vector(int n) {
  RealVector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

int Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 && w > -1e-12) w = 0.0;
    if (w < 0.0) throw NumericalError("categorical: negative weight");
    total += std::max(w, 0.0);
  }
  if (total <= 0.0) throw NumericalError("categorical: zero total weight");
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += std::max(weights[i], 0.0);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

long Rng::binomial(long n, double p) {
  if (n < 0) throw DomainError("binomial: n must be nonnegative");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<long> dist(n, p);
  return dist(gen_);
}

std::vector<long> Rng::multinomial(long n, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 && w > -1e-12) w = 0.0;
    if (w < 0.0) throw NumericalError("multinomial: negative weight");
    total += std::max(w, 0.0);
  }
  if (total <= 0.0) throw NumericalError("multinomial: zero total weight");
  std::vector<long> counts(weights.size(), 0);
  long remaining = n;
  double mass = total;
  for (std::size_t i = 0; i + 1 < weights.size() && remaining > 0; ++i) {
    const double w = std::max(weights[i], 0.0);
    const double p = (mass > 0.0) ? std::min(w / mass, 1.0) : 1.0;
    counts[i] = binomial(remaining, p);
    remaining -= counts[i];
    mass -= w;
  }
  if (!counts.empty()) counts.back() += remaining;
  return counts;
}

Matrix Rng::haar_unitary(int d) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cxd(normal(), normal());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const cxd rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0.0) ? rjj / mag : cxd(1.0, 0.0);
  }
  return q;
}

Eigen::VectorXcd Rng::haar_vector(int d) {
  Eigen::VectorXcd v(d);
  for (int i = 0; i < d; ++i) v[i] = cxd(normal(), normal());
  const double n = v.norm();
  if (n == 0.0) return haar_vector(d);
  return v / n;
}

}  // namespace qcrb
