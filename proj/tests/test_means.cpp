#include "parakon/means.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace parakon;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tuple {
  std::vector<double> a;
  Weights w;
};

// Random tuple of length 2..5 with positive weights; some entries are zero.
Tuple random_tuple(std::mt19937_64& rng, bool allow_zero = true) {
  std::uniform_int_distribution<int> len(2, 5);
  std::uniform_real_distribution<double> val(0.0, 10.0), wt(0.05, 1.0), coin(0.0, 1.0);
  const int m = len(rng);
  std::vector<double> a(m), w(m);
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    a[i] = allow_zero && coin(rng) < 0.1 ? 0.0 : val(rng);
    w[i] = wt(rng);
    s += w[i];
  }
  for (double& x : w) x /= s;
  return {a, Weights(w)};
}

// Literal weighted power-mean formula for finite nonzero p, no zeros.
double naive_mean(const std::vector<double>& a, const Weights& w, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::pow(a[i], p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

TEST(Weights, RejectsInvalid) {
  EXPECT_THROW(Weights({1.0}), usage_error);
  EXPECT_THROW(Weights({0.5, 0.6}), domain_error);
  EXPECT_THROW(Weights({1.0, 0.0}), domain_error);
  EXPECT_THROW(Weights({1.5, -0.5}), domain_error);
  EXPECT_NO_THROW(Weights({0.3, 0.7 + 5e-13}));
}

TEST(PMean, Examples) {
  const Weights half = Weights::pair(0.5);
  const std::vector<double> c{2.5, 2.5, 2.5};
  for (double p : {-kInf, -3.0, -1.0, 0.0, 0.4, 1.0, kInf})
    EXPECT_DOUBLE_EQ(p_mean(c, Weights::uniform(3), p), 2.5);
  EXPECT_DOUBLE_EQ(p_mean(std::vector<double>{1, 3}, half, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(p_mean(std::vector<double>{1, 4}, half, 0.0), 2.0);
  EXPECT_EQ(p_mean(std::vector<double>{2, 0}, half, -1.0), 0.0);
  EXPECT_EQ(p_mean(std::vector<double>{1, 3}, half, -kInf), 1.0);
  EXPECT_EQ(p_mean(std::vector<double>{1, 3}, half, kInf), 3.0);
}

TEST(PMean, ZeroEntryConventions) {
  const Weights w = Weights::pair(0.25);
  const std::vector<double> a{0.0, 4.0};
  EXPECT_DOUBLE_EQ(p_mean(a, w, 0.5), std::pow(0.75 * 2.0, 2.0));
  EXPECT_EQ(p_mean(a, w, 0.0), 0.0);
  EXPECT_EQ(p_mean(a, w, -2.0), 0.0);
  EXPECT_EQ(p_mean(a, w, -kInf), 0.0);
}

TEST(PMean, Errors) {
  const Weights w = Weights::pair(0.5);
  EXPECT_THROW(p_mean(std::vector<double>{1, -1}, w, 1.0), domain_error);
  EXPECT_THROW(p_mean(std::vector<double>{1, 2, 3}, w, 1.0), usage_error);
  EXPECT_THROW(p_mean(std::vector<double>{1, kInf}, w, 1.0), domain_error);
}

TEST(PMean, MatchesLiteralFormula) {
  std::mt19937_64 rng(11);
  for (int s = 0; s < 500; ++s) {
    auto [a, w] = random_tuple(rng, false);
    for (double p : {-4.0, -1.0, -0.3, 0.2, 0.7, 1.0})
      EXPECT_NEAR(p_mean(a, w, p), naive_mean(a, w, p), 1e-12 * (1.0 + naive_mean(a, w, p)));
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g += w[i] * std::log(a[i]);
    EXPECT_NEAR(p_mean(a, w, 0.0), std::exp(g), 1e-12 * std::exp(g));
  }
}

TEST(PMean, ExtremeValuesStayFinite) {
  const Weights w = Weights::pair(0.5);
  EXPECT_NEAR(p_mean(std::vector<double>{1e300, 1e300}, w, 2.0), 1e300, 1e288);
  EXPECT_NEAR(p_mean(std::vector<double>{1e-300, 4e-300}, w, -3.0), p_mean(std::vector<double>{1, 4}, w, -3.0) * 1e-300,
              1e-310);
}

TEST(PMeanProperty, MonotoneInP) {
  std::mt19937_64 rng(1);
  const std::vector<double> ps{-kInf, -20, -2, -1, -0.5, -1e-3, 0, 1e-3, 0.25, 0.5, 0.9, 1};
  for (int s = 0; s < 1000; ++s) {
    auto [a, w] = random_tuple(rng);
    for (std::size_t i = 0; i + 1 < ps.size(); ++i)
      EXPECT_LE(p_mean(a, w, ps[i]), p_mean(a, w, ps[i + 1]) + 1e-12 * (1 + p_mean(a, w, ps[i + 1])));
  }
}

TEST(PMeanProperty, Homogeneity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> cd(0.01, 100.0);
  for (int s = 0; s < 1000; ++s) {
    auto [a, w] = random_tuple(rng);
    const double c = cd(rng);
    std::vector<double> ca(a);
    for (double& x : ca) x *= c;
    for (double p : {-kInf, -2.0, 0.0, 0.5, 1.0, kInf})
      EXPECT_NEAR(p_mean(ca, w, p), c * p_mean(a, w, p), 1e-12 * (1.0 + c * p_mean(a, w, p)));
  }
}

// Near p = 0: log M_p = κ₁ + p κ₂/2 + O(p²) with κ the cumulants of log a
// under λ. Near ±∞: w_j^{1/p} max ≤ M_p ≤ max for the maximizing entry j.
TEST(PMeanProperty, LimitConsistency) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(0.1, 10.0);
  for (int s = 0; s < 1000; ++s) {
    auto [a, w] = random_tuple(rng, false);
    for (double& x : a) x = val(rng);
    double k1 = 0.0, k2 = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) k1 += w[i] * std::log(a[i]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      k2 += w[i] * std::pow(std::log(a[i]) - k1, 2);
      spread = std::max(spread, std::abs(std::log(a[i]) - k1));
    }
    const double g = p_mean(a, w, 0.0);
    EXPECT_NEAR(g, std::exp(k1), 1e-12 * g);
    for (double p : {1e-3, -1e-3, 1e-5, -1e-5}) {
      const double predicted = std::exp(k1 + p * k2 / 2.0);
      EXPECT_NEAR(p_mean(a, w, p), predicted, p * p * std::pow(spread, 3) * g + 1e-12 * g);
    }

    std::size_t jmax = 0, jmin = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (a[i] > a[jmax]) jmax = i;
      if (a[i] < a[jmin]) jmin = i;
    }
    const double mx = p_mean(a, w, kInf), mn = p_mean(a, w, -kInf);
    EXPECT_EQ(mx, a[jmax]);
    EXPECT_EQ(mn, a[jmin]);
    const double up = p_mean(a, w, 1e3), lo = p_mean(a, w, -1e3);
    EXPECT_LE(up, mx * (1 + 1e-12));
    EXPECT_GE(up, mx * std::pow(w[jmax], 1e-3) * (1 - 1e-12));
    EXPECT_GE(lo, mn * (1 - 1e-12));
    EXPECT_LE(lo, mn * std::pow(w[jmin], -1e-3) * (1 + 1e-12));
  }
}

TEST(PMeanProperty, ConcaveForPUpToOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(0.0, 1.0), val(0.0, 10.0);
  for (int s = 0; s < 1000; ++s) {
    auto [a, w] = random_tuple(rng);
    std::vector<double> b(a.size()), mix(a.size());
    const double theta = th(rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      b[i] = val(rng);
      mix[i] = theta * a[i] + (1.0 - theta) * b[i];
    }
    for (double p : {-kInf, -3.0, -0.5, 0.0, 0.3, 1.0})
      EXPECT_GE(p_mean(mix, w, p), theta * p_mean(a, w, p) + (1.0 - theta) * p_mean(b, w, p) - 1e-10);
  }
}

TEST(ParabolicCombination, Examples) {
  const Weights half = Weights::pair(0.5);
  std::vector<SpaceTimePoint> same{{make_vec({0.3, 0.2}), 1.7}, {make_vec({0.3, 0.2}), 1.7}};
  auto r = parabolic_combination(same, half, 0.5);
  EXPECT_NEAR((r.x - make_vec({0.3, 0.2})).norm(), 0.0, 1e-15);
  EXPECT_NEAR(r.t, 1.7, 1e-14);

  std::vector<SpaceTimePoint> eq{{make_vec({0.0}), 1.0}, {make_vec({1.0}), 1.0}};
  r = parabolic_combination(eq, half, 0.5);
  EXPECT_DOUBLE_EQ(r.x(0), 0.5);
  EXPECT_DOUBLE_EQ(r.t, 1.0);

  std::vector<SpaceTimePoint> tt{{make_vec({0.0}), 0.0}, {make_vec({0.0}), 4.0}};
  r = parabolic_combination(tt, half, 0.5);
  const double oracle = std::pow(0.5 * std::sqrt(0.0) + 0.5 * std::sqrt(4.0), 2.0);
  EXPECT_DOUBLE_EQ(r.t, oracle);
  EXPECT_DOUBLE_EQ(r.t, 1.0);
}

TEST(ParabolicCombination, Errors) {
  const Weights half = Weights::pair(0.5);
  std::vector<SpaceTimePoint> neg{{make_vec({0.0}), -1.0}, {make_vec({0.0}), 1.0}};
  EXPECT_THROW(parabolic_combination(neg, half, 0.5), domain_error);
  std::vector<SpaceTimePoint> ok{{make_vec({0.0}), 1.0}, {make_vec({0.0}), 1.0}};
  EXPECT_THROW(parabolic_combination(ok, half, 0.0), domain_error);
  EXPECT_THROW(parabolic_combination(ok, half, 1.5), domain_error);
}

TEST(PowerParams, Validate) {
  EXPECT_NO_THROW((PowerParams{0.5, 0.5, std::nullopt}.validate()));
  EXPECT_NO_THROW((PowerParams{-kInf, 1.0, std::nullopt}.validate()));
  EXPECT_THROW((PowerParams{1.5, 0.5, std::nullopt}.validate()), domain_error);
  EXPECT_THROW((PowerParams{0.5, 0.0, std::nullopt}.validate()), domain_error);
  EXPECT_EQ(sign_star(0.0), 1);
  EXPECT_EQ(sign_star(-0.1), -1);
}
