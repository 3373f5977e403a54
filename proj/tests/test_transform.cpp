#include "parakon/hypothesis.hpp"
#include "parakon/transform.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace parakon;

namespace {

Mat m1(double v) { return Mat::Constant(1, 1, v); }

GridFunction sample_field(const Raster& r, double dt, std::size_t nt, double (*fn)(double, double)) {
  GridFunction g(r, dt, nt);
  for (std::size_t n = 0; n < nt; ++n)
    for (std::size_t k = 0; k < r.size(); ++k) g.at(n, k) = fn(r.position(k)(0), g.time(n));
  return g;
}

// Smooth positive profile A + Bt + C x(1 - x).
double profile(double x, double t) { return 1.0 + 0.5 * t + 0.3 * x * (1.0 - x); }

}  // namespace

TEST(EvalG, Examples) {
  const Vec x = make_vec({0.5});
  const TransformedOperator T{OperatorSpec::laplacian(Source::constant(1.0)), 1.0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(eval_G(T, x, 0.3, 1.0, make_vec({1.0}), m1(0.0)), -3.0);
  EXPECT_DOUBLE_EQ(eval_G(T, x, 0.3, 1.0, make_vec({1.0}), m1(-1.0)), -1.0);
  const TransformedOperator T0{OperatorSpec::laplacian(), 1.0, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(eval_G(T0, x, 0.3, 0.0, make_vec({1.0}), m1(0.0)), -1.0);
}

TEST(EvalG, Errors) {
  const Vec x = make_vec({0.5});
  const TransformedOperator T{OperatorSpec::laplacian(), 1.0, 0.5, 0.5};
  EXPECT_THROW(eval_G(T, x, 0.3, 0.0, make_vec({1.0}), m1(0.0)), domain_error);
  EXPECT_THROW(eval_G(T, x, 0.3, -1.0, make_vec({1.0}), m1(0.0)), domain_error);
  EXPECT_THROW(eval_G(T, x, 0.3, 1.0, make_vec({0.0}), m1(0.0)), singular_point_error);
  EXPECT_THROW(eval_h_tilde(T, x, 0.3, 0.0), domain_error);
}

// ̄G = -(r²/p) tr X - ((1-p)/p²) r |ξ|² - r^{3-1/p} f(x, t^{1/α}, r^{1/p}, ·).
TEST(EvalG, LaplacianClosedForm) {
  Rng rng(31);
  const Source f = Source::space_poly({0.5, 1.0, 0.25});
  for (int s = 0; s < 2000; ++s) {
    const int n = 1 + s % 3;
    const double p = s % 2 ? uniform(rng, 0.05, 1.0) : -uniform(rng, 0.05, 3.0);
    const double alpha = uniform(rng, 0.1, 1.0);
    const double k = 3.0 - 1.0 / p;
    const TransformedOperator T{OperatorSpec::laplacian(f), k, p, alpha};
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = uniform(rng, -1, 1);
    const double t = uniform(rng, 0.1, 2), r = uniform(rng, 0.1, 2);
    const Vec xi = detail::sample_xi(n, rng);
    const Mat X = random_symmetric(n, 2, rng);
    const double closed = -(r * r / p) * X.trace() - ((1 - p) / (p * p)) * r * xi.squaredNorm() -
                          std::pow(r, 3 - 1 / p) * f(x, std::pow(t, 1 / alpha), std::pow(r, 1 / p), xi);
    EXPECT_NEAR(eval_G(T, x, t, r, xi, X), closed, 1e-12 * (1 + std::abs(closed)));
  }
}

TEST(EvalHTilde, Examples) {
  const Vec x = make_vec({0.5});
  const TransformedOperator T{OperatorSpec::laplacian(Source::constant(1.0)), 1.0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(eval_h_tilde(T, x, 0.3, 4.0), -4.0);
  const TransformedOperator Z{OperatorSpec::laplacian(), 1.0, 0.5, 0.5};
  for (double r : {0.1, 1.0, 7.0}) EXPECT_EQ(eval_h_tilde(Z, x, 0.3, r), 0.0);
  const TransformedOperator E{OperatorSpec::laplacian().perturbed(0.02), 0.0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(eval_h_tilde(E, x, 0.3, 3.0), -0.02);
  const TransformedOperator P0{OperatorSpec::laplacian(Source::constant(1.0)), 2.0, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(eval_h_tilde(P0, x, 0.3, -1.0), -std::exp(-2.0));
}

TEST(EvalHTilde, IsTheLimitOfG) {
  Rng rng(32);
  std::vector<OperatorSpec> specs{OperatorSpec::laplacian(Source::constant(1.0)),
                                  OperatorSpec::q_laplacian(3.0, Source::constant(0.5)),
                                  OperatorSpec::pucci_minus(1, 2, Source::linear_r(1.0)),
                                  OperatorSpec::porous(2.0, Source::constant(1.0))};
  for (const auto& spec : specs) {
    for (double p : {0.5, 0.0, -1.0}) {
      const TransformedOperator T{spec.perturbed(0.01), default_k(spec, p), p, 0.5};
      for (int s = 0; s < 20; ++s) {
        const Vec x = make_vec({uniform(rng, 0, 1), uniform(rng, 0, 1)});
        const double t = uniform(rng, 0.1, 2), r = uniform(rng, 0.2, 2);
        const double h = eval_h_tilde(T, x, t, r);
        const Vec e = random_unit(2, rng);
        const double gap = std::abs(eval_G(T, x, t, r, 1e-7 * e, 1e-7 * Mat::Identity(2, 2)) - h);
        EXPECT_LT(gap, 1e-4 * (1 + std::abs(h))) << spec.name() << " p=" << p;
      }
    }
  }
}

TEST(ForwardTransform, ConstantAndLinearFixtures) {
  const Raster r = rasterize(Domain::interval(0, 1), 0.125);
  GridFunction one(r, 0.1, 11);
  for (std::size_t n = 0; n < 11; ++n)
    for (std::size_t k = 0; k < r.size(); ++k) one.at(n, k) = 1.0;
  const GridFunction v = forward_transform(one, 0.5, 0.5);
  for (double val : v.values()) EXPECT_DOUBLE_EQ(val, 1.0);
  EXPECT_EQ(v.kind(), FieldKind::v);

  const GridFunction lin = sample_field(r, 0.05, 21, [](double, double t) { return t; });
  const GridFunction w = forward_transform(lin, 1.0, 0.5);
  EXPECT_NEAR(w.final_time(), 1.0, 1e-15);
  for (std::size_t n = 0; n < w.nt(); ++n)
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_NEAR(w.at(n, k), std::pow(w.time(n), 2.0), 1e-12);
}

TEST(ForwardTransform, RoundTrip) {
  const Raster r = rasterize(Domain::interval(0, 1), 1.0 / 32);
  for (std::size_t nt : {41u, 81u}) {
    const double dt = 1.0 / static_cast<double>(nt - 1);
    GridFunction u(r, dt, nt);
    for (std::size_t n = 0; n < nt; ++n)
      for (std::size_t k = 0; k < r.size(); ++k) {
        const double x = r.position(k)(0);
        u.at(n, k) = r.kind[k] == NodeKind::interior && n > 0 ? (1 - std::exp(-3 * u.time(n))) * x * (1 - x) : 0.0;
      }
    for (double p : {0.5, 1.0, 0.0, -1.0}) {
      const GridFunction back = inverse_transform(forward_transform(u, p, 0.5), p, 0.5);
      double err = 0.0;
      for (std::size_t i = 0; i < u.values().size(); ++i) err = std::max(err, std::abs(back.values()[i] - u.values()[i]));
      EXPECT_LT(err, 2.0 * dt) << "p=" << p;
    }
  }
}

TEST(ForwardTransform, RejectsNonpositiveUnderNonpositiveP) {
  const Raster r = rasterize(Domain::interval(0, 1), 0.125);
  GridFunction u = sample_field(r, 0.1, 5, profile);
  u.at(2, 3) = 0.0;
  try {
    forward_transform(u, -1.0, 0.5);
    FAIL() << "expected domain_error";
  } catch (const domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
  EXPECT_NO_THROW(forward_transform(u, 0.5, 0.5));
  EXPECT_THROW(forward_transform(u, 1.5, 0.5), domain_error);
  EXPECT_THROW(forward_transform(u, 0.5, 0.0), domain_error);
}

// The residual of the transformed equation
//   v^{1/p-1+k} τ^{1-1/α} v_τ + (p/α) G(x, τ, v, ∇v, ∇²v)     (p ≠ 0)
//   e^{(k+1)v} τ^{1-1/α} v_τ + (1/α) G(x, τ, v, ∇v, ∇²v)       (p = 0)
// equals (p/α) u^{pk} (resp. u^k/α) times u_t + F(x, t, u, u_x, u_xx) at t = τ^{1/α}.
TEST(ForwardTransform, ResidualConsistency) {
  struct Case {
    OperatorSpec spec;
    double (*Ru)(double x, double t);
  };
  const std::vector<Case> cases{
      {OperatorSpec::laplacian(Source::constant(1.0)), [](double, double) { return 0.5 + 0.6 - 1.0; }},
      {OperatorSpec::porous(2.0, Source::constant(0.2)),
       [](double x, double t) {
         const double u = profile(x, t), ux = 0.3 * (1 - 2 * x), uxx = -0.6;
         return 0.5 - 2 * u * uxx - 2 * ux * ux - 0.2;
       }},
  };
  const double alpha = 0.5;
  std::vector<double> errors;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    const Raster r = rasterize(Domain::interval(0, 1), h);
    const std::size_t nt = static_cast<std::size_t>(std::lround(1.0 / h)) + 1;
    const GridFunction u = sample_field(r, 1.0 / static_cast<double>(nt - 1), nt, profile);
    double worst = 0.0;
    for (const auto& c : cases) {
      for (double p : {0.5, -1.0, 0.0}) {
        const double k = default_k(c.spec, p);
        const TransformedOperator T{c.spec, k, p, alpha};
        const GridFunction v = forward_transform(u, p, alpha);
        const double dtau = v.dt();
        for (std::size_t n = 2; n + 2 < v.nt(); n += 3) {
          const double tau = v.time(n);
          for (int i = 2; i + 2 < r.nx; i += 3) {
            const std::size_t k0 = r.index(i);
            const double vc = v.at(n, k0);
            const double vx = (v.at(n, r.index(i + 1)) - v.at(n, r.index(i - 1))) / (2 * h);
            const double vxx = (v.at(n, r.index(i + 1)) - 2 * vc + v.at(n, r.index(i - 1))) / (h * h);
            const double vt = (v.at(n + 1, k0) - v.at(n - 1, k0)) / (2 * dtau);
            if (std::abs(vx) < 1e-10) continue;  // x = 1/2: vanishing gradient
            const Vec x = r.position(k0);
            const double G = eval_G(T, x, tau, vc, make_vec({vx}), m1(vxx));
            const double tf = std::pow(tau, 1 - 1 / alpha);
            const double Rv = p == 0.0 ? std::exp((k + 1) * vc) * tf * vt + G / alpha
                                       : std::pow(vc, 1 / p - 1 + k) * tf * vt + (p / alpha) * G;
            const double t = std::pow(tau, 1 / alpha);
            const double uval = profile(x(0), t);
            const double factor = p == 0.0 ? std::pow(uval, k) / alpha : (p / alpha) * std::pow(uval, p * k);
            worst = std::max(worst, std::abs(Rv - factor * c.Ru(x(0), t)));
          }
        }
      }
    }
    errors.push_back(worst);
  }
  EXPECT_LT(errors[1], 2e-3);
  EXPECT_LT(errors[1], 0.6 * errors[0]);
}

TEST(InverseTransform, KindAndRanges) {
  const Raster r = rasterize(Domain::interval(0, 1), 0.125);
  const GridFunction u = sample_field(r, 0.1, 5, profile);
  const GridFunction v = forward_transform(u, 0.5, 0.5);
  EXPECT_NEAR(v.final_time(), std::sqrt(0.4), 1e-15);
  const GridFunction w = inverse_transform(v, 0.5, 0.5);
  EXPECT_EQ(w.kind(), FieldKind::u);
  EXPECT_NEAR(w.final_time(), 0.4, 1e-15);
  EXPECT_THROW(inverse_transform(v, 2.0, 0.5), domain_error);
}
