#include "parakon/hypothesis.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace parakon;

namespace {

Mat m1(double v) { return Mat::Constant(1, 1, v); }

// Block matrix sign·[(λλᵀ ⊗ Y) - blockdiag(λ_i X_i)] assembled entrywise.
Eigen::MatrixXd block_oracle(const Key2Instance& k) {
  const int n = k.n();
  const int m = static_cast<int>(k.m());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m * n, m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double v = k.lambda[i] * k.lambda[j] * k.Y(a, b);
          if (i == j) v -= k.lambda[i] * k.X[i](a, b);
          B(i * n + a, j * n + b) = k.sign * v;
        }
  return B;
}

Weights random_weights(std::size_t m, Rng& rng) {
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = uniform(rng, 0.05, 1.0));
  for (auto& x : w) x /= s;
  return Weights(w);
}

}  // namespace

TEST(H1, Examples) {
  EXPECT_TRUE(check_H1(0.5, 0.5, 1.0));
  EXPECT_FALSE(check_H1(0.5, 0.4, 1.0));
  EXPECT_TRUE(check_H1(-1.0, 0.5, 4.0));
  EXPECT_FALSE(check_H1(-1.0, 0.49, 4.0));
  EXPECT_TRUE(check_H1(0.0, 0.01, -100.0));
}

TEST(H1, TruthTable) {
  struct Row {
    double p, alpha, k;
    bool expected;
  };
  // s = 1/p - 1 + k evaluated by hand; admissible iff s ≤ 0 or α s ≥ 1.
  const Row rows[] = {
      {0.5, 0.5, 1.0, true},      // s = 2, αs = 1
      {0.5, 0.4, 1.0, false},     // s = 2, αs = 0.8
      {-1.0, 0.5, 4.0, true},     // s = 2, αs = 1
      {-1.0, 0.25, 4.0, false},   // s = 2, αs = 0.5
      {0.5, 0.25, -1.0, true},    // s = 0
      {0.25, 1.0, -0.5, true},    // s = 2.5
      {0.25, 0.25, 0.0, false},   // s = 3, αs = 0.75
      {1.0, 1.0, 0.0, true},      // s = 0
      {1.0, 0.5, 0.5, false},     // s = 0.5, αs = 0.25
      {0.0, 0.125, 5.0, true},    // p = 0
      {-0.5, 0.25, 7.0, true},    // s = 4, αs = 1
      {-2.0, 0.875, 1.0, true},   // s = -0.5
  };
  for (const auto& r : rows) EXPECT_EQ(check_H1(r.p, r.alpha, r.k), r.expected) << r.p << " " << r.alpha << " " << r.k;
}

TEST(DefaultK, Catalog) {
  EXPECT_DOUBLE_EQ(default_k(OperatorSpec::laplacian(), 0.5), 1.0);
  EXPECT_DOUBLE_EQ(default_k(OperatorSpec::q_laplacian(3), 0.25), -1.0);
  EXPECT_DOUBLE_EQ(default_k(OperatorSpec::laplacian(), 0.0), 1.0);
  // Porous: the transformed operator carries r^{3-σ/p} f, so k = 3 - σ/p.
  EXPECT_DOUBLE_EQ(default_k(OperatorSpec::porous(2.0), 0.5), -1.0);
  EXPECT_DOUBLE_EQ(default_k(OperatorSpec::porous(3.0), -1.0), 6.0);
}

// With k = 3 - σ/p the leading part of G is -(σ/p) r² tr X - σ(σ-p)/p² r|ξ|².
TEST(DefaultK, PorousLeadingPart) {
  Rng rng(41);
  for (int s = 0; s < 500; ++s) {
    const double sigma = uniform(rng, 1.1, 4.0);
    const double p = s % 2 ? uniform(rng, 0.05, 1.0) : -uniform(rng, 0.05, 2.0);
    const auto spec = OperatorSpec::porous(sigma, Source::constant(0.7));
    const TransformedOperator T{spec, default_k(spec, p), p, 0.5};
    const Vec x = make_vec({0.3});
    const double t = uniform(rng, 0.1, 2), r = uniform(rng, 0.1, 2);
    const Vec xi = make_vec({uniform(rng, -2, 2)});
    const double X = uniform(rng, -2, 2);
    const double expected = -(sigma / p) * r * r * X - sigma * (sigma - p) / (p * p) * r * xi.squaredNorm() -
                            std::pow(r, 3 - sigma / p) * 0.7;
    EXPECT_NEAR(eval_G(T, x, t, r, xi, m1(X)), expected, 1e-10 * (1 + std::abs(expected)));
  }
}

TEST(Key2, Examples) {
  const Weights half = Weights::pair(0.5);
  Key2Instance zero{half, Mat::Zero(2, 2), {Mat::Zero(2, 2), Mat::Zero(2, 2)}, 1};
  EXPECT_NEAR(verify_key2(zero), 0.0, 1e-15);
  Key2Instance valid{half, m1(-2), {m1(-2), m1(-2)}, 1};
  EXPECT_NEAR(verify_key2(valid), 0.0, 1e-14);
  Eigen::MatrixXd expect(2, 2);
  expect << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT((key2_block_matrix(valid) - expect).norm(), 1e-15);
  Key2Instance invalid{half, m1(0), {m1(1), m1(-1)}, 1};
  EXPECT_NEAR(verify_key2(invalid), -0.5, 1e-14);
  Key2Instance mismatch{half, m1(0), {m1(1)}, 1};
  EXPECT_THROW(verify_key2(mismatch), usage_error);
}

TEST(Key2Property, ConcaveCoreInstancesAreValid) {
  Rng rng(42);
  for (int sign : {1, -1})
    for (int n = 1; n <= 4; ++n)
      for (std::size_t m = 2; m <= 4; ++m) {
        const Weights w = random_weights(m, rng);
        for (const auto& inst : sample_key2(n, m, w, sign, 200, Key2Mode::concave_core, rng)) {
          const Eigen::MatrixXd B = block_oracle(inst);
          EXPECT_LT((B - key2_block_matrix(inst)).norm(), 1e-13);
          EXPECT_GE(verify_key2(inst), -1e-10);
          // Quadratic-form route: sign Σλ_i ηᵢᵀX_iηᵢ ≤ sign ⟨Y η̄, η̄⟩ with η̄ = Σλ_i η_i.
          for (int trial = 0; trial < 5; ++trial) {
            std::vector<Vec> eta(m);
            Vec bar = Vec::Zero(n);
            double lhs = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              eta[i] = random_unit(n, rng) * uniform(rng, 0, 2);
              bar += w[i] * eta[i];
              lhs += w[i] * eta[i].dot(inst.X[i] * eta[i]);
            }
            EXPECT_LE(sign * lhs, sign * bar.dot(inst.Y * bar) + 1e-10);
          }
          // η_i = η for all i: sign Σλ_i X_i ⪯ sign Y.
          Mat S = inst.Y;
          for (std::size_t i = 0; i < m; ++i) S -= w[i] * inst.X[i];
          EXPECT_GE(symmetric_eigenvalues(Mat(sign * S)).minCoeff(), -1e-10);
        }
      }
}

TEST(Key2Property, RejectionInstancesAreValid) {
  Rng rng(43);
  for (int sign : {1, -1})
    for (int n = 1; n <= 2; ++n) {
      const auto batch = sample_key2(n, 2, Weights::pair(0.3), sign, 50, Key2Mode::rejection, rng);
      ASSERT_EQ(batch.size(), 50u);
      bool outside_core = false;
      for (const auto& inst : batch) {
        EXPECT_GE(verify_key2(inst), -1e-10);
        if (symmetric_eigenvalues(Mat(sign * inst.Y)).maxCoeff() > 1e-9) outside_core = true;
      }
      EXPECT_TRUE(outside_core);
    }
}

TEST(Key2, SamplerArguments) {
  Rng rng(44);
  const Weights w = Weights::pair(0.5);
  EXPECT_THROW(sample_key2(5, 2, w, 1, 1, Key2Mode::concave_core, rng), usage_error);
  EXPECT_THROW(sample_key2(2, 3, w, 1, 1, Key2Mode::concave_core, rng), usage_error);
  EXPECT_THROW(sample_key2(2, 2, w, 0, 1, Key2Mode::concave_core, rng), usage_error);
  EXPECT_THROW(sample_key2(2, 2, w, 1, 0, Key2Mode::concave_core, rng), usage_error);
  EXPECT_THROW(sample_key2(1, 5, Weights::uniform(5), 1, 1, Key2Mode::rejection, rng), usage_error);
}

// G(r = 1, ξ, X) = -2X - 2ξ² - 1 at p = 1/2, k = 1; with Y = X₁ = X₂ and
// r₁ = r₂ both sides coincide.
TEST(H2, LaplacianHandInstance) {
  const TransformedOperator T{OperatorSpec::laplacian(Source::constant(1.0)), 1.0, 0.5, 0.5};
  const Vec xi = make_vec({0.7});
  const double lhs = eval_G(T, make_vec({0.5}), 0.6, 1.0, xi, m1(-2));
  const double rhs = 0.5 * eval_G(T, make_vec({0.2}), 0.4, 1.0, xi, m1(-2)) +
                     0.5 * eval_G(T, make_vec({0.8}), 0.8, 1.0, xi, m1(-2));
  EXPECT_DOUBLE_EQ(lhs, -2.0 * -2.0 - 2.0 * 0.49 - 1.0);
  EXPECT_NEAR(rhs - lhs, 0.0, 1e-14);
}

TEST(H2, CatalogPassesAndPucciPlusFails) {
  Rng rng(45);
  const Domain sq = Domain::unit_square();
  const Weights half = Weights::pair(0.5);
  const double p = 0.5, alpha = 0.5, k = 3 - 1 / p;
  const std::vector<Domain> D{sq, sq};
  for (const auto& spec : {OperatorSpec::laplacian(Source::constant(1.0)),
                           OperatorSpec::q_laplacian(3.0, Source::constant(1.0)),
                           OperatorSpec::pucci_minus(1, 2)}) {
    const std::vector<OperatorSpec> F{spec, spec};
    const auto rep = check_H2(spec, F, D, k, p, alpha, half, 10000, rng);
    EXPECT_TRUE(rep.passed()) << spec.name() << " " << (rep.witness ? rep.witness->describe() : "");
    EXPECT_GE(rep.worst_margin, -1e-8);
    EXPECT_EQ(rep.checked + rep.skipped, 10000u);
    EXPECT_TRUE(rep.h1_satisfied);
  }
  const auto plus = OperatorSpec::pucci_plus(1, 2);
  const std::vector<OperatorSpec> F{plus, plus};
  const auto rep = check_H2(plus, F, D, k, p, alpha, half, 10000, rng);
  EXPECT_GT(rep.violations, 0u);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_LT(rep.witness->rhs - rep.witness->lhs, 0.0);
  EXPECT_NE(rep.witness->describe().find("Y="), std::string::npos);
}

// At p = -1, k = 4: G = r² tr X - 2r|ξ|² - r⁴ f. The Key2 direction flips and
// the trace terms still compare, but r⁴ f is convex in r for f > 0.
TEST(H2, NegativePUsesFlippedSign) {
  Rng rng(46);
  const Domain I = Domain::interval(0, 1);
  const double p = -1.0, alpha = 0.5, k = 3 - 1 / p;
  const std::vector<Domain> D{I, I};
  const auto free_op = OperatorSpec::laplacian();
  const std::vector<OperatorSpec> F0{free_op, free_op};
  const auto rep = check_H2(free_op, F0, D, k, p, alpha, Weights::pair(0.3), 5000, rng);
  EXPECT_TRUE(rep.passed()) << (rep.witness ? rep.witness->describe() : "");
  const auto sourced = OperatorSpec::laplacian(Source::constant(1.0));
  const std::vector<OperatorSpec> F1{sourced, sourced};
  EXPECT_FALSE(check_H2(sourced, F1, D, k, p, alpha, Weights::pair(0.3), 5000, rng).passed());
  EXPECT_FALSE(check_semilinear_condition(Source::constant(1.0), p, alpha, 5000, rng).passed());
}

TEST(H2b, Examples) {
  Rng rng(47);
  const Domain sq = Domain::unit_square();
  EXPECT_TRUE(check_H2b(OperatorSpec::laplacian(Source::constant(2.0)), sq, 0.5, 0.5, 5000, rng).passed());
  EXPECT_TRUE(check_H2b(OperatorSpec::q_laplacian(3.0, Source::constant(1.0)), sq, 0.5, 0.5, 5000, rng).passed());
  const auto bad = check_H2b(OperatorSpec::laplacian(Source::power_r(1.0, 2.0)), sq, 0.5, 0.5, 10000, rng);
  EXPECT_GT(bad.violations, 0u);
  EXPECT_TRUE(bad.witness.has_value());
  EXPECT_EQ(bad.witness->x.size(), 4u);  // m = n + 2
  EXPECT_THROW(check_H2b(OperatorSpec::laplacian(), sq, 0.0, 0.5, 1, rng), usage_error);
  EXPECT_THROW(check_H2b(OperatorSpec::laplacian(), sq, 0.5, 0.5, 1, rng, std::nullopt, Weights::pair(0.5)),
               usage_error);
}

TEST(Semilinear, Examples) {
  Rng rng(48);
  EXPECT_TRUE(check_semilinear_condition(Source::constant(1.0), 0.5, 0.5, 5000, rng).passed());
  const auto bad = check_semilinear_condition(Source::power_r(1.0, 2.0), 0.5, 0.5, 5000, rng);
  EXPECT_FALSE(bad.passed());
  ASSERT_TRUE(bad.witness.has_value());
  Source concave_x{[](const Vec& x, double, double, const Vec&) { return 1.0 - x.squaredNorm(); }, "1-|x|^2"};
  HypothesisSampling fixed;
  fixed.fixed_r = 0.8;
  EXPECT_TRUE(check_semilinear_condition(concave_x, 0.5, 0.5, 5000, rng, 1, fixed).passed());
  // g = r^{3-1/p} f(r^{1/p}) with the oracle written out: f = r² at p = 1/2 gives r⁵.
  EXPECT_NEAR(transformed_source(Source::power_r(1.0, 2.0), 0.5, 0.5, make_vec({0.1}), 1.0, 1.3, make_vec({1.0})),
              std::pow(1.3, 5), 1e-12);
}

TEST(HypothesisReport, InvariantAndCsv) {
  Rng rng(49);
  HypothesisSampling opt;
  opt.record_samples = true;
  const auto a = check_semilinear_condition(Source::power_r(1.0, 2.0), 0.5, 0.5, 300, rng, 1, opt);
  const auto b = check_semilinear_condition(Source::constant(1.0), 0.5, 0.5, 300, rng, 1, opt);
  for (const auto& rep : {a, b}) EXPECT_EQ(rep.violations == 0, rep.worst_margin >= -rep.tolerance);
  for (const auto& s : a.samples) EXPECT_GE(s.margin / (1 + std::abs(s.lhs) + std::abs(s.rhs)), a.worst_margin - 1e-15);
  HypothesisReport merged = b;
  merged.merge(a);
  EXPECT_EQ(merged.checked, a.checked + b.checked);
  EXPECT_EQ(merged.worst_margin, std::min(a.worst_margin, b.worst_margin));
  std::ostringstream os;
  merged.write_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample_id,margin,lhs,rhs");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, merged.samples.size());
}
