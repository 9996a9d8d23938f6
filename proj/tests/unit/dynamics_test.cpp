#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "heteroflow/dynamics.hpp"
#include "heteroflow/error.hpp"
#include "test_util.hpp"

using namespace heteroflow;
using namespace heteroflow::dynamics;
using testutil::from_pairs;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Cycle C_5 is connected and not bipartite.
Graph c5() { return from_pairs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}); }

}  // namespace

TEST(WeightSpec, ValidatesAndOrdersEigenvalues) {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const WeightSpec spec(w);
  EXPECT_NEAR(spec.mu_min(), -1.0, 1e-14);
  EXPECT_NEAR(spec.mu_max(), 1.0, 1e-14);
  Matrix bad(2, 2);
  bad << 0, 1, 2, 0;
  EXPECT_THROW(WeightSpec{bad}, Error);
  EXPECT_THROW(WeightSpec(w, Matrix::Identity(3, 3)), Error);
  EXPECT_EQ(WeightSpec::scalar(-2.0, 3).w(), -2.0 * Matrix::Identity(3, 3));
}

TEST(EigenSplit, Examples) {
  Matrix w(2, 2);
  w << 2, 0, 0, -3;
  const auto s = eigen_split(w);
  EXPECT_EQ(s.theta_plus.rows(), 1);
  EXPECT_EQ(s.theta_minus.rows(), 1);
  EXPECT_NEAR((s.reconstruct() - w).norm(), 0.0, 1e-14);
  EXPECT_NEAR(s.attractive()(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(s.repulsive()(1, 1), 3.0, 1e-14);

  const auto psd = eigen_split(Matrix(Matrix::Identity(3, 3)));
  EXPECT_EQ(psd.theta_minus.rows(), 0);
  EXPECT_NEAR((psd.reconstruct() - Matrix::Identity(3, 3)).norm(), 0.0, 1e-14);
}

TEST(EigenSplit, RandomReconstruction) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Matrix w = testutil::random_symmetric(8, rng);
    const auto s = eigen_split(w);
    EXPECT_LE((s.reconstruct() - w).norm() / w.norm(), 1e-10);
    EXPECT_GE(symmetric_eigendecomposition(s.attractive()).min(), -1e-10);
    EXPECT_GE(symmetric_eigendecomposition(s.repulsive()).min(), -1e-10);
  }
}

TEST(Energy, SingleEdgeExample) {
  const Graph e = from_pairs(2, {{0, 1}});
  const WeightSpec spec(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  const Matrix f = col({1, 1});
  EXPECT_NEAR(energy_functional(e, f, f, spec, Phi0Mode::Zero), 0.0, 1e-15);
}

TEST(Energy, IdentityWeightsGiveHalfDirichlet) {
  Rng rng(2);
  const Graph g = testutil::random_connected(10, 0.3, rng);
  const Matrix f = testutil::gaussian(10, 3, rng);
  const WeightSpec spec(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  EXPECT_NEAR(energy_functional(g, f, f, spec, Phi0Mode::Zero), 0.5 * dirichlet_energy(g, f), 1e-12);
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const Graph g = testutil::random_connected(8, 0.3, rng);
    const int d = 3;
    const WeightSpec spec(testutil::random_symmetric(d, rng), testutil::random_symmetric(d, rng),
                          testutil::gaussian(d, d, rng));
    const Matrix f = testutil::gaussian(8, d, rng);
    const Matrix f0 = testutil::gaussian(8, d, rng);
    for (Phi0Mode mode : {Phi0Mode::Zero, Phi0Mode::Quadratic}) {
      const Matrix grad = energy_gradient(g, f, f0, spec, mode);
      const double h = 1e-6;
      for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < d; ++k) {
          Matrix fp = f;
          Matrix fm = f;
          fp(i, k) += h;
          fm(i, k) -= h;
          const double num =
              (energy_functional(g, fp, f0, spec, mode) - energy_functional(g, fm, f0, spec, mode)) / (2 * h);
          EXPECT_NEAR(grad(i, k), num, 1e-6 * std::max(1.0, std::abs(num)));
        }
      }
      if (mode == Phi0Mode::Quadratic) {
        const Matrix v = flow_velocity(normalized_adjacency(g), f, f0, spec, FlowVariant::Full);
        EXPECT_NEAR((v + grad).norm(), 0.0, 1e-12);
      }
    }
  }
}

TEST(Step, EulerMatchesExponentialToSecondOrder) {
  // Full flow with Omega = W: dF/dt = -Delta F W, closed form vec F(t) = exp(-t W (x) Delta) vec F(0).
  Rng rng(4);
  const Graph g = from_pairs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}});
  const Matrix w = testutil::random_symmetric(2, rng);
  const WeightSpec spec(w, w);
  const Matrix f0 = testutil::gaussian(5, 2, rng);
  const Matrix lap = normalized_laplacian(g);
  Matrix big(10, 10);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) big.block(a * 5, b * 5, 5, 5) = w(a, b) * lap;
  const Eigen::Map<const Eigen::VectorXd> v0(f0.data(), 10);
  double prev_err = 0.0;
  for (double tau : {1e-2, 5e-3}) {
    const FeatureMatrix step = gradient_flow_step(g, FeatureMatrix(f0), FeatureMatrix(f0), spec, tau, FlowVariant::Full);
    const Eigen::VectorXd exact = Matrix((-tau * big).exp()) * v0;
    const Eigen::Map<const Eigen::VectorXd> got(step.values().data(), 10);
    const double err = (got - exact).norm();
    EXPECT_LT(err, 5.0 * tau * tau * f0.norm() * (1 + big.norm() * big.norm()));
    if (prev_err > 0.0) EXPECT_NEAR(prev_err / err, 4.0, 0.5);  // local error is O(tau^2)
    prev_err = err;
  }
}

TEST(Step, RejectsBadInput) {
  const Graph g = c5();
  const FeatureMatrix f(Matrix::Ones(5, 1));
  EXPECT_THROW(gradient_flow_step(g, f, f, WeightSpec::scalar(1.0), 0.0, FlowVariant::Full), Error);
  EXPECT_THROW(gradient_flow_step(g, f, f, WeightSpec::scalar(1.0, 2), 0.1, FlowVariant::Full), Error);
}

TEST(Simulate, ScalarPositiveWeightIsLowFrequency) {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    const Graph g = testutil::random_connected(12, 0.3, rng);
    SimulationOptions opts;
    opts.renormalize = true;
    opts.snapshot_stride = 0;
    const auto trace = simulate(g, FeatureMatrix(testutil::gaussian(12, 1, rng)), WeightSpec::scalar(1.0), opts);
    EXPECT_EQ(trace.size(), 2001u);
    EXPECT_LT(trace.final_rayleigh(), 1e-2);
    EXPECT_EQ(classify_regime_empirical(trace, laplacian_spectrum(g), 1e-2), Regime::LFD);
  }
}

TEST(Simulate, BipartiteNegativeWeightIsHighFrequency) {
  const Graph p4 = from_pairs(4, {{0, 1}, {1, 2}, {2, 3}});
  SimulationOptions opts;
  opts.renormalize = true;
  const auto trace = simulate(p4, FeatureMatrix(col({1, 0.3, -0.2, 0.5})), WeightSpec::scalar(-1.0), opts);
  EXPECT_NEAR(trace.final_rayleigh(), 2.0, 1e-2);
}

TEST(Simulate, TraceBookkeeping) {
  const Graph g = c5();
  SimulationOptions opts;
  opts.steps = 10;
  opts.snapshot_stride = 4;
  opts.variant = FlowVariant::Full;
  const auto trace = simulate(g, FeatureMatrix(col({1, 2, 3, 4, 5})), WeightSpec::scalar(0.5), opts);
  EXPECT_EQ(trace.times.size(), 11u);
  EXPECT_EQ(trace.energy.size(), 11u);
  EXPECT_NEAR(trace.times.back(), 0.5, 1e-15);
  ASSERT_EQ(trace.snapshots.size(), 4u);  // 0, 4, 8, 10
  EXPECT_NEAR(trace.snapshots[2].t, 0.4, 1e-15);
  opts.variant = FlowVariant::Simplified;
  EXPECT_TRUE(simulate(g, FeatureMatrix(col({1, 2, 3, 4, 5})), WeightSpec::scalar(0.5), opts).energy.empty());
}

TEST(Simulate, ErrorsAndDivergence) {
  const Graph g = c5();
  SimulationOptions opts;
  EXPECT_THROW(simulate(g, FeatureMatrix(Matrix::Zero(5, 1)), WeightSpec::scalar(1.0), opts), Error);
  opts.steps = 0;
  EXPECT_THROW(simulate(g, FeatureMatrix(Matrix::Ones(5, 1)), WeightSpec::scalar(1.0), opts), Error);
  opts.steps = 2000;
  opts.tau = 1.0;
  try {
    simulate(g, FeatureMatrix(col({1, -1, 1, -1, 0.5})), WeightSpec::scalar(-30.0), opts);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Diverged);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Regime, PredictionExamples) {
  // W = I on a non-bipartite graph: margin = lambda_max - 2 < 0.
  const auto p = predict_regime(c5(), WeightSpec::scalar(1.0));
  EXPECT_EQ(p.regime, Regime::LFD);
  EXPECT_NEAR(p.margin, p.lambda_max - 2.0, 1e-12);
  // W = -I: margin = lambda_max - 1 + 1 = lambda_max > 0.
  EXPECT_EQ(predict_regime(c5(), WeightSpec::scalar(-1.0)).regime, Regime::HFD);
  // W = 0 lies on the boundary.
  EXPECT_EQ(predict_regime(c5(), WeightSpec::scalar(0.0)).regime, Regime::Boundary);
}

TEST(Regime, EmpiricalClassifierThresholds) {
  const Graph g = c5();
  const auto spec = laplacian_spectrum(g);
  DynamicsTrace t;
  t.rayleigh = {0.5, 0.005};
  EXPECT_EQ(classify_regime_empirical(t, spec, 1e-2), Regime::LFD);
  t.rayleigh = {0.5, spec.max() - 0.001};
  EXPECT_EQ(classify_regime_empirical(t, spec, 1e-2), Regime::HFD);
  t.rayleigh = {0.5, 0.5 * spec.max()};
  EXPECT_EQ(classify_regime_empirical(t, spec, 1e-2), Regime::Undecided);
}

TEST(Regime, SignPropertyOfEigenSplit) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Graph g = testutil::random_connected(10, 0.3, rng);
    const Matrix theta = testutil::gaussian(3, 3, rng);
    const Matrix f0 = testutil::gaussian(10, 3, rng);
    SimulationOptions opts;
    opts.steps = 200;
    opts.renormalize = true;
    opts.snapshot_stride = 0;
    const auto attract = simulate(g, FeatureMatrix(f0), WeightSpec(theta.transpose() * theta), opts);
    EXPECT_LT(attract.final_rayleigh(), attract.rayleigh.front());
    const auto repel = simulate(g, FeatureMatrix(f0), WeightSpec(-theta.transpose() * theta), opts);
    EXPECT_GT(repel.final_rayleigh(), repel.rayleigh.front());
  }
}

TEST(Barbell, Shape) {
  const Graph b = barbell_graph(10, 5);
  EXPECT_EQ(b.n(), 25);
  EXPECT_TRUE(b.connected());
  EXPECT_EQ(b.edge_count(), 2u * 45u + 6u);
  EXPECT_TRUE(b.has_edge(9, 10));
  EXPECT_TRUE(b.has_edge(14, 15));
  EXPECT_EQ(barbell_graph(3, 1).n(), 7);
  EXPECT_THROW(barbell_graph(2, 1), Error);
  EXPECT_THROW(barbell_graph(3, 0), Error);
}
