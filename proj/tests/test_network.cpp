#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "ransim/q_network.hpp"

using namespace ransim;

TEST(QNetwork, ZeroParametersGiveZeroOutput) {
  const QNetwork net({7, 64, 64, 8});
  const std::vector<double> obs{1.0, 1, 0.6, 0, 0, 1, 0.3};
  const Eigen::VectorXd q = net.forward(obs);
  ASSERT_EQ(q.size(), 8);
  EXPECT_TRUE(q.isZero(0.0));
}

TEST(QNetwork, IdentityLinearLayer) {
  QNetwork net({3, 3});
  net.params().weights[0] = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> obs{0.5, -2.0, 7.0};
  const Eigen::VectorXd q = net.forward(obs);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(q(i), obs[i]);
}

TEST(QNetwork, HiddenLayersRectify) {
  QNetwork net({1, 1, 1});
  net.params().weights[0](0, 0) = 1.0;
  net.params().weights[1](0, 0) = 1.0;
  const std::vector<double> neg{-3.0}, pos{3.0};
  EXPECT_EQ(net.forward(neg)(0), 0.0);
  EXPECT_EQ(net.forward(pos)(0), 3.0);
}

TEST(QNetwork, ForwardIsPure) {
  Rng rng = substream(1, "net");
  const QNetwork net = QNetwork::random({7, 64, 64, 8}, rng);
  const auto before = net.parameter_hash();
  const std::vector<double> obs{1.0, 1, 0.6, 0, 0, 1, 0.3};
  const Eigen::VectorXd a = net.forward(obs);
  const Eigen::VectorXd b = net.forward(obs);
  EXPECT_EQ(a, b);
  EXPECT_EQ(net.parameter_hash(), before);
}

TEST(QNetwork, BatchMatchesSingle) {
  Rng rng = substream(2, "net");
  const QNetwork net = QNetwork::random({4, 16, 3}, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 5);
  const Eigen::MatrixXd q = net.forward_batch(x);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd col = x.col(i);
    const Eigen::VectorXd single = net.forward(std::span<const double>(col.data(), 4));
    EXPECT_LT((single - q.col(i)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(QNetwork, DimensionMismatch) {
  const QNetwork net({7, 8, 8});
  const std::vector<double> obs(6, 0.0);
  EXPECT_THROW(net.forward(obs), std::invalid_argument);
  EXPECT_THROW(QNetwork({7}), std::invalid_argument);
  EXPECT_THROW(QNetwork({7, 0, 8}), std::invalid_argument);
}

TEST(QNetwork, RandomInitWithinFanInBound) {
  Rng rng = substream(3, "init");
  const QNetwork net = QNetwork::random({7, 64, 64, 8}, rng);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims()[l]));
    EXPECT_LE(net.params().weights[l].cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(net.params().biases[l].cwiseAbs().maxCoeff(), bound);
  }
  Rng again = substream(3, "init");
  EXPECT_EQ(QNetwork::random({7, 64, 64, 8}, again).parameter_hash(), net.parameter_hash());
}

TEST(Snapshot, RoundTripIsExact) {
  Rng rng = substream(4, "net");
  const QNetwork net = QNetwork::random({7, 64, 64, 8}, rng);
  std::stringstream ss;
  write_snapshot(net, ss);
  const QNetwork back = read_snapshot(ss);
  EXPECT_EQ(back.dims(), net.dims());
  EXPECT_EQ(back.params().flatten(), net.params().flatten());
}

TEST(Snapshot, RejectsBadInput) {
  std::stringstream bad_magic("other v1\ndims 2 1 1\n0\n0\n");
  EXPECT_THROW(read_snapshot(bad_magic), std::runtime_error);
  std::stringstream bad_version("ransim-qnetwork v9\ndims 2 1 1\n0\n0\n");
  EXPECT_THROW(read_snapshot(bad_version), std::runtime_error);
  std::stringstream truncated("ransim-qnetwork v1\ndims 2 2 1\n0.5\n");
  EXPECT_THROW(read_snapshot(truncated), std::runtime_error);
}
