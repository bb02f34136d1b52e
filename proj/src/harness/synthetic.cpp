#include "vfl/harness/synthetic.hpp"

#include "vfl/common/error.hpp"
#include "vfl/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

namespace vfl::harness {

DistributionSpec DistributionSpec::parse(const std::string& text) {
  static const std::regex pattern(R"(\s*(normal|bernoulli|exponential|uniform)\s*\(\s*([^,\)]+?)\s*(?:,\s*([^\)]+?)\s*)?\)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw ConfigError("bad distribution '" + text + "'");
  DistributionSpec d;
  const std::string kind = m[1];
  try {
    d.p1 = std::stod(m[2]);
    if (m[3].matched) d.p2 = std::stod(m[3]);
  } catch (const std::exception&) {
    throw ConfigError("bad distribution parameters in '" + text + "'");
  }
  const bool two = m[3].matched;
  if (kind == "normal") {
    d.kind = DistKind::kNormal;
    if (!two) throw ConfigError("normal needs (mu, sigma)");
  } else if (kind == "uniform") {
    d.kind = DistKind::kUniform;
    if (!two) throw ConfigError("uniform needs (a, b)");
  } else if (kind == "bernoulli") {
    d.kind = DistKind::kBernoulli;
    if (two) throw ConfigError("bernoulli takes one parameter");
  } else {
    d.kind = DistKind::kExponential;
    if (two) throw ConfigError("exponential takes one parameter");
  }
  d.validate();
  return d;
}

std::string DistributionSpec::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case DistKind::kNormal: out << "normal(" << p1 << "," << p2 << ")"; break;
    case DistKind::kBernoulli: out << "bernoulli(" << p1 << ")"; break;
    case DistKind::kExponential: out << "exponential(" << p1 << ")"; break;
    case DistKind::kUniform: out << "uniform(" << p1 << "," << p2 << ")"; break;
  }
  return out.str();
}

void DistributionSpec::validate() const {
  switch (kind) {
    case DistKind::kNormal:
      if (!(p2 > 0.0)) throw ConfigError("normal sigma must be positive");
      break;
    case DistKind::kBernoulli:
      if (!(p1 >= 0.0 && p1 <= 1.0)) throw ConfigError("bernoulli p must be in [0, 1]");
      break;
    case DistKind::kExponential:
      if (!(p1 > 0.0)) throw ConfigError("exponential lambda must be positive");
      break;
    case DistKind::kUniform:
      if (!(p2 > p1)) throw ConfigError("uniform needs a < b");
      break;
  }
}

double DistributionSpec::mean() const {
  switch (kind) {
    case DistKind::kNormal: return p1;
    case DistKind::kBernoulli: return p1;
    case DistKind::kExponential: return 1.0 / p1;
    case DistKind::kUniform: return 0.5 * (p1 + p2);
  }
  return 0.0;
}

double DistributionSpec::stddev() const {
  switch (kind) {
    case DistKind::kNormal: return p2;
    case DistKind::kBernoulli: return std::sqrt(p1 * (1.0 - p1));
    case DistKind::kExponential: return 1.0 / p1;
    case DistKind::kUniform: return (p2 - p1) / std::sqrt(12.0);
  }
  return 1.0;
}

std::vector<double> sample_column(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  switch (spec.kind) {
    case DistKind::kNormal: {
      std::normal_distribution<double> d(spec.p1, spec.p2);
      for (auto& x : out) x = d(rng);
      break;
    }
    case DistKind::kBernoulli: {
      std::bernoulli_distribution d(spec.p1);
      for (auto& x : out) x = d(rng) ? 1.0 : 0.0;
      break;
    }
    case DistKind::kExponential: {
      std::exponential_distribution<double> d(spec.p1);
      for (auto& x : out) x = d(rng);
      break;
    }
    case DistKind::kUniform: {
      std::uniform_real_distribution<double> d(spec.p1, spec.p2);
      for (auto& x : out) x = d(rng);
      break;
    }
  }
  return out;
}

VerticalDataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0) throw ConfigError("synthetic n must be positive");
  if (spec.d_a == 0 || spec.d_b == 0) throw ConfigError("each party needs at least one feature");
  if (spec.label_noise < 0.0) throw ConfigError("label_noise must be non-negative");
  VerticalDataset data;
  const auto n = static_cast<Eigen::Index>(spec.n);
  data.x_a.resize(n, static_cast<Eigen::Index>(spec.d_a));
  data.x_b.resize(n, static_cast<Eigen::Index>(spec.d_b));
  data.y.resize(n);

  Vector score = Vector::Zero(n);
  auto teacher = make_rng(spec.seed, "synthetic.teacher");
  std::normal_distribution<double> weight(0.0, 1.0);
  auto fill = [&](Matrix& x, const DistributionSpec& dist, const char* prefix, std::vector<std::string>& names) {
    const double mu = dist.mean();
    const double sd = dist.stddev() > 0.0 ? dist.stddev() : 1.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const auto col = sample_column(dist, spec.n, derive_seed(spec.seed, fnv1a(prefix), static_cast<std::uint64_t>(j)));
      const double w = weight(teacher);
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i, j) = col[static_cast<std::size_t>(i)];
        score(i) += w * (x(i, j) - mu) / sd;
      }
      names.push_back(std::string(prefix) + std::to_string(j) + ":" + dist.to_string());
    }
  };
  fill(data.x_a, spec.a_dist, "a", data.a_names);
  fill(data.x_b, spec.b_dist, "b", data.b_names);

  auto noise_rng = make_rng(spec.seed, "synthetic.noise");
  std::uniform_real_distribution<double> unit(1e-12, 1.0 - 1e-12);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = unit(noise_rng);
    const double noise = spec.label_noise * std::log(u / (1.0 - u));
    data.y(i) = score(i) + noise > 0.0 ? 1.0 : 0.0;
    data.ids.push_back("s" + std::to_string(i));
  }
  return data;
}

TrainTestSplit split_train_test(const VerticalDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train fraction must be in (0, 1]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "harness.split");
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

}  // namespace vfl::harness
