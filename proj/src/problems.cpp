#include "fsgdm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fsgdm/kernels.hpp"

namespace fsgdm {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Lower-triangular Cholesky factor of a row-major SPD matrix.
std::vector<double> cholesky(const std::vector<double>& a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (!(sum > 0.0)) throw std::invalid_argument("quadratic matrix is not positive definite");
        l[i * n + i] = std::sqrt(sum);
      } else {
        l[i * n + j] = sum / l[j * n + j];
      }
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n,
                                   std::vector<double> rhs) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) rhs[i] -= l[i * n + k] * rhs[k];
    rhs[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) rhs[i] -= l[k * n + i] * rhs[k];
    rhs[i] /= l[i * n + i];
  }
  return rhs;
}

// Data sets draw from their own stream so run seeds never replay them.
constexpr std::uint64_t kDataStream = 1;

std::vector<double> gaussian_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> out(n);
  for (auto& x : out) x = scale * rng.normal();
  return out;
}

class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::vector<double> a, std::vector<double> b, double init_distance)
      : Problem(1), a_(std::move(a)), b_(std::move(b)), init_distance_(init_distance) {
    n_ = b_.size();
    if (a_.size() != n_ * n_) throw std::invalid_argument("quadratic A must be d x d");
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (a_[i * n_ + j] != a_[j * n_ + i]) throw std::invalid_argument("quadratic A must be symmetric");
      }
    }
    optimum_ = cholesky_solve(cholesky(a_, n_), n_, b_);
  }

  ProblemKind kind() const override { return ProblemKind::kQuadratic; }
  std::size_t dimension() const override { return n_; }
  std::size_t num_train() const override { return 1; }
  bool is_classifier() const override { return false; }

  std::vector<double> initial_point(Rng& rng) const override {
    std::vector<double> dir = gaussian_vector(rng, n_);
    const double norm = kernels::norm2(dir);
    std::vector<double> x = optimum_;
    if (norm > 0.0) kernels::axpy(x, init_distance_ / norm, dir);
    return x;
  }

  double gradient(std::span<const double> x, std::span<const std::size_t>,
                  std::span<double> g) const override {
    check(x);
    if (g.size() != n_) throw std::invalid_argument("gradient buffer has the wrong size");
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] = kernels::dot(std::span(a_).subspan(i * n_, n_), x) - b_[i];
    }
    return objective(x);
  }

  double loss(std::span<const double> x, Split) const override {
    check(x);
    return objective(x);
  }

  double accuracy(std::span<const double>, Split) const override {
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  void check(std::span<const double> x) const {
    if (x.size() != n_) throw std::invalid_argument("parameter vector has the wrong size");
  }

  double objective(std::span<const double> x) const {
    std::vector<double> r(x.begin(), x.end());
    kernels::axpy(r, -1.0, optimum_);
    double quad = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      quad += r[i] * kernels::dot(std::span(a_).subspan(i * n_, n_), r);
    }
    return 0.5 * quad;
  }

  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> optimum_;
  double init_distance_;
  std::size_t n_ = 0;
};

std::unique_ptr<Problem> random_quadratic(const ProblemSpec& spec) {
  const std::size_t n = spec.dim;
  if (n < 1) throw std::invalid_argument("quadratic dimension must be positive");
  if (!(spec.condition >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
  Rng rng(Rng::derive(spec.data_seed, kDataStream));
  // Orthonormal basis by modified Gram-Schmidt on a Gaussian matrix.
  std::vector<std::vector<double>> q;
  while (q.size() < n) {
    std::vector<double> v = gaussian_vector(rng, n);
    for (const auto& e : q) kernels::axpy(v, -kernels::dot(v, e), e);
    const double norm = kernels::norm2(v);
    if (norm < 1e-8) continue;
    for (auto& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  // Spectrum log-spaced on [1/condition, 1].
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    eig[i] = std::pow(spec.condition, frac - 1.0);
  }
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += q[k][i] * eig[k] * q[k][j];
      a[i * n + j] = sum;
      a[j * n + i] = sum;
    }
  }
  const std::vector<double> optimum = gaussian_vector(rng, n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = kernels::dot(std::span(a).subspan(i * n, n), optimum);
  return std::make_unique<QuadraticProblem>(std::move(a), std::move(b), spec.init_distance);
}

// Features stored row-major with labels; the first n_train rows are training
// data.
struct Dataset {
  std::size_t features = 0;
  std::size_t n_train = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span(x).subspan(i * features, features);
  }
  std::pair<std::size_t, std::size_t> range(Split split) const {
    return split == Split::kTrain ? std::pair{std::size_t{0}, n_train} : std::pair{n_train, size()};
  }
};

std::size_t train_count(const ProblemSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(spec.samples)));
  if (n == 0 || n >= spec.samples) throw std::invalid_argument("split leaves an empty partition");
  return n;
}

// Shuffles rows so that the train/test split mixes classes.
void shuffle_rows(Dataset& data, Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Dataset out = data;
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(data.x.begin() + static_cast<std::ptrdiff_t>(order[i] * data.features), data.features,
                out.x.begin() + static_cast<std::ptrdiff_t>(i * data.features));
    out.y[i] = data.y[order[i]];
  }
  data = std::move(out);
}

// Two Gaussian blobs along a random unit direction; points closer than 0.5
// to the separating hyperplane are redrawn, so the classes are separable.
Dataset logistic_blobs(const ProblemSpec& spec) {
  Rng rng(Rng::derive(spec.data_seed, kDataStream));
  Dataset data;
  data.features = spec.dim;
  std::vector<double> direction = gaussian_vector(rng, spec.dim);
  const double norm = kernels::norm2(direction);
  for (auto& d : direction) d /= norm;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const int label = static_cast<int>(i % 2);
    const double side = label == 1 ? 1.0 : -1.0;
    std::vector<double> point;
    for (;;) {
      point = gaussian_vector(rng, spec.dim);
      kernels::axpy(point, side * 0.5 * spec.separation, direction);
      if (side * kernels::dot(point, direction) >= 0.5) break;
    }
    data.x.insert(data.x.end(), point.begin(), point.end());
    data.y.push_back(label);
  }
  shuffle_rows(data, rng);
  data.n_train = train_count(spec);
  return data;
}

class LogisticProblem final : public Problem {
 public:
  LogisticProblem(Dataset data, std::size_t batch_size)
      : Problem(batch_size), data_(std::move(data)) {}

  ProblemKind kind() const override { return ProblemKind::kLogistic; }
  std::size_t dimension() const override { return data_.features + 1; }
  std::size_t num_train() const override { return data_.n_train; }
  bool is_classifier() const override { return true; }

  std::vector<double> initial_point(Rng&) const override {
    return std::vector<double>(dimension(), 0.0);
  }

  double gradient(std::span<const double> x, std::span<const std::size_t> batch,
                  std::span<double> g) const override {
    check(x);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    if (g.size() != dimension()) throw std::invalid_argument("gradient buffer has the wrong size");
    std::fill(g.begin(), g.end(), 0.0);
    const std::size_t d = data_.features;
    double total = 0.0;
    for (std::size_t idx : batch) {
      if (idx >= data_.n_train) throw std::out_of_range("batch index outside the training set");
      const auto f = data_.row(idx);
      const double z = kernels::dot(x.first(d), f) + x[d];
      const double y = data_.y[idx];
      total += softplus(z) - y * z;
      const double r = sigmoid(z) - y;
      kernels::axpy(g.first(d), r, f);
      g[d] += r;
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (auto& gi : g) gi *= scale;
    return total * scale;
  }

  double loss(std::span<const double> x, Split split) const override {
    check(x);
    const auto [begin, end] = data_.range(split);
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double z = logit(x, i);
      total += softplus(z) - data_.y[i] * z;
    }
    return total / static_cast<double>(end - begin);
  }

  double accuracy(std::span<const double> x, Split split) const override {
    check(x);
    const auto [begin, end] = data_.range(split);
    std::size_t correct = 0;
    for (std::size_t i = begin; i < end; ++i) {
      correct += (logit(x, i) > 0.0 ? 1 : 0) == data_.y[i];
    }
    return static_cast<double>(correct) / static_cast<double>(end - begin);
  }

 private:
  double logit(std::span<const double> x, std::size_t i) const {
    return kernels::dot(x.first(data_.features), data_.row(i)) + x[data_.features];
  }

  void check(std::span<const double> x) const {
    if (x.size() != dimension()) throw std::invalid_argument("parameter vector has the wrong size");
  }

  Dataset data_;
};

// Isotropic Gaussian clusters with means on a circle in the first two
// coordinates.
Dataset gaussian_mixture(const ProblemSpec& spec) {
  if (spec.dim < 2) throw std::invalid_argument("mlp problem needs at least two input features");
  if (spec.classes < 2) throw std::invalid_argument("mlp problem needs at least two classes");
  Rng rng(Rng::derive(spec.data_seed, kDataStream));
  Dataset data;
  data.features = spec.dim;
  const double radius = 0.5 * spec.separation / std::sin(std::numbers::pi / static_cast<double>(spec.classes));
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const auto label = static_cast<int>(i % spec.classes);
    const double angle = 2.0 * std::numbers::pi * label / static_cast<double>(spec.classes);
    std::vector<double> point = gaussian_vector(rng, spec.dim);
    point[0] += radius * std::cos(angle);
    point[1] += radius * std::sin(angle);
    data.x.insert(data.x.end(), point.begin(), point.end());
    data.y.push_back(label);
  }
  shuffle_rows(data, rng);
  data.n_train = train_count(spec);
  return data;
}

// Parameter layout: W1 (hidden x in), b1 (hidden), W2 (classes x hidden),
// b2 (classes).
class MlpProblem final : public Problem {
 public:
  MlpProblem(Dataset data, std::size_t hidden, std::size_t classes, std::size_t batch_size)
      : Problem(batch_size), data_(std::move(data)), in_(data_.features), hidden_(hidden),
        classes_(classes) {
    if (hidden_ < 1) throw std::invalid_argument("mlp needs at least one hidden unit");
  }

  ProblemKind kind() const override { return ProblemKind::kMlp; }
  std::size_t dimension() const override {
    return hidden_ * in_ + hidden_ + classes_ * hidden_ + classes_;
  }
  std::size_t num_train() const override { return data_.n_train; }
  bool is_classifier() const override { return true; }
  std::string_view activation() const override { return "tanh"; }

  std::vector<double> initial_point(Rng& rng) const override {
    std::vector<double> x(dimension(), 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t i = 0; i < hidden_ * in_; ++i) x[w1() + i] = s1 * rng.normal();
    for (std::size_t i = 0; i < classes_ * hidden_; ++i) x[w2() + i] = s2 * rng.normal();
    return x;
  }

  double gradient(std::span<const double> x, std::span<const std::size_t> batch,
                  std::span<double> g) const override {
    check(x);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    if (g.size() != dimension()) throw std::invalid_argument("gradient buffer has the wrong size");
    std::fill(g.begin(), g.end(), 0.0);
    std::vector<double> h(hidden_), probs(classes_), dh(hidden_);
    double total = 0.0;
    for (std::size_t idx : batch) {
      if (idx >= data_.n_train) throw std::out_of_range("batch index outside the training set");
      const auto f = data_.row(idx);
      const int label = data_.y[idx];
      total += forward(x, f, h, probs, label);
      // dL/dlogits = p - onehot
      probs[static_cast<std::size_t>(label)] -= 1.0;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t k = 0; k < classes_; ++k) {
        kernels::axpy(g.subspan(w2() + k * hidden_, hidden_), probs[k], h);
        g[b2() + k] += probs[k];
        kernels::axpy(dh, probs[k], x.subspan(w2() + k * hidden_, hidden_));
      }
      for (std::size_t j = 0; j < hidden_; ++j) {
        const double pre = dh[j] * (1.0 - h[j] * h[j]);
        kernels::axpy(g.subspan(w1() + j * in_, in_), pre, f);
        g[b1() + j] += pre;
      }
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (auto& gi : g) gi *= scale;
    return total * scale;
  }

  double loss(std::span<const double> x, Split split) const override {
    check(x);
    const auto [begin, end] = data_.range(split);
    std::vector<double> h(hidden_), probs(classes_);
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += forward(x, data_.row(i), h, probs, data_.y[i]);
    return total / static_cast<double>(end - begin);
  }

  double accuracy(std::span<const double> x, Split split) const override {
    check(x);
    const auto [begin, end] = data_.range(split);
    std::vector<double> h(hidden_), probs(classes_);
    std::size_t correct = 0;
    for (std::size_t i = begin; i < end; ++i) {
      forward(x, data_.row(i), h, probs, data_.y[i]);
      const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
      correct += best == data_.y[i];
    }
    return static_cast<double>(correct) / static_cast<double>(end - begin);
  }

 private:
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden_ * in_; }
  std::size_t w2() const { return b1() + hidden_; }
  std::size_t b2() const { return w2() + classes_ * hidden_; }

  void check(std::span<const double> x) const {
    if (x.size() != dimension()) throw std::invalid_argument("parameter vector has the wrong size");
  }

  // Fills hidden activations and class probabilities; returns the
  // cross-entropy of `label`.
  double forward(std::span<const double> x, std::span<const double> f, std::vector<double>& h,
                 std::vector<double>& probs, int label) const {
    for (std::size_t j = 0; j < hidden_; ++j) {
      h[j] = std::tanh(kernels::dot(x.subspan(w1() + j * in_, in_), f) + x[b1() + j]);
    }
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes_; ++k) {
      probs[k] = kernels::dot(x.subspan(w2() + k * hidden_, hidden_), h) + x[b2() + k];
      max_logit = std::max(max_logit, probs[k]);
    }
    double norm = 0.0;
    for (auto& p : probs) {
      p = std::exp(p - max_logit);
      norm += p;
    }
    const double log_prob = std::log(probs[static_cast<std::size_t>(label)] / norm);
    for (auto& p : probs) p /= norm;
    return -log_prob;
  }

  Dataset data_;
  std::size_t in_;
  std::size_t hidden_;
  std::size_t classes_;
};

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kQuadratic: return "quadratic";
    case ProblemKind::kLogistic: return "logistic";
    case ProblemKind::kMlp: return "mlp";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view text) {
  for (auto kind : {ProblemKind::kQuadratic, ProblemKind::kLogistic, ProblemKind::kMlp}) {
    if (text == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown problem kind '" + std::string(text) + "'");
}

ProblemSpec ProblemSpec::quadratic_default() {
  ProblemSpec spec;
  spec.kind = ProblemKind::kQuadratic;
  spec.dim = 20;
  spec.condition = 100.0;
  spec.batch_size = 1;
  spec.epochs = 2000;
  return spec;
}

ProblemSpec ProblemSpec::logistic_default() {
  ProblemSpec spec;
  spec.kind = ProblemKind::kLogistic;
  spec.dim = 10;
  spec.samples = 500;
  spec.separation = 4.0;
  spec.batch_size = 50;
  spec.epochs = 40;
  return spec;
}

ProblemSpec ProblemSpec::mlp_default() {
  ProblemSpec spec;
  spec.kind = ProblemKind::kMlp;
  spec.dim = 4;
  spec.samples = 900;
  spec.hidden = 32;
  spec.classes = 3;
  spec.separation = 4.0;
  spec.batch_size = 36;
  spec.epochs = 30;
  return spec;
}

std::pair<double, std::vector<double>> gradient(const Problem& problem, std::span<const double> x,
                                                std::span<const std::size_t> batch) {
  std::vector<double> g(problem.dimension());
  const double loss = problem.gradient(x, batch, g);
  return {loss, std::move(g)};
}

std::unique_ptr<Problem> make_quadratic(std::vector<double> a, std::vector<double> b,
                                        double init_distance) {
  return std::make_unique<QuadraticProblem>(std::move(a), std::move(b), init_distance);
}

std::unique_ptr<Problem> make_logistic(std::vector<double> features, std::vector<int> labels,
                                       std::size_t n_train, std::size_t batch_size) {
  if (labels.empty() || features.size() % labels.size() != 0 || features.empty()) {
    throw std::invalid_argument("feature matrix must have one row per label");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("logistic labels must be 0 or 1");
  }
  if (n_train == 0 || n_train > labels.size()) throw std::invalid_argument("bad training row count");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  Dataset data;
  data.features = features.size() / labels.size();
  data.n_train = n_train;
  data.x = std::move(features);
  data.y = std::move(labels);
  return std::make_unique<LogisticProblem>(std::move(data), batch_size);
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::kQuadratic && spec.batch_size < 1) {
    throw std::invalid_argument("batch_size must be positive");
  }
  switch (spec.kind) {
    case ProblemKind::kQuadratic:
      return random_quadratic(spec);
    case ProblemKind::kLogistic:
      return std::make_unique<LogisticProblem>(logistic_blobs(spec), spec.batch_size);
    case ProblemKind::kMlp:
      return std::make_unique<MlpProblem>(gaussian_mixture(spec), spec.hidden, spec.classes,
                                          spec.batch_size);
  }
  throw std::invalid_argument("unknown problem kind");
}

const std::set<std::string>& problem_keys() {
  static const std::set<std::string> keys{
      "kind", "dim", "samples", "hidden", "classes", "condition", "separation",
      "init_distance", "train_fraction", "batch_size", "epochs", "data_seed"};
  return keys;
}

ProblemSpec problem_spec_from(const ConfigDocument& doc, const std::string& section) {
  doc.require_known_keys(section, problem_keys());
  ProblemKind kind;
  try {
    kind = parse_problem_kind(doc.get_string(section, "kind", "quadratic"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
  ProblemSpec spec = kind == ProblemKind::kQuadratic ? ProblemSpec::quadratic_default()
                     : kind == ProblemKind::kLogistic ? ProblemSpec::logistic_default()
                                                      : ProblemSpec::mlp_default();
  const auto size = [&](const char* key, std::size_t fallback) {
    const auto value = doc.get_int(section, key, static_cast<std::int64_t>(fallback));
    if (value < 0) throw ConfigError("[" + section + "] " + key + " must be non-negative");
    return static_cast<std::size_t>(value);
  };
  spec.dim = size("dim", spec.dim);
  spec.samples = size("samples", spec.samples);
  spec.hidden = size("hidden", spec.hidden);
  spec.classes = size("classes", spec.classes);
  spec.batch_size = size("batch_size", spec.batch_size);
  spec.condition = doc.get_double(section, "condition", spec.condition);
  spec.separation = doc.get_double(section, "separation", spec.separation);
  spec.init_distance = doc.get_double(section, "init_distance", spec.init_distance);
  spec.train_fraction = doc.get_double(section, "train_fraction", spec.train_fraction);
  spec.epochs = doc.get_int(section, "epochs", spec.epochs);
  spec.data_seed = static_cast<std::uint64_t>(doc.get_int(section, "data_seed", 0));
  if (spec.epochs < 1) throw ConfigError("[" + section + "] epochs must be positive");
  return spec;
}

void problem_spec_to(const ProblemSpec& spec, ConfigDocument& doc, const std::string& section) {
  doc.set(section, "kind", std::string(to_string(spec.kind)));
  doc.set(section, "dim", std::to_string(spec.dim));
  doc.set(section, "epochs", std::to_string(spec.epochs));
  doc.set(section, "data_seed", std::to_string(spec.data_seed));
  if (spec.kind == ProblemKind::kQuadratic) {
    doc.set(section, "condition", format_double(spec.condition));
    doc.set(section, "init_distance", format_double(spec.init_distance));
    return;
  }
  doc.set(section, "samples", std::to_string(spec.samples));
  doc.set(section, "separation", format_double(spec.separation));
  doc.set(section, "train_fraction", format_double(spec.train_fraction));
  doc.set(section, "batch_size", std::to_string(spec.batch_size));
  if (spec.kind == ProblemKind::kMlp) {
    doc.set(section, "hidden", std::to_string(spec.hidden));
    doc.set(section, "classes", std::to_string(spec.classes));
  }
}

}  // namespace fsgdm
