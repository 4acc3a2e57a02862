#pragma once

// Desk-scale objectives with exact analytic gradients.
//
//   quadratic  0.5 (x - x*)^T A (x - x*), gradient A x - b with b = A x*
//   logistic   mean softplus(z) - y z, z = w.f + bias, labels in {0, 1}
//   mlp        one tanh hidden layer, softmax cross-entropy output

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fsgdm/config.hpp"
#include "fsgdm/rng.hpp"

namespace fsgdm {

enum class ProblemKind { kQuadratic, kLogistic, kMlp };
enum class Split { kTrain, kTest };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view text);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kQuadratic;
  std::size_t dim = 20;          // quadratic dimension or input features
  std::size_t samples = 500;     // classification data set size
  std::size_t hidden = 32;       // mlp hidden units
  std::size_t classes = 3;       // mlp classes
  double condition = 100.0;      // quadratic condition number
  double separation = 4.0;       // distance between class means
  double init_distance = 10.0;   // quadratic start distance from the optimum
  double train_fraction = 0.8;
  std::size_t batch_size = 50;
  std::int64_t epochs = 40;
  std::uint64_t data_seed = 0;

  static ProblemSpec quadratic_default();
  static ProblemSpec logistic_default();
  static ProblemSpec mlp_default();
};

class Problem {
 public:
  virtual ~Problem() = default;

  virtual ProblemKind kind() const = 0;
  virtual std::size_t dimension() const = 0;
  // Quadratic problems have a single pseudo-sample and ignore batches.
  virtual std::size_t num_train() const = 0;
  virtual bool is_classifier() const = 0;
  virtual std::string_view activation() const { return "none"; }

  // Deterministic in `rng`.
  virtual std::vector<double> initial_point(Rng& rng) const = 0;

  // Mean loss over the batch at x; writes the exact gradient into g.
  virtual double gradient(std::span<const double> x, std::span<const std::size_t> batch,
                          std::span<double> g) const = 0;

  // Mean loss over a whole split.
  virtual double loss(std::span<const double> x, Split split = Split::kTrain) const = 0;

  // Fraction correctly classified; NaN for non-classifiers.
  virtual double accuracy(std::span<const double> x, Split split) const = 0;

  std::size_t batch_size() const { return batch_size_; }
  std::size_t batches_per_epoch() const {
    return (num_train() + batch_size_ - 1) / batch_size_;
  }

 protected:
  explicit Problem(std::size_t batch_size) : batch_size_(batch_size) {}

 private:
  std::size_t batch_size_;
};

std::pair<double, std::vector<double>> gradient(const Problem& problem, std::span<const double> x,
                                                std::span<const std::size_t> batch);

// Row-major d x d symmetric positive definite A. Throws std::invalid_argument
// if A is not SPD. init_distance places the start point away from x*.
std::unique_ptr<Problem> make_quadratic(std::vector<double> a, std::vector<double> b,
                                        double init_distance = 10.0);

// Row-major features, one row per label; the first n_train rows train. The
// parameter vector is the weights followed by a bias.
std::unique_ptr<Problem> make_logistic(std::vector<double> features, std::vector<int> labels,
                                       std::size_t n_train, std::size_t batch_size);

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec);

const std::set<std::string>& problem_keys();
ProblemSpec problem_spec_from(const ConfigDocument& doc, const std::string& section = "problem");
void problem_spec_to(const ProblemSpec& spec, ConfigDocument& doc,
                     const std::string& section = "problem");

}  // namespace fsgdm
