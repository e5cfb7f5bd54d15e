#include "msic/eval/utility.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace msic::eval {
namespace {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Pairs {
  Matrix x;  // (n, |S|+|D|+|M|) bag of events at visit t
  Matrix y;  // (n, |M|) medications at visit t+1
};

Pairs collect_pairs(const data::Corpus& corpus) {
  const int ns = corpus.vocabs.symptom.size();
  const int nd = corpus.vocabs.diagnosis.size();
  const int nm = corpus.vocabs.medication.size();
  std::size_t n = 0;
  for (const auto& rec : corpus.records) {
    if (rec.visits.size() > 1) n += rec.visits.size() - 1;
  }
  Pairs out;
  out.x = Matrix::Zero(static_cast<Eigen::Index>(n), ns + nd + nm);
  out.y = Matrix::Zero(static_cast<Eigen::Index>(n), nm);
  Eigen::Index row = 0;
  for (const auto& rec : corpus.records) {
    for (std::size_t t = 0; t + 1 < rec.visits.size(); ++t) {
      const data::Visit& cur = rec.visits[t];
      for (int i : cur.symptoms.indices) out.x(row, i) = 1.0;
      for (int i : cur.diagnoses.indices) out.x(row, ns + i) = 1.0;
      for (int i : cur.medications.indices) out.x(row, ns + nd + i) = 1.0;
      for (int i : rec.visits[t + 1].medications.indices) out.y(row, i) = 1.0;
      ++row;
    }
  }
  return out;
}

}  // namespace

UtilityResult utility_eval(const data::Corpus& train_on,
                           const data::Corpus& eval_on,
                           const UtilityConfig& config) {
  config.validate();
  Pairs train = collect_pairs(train_on);
  Pairs eval = collect_pairs(eval_on);
  if (train.x.rows() == 0) {
    throw ParameterError("utility_eval: training corpus has no visit pairs");
  }
  if (eval.x.rows() == 0) {
    throw ParameterError("utility_eval: evaluation corpus has no visit pairs");
  }

  // Full-batch gradient descent on mean BCE from zero initialization;
  // the closed-form gradient keeps this exactly reproducible.
  const Eigen::Index features = train.x.cols();
  const Eigen::Index targets = train.y.cols();
  Matrix w = Matrix::Zero(features, targets);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(targets);
  const double n = static_cast<double>(train.x.rows());
  for (int it = 0; it < config.iterations; ++it) {
    Matrix logits = (train.x * w).rowwise() + b;
    Matrix probs = 1.0 / (1.0 + (-logits.array()).exp());
    Matrix delta = (probs - train.y) / n;
    w -= config.learning_rate * (train.x.transpose() * delta);
    b -= config.learning_rate * delta.colwise().sum();
  }

  Matrix logits = (eval.x * w).rowwise() + b;
  Matrix probs = 1.0 / (1.0 + (-logits.array()).exp());
  UtilityResult result;
  result.train_pairs = static_cast<std::size_t>(train.x.rows());
  result.eval_pairs = static_cast<std::size_t>(eval.x.rows());
  double jaccard_sum = 0.0;
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double inter = 0.0, uni = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const bool pred = probs(r, c) >= config.threshold;
      const bool truth = eval.y(r, c) > 0.5;
      if (pred && truth) {
        tp += 1.0;
        inter += 1.0;
      } else if (pred) {
        fp += 1.0;
      } else if (truth) {
        fn += 1.0;
      }
      if (pred || truth) uni += 1.0;
    }
    // Empty prediction against empty truth contributes zero.
    jaccard_sum += uni > 0.0 ? inter / uni : 0.0;
  }
  result.jaccard = jaccard_sum / static_cast<double>(probs.rows());
  const double denom = 2.0 * tp + fp + fn;
  result.micro_f1 = denom > 0.0 ? 2.0 * tp / denom : 0.0;
  return result;
}

}  // namespace msic::eval
