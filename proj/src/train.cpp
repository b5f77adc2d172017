#include "vihsd/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vihsd/autograd.hpp"
#include "vihsd/checkpoint.hpp"
#include "vihsd/error.hpp"
#include "vihsd/loss.hpp"

namespace vihsd {

std::string_view class_weighting_name(ClassWeighting w) {
  return w == ClassWeighting::Inverse ? "inverse" : "none";
}

ClassWeighting parse_class_weighting(std::string_view name) {
  if (name == "none") return ClassWeighting::None;
  if (name == "inverse") return ClassWeighting::Inverse;
  fail(ErrorKind::Config, "unknown class weighting '" + std::string(name) + "' (expected none or inverse)");
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, what); };
  if (batch_size == 0) bad("batch_size must be positive");
  if (max_epochs == 0) bad("max_epochs must be positive");
  if (patience == 0) bad("patience must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be a finite value >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) bad("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) bad("beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) bad("epsilon must be positive");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) bad("val_fraction must be in [0, 1)");
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (!p.has_grad()) continue;
    auto value = p.data();
    auto grad = p.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      value[i] = static_cast<float>(value[i] - lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

Split stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    fail(ErrorKind::Config, "val_fraction must be in (0, 1) for a split, got " + std::to_string(val_fraction));
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses) {
      fail(ErrorKind::Data, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " is not in {0,1,2}");
    }
    by_class[labels[i]].push_back(i);
  }
  Rng rng(seed);
  Split s;
  for (auto& rows : by_class) {
    rng.shuffle(rows.begin(), rows.end());
    const auto n_val = static_cast<std::size_t>(std::round(val_fraction * static_cast<double>(rows.size())));
    s.validation.insert(s.validation.end(), rows.begin(), rows.begin() + n_val);
    s.train.insert(s.train.end(), rows.begin() + n_val, rows.end());
  }
  if (s.train.empty() || s.validation.empty()) {
    fail(ErrorKind::Config, "val_fraction " + std::to_string(val_fraction) + " on " + std::to_string(labels.size()) +
                                " rows leaves the " + (s.train.empty() ? "training" : "validation") + " side empty");
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

template <typename T>
EvalReport evaluate(const Model<T>& model, const EncodedBatch& data) {
  if (!data.labels) fail(ErrorKind::Contract, "evaluate needs labeled data");
  const auto preds = predict(model, data.ids);
  std::vector<int> predicted;
  predicted.reserve(preds.size());
  for (const auto& p : preds) predicted.push_back(p.label);
  return evaluate_predictions(*data.labels, predicted);
}

template EvalReport evaluate(const Model<float>&, const EncodedBatch&);
template EvalReport evaluate(const Model<double>&, const EncodedBatch&);

TrainResult fit(const Model<float>& model, const EncodedBatch& train, const EncodedBatch& validation,
                const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) fail(ErrorKind::Config, "training set is empty");
  if (!train.labels) fail(ErrorKind::Config, "training set has no labels");
  const EncodedBatch& monitor = validation.size() > 0 ? validation : train;
  if (!monitor.labels) fail(ErrorKind::Config, "validation set has no labels");

  std::vector<float> weights;
  if (cfg.class_weighting == ClassWeighting::Inverse) {
    const auto w = class_weights(label_counts(*train.labels));
    weights.assign(w.begin(), w.end());
  }

  Adam adam(model.trainable_parameters(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  Rng order_rng(cfg.seed);
  Rng dropout_rng = order_rng.split();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  auto best = snapshot_parameters(model);
  bool have_best = false;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const auto batch = train.select(std::span<const std::size_t>(order.data() + begin, end - begin));
      adam.zero_grad();
      auto loss = softmax_cross_entropy<float>(model.forward(batch.ids, true, &dropout_rng), *batch.labels, weights);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "training loss became " << value << " at epoch " << epoch << ", step " << adam.steps() + 1
            << "; try a smaller learning_rate (currently " << cfg.learning_rate << ")";
        fail(ErrorKind::Numeric, msg.str());
      }
      backward(loss);
      adam.step();
      loss_sum += value * static_cast<double>(end - begin);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.validation = evaluate(model, monitor);
    rec.improved = !have_best || rec.validation.macro_f1 > result.best_macro_f1;
    if (rec.improved) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_macro_f1 = rec.validation.macro_f1;
      best = snapshot_parameters(model);
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_best >= cfg.patience) {
      result.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  restore_parameters(model, best);
  return result;
}

std::string format_history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(9);
  out << "epoch,train_loss,val_macro_f1,val_micro_f1,val_weighted_f1,val_accuracy,val_f1_clean,val_f1_offensive,"
         "val_f1_hate\n";
  for (const auto& r : history) {
    const auto& v = r.validation;
    out << r.epoch << ',' << r.train_loss << ',' << v.macro_f1 << ',' << v.micro_f1 << ',' << v.weighted_f1 << ','
        << v.accuracy << ',' << v.per_class[0].f1 << ',' << v.per_class[1].f1 << ',' << v.per_class[2].f1 << '\n';
  }
  return out.str();
}

}  // namespace vihsd
