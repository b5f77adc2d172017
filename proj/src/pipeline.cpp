#include "vihsd/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "vihsd/embeddings.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

namespace fs = std::filesystem;

std::vector<std::vector<std::string>> preprocess(std::span<const std::string> texts, const Lexicon* lexicon) {
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tokenize(normalize_text(t), lexicon));
  return out;
}

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", 100.0 * v);
  return buf;
}

template <typename V>
std::vector<V> pick(const std::vector<V>& all, const std::vector<std::size_t>& rows) {
  std::vector<V> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(all[r]);
  return out;
}

}  // namespace

std::vector<TrainOutcome> train_models(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.train_data.empty()) fail(ErrorKind::Config, "no training data given (config key train_data or --data)");

  const Dataset data = read_dataset(cfg.train_data);
  if (data.size() == 0) fail(ErrorKind::Data, cfg.train_data.string() + ": dataset has no rows");
  if (!data.labels) fail(ErrorKind::Data, cfg.train_data.string() + ": training data needs a label column");

  Lexicon lexicon;
  if (!cfg.lexicon.empty()) lexicon = Lexicon::load(cfg.lexicon);
  const auto tokens = preprocess(data.texts, &lexicon);

  std::vector<std::size_t> train_rows, val_rows;
  if (cfg.training.val_fraction > 0.0) {
    auto split = stratified_split(*data.labels, cfg.training.val_fraction, cfg.training.seed);
    train_rows = std::move(split.train);
    val_rows = std::move(split.validation);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) train_rows.push_back(i);
  }
  const auto train_tokens = pick(tokens, train_rows);
  const auto vocab = Vocabulary::build(train_tokens, cfg.min_frequency);
  log << "data: " << train_rows.size() << " training rows, "
      << (val_rows.empty() ? std::string("validation on the training rows") : std::to_string(val_rows.size()) + " validation rows")
      << ", vocabulary " << vocab.size() << "\n";

  std::optional<VecFile> vectors;
  if (!cfg.vectors.empty()) {
    vectors = parse_vec_file(cfg.vectors);
    for (const auto& w : vectors->warnings) log << "warning: " << cfg.vectors.string() << ": " << w << "\n";
  }

  std::optional<Dataset> test;
  std::vector<std::vector<std::string>> test_tokens;
  if (!cfg.test_data.empty()) {
    test = read_dataset(cfg.test_data);
    if (!test->labels) fail(ErrorKind::Data, cfg.test_data.string() + ": test data needs a label column");
    test_tokens = preprocess(test->texts, &lexicon);
  }

  std::vector<TrainOutcome> outcomes;
  for (auto kind : cfg.models) {
    const ModelSpec spec = cfg.spec_for(kind);
    const auto name = std::string(model_name(kind));
    const auto train = encode_batch(train_tokens, pick(*data.labels, train_rows), vocab, spec.max_len);
    const auto val = val_rows.empty()
                         ? EncodedBatch{}
                         : encode_batch(pick(tokens, val_rows), pick(*data.labels, val_rows), vocab, spec.max_len);

    Rng init_rng(cfg.training.seed);
    Rng embed_rng = init_rng.split();
    EmbeddingBuild emb = build_embedding_matrix(vectors ? *vectors : VecFile{}, vocab, spec.embed_dim, embed_rng);
    Model<float> model(spec, std::move(emb.table), init_rng);

    TrainOutcome out;
    out.kind = kind;
    out.parameters = param_count(model);
    out.coverage = emb.coverage;
    out.run_dir = cfg.out_dir / name;
    log << "[" << name << "] " << out.parameters << " trainable parameters, vector coverage "
        << percent(emb.coverage) << "%\n";

    const auto start = std::chrono::steady_clock::now();
    out.result = fit(model, train, val, cfg.training, [&](const EpochRecord& r) {
      log << "[" << name << "] epoch " << r.epoch << " loss " << r.train_loss << " val macro-F1 "
          << percent(r.validation.macro_f1) << (r.improved ? " *" : "") << "\n";
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.validation = out.result.history.at(out.result.best_epoch - 1).validation;
    if (test) {
      const auto tb = encode_batch(test_tokens, test->labels, vocab, spec.max_len);
      out.test = evaluate(model, tb);
    }

    fs::create_directories(out.run_dir);
    save_checkpoint(out.run_dir / "checkpoint", model, vocab, lexicon);
    write_file_atomic(out.run_dir / "history.csv", format_history_csv(out.result.history));
    std::ostringstream report;
    report << "model " << name << "\n"
           << "trainable parameters " << out.parameters << "\n"
           << "vector coverage " << percent(out.coverage) << "%\n"
           << "epochs run " << out.result.history.size() << (out.result.stopped_early ? " (early stop)" : "") << "\n"
           << "best epoch " << out.result.best_epoch << "\n"
           << "training time " << seconds << " s\n\n"
           << (val_rows.empty() ? "training-set scores at best epoch\n" : "validation scores at best epoch\n")
           << out.validation.format();
    if (out.test) report << "\ntest scores (" << cfg.test_data.string() << ")\n" << out.test->format();
    write_file_atomic(out.run_dir / "report.txt", report.str());
    log << "[" << name << "] best epoch " << out.result.best_epoch << ", macro-F1 " << percent(out.result.best_macro_f1)
        << ", written to " << out.run_dir.string() << "\n";
    outcomes.push_back(std::move(out));
  }
  if (outcomes.size() > 1) write_file_atomic(cfg.out_dir / "comparison.txt", format_comparison(outcomes));
  return outcomes;
}

std::string format_comparison(const std::vector<TrainOutcome>& outcomes) {
  const bool have_test = !outcomes.empty() && outcomes.front().test.has_value();
  std::string out = have_test ? "Model              F1-score (%) test\n" : "Model              F1-score (%) validation\n";
  char buf[128];
  for (const auto& o : outcomes) {
    const double f1 = have_test && o.test ? o.test->macro_f1 : o.validation.macro_f1;
    std::snprintf(buf, sizeof buf, "%-18s %s\n", std::string(model_name(o.kind)).c_str(), percent(f1).c_str());
    out += buf;
  }
  return out;
}

fs::path resolve_checkpoint_dir(const fs::path& path) {
  if (fs::exists(path / "manifest")) return path;
  if (fs::exists(path / "checkpoint" / "manifest")) return path / "checkpoint";
  return path;
}

EvalReport evaluate_dataset(const LoadedModel& loaded, const Dataset& data) {
  if (data.size() == 0) fail(ErrorKind::Data, "dataset has no rows");
  if (!data.labels) fail(ErrorKind::Data, "evaluation needs a label column");
  const auto tokens = preprocess(data.texts, &loaded.lexicon);
  const auto batch = encode_batch(tokens, data.labels, loaded.vocab, loaded.model.spec().max_len);
  return evaluate(loaded.model, batch);
}

std::string predict_csv(const LoadedModel& loaded, std::span<const std::string> texts) {
  if (texts.empty()) return {};
  const auto tokens = preprocess(texts, &loaded.lexicon);
  const auto batch = encode_batch(tokens, std::nullopt, loaded.vocab, loaded.model.spec().max_len);
  const auto preds = predict(loaded.model, batch.ids);
  std::string out = "text,label,p_clean,p_offensive,p_hate\n";
  char buf[96];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i].probabilities;
    std::snprintf(buf, sizeof buf, ",%d,%.9g,%.9g,%.9g\n", preds[i].label, p[0], p[1], p[2]);
    out += csv_field(texts[i]);
    out += buf;
  }
  return out;
}

}  // namespace vihsd
