#include "wordorder/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordorder/combine/loglinear.hpp"
#include "wordorder/combine/tune.hpp"
#include "wordorder/core/corpus.hpp"
#include "wordorder/core/parallel.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/eval/bench.hpp"
#include "wordorder/eval/bleu.hpp"
#include "wordorder/neural/model_io.hpp"
#include "wordorder/neural/trainer.hpp"
#include "wordorder/ngram/arpa.hpp"
#include "wordorder/ngram/unigram.hpp"
#include "wordorder/rng.hpp"
#include "wordorder/search/beam.hpp"
#include "wordorder/search/scorer.hpp"

namespace wo {
namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

const std::vector<std::string> kScorerKinds{"ngram", "nplm", "rnnlm", "bag2seq"};

struct ScorerSpec {
  std::string kind;
  std::string path;
  double weight = 1.0;
  bool has_weight = false;
};

// "kind:path[:weight]". The weight suffix is recognized only when the text
// after the last colon parses fully as a number, so paths containing colons
// still work.
ScorerSpec parse_scorer_spec(const std::string& text) {
  const std::size_t first = text.find(':');
  if (first == std::string::npos || first == 0 || first + 1 == text.size()) {
    throw UsageError("scorer spec \"" + text + "\" is not of the form kind:path[:weight]");
  }
  ScorerSpec spec;
  spec.kind = text.substr(0, first);
  if (std::find(kScorerKinds.begin(), kScorerKinds.end(), spec.kind) == kScorerKinds.end()) {
    throw UsageError("unknown scorer kind \"" + spec.kind +
                     "\" (expected ngram, nplm, rnnlm, or bag2seq)");
  }
  spec.path = text.substr(first + 1);
  const std::size_t last = spec.path.rfind(':');
  if (last != std::string::npos && last + 1 < spec.path.size()) {
    const std::string tail = spec.path.substr(last + 1);
    std::size_t used = 0;
    try {
      const double weight = std::stod(tail, &used);
      if (used == tail.size()) {
        spec.weight = weight;
        spec.has_weight = true;
        spec.path.resize(last);
      }
    } catch (const std::exception&) {
    }
  }
  if (spec.path.empty()) {
    throw UsageError("scorer spec \"" + text + "\" has an empty model path");
  }
  return spec;
}

struct LoadedScorers {
  Vocabulary vocab;  // the shared id space all scorers agree on
  std::vector<ScorerPtr> scorers;
  std::vector<std::string> names;
  std::vector<double> weights;
  std::shared_ptr<const NgramModel> first_ngram;  // unigram-table fallback for heuristic f
};

LoadedScorers load_scorers(const std::vector<std::string>& specs, const std::string& vocab_path) {
  if (specs.empty()) throw UsageError("at least one --scorer is required");

  std::vector<ScorerSpec> parsed;
  bool needs_vocab_file = false;
  for (const std::string& text : specs) {
    parsed.push_back(parse_scorer_spec(text));
    needs_vocab_file = needs_vocab_file || parsed.back().kind == "ngram";
  }
  if (needs_vocab_file && vocab_path.empty()) {
    throw UsageError("--vocab is required when an ngram scorer is used");
  }

  LoadedScorers loaded;
  std::optional<Vocabulary> vocab;
  if (!vocab_path.empty()) vocab = Vocabulary::load(vocab_path);

  for (const ScorerSpec& spec : parsed) {
    if (spec.kind == "ngram") {
      auto model = std::make_shared<NgramModel>(import_arpa(spec.path, *vocab));
      if (!loaded.first_ngram) loaded.first_ngram = model;
      loaded.scorers.push_back(std::make_shared<NgramScorer>(std::move(model), *vocab));
    } else {
      std::shared_ptr<NeuralModel> model = load_model(spec.path);
      if (model->arch() != spec.kind) {
        throw DataError(spec.path + ": artifact was trained as " + model->arch() +
                        " but the scorer spec says " + spec.kind);
      }
      if (!vocab) vocab = model->vocab();
      loaded.scorers.push_back(std::make_shared<NeuralScorer>(std::move(model)));
    }
    loaded.names.push_back(spec.kind);
    loaded.weights.push_back(spec.weight);
  }

  loaded.vocab = std::move(*vocab);
  for (std::size_t i = 0; i < loaded.scorers.size(); ++i) {
    if (loaded.scorers[i]->vocab().hash() != loaded.vocab.hash()) {
      throw DataError("scorer " + loaded.names[i] +
                      " was built over a different vocabulary than the other scorers");
    }
  }
  return loaded;
}

// Overrides spec weights from a "name<TAB>weight" file; entries must match
// the scorer list one-to-one, in order.
void apply_weights_file(LoadedScorers& loaded, const std::string& path) {
  const auto entries = load_weights(path);
  if (entries.size() != loaded.scorers.size()) {
    throw DataError(path + ": has " + std::to_string(entries.size()) + " weights for " +
                    std::to_string(loaded.scorers.size()) + " scorers");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != loaded.names[i]) {
      throw DataError(path + ": weight " + std::to_string(i + 1) + " names scorer \"" +
                      entries[i].first + "\" but the scorer list has \"" + loaded.names[i] +
                      "\" in that position");
    }
    loaded.weights[i] = entries[i].second;
  }
}

// The decoding scorer: the member itself when it is alone with weight 1,
// otherwise a log-linear combination.
ScorerPtr combined_scorer(const LoadedScorers& loaded) {
  if (loaded.scorers.size() == 1 && loaded.weights[0] == 1.0) return loaded.scorers[0];
  return std::make_shared<LogLinearCombo>(loaded.scorers, loaded.weights);
}

// Decode-time flags shared by decode, tune, and bench.
struct DecodeFlags {
  std::size_t beam = 64;
  std::string heuristic = "none";
  bool recombine = false;
  std::size_t context_size = 4;
  double f_weight = 1.0;
  bool renormalize = false;
  std::string f_unigrams;  // corpus file backing heuristic f
  std::size_t workers = 1;

  void attach(CLI::App& cmd) {
    cmd.add_option("--beam", beam, "Beam width")->capture_default_str();
    cmd.add_option("--heuristic", heuristic, "Pruning heuristic: none, f, or g")
        ->check(CLI::IsMember({"none", "f", "g"}))
        ->capture_default_str();
    cmd.add_flag("--recombine", recombine, "Merge hypotheses with equal search state");
    cmd.add_option("--context-size", context_size,
                   "Prefix context length compared when recombining")
        ->capture_default_str();
    cmd.add_option("--f-weight", f_weight, "Scale on the future-cost estimate")
        ->capture_default_str();
    cmd.add_flag("--renormalize", renormalize,
                 "Renormalize each step's scores over the remaining-bag candidates");
    cmd.add_option("--f-unigrams", f_unigrams,
                   "Corpus file for the future-cost unigram table (default: the first ngram "
                   "scorer's unigram level)");
    cmd.add_option("--workers", workers, "Sentence-parallel worker threads")
        ->capture_default_str();
  }

  BeamConfig beam_config() const {
    BeamConfig config;
    config.beam_size = beam;
    config.heuristic = heuristic_from_string(heuristic);
    config.recombination = recombine;
    config.recombination_context = context_size;
    config.f_weight = f_weight;
    config.renormalize = renormalize;
    return config;
  }

  // Builds the unigram table when heuristic f needs one.
  std::unique_ptr<UnigramTable> unigram_table(const LoadedScorers& loaded) const {
    if (heuristic != "f") return nullptr;
    if (!f_unigrams.empty()) {
      return std::make_unique<UnigramTable>(
          UnigramTable::from_corpus(load_corpus(f_unigrams, loaded.vocab), loaded.vocab));
    }
    if (loaded.first_ngram) {
      return std::make_unique<UnigramTable>(
          UnigramTable::from_model(*loaded.first_ngram, loaded.vocab));
    }
    throw UsageError(
        "heuristic f needs unigram estimates: pass --f-unigrams or include an ngram scorer");
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

// Experiment provenance: the fully resolved key=value settings land next to
// the command's primary output, under a section named after the subcommand
// so the file can be fed straight back to --config.
void write_resolved_config(const CLI::App& cmd, const std::string& primary_output) {
  auto out = open_output(primary_output + ".config");
  out << '[' << cmd.get_name() << "]\n" << cmd.config_to_str(true, false);
  if (!out.flush()) throw DataError(primary_output + ".config: write failed");
}

std::vector<Bag> bags_from_lines(const std::vector<std::vector<std::string>>& lines,
                                 const Vocabulary& vocab, bool oov_to_unk) {
  std::vector<Bag> bags;
  bags.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw DataError("line " + std::to_string(i + 1) + ": empty input line");
    }
    Bag bag;
    for (const std::string& token : lines[i]) {
      const std::optional<TokenId> id = vocab.id_of(token);
      if (id) {
        bag.insert(*id);
      } else if (oov_to_unk) {
        bag.insert(vocab.unk());
      } else {
        throw DataError("line " + std::to_string(i + 1) + ": token \"" + token +
                        "\" is not in the scorer vocabulary (use --oov unk to fold it)");
      }
    }
    bags.push_back(std::move(bag));
  }
  return bags;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string kind = "rnnlm";
  std::string corpus;
  std::string dev;
  std::string out;
  std::string vocab_in;
  std::string vocab_out;
  std::size_t vocab_size = 10000;
  bool two_unks = false;
  std::string preset = "desk";
  // n-gram settings
  std::size_t order = 3;
  std::string smoothing = "auto";
  // neural settings; zero means "take the preset's value"
  TrainConfig neural;
};

int cmd_train(const CLI::App& cmd, TrainOptions& opt) {
  const auto surface_corpus = load_surface_corpus(opt.corpus);
  Vocabulary vocab = opt.vocab_in.empty()
                         ? build_vocab(surface_corpus, opt.vocab_size, opt.two_unks)
                         : Vocabulary::load(opt.vocab_in);
  const std::vector<TokenSequence> corpus = load_corpus(opt.corpus, vocab);

  if (opt.vocab_out.empty()) opt.vocab_out = opt.out + ".vocab";
  vocab.save(opt.vocab_out);

  if (opt.kind == "ngram") {
    static const std::map<std::string, Smoothing> kSmoothings{
        {"auto", Smoothing::Auto},
        {"mle", Smoothing::Mle},
        {"wb", Smoothing::WittenBell},
        {"kn", Smoothing::KneserNey}};
    const NgramModel model = train_ngram(corpus, vocab, opt.order, kSmoothings.at(opt.smoothing));
    export_arpa(model, vocab, opt.out);
    std::cout << "trained " << opt.order << "-gram model on " << corpus.size()
              << " sentences -> " << opt.out << "\n";
  } else {
    opt.neural.arch = opt.kind;
    std::vector<TokenSequence> dev;
    if (!opt.dev.empty()) dev = load_corpus(opt.dev, vocab);
    TrainLog log;
    const std::unique_ptr<NeuralModel> model =
        train_neural(corpus, opt.dev.empty() ? nullptr : &dev, std::move(vocab), opt.neural, &log);
    save_model(*model, opt.out);

    auto log_out = open_output(opt.out + ".log");
    log_out << "epoch\ttrain_ppl\tdev_ppl\tlearning_rate\n";
    for (const EpochStats& epoch : log.epochs) {
      char row[128];
      std::snprintf(row, sizeof(row), "%zu\t%.6f\t%.6f\t%.6g\n", epoch.epoch, epoch.train_ppl,
                    epoch.dev_ppl, epoch.learning_rate);
      log_out << row;
    }
    std::cout << "trained " << opt.kind << " on " << corpus.size() << " sentences, final dev ppl "
              << (log.epochs.empty() ? 0.0 : log.epochs.back().dev_ppl) << " -> " << opt.out
              << "\n";
  }
  write_resolved_config(cmd, opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// shuffle

struct ShuffleOptions {
  std::string input;
  std::string out;
  std::string mode = "random";
  std::uint64_t seed = 1;
};

int cmd_shuffle(const CLI::App& cmd, const ShuffleOptions& opt) {
  auto lines = load_surface_corpus(opt.input);
  Rng rng(opt.seed);
  auto out = open_output(opt.out);
  for (auto& line : lines) {
    if (opt.mode == "sorted") {
      std::sort(line.begin(), line.end());
    } else {
      rng.shuffle(line);
    }
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out << ' ';
      out << line[i];
    }
    out << '\n';
  }
  if (!out.flush()) throw DataError(opt.out + ": write failed");
  std::cout << "shuffled " << lines.size() << " lines (" << opt.mode << ") -> " << opt.out
            << "\n";
  write_resolved_config(cmd, opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOptions {
  std::string input;
  std::string out;
  std::vector<std::string> scorers;
  std::string weights;
  std::string vocab;
  std::string oov = "error";
  std::size_t nbest = 1;
  DecodeFlags flags;
};

int cmd_decode(const CLI::App& cmd, const DecodeOptions& opt) {
  LoadedScorers loaded = load_scorers(opt.scorers, opt.vocab);
  if (!opt.weights.empty()) apply_weights_file(loaded, opt.weights);
  const ScorerPtr scorer = combined_scorer(loaded);
  const BeamConfig config = opt.flags.beam_config();
  const std::unique_ptr<UnigramTable> unigrams = opt.flags.unigram_table(loaded);

  const std::vector<Bag> bags =
      bags_from_lines(load_surface_corpus(opt.input), loaded.vocab, opt.oov == "unk");

  std::vector<std::vector<Hypothesis>> results(bags.size());
  parallel_for(bags.size(), opt.flags.workers, [&](std::size_t i) {
    auto finals = beam_search(bags[i], *scorer, config, unigrams.get());
    if (finals.size() > opt.nbest) finals.resize(opt.nbest);
    results[i] = std::move(finals);
  });

  auto out = open_output(opt.out);
  for (const auto& finals : results) {
    out << join_surfaces(finals.front().prefix, loaded.vocab) << '\n';
  }
  if (!out.flush()) throw DataError(opt.out + ": write failed");

  if (opt.nbest > 1) {
    auto nbest_out = open_output(opt.out + ".nbest");
    for (std::size_t i = 0; i < results.size(); ++i) {
      for (std::size_t rank = 0; rank < results[i].size(); ++rank) {
        char score[32];
        std::snprintf(score, sizeof(score), "%.8f", results[i][rank].s);
        nbest_out << i << " ||| " << rank + 1 << " ||| "
                  << join_surfaces(results[i][rank].prefix, loaded.vocab) << " ||| " << score
                  << '\n';
      }
    }
    if (!nbest_out.flush()) throw DataError(opt.out + ".nbest: write failed");
  }

  std::cout << "decoded " << bags.size() << " sentences with " << scorer->name() << " -> "
            << opt.out << "\n";
  write_resolved_config(cmd, opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneOptions {
  std::string dev;
  std::string out;
  std::vector<std::string> scorers;
  std::string vocab;
  std::size_t budget = 100;
  std::size_t tune_beam = 5;
  DecodeFlags flags;
};

int cmd_tune(const CLI::App& cmd, const TuneOptions& opt) {
  const LoadedScorers loaded = load_scorers(opt.scorers, opt.vocab);
  for (std::size_t i = 0; i < loaded.weights.size(); ++i) {
    if (loaded.weights[i] != 1.0) {
      throw UsageError("tuning always starts from uniform weights; drop the :" +
                       std::to_string(loaded.weights[i]) + " suffix on scorer " +
                       loaded.names[i]);
    }
  }
  const std::vector<TokenSequence> dev = load_corpus(opt.dev, loaded.vocab);
  const std::unique_ptr<UnigramTable> unigrams = opt.flags.unigram_table(loaded);

  TuneConfig config;
  config.budget = opt.budget;
  config.beam_size = opt.tune_beam;
  config.decode = opt.flags.beam_config();
  config.unigrams = unigrams.get();
  config.workers = opt.flags.workers;

  const TuneResult result = tune_weights(loaded.scorers, dev, config);
  save_weights(opt.out, loaded.names, result.weights);

  auto log_out = open_output(opt.out + ".log");
  log_out << "evaluation\tincumbent_bleu\n";
  for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
    char row[64];
    std::snprintf(row, sizeof(row), "%zu\t%.4f\n", i + 1, result.trajectory[i]);
    log_out << row;
  }

  char bleu[32];
  std::snprintf(bleu, sizeof(bleu), "%.2f", result.best_bleu);
  std::cout << "tuned " << loaded.scorers.size() << " scorers in " << result.evaluations
            << " evaluations; dev BLEU " << bleu << " (beam " << opt.tune_beam << ") -> "
            << opt.out << "\n";
  for (std::size_t i = 0; i < result.weights.size(); ++i) {
    std::cout << "  " << loaded.names[i] << "\t" << result.weights[i] << "\n";
  }
  write_resolved_config(cmd, opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string hyp;
  std::string ref;
  std::string out;
};

int cmd_eval(const CLI::App& cmd, const EvalOptions& opt) {
  const BleuReport report = corpus_bleu(load_surface_corpus(opt.hyp), load_surface_corpus(opt.ref));
  std::cout << report.pretty() << "\n" << report.machine_row() << "\n";
  if (!opt.out.empty()) {
    auto out = open_output(opt.out);
    out << report.pretty() << "\n" << report.machine_row() << "\n";
    if (!out.flush()) throw DataError(opt.out + ": write failed");
    write_resolved_config(cmd, opt.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::string input;
  std::string out;
  std::vector<std::string> sets;
  std::string vocab;
  std::string oov = "error";
  std::vector<std::size_t> beams{1, 5, 64, 512};
  std::vector<std::string> heuristics{"none"};
  std::string f_unigrams;
  std::size_t workers = 1;
  std::size_t limit = 0;
};

int cmd_bench(const CLI::App& cmd, const BenchOptions& opt) {
  if (opt.sets.empty()) throw UsageError("at least one --set label=spec[+spec...] is required");

  // Each set owns its scorers for the duration of the run.
  struct Set {
    std::string label;
    LoadedScorers loaded;
    ScorerPtr scorer;
    std::unique_ptr<UnigramTable> unigrams;
  };
  std::vector<Set> sets;
  for (const std::string& text : opt.sets) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
      throw UsageError("--set \"" + text + "\" is not of the form label=spec[+spec...]");
    }
    Set set;
    set.label = text.substr(0, eq);
    std::vector<std::string> specs;
    std::string rest = text.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const std::size_t plus = rest.find('+', pos);
      specs.push_back(rest.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos));
      if (plus == std::string::npos) break;
      pos = plus + 1;
    }
    set.loaded = load_scorers(specs, opt.vocab);
    set.scorer = combined_scorer(set.loaded);
    if (std::find(opt.heuristics.begin(), opt.heuristics.end(), "f") != opt.heuristics.end()) {
      DecodeFlags flags;
      flags.heuristic = "f";
      flags.f_unigrams = opt.f_unigrams;
      set.unigrams = flags.unigram_table(set.loaded);
    }
    sets.push_back(std::move(set));
  }

  std::vector<Bag> bags =
      bags_from_lines(load_surface_corpus(opt.input), sets.front().loaded.vocab,
                      opt.oov == "unk");
  if (opt.limit > 0 && bags.size() > opt.limit) bags.resize(opt.limit);

  std::vector<BenchEntry> entries;
  for (const Set& set : sets) {
    for (const std::size_t beam : opt.beams) {
      for (const std::string& heuristic : opt.heuristics) {
        BenchEntry entry;
        entry.label = set.label + "/b" + std::to_string(beam) + "/" + heuristic;
        entry.scorer = set.scorer.get();
        entry.config.beam_size = beam;
        entry.config.heuristic = heuristic_from_string(heuristic);
        entry.unigrams = set.unigrams.get();
        entry.workers = opt.workers;
        entries.push_back(std::move(entry));
      }
    }
  }

  const TimingReport report = benchmark_decode(bags, entries);
  std::cout << report.tsv();
  auto out = open_output(opt.out);
  out << report.tsv();
  if (!out.flush()) throw DataError(opt.out + ": write failed");
  write_resolved_config(cmd, opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// wiring

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"word ordering toolkit: training, constrained decoding, tuning, evaluation"};
  app.require_subcommand(1);
  // One config option at the root (CLI11 reads config files only there);
  // resolved-config files address each subcommand through its section.
  // fallthrough lets "--config" appear after the subcommand name; the error
  // mode rejects unknown config keys instead of ignoring them.
  app.set_config("--config", "", "Read key=value defaults from a file; flags override")
      ->configurable(false);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  // train ---------------------------------------------------------------
  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train an n-gram or neural model");
  train_cmd->add_option("--kind", train.kind, "Model kind")
      ->check(CLI::IsMember(kScorerKinds))
      ->capture_default_str();
  train_cmd->add_option("--corpus", train.corpus, "Training text, one sentence per line")
      ->required();
  train_cmd->add_option("--dev", train.dev, "Dev text for perplexity-based learning-rate decay");
  train_cmd->add_option("--out", train.out, "Model artifact path")->required();
  train_cmd->add_option("--vocab", train.vocab_in, "Existing vocabulary file (skips building)");
  train_cmd->add_option("--vocab-out", train.vocab_out,
                        "Where to save the vocabulary (default: <out>.vocab)");
  train_cmd->add_option("--vocab-size", train.vocab_size, "Max non-reserved vocabulary entries")
      ->capture_default_str();
  train_cmd->add_flag("--two-unks", train.two_unks, "Reserve a second unknown token");
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--smoothing", train.smoothing, "n-gram smoothing")
      ->check(CLI::IsMember({"auto", "mle", "wb", "kn"}))
      ->capture_default_str();
  // Dimension defaults are full scale (embeddings 300, hidden 500); the desk
  // preset shrinks them to the library's CI-sized defaults.
  std::string preset = "ptb";
  train_cmd->add_option("--preset", preset, "Dimension preset: ptb (300/500) or desk (small)")
      ->check(CLI::IsMember({"desk", "ptb"}))
      ->capture_default_str();
  CLI::Option* embed_opt =
      train_cmd->add_option("--embed", train.neural.embed, "Embedding width");
  CLI::Option* hidden_opt =
      train_cmd->add_option("--hidden", train.neural.hidden, "Hidden width");
  CLI::Option* attn_opt =
      train_cmd->add_option("--attn", train.neural.attn, "Annotation width (bag2seq)");
  train_cmd->add_option("--context", train.neural.context, "Window length (nplm)")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.neural.epochs, "Training epochs")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.neural.learning_rate, "Initial learning rate")
      ->capture_default_str();
  train_cmd->add_option("--clip", train.neural.clip, "Gradient-norm ceiling")
      ->capture_default_str();
  train_cmd->add_option("--init-range", train.neural.init_range, "Uniform init half-width")
      ->capture_default_str();
  train_cmd->add_option("--dev-fraction", train.neural.dev_fraction,
                        "Holdout share when --dev is absent")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.neural.seed, "Initialization and shuffle seed")
      ->capture_default_str();
  train_cmd->callback([&] {
    if (preset == "ptb") {
      if (!*embed_opt) train.neural.embed = 300;
      if (!*hidden_opt) train.neural.hidden = 500;
      if (!*attn_opt) train.neural.attn = 500;
    }
    // Push the effective dimensions back into the options so the resolved
    // config reproduces this run even though the preset filled them in.
    embed_opt->default_val(train.neural.embed);
    hidden_opt->default_val(train.neural.hidden);
    attn_opt->default_val(train.neural.attn);
  });

  // shuffle ---------------------------------------------------------------
  ShuffleOptions shuffle;
  CLI::App* shuffle_cmd =
      app.add_subcommand("shuffle", "Turn sentences into bag files (sorted or seeded random)");
  shuffle_cmd->add_option("--input", shuffle.input, "Input sentences")->required();
  shuffle_cmd->add_option("--out", shuffle.out, "Output bag file")->required();
  shuffle_cmd->add_option("--mode", shuffle.mode, "random or sorted")
      ->check(CLI::IsMember({"random", "sorted"}))
      ->capture_default_str();
  shuffle_cmd->add_option("--seed", shuffle.seed, "Shuffle seed (random mode)")
      ->capture_default_str();

  // decode ---------------------------------------------------------------
  DecodeOptions decode;
  CLI::App* decode_cmd = app.add_subcommand("decode", "Order bags with constrained beam search");
  decode_cmd->add_option("--input", decode.input, "Bag file, one multiset per line")->required();
  decode_cmd->add_option("--out", decode.out, "Ordered output file")->required();
  decode_cmd
      ->add_option("--scorer", decode.scorers, "Scorer spec kind:path[:weight] (repeatable)")
      ->required();
  decode_cmd->add_option("--weights", decode.weights, "Weights file overriding inline weights");
  decode_cmd->add_option("--vocab", decode.vocab, "Vocabulary file (required for ngram scorers)");
  decode_cmd->add_option("--oov", decode.oov, "Out-of-vocabulary input handling")
      ->check(CLI::IsMember({"error", "unk"}))
      ->capture_default_str();
  decode_cmd->add_option("--nbest", decode.nbest, "Also write <out>.nbest with this many rows")
      ->capture_default_str();
  decode.flags.attach(*decode_cmd);

  // tune ---------------------------------------------------------------
  TuneOptions tune;
  CLI::App* tune_cmd =
      app.add_subcommand("tune", "Tune combination weights against dev BLEU");
  tune_cmd->add_option("--dev", tune.dev, "Dev sentences (references; bags derive from them)")
      ->required();
  tune_cmd->add_option("--out", tune.out, "Weights file to write")->required();
  tune_cmd->add_option("--scorer", tune.scorers, "Scorer spec kind:path (repeatable)")
      ->required();
  tune_cmd->add_option("--vocab", tune.vocab, "Vocabulary file (required for ngram scorers)");
  tune_cmd->add_option("--budget", tune.budget, "Max dev BLEU evaluations")
      ->capture_default_str();
  tune_cmd->add_option("--tune-beam", tune.tune_beam, "Reduced beam width during tuning")
      ->capture_default_str();
  tune.flags.attach(*tune_cmd);

  // eval ---------------------------------------------------------------
  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Corpus BLEU of a hypothesis file");
  eval_cmd->add_option("--hyp", eval.hyp, "Hypothesis file")->required();
  eval_cmd->add_option("--ref", eval.ref, "Reference file")->required();
  eval_cmd->add_option("--out", eval.out, "Also write the report here");

  // bench ---------------------------------------------------------------
  BenchOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Time decoding across scorer sets, beams, and heuristics");
  bench_cmd->add_option("--input", bench.input, "Bag file to decode")->required();
  bench_cmd->add_option("--out", bench.out, "TSV report path")->required();
  bench_cmd
      ->add_option("--set", bench.sets, "Scorer set label=spec[+spec...] (repeatable)")
      ->required();
  bench_cmd->add_option("--vocab", bench.vocab, "Vocabulary file (required for ngram scorers)");
  bench_cmd->add_option("--oov", bench.oov, "Out-of-vocabulary input handling")
      ->check(CLI::IsMember({"error", "unk"}))
      ->capture_default_str();
  bench_cmd->add_option("--beams", bench.beams, "Beam widths to time")->capture_default_str();
  bench_cmd->add_option("--heuristics", bench.heuristics, "Heuristics to time")
      ->check(CLI::IsMember({"none", "f", "g"}))
      ->capture_default_str();
  bench_cmd->add_option("--f-unigrams", bench.f_unigrams,
                        "Corpus file for the future-cost unigram table");
  bench_cmd->add_option("--workers", bench.workers,
                        "Worker threads (rows with workers > 1 are not comparable)")
      ->capture_default_str();
  bench_cmd->add_option("--limit", bench.limit, "Use only the first N input lines");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return 1;
    }

    if (train_cmd->parsed()) return cmd_train(*train_cmd, train);
    if (shuffle_cmd->parsed()) return cmd_shuffle(*shuffle_cmd, shuffle);
    if (decode_cmd->parsed()) return cmd_decode(*decode_cmd, decode);
    if (tune_cmd->parsed()) return cmd_tune(*tune_cmd, tune);
    if (eval_cmd->parsed()) return cmd_eval(*eval_cmd, eval);
    if (bench_cmd->parsed()) return cmd_bench(*bench_cmd, bench);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace wo
