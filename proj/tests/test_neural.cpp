#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <unistd.h>

#include "wordorder/core/bag.hpp"
#include "wordorder/core/vocabulary.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/neural/attention.hpp"
#include "wordorder/neural/bag2seq.hpp"
#include "wordorder/neural/gradcheck.hpp"
#include "wordorder/neural/lstm.hpp"
#include "wordorder/neural/model_io.hpp"
#include "wordorder/neural/nplm.hpp"
#include "wordorder/neural/rnnlm.hpp"
#include "wordorder/neural/trainer.hpp"
#include "wordorder/rng.hpp"

namespace {

using namespace wo;

Vocabulary abc_vocab() {
  return Vocabulary::from_tokens(
      {Vocabulary::kBos, Vocabulary::kEos, Vocabulary::kUnk, "a", "b", "c"}, false);
}
constexpr TokenId A = 3, B = 4, C = 5;

// Deterministic parameter fill mirrored by the oracle that froze the goldens
// below: the k-th scalar written (1-based, registration order) is 0.1 sin(k).
struct Filler {
  std::size_t k = 0;
  double next() { return 0.1 * std::sin(static_cast<double>(++k)); }
  void fill(Tensor& t) {
    for (double& v : t.value) v = next();
  }
  void fill(ParameterSet& params) {
    for (Tensor& t : params.tensors()) fill(t);
  }
};

bool close(double a, double b, double tol = 1e-12) {
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1.0});
}

double dist_mass(const std::vector<double>& log_dist) {
  double s = 0.0;
  for (double lp : log_dist) s += std::exp(lp);
  return s;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& tag)
      : path("/tmp/wordorder_neural_" + tag + "_" + std::to_string(getpid())) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("lstm step matches the hand-executed forward pass") {
  Tensor wx{"wx", {8, 2}, std::vector<double>(16), std::vector<double>(16)};
  Tensor wh{"wh", {8, 2}, std::vector<double>(16), std::vector<double>(16)};
  Tensor b{"b", {8}, std::vector<double>(8), std::vector<double>(8)};
  Filler fl;
  fl.fill(wx);
  fl.fill(wh);
  fl.fill(b);
  const LstmCell cell(wx, wh, b);

  const std::vector<double> x{0.5, -0.3}, h_prev{0.1, 0.2}, c_prev{-0.1, 0.4};
  LstmStepCache cache;
  lstm_forward(cell, x, h_prev, c_prev, cache);

  CHECK(close(cache.h[0], -0.008029562413379395, 1e-12));
  CHECK(close(cache.h[1], 0.1240124465806429, 1e-12));
  CHECK(close(cache.c[0], -0.01616966477835244, 1e-12));
  CHECK(close(cache.c[1], 0.2518991084392253, 1e-12));
  // Inputs are cached for the backward pass.
  CHECK(cache.x == x);
  CHECK(cache.h_prev == h_prev);
  CHECK(cache.c_prev == c_prev);
}

TEST_CASE("additive attention matches the hand-evaluated energies") {
  Filler fl;
  std::vector<double> state_w(4), annot_w(4), v(2);
  for (double& t : state_w) t = fl.next();
  for (double& t : annot_w) t = fl.next();
  for (double& t : v) t = fl.next();
  AttentionParams params;
  params.state_w = state_w;
  params.annot_w = annot_w;
  params.v = v;
  params.s_dim = 2;
  params.h_dim = 2;
  params.a_dim = 2;

  const std::vector<double> h_prev{0.3, -0.2};
  const std::vector<double> annotations{0.5, 0.1, -0.4, 0.9};

  const AttentionResult res = attention_context(params, h_prev, annotations);
  CHECK(close(res.weights[0], 0.4996123012651871, 1e-12));
  CHECK(close(res.weights[1], 0.5003876987348129, 1e-12));
  CHECK(close(res.context[0], 0.049651071138668346, 1e-12));
  CHECK(close(res.context[1], 0.5003101589878504, 1e-12));
  CHECK(close(res.weights[0] + res.weights[1], 1.0, 1e-12));
}

TEST_CASE("attention degenerate cases") {
  Filler fl;
  std::vector<double> state_w(4), annot_w(4), v(2);
  for (double& t : state_w) t = fl.next();
  for (double& t : annot_w) t = fl.next();
  for (double& t : v) t = fl.next();
  AttentionParams params;
  params.state_w = state_w;
  params.annot_w = annot_w;
  params.v = v;
  params.s_dim = 2;
  params.h_dim = 2;
  params.a_dim = 2;
  const std::vector<double> h_prev{0.3, -0.2};

  SUBCASE("single annotation: context equals it, weight 1") {
    const std::vector<double> one{0.7, -0.2};
    const AttentionResult res = attention_context(params, h_prev, one);
    CHECK(res.weights == std::vector<double>{1.0});
    CHECK(close(res.context[0], 0.7));
    CHECK(close(res.context[1], -0.2));
  }
  SUBCASE("identical annotations: context equals the shared annotation") {
    const std::vector<double> same{0.7, -0.2, 0.7, -0.2, 0.7, -0.2};
    const AttentionResult res = attention_context(params, h_prev, same);
    CHECK(close(res.context[0], 0.7, 1e-12));
    CHECK(close(res.context[1], -0.2, 1e-12));
  }
}

TEST_CASE("rnnlm conditionals match the hand-executed forward pass") {
  RnnLmModel model(abc_vocab(), 2, 2);
  Filler().fill(model.params());

  const NeuralStatePtr start = model.begin(nullptr);
  const std::vector<double>& d0 = model.log_dist(*start);
  const std::vector<double> want0{-1.7071479491258759, -1.7949244345131532, -1.8709916199780547,
                                  -1.878478201740996,  -1.8042921436289212, -1.7087428839762668};
  REQUIRE(d0.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d0[i], want0[i], 1e-11));

  const NeuralStatePtr after_a = model.advance(*start, A);
  const std::vector<double>& d1 = model.log_dist(*after_a);
  const std::vector<double> want1{-1.7074234443563077, -1.796345425961624,  -1.8692618242407788,
                                  -1.8782252900256446, -1.8059608178719748, -1.7073353503619086};
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d1[i], want1[i], 1e-11));

  CHECK(close(model.sentence_loss({A, B}), 5.481107839593072, 1e-11));
}

TEST_CASE("nplm conditionals match the hand-executed forward pass") {
  NplmModel model(abc_vocab(), 2, 3, 2);
  Filler().fill(model.params());

  const NeuralStatePtr start = model.begin(nullptr);
  const std::vector<double>& d0 = model.log_dist(*start);
  const std::vector<double> want0{-1.711765389988094,  -1.763833094554061, -1.8770799272224163,
                                  -1.873737077977113, -1.823882359081506, -1.7143344330929868};
  REQUIRE(d0.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d0[i], want0[i], 1e-11));

  const NeuralStatePtr after_a = model.advance(*start, A);
  const std::vector<double>& d1 = model.log_dist(*after_a);
  const std::vector<double> want1{-1.711922299933621,  -1.7636735931347307, -1.877263426654108,
                                  -1.8735578522359835, -1.8240783228881967, -1.7141502523982086};
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d1[i], want1[i], 1e-11));

  CHECK(close(model.sentence_loss({A, B}), 5.460962965178022, 1e-11));
}

TEST_CASE("bag2seq conditionals match the hand-executed forward pass") {
  Bag2SeqModel model(abc_vocab(), 2, 2, 2);
  Filler().fill(model.params());

  Bag bag;
  bag.insert(A);
  bag.insert(B);
  const std::vector<double> annots = model.encode(bag);
  REQUIRE(annots.size() == 4);
  CHECK(close(annots[0], -0.08338458487588823, 1e-12));
  CHECK(close(annots[1], -0.07354180293685873, 1e-12));
  CHECK(close(annots[2], -0.0994672806718318, 1e-12));
  CHECK(close(annots[3], -0.07073418932154873, 1e-12));

  const NeuralStatePtr start = model.begin(&bag);
  const std::vector<double>& d0 = model.log_dist(*start);
  const std::vector<double> want0{-1.7255512508025044, -1.8193523574405952, -1.8902725219084011,
                                  -1.8615754446763204, -1.7679811122236404, -1.7001343278465526};
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d0[i], want0[i], 1e-11));

  const NeuralStatePtr after_b = model.advance(*start, B);
  const std::vector<double>& d1 = model.log_dist(*after_b);
  const std::vector<double> want1{-1.725021561974617,  -1.8186121018317154, -1.8915835515470716,
                                  -1.8613897693627355, -1.7669898497247563, -1.7013102554173742};
  for (std::size_t i = 0; i < 6; ++i) CHECK(close(d1[i], want1[i], 1e-11));

  CHECK(close(model.sentence_loss({B, A}), 5.447420791547126, 1e-11));
}

TEST_CASE("zero output weights give the uniform distribution") {
  const double uniform = -std::log(6.0);
  auto check_uniform = [&](const NeuralModel& model, const Bag* bag) {
    const NeuralStatePtr state = model.begin(bag);
    const std::vector<double>& d = model.log_dist(*state);
    REQUIRE(d.size() == 6);
    for (double lp : d) CHECK(close(lp, uniform, 1e-12));
  };
  Bag bag;
  bag.insert(A);
  bag.insert(C);

  // Freshly constructed parameters are all zero, so every logit is zero.
  check_uniform(RnnLmModel(abc_vocab(), 3, 4), nullptr);
  check_uniform(NplmModel(abc_vocab(), 3, 4, 2), nullptr);
  check_uniform(Bag2SeqModel(abc_vocab(), 3, 4, 3), &bag);

  // And it survives arbitrary non-output parameters.
  RnnLmModel model(abc_vocab(), 3, 4);
  Filler fl;
  fl.fill(model.params().at("embedding"));
  fl.fill(model.params().at("lstm_wx"));
  fl.fill(model.params().at("lstm_wh"));
  fl.fill(model.params().at("lstm_b"));
  check_uniform(model, nullptr);
}

TEST_CASE("every conditional normalizes to one") {
  Rng rng(7);
  Bag bag;
  bag.insert(A);
  bag.insert(B);
  bag.insert(B);

  RnnLmModel rnn(abc_vocab(), 3, 4);
  NplmModel nplm(abc_vocab(), 3, 4, 3);
  Bag2SeqModel b2s(abc_vocab(), 3, 4, 3);
  rnn.params().init_uniform(rng, 0.5);
  nplm.params().init_uniform(rng, 0.5);
  b2s.params().init_uniform(rng, 0.5);

  const std::vector<std::pair<const NeuralModel*, const Bag*>> cases{
      {&rnn, nullptr}, {&nplm, nullptr}, {&b2s, &bag}};
  for (const auto& [model, bag_ptr] : cases) {
    NeuralStatePtr state = model->begin(bag_ptr);
    CHECK(close(dist_mass(model->log_dist(*state)), 1.0, 1e-9));
    for (TokenId w : {A, B, B}) {
      state = model->advance(*state, w);
      CHECK(close(dist_mass(model->log_dist(*state)), 1.0, 1e-9));
    }
  }
}

TEST_CASE("states are persistent values") {
  Rng rng(11);
  Bag bag;
  bag.insert(A);
  bag.insert(B);
  bag.insert(C);
  Bag2SeqModel model(abc_vocab(), 3, 4, 3);
  model.params().init_uniform(rng, 0.3);

  const NeuralStatePtr start = model.begin(&bag);
  const std::vector<double> before = model.log_dist(*start);

  // Branch the same state twice; advancing must not disturb the parent.
  const NeuralStatePtr left = model.advance(*start, A);
  const NeuralStatePtr right = model.advance(*start, B);
  CHECK(model.log_dist(*start) == before);

  // Same word, same state -> bit-identical outputs (purity).
  const NeuralStatePtr left2 = model.advance(*start, A);
  CHECK(model.log_dist(*left) == model.log_dist(*left2));

  // Branching then continuing equals recomputing the path from scratch.
  const NeuralStatePtr lr = model.advance(*left, B);
  NeuralStatePtr replay = model.begin(&bag);
  replay = model.advance(*replay, A);
  replay = model.advance(*replay, B);
  CHECK(model.log_dist(*lr) == model.log_dist(*replay));
  (void)right;
}

TEST_CASE("bag2seq is invariant to bag insertion order") {
  Rng rng(5);
  Bag2SeqModel model(abc_vocab(), 3, 4, 3);
  model.params().init_uniform(rng, 0.3);

  Bag fwd, rev;
  for (TokenId w : {A, B, B, C}) fwd.insert(w);
  for (TokenId w : {C, B, A, B}) rev.insert(w);

  CHECK(model.encode(fwd) == model.encode(rev));

  NeuralStatePtr s1 = model.begin(&fwd);
  NeuralStatePtr s2 = model.begin(&rev);
  CHECK(model.log_dist(*s1) == model.log_dist(*s2));
  for (TokenId w : {B, C, A}) {
    s1 = model.advance(*s1, w);
    s2 = model.advance(*s2, w);
    CHECK(model.log_dist(*s1) == model.log_dist(*s2));
  }
}

TEST_CASE("bag2seq rejects an empty or missing bag") {
  Bag2SeqModel model(abc_vocab(), 2, 2, 2);
  const Bag empty;
  CHECK_THROWS_AS((void)model.begin(&empty), DataError);
  CHECK_THROWS_AS((void)model.begin(nullptr), DataError);
  CHECK_THROWS_AS((void)model.encode(empty), DataError);
}

TEST_CASE("analytic gradients match central finite differences") {
  // Batches touch every vocabulary item so every tensor receives gradient.
  const std::vector<TokenSequence> batch{{A, B, C}, {C, A}, {B}};
  Rng rng(3);

  SUBCASE("nplm") {
    NplmModel model(abc_vocab(), 2, 3, 2);
    model.params().init_uniform(rng, 0.2);
    const GradCheckResult res = gradient_check(model, batch);
    CAPTURE(res.worst_tensor);
    CAPTURE(res.worst_index);
    CHECK(res.max_rel_error < 1e-4);
    CHECK(res.untouched_tensors.empty());
  }
  SUBCASE("rnnlm") {
    RnnLmModel model(abc_vocab(), 3, 4);
    model.params().init_uniform(rng, 0.2);
    const GradCheckResult res = gradient_check(model, batch);
    CAPTURE(res.worst_tensor);
    CAPTURE(res.worst_index);
    CHECK(res.max_rel_error < 1e-4);
    CHECK(res.untouched_tensors.empty());
  }
  SUBCASE("bag2seq") {
    Bag2SeqModel model(abc_vocab(), 3, 3, 3);
    model.params().init_uniform(rng, 0.2);
    const GradCheckResult res = gradient_check(model, batch);
    CAPTURE(res.worst_tensor);
    CAPTURE(res.worst_index);
    CHECK(res.max_rel_error < 1e-4);
    CHECK(res.untouched_tensors.empty());
  }
}

TEST_CASE("training memorizes a single repeated sentence") {
  const TokenSequence sentence{A, B, C, A};
  const std::vector<TokenSequence> corpus(20, sentence);

  TrainConfig config;
  config.arch = "rnnlm";
  config.embed = 8;
  config.hidden = 16;
  config.epochs = 80;
  config.learning_rate = 0.5;
  config.seed = 42;

  TrainLog log;
  const auto model = train_neural(corpus, nullptr, abc_vocab(), config, &log);
  REQUIRE(log.epochs.size() == 80);
  CHECK(log.epochs.back().train_ppl <= 1.05);
  CHECK(neural_perplexity(*model, {sentence}) <= 1.05);
}

TEST_CASE("first epoch already beats the uniform baseline") {
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.push_back({A, B});
    corpus.push_back({A, C, B});
    corpus.push_back({C});
  }
  for (const std::string arch : {"nplm", "rnnlm", "bag2seq"}) {
    TrainConfig config;
    config.arch = arch;
    config.embed = 4;
    config.hidden = 8;
    config.attn = 4;
    config.context = 2;
    config.epochs = 1;
    config.learning_rate = 0.2;
    config.seed = 9;
    TrainLog log;
    (void)train_neural(corpus, nullptr, abc_vocab(), config, &log);
    REQUIRE(log.epochs.size() == 1);
    CAPTURE(arch);
    CHECK(std::isfinite(log.epochs[0].dev_ppl));
    CHECK(log.epochs[0].dev_ppl <= 6.0);  // uniform baseline = |V|
  }
}

TEST_CASE("training is deterministic given a seed") {
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 10; ++i) {
    corpus.push_back({A, B, C});
    corpus.push_back({B, A});
  }
  TrainConfig config;
  config.arch = "rnnlm";
  config.embed = 3;
  config.hidden = 4;
  config.epochs = 3;
  config.learning_rate = 0.3;
  config.seed = 17;

  TrainLog log1, log2;
  const auto m1 = train_neural(corpus, nullptr, abc_vocab(), config, &log1);
  const auto m2 = train_neural(corpus, nullptr, abc_vocab(), config, &log2);
  for (std::size_t i = 0; i < m1->params().tensors().size(); ++i) {
    CHECK(m1->params().tensors()[i].value == m2->params().tensors()[i].value);
  }
  for (std::size_t e = 0; e < log1.epochs.size(); ++e) {
    CHECK(log1.epochs[e].train_ppl == log2.epochs[e].train_ppl);
    CHECK(log1.epochs[e].dev_ppl == log2.epochs[e].dev_ppl);
  }

  config.seed = 18;
  const auto m3 = train_neural(corpus, nullptr, abc_vocab(), config, nullptr);
  CHECK(m1->params().tensors()[0].value != m3->params().tensors()[0].value);
}

TEST_CASE("an explicit dev corpus is used verbatim") {
  std::vector<TokenSequence> corpus(8, TokenSequence{A, B});
  const std::vector<TokenSequence> dev{{C, C, C}};
  TrainConfig config;
  config.arch = "rnnlm";
  config.embed = 3;
  config.hidden = 4;
  config.epochs = 2;
  config.learning_rate = 0.5;
  config.seed = 1;

  TrainLog with_dev, without_dev;
  (void)train_neural(corpus, &dev, abc_vocab(), config, &with_dev);
  (void)train_neural(corpus, nullptr, abc_vocab(), config, &without_dev);
  // Training drives "a b" probability up, so the all-c dev set scores far
  // worse than the holdout drawn from the corpus itself.
  CHECK(with_dev.epochs.back().dev_ppl > without_dev.epochs.back().dev_ppl);
}

TEST_CASE("training rejects bad inputs and diverges loudly") {
  TrainConfig config;
  config.arch = "rnnlm";
  config.embed = 2;
  config.hidden = 2;

  CHECK_THROWS_AS((void)train_neural({}, nullptr, abc_vocab(), config, nullptr), DataError);
  CHECK_THROWS_AS((void)train_neural({{A}, {}}, nullptr, abc_vocab(), config, nullptr), DataError);

  TrainConfig bad = config;
  bad.epochs = 0;
  CHECK_THROWS_AS((void)train_neural({{A, B}}, nullptr, abc_vocab(), bad, nullptr), UsageError);
  bad = config;
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS((void)train_neural({{A, B}}, nullptr, abc_vocab(), bad, nullptr), UsageError);
  bad = config;
  bad.arch = "transformer";
  CHECK_THROWS_AS((void)train_neural({{A, B}}, nullptr, abc_vocab(), bad, nullptr), UsageError);

  // An absurd learning rate blows the loss past the range of exp().
  TrainConfig diverge = config;
  diverge.epochs = 3;
  diverge.learning_rate = 1e6;
  const std::vector<TokenSequence> corpus(12, TokenSequence{A, B, C});
  CHECK_THROWS_WITH_AS((void)train_neural(corpus, nullptr, abc_vocab(), diverge, nullptr),
                       doctest::Contains("diverged"), DataError);
}

TEST_CASE("model containers round-trip exactly") {
  Rng rng(23);
  Bag bag;
  bag.insert(A);
  bag.insert(B);

  auto roundtrip = [&](std::unique_ptr<NeuralModel> model, const Bag* bag_ptr,
                       const std::string& tag) {
    model->params().init_uniform(rng, 0.4);
    TempFile f1(tag + "1"), f2(tag + "2");
    save_model(*model, f1.path);
    const std::unique_ptr<NeuralModel> loaded = load_model(f1.path);

    CHECK(loaded->arch() == model->arch());
    CHECK(loaded->dims() == model->dims());
    CHECK(loaded->vocab().hash() == model->vocab().hash());
    // Re-saving the loaded model reproduces the container byte for byte.
    save_model(*loaded, f2.path);
    CHECK(slurp(f1.path) == slurp(f2.path));

    // float32 storage: conditionals agree to single precision.
    const NeuralStatePtr s0 = model->begin(bag_ptr);
    const NeuralStatePtr s1 = loaded->begin(bag_ptr);
    const std::vector<double>& d0 = model->log_dist(*s0);
    const std::vector<double>& d1 = loaded->log_dist(*s1);
    for (std::size_t i = 0; i < d0.size(); ++i) CHECK(close(d0[i], d1[i], 1e-5));
  };

  roundtrip(std::make_unique<RnnLmModel>(abc_vocab(), 3, 4), nullptr, "rnn");
  roundtrip(std::make_unique<NplmModel>(abc_vocab(), 3, 4, 2), nullptr, "nplm");
  roundtrip(std::make_unique<Bag2SeqModel>(abc_vocab(), 3, 4, 3), &bag, "b2s");
}

TEST_CASE("model loader rejects malformed containers") {
  RnnLmModel model(abc_vocab(), 2, 2);
  Filler().fill(model.params());
  TempFile good("good"), bad("bad");
  save_model(model, good.path);
  const std::string bytes = slurp(good.path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS((void)load_model("/nonexistent/model.bin"), DataError);
  }
  SUBCASE("bad magic") {
    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::ofstream(bad.path, std::ios::binary) << corrupt;
    CHECK_THROWS_WITH_AS((void)load_model(bad.path), doctest::Contains("magic"), DataError);
  }
  SUBCASE("truncated") {
    std::ofstream(bad.path, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_WITH_AS((void)load_model(bad.path), doctest::Contains("truncated"), DataError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream(bad.path, std::ios::binary) << (bytes + "junk");
    CHECK_THROWS_WITH_AS((void)load_model(bad.path), doctest::Contains("trailing"), DataError);
  }
}
