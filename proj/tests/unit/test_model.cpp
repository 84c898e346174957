#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cnrel/common.hpp"
#include "cnrel/embed.hpp"
#include "cnrel/fixtures.hpp"
#include "cnrel/model.hpp"

using namespace cnrel;

namespace {

Instance make_inst(const std::string& head, const std::string& tail,
                   std::vector<std::string> labels) {
  Instance out;
  out.head = normalize_concept(head);
  out.tail = normalize_concept(tail);
  out.labels = std::move(labels);
  return out;
}

EmbeddingStore small_store(uint64_t seed) {
  EmbeddingStore store;
  Rng rng(seed);
  std::vector<std::string> vocab{"red",  "fish", "swims", "deep", "water", "cold",
                                 "stone", "hot_dog", "hot", "dog", "spare"};
  for (const std::string& token : vocab) {
    std::vector<double> v(5);
    for (double& x : v) x = rng.real() - 0.5;
    store.add(token, v);
  }
  return store;
}

struct GradSetup {
  ModelParameters params;
  std::vector<PreparedInstance> batch;
};

GradSetup gradcheck_setup(EncoderKind encoder, Composition composition, bool normalize,
                          uint64_t seed) {
  EmbeddingStore store = small_store(seed);
  ModelConfig config;
  config.encoder = encoder;
  config.composition = composition;
  config.hidden_size = 6;
  config.cell_size = 4;
  config.normalize_centroid = normalize;
  config.seed = seed;
  GradSetup setup{init_parameters(config, store, {"A", "B", "C"}), {}};
  std::vector<Instance> instances{
      make_inst("red fish", "water", {"A"}),
      make_inst("hot dog", "cold stone", {"B", "C"}),
      make_inst("swims", "deep water", {"A", "C"}),
      make_inst("stone", "fish", {"B"}),
  };
  setup.batch = prepare_instances(setup.params, instances);
  return setup;
}

double finite_difference(ModelParameters& params, const std::vector<PreparedInstance>& batch,
                         double& slot) {
  const double h = 1e-5;
  double saved = slot;
  slot = saved + h;
  double up = model_loss(params, batch);
  slot = saved - h;
  double down = model_loss(params, batch);
  slot = saved;
  return (up - down) / (2.0 * h);
}

void expect_close(double analytic, double numeric) {
  double tol = 1e-6 + 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
  CHECK(std::abs(analytic - numeric) <= tol);
}

void check_matrix(ModelParameters& params, const std::vector<PreparedInstance>& batch,
                  Eigen::MatrixXd& tensor, const Eigen::MatrixXd& analytic) {
  REQUIRE(analytic.rows() == tensor.rows());
  REQUIRE(analytic.cols() == tensor.cols());
  for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
    for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
      expect_close(analytic(r, c), finite_difference(params, batch, tensor(r, c)));
    }
  }
}

void check_vector(ModelParameters& params, const std::vector<PreparedInstance>& batch,
                  Eigen::VectorXd& tensor, const Eigen::VectorXd& analytic) {
  REQUIRE(analytic.size() == tensor.size());
  for (Eigen::Index k = 0; k < tensor.size(); ++k) {
    expect_close(analytic(k), finite_difference(params, batch, tensor(k)));
  }
}

void run_gradcheck(EncoderKind encoder, Composition composition, bool normalize, uint64_t seed) {
  GradSetup setup = gradcheck_setup(encoder, composition, normalize, seed);
  ModelParameters& params = setup.params;
  const std::vector<PreparedInstance>& batch = setup.batch;

  double loss_out = 0.0;
  Gradients grads = model_gradients(params, batch, &loss_out);
  CHECK(model_loss(params, batch) == doctest::Approx(loss_out).epsilon(1e-12));

  check_matrix(params, batch, params.W_h, grads.W_h);
  check_matrix(params, batch, params.W_o, grads.W_o);
  if (encoder == EncoderKind::Sequence) {
    check_matrix(params, batch, params.fwd.W, grads.fwd.W);
    check_matrix(params, batch, params.fwd.U, grads.fwd.U);
    check_vector(params, batch, params.fwd.b, grads.fwd.b);
    check_matrix(params, batch, params.bwd.W, grads.bwd.W);
    check_matrix(params, batch, params.bwd.U, grads.bwd.U);
    check_vector(params, batch, params.bwd.b, grads.bwd.b);
  }

  std::set<size_t> touched;
  for (const PreparedInstance& inst : batch) {
    touched.insert(inst.head_rows.begin(), inst.head_rows.end());
    touched.insert(inst.tail_rows.begin(), inst.tail_rows.end());
  }
  for (size_t row : touched) {
    auto it = grads.embedding_rows.find(row);
    REQUIRE(it != grads.embedding_rows.end());
    for (Eigen::Index c = 0; c < params.embeddings.cols(); ++c) {
      expect_close(it->second(c), finite_difference(params, batch, params.embeddings(row, c)));
    }
  }

  size_t spare = params.token_row("spare");
  REQUIRE(spare != ModelParameters::npos);
  CHECK(grads.embedding_rows.count(spare) == 0);
  expect_close(0.0, finite_difference(params, batch, params.embeddings(spare, 0)));
}

}  // namespace

TEST_CASE("encoder and composition names round-trip") {
  CHECK(encoder_name(EncoderKind::Centroid) == "centroid");
  CHECK(encoder_name(EncoderKind::Sequence) == "sequence");
  CHECK(parse_encoder("centroid") == EncoderKind::Centroid);
  CHECK(parse_encoder("sequence") == EncoderKind::Sequence);
  CHECK_THROWS_AS(parse_encoder("lstm"), Error);
  CHECK(composition_name(Composition::Concat) == "concat");
  CHECK(composition_name(Composition::Diff) == "diff");
  CHECK(composition_name(Composition::Add) == "add");
  CHECK(parse_composition("diff") == Composition::Diff);
  CHECK_THROWS_AS(parse_composition("multiply"), Error);
}

TEST_CASE("config json round-trips and validates") {
  ModelConfig config;
  config.encoder = EncoderKind::Sequence;
  config.composition = Composition::Add;
  config.hidden_size = 42;
  config.cell_size = 17;
  config.label_count = 9;
  config.tune_embeddings = false;
  config.normalize_centroid = true;
  config.seed = 99;
  config.epochs = 7;
  config.batch_size = 5;
  config.learning_rate = 0.25;
  ModelConfig back = config_from_json(config_to_json(config));
  CHECK(back.encoder == EncoderKind::Sequence);
  CHECK(back.composition == Composition::Add);
  CHECK(back.hidden_size == 42);
  CHECK(back.cell_size == 17);
  CHECK(back.label_count == 9);
  CHECK(back.tune_embeddings == false);
  CHECK(back.normalize_centroid == true);
  CHECK(back.seed == 99);
  CHECK(back.epochs == 7);
  CHECK(back.batch_size == 5);
  CHECK(back.learning_rate == 0.25);

  ModelConfig defaults = config_from_json("{}");
  CHECK(defaults.encoder == EncoderKind::Centroid);
  CHECK(defaults.composition == Composition::Concat);
  CHECK(defaults.hidden_size == 0);
  CHECK(defaults.cell_size == 350);
  CHECK(defaults.tune_embeddings == true);
  CHECK(defaults.seed == 1);
  CHECK(defaults.epochs == 50);
  CHECK(defaults.batch_size == 64);
  CHECK(defaults.learning_rate == 1e-3);

  CHECK_THROWS_AS(config_from_json("{\"cell_size\": 0}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"learning_rate\": -1.0}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"encoder\": \"gru\"}"), Error);
  CHECK_THROWS_AS(config_from_json("not json"), Error);
}

TEST_CASE("derived dimensions follow the encoder and composition") {
  ModelConfig config;
  CHECK(config.effective_hidden() == 200);
  config.encoder = EncoderKind::Sequence;
  CHECK(config.effective_hidden() == 100);
  config.hidden_size = 64;
  CHECK(config.effective_hidden() == 64);

  config.encoder = EncoderKind::Centroid;
  CHECK(config.encoder_output_dim(5) == 5);
  config.encoder = EncoderKind::Sequence;
  config.cell_size = 7;
  CHECK(config.encoder_output_dim(5) == 14);

  config.composition = Composition::Concat;
  CHECK(config.input_width(5) == 28);
  config.composition = Composition::Diff;
  CHECK(config.input_width(5) == 14);
  config.composition = Composition::Add;
  config.encoder = EncoderKind::Centroid;
  CHECK(config.input_width(5) == 5);
}

TEST_CASE("init_parameters copies embeddings and bounds the weights") {
  EmbeddingStore store = small_store(4);
  ModelConfig config;
  config.hidden_size = 6;
  config.seed = 4;
  ModelParameters params = init_parameters(config, store, {"A", "B", "C"});

  CHECK(params.config.label_count == 3);
  CHECK(params.tokens.size() == store.size());
  for (size_t row = 0; row < store.size(); ++row) {
    CHECK(params.tokens[row] == store.token_at(row));
    const std::vector<double>& v = store.vector_at(row);
    for (size_t c = 0; c < v.size(); ++c) CHECK(params.embeddings(row, c) == v[c]);
  }
  CHECK(params.token_row("water") == store.find("water"));
  CHECK(params.token_row("missing") == ModelParameters::npos);

  CHECK(params.W_h.rows() == 10);  // concat of two 5-dim centroids
  CHECK(params.W_h.cols() == 6);
  CHECK(params.W_o.rows() == 6);
  CHECK(params.W_o.cols() == 3);
  double limit_h = std::sqrt(6.0 / (10 + 6));
  double limit_o = std::sqrt(6.0 / (6 + 3));
  CHECK(params.W_h.cwiseAbs().maxCoeff() <= limit_h);
  CHECK(params.W_o.cwiseAbs().maxCoeff() <= limit_o);
  CHECK(params.W_h.cwiseAbs().maxCoeff() > 0.0);

  ModelParameters again = init_parameters(config, store, {"A", "B", "C"});
  CHECK(again.W_h == params.W_h);
  CHECK(again.W_o == params.W_o);
  config.seed = 5;
  ModelParameters other = init_parameters(config, store, {"A", "B", "C"});
  CHECK(other.W_h != params.W_h);

  ModelConfig seq = config;
  seq.encoder = EncoderKind::Sequence;
  seq.cell_size = 4;
  ModelParameters rnn = init_parameters(seq, store, {"A", "B", "C"});
  CHECK(rnn.fwd.W.rows() == 5);
  CHECK(rnn.fwd.W.cols() == 16);
  CHECK(rnn.fwd.U.rows() == 4);
  CHECK(rnn.fwd.U.cols() == 16);
  CHECK(rnn.fwd.b.size() == 16);
  CHECK(rnn.fwd.b.isZero());
  CHECK(rnn.bwd.b.isZero());
  CHECK(rnn.fwd.W != rnn.bwd.W);

  ModelConfig mismatched = config;
  mismatched.label_count = 2;
  CHECK_THROWS_AS(init_parameters(mismatched, store, {"A", "B", "C"}), Error);
  CHECK_THROWS_AS(init_parameters(config, EmbeddingStore{}, {"A"}), Error);
  CHECK_THROWS_AS(init_parameters(config, store, {}), Error);
}

TEST_CASE("prepare_instance resolves phrases, tokens and gold") {
  EmbeddingStore store = small_store(6);
  ModelConfig config;
  config.hidden_size = 6;
  ModelParameters params = init_parameters(config, store, {"A", "B", "C"});

  // The centroid encoder prefers the stored phrase row.
  PreparedInstance whole = prepare_instance(params, make_inst("hot dog", "water", {"A", "C"}));
  REQUIRE(whole.head_rows.size() == 1);
  CHECK(whole.head_rows[0] == params.token_row("hot_dog"));
  CHECK(whole.gold == Eigen::Vector3d(1.0, 0.0, 1.0));

  // The sequence encoder always walks tokens.
  ModelConfig seq = config;
  seq.encoder = EncoderKind::Sequence;
  seq.cell_size = 4;
  ModelParameters rnn = init_parameters(seq, store, {"A", "B", "C"});
  PreparedInstance walked = prepare_instance(rnn, make_inst("hot dog", "water", {"B"}));
  REQUIRE(walked.head_rows.size() == 2);
  CHECK(walked.head_rows[0] == rnn.token_row("hot"));
  CHECK(walked.head_rows[1] == rnn.token_row("dog"));

  PreparedInstance partial = prepare_instance(params, make_inst("cold xyzzy", "fish", {"B"}));
  REQUIRE(partial.head_rows.size() == 1);
  CHECK(partial.head_rows[0] == params.token_row("cold"));

  CHECK_THROWS_AS(prepare_instance(params, make_inst("xyzzy qux", "fish", {"A"})), Error);
  CHECK_THROWS_AS(prepare_instance(params, make_inst("fish", "water", {"D"})), Error);
}

TEST_CASE("compose_pair implements its three modes") {
  Eigen::VectorXd v1(2), v2(2);
  v1 << 1.0, 2.0;
  v2 << 3.0, 5.0;
  Eigen::VectorXd cat = compose_pair(v1, v2, Composition::Concat);
  REQUIRE(cat.size() == 4);
  CHECK(cat(0) == 1.0);
  CHECK(cat(3) == 5.0);
  CHECK(compose_pair(v1, v2, Composition::Diff) == Eigen::Vector2d(-2.0, -3.0));
  CHECK(compose_pair(v1, v2, Composition::Add) == Eigen::Vector2d(4.0, 7.0));

  Eigen::VectorXd longer(3);
  longer << 1.0, 1.0, 1.0;
  CHECK(compose_pair(v1, longer, Composition::Concat).size() == 5);
  CHECK_THROWS_AS(compose_pair(v1, longer, Composition::Diff), Error);
}

TEST_CASE("bce_loss matches hand values and clips extremes") {
  Eigen::VectorXd probs(1), gold(1);
  probs << 0.5;
  gold << 1.0;
  CHECK(bce_loss(probs, gold) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Eigen::VectorXd p2(2), g2(2);
  p2 << 0.5, 1.0;  // second entry clips to 1 - 1e-7
  g2 << 1.0, 0.0;
  double expected = (std::log(2.0) - std::log(1e-7)) / 2.0;
  CHECK(bce_loss(p2, g2) == doctest::Approx(expected).epsilon(1e-6));

  Eigen::VectorXd zero(1);
  zero << 0.0;  // clips to 1e-7 under gold 1
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(bce_loss(zero, one) == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));

  CHECK_THROWS_AS(bce_loss(probs, g2), Error);
  CHECK_THROWS_AS(bce_loss(Eigen::VectorXd(), Eigen::VectorXd()), Error);
}

TEST_CASE("analytic gradients match finite differences") {
  run_gradcheck(EncoderKind::Centroid, Composition::Concat, false, 11);
  run_gradcheck(EncoderKind::Centroid, Composition::Diff, true, 12);
  run_gradcheck(EncoderKind::Sequence, Composition::Concat, false, 13);
  run_gradcheck(EncoderKind::Sequence, Composition::Add, false, 14);
}

TEST_CASE("model_gradients rejects an empty batch") {
  GradSetup setup = gradcheck_setup(EncoderKind::Centroid, Composition::Concat, false, 15);
  CHECK_THROWS_AS(model_loss(setup.params, {}), Error);
  CHECK_THROWS_AS(model_gradients(setup.params, {}), Error);
}

TEST_CASE("training learns a separable problem deterministically") {
  SeparableData data = make_separable_dataset(3, 80, 24, 24, 0.25);
  ModelConfig config;
  config.hidden_size = 16;
  config.epochs = 40;
  config.batch_size = 16;
  config.learning_rate = 0.01;
  config.seed = 5;

  TrainResult result = train_model(data.bundle, data.store, config);
  REQUIRE(result.log.epochs.size() == 40);
  CHECK(result.log.epochs.front().epoch == 1);
  CHECK(result.log.epochs.back().epoch == 40);
  CHECK(result.log.best_epoch >= 1);
  CHECK(result.log.best_dev_f1 >= 0.9);
  CHECK(result.log.epochs.back().train_loss < result.log.epochs.front().train_loss);

  size_t best = result.log.best_epoch;
  for (const EpochStats& e : result.log.epochs) {
    CHECK(e.dev_weighted_f1 <= result.log.best_dev_f1);
    if (e.dev_weighted_f1 == result.log.best_dev_f1) {
      CHECK(best <= e.epoch);  // first epoch reaching the maximum wins
    }
  }

  std::string csv = train_log_csv(result.log);
  CHECK(csv.rfind("epoch,train_loss,dev_weighted_f1\n", 0) == 0);
  CHECK(split(csv, '\n').size() == 42);  // header + 40 rows + trailing empty

  TrainResult again = train_model(data.bundle, data.store, config);
  CHECK(again.log.best_epoch == result.log.best_epoch);
  CHECK(again.log.best_dev_f1 == result.log.best_dev_f1);
  CHECK(again.params.W_h == result.params.W_h);
  for (size_t e = 0; e < result.log.epochs.size(); ++e) {
    CHECK(again.log.epochs[e].train_loss == result.log.epochs[e].train_loss);
  }

  config.seed = 6;
  TrainResult reseeded = train_model(data.bundle, data.store, config);
  CHECK(reseeded.params.W_h != result.params.W_h);

  DatasetBundle empty_train = data.bundle;
  empty_train.train.clear();
  CHECK_THROWS_AS(train_model(empty_train, data.store, config), Error);
}

TEST_CASE("predict applies per-relation cutoffs") {
  EmbeddingStore store = small_store(21);
  ModelConfig config;
  config.hidden_size = 6;
  config.seed = 21;
  ModelParameters params = init_parameters(config, store, {"A", "B"});
  std::vector<Instance> instances{make_inst("red fish", "water", {}),
                                  make_inst("stone", "cold", {})};

  Eigen::VectorXd p0 = forward_probabilities(params, instances[0]);

  PredictionResult everything =
      predict(instances, params, ThresholdSet::uniform({"A", "B"}, 0.0));
  CHECK(everything.labels[0] == std::vector<std::string>{"A", "B"});
  CHECK(everything.probabilities[0][0] == p0(0));
  CHECK(everything.probabilities[0][1] == p0(1));

  PredictionResult nothing = predict(instances, params, ThresholdSet::uniform({"A", "B"}, 1.0));
  CHECK(nothing.labels[0].empty());
  CHECK(nothing.labels[1].empty());

  ThresholdSet mixed;
  mixed.inventory = {"A", "B"};
  mixed.values = {p0(0), p0(1) + 1e-9};  // >= keeps A, drops B
  PredictionResult split_set = predict({instances[0]}, params, mixed);
  CHECK(split_set.labels[0] == std::vector<std::string>{"A"});

  CHECK_THROWS_AS(predict(instances, params, ThresholdSet::uniform({"A"}, 0.5)), Error);
}

TEST_CASE("checkpoints round-trip through float32") {
  EmbeddingStore store = small_store(31);
  ModelConfig config;
  config.encoder = EncoderKind::Sequence;
  config.composition = Composition::Diff;
  config.hidden_size = 6;
  config.cell_size = 4;
  config.seed = 31;
  config.epochs = 3;
  ModelParameters params = init_parameters(config, store, {"A", "B", "C"});

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "cnrel_checkpoint_test.ck";
  save_checkpoint(path.string(), params);
  ModelParameters loaded = load_checkpoint(path.string());

  CHECK(loaded.config.encoder == EncoderKind::Sequence);
  CHECK(loaded.config.composition == Composition::Diff);
  CHECK(loaded.config.hidden_size == 6);
  CHECK(loaded.config.cell_size == 4);
  CHECK(loaded.config.label_count == 3);
  CHECK(loaded.config.seed == 31);
  CHECK(loaded.inventory == params.inventory);
  CHECK(loaded.tokens == params.tokens);
  CHECK(loaded.token_row("water") == params.token_row("water"));

  auto quantized = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        CHECK(b(r, c) == static_cast<double>(static_cast<float>(a(r, c))));
      }
    }
  };
  quantized(params.embeddings, loaded.embeddings);
  quantized(params.W_h, loaded.W_h);
  quantized(params.W_o, loaded.W_o);
  quantized(params.fwd.W, loaded.fwd.W);
  quantized(params.fwd.U, loaded.fwd.U);
  quantized(params.fwd.b, loaded.fwd.b);
  quantized(params.bwd.W, loaded.bwd.W);
  quantized(params.bwd.U, loaded.bwd.U);
  quantized(params.bwd.b, loaded.bwd.b);

  ModelConfig flat;
  flat.hidden_size = 6;
  ModelParameters centroid = init_parameters(flat, store, {"A"});
  save_checkpoint(path.string(), centroid);
  ModelParameters centroid_back = load_checkpoint(path.string());
  CHECK(centroid_back.config.encoder == EncoderKind::Centroid);
  CHECK(centroid_back.W_h.rows() == 10);

  write_file(path.string(), "JUNKJUNKJUNKJUNK");
  CHECK_THROWS_AS(load_checkpoint(path.string()), Error);

  save_checkpoint(path.string(), centroid);
  std::string whole = read_file(path.string());
  write_file(path.string(), whole.substr(0, 10));
  CHECK_THROWS_AS(load_checkpoint(path.string()), Error);
  write_file(path.string(), whole + "X");
  CHECK_THROWS_AS(load_checkpoint(path.string()), Error);
  fs::remove(path);

  CHECK_THROWS_AS(load_checkpoint((fs::temp_directory_path() / "cnrel_missing.ck").string()),
                  Error);
}
