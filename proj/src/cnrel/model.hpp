#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnrel/embed.hpp"
#include "cnrel/thresholds.hpp"
#include "cnrel/types.hpp"

namespace cnrel {

enum class EncoderKind { Centroid, Sequence };
enum class Composition { Concat, Diff, Add };

std::string encoder_name(EncoderKind kind);
EncoderKind parse_encoder(std::string_view name);
std::string composition_name(Composition composition);
Composition parse_composition(std::string_view name);

struct ModelConfig {
  EncoderKind encoder = EncoderKind::Centroid;
  Composition composition = Composition::Concat;
  size_t hidden_size = 0;  // 0 picks the encoder default: 200 centroid, 100 sequence
  size_t cell_size = 350;
  size_t label_count = 0;  // 0 adopts the bundle inventory size
  bool tune_embeddings = true;
  bool normalize_centroid = false;
  uint64_t seed = 1;
  size_t epochs = 50;
  size_t batch_size = 64;
  double learning_rate = 1e-3;

  size_t effective_hidden() const;
  size_t encoder_output_dim(size_t embed_dim) const;
  size_t input_width(size_t embed_dim) const;
};

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

// One recurrent direction. Gate blocks stack as [input, forget, cell, output]
// along the columns: W is dim x 4*cell, U is cell x 4*cell, b is 4*cell.
struct LstmParams {
  Eigen::MatrixXd W;
  Eigen::MatrixXd U;
  Eigen::VectorXd b;
};

struct ModelParameters {
  ModelConfig config;
  std::vector<std::string> inventory;
  std::vector<std::string> tokens;  // embedding row order
  Eigen::MatrixXd embeddings;       // tokens x dim
  LstmParams fwd;
  LstmParams bwd;
  Eigen::MatrixXd W_h;  // input_width x hidden
  Eigen::MatrixXd W_o;  // hidden x label_count

  size_t embed_dim() const { return static_cast<size_t>(embeddings.cols()); }
  size_t token_row(const std::string& token) const;  // npos when absent
  void rebuild_token_index();

  static constexpr size_t npos = static_cast<size_t>(-1);

 private:
  std::unordered_map<std::string, size_t> token_index_;
};

// Fresh parameters: weights uniform in ±sqrt(6/(fan_in+fan_out)), recurrent
// biases zero, embedding table copied from the store.
ModelParameters init_parameters(const ModelConfig& config, const EmbeddingStore& store,
                                const std::vector<std::string>& inventory);

// Instance with concepts resolved to embedding rows and labels to a
// multi-hot vector. The centroid encoder resolves a whole surface that is
// itself a stored phrase to that single row; the sequence encoder walks the
// tokens in order. Unresolvable tokens are skipped; a concept with no
// resolvable tokens is an error.
struct PreparedInstance {
  std::vector<size_t> head_rows;
  std::vector<size_t> tail_rows;
  Eigen::VectorXd gold;
};

PreparedInstance prepare_instance(const ModelParameters& params, const Instance& instance);
std::vector<PreparedInstance> prepare_instances(const ModelParameters& params,
                                                const std::vector<Instance>& instances);

Eigen::VectorXd compose_pair(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                             Composition composition);

// Bidirectional recurrent encoding: concatenation of the final forward and
// backward states, length 2 * cell_size.
Eigen::VectorXd encode_sequence(const Concept& item, const ModelParameters& params);

// Dispatch on the configured encoder.
Eigen::VectorXd encode_concept(const Concept& item, const ModelParameters& params);

// p = sigmoid(relu(x W_h) W_o), one independent probability per label.
Eigen::VectorXd forward_probabilities(const ModelParameters& params, const Instance& instance);

// Mean over labels of the clipped binary cross entropy.
double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& gold);

struct Gradients {
  Eigen::MatrixXd W_h;
  Eigen::MatrixXd W_o;
  LstmParams fwd;
  LstmParams bwd;
  std::unordered_map<size_t, Eigen::RowVectorXd> embedding_rows;
};

// Mean batch loss without gradients.
double model_loss(const ModelParameters& params, const std::vector<PreparedInstance>& batch);

// Analytic gradients of the mean batch loss for every trainable tensor.
Gradients model_gradients(const ModelParameters& params,
                          const std::vector<PreparedInstance>& batch, double* loss_out = nullptr);

struct EpochStats {
  size_t epoch = 0;
  double train_loss = 0.0;
  double dev_weighted_f1 = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
};

std::string train_log_csv(const TrainLog& log);

struct TrainResult {
  ModelParameters params;  // snapshot of the best dev epoch
  TrainLog log;
};

// Mini-batch Adam over all parameters; embedding rows update sparsely and
// only when tune_embeddings is set. Dev weighted F1 at threshold 0.5 picks
// the returned epoch.
TrainResult train_model(const DatasetBundle& bundle, const EmbeddingStore& store,
                        ModelConfig config);

struct PredictionResult {
  std::vector<std::vector<std::string>> labels;
  std::vector<std::vector<double>> probabilities;
};

// Label k is assigned when p_k >= threshold_k; the empty set is legal.
PredictionResult predict(const std::vector<Instance>& instances, const ModelParameters& params,
                         const ThresholdSet& thresholds);

// Single archive: magic, header JSON (config, inventory, tokens, tensor
// manifest), then row-major little-endian float32 tensor data.
void save_checkpoint(const std::string& path, const ModelParameters& params);
ModelParameters load_checkpoint(const std::string& path);

}  // namespace cnrel
