#include "cnrel/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cnrel/eval.hpp"

namespace cnrel {

namespace {

constexpr double kClip = 1e-7;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Forward pass caches for one recurrent direction.
struct LstmTrace {
  Eigen::MatrixXd i, f, g, o;  // steps x cell, post-activation
  Eigen::MatrixXd c, tanh_c, h;
};

Eigen::VectorXd lstm_run(const LstmParams& p, const std::vector<size_t>& rows,
                         const Eigen::MatrixXd& embeddings, bool reverse, LstmTrace* trace) {
  const size_t cell = static_cast<size_t>(p.U.rows());
  const size_t steps = rows.size();
  if (trace) {
    trace->i.resize(steps, cell);
    trace->f.resize(steps, cell);
    trace->g.resize(steps, cell);
    trace->o.resize(steps, cell);
    trace->c.resize(steps, cell);
    trace->tanh_c.resize(steps, cell);
    trace->h.resize(steps, cell);
  }
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(cell);
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(cell);
  for (size_t step = 0; step < steps; ++step) {
    size_t row = rows[reverse ? steps - 1 - step : step];
    Eigen::RowVectorXd z = embeddings.row(row) * p.W + h * p.U + p.b.transpose();
    Eigen::RowVectorXd i(cell), f(cell), g(cell), o(cell);
    for (size_t k = 0; k < cell; ++k) {
      i(k) = sigmoid(z(k));
      f(k) = sigmoid(z(cell + k));
      g(k) = std::tanh(z(2 * cell + k));
      o(k) = sigmoid(z(3 * cell + k));
    }
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    Eigen::RowVectorXd tanh_c = c.array().tanh();
    h = o.cwiseProduct(tanh_c);
    if (trace) {
      trace->i.row(step) = i;
      trace->f.row(step) = f;
      trace->g.row(step) = g;
      trace->o.row(step) = o;
      trace->c.row(step) = c;
      trace->tanh_c.row(step) = tanh_c;
      trace->h.row(step) = h;
    }
  }
  return h.transpose();
}

// Gradient of one direction; d_final is the loss gradient of the final
// hidden state. Embedding-row gradients accumulate into embed_grads.
void lstm_backward(const LstmParams& p, const std::vector<size_t>& rows,
                   const Eigen::MatrixXd& embeddings, bool reverse, const LstmTrace& trace,
                   const Eigen::VectorXd& d_final, LstmParams& grad,
                   std::unordered_map<size_t, Eigen::RowVectorXd>& embed_grads) {
  const size_t cell = static_cast<size_t>(p.U.rows());
  const size_t steps = rows.size();
  Eigen::RowVectorXd dh = d_final.transpose();
  Eigen::RowVectorXd dc = Eigen::RowVectorXd::Zero(cell);
  for (size_t step = steps; step-- > 0;) {
    size_t row = rows[reverse ? steps - 1 - step : step];
    Eigen::RowVectorXd i = trace.i.row(step), f = trace.f.row(step), g = trace.g.row(step),
                       o = trace.o.row(step), tanh_c = trace.tanh_c.row(step);
    Eigen::RowVectorXd c_prev =
        step == 0 ? Eigen::RowVectorXd::Zero(cell) : Eigen::RowVectorXd(trace.c.row(step - 1));
    Eigen::RowVectorXd h_prev =
        step == 0 ? Eigen::RowVectorXd::Zero(cell) : Eigen::RowVectorXd(trace.h.row(step - 1));

    Eigen::RowVectorXd do_ = dh.cwiseProduct(tanh_c);
    dc += dh.cwiseProduct(o).cwiseProduct(
        (1.0 - tanh_c.array().square()).matrix());
    Eigen::RowVectorXd di = dc.cwiseProduct(g);
    Eigen::RowVectorXd df = dc.cwiseProduct(c_prev);
    Eigen::RowVectorXd dg = dc.cwiseProduct(i);

    Eigen::RowVectorXd dz(4 * cell);
    dz.segment(0, cell) = di.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
    dz.segment(cell, cell) = df.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
    dz.segment(2 * cell, cell) = dg.cwiseProduct((1.0 - g.array().square()).matrix());
    dz.segment(3 * cell, cell) = do_.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());

    grad.W.noalias() += embeddings.row(row).transpose() * dz;
    grad.U.noalias() += h_prev.transpose() * dz;
    grad.b += dz.transpose();

    auto [it, inserted] = embed_grads.try_emplace(row, Eigen::RowVectorXd::Zero(embeddings.cols()));
    it->second.noalias() += dz * p.W.transpose();

    dh = dz * p.U.transpose();
    dc = dc.cwiseProduct(f);
  }
}

Eigen::VectorXd centroid_from_rows(const std::vector<size_t>& rows,
                                   const Eigen::MatrixXd& embeddings, bool normalize) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(embeddings.cols());
  for (size_t row : rows) mean += embeddings.row(row).transpose();
  mean /= static_cast<double>(rows.size());
  if (normalize) {
    double norm = mean.norm();
    if (norm > 0.0) mean /= norm;
  }
  return mean;
}

// Caches for one instance's full forward pass.
struct ForwardTrace {
  Eigen::VectorXd enc_head, enc_tail;    // post-normalization encodings
  Eigen::VectorXd mean_head, mean_tail;  // centroid only, pre-normalization
  LstmTrace head_fwd, head_bwd, tail_fwd, tail_bwd;
  Eigen::VectorXd x;       // composed input
  Eigen::VectorXd hidden;  // relu(x W_h)
  Eigen::VectorXd probs;
};

Eigen::VectorXd encode_rows(const ModelParameters& params, const std::vector<size_t>& rows,
                            LstmTrace* fwd_trace, LstmTrace* bwd_trace, Eigen::VectorXd* mean_out) {
  if (params.config.encoder == EncoderKind::Centroid) {
    Eigen::VectorXd mean = centroid_from_rows(rows, params.embeddings, false);
    if (mean_out) *mean_out = mean;
    if (params.config.normalize_centroid) {
      double norm = mean.norm();
      if (norm > 0.0) return mean / norm;
    }
    return mean;
  }
  Eigen::VectorXd h_fwd = lstm_run(params.fwd, rows, params.embeddings, false, fwd_trace);
  Eigen::VectorXd h_bwd = lstm_run(params.bwd, rows, params.embeddings, true, bwd_trace);
  Eigen::VectorXd out(h_fwd.size() + h_bwd.size());
  out << h_fwd, h_bwd;
  return out;
}

void run_forward(const ModelParameters& params, const PreparedInstance& inst,
                 ForwardTrace& trace) {
  trace.enc_head = encode_rows(params, inst.head_rows, &trace.head_fwd, &trace.head_bwd,
                               &trace.mean_head);
  trace.enc_tail = encode_rows(params, inst.tail_rows, &trace.tail_fwd, &trace.tail_bwd,
                               &trace.mean_tail);
  trace.x = compose_pair(trace.enc_head, trace.enc_tail, params.config.composition);
  trace.hidden = (trace.x.transpose() * params.W_h).transpose().cwiseMax(0.0);
  Eigen::VectorXd logits = (trace.hidden.transpose() * params.W_o).transpose();
  if (!logits.allFinite()) fail(ErrorKind::Numeric, "non-finite pre-sigmoid logits");
  trace.probs = logits.unaryExpr([](double t) { return sigmoid(t); });
}

// Splits the composed-input gradient back onto the two encodings.
void split_composition(const Eigen::VectorXd& dx, Composition composition, size_t enc_dim,
                       Eigen::VectorXd& d_head, Eigen::VectorXd& d_tail) {
  switch (composition) {
    case Composition::Concat:
      d_head = dx.segment(0, enc_dim);
      d_tail = dx.segment(enc_dim, enc_dim);
      break;
    case Composition::Diff:
      d_head = dx;
      d_tail = -dx;
      break;
    case Composition::Add:
      d_head = dx;
      d_tail = dx;
      break;
  }
}

void backprop_encoding(const ModelParameters& params, const std::vector<size_t>& rows,
                       const Eigen::VectorXd& d_enc, const Eigen::VectorXd& mean,
                       const LstmTrace& fwd_trace, const LstmTrace& bwd_trace, Gradients& grads) {
  if (params.config.encoder == EncoderKind::Centroid) {
    Eigen::VectorXd d_mean = d_enc;
    if (params.config.normalize_centroid) {
      double norm = mean.norm();
      if (norm > 0.0) {
        Eigen::VectorXd v = mean / norm;
        d_mean = (d_enc - v * v.dot(d_enc)) / norm;
      }
    }
    Eigen::RowVectorXd share = d_mean.transpose() / static_cast<double>(rows.size());
    for (size_t row : rows) {
      auto [it, inserted] =
          grads.embedding_rows.try_emplace(row, Eigen::RowVectorXd::Zero(params.embed_dim()));
      it->second += share;
    }
    return;
  }
  size_t cell = params.config.cell_size;
  lstm_backward(params.fwd, rows, params.embeddings, false, fwd_trace, d_enc.segment(0, cell),
                grads.fwd, grads.embedding_rows);
  lstm_backward(params.bwd, rows, params.embeddings, true, bwd_trace, d_enc.segment(cell, cell),
                grads.bwd, grads.embedding_rows);
}

std::vector<size_t> resolve_rows(const ModelParameters& params, const Concept& item) {
  std::vector<size_t> rows;
  if (params.config.encoder == EncoderKind::Centroid) {
    size_t phrase = params.token_row(item.surface);
    if (phrase != ModelParameters::npos) return {phrase};
  }
  for (const std::string& token : item.tokens) {
    size_t row = params.token_row(token);
    if (row != ModelParameters::npos) rows.push_back(row);
  }
  if (rows.empty()) {
    fail(ErrorKind::InvalidArgument, "concept out of vocabulary: '" + item.surface + "'");
  }
  return rows;
}

Eigen::MatrixXd glorot(size_t rows, size_t cols, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.real() - 1.0) * limit;
  }
  return m;
}

LstmParams init_lstm(size_t dim, size_t cell, Rng& rng) {
  LstmParams p;
  p.W = glorot(dim, 4 * cell, rng);
  p.U = glorot(cell, 4 * cell, rng);
  p.b = Eigen::VectorXd::Zero(4 * cell);
  return p;
}

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Adam state for one dense tensor.
template <typename Mat>
struct AdamSlot {
  Mat m, v;
  void init(const Mat& shape) {
    m = Mat::Zero(shape.rows(), shape.cols());
    v = Mat::Zero(shape.rows(), shape.cols());
  }
};

template <typename Mat>
void adam_step(Mat& param, const Mat& grad, AdamSlot<Mat>& slot, double lr, size_t t) {
  slot.m = kBeta1 * slot.m + (1.0 - kBeta1) * grad;
  slot.v = kBeta2 * slot.v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  double correct1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  double correct2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  Mat m_hat = slot.m / correct1;
  Mat v_hat = slot.v / correct2;
  param -= lr * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + kAdamEps).matrix());
}

}  // namespace

std::string encoder_name(EncoderKind kind) {
  return kind == EncoderKind::Centroid ? "centroid" : "sequence";
}

EncoderKind parse_encoder(std::string_view name) {
  if (name == "centroid") return EncoderKind::Centroid;
  if (name == "sequence") return EncoderKind::Sequence;
  fail(ErrorKind::InvalidArgument, "unknown encoder: '" + std::string(name) + "'");
}

std::string composition_name(Composition composition) {
  switch (composition) {
    case Composition::Concat: return "concat";
    case Composition::Diff: return "diff";
    default: return "add";
  }
}

Composition parse_composition(std::string_view name) {
  if (name == "concat") return Composition::Concat;
  if (name == "diff") return Composition::Diff;
  if (name == "add") return Composition::Add;
  fail(ErrorKind::InvalidArgument, "unknown composition: '" + std::string(name) + "'");
}

size_t ModelConfig::effective_hidden() const {
  if (hidden_size > 0) return hidden_size;
  return encoder == EncoderKind::Centroid ? 200 : 100;
}

size_t ModelConfig::encoder_output_dim(size_t embed_dim) const {
  return encoder == EncoderKind::Centroid ? embed_dim : 2 * cell_size;
}

size_t ModelConfig::input_width(size_t embed_dim) const {
  size_t enc = encoder_output_dim(embed_dim);
  return composition == Composition::Concat ? 2 * enc : enc;
}

std::string config_to_json(const ModelConfig& config) {
  nlohmann::ordered_json j;
  j["encoder"] = encoder_name(config.encoder);
  j["composition"] = composition_name(config.composition);
  j["hidden_size"] = config.hidden_size;
  j["cell_size"] = config.cell_size;
  j["label_count"] = config.label_count;
  j["tune_embeddings"] = config.tune_embeddings;
  j["normalize_centroid"] = config.normalize_centroid;
  j["seed"] = config.seed;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["learning_rate"] = config.learning_rate;
  return j.dump(2) + "\n";
}

ModelConfig config_from_json(const std::string& text) {
  ModelConfig config;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("encoder")) config.encoder = parse_encoder(j["encoder"].get<std::string>());
    if (j.contains("composition")) {
      config.composition = parse_composition(j["composition"].get<std::string>());
    }
    if (j.contains("hidden_size")) config.hidden_size = j["hidden_size"].get<size_t>();
    if (j.contains("cell_size")) config.cell_size = j["cell_size"].get<size_t>();
    if (j.contains("label_count")) config.label_count = j["label_count"].get<size_t>();
    if (j.contains("tune_embeddings")) config.tune_embeddings = j["tune_embeddings"].get<bool>();
    if (j.contains("normalize_centroid")) {
      config.normalize_centroid = j["normalize_centroid"].get<bool>();
    }
    if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();
    if (j.contains("epochs")) config.epochs = j["epochs"].get<size_t>();
    if (j.contains("batch_size")) config.batch_size = j["batch_size"].get<size_t>();
    if (j.contains("learning_rate")) config.learning_rate = j["learning_rate"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed model config: ") + e.what());
  }
  if (config.cell_size == 0 || config.epochs == 0 || config.batch_size == 0 ||
      config.learning_rate <= 0.0) {
    fail(ErrorKind::InvalidArgument, "model config values must be positive");
  }
  return config;
}

size_t ModelParameters::token_row(const std::string& token) const {
  auto it = token_index_.find(token);
  return it == token_index_.end() ? npos : it->second;
}

void ModelParameters::rebuild_token_index() {
  token_index_.clear();
  for (size_t i = 0; i < tokens.size(); ++i) token_index_[tokens[i]] = i;
}

ModelParameters init_parameters(const ModelConfig& config, const EmbeddingStore& store,
                                const std::vector<std::string>& inventory) {
  if (store.empty()) fail(ErrorKind::InvalidArgument, "empty embedding store");
  if (inventory.empty()) fail(ErrorKind::InvalidArgument, "empty relation inventory");

  ModelParameters params;
  params.config = config;
  if (params.config.label_count == 0) params.config.label_count = inventory.size();
  if (params.config.label_count != inventory.size()) {
    fail(ErrorKind::InvalidArgument,
         "config expects " + std::to_string(params.config.label_count) + " labels, inventory has " +
             std::to_string(inventory.size()));
  }
  params.inventory = inventory;

  params.tokens.reserve(store.size());
  params.embeddings.resize(store.size(), store.dim());
  for (size_t row = 0; row < store.size(); ++row) {
    params.tokens.push_back(store.token_at(row));
    const std::vector<double>& vec = store.vector_at(row);
    for (size_t c = 0; c < vec.size(); ++c) params.embeddings(row, c) = vec[c];
  }
  params.rebuild_token_index();

  Rng rng(mix_seed(config.seed, "init"));
  size_t width = params.config.input_width(store.dim());
  size_t hidden = params.config.effective_hidden();
  params.W_h = glorot(width, hidden, rng);
  params.W_o = glorot(hidden, params.config.label_count, rng);
  if (params.config.encoder == EncoderKind::Sequence) {
    params.fwd = init_lstm(store.dim(), params.config.cell_size, rng);
    params.bwd = init_lstm(store.dim(), params.config.cell_size, rng);
  }
  return params;
}

PreparedInstance prepare_instance(const ModelParameters& params, const Instance& instance) {
  PreparedInstance out;
  out.head_rows = resolve_rows(params, instance.head);
  out.tail_rows = resolve_rows(params, instance.tail);
  out.gold = Eigen::VectorXd::Zero(params.inventory.size());
  for (const std::string& label : instance.labels) {
    auto it = std::find(params.inventory.begin(), params.inventory.end(), label);
    if (it == params.inventory.end()) {
      fail(ErrorKind::InvalidArgument, "label '" + label + "' not in the model inventory");
    }
    out.gold(it - params.inventory.begin()) = 1.0;
  }
  return out;
}

std::vector<PreparedInstance> prepare_instances(const ModelParameters& params,
                                                const std::vector<Instance>& instances) {
  std::vector<PreparedInstance> out;
  out.reserve(instances.size());
  for (const Instance& inst : instances) out.push_back(prepare_instance(params, inst));
  return out;
}

Eigen::VectorXd compose_pair(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                             Composition composition) {
  if (composition != Composition::Concat && v1.size() != v2.size()) {
    fail(ErrorKind::InvalidArgument, "compose_pair needs equal lengths for diff/add");
  }
  switch (composition) {
    case Composition::Concat: {
      Eigen::VectorXd out(v1.size() + v2.size());
      out << v1, v2;
      return out;
    }
    case Composition::Diff: return v1 - v2;
    default: return v1 + v2;
  }
}

Eigen::VectorXd encode_sequence(const Concept& item, const ModelParameters& params) {
  if (params.config.encoder != EncoderKind::Sequence) {
    fail(ErrorKind::InvalidArgument, "encode_sequence requires the sequence encoder");
  }
  std::vector<size_t> rows = resolve_rows(params, item);
  return encode_rows(params, rows, nullptr, nullptr, nullptr);
}

Eigen::VectorXd encode_concept(const Concept& item, const ModelParameters& params) {
  std::vector<size_t> rows = resolve_rows(params, item);
  return encode_rows(params, rows, nullptr, nullptr, nullptr);
}

Eigen::VectorXd forward_probabilities(const ModelParameters& params, const Instance& instance) {
  PreparedInstance prepared = prepare_instance(params, instance);
  ForwardTrace trace;
  run_forward(params, prepared, trace);
  return trace.probs;
}

double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& gold) {
  if (probs.size() != gold.size()) {
    fail(ErrorKind::InvalidArgument, "probability/gold width mismatch");
  }
  if (probs.size() == 0) fail(ErrorKind::InvalidArgument, "empty probability vector");
  double total = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    double p = std::clamp(probs(k), kClip, 1.0 - kClip);
    total += -(gold(k) * std::log(p) + (1.0 - gold(k)) * std::log(1.0 - p));
  }
  return total / static_cast<double>(probs.size());
}

double model_loss(const ModelParameters& params, const std::vector<PreparedInstance>& batch) {
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");
  double total = 0.0;
  ForwardTrace trace;
  for (const PreparedInstance& inst : batch) {
    run_forward(params, inst, trace);
    total += bce_loss(trace.probs, inst.gold);
  }
  return total / static_cast<double>(batch.size());
}

Gradients model_gradients(const ModelParameters& params,
                          const std::vector<PreparedInstance>& batch, double* loss_out) {
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");

  Gradients grads;
  grads.W_h = Eigen::MatrixXd::Zero(params.W_h.rows(), params.W_h.cols());
  grads.W_o = Eigen::MatrixXd::Zero(params.W_o.rows(), params.W_o.cols());
  if (params.config.encoder == EncoderKind::Sequence) {
    grads.fwd.W = Eigen::MatrixXd::Zero(params.fwd.W.rows(), params.fwd.W.cols());
    grads.fwd.U = Eigen::MatrixXd::Zero(params.fwd.U.rows(), params.fwd.U.cols());
    grads.fwd.b = Eigen::VectorXd::Zero(params.fwd.b.size());
    grads.bwd.W = Eigen::MatrixXd::Zero(params.bwd.W.rows(), params.bwd.W.cols());
    grads.bwd.U = Eigen::MatrixXd::Zero(params.bwd.U.rows(), params.bwd.U.cols());
    grads.bwd.b = Eigen::VectorXd::Zero(params.bwd.b.size());
  }

  double total_loss = 0.0;
  const double batch_scale = 1.0 / static_cast<double>(batch.size());
  const double label_scale = 1.0 / static_cast<double>(params.inventory.size());
  ForwardTrace trace;
  for (const PreparedInstance& inst : batch) {
    run_forward(params, inst, trace);
    total_loss += bce_loss(trace.probs, inst.gold);

    // d loss / d logits; the clip zeroes the gradient where it is active.
    Eigen::VectorXd dz(trace.probs.size());
    for (Eigen::Index k = 0; k < trace.probs.size(); ++k) {
      double p = trace.probs(k);
      dz(k) = (p <= kClip || p >= 1.0 - kClip) ? 0.0
                                               : (p - inst.gold(k)) * label_scale * batch_scale;
    }

    grads.W_o.noalias() += trace.hidden * dz.transpose();
    Eigen::VectorXd dh = params.W_o * dz;
    Eigen::VectorXd da =
        dh.cwiseProduct((trace.hidden.array() > 0.0).cast<double>().matrix());
    grads.W_h.noalias() += trace.x * da.transpose();
    Eigen::VectorXd dx = params.W_h * da;

    Eigen::VectorXd d_head, d_tail;
    split_composition(dx, params.config.composition,
                      static_cast<size_t>(trace.enc_head.size()), d_head, d_tail);
    backprop_encoding(params, inst.head_rows, d_head, trace.mean_head, trace.head_fwd,
                      trace.head_bwd, grads);
    backprop_encoding(params, inst.tail_rows, d_tail, trace.mean_tail, trace.tail_fwd,
                      trace.tail_bwd, grads);
  }

  if (loss_out) *loss_out = total_loss * batch_scale;
  return grads;
}

std::string train_log_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "epoch,train_loss,dev_weighted_f1\n";
  for (const EpochStats& e : log.epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ','
        << format_double(e.dev_weighted_f1) << '\n';
  }
  return out.str();
}

TrainResult train_model(const DatasetBundle& bundle, const EmbeddingStore& store,
                        ModelConfig config) {
  if (bundle.train.empty()) fail(ErrorKind::InvalidArgument, "empty train split");
  if (bundle.dev.empty()) fail(ErrorKind::InvalidArgument, "empty dev split");

  ModelParameters params = init_parameters(config, store, bundle.inventory);
  std::vector<PreparedInstance> train = prepare_instances(params, bundle.train);
  std::vector<PreparedInstance> dev = prepare_instances(params, bundle.dev);

  std::vector<std::vector<std::string>> dev_gold;
  dev_gold.reserve(bundle.dev.size());
  for (const Instance& inst : bundle.dev) dev_gold.push_back(inst.labels);

  AdamSlot<Eigen::MatrixXd> slot_wh, slot_wo;
  slot_wh.init(params.W_h);
  slot_wo.init(params.W_o);
  AdamSlot<Eigen::MatrixXd> slot_fw, slot_fu, slot_bw, slot_bu;
  AdamSlot<Eigen::VectorXd> slot_fb, slot_bb;
  if (config.encoder == EncoderKind::Sequence) {
    slot_fw.init(params.fwd.W);
    slot_fu.init(params.fwd.U);
    slot_fb.init(params.fwd.b);
    slot_bw.init(params.bwd.W);
    slot_bu.init(params.bwd.U);
    slot_bb.init(params.bwd.b);
  }
  Eigen::MatrixXd embed_m, embed_v;
  if (params.config.tune_embeddings) {
    embed_m = Eigen::MatrixXd::Zero(params.embeddings.rows(), params.embeddings.cols());
    embed_v = Eigen::MatrixXd::Zero(params.embeddings.rows(), params.embeddings.cols());
  }

  TrainResult result;
  result.log.best_dev_f1 = -1.0;
  size_t adam_t = 0;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<PreparedInstance> batch;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, "epoch:" + std::to_string(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);

      double batch_loss = 0.0;
      Gradients grads = model_gradients(params, batch, &batch_loss);
      epoch_loss += batch_loss * static_cast<double>(batch.size());

      ++adam_t;
      double lr = config.learning_rate;
      adam_step(params.W_h, grads.W_h, slot_wh, lr, adam_t);
      adam_step(params.W_o, grads.W_o, slot_wo, lr, adam_t);
      if (config.encoder == EncoderKind::Sequence) {
        adam_step(params.fwd.W, grads.fwd.W, slot_fw, lr, adam_t);
        adam_step(params.fwd.U, grads.fwd.U, slot_fu, lr, adam_t);
        adam_step(params.fwd.b, grads.fwd.b, slot_fb, lr, adam_t);
        adam_step(params.bwd.W, grads.bwd.W, slot_bw, lr, adam_t);
        adam_step(params.bwd.U, grads.bwd.U, slot_bu, lr, adam_t);
        adam_step(params.bwd.b, grads.bwd.b, slot_bb, lr, adam_t);
      }
      if (params.config.tune_embeddings) {
        double correct1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t));
        double correct2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t));
        for (const auto& [row, g] : grads.embedding_rows) {
          embed_m.row(row) = kBeta1 * embed_m.row(row) + (1.0 - kBeta1) * g;
          embed_v.row(row) =
              kBeta2 * embed_v.row(row) + (1.0 - kBeta2) * g.cwiseProduct(g);
          Eigen::RowVectorXd m_hat = embed_m.row(row) / correct1;
          Eigen::RowVectorXd v_hat = embed_v.row(row) / correct2;
          params.embeddings.row(row) -=
              lr * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + kAdamEps).matrix());
        }
      }
    }
    epoch_loss /= static_cast<double>(train.size());

    ThresholdSet half = ThresholdSet::uniform(bundle.inventory, 0.5);
    std::vector<std::vector<std::string>> dev_pred;
    dev_pred.reserve(dev.size());
    ForwardTrace trace;
    for (const PreparedInstance& inst : dev) {
      run_forward(params, inst, trace);
      std::vector<std::string> labels;
      for (Eigen::Index k = 0; k < trace.probs.size(); ++k) {
        if (trace.probs(k) >= 0.5) labels.push_back(bundle.inventory[k]);
      }
      dev_pred.push_back(std::move(labels));
    }
    double dev_f1 = evaluate(dev_pred, dev_gold, bundle.inventory).weighted_f1;

    result.log.epochs.push_back({epoch, epoch_loss, dev_f1});
    if (dev_f1 > result.log.best_dev_f1) {
      result.log.best_dev_f1 = dev_f1;
      result.log.best_epoch = epoch;
      result.params = params;
    }
  }
  result.params.rebuild_token_index();
  return result;
}

PredictionResult predict(const std::vector<Instance>& instances, const ModelParameters& params,
                         const ThresholdSet& thresholds) {
  std::vector<double> cutoffs;
  cutoffs.reserve(params.inventory.size());
  for (const std::string& relation : params.inventory) {
    cutoffs.push_back(thresholds.value_for(relation));
  }

  PredictionResult out;
  out.labels.reserve(instances.size());
  out.probabilities.reserve(instances.size());
  ForwardTrace trace;
  for (const Instance& inst : instances) {
    PreparedInstance prepared = prepare_instance(params, inst);
    run_forward(params, prepared, trace);
    std::vector<std::string> labels;
    std::vector<double> probs(trace.probs.data(), trace.probs.data() + trace.probs.size());
    for (Eigen::Index k = 0; k < trace.probs.size(); ++k) {
      if (trace.probs(k) >= cutoffs[k]) labels.push_back(params.inventory[k]);
    }
    out.labels.push_back(std::move(labels));
    out.probabilities.push_back(std::move(probs));
  }
  return out;
}

namespace {

constexpr char kMagic[9] = "CNRELCK1";

void append_tensor(std::string& blob, nlohmann::ordered_json& manifest, const char* name,
                   const Eigen::MatrixXd& tensor) {
  manifest.push_back({{"name", name},
                      {"rows", tensor.rows()},
                      {"cols", tensor.cols()}});
  for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
    for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
      float v = static_cast<float>(tensor(r, c));
      char bytes[4];
      std::memcpy(bytes, &v, 4);
      blob.append(bytes, 4);
    }
  }
}

Eigen::MatrixXd read_tensor(const std::string& blob, size_t* offset, size_t rows, size_t cols) {
  size_t need = rows * cols * 4;
  if (*offset + need > blob.size()) fail(ErrorKind::Format, "checkpoint tensor data truncated");
  Eigen::MatrixXd out(rows, cols);
  const char* base = blob.data() + *offset;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      float v;
      std::memcpy(&v, base + (r * cols + c) * 4, 4);
      out(r, c) = static_cast<double>(v);
    }
  }
  *offset += need;
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParameters& params) {
  nlohmann::ordered_json header;
  header["config"] = nlohmann::ordered_json::parse(config_to_json(params.config));
  header["inventory"] = params.inventory;
  header["tokens"] = params.tokens;
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();

  std::string blob;
  append_tensor(blob, manifest, "embeddings", params.embeddings);
  append_tensor(blob, manifest, "W_h", params.W_h);
  append_tensor(blob, manifest, "W_o", params.W_o);
  if (params.config.encoder == EncoderKind::Sequence) {
    append_tensor(blob, manifest, "fwd.W", params.fwd.W);
    append_tensor(blob, manifest, "fwd.U", params.fwd.U);
    append_tensor(blob, manifest, "fwd.b", params.fwd.b);
    append_tensor(blob, manifest, "bwd.W", params.bwd.W);
    append_tensor(blob, manifest, "bwd.U", params.bwd.U);
    append_tensor(blob, manifest, "bwd.b", params.bwd.b);
  }
  header["tensors"] = std::move(manifest);

  std::string header_text = header.dump();
  std::string out;
  out.append(kMagic, 8);
  uint32_t len = static_cast<uint32_t>(header_text.size());
  char len_bytes[4];
  std::memcpy(len_bytes, &len, 4);
  out.append(len_bytes, 4);
  out += header_text;
  out += blob;
  write_file(path, out);
}

ModelParameters load_checkpoint(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < 12 || std::memcmp(data.data(), kMagic, 8) != 0) {
    fail(ErrorKind::Format, "not a model checkpoint: " + path);
  }
  uint32_t len;
  std::memcpy(&len, data.data() + 8, 4);
  if (12 + static_cast<size_t>(len) > data.size()) {
    fail(ErrorKind::Format, "checkpoint header truncated");
  }

  ModelParameters params;
  std::vector<std::tuple<std::string, size_t, size_t>> tensors;
  try {
    nlohmann::json header = nlohmann::json::parse(data.substr(12, len));
    params.config = config_from_json(header.at("config").dump());
    params.inventory = header.at("inventory").get<std::vector<std::string>>();
    params.tokens = header.at("tokens").get<std::vector<std::string>>();
    for (const auto& t : header.at("tensors")) {
      tensors.emplace_back(t.at("name").get<std::string>(), t.at("rows").get<size_t>(),
                           t.at("cols").get<size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed checkpoint header: ") + e.what());
  }

  std::string blob = data.substr(12 + len);
  size_t offset = 0;
  for (const auto& [name, rows, cols] : tensors) {
    Eigen::MatrixXd tensor = read_tensor(blob, &offset, rows, cols);
    if (name == "embeddings") params.embeddings = std::move(tensor);
    else if (name == "W_h") params.W_h = std::move(tensor);
    else if (name == "W_o") params.W_o = std::move(tensor);
    else if (name == "fwd.W") params.fwd.W = std::move(tensor);
    else if (name == "fwd.U") params.fwd.U = std::move(tensor);
    else if (name == "bwd.W") params.bwd.W = std::move(tensor);
    else if (name == "bwd.U") params.bwd.U = std::move(tensor);
    else if (name == "fwd.b" || name == "bwd.b") {
      if (tensor.cols() != 1) fail(ErrorKind::Format, "bias tensor must have one column");
      (name == "fwd.b" ? params.fwd.b : params.bwd.b) = tensor.col(0);
    } else {
      fail(ErrorKind::Format, "unknown checkpoint tensor: " + name);
    }
  }
  if (offset != blob.size()) fail(ErrorKind::Format, "checkpoint has trailing tensor data");
  if (params.tokens.size() != static_cast<size_t>(params.embeddings.rows())) {
    fail(ErrorKind::Format, "checkpoint token list does not match the embedding tensor");
  }
  params.rebuild_token_index();
  return params;
}

}  // namespace cnrel
