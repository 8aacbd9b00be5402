#include "spgnn/model.hpp"

#include <cmath>
#include <fstream>

#include "spgnn/errors.hpp"
#include "spgnn/rng.hpp"

namespace spgnn {

namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

int conv_out_dim(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

// Inputs are centered before the first conv so features start symmetric
// around zero.
constexpr double kInputShift = 0.5;

}  // namespace

std::vector<int> ModelConfig::resolved_channels() const {
  if (!backbone_channels.empty()) return backbone_channels;
  std::vector<int> channels(4);
  for (int k = 0; k < 4; ++k) {
    channels[static_cast<std::size_t>(k)] = std::max(4, feature_dim >> (3 - k));
  }
  channels[3] = feature_dim;  // GAP width equals the feature dimension
  return channels;
}

void ModelConfig::validate() const {
  if (input_height < 8 || input_width < 8) {
    raise(ErrorCode::InvalidArgument, "model input size must be at least 8x8");
  }
  if (feature_dim <= 0 || embedding_dim <= 0 || relation_hidden <= 0) {
    raise(ErrorCode::InvalidArgument, "model dimensions must be positive");
  }
  if (num_apis < 2) {
    raise(ErrorCode::InvalidArgument, "model needs at least 2 APIs");
  }
  const auto channels = resolved_channels();
  if (channels.empty() || channels.back() != feature_dim) {
    raise(ErrorCode::ShapeMismatch, "last backbone channel width must equal feature_dim");
  }
  for (int ch : channels) {
    if (ch <= 0) raise(ErrorCode::InvalidArgument, "backbone channels must be positive");
  }
}

void SpgnnParameters::set_zero() {
  for_each_tensor([](ParamGroup, auto& t) { t.setZero(); });
}

namespace {

void init_linear(LinearParam& layer, Eigen::Index rows, Eigen::Index cols, double scale,
                 Rng& rng) {
  layer.weight.resize(rows, cols);
  const double stddev = scale / std::sqrt(static_cast<double>(cols));
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
    layer.weight.data()[i] = stddev * rng.normal();
  }
  layer.bias = Eigen::VectorXd::Zero(rows);
}

}  // namespace

SpgnnParameters init_parameters(const ModelConfig& config) {
  config.validate();
  SpgnnParameters params;
  const auto channels = config.resolved_channels();

  int in_ch = 3;
  for (std::size_t layer = 0; layer < channels.size(); ++layer) {
    Rng rng = Rng::substream(config.init_seed, {fnv1a64("phi"), layer});
    ConvParam conv;
    conv.in_channels = in_ch;
    conv.out_channels = channels[layer];
    conv.weight.resize(conv.out_channels, in_ch * kKernel * kKernel);
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_ch * kKernel * kKernel));
    for (Eigen::Index i = 0; i < conv.weight.size(); ++i) {
      conv.weight.data()[i] = stddev * rng.normal();
    }
    conv.bias = Eigen::VectorXd::Zero(conv.out_channels);
    params.phi.push_back(std::move(conv));
    in_ch = channels[layer];
  }

  const Eigen::Index d_f = config.feature_dim;
  const Eigen::Index c = config.num_apis;
  const Eigen::Index e = config.embedding_dim;
  {
    Rng rng = Rng::substream(config.init_seed, {fnv1a64("psi")});
    init_linear(params.psi, c * e, d_f, std::sqrt(2.0), rng);
  }
  {
    Rng rng = Rng::substream(config.init_seed, {fnv1a64("vartheta")});
    init_linear(params.relation_fc1, config.relation_hidden, 2 * e, std::sqrt(2.0), rng);
    init_linear(params.relation_fc2, 1, config.relation_hidden, 1.0, rng);
  }
  {
    Rng rng = Rng::substream(config.init_seed, {fnv1a64("omega")});
    init_linear(params.omega, c, d_f, 1.0, rng);
  }
  return params;
}

namespace {

constexpr char kPhiMagic[8] = {'S', 'P', 'G', 'N', 'P', 'H', 'I', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_backbone_weights(const SpgnnParameters& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::UnwritableOutput, "cannot write backbone weights: " + path.string());
  }
  out.write(kPhiMagic, sizeof(kPhiMagic));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.phi.size()));
  for (const auto& conv : params.phi) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(conv.out_channels));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(conv.in_channels));
    out.write(reinterpret_cast<const char*>(conv.weight.data()),
              static_cast<std::streamsize>(sizeof(double) * conv.weight.size()));
    out.write(reinterpret_cast<const char*>(conv.bias.data()),
              static_cast<std::streamsize>(sizeof(double) * conv.bias.size()));
  }
}

SpgnnParameters init_parameters(const ModelConfig& config,
                                const std::filesystem::path& external_phi) {
  SpgnnParameters params = init_parameters(config);
  std::ifstream in(external_phi, std::ios::binary);
  if (!in) {
    raise(ErrorCode::MissingFile, "backbone weight file not found: " + external_phi.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kPhiMagic, sizeof(magic)) != 0) {
    raise(ErrorCode::ShapeMismatch, "not a backbone weight file: " + external_phi.string());
  }
  const auto layers = read_pod<std::uint32_t>(in);
  if (layers != params.phi.size()) {
    raise(ErrorCode::ShapeMismatch,
          "backbone layer count mismatch: file has " + std::to_string(layers) +
              ", config wants " + std::to_string(params.phi.size()));
  }
  for (auto& conv : params.phi) {
    const auto out_ch = read_pod<std::uint32_t>(in);
    const auto in_ch = read_pod<std::uint32_t>(in);
    if (out_ch != static_cast<std::uint32_t>(conv.out_channels) ||
        in_ch != static_cast<std::uint32_t>(conv.in_channels)) {
      raise(ErrorCode::ShapeMismatch,
            "backbone layer shape mismatch: file " + std::to_string(out_ch) + "x" +
                std::to_string(in_ch) + ", config " + std::to_string(conv.out_channels) +
                "x" + std::to_string(conv.in_channels));
    }
    in.read(reinterpret_cast<char*>(conv.weight.data()),
            static_cast<std::streamsize>(sizeof(double) * conv.weight.size()));
    in.read(reinterpret_cast<char*>(conv.bias.data()),
            static_cast<std::streamsize>(sizeof(double) * conv.bias.size()));
    if (!in) {
      raise(ErrorCode::ShapeMismatch, "truncated backbone weight file");
    }
  }
  return params;
}

std::uint64_t parameter_checksum(const SpgnnParameters& params) {
  std::uint64_t h = fnv1a64("spgnn-params");
  params.for_each_tensor([&h](ParamGroup, const auto& t) {
    h = fnv1a64(t.data(), sizeof(double) * static_cast<std::size_t>(t.size()), h);
  });
  return h;
}

namespace {

// Gathers 3x3 stride-2 patches of `input` (in_ch x B*h_in*w_in, sample-major
// columns) into `cols` ((in_ch*9) x B*h_out*w_out). Zero padding of 1.
void im2col(const Eigen::MatrixXd& input, int batch, int in_ch, int h_in, int w_in,
            int h_out, int w_out, Eigen::MatrixXd& cols) {
  cols.setZero(static_cast<Eigen::Index>(in_ch) * kKernel * kKernel,
               static_cast<Eigen::Index>(batch) * h_out * w_out);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index in_base = static_cast<Eigen::Index>(b) * h_in * w_in;
    const Eigen::Index out_base = static_cast<Eigen::Index>(b) * h_out * w_out;
    for (int oy = 0; oy < h_out; ++oy) {
      for (int ox = 0; ox < w_out; ++ox) {
        const Eigen::Index col = out_base + static_cast<Eigen::Index>(oy) * w_out + ox;
        for (int ky = 0; ky < kKernel; ++ky) {
          const int iy = oy * kStride + ky - kPad;
          if (iy < 0 || iy >= h_in) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int ix = ox * kStride + kx - kPad;
            if (ix < 0 || ix >= w_in) continue;
            const Eigen::Index in_col = in_base + static_cast<Eigen::Index>(iy) * w_in + ix;
            const Eigen::Index row_base = static_cast<Eigen::Index>(ky) * kKernel + kx;
            for (int ci = 0; ci < in_ch; ++ci) {
              cols(static_cast<Eigen::Index>(ci) * kKernel * kKernel + row_base, col) =
                  input(ci, in_col);
            }
          }
        }
      }
    }
  }
}

// Scatter-add of column gradients back onto the input map (im2col adjoint).
void col2im(const Eigen::MatrixXd& dcols, int batch, int in_ch, int h_in, int w_in,
            int h_out, int w_out, Eigen::MatrixXd& dinput) {
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index in_base = static_cast<Eigen::Index>(b) * h_in * w_in;
    const Eigen::Index out_base = static_cast<Eigen::Index>(b) * h_out * w_out;
    for (int oy = 0; oy < h_out; ++oy) {
      for (int ox = 0; ox < w_out; ++ox) {
        const Eigen::Index col = out_base + static_cast<Eigen::Index>(oy) * w_out + ox;
        for (int ky = 0; ky < kKernel; ++ky) {
          const int iy = oy * kStride + ky - kPad;
          if (iy < 0 || iy >= h_in) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int ix = ox * kStride + kx - kPad;
            if (ix < 0 || ix >= w_in) continue;
            const Eigen::Index in_col = in_base + static_cast<Eigen::Index>(iy) * w_in + ix;
            const Eigen::Index row_base = static_cast<Eigen::Index>(ky) * kKernel + kx;
            for (int ci = 0; ci < in_ch; ++ci) {
              dinput(ci, in_col) +=
                  dcols(static_cast<Eigen::Index>(ci) * kKernel * kKernel + row_base, col);
            }
          }
        }
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd forward_features(const ModelConfig& config, const SpgnnParameters& params,
                                 const std::vector<Image>& images, BatchTrace* trace) {
  config.validate();
  if (images.empty()) {
    raise(ErrorCode::InvalidArgument, "empty image batch");
  }
  const int batch = static_cast<int>(images.size());
  for (const auto& img : images) {
    if (img.height != config.input_height || img.width != config.input_width) {
      raise(ErrorCode::WrongInputSize,
            "expected " + std::to_string(config.input_height) + "x" +
                std::to_string(config.input_width) + ", got " + std::to_string(img.height) +
                "x" + std::to_string(img.width));
    }
  }

  // planar centered input: (3 x B*H*W)
  const int hw = config.input_height * config.input_width;
  Eigen::MatrixXd current(3, static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b) {
    const auto& px = images[static_cast<std::size_t>(b)].pixels;
    const Eigen::Index base = static_cast<Eigen::Index>(b) * hw;
    for (int i = 0; i < hw; ++i) {
      current(0, base + i) = px[static_cast<std::size_t>(i) * 3 + 0] - kInputShift;
      current(1, base + i) = px[static_cast<std::size_t>(i) * 3 + 1] - kInputShift;
      current(2, base + i) = px[static_cast<std::size_t>(i) * 3 + 2] - kInputShift;
    }
  }

  if (trace) {
    trace->batch = batch;
    trace->conv.clear();
    trace->conv.resize(params.phi.size());
  }

  int h = config.input_height;
  int w = config.input_width;
  for (std::size_t layer = 0; layer < params.phi.size(); ++layer) {
    const auto& conv = params.phi[layer];
    const int h_out = conv_out_dim(h);
    const int w_out = conv_out_dim(w);
    Eigen::MatrixXd cols;
    im2col(current, batch, conv.in_channels, h, w, h_out, w_out, cols);
    Eigen::MatrixXd out = conv.weight * cols;
    out.colwise() += conv.bias;
    out = out.cwiseMax(0.0);
    if (trace) {
      auto& ct = trace->conv[layer];
      ct.input = std::move(current);
      ct.cols = std::move(cols);
      ct.output = out;
      ct.h_in = h;
      ct.w_in = w;
      ct.h_out = h_out;
      ct.w_out = w_out;
    }
    current = std::move(out);
    h = h_out;
    w = w_out;
  }

  // global average pooling
  const int map_size = h * w;
  Eigen::MatrixXd features(config.feature_dim, batch);
  for (int b = 0; b < batch; ++b) {
    features.col(b) =
        current.middleCols(static_cast<Eigen::Index>(b) * map_size, map_size).rowwise().mean();
  }
  if (trace) trace->features = features;
  return features;
}

Eigen::MatrixXd head_logits(const SpgnnParameters& params, const Eigen::MatrixXd& features) {
  if (features.rows() != params.omega.weight.cols()) {
    raise(ErrorCode::ShapeMismatch, "feature dimension does not match head");
  }
  Eigen::MatrixXd logits = params.omega.weight * features;
  logits.colwise() += params.omega.bias;
  return logits;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& logits) {
  return logits.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

Eigen::VectorXd recommend_head(const SpgnnParameters& params, const Eigen::VectorXd& feature) {
  return sigmoid(head_logits(params, feature)).col(0);
}

Eigen::MatrixXd translate_batch(const ModelConfig& config, const SpgnnParameters& params,
                                const Eigen::MatrixXd& features, BatchTrace* trace) {
  if (features.rows() != params.psi.weight.cols()) {
    raise(ErrorCode::ShapeMismatch, "feature dimension does not match translator");
  }
  Eigen::MatrixXd pre = params.psi.weight * features;
  pre.colwise() += params.psi.bias;
  Eigen::MatrixXd post = config.translator_relu ? pre.cwiseMax(0.0).eval() : pre;
  if (trace) {
    trace->translated_pre = std::move(pre);
    trace->translated = post;
  }
  return post;
}

Eigen::MatrixXd translate_semantics(const ModelConfig& config, const SpgnnParameters& params,
                                    const Eigen::VectorXd& feature) {
  const Eigen::MatrixXd flat = translate_batch(config, params, feature);
  Eigen::MatrixXd estimate(config.num_apis, config.embedding_dim);
  for (int j = 0; j < config.num_apis; ++j) {
    estimate.row(j) =
        flat.col(0).segment(static_cast<Eigen::Index>(j) * config.embedding_dim,
                            config.embedding_dim).transpose();
  }
  return estimate;
}

namespace {

// Builds the concatenated relation input (2e x B*c) from ground-truth rows
// and the translated estimates ((c*e) x B, API-major rows).
Eigen::MatrixXd build_relation_input(const Eigen::MatrixXd& semantics,
                                     const Eigen::MatrixXd& translated, int num_apis,
                                     int dim) {
  const Eigen::Index batch = translated.cols();
  Eigen::MatrixXd input(2 * dim, batch * num_apis);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int j = 0; j < num_apis; ++j) {
      const Eigen::Index col = b * num_apis + j;
      input.col(col).head(dim) = semantics.row(j).transpose();
      input.col(col).tail(dim) =
          translated.col(b).segment(static_cast<Eigen::Index>(j) * dim, dim);
    }
  }
  return input;
}

}  // namespace

Eigen::MatrixXd relation_logits_batch(const ModelConfig& config, const SpgnnParameters& params,
                                      const ApiSemanticsMatrix& semantics,
                                      const Eigen::MatrixXd& translated, BatchTrace* trace) {
  const int c = config.num_apis;
  const int e = config.embedding_dim;
  if (semantics.matrix.rows() != c || semantics.matrix.cols() != e) {
    raise(ErrorCode::DimensionMismatch, "semantics matrix does not match model config");
  }
  if (translated.rows() != static_cast<Eigen::Index>(c) * e) {
    raise(ErrorCode::DimensionMismatch, "translated estimate does not match c*e");
  }
  if (params.relation_fc1.weight.cols() != 2 * e) {
    raise(ErrorCode::DimensionMismatch, "relation net input width does not match 2e");
  }

  Eigen::MatrixXd input = build_relation_input(semantics.matrix, translated, c, e);
  Eigen::MatrixXd hidden = params.relation_fc1.weight * input;
  hidden.colwise() += params.relation_fc1.bias;
  hidden = hidden.cwiseMax(0.0);
  Eigen::RowVectorXd flat = (params.relation_fc2.weight * hidden).row(0);
  flat.array() += params.relation_fc2.bias(0);

  const Eigen::Index batch = translated.cols();
  Eigen::MatrixXd logits(c, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    logits.col(b) = flat.segment(b * c, c).transpose();
  }
  if (trace) {
    trace->relation_input = std::move(input);
    trace->relation_hidden = std::move(hidden);
  }
  return logits;
}

RelationScores relation_scores(const SpgnnParameters& params,
                               const ApiSemanticsMatrix& semantics,
                               const Eigen::MatrixXd& estimate) {
  if (estimate.rows() != semantics.matrix.rows() ||
      estimate.cols() != semantics.matrix.cols()) {
    raise(ErrorCode::DimensionMismatch,
          "ground-truth and estimated semantics differ in shape");
  }
  const int c = static_cast<int>(estimate.rows());
  const int e = static_cast<int>(estimate.cols());
  if (params.relation_fc1.weight.cols() != 2 * e) {
    raise(ErrorCode::DimensionMismatch, "relation net input width does not match 2e");
  }

  // flatten the estimate to the API-major column layout used by the batch path
  Eigen::MatrixXd translated(static_cast<Eigen::Index>(c) * e, 1);
  for (int j = 0; j < c; ++j) {
    translated.col(0).segment(static_cast<Eigen::Index>(j) * e, e) = estimate.row(j).transpose();
  }
  Eigen::MatrixXd input = build_relation_input(semantics.matrix, translated, c, e);
  Eigen::MatrixXd hidden = params.relation_fc1.weight * input;
  hidden.colwise() += params.relation_fc1.bias;
  hidden = hidden.cwiseMax(0.0);
  Eigen::RowVectorXd flat = (params.relation_fc2.weight * hidden).row(0);
  flat.array() += params.relation_fc2.bias(0);

  RelationScores scores;
  scores.raw = flat.transpose();
  scores.normalized = scores.raw.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  return scores;
}

TrainForward forward_training(const ModelConfig& config, const SpgnnParameters& params,
                              const std::vector<Image>& images,
                              const ApiSemanticsMatrix& semantics) {
  TrainForward fwd;
  const Eigen::MatrixXd features = forward_features(config, params, images, &fwd.trace);
  fwd.head_logits = head_logits(params, features);
  const Eigen::MatrixXd translated = translate_batch(config, params, features, &fwd.trace);
  fwd.relation_logits = relation_logits_batch(config, params, semantics, translated, &fwd.trace);
  return fwd;
}

void backward_training(const ModelConfig& config, const SpgnnParameters& params,
                       const BatchTrace& trace, const Eigen::MatrixXd& d_head_logits,
                       const Eigen::MatrixXd& d_relation_logits, SpgnnParameters& grads) {
  const int c = config.num_apis;
  const int e = config.embedding_dim;
  const Eigen::Index batch = trace.features.cols();

  // head
  grads.omega.weight += d_head_logits * trace.features.transpose();
  grads.omega.bias += d_head_logits.rowwise().sum();
  Eigen::MatrixXd d_features = params.omega.weight.transpose() * d_head_logits;

  // relation net (flatten (c x B) -> row of length B*c, sample-major)
  Eigen::RowVectorXd d_flat(batch * c);
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_flat.segment(b * c, c) = d_relation_logits.col(b).transpose();
  }
  grads.relation_fc2.weight += d_flat * trace.relation_hidden.transpose();
  grads.relation_fc2.bias(0) += d_flat.sum();
  Eigen::MatrixXd d_hidden = params.relation_fc2.weight.transpose() * d_flat;
  d_hidden = d_hidden.cwiseProduct(
      (trace.relation_hidden.array() > 0.0).cast<double>().matrix());
  grads.relation_fc1.weight += d_hidden * trace.relation_input.transpose();
  grads.relation_fc1.bias += d_hidden.rowwise().sum();
  const Eigen::MatrixXd d_rel_input = params.relation_fc1.weight.transpose() * d_hidden;

  // estimate half of the relation input feeds the translator; the
  // ground-truth half is data, not a parameter path
  Eigen::MatrixXd d_translated = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c) * e, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int j = 0; j < c; ++j) {
      d_translated.col(b).segment(static_cast<Eigen::Index>(j) * e, e) +=
          d_rel_input.col(b * c + j).tail(e);
    }
  }

  // translator
  Eigen::MatrixXd d_pre = config.translator_relu
                              ? d_translated
                                    .cwiseProduct((trace.translated_pre.array() > 0.0)
                                                      .cast<double>()
                                                      .matrix())
                                    .eval()
                              : d_translated;
  grads.psi.weight += d_pre * trace.features.transpose();
  grads.psi.bias += d_pre.rowwise().sum();
  d_features += params.psi.weight.transpose() * d_pre;

  // GAP backward into the last conv map
  const auto& last = trace.conv.back();
  const int map_size = last.h_out * last.w_out;
  Eigen::MatrixXd d_out(config.feature_dim, batch * static_cast<Eigen::Index>(map_size));
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int l = 0; l < map_size; ++l) {
      d_out.col(b * map_size + l) = d_features.col(b) / static_cast<double>(map_size);
    }
  }

  // conv chain, last to first
  for (int layer = static_cast<int>(params.phi.size()) - 1; layer >= 0; --layer) {
    const auto& conv = params.phi[static_cast<std::size_t>(layer)];
    const auto& ct = trace.conv[static_cast<std::size_t>(layer)];
    d_out = d_out.cwiseProduct((ct.output.array() > 0.0).cast<double>().matrix());
    grads.phi[static_cast<std::size_t>(layer)].weight += d_out * ct.cols.transpose();
    grads.phi[static_cast<std::size_t>(layer)].bias += d_out.rowwise().sum();
    if (layer == 0) break;  // image input needs no gradient
    const Eigen::MatrixXd d_cols = conv.weight.transpose() * d_out;
    Eigen::MatrixXd d_input = Eigen::MatrixXd::Zero(ct.input.rows(), ct.input.cols());
    col2im(d_cols, static_cast<int>(batch), conv.in_channels, ct.h_in, ct.w_in, ct.h_out,
           ct.w_out, d_input);
    d_out = std::move(d_input);
  }
}

}  // namespace spgnn
