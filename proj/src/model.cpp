#include "deciwatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deciwatch {

namespace {
constexpr double kPi = 3.14159265358979323846;

Array2 sinusoidal_table(int rows, int cols) {
  Array2 t(rows, cols);
  for (int p = 0; p < rows; ++p)
    for (int j = 0; j < cols; ++j) {
      const double rate = std::pow(10000.0, -2.0 * (j / 2) / cols);
      t.at(p, j) = (j % 2 == 0) ? std::sin(p * rate) : std::cos(p * rate);
    }
  return t;
}
}  // namespace

void ModelConfig::validate() const {
  if (K < 1 || (D != 2 && D != 3)) throw std::invalid_argument("model: K >= 1, D in {2,3}");
  if (N < 1 || Q < 1) throw std::invalid_argument("model: N and Q must be >= 1");
  if (C < 1 || M < 0 || H < 1) throw std::invalid_argument("model: C >= 1, M >= 0, H >= 1");
  if (C % H != 0)
    throw std::invalid_argument("model: C=" + std::to_string(C) + " not divisible by H=" +
                                std::to_string(H));
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw std::invalid_argument("model: kernel_size must be odd, got " +
                                std::to_string(kernel_size));
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("model: dropout in [0,1)");
  if (visible == 0 || visible == 1) throw std::invalid_argument("model: visible must be >= 2");
}

Array2& ParamStore::add(const std::string& name, Array2 v) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate " + name);
  order_.push_back(name);
  return index_.emplace(name, std::move(v)).first->second;
}

Array2& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamStore: missing " + name);
  return it->second;
}

const Array2& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamStore: missing " + name);
  return it->second;
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += index_.at(name).size();
  return n;
}

bool Model::is_frozen(const std::string& name) const {
  return std::find(frozen.begin(), frozen.end(), name) != frozen.end();
}

namespace {

void add_block_params(ParamStore& ps, const std::string& prefix, int C, int F, bool cross,
                      std::mt19937_64& rng) {
  auto linear = [&](const std::string& n, int in, int out) {
    ps.add(n + ".w", xavier_uniform(in, out, in, rng));
    ps.add(n + ".b", Array2(1, out));
  };
  auto ln = [&](const std::string& n) {
    ps.add(n + ".g", Array2(1, C, 1.0));
    ps.add(n + ".b", Array2(1, C));
  };
  ln(prefix + ".ln1");
  linear(prefix + ".self.q", C, C);
  linear(prefix + ".self.k", C, C);
  linear(prefix + ".self.v", C, C);
  linear(prefix + ".self.o", C, C);
  if (cross) {
    ln(prefix + ".ln2");
    linear(prefix + ".cross.q", C, C);
    linear(prefix + ".cross.k", C, C);
    linear(prefix + ".cross.v", C, C);
    linear(prefix + ".cross.o", C, C);
  }
  ln(prefix + (cross ? ".ln3" : ".ln2"));
  linear(prefix + ".ffn.1", C, F);
  linear(prefix + ".ffn.2", F, C);
}

}  // namespace

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  std::mt19937_64 rng(seed);
  const int KD = cfg.pose_dim();
  const int C = cfg.C;
  const int F = cfg.ffn_dim();
  const int V = cfg.visible_count();
  const int L = cfg.window_length();

  auto& ps = m.params;
  ps.add("denoise.embed", xavier_uniform(KD, C, KD, rng));
  if (cfg.sinusoidal_pos) {
    ps.add("denoise.pos", sinusoidal_table(V, C));
    m.frozen.push_back("denoise.pos");
  } else {
    ps.add("denoise.pos", gaussian(V, C, 0.02, rng));
  }
  for (int i = 0; i < cfg.M; ++i)
    add_block_params(ps, "denoise.b" + std::to_string(i), C, F, /*cross=*/false, rng);
  ps.add("denoise.out", xavier_uniform(C, KD, C, rng));

  // upsampling starts as exact linear interpolation over the uniform grid
  std::vector<int> grid;
  for (int i = 0; i < V; ++i)
    grid.push_back(i == V - 1 ? L - 1 : static_cast<int>(std::lround(i * (L - 1.0) / (V - 1))));
  ps.add("recover.upsample", linear_upsample_weights(grid, L));
  ps.add("recover.conv", xavier_uniform(cfg.kernel_size * KD, C, cfg.kernel_size * KD, rng));
  if (cfg.sinusoidal_pos) {
    ps.add("recover.pos", sinusoidal_table(L, C));
    m.frozen.push_back("recover.pos");
  } else {
    ps.add("recover.pos", gaussian(L, C, 0.02, rng));
  }
  for (int i = 0; i < cfg.M; ++i)
    add_block_params(ps, "recover.b" + std::to_string(i), C, F, /*cross=*/true, rng);
  ps.add("recover.out", xavier_uniform(C, KD, C, rng));
  return m;
}

NodePtr GraphParams::operator[](const std::string& name) {
  auto it = leaves_.find(name);
  if (it != leaves_.end()) return it->second;
  const Array2& v = model_->params.get(name);
  NodePtr n = model_->is_frozen(name) ? make_constant(v) : make_leaf(v);
  leaves_.emplace(name, n);
  return n;
}

namespace {

NodePtr linear(GraphParams& gp, const std::string& name, const NodePtr& x) {
  return add_rowvec(matmul(x, gp[name + ".w"]), gp[name + ".b"]);
}

// Scaled dot-product multi-head attention; kv may differ from q (cross).
NodePtr attention(GraphParams& gp, const std::string& prefix, const NodePtr& q_in,
                  const NodePtr& kv_in, int heads) {
  NodePtr q = linear(gp, prefix + ".q", q_in);
  NodePtr k = linear(gp, prefix + ".k", kv_in);
  NodePtr v = linear(gp, prefix + ".v", kv_in);
  const int C = q->value.cols;
  const int dh = C / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<NodePtr> outs;
  for (int h = 0; h < heads; ++h) {
    NodePtr qh = slice_cols(q, h * dh, (h + 1) * dh);
    NodePtr kh = slice_cols(k, h * dh, (h + 1) * dh);
    NodePtr vh = slice_cols(v, h * dh, (h + 1) * dh);
    NodePtr scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    outs.push_back(matmul(softmax_rows(scores), vh));
  }
  return linear(gp, prefix + ".o", concat_cols(outs));
}

NodePtr maybe_dropout(const NodePtr& x, double rate, std::mt19937_64* rng) {
  if (rate > 0.0 && rng) return dropout(x, rate, *rng);
  return x;
}

// Pre-norm residual block; with the attention output projections and the
// second feed-forward layer zeroed the block is an exact identity.
NodePtr encoder_block(const Model& m, GraphParams& gp, const std::string& prefix, NodePtr x,
                      std::mt19937_64* rng) {
  const double eps = m.cfg.ln_eps;
  NodePtr n1 = layer_norm(x, gp[prefix + ".ln1.g"], gp[prefix + ".ln1.b"], eps);
  x = add(x, maybe_dropout(attention(gp, prefix + ".self", n1, n1, m.cfg.H), m.cfg.dropout, rng));
  NodePtr n2 = layer_norm(x, gp[prefix + ".ln2.g"], gp[prefix + ".ln2.b"], eps);
  NodePtr f = linear(gp, prefix + ".ffn.2", relu(linear(gp, prefix + ".ffn.1", n2)));
  return add(x, maybe_dropout(f, m.cfg.dropout, rng));
}

NodePtr decoder_block(const Model& m, GraphParams& gp, const std::string& prefix, NodePtr x,
                      const NodePtr& memory, std::mt19937_64* rng) {
  const double eps = m.cfg.ln_eps;
  NodePtr n1 = layer_norm(x, gp[prefix + ".ln1.g"], gp[prefix + ".ln1.b"], eps);
  x = add(x, maybe_dropout(attention(gp, prefix + ".self", n1, n1, m.cfg.H), m.cfg.dropout, rng));
  NodePtr n2 = layer_norm(x, gp[prefix + ".ln2.g"], gp[prefix + ".ln2.b"], eps);
  x = add(x, maybe_dropout(attention(gp, prefix + ".cross", n2, memory, m.cfg.H), m.cfg.dropout,
                           rng));
  NodePtr n3 = layer_norm(x, gp[prefix + ".ln3.g"], gp[prefix + ".ln3.b"], eps);
  NodePtr f = linear(gp, prefix + ".ffn.2", relu(linear(gp, prefix + ".ffn.1", n3)));
  return add(x, maybe_dropout(f, m.cfg.dropout, rng));
}

}  // namespace

std::pair<NodePtr, NodePtr> denoise_forward(const Model& m, GraphParams& gp,
                                            const NodePtr& noisy_sampled,
                                            std::mt19937_64* dropout_rng) {
  const int V = m.cfg.visible_count();
  if (noisy_sampled->value.rows != V || noisy_sampled->value.cols != m.cfg.pose_dim())
    throw std::invalid_argument("denoise_forward: input " + noisy_sampled->value.shape_str() +
                                ", expected " + std::to_string(V) + "x" +
                                std::to_string(m.cfg.pose_dim()));
  NodePtr x = add(matmul(noisy_sampled, gp["denoise.embed"]), gp["denoise.pos"]);
  for (int i = 0; i < m.cfg.M; ++i)
    x = encoder_block(m, gp, "denoise.b" + std::to_string(i), x, dropout_rng);
  NodePtr clean = matmul(x, gp["denoise.out"]);
  return {clean, x};
}

NodePtr preliminary_recover(const Model& m, GraphParams& gp, const NodePtr& clean_sampled) {
  const Array2& w = m.params.get("recover.upsample");
  if (clean_sampled->value.rows != w.cols)
    throw std::invalid_argument("preliminary_recover: " + std::to_string(clean_sampled->value.rows) +
                                " rows vs upsample width " + std::to_string(w.cols));
  return matmul(gp["recover.upsample"], clean_sampled);
}

NodePtr recover_forward(const Model& m, GraphParams& gp, const NodePtr& preliminary,
                        const NodePtr& features, std::mt19937_64* dropout_rng) {
  const int L = m.cfg.window_length();
  if (preliminary->value.rows != L || preliminary->value.cols != m.cfg.pose_dim())
    throw std::invalid_argument("recover_forward: preliminary " +
                                preliminary->value.shape_str() + ", expected " +
                                std::to_string(L) + "x" + std::to_string(m.cfg.pose_dim()));
  if (features->value.rows != m.cfg.visible_count() || features->value.cols != m.cfg.C)
    throw std::invalid_argument("recover_forward: features " + features->value.shape_str() +
                                ", expected " + std::to_string(m.cfg.visible_count()) + "x" +
                                std::to_string(m.cfg.C));
  NodePtr tokens = add(conv1d_temporal(preliminary, gp["recover.conv"], m.cfg.kernel_size),
                       gp["recover.pos"]);
  for (int i = 0; i < m.cfg.M; ++i)
    tokens = decoder_block(m, gp, "recover.b" + std::to_string(i), tokens, features, dropout_rng);
  return matmul(tokens, gp["recover.out"]);
}

PipelineOutput run_pipeline(const Model& m, GraphParams& gp, const Array2& noisy_sampled,
                            std::mt19937_64* dropout_rng) {
  PipelineOutput out;
  NodePtr input = make_constant(noisy_sampled);
  auto [clean, feat] = denoise_forward(m, gp, input, dropout_rng);
  out.clean = clean;
  out.features = feat;
  out.preliminary = preliminary_recover(m, gp, clean);
  out.recovered = recover_forward(m, gp, out.preliminary, feat, dropout_rng);
  if (!out.recovered->value.all_finite())
    throw std::runtime_error("run_pipeline: non-finite output");
  return out;
}

RecoveredWindow recover_window(const Model& m, const Array2& noisy_sampled,
                               const std::vector<int>& visible_indices) {
  GraphParams gp(m);
  PipelineOutput out = run_pipeline(m, gp, noisy_sampled);
  RecoveredWindow w;
  w.poses = out.recovered->value;
  w.visible.assign(m.cfg.window_length(), false);
  for (int i : visible_indices) w.visible[i] = true;
  return w;
}

std::uint64_t denoise_flops(const ModelConfig& cfg, int visible_count) {
  const std::uint64_t V = visible_count;
  const std::uint64_t KD = cfg.pose_dim(), C = cfg.C, F = cfg.ffn_dim();
  std::uint64_t total = 2 * V * KD * C;  // input + output projections
  const std::uint64_t per_block = 4 * V * C * C   // q,k,v,o
                                  + 2 * V * V * C  // scores + weighted sum
                                  + 2 * V * C * F  // feed-forward
                                  + 2 * 2 * V * C; // two layer norms
  return total + static_cast<std::uint64_t>(cfg.M) * per_block;
}

std::uint64_t recover_flops(const ModelConfig& cfg, int window_length, int visible_count) {
  const std::uint64_t L = window_length, V = visible_count;
  const std::uint64_t KD = cfg.pose_dim(), C = cfg.C, F = cfg.ffn_dim();
  const std::uint64_t ks = cfg.kernel_size;
  std::uint64_t total = L * V * KD          // upsampling
                        + L * ks * KD * C   // conv tokens
                        + L * C * KD;       // output projection
  const std::uint64_t per_block = 4 * L * C * C + 2 * L * L * C   // self-attention
                                  + 2 * L * C * C + 2 * V * C * C // cross q,o / k,v
                                  + 2 * L * V * C                 // cross scores + sum
                                  + 2 * L * C * F                 // feed-forward
                                  + 3 * 2 * L * C;                // three layer norms
  return total + static_cast<std::uint64_t>(cfg.M) * per_block;
}

namespace {
std::size_t count_prefix(const Model& m, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& name : m.params.names())
    if (name.rfind(prefix, 0) == 0) n += m.params.get(name).size();
  return n;
}
}  // namespace

std::size_t denoise_param_count(const Model& m) { return count_prefix(m, "denoise."); }
std::size_t recover_param_count(const Model& m) { return count_prefix(m, "recover."); }

}  // namespace deciwatch
