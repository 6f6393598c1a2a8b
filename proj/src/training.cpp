#include "deciwatch/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace deciwatch {

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

NodePtr loss_node(const NodePtr& recovered, const NodePtr& clean_sampled, const Array2& gt_window,
                  const Array2& gt_sampled, double lambda_weight, LossParts* parts) {
  if (lambda_weight < 0.0) throw std::invalid_argument("loss: lambda must be >= 0");
  NodePtr l_rec = l1_mean(recovered, gt_window);
  NodePtr l_den = l1_mean(clean_sampled, gt_sampled);
  NodePtr total = add(scale(l_rec, lambda_weight), l_den);
  if (parts) {
    parts->recover = l_rec->value.at(0, 0);
    parts->denoise = l_den->value.at(0, 0);
    parts->total = total->value.at(0, 0);
  }
  return total;
}

namespace {

class Optimizer {
 public:
  Optimizer(Model& model, const TrainConfig& cfg) : model_(&model), cfg_(&cfg) {
    if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
      throw std::invalid_argument("unknown optimizer: " + cfg.optimizer);
  }

  void step(const std::unordered_map<std::string, NodePtr>& leaves, double lr) {
    ++t_;
    for (const auto& name : model_->params.names()) {
      if (model_->is_frozen(name)) continue;
      auto it = leaves.find(name);
      if (it == leaves.end()) continue;
      const Array2& g = it->second->grad;
      Array2& p = model_->params.get(name);
      if (cfg_->optimizer == "sgd") {
        for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * g.data[i];
        continue;
      }
      auto& m = m_[name];
      auto& v = v_[name];
      if (m.data.empty()) {
        m = Array2(p.rows, p.cols);
        v = Array2(p.rows, p.cols);
      }
      const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
      const double bc1 = 1.0 - std::pow(b1, t_);
      const double bc2 = 1.0 - std::pow(b2, t_);
      for (std::size_t i = 0; i < p.data.size(); ++i) {
        m.data[i] = b1 * m.data[i] + (1.0 - b1) * g.data[i];
        v.data[i] = b2 * v.data[i] + (1.0 - b2) * g.data[i] * g.data[i];
        p.data[i] -= lr * (m.data[i] / bc1) / (std::sqrt(v.data[i] / bc2) + eps);
      }
    }
  }

 private:
  Model* model_;
  const TrainConfig* cfg_;
  std::unordered_map<std::string, Array2> m_, v_;
  int t_ = 0;
};

}  // namespace

TrainResult train(const std::vector<WindowSample>& data, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.lambda_weight <= 0.0) throw std::invalid_argument("train: lambda must be > 0");
  cfg.model.validate();

  TrainResult res;
  res.model = init_model(cfg.model, cfg.seed);
  Model& model = res.model;
  Optimizer opt(model, cfg);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x5bf03635u);
  Model last_good = model;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // step decay: halve the rate at each third of the schedule
    const double lr = cfg.lr * std::pow(0.5, (3 * epoch) / std::max(1, cfg.epochs));

    GraphParams gp(model);
    NodePtr total;
    LossParts parts_sum;
    for (const auto& w : data) {
      PipelineOutput out = run_pipeline(model, gp, w.noisy_sampled,
                                        cfg.model.dropout > 0.0 ? &dropout_rng : nullptr);
      LossParts parts;
      NodePtr l = loss_node(out.recovered, out.clean, w.gt_window, w.gt_sampled,
                            cfg.lambda_weight, &parts);
      parts_sum.total += parts.total;
      parts_sum.recover += parts.recover;
      parts_sum.denoise += parts.denoise;
      total = total ? add(total, l) : l;
    }
    total = scale(total, 1.0 / data.size());
    const double inv = 1.0 / data.size();
    parts_sum.total *= inv;
    parts_sum.recover *= inv;
    parts_sum.denoise *= inv;

    if (!std::isfinite(parts_sum.total)) {
      res.model = last_good;
      res.diverged = true;
      return res;
    }
    last_good = model;

    backward(total);
    opt.step(gp.leaves(), lr);
    ++res.steps;
    res.log.push_back({epoch, res.steps, parts_sum});
  }
  return res;
}

RecoveredWindow label_mode(const Model& m, const Array2& gt_sampled,
                           const std::vector<int>& visible_indices) {
  return recover_window(m, gt_sampled, visible_indices);
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << "DWCKPTv1\n";
  const ModelConfig& mc = c.cfg.model;
  out << "K=" << mc.K << "\nD=" << mc.D << "\nN=" << mc.N << "\nQ=" << mc.Q << "\nC=" << mc.C
      << "\nM=" << mc.M << "\nH=" << mc.H << "\nkernel=" << mc.kernel_size
      << "\nffn_mult=" << mc.ffn_mult << "\ndropout=" << fmt17(mc.dropout)
      << "\nln_eps=" << fmt17(mc.ln_eps) << "\nsinusoidal=" << (mc.sinusoidal_pos ? 1 : 0)
      << "\nvisible=" << mc.visible << "\nlambda=" << fmt17(c.cfg.lambda_weight)
      << "\nlr=" << fmt17(c.cfg.lr) << "\noptimizer=" << c.cfg.optimizer
      << "\nepochs=" << c.cfg.epochs << "\nseed=" << c.cfg.seed
      << "\nstrategy=" << strategy_name(c.cfg.strategy) << "\nsteps=" << c.steps << "\n";
  if (!c.rng_state.empty()) out << "rng=" << c.rng_state << "\n";
  for (const auto& name : c.model.params.names()) {
    const Array2& a = c.model.params.get(name);
    out << "PARAM " << name << " " << a.rows << " " << a.cols << "\n";
    for (int i = 0; i < a.rows; ++i) {
      for (int j = 0; j < a.cols; ++j) {
        if (j) out << " ";
        out << fmt17(a.at(i, j));
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "DWCKPTv1")
    throw std::runtime_error(path + ": bad checkpoint magic");
  Checkpoint c;
  ModelConfig& mc = c.cfg.model;
  std::streampos mark = in.tellg();
  while (std::getline(in, line)) {
    if (line.rfind("PARAM ", 0) == 0) {
      in.seekg(mark);
      break;
    }
    mark = in.tellg();
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error(path + ": bad config line " + line);
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "K") mc.K = std::stoi(val);
    else if (key == "D") mc.D = std::stoi(val);
    else if (key == "N") mc.N = std::stoi(val);
    else if (key == "Q") mc.Q = std::stoi(val);
    else if (key == "C") mc.C = std::stoi(val);
    else if (key == "M") mc.M = std::stoi(val);
    else if (key == "H") mc.H = std::stoi(val);
    else if (key == "kernel") mc.kernel_size = std::stoi(val);
    else if (key == "ffn_mult") mc.ffn_mult = std::stoi(val);
    else if (key == "dropout") mc.dropout = std::stod(val);
    else if (key == "ln_eps") mc.ln_eps = std::stod(val);
    else if (key == "sinusoidal") mc.sinusoidal_pos = val == "1";
    else if (key == "visible") mc.visible = std::stoi(val);
    else if (key == "lambda") c.cfg.lambda_weight = std::stod(val);
    else if (key == "lr") c.cfg.lr = std::stod(val);
    else if (key == "optimizer") c.cfg.optimizer = val;
    else if (key == "epochs") c.cfg.epochs = std::stoi(val);
    else if (key == "seed") c.cfg.seed = std::stoull(val);
    else if (key == "strategy") c.cfg.strategy = parse_strategy(val);
    else if (key == "steps") c.steps = std::stoi(val);
    else if (key == "rng") c.rng_state = val;
    else throw std::runtime_error(path + ": unknown checkpoint key " + key);
  }
  c.model = init_model(mc, c.cfg.seed);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream hs(line);
    std::string tag, name;
    int rows, cols;
    if (!(hs >> tag >> name >> rows >> cols) || tag != "PARAM")
      throw std::runtime_error(path + ": bad parameter header " + line);
    Array2& a = c.model.params.get(name);
    if (a.rows != rows || a.cols != cols)
      throw std::runtime_error(path + ": parameter " + name + " shape " + std::to_string(rows) +
                               "x" + std::to_string(cols) + " does not match config " +
                               a.shape_str());
    for (int i = 0; i < rows; ++i) {
      if (!std::getline(in, line))
        throw std::runtime_error(path + ": truncated parameter " + name);
      std::istringstream ls(line);
      for (int j = 0; j < cols; ++j)
        if (!(ls >> a.at(i, j)))
          throw std::runtime_error(path + ": parameter " + name + " row " + std::to_string(i) +
                                   " is short");
    }
    if (!a.all_finite()) throw std::runtime_error(path + ": non-finite values in " + name);
  }
  return c;
}

void write_loss_csv(const std::vector<LossRow>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss log: " + path);
  out << "epoch,step,loss_total,loss_recover,loss_denoise\n";
  for (const auto& r : log)
    out << r.epoch << "," << r.step << "," << fmt17(r.loss.total) << "," << fmt17(r.loss.recover)
        << "," << fmt17(r.loss.denoise) << "\n";
}

}  // namespace deciwatch
