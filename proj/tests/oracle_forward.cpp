#include "oracle_forward.hpp"

#include <cmath>
#include <vector>

namespace deciwatch::testing {

namespace {

Array2 mm(const Array2& a, const Array2& b) {
  Array2 out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k)
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += a.at(i, k) * b.at(k, j);
  return out;
}

Array2 plus(const Array2& a, const Array2& b) {
  Array2 out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Array2 lin(const ParamStore& ps, const std::string& name, const Array2& x) {
  Array2 out = mm(x, ps.get(name + ".w"));
  const Array2& b = ps.get(name + ".b");
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += b.at(0, j);
  return out;
}

Array2 lnorm(const Array2& x, const Array2& g, const Array2& b, double eps) {
  Array2 out(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < x.cols; ++j) mu += x.at(i, j);
    mu /= x.cols;
    double var = 0.0;
    for (int j = 0; j < x.cols; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    var /= x.cols;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < x.cols; ++j)
      out.at(i, j) = (x.at(i, j) - mu) * inv * g.at(0, j) + b.at(0, j);
  }
  return out;
}

Array2 attn(const ParamStore& ps, const std::string& prefix, const Array2& q_in,
            const Array2& kv_in, int heads) {
  Array2 q = lin(ps, prefix + ".q", q_in);
  Array2 k = lin(ps, prefix + ".k", kv_in);
  Array2 v = lin(ps, prefix + ".v", kv_in);
  const int C = q.cols;
  const int dh = C / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Array2 ctx(q.rows, C);
  for (int h = 0; h < heads; ++h) {
    for (int i = 0; i < q.rows; ++i) {
      std::vector<double> scores(k.rows);
      double mx = -1e300;
      for (int r = 0; r < k.rows; ++r) {
        double s = 0.0;
        for (int d = 0; d < dh; ++d) s += q.at(i, h * dh + d) * k.at(r, h * dh + d);
        scores[r] = s * inv_sqrt;
        mx = std::max(mx, scores[r]);
      }
      double z = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        z += s;
      }
      for (int r = 0; r < k.rows; ++r)
        for (int d = 0; d < dh; ++d) ctx.at(i, h * dh + d) += scores[r] / z * v.at(r, h * dh + d);
    }
  }
  return lin(ps, prefix + ".o", ctx);
}

Array2 ffn(const ParamStore& ps, const std::string& prefix, const Array2& x) {
  Array2 h = lin(ps, prefix + ".ffn.1", x);
  for (double& v : h.data) v = std::max(0.0, v);
  return lin(ps, prefix + ".ffn.2", h);
}

}  // namespace

OracleOutput oracle_pipeline(const Model& m, const Array2& noisy_sampled) {
  const ParamStore& ps = m.params;
  const ModelConfig& cfg = m.cfg;
  OracleOutput out;

  Array2 x = plus(mm(noisy_sampled, ps.get("denoise.embed")), ps.get("denoise.pos"));
  for (int i = 0; i < cfg.M; ++i) {
    const std::string p = "denoise.b" + std::to_string(i);
    Array2 n1 = lnorm(x, ps.get(p + ".ln1.g"), ps.get(p + ".ln1.b"), cfg.ln_eps);
    x = plus(x, attn(ps, p + ".self", n1, n1, cfg.H));
    Array2 n2 = lnorm(x, ps.get(p + ".ln2.g"), ps.get(p + ".ln2.b"), cfg.ln_eps);
    x = plus(x, ffn(ps, p, n2));
  }
  out.features = x;
  out.clean = mm(x, ps.get("denoise.out"));

  out.preliminary = mm(ps.get("recover.upsample"), out.clean);

  // conv tokens with zero padding
  const Array2& kern = ps.get("recover.conv");
  const int L = cfg.window_length();
  const int KD = cfg.pose_dim();
  const int ctr = cfg.kernel_size / 2;
  Array2 tok(L, cfg.C);
  for (int t = 0; t < L; ++t)
    for (int o = 0; o < cfg.kernel_size; ++o) {
      const int src = t + o - ctr;
      if (src < 0 || src >= L) continue;
      for (int i = 0; i < KD; ++i)
        for (int j = 0; j < cfg.C; ++j)
          tok.at(t, j) += out.preliminary.at(src, i) * kern.at(o * KD + i, j);
    }
  tok = plus(tok, ps.get("recover.pos"));

  for (int i = 0; i < cfg.M; ++i) {
    const std::string p = "recover.b" + std::to_string(i);
    Array2 n1 = lnorm(tok, ps.get(p + ".ln1.g"), ps.get(p + ".ln1.b"), cfg.ln_eps);
    tok = plus(tok, attn(ps, p + ".self", n1, n1, cfg.H));
    Array2 n2 = lnorm(tok, ps.get(p + ".ln2.g"), ps.get(p + ".ln2.b"), cfg.ln_eps);
    tok = plus(tok, attn(ps, p + ".cross", n2, out.features, cfg.H));
    Array2 n3 = lnorm(tok, ps.get(p + ".ln3.g"), ps.get(p + ".ln3.b"), cfg.ln_eps);
    tok = plus(tok, ffn(ps, p, n3));
  }
  out.recovered = mm(tok, ps.get("recover.out"));
  return out;
}

double central_difference(Model& m, const std::string& param, int index,
                          const std::function<double(const Model&)>& scalar_fn, double h) {
  double& v = m.params.get(param).data[index];
  const double saved = v;
  v = saved + h;
  const double hi = scalar_fn(m);
  v = saved - h;
  const double lo = scalar_fn(m);
  v = saved;
  return (hi - lo) / (2.0 * h);
}

}  // namespace deciwatch::testing
