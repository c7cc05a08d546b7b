#pragma once

// Template definitions for model.h.

#include <algorithm>
#include <limits>

namespace fnmt {

namespace detail {

template <typename T>
Vec<T> sigmoid(const Vec<T>& z) {
  return (T(1) + (-z.array()).exp()).inverse().matrix();
}

template <typename T>
Vec<T> log_softmax(const Vec<T>& logits) {
  const T mx = logits.maxCoeff();
  const T lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

template <typename T>
Vec<T> softmax(const Vec<T>& logits) {
  return log_softmax(logits).array().exp().matrix();
}

template <typename T>
void fill_uniform(Mat<T>& m, std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
}

template <typename T>
void fill_uniform(Vec<T>& v, std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<T>(dist(rng));
}

template <typename T>
LstmWeights<T> lstm_zeros(Eigen::Index in, Eigen::Index hidden) {
  return {Mat<T>::Zero(4 * hidden, in), Mat<T>::Zero(4 * hidden, hidden), Vec<T>::Zero(4 * hidden)};
}

template <typename T>
struct LstmCache {
  Vec<T> x, h_prev, c_prev, i, f, g, o, c, tanh_c, h;
};

template <typename T>
LstmCache<T> lstm_forward(const LstmWeights<T>& w, const Vec<T>& x, const Vec<T>& h_prev,
                          const Vec<T>& c_prev) {
  const Eigen::Index H = h_prev.size();
  const Vec<T> z = w.input * x + w.recurrent * h_prev + w.bias;
  LstmCache<T> s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.i = sigmoid<T>(z.segment(0, H));
  s.f = sigmoid<T>(z.segment(H, H));
  s.g = z.segment(2 * H, H).array().tanh().matrix();
  s.o = sigmoid<T>(z.segment(3 * H, H));
  s.c = (s.f.array() * c_prev.array() + s.i.array() * s.g.array()).matrix();
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = (s.o.array() * s.tanh_c.array()).matrix();
  return s;
}

// Accumulates weight gradients into `gw` and returns input/state gradients.
template <typename T>
void lstm_backward(const LstmWeights<T>& w, const LstmCache<T>& s, const Vec<T>& dh,
                   const Vec<T>& dc_in, LstmWeights<T>& gw, Vec<T>& dx, Vec<T>& dh_prev,
                   Vec<T>& dc_prev) {
  const Eigen::Index H = s.h.size();
  const Vec<T> d_o = (dh.array() * s.tanh_c.array()).matrix();
  const Vec<T> dc =
      (dc_in.array() + dh.array() * s.o.array() * (T(1) - s.tanh_c.array().square())).matrix();
  Vec<T> dz(4 * H);
  dz.segment(0, H) = (dc.array() * s.g.array() * s.i.array() * (T(1) - s.i.array())).matrix();
  dz.segment(H, H) = (dc.array() * s.c_prev.array() * s.f.array() * (T(1) - s.f.array())).matrix();
  dz.segment(2 * H, H) = (dc.array() * s.i.array() * (T(1) - s.g.array().square())).matrix();
  dz.segment(3 * H, H) = (d_o.array() * s.o.array() * (T(1) - s.o.array())).matrix();
  gw.input.noalias() += dz * s.x.transpose();
  gw.recurrent.noalias() += dz * s.h_prev.transpose();
  gw.bias += dz;
  dx = w.input.transpose() * dz;
  dh_prev = w.recurrent.transpose() * dz;
  dc_prev = (dc.array() * s.f.array()).matrix();
}

template <typename T>
struct EncoderCache {
  // [layer][position]
  std::vector<std::vector<LstmCache<T>>> fwd, bwd;
};

template <typename T>
Mat<T> run_encoder(const ModelConfig& cfg, const ModelParams<T>& p, std::span<const int> source,
                   EncoderCache<T>* cache) {
  const auto J = static_cast<Eigen::Index>(source.size());
  const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
  Mat<T> input(static_cast<Eigen::Index>(cfg.embedding_dim), J);
  for (Eigen::Index j = 0; j < J; ++j) input.col(j) = p.source_embedding.row(source[j]).transpose();

  if (cache) {
    cache->fwd.assign(cfg.encoder_layers, {});
    cache->bwd.assign(cfg.encoder_layers, {});
  }
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    Mat<T> out(2 * H, J);
    std::vector<LstmCache<T>> fwd(static_cast<std::size_t>(J)), bwd(static_cast<std::size_t>(J));
    Vec<T> h = Vec<T>::Zero(H), c = Vec<T>::Zero(H);
    for (Eigen::Index j = 0; j < J; ++j) {
      auto& s = fwd[static_cast<std::size_t>(j)];
      s = lstm_forward(p.encoder_fwd[l], Vec<T>(input.col(j)), h, c);
      h = s.h;
      c = s.c;
      out.col(j).head(H) = h;
    }
    h.setZero();
    c.setZero();
    for (Eigen::Index j = J - 1; j >= 0; --j) {
      auto& s = bwd[static_cast<std::size_t>(j)];
      s = lstm_forward(p.encoder_bwd[l], Vec<T>(input.col(j)), h, c);
      h = s.h;
      c = s.c;
      out.col(j).tail(H) = h;
    }
    if (cache) {
      cache->fwd[l] = std::move(fwd);
      cache->bwd[l] = std::move(bwd);
    }
    input = std::move(out);
  }
  return input;
}

}  // namespace detail

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig& cfg) {
  const auto E = static_cast<Eigen::Index>(cfg.embedding_dim);
  const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto A = static_cast<Eigen::Index>(cfg.annotation_dim());
  const auto Vs = static_cast<Eigen::Index>(cfg.source_vocab);
  const auto V1 = static_cast<Eigen::Index>(cfg.target_vocab);
  const auto V2 = static_cast<Eigen::Index>(cfg.factor_vocab);
  ModelParams p;
  p.source_embedding = Mat<T>::Zero(Vs, E);
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    const Eigen::Index in = l == 0 ? E : A;
    p.encoder_fwd.push_back(detail::lstm_zeros<T>(in, H));
    p.encoder_bwd.push_back(detail::lstm_zeros<T>(in, H));
  }
  p.init_weight = Mat<T>::Zero(H, A);
  p.init_bias = Vec<T>::Zero(H);
  p.att_state = Mat<T>::Zero(H, H);
  p.att_annotation = Mat<T>::Zero(H, A);
  p.att_bias = Vec<T>::Zero(H);
  p.att_score = Vec<T>::Zero(H);
  p.att_coverage = Vec<T>::Zero(H);
  p.decoder = detail::lstm_zeros<T>(2 * E + A, H);
  p.readout_weight = Mat<T>::Zero(E, H + A);
  p.readout_bias = Vec<T>::Zero(E);
  p.output1 = Mat<T>::Zero(V1, E);
  p.output2 = Mat<T>::Zero(V2, 2 * E);
  p.embedding1 = Mat<T>::Zero(V1, E);
  p.embedding2 = Mat<T>::Zero(V2, E);
  return p;
}

template <typename T>
ModelParams<T> ModelParams<T>::random(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelParams p = zeros(cfg);
  std::mt19937_64 rng(seed);
  const double emb_bound = 1.0 / std::sqrt(static_cast<double>(cfg.embedding_dim));
  p.visit([&](const std::string& name, auto& t) {
    const bool embedding = name == "source_embedding" || name == "embedding1" || name == "embedding2";
    detail::fill_uniform(t, rng, embedding ? emb_bound : 0.08);
  });
  const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
  auto forget_bias = [H](LstmWeights<T>& w) { w.bias.segment(H, H).setConstant(T(1)); };
  for (auto& w : p.encoder_fwd) forget_bias(w);
  for (auto& w : p.encoder_bwd) forget_bias(w);
  forget_bias(p.decoder);
  return p;
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  out.source_embedding = source_embedding.template cast<U>();
  for (const auto& w : encoder_fwd)
    out.encoder_fwd.push_back({w.input.template cast<U>(), w.recurrent.template cast<U>(), w.bias.template cast<U>()});
  for (const auto& w : encoder_bwd)
    out.encoder_bwd.push_back({w.input.template cast<U>(), w.recurrent.template cast<U>(), w.bias.template cast<U>()});
  out.init_weight = init_weight.template cast<U>();
  out.init_bias = init_bias.template cast<U>();
  out.att_state = att_state.template cast<U>();
  out.att_annotation = att_annotation.template cast<U>();
  out.att_bias = att_bias.template cast<U>();
  out.att_score = att_score.template cast<U>();
  out.att_coverage = att_coverage.template cast<U>();
  out.decoder = {decoder.input.template cast<U>(), decoder.recurrent.template cast<U>(), decoder.bias.template cast<U>()};
  out.readout_weight = readout_weight.template cast<U>();
  out.readout_bias = readout_bias.template cast<U>();
  out.output1 = output1.template cast<U>();
  out.output2 = output2.template cast<U>();
  out.embedding1 = embedding1.template cast<U>();
  out.embedding2 = embedding2.template cast<U>();
  return out;
}

template <typename T>
Model<T>::Model(ModelConfig config, ModelParams<T> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const auto expected = ModelParams<T>::zeros(config_);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  expected.visit([&](const std::string&, const auto& t) { shapes.emplace_back(t.rows(), t.cols()); });
  std::size_t k = 0;
  bool ok = params_.encoder_fwd.size() == config_.encoder_layers &&
            params_.encoder_bwd.size() == config_.encoder_layers;
  if (ok) {
    params_.visit([&](const std::string&, const auto& t) {
      if (k >= shapes.size() || shapes[k] != std::make_pair(t.rows(), t.cols())) ok = false;
      ++k;
    });
  }
  if (!ok || k != shapes.size()) throw InvalidInput("parameter shapes do not match the model config");
}

template <typename T>
void Model<T>::check_y1(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= config_.target_vocab)
    throw InvalidInput("first-factor id " + std::to_string(id) + " out of range");
}

template <typename T>
void Model<T>::check_y2(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= config_.factor_vocab)
    throw InvalidInput("second-factor id " + std::to_string(id) + " out of range");
}

template <typename T>
typename Model<T>::Encoded Model<T>::encode(std::span<const int> source) const {
  if (source.empty()) throw InvalidInput("cannot encode an empty source sentence");
  for (int id : source)
    if (id < 0 || static_cast<std::size_t>(id) >= config_.source_vocab)
      throw InvalidInput("source id " + std::to_string(id) + " out of range");
  Encoded enc;
  enc.annotations = detail::run_encoder<T>(config_, params_, source, nullptr);
  enc.projected = (params_.att_annotation * enc.annotations).colwise() + params_.att_bias;
  enc.mean = enc.annotations.rowwise().mean();
  return enc;
}

template <typename T>
typename Model<T>::Attention Model<T>::attend(const Vec<T>& prev_state, const Encoded& enc,
                                              const Vec<T>& coverage) const {
  Mat<T> pre = enc.projected.colwise() + params_.att_state * prev_state;
  if (config_.coverage) pre.noalias() += params_.att_coverage * coverage.transpose();
  const Vec<T> energy = pre.array().tanh().matrix().transpose() * params_.att_score;
  Attention a;
  a.weights = detail::softmax<T>(energy);
  a.context = enc.annotations * a.weights;
  return a;
}

template <typename T>
typename Model<T>::DecoderState Model<T>::initial_state(const Encoded& enc) const {
  DecoderState s;
  s.h = (params_.init_weight * enc.mean + params_.init_bias).array().tanh().matrix();
  s.c = Vec<T>::Zero(static_cast<Eigen::Index>(config_.hidden_dim));
  s.coverage = Vec<T>::Zero(enc.annotations.cols());
  return s;
}

template <typename T>
std::pair<typename Model<T>::DecoderState, Vec<T>> Model<T>::decoder_step(
    const DecoderState& prev, int y1_prev, int y2_prev, const Vec<T>& context) const {
  check_y1(y1_prev);
  if (y2_prev != kNoFactor) check_y2(y2_prev);
  const auto E = static_cast<Eigen::Index>(config_.embedding_dim);
  const auto H = static_cast<Eigen::Index>(config_.hidden_dim);
  Vec<T> x(2 * E + context.size());
  x.head(E) = params_.embedding1.row(y1_prev).transpose();
  if (y2_prev == kNoFactor) x.segment(E, E).setZero();
  else x.segment(E, E) = params_.embedding2.row(y2_prev).transpose();
  x.tail(context.size()) = context;
  const auto cell = detail::lstm_forward(params_.decoder, x, prev.h, prev.c);
  DecoderState next{cell.h, cell.c, prev.coverage};
  Vec<T> in(H + context.size());
  in << cell.h, context;
  Vec<T> readout = (params_.readout_weight * in + params_.readout_bias).array().tanh().matrix();
  return {std::move(next), std::move(readout)};
}

template <typename T>
typename Model<T>::Step Model<T>::advance(const Encoded& enc, const DecoderState& prev,
                                          int y1_prev, int y2_prev) const {
  auto att = attend(prev.h, enc, prev.coverage);
  auto [state, readout] = decoder_step(prev, y1_prev, y2_prev, att.context);
  state.coverage += att.weights;
  return {std::move(state), std::move(readout), std::move(att.weights)};
}

template <typename T>
Vec<T> Model<T>::log_factor1(const Vec<T>& readout) const {
  return detail::log_softmax<T>(params_.output1 * readout);
}

template <typename T>
Vec<T> Model<T>::log_factor2(const Vec<T>& readout, int y1) const {
  check_y1(y1);
  Vec<T> z(readout.size() + params_.embedding1.cols());
  z << readout, params_.embedding1.row(y1).transpose();
  return detail::log_softmax<T>(params_.output2 * z);
}

template <typename T>
Vec<T> Model<T>::output_factor1(const Vec<T>& readout) const {
  return log_factor1(readout).array().exp().matrix();
}

template <typename T>
Vec<T> Model<T>::output_factor2(const Vec<T>& readout, int y1) const {
  return log_factor2(readout, y1).array().exp().matrix();
}

namespace detail {

template <typename T>
struct DecoderCache {
  int y1_prev, y2_prev, y1, y2;
  T weight;
  Vec<T> query;      // s' fed to attention
  Vec<T> coverage;   // coverage before this step
  Mat<T> att_tanh;   // H x J
  Vec<T> alpha, context;
  LstmCache<T> cell;
  Vec<T> readout_in, readout, drop_scale, dropped, z2, p1, p2;
};

inline void validate_example(const ModelConfig& cfg, const Example& ex) {
  if (ex.y1.size() != ex.y2.size())
    throw InvalidInput("factor streams differ in length (" + std::to_string(ex.y1.size()) + " vs " +
                       std::to_string(ex.y2.size()) + ")");
  if (!ex.mask.empty() && ex.mask.size() != ex.y1.size())
    throw InvalidInput("mask length does not match the target length");
  if (ex.source.empty() || ex.y1.empty()) throw InvalidInput("empty source or target in batch");
  for (int id : ex.source)
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.source_vocab) throw InvalidInput("source id out of range");
  for (std::size_t i = 0; i < ex.y1.size(); ++i) {
    if (ex.y1[i] < 0 || static_cast<std::size_t>(ex.y1[i]) >= cfg.target_vocab)
      throw InvalidInput("first-factor id out of range");
    if (ex.y2[i] < 0 || static_cast<std::size_t>(ex.y2[i]) >= cfg.factor_vocab)
      throw InvalidInput("second-factor id out of range");
  }
}

template <typename T>
T smoothed_ce(const Vec<T>& logp, int label, double eps) {
  const T hit = -logp[label];
  if (eps == 0.0) return hit;
  const T uniform = -logp.mean();
  return static_cast<T>(1.0 - eps) * hit + static_cast<T>(eps) * uniform;
}

// d CE / d logits for softmax probabilities p.
template <typename T>
Vec<T> smoothed_ce_grad(const Vec<T>& p, int label, double eps) {
  Vec<T> g = p;
  g.array() -= static_cast<T>(eps / static_cast<double>(p.size()));
  g[label] -= static_cast<T>(1.0 - eps);
  return g;
}

// Forward (and optionally backward) pass over one sentence. Returns the
// weighted loss sum; `norm` is the batch weight total the gradients divide by.
template <typename T>
T sentence_pass(const ModelConfig& cfg, const ModelParams<T>& p, const Example& ex,
                const LossOptions& opt, std::mt19937_64* rng, ModelParams<T>* grads, T norm) {
  const auto E = static_cast<Eigen::Index>(cfg.embedding_dim);
  const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto J = static_cast<Eigen::Index>(ex.source.size());
  const double eps = opt.label_smoothing;
  const T w2 = static_cast<T>(opt.factor2_weight);

  EncoderCache<T> enc_cache;
  const Mat<T> ann = run_encoder<T>(cfg, p, ex.source, grads ? &enc_cache : nullptr);
  const Mat<T> projected = (p.att_annotation * ann).colwise() + p.att_bias;
  const Vec<T> mean = ann.rowwise().mean();
  const Vec<T> s0 = (p.init_weight * mean + p.init_bias).array().tanh().matrix();

  std::vector<DecoderCache<T>> steps(ex.y1.size());
  Vec<T> h = s0, c = Vec<T>::Zero(H), cov = Vec<T>::Zero(J);
  T total = 0;
  for (std::size_t i = 0; i < ex.y1.size(); ++i) {
    auto& st = steps[i];
    st.y1_prev = i == 0 ? kBosId : ex.y1[i - 1];
    st.y2_prev = i == 0 ? kNoFactor : ex.y2[i - 1];
    st.y1 = ex.y1[i];
    st.y2 = ex.y2[i];
    st.weight = ex.mask.empty() || ex.mask[i] ? T(1) : T(0);

    st.query = h;
    st.coverage = cov;
    Mat<T> pre = projected.colwise() + p.att_state * h;
    if (cfg.coverage) pre.noalias() += p.att_coverage * cov.transpose();
    st.att_tanh = pre.array().tanh().matrix();
    st.alpha = softmax<T>(Vec<T>(st.att_tanh.transpose() * p.att_score));
    st.context = ann * st.alpha;

    Vec<T> x(2 * E + 2 * H);
    x.head(E) = p.embedding1.row(st.y1_prev).transpose();
    if (st.y2_prev == kNoFactor) x.segment(E, E).setZero();
    else x.segment(E, E) = p.embedding2.row(st.y2_prev).transpose();
    x.tail(2 * H) = st.context;
    st.cell = lstm_forward(p.decoder, x, h, c);
    h = st.cell.h;
    c = st.cell.c;
    cov += st.alpha;

    st.readout_in.resize(3 * H);
    st.readout_in << h, st.context;
    st.readout = (p.readout_weight * st.readout_in + p.readout_bias).array().tanh().matrix();
    st.drop_scale = Vec<T>::Ones(E);
    if (rng && cfg.dropout > 0) {
      std::bernoulli_distribution keep(1.0 - cfg.dropout);
      const T scale = static_cast<T>(1.0 / (1.0 - cfg.dropout));
      for (Eigen::Index k = 0; k < E; ++k) st.drop_scale[k] = keep(*rng) ? scale : T(0);
    }
    st.dropped = (st.readout.array() * st.drop_scale.array()).matrix();

    const Vec<T> lp1 = log_softmax<T>(Vec<T>(p.output1 * st.dropped));
    st.z2.resize(2 * E);
    st.z2 << st.dropped, p.embedding1.row(st.y1).transpose();
    const Vec<T> lp2 = log_softmax<T>(Vec<T>(p.output2 * st.z2));
    st.p1 = lp1.array().exp().matrix();
    st.p2 = lp2.array().exp().matrix();
    total += st.weight * (smoothed_ce(lp1, st.y1, eps) + w2 * smoothed_ce(lp2, st.y2, eps));
  }
  if (!grads) return total;

  auto& g = *grads;
  Mat<T> dann = Mat<T>::Zero(ann.rows(), J);
  Vec<T> dh_next = Vec<T>::Zero(H), dc_next = Vec<T>::Zero(H), dcov_future = Vec<T>::Zero(J);
  for (std::size_t ii = steps.size(); ii-- > 0;) {
    const auto& st = steps[ii];
    const T scale = st.weight / norm;
    Vec<T> dt_drop = Vec<T>::Zero(E);
    if (scale != T(0)) {
      const Vec<T> dl1 = scale * smoothed_ce_grad(st.p1, st.y1, eps);
      const Vec<T> dl2 = (scale * w2) * smoothed_ce_grad(st.p2, st.y2, eps);
      g.output1.noalias() += dl1 * st.dropped.transpose();
      dt_drop.noalias() += p.output1.transpose() * dl1;
      g.output2.noalias() += dl2 * st.z2.transpose();
      const Vec<T> dz2 = p.output2.transpose() * dl2;
      dt_drop += dz2.head(E);
      g.embedding1.row(st.y1) += dz2.tail(E).transpose();
    }
    const Vec<T> dt = (dt_drop.array() * st.drop_scale.array()).matrix();
    const Vec<T> dpre_t = (dt.array() * (T(1) - st.readout.array().square())).matrix();
    g.readout_weight.noalias() += dpre_t * st.readout_in.transpose();
    g.readout_bias += dpre_t;
    const Vec<T> dro_in = p.readout_weight.transpose() * dpre_t;
    Vec<T> dh = dro_in.head(H) + dh_next;
    Vec<T> dctx = dro_in.tail(2 * H);

    Vec<T> dx, dh_prev, dc_prev;
    lstm_backward(p.decoder, st.cell, dh, dc_next, g.decoder, dx, dh_prev, dc_prev);
    g.embedding1.row(st.y1_prev) += dx.head(E).transpose();
    if (st.y2_prev != kNoFactor) g.embedding2.row(st.y2_prev) += dx.segment(E, E).transpose();
    dctx += dx.tail(2 * H);

    // attention
    Vec<T> dalpha = ann.transpose() * dctx;
    if (cfg.coverage) dalpha += dcov_future;
    dann.noalias() += dctx * st.alpha.transpose();
    const T dot = st.alpha.dot(dalpha);
    const Vec<T> de = (st.alpha.array() * (dalpha.array() - dot)).matrix();
    g.att_score.noalias() += st.att_tanh * de;
    const Mat<T> dpre =
        ((p.att_score * de.transpose()).array() * (T(1) - st.att_tanh.array().square())).matrix();
    const Vec<T> dpre_sum = dpre.rowwise().sum();
    g.att_state.noalias() += dpre_sum * st.query.transpose();
    dh_prev.noalias() += p.att_state.transpose() * dpre_sum;
    g.att_annotation.noalias() += dpre * ann.transpose();
    g.att_bias += dpre_sum;
    dann.noalias() += p.att_annotation.transpose() * dpre;
    if (cfg.coverage) {
      g.att_coverage.noalias() += dpre * st.coverage;
      dcov_future.noalias() += dpre.transpose() * p.att_coverage;
    }
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }

  // initial state
  const Vec<T> dpre_s0 = (dh_next.array() * (T(1) - s0.array().square())).matrix();
  g.init_weight.noalias() += dpre_s0 * mean.transpose();
  g.init_bias += dpre_s0;
  const Vec<T> dmean = p.init_weight.transpose() * dpre_s0;
  dann.colwise() += dmean / static_cast<T>(J);

  // encoder, top layer down
  Mat<T> dout = std::move(dann);
  for (std::size_t l = cfg.encoder_layers; l-- > 0;) {
    const Eigen::Index in_dim = p.encoder_fwd[l].input.cols();
    Mat<T> din = Mat<T>::Zero(in_dim, J);
    Vec<T> dh_rec = Vec<T>::Zero(H), dc_rec = Vec<T>::Zero(H);
    for (Eigen::Index j = J - 1; j >= 0; --j) {
      Vec<T> dx, dhp, dcp;
      lstm_backward(p.encoder_fwd[l], enc_cache.fwd[l][static_cast<std::size_t>(j)],
                    Vec<T>(dout.col(j).head(H) + dh_rec), dc_rec, g.encoder_fwd[l], dx, dhp, dcp);
      din.col(j) += dx;
      dh_rec = std::move(dhp);
      dc_rec = std::move(dcp);
    }
    dh_rec.setZero();
    dc_rec.setZero();
    for (Eigen::Index j = 0; j < J; ++j) {
      Vec<T> dx, dhp, dcp;
      lstm_backward(p.encoder_bwd[l], enc_cache.bwd[l][static_cast<std::size_t>(j)],
                    Vec<T>(dout.col(j).tail(H) + dh_rec), dc_rec, g.encoder_bwd[l], dx, dhp, dcp);
      din.col(j) += dx;
      dh_rec = std::move(dhp);
      dc_rec = std::move(dcp);
    }
    dout = std::move(din);
  }
  for (Eigen::Index j = 0; j < J; ++j) g.source_embedding.row(ex.source[static_cast<std::size_t>(j)]) += dout.col(j).transpose();
  return total;
}

inline double batch_weight(std::span<const Example> batch) {
  double w = 0;
  for (const auto& ex : batch) {
    if (ex.mask.empty()) w += static_cast<double>(ex.y1.size());
    else for (auto m : ex.mask) w += m ? 1.0 : 0.0;
  }
  return w;
}

}  // namespace detail

template <typename T>
T loss(const Model<T>& model, std::span<const Example> batch, const LossOptions& options,
       std::mt19937_64* rng) {
  for (const auto& ex : batch) detail::validate_example(model.config(), ex);
  const double w = detail::batch_weight(batch);
  if (w == 0) return T(0);
  T total = 0;
  for (const auto& ex : batch)
    total += detail::sentence_pass<T>(model.config(), model.params(), ex, options, rng, nullptr, T(1));
  return total / static_cast<T>(w);
}

template <typename T>
T loss_and_gradient(const Model<T>& model, std::span<const Example> batch,
                    const LossOptions& options, ModelParams<T>& grads, std::mt19937_64* rng) {
  for (const auto& ex : batch) detail::validate_example(model.config(), ex);
  grads = ModelParams<T>::zeros(model.config());
  const double w = detail::batch_weight(batch);
  if (w == 0) return T(0);
  T total = 0;
  for (const auto& ex : batch)
    total += detail::sentence_pass<T>(model.config(), model.params(), ex, options, rng, &grads,
                                      static_cast<T>(w));
  return total / static_cast<T>(w);
}

template <typename T>
double perplexity(const Model<T>& model, std::span<const Example> corpus) {
  double nll = 0;
  double count = 0;
  for (const auto& ex : corpus) {
    detail::validate_example(model.config(), ex);
    const auto enc = model.encode(ex.source);
    auto state = model.initial_state(enc);
    for (std::size_t i = 0; i < ex.y1.size(); ++i) {
      const int y1_prev = i == 0 ? kBosId : ex.y1[i - 1];
      const int y2_prev = i == 0 ? kNoFactor : ex.y2[i - 1];
      auto step = model.advance(enc, state, y1_prev, y2_prev);
      if (ex.mask.empty() || ex.mask[i]) {
        nll -= static_cast<double>(model.log_factor1(step.readout)[ex.y1[i]]);
        nll -= static_cast<double>(model.log_factor2(step.readout, ex.y1[i])[ex.y2[i]]);
        count += 1;
      }
      state = std::move(step.state);
    }
  }
  if (count == 0) throw InvalidInput("perplexity of an empty corpus");
  return std::exp(nll / count);
}

}  // namespace fnmt
