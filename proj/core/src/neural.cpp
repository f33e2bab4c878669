#include "ecgdig/neural.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace ecgdig {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMat>;
using MutMat = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;
using Eigen::VectorXd;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(z)) without overflow for large |z|.
double softplus(double z) {
  const double clipped = std::min(std::abs(z), 700.0);
  return std::max(z, 0.0) + std::log1p(std::exp(-clipped));
}

void check_label(int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
}

void check_pos_weight(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("pos_weight must be positive and finite");
  }
}

std::size_t layer_parameter_count(const LstmLayerParams& p) {
  const std::size_t d = static_cast<std::size_t>(p.input_size);
  const std::size_t h = static_cast<std::size_t>(p.hidden_size);
  return 4 * (h * d + h * h + h);
}

void check_layer_shapes(const LstmLayerParams& p) {
  if (p.input_size <= 0 || p.hidden_size <= 0) {
    throw std::invalid_argument("layer sizes must be positive");
  }
  const std::size_t wd = static_cast<std::size_t>(p.hidden_size) * p.input_size;
  const std::size_t ud = static_cast<std::size_t>(p.hidden_size) * p.hidden_size;
  const std::size_t bd = static_cast<std::size_t>(p.hidden_size);
  const bool ok = p.w_forget.size() == wd && p.w_input.size() == wd &&
                  p.w_output.size() == wd && p.w_candidate.size() == wd &&
                  p.u_forget.size() == ud && p.u_input.size() == ud &&
                  p.u_output.size() == ud && p.u_candidate.size() == ud &&
                  p.b_forget.size() == bd && p.b_input.size() == bd &&
                  p.b_output.size() == bd && p.b_candidate.size() == bd;
  if (!ok) throw std::invalid_argument("layer weight shapes are inconsistent");
}

void check_model_shapes(const LstmModel& model) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  int below = model.layers.front().input_size;
  for (const LstmLayerParams& layer : model.layers) {
    check_layer_shapes(layer);
    if (layer.input_size != below) {
      throw std::invalid_argument("stacked layer input size does not match the layer below");
    }
    below = layer.hidden_size;
  }
  if (model.dense_weights.size() != static_cast<std::size_t>(below)) {
    throw std::invalid_argument("dense head size does not match the top layer");
  }
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Apply one layer over the whole sequence, writing the gate tape.  The input
// is time-major flat (steps x input_size) and must outlive the call.
void run_layer(const LstmLayerParams& layer, const std::vector<double>& input, int steps,
               ForwardCache::LayerTape& tape) {
  const int d = layer.input_size;
  const int h = layer.hidden_size;
  ConstMat wf(layer.w_forget.data(), h, d), wi(layer.w_input.data(), h, d),
      wo(layer.w_output.data(), h, d), wc(layer.w_candidate.data(), h, d);
  ConstMat uf(layer.u_forget.data(), h, h), ui(layer.u_input.data(), h, h),
      uo(layer.u_output.data(), h, h), uc(layer.u_candidate.data(), h, h);
  ConstVec bf(layer.b_forget.data(), h), bi(layer.b_input.data(), h),
      bo(layer.b_output.data(), h), bc(layer.b_candidate.data(), h);
  ConstMat x(input.data(), steps, d);

  // Input contributions for every step at once; the recurrent part joins
  // step by step below.
  RowMat pre_f = x * wf.transpose();
  RowMat pre_i = x * wi.transpose();
  RowMat pre_o = x * wo.transpose();
  RowMat pre_c = x * wc.transpose();
  pre_f.rowwise() += bf.transpose();
  pre_i.rowwise() += bi.transpose();
  pre_o.rowwise() += bo.transpose();
  pre_c.rowwise() += bc.transpose();

  const std::size_t n = static_cast<std::size_t>(steps) * h;
  tape.forget_gate.resize(n);
  tape.input_gate.resize(n);
  tape.output_gate.resize(n);
  tape.candidate.resize(n);
  tape.cell.resize(n);
  tape.cell_tanh.resize(n);
  tape.hidden.resize(n);

  VectorXd hv = VectorXd::Zero(h);
  VectorXd cv = VectorXd::Zero(h);
  VectorXd f(h), i(h), o(h), cand(h), ct(h);
  for (int t = 0; t < steps; ++t) {
    f.noalias() = uf * hv;
    i.noalias() = ui * hv;
    o.noalias() = uo * hv;
    cand.noalias() = uc * hv;
    f += pre_f.row(t).transpose();
    i += pre_i.row(t).transpose();
    o += pre_o.row(t).transpose();
    cand += pre_c.row(t).transpose();
    f.array() = ((-f.array()).exp() + 1.0).inverse();
    i.array() = ((-i.array()).exp() + 1.0).inverse();
    o.array() = ((-o.array()).exp() + 1.0).inverse();
    cand.array() = cand.array().tanh();
    cv.array() = f.array() * cv.array() + i.array() * cand.array();
    ct.array() = cv.array().tanh();
    hv.array() = o.array() * ct.array();

    const std::size_t off = static_cast<std::size_t>(t) * h;
    MutVec(tape.forget_gate.data() + off, h) = f;
    MutVec(tape.input_gate.data() + off, h) = i;
    MutVec(tape.output_gate.data() + off, h) = o;
    MutVec(tape.candidate.data() + off, h) = cand;
    MutVec(tape.cell.data() + off, h) = cv;
    MutVec(tape.cell_tanh.data() + off, h) = ct;
    MutVec(tape.hidden.data() + off, h) = hv;
  }
}

// Backward pass of one layer.  upstream (steps x h, nullable) carries the
// loss gradient flowing into each step's hidden output; head_grad adds to the
// final step only.  Returns nothing; accumulates into grads and, when
// d_input is non-null, writes the gradient w.r.t. this layer's input there.
void run_layer_backward(const LstmLayerParams& layer, const std::vector<double>& input,
                        const ForwardCache::LayerTape& tape, int steps,
                        const std::vector<double>* upstream, const VectorXd* head_grad,
                        LstmLayerParams& grads, std::vector<double>* d_input) {
  const int d = layer.input_size;
  const int h = layer.hidden_size;
  ConstMat wf(layer.w_forget.data(), h, d), wi(layer.w_input.data(), h, d),
      wo(layer.w_output.data(), h, d), wc(layer.w_candidate.data(), h, d);
  ConstMat uf(layer.u_forget.data(), h, h), ui(layer.u_input.data(), h, h),
      uo(layer.u_output.data(), h, h), uc(layer.u_candidate.data(), h, h);
  MutMat dwf(grads.w_forget.data(), h, d), dwi(grads.w_input.data(), h, d),
      dwo(grads.w_output.data(), h, d), dwc(grads.w_candidate.data(), h, d);
  MutMat duf(grads.u_forget.data(), h, h), dui(grads.u_input.data(), h, h),
      duo(grads.u_output.data(), h, h), duc(grads.u_candidate.data(), h, h);
  MutVec dbf(grads.b_forget.data(), h), dbi(grads.b_input.data(), h),
      dbo(grads.b_output.data(), h), dbc(grads.b_candidate.data(), h);

  if (d_input != nullptr) d_input->assign(static_cast<std::size_t>(steps) * d, 0.0);

  VectorXd dh = VectorXd::Zero(h);  // recurrent carry entering step t
  VectorXd dc = VectorXd::Zero(h);  // cell carry delta_C(t+1) * f(t+1)
  VectorXd df(h), di(h), dofl(h), dcand(h), carry(h);
  const VectorXd zeros = VectorXd::Zero(h);
  for (int t = steps - 1; t >= 0; --t) {
    const std::size_t off = static_cast<std::size_t>(t) * h;
    ConstVec f(tape.forget_gate.data() + off, h), i(tape.input_gate.data() + off, h),
        o(tape.output_gate.data() + off, h), cand(tape.candidate.data() + off, h),
        ct(tape.cell_tanh.data() + off, h);
    const double* prev_cell = t > 0 ? tape.cell.data() + off - h : nullptr;
    const double* prev_hidden = t > 0 ? tape.hidden.data() + off - h : nullptr;
    ConstVec c_prev(prev_cell != nullptr ? prev_cell : zeros.data(), h);
    ConstVec h_prev(prev_hidden != nullptr ? prev_hidden : zeros.data(), h);

    if (upstream != nullptr) dh += ConstVec(upstream->data() + off, h);
    if (head_grad != nullptr && t == steps - 1) dh += *head_grad;

    dc.array() += dh.array() * o.array() * (1.0 - ct.array() * ct.array());
    dcand.array() = dc.array() * i.array() * (1.0 - cand.array() * cand.array());
    di.array() = dc.array() * cand.array() * i.array() * (1.0 - i.array());
    df.array() = dc.array() * c_prev.array() * f.array() * (1.0 - f.array());
    dofl.array() = dh.array() * ct.array() * o.array() * (1.0 - o.array());

    ConstVec x_t(input.data() + static_cast<std::size_t>(t) * d, d);
    dwf.noalias() += df * x_t.transpose();
    dwi.noalias() += di * x_t.transpose();
    dwo.noalias() += dofl * x_t.transpose();
    dwc.noalias() += dcand * x_t.transpose();
    duf.noalias() += df * h_prev.transpose();
    dui.noalias() += di * h_prev.transpose();
    duo.noalias() += dofl * h_prev.transpose();
    duc.noalias() += dcand * h_prev.transpose();
    dbf += df;
    dbi += di;
    dbo += dofl;
    dbc += dcand;

    if (d_input != nullptr) {
      MutVec dx(d_input->data() + static_cast<std::size_t>(t) * d, d);
      dx.noalias() += wf.transpose() * df;
      dx.noalias() += wi.transpose() * di;
      dx.noalias() += wo.transpose() * dofl;
      dx.noalias() += wc.transpose() * dcand;
    }

    carry.noalias() = uf.transpose() * df;
    carry.noalias() += ui.transpose() * di;
    carry.noalias() += uo.transpose() * dofl;
    carry.noalias() += uc.transpose() * dcand;
    dh = carry;
    dc.array() *= f.array();
  }
}

LstmLayerParams zero_layer_like(const LstmLayerParams& p) {
  LstmLayerParams z;
  z.input_size = p.input_size;
  z.hidden_size = p.hidden_size;
  const std::size_t wd = static_cast<std::size_t>(p.hidden_size) * p.input_size;
  const std::size_t ud = static_cast<std::size_t>(p.hidden_size) * p.hidden_size;
  const std::size_t bd = static_cast<std::size_t>(p.hidden_size);
  for (auto* v : {&z.w_forget, &z.w_input, &z.w_output, &z.w_candidate}) v->assign(wd, 0.0);
  for (auto* v : {&z.u_forget, &z.u_input, &z.u_output, &z.u_candidate}) v->assign(ud, 0.0);
  for (auto* v : {&z.b_forget, &z.b_input, &z.b_output, &z.b_candidate}) v->assign(bd, 0.0);
  return z;
}

// Shared flattening order for parameters and gradients.
template <typename Layer, typename Fn>
void visit_layer(Layer& layer, Fn&& fn) {
  fn(layer.w_forget);
  fn(layer.w_input);
  fn(layer.w_output);
  fn(layer.w_candidate);
  fn(layer.u_forget);
  fn(layer.u_input);
  fn(layer.u_output);
  fn(layer.u_candidate);
  fn(layer.b_forget);
  fn(layer.b_input);
  fn(layer.b_output);
  fn(layer.b_candidate);
}

}  // namespace

LstmModel make_model(int input_size, int hidden_size, int num_layers, double dropout,
                     std::uint64_t seed) {
  if (input_size <= 0 || hidden_size <= 0 || num_layers <= 0) {
    throw std::invalid_argument("model sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-bound, bound);
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = uniform(rng);
  };

  LstmModel model;
  model.dropout = dropout;
  for (int l = 0; l < num_layers; ++l) {
    LstmLayerParams layer;
    layer.input_size = l == 0 ? input_size : hidden_size;
    layer.hidden_size = hidden_size;
    const std::size_t wd = static_cast<std::size_t>(hidden_size) * layer.input_size;
    const std::size_t ud = static_cast<std::size_t>(hidden_size) * hidden_size;
    const std::size_t bd = static_cast<std::size_t>(hidden_size);
    for (auto* v : {&layer.w_forget, &layer.w_input, &layer.w_output, &layer.w_candidate}) {
      fill(*v, wd);
    }
    for (auto* v : {&layer.u_forget, &layer.u_input, &layer.u_output, &layer.u_candidate}) {
      fill(*v, ud);
    }
    for (auto* v : {&layer.b_forget, &layer.b_input, &layer.b_output, &layer.b_candidate}) {
      fill(*v, bd);
    }
    model.layers.push_back(std::move(layer));
  }
  fill(model.dense_weights, static_cast<std::size_t>(hidden_size));
  model.dense_bias = uniform(rng);
  return model;
}

std::pair<LstmState, LstmStepCache> lstm_step(const LstmLayerParams& params,
                                              const std::vector<double>& x_t,
                                              const LstmState& prev) {
  check_layer_shapes(params);
  const std::size_t h = static_cast<std::size_t>(params.hidden_size);
  if (x_t.size() != static_cast<std::size_t>(params.input_size)) {
    throw std::invalid_argument("input vector size does not match the layer");
  }
  if (prev.h.size() != h || prev.c.size() != h) {
    throw std::invalid_argument("state size does not match the layer");
  }
  const bool finite = all_finite(x_t) && all_finite(prev.h) && all_finite(prev.c) &&
                      all_finite(params.w_forget) && all_finite(params.w_input) &&
                      all_finite(params.w_output) && all_finite(params.w_candidate) &&
                      all_finite(params.u_forget) && all_finite(params.u_input) &&
                      all_finite(params.u_output) && all_finite(params.u_candidate) &&
                      all_finite(params.b_forget) && all_finite(params.b_input) &&
                      all_finite(params.b_output) && all_finite(params.b_candidate);
  if (!finite) throw std::invalid_argument("non-finite input or parameters");

  const int hi = params.hidden_size;
  ConstMat uf(params.u_forget.data(), hi, hi), ui(params.u_input.data(), hi, hi),
      uo(params.u_output.data(), hi, hi), uc(params.u_candidate.data(), hi, hi);
  ConstVec hv(prev.h.data(), hi), cv(prev.c.data(), hi);
  ConstMat wf(params.w_forget.data(), hi, params.input_size),
      wi(params.w_input.data(), hi, params.input_size),
      wo(params.w_output.data(), hi, params.input_size),
      wc(params.w_candidate.data(), hi, params.input_size);
  ConstVec x(x_t.data(), params.input_size);
  ConstVec bf(params.b_forget.data(), hi), bi(params.b_input.data(), hi),
      bo(params.b_output.data(), hi), bc(params.b_candidate.data(), hi);

  VectorXd f = wf * x + uf * hv + bf;
  VectorXd i = wi * x + ui * hv + bi;
  VectorXd o = wo * x + uo * hv + bo;
  VectorXd cand = wc * x + uc * hv + bc;
  f.array() = ((-f.array()).exp() + 1.0).inverse();
  i.array() = ((-i.array()).exp() + 1.0).inverse();
  o.array() = ((-o.array()).exp() + 1.0).inverse();
  cand.array() = cand.array().tanh();
  VectorXd cell = (f.array() * cv.array() + i.array() * cand.array()).matrix();
  VectorXd cell_tanh = cell.array().tanh().matrix();
  VectorXd hidden = (o.array() * cell_tanh.array()).matrix();

  LstmState next;
  next.h.assign(hidden.data(), hidden.data() + hi);
  next.c.assign(cell.data(), cell.data() + hi);
  LstmStepCache cache;
  cache.forget_gate.assign(f.data(), f.data() + hi);
  cache.input_gate.assign(i.data(), i.data() + hi);
  cache.output_gate.assign(o.data(), o.data() + hi);
  cache.candidate.assign(cand.data(), cand.data() + hi);
  cache.cell.assign(cell.data(), cell.data() + hi);
  cache.cell_tanh.assign(cell_tanh.data(), cell_tanh.data() + hi);
  return {std::move(next), std::move(cache)};
}

ForwardCache forward_sequence(const LstmModel& model, const std::vector<double>& x,
                              bool train_mode, std::uint64_t seed) {
  check_model_shapes(model);
  const int d0 = model.layers.front().input_size;
  if (x.empty() || x.size() % static_cast<std::size_t>(d0) != 0) {
    throw std::invalid_argument("sequence length is not a multiple of the input size");
  }
  const int steps = static_cast<int>(x.size() / d0);
  const std::size_t num_layers = model.layers.size();
  const double p = model.dropout;
  const bool dropping = train_mode && p > 0.0;
  const double scale = dropping ? 1.0 / (1.0 - p) : 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto draw_mask = [&](std::vector<double>& mask, std::size_t n) {
    mask.resize(n);
    for (double& m : mask) m = uniform(rng) < p ? 0.0 : scale;
  };

  ForwardCache cache;
  cache.steps = steps;
  cache.train_mode = train_mode;
  cache.inputs.resize(num_layers);
  cache.tapes.resize(num_layers);
  cache.inter_masks.resize(num_layers > 0 ? num_layers - 1 : 0);

  cache.inputs[0] = x;
  for (std::size_t l = 0; l < num_layers; ++l) {
    run_layer(model.layers[l], cache.inputs[l], steps, cache.tapes[l]);
    if (l + 1 < num_layers) {
      const std::vector<double>& hidden = cache.tapes[l].hidden;
      if (dropping) {
        draw_mask(cache.inter_masks[l], hidden.size());
        std::vector<double>& next = cache.inputs[l + 1];
        next.resize(hidden.size());
        for (std::size_t k = 0; k < hidden.size(); ++k) {
          next[k] = hidden[k] * cache.inter_masks[l][k];
        }
      } else {
        cache.inputs[l + 1] = hidden;
      }
    }
  }

  const int top_h = model.layers.back().hidden_size;
  const std::size_t last = static_cast<std::size_t>(steps - 1) * top_h;
  cache.final_hidden.assign(cache.tapes.back().hidden.begin() + last,
                            cache.tapes.back().hidden.begin() + last + top_h);
  if (dropping) {
    draw_mask(cache.head_mask, cache.final_hidden.size());
    for (std::size_t k = 0; k < cache.final_hidden.size(); ++k) {
      cache.final_hidden[k] *= cache.head_mask[k];
    }
  }

  double z = model.dense_bias;
  for (std::size_t k = 0; k < cache.final_hidden.size(); ++k) {
    z += model.dense_weights[k] * cache.final_hidden[k];
  }
  cache.logit = z;
  cache.probability = sigmoid(z);
  return cache;
}

double loss_weighted_bce_logit(double logit, int label, double pos_weight) {
  check_label(label);
  check_pos_weight(pos_weight);
  if (!std::isfinite(logit)) throw std::invalid_argument("non-finite logit");
  return label == 1 ? pos_weight * softplus(-logit) : softplus(logit);
}

double loss_weighted_bce(double probability, int label, double pos_weight) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("probability must lie strictly inside (0, 1)");
  }
  const double logit = std::log(probability) - std::log1p(-probability);
  return loss_weighted_bce_logit(logit, label, pos_weight);
}

LstmGradients backward_sequence(const LstmModel& model, const ForwardCache& cache,
                                int label, double pos_weight) {
  check_model_shapes(model);
  check_label(label);
  check_pos_weight(pos_weight);
  const std::size_t num_layers = model.layers.size();
  if (cache.steps < 1 || cache.inputs.size() != num_layers || cache.tapes.size() != num_layers) {
    throw std::invalid_argument("cache does not match the model");
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t want_in =
        static_cast<std::size_t>(cache.steps) * model.layers[l].input_size;
    const std::size_t want_h =
        static_cast<std::size_t>(cache.steps) * model.layers[l].hidden_size;
    if (cache.inputs[l].size() != want_in || cache.tapes[l].hidden.size() != want_h) {
      throw std::invalid_argument("cache does not match the model");
    }
  }
  const int top_h = model.layers.back().hidden_size;
  if (cache.final_hidden.size() != static_cast<std::size_t>(top_h)) {
    throw std::invalid_argument("cache does not match the model");
  }

  LstmGradients grads;
  grads.layers.reserve(num_layers);
  for (const LstmLayerParams& layer : model.layers) grads.layers.push_back(zero_layer_like(layer));
  grads.dense_weights.assign(model.dense_weights.size(), 0.0);

  // Head: loss derivative w.r.t. the logit, then the dense layer.
  const double y = static_cast<double>(label);
  const double dz = (1.0 - y) * cache.probability - pos_weight * y * (1.0 - cache.probability);
  grads.dense_bias = dz;
  for (std::size_t k = 0; k < grads.dense_weights.size(); ++k) {
    grads.dense_weights[k] = dz * cache.final_hidden[k];
  }
  VectorXd head_grad(top_h);
  for (int k = 0; k < top_h; ++k) head_grad[k] = dz * model.dense_weights[k];
  if (!cache.head_mask.empty()) {
    for (int k = 0; k < top_h; ++k) head_grad[k] *= cache.head_mask[k];
  }

  std::vector<double> upstream;   // gradient w.r.t. a layer's hidden sequence
  std::vector<double> d_input;    // gradient w.r.t. a layer's input sequence
  for (std::size_t l = num_layers; l-- > 0;) {
    const bool top = l + 1 == num_layers;
    run_layer_backward(model.layers[l], cache.inputs[l], cache.tapes[l], cache.steps,
                       top ? nullptr : &upstream, top ? &head_grad : nullptr, grads.layers[l],
                       l > 0 ? &d_input : nullptr);
    if (l > 0) {
      // The layer below sees its hidden sequence through the dropout mask.
      upstream = std::move(d_input);
      d_input = {};
      if (!cache.inter_masks[l - 1].empty()) {
        for (std::size_t k = 0; k < upstream.size(); ++k) {
          upstream[k] *= cache.inter_masks[l - 1][k];
        }
      }
    }
  }
  return grads;
}

std::vector<double> flatten_parameters(const LstmModel& model) {
  check_model_shapes(model);
  std::vector<double> flat;
  for (const LstmLayerParams& layer : model.layers) {
    visit_layer(layer, [&](const std::vector<double>& v) {
      flat.insert(flat.end(), v.begin(), v.end());
    });
  }
  flat.insert(flat.end(), model.dense_weights.begin(), model.dense_weights.end());
  flat.push_back(model.dense_bias);
  return flat;
}

std::vector<double> flatten_gradients(const LstmGradients& grads) {
  std::vector<double> flat;
  for (const LstmLayerParams& layer : grads.layers) {
    visit_layer(layer, [&](const std::vector<double>& v) {
      flat.insert(flat.end(), v.begin(), v.end());
    });
  }
  flat.insert(flat.end(), grads.dense_weights.begin(), grads.dense_weights.end());
  flat.push_back(grads.dense_bias);
  return flat;
}

void assign_parameters(LstmModel& model, const std::vector<double>& flat) {
  check_model_shapes(model);
  std::size_t expect = 1 + model.dense_weights.size();
  for (const LstmLayerParams& layer : model.layers) expect += layer_parameter_count(layer);
  if (flat.size() != expect) {
    throw std::invalid_argument("flat parameter vector does not match the model");
  }
  std::size_t pos = 0;
  for (LstmLayerParams& layer : model.layers) {
    visit_layer(layer, [&](std::vector<double>& v) {
      std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
      pos += v.size();
    });
  }
  std::copy(flat.begin() + pos, flat.begin() + pos + model.dense_weights.size(),
            model.dense_weights.begin());
  pos += model.dense_weights.size();
  model.dense_bias = flat[pos];
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("parameter and gradient sizes differ");
  }
  if (state.first_moment.empty() && state.second_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw std::invalid_argument("optimizer state size does not match the parameters");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    const double g = grads[k];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    params[k] -= state.alpha * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

std::vector<double> train(LstmModel& model, const std::vector<std::vector<double>>& sequences,
                          const std::vector<int>& labels, const TrainConfig& config) {
  check_model_shapes(model);
  if (sequences.empty()) throw std::invalid_argument("training set is empty");
  if (sequences.size() != labels.size()) {
    throw std::invalid_argument("sequence and label counts differ");
  }
  if (config.epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (!std::isfinite(config.learning_rate) || config.learning_rate < 0.0) {
    throw std::invalid_argument("learning rate must be finite and non-negative");
  }
  check_pos_weight(config.pos_weight);

  std::vector<double> flat = flatten_parameters(model);
  AdamState optimizer;
  optimizer.alpha = config.learning_rate;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(sequences.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t n = 0; n < order.size(); ++n) {
      const std::size_t idx = order[n];
      const std::uint64_t mask_seed = rng();
      const ForwardCache cache = forward_sequence(model, sequences[idx], true, mask_seed);
      if (!std::isfinite(cache.logit)) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1) +
                                 ", instance " + std::to_string(idx));
      }
      const double loss = loss_weighted_bce_logit(cache.logit, labels[idx], config.pos_weight);
      const LstmGradients grads = backward_sequence(model, cache, labels[idx], config.pos_weight);
      const std::vector<double> gflat = flatten_gradients(grads);
      adam_step(flat, gflat, optimizer);
      assign_parameters(model, flat);
      total += loss;
    }
    epoch_losses.push_back(total);
  }
  model.trained_epochs = config.epochs;
  model.trained_learning_rate = config.learning_rate;
  model.trained_seed = config.seed;
  return epoch_losses;
}

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_model(const LstmModel& model, const std::string& path) {
  check_model_shapes(model);
  nlohmann::json doc;
  doc["format"] = "ecgdig-lstm";
  doc["version"] = kCheckpointVersion;
  doc["dropout"] = model.dropout;
  doc["lead_set"] = model.lead_set;
  doc["trained_epochs"] = model.trained_epochs;
  doc["trained_learning_rate"] = model.trained_learning_rate;
  doc["trained_seed"] = model.trained_seed;
  doc["dense_weights"] = model.dense_weights;
  doc["dense_bias"] = model.dense_bias;
  nlohmann::json layers = nlohmann::json::array();
  for (const LstmLayerParams& layer : model.layers) {
    nlohmann::json entry;
    entry["input_size"] = layer.input_size;
    entry["hidden_size"] = layer.hidden_size;
    entry["w_forget"] = layer.w_forget;
    entry["w_input"] = layer.w_input;
    entry["w_output"] = layer.w_output;
    entry["w_candidate"] = layer.w_candidate;
    entry["u_forget"] = layer.u_forget;
    entry["u_input"] = layer.u_input;
    entry["u_output"] = layer.u_output;
    entry["u_candidate"] = layer.u_candidate;
    entry["b_forget"] = layer.b_forget;
    entry["b_input"] = layer.b_input;
    entry["b_output"] = layer.b_output;
    entry["b_candidate"] = layer.b_candidate;
    layers.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layers);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot finalize checkpoint: " + path);
  }
}

LstmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string{}) != "ecgdig-lstm") {
      throw std::runtime_error("not a model checkpoint");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw std::runtime_error("checkpoint version " + std::to_string(version) +
                               " unsupported, expected " + std::to_string(kCheckpointVersion));
    }
    LstmModel model;
    model.dropout = doc.at("dropout").get<double>();
    model.lead_set = doc.value("lead_set", std::string{});
    model.trained_epochs = doc.value("trained_epochs", 0);
    model.trained_learning_rate = doc.value("trained_learning_rate", 0.0);
    model.trained_seed = doc.value("trained_seed", std::uint64_t{0});
    model.dense_weights = doc.at("dense_weights").get<std::vector<double>>();
    model.dense_bias = doc.at("dense_bias").get<double>();
    for (const nlohmann::json& entry : doc.at("layers")) {
      LstmLayerParams layer;
      layer.input_size = entry.at("input_size").get<int>();
      layer.hidden_size = entry.at("hidden_size").get<int>();
      layer.w_forget = entry.at("w_forget").get<std::vector<double>>();
      layer.w_input = entry.at("w_input").get<std::vector<double>>();
      layer.w_output = entry.at("w_output").get<std::vector<double>>();
      layer.w_candidate = entry.at("w_candidate").get<std::vector<double>>();
      layer.u_forget = entry.at("u_forget").get<std::vector<double>>();
      layer.u_input = entry.at("u_input").get<std::vector<double>>();
      layer.u_output = entry.at("u_output").get<std::vector<double>>();
      layer.u_candidate = entry.at("u_candidate").get<std::vector<double>>();
      layer.b_forget = entry.at("b_forget").get<std::vector<double>>();
      layer.b_input = entry.at("b_input").get<std::vector<double>>();
      layer.b_output = entry.at("b_output").get<std::vector<double>>();
      layer.b_candidate = entry.at("b_candidate").get<std::vector<double>>();
      model.layers.push_back(std::move(layer));
    }
    check_model_shapes(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + e.what());
  }
}

}  // namespace ecgdig
