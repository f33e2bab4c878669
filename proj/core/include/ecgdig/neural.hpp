#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ecgdig {

// Parameters of one recurrent layer.  Weight matrices are flat row-major
// vectors: input weights are hidden_size x input_size, recurrent weights
// hidden_size x hidden_size, biases hidden_size.
struct LstmLayerParams {
  int input_size = 0;
  int hidden_size = 0;
  std::vector<double> w_forget, w_input, w_output, w_candidate;  // H x D
  std::vector<double> u_forget, u_input, u_output, u_candidate;  // H x H
  std::vector<double> b_forget, b_input, b_output, b_candidate;  // H
};

// Hidden and cell vectors carried between time steps; zeros at sequence start.
struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

// Post-activation gate values of one step, retained for the backward pass.
struct LstmStepCache {
  std::vector<double> forget_gate, input_gate, output_gate, candidate;
  std::vector<double> cell, cell_tanh;
};

// Stacked recurrent layers, a dropout stage, and a dense sigmoid head reading
// the final hidden state.  Layer l > 0 consumes layer l-1's hidden sequence.
struct LstmModel {
  std::vector<LstmLayerParams> layers;
  std::vector<double> dense_weights;  // one weight per top-layer hidden unit
  double dense_bias = 0.0;
  double dropout = 0.25;  // drop probability, inverted scaling at train time
  // Descriptive metadata carried into checkpoints.
  std::string lead_set;
  int trained_epochs = 0;
  double trained_learning_rate = 0.0;
  std::uint64_t trained_seed = 0;
};

// Everything the backward pass needs from one forward run.
struct ForwardCache {
  struct LayerTape {
    // Time-major flat arrays, steps x H each.
    std::vector<double> forget_gate, input_gate, output_gate, candidate;
    std::vector<double> cell, cell_tanh, hidden;
  };
  // Per layer, the sequence that layer consumed (after inter-layer dropout
  // when stacked), time-major flat: steps x that layer's input size.
  std::vector<std::vector<double>> inputs;
  std::vector<LayerTape> tapes;
  // Dropout multipliers actually applied, scaling folded in (0 or 1/(1-p)).
  // Empty when no dropout was drawn.  inter_masks[l] scales layer l's output
  // sequence before layer l+1 reads it; head_mask scales the final hidden
  // state before the dense layer.
  std::vector<std::vector<double>> inter_masks;
  std::vector<double> head_mask;
  std::vector<double> final_hidden;  // top h_T as the dense layer saw it
  double logit = 0.0;
  double probability = 0.5;
  int steps = 0;
  bool train_mode = false;
};

// Gradients, shaped exactly like the parameters they belong to.
struct LstmGradients {
  std::vector<LstmLayerParams> layers;
  std::vector<double> dense_weights;
  double dense_bias = 0.0;
};

// First/second moment accumulators with bias-corrected updates.
struct AdamState {
  std::vector<double> first_moment, second_moment;
  long long step = 0;
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 15;
  double learning_rate = 1e-3;
  double pos_weight = 1.0;
  std::uint64_t seed = 0;
};

// Fresh model with every weight and bias drawn uniformly from
// [-1/sqrt(hidden_size), +1/sqrt(hidden_size)], deterministically per seed.
LstmModel make_model(int input_size, int hidden_size, int num_layers, double dropout,
                     std::uint64_t seed);

// One recurrent step: gate the input and previous state into a new state,
// returning the gate activations needed to run the step backwards.
// f = sigmoid(W_f x + U_f h + b_f), likewise i and o; candidate = tanh(...);
// c_new = f * c + i * candidate; h_new = o * tanh(c_new).
std::pair<LstmState, LstmStepCache> lstm_step(const LstmLayerParams& params,
                                              const std::vector<double>& x_t,
                                              const LstmState& prev);

// Feed a whole sequence (time-major flat, length a multiple of the first
// layer's input size) through the stack and the dense head.  States start at
// zero.  In train mode, inter-layer dropout applies between stacked layers
// and head dropout applies to the final hidden state, both with inverted
// 1/(1-p) scaling and masks drawn deterministically from the seed; eval mode
// applies neither.  Returns the sigmoid probability and the full cache.
ForwardCache forward_sequence(const LstmModel& model, const std::vector<double>& x,
                              bool train_mode, std::uint64_t seed = 0);

// Class-weighted binary cross-entropy,
//   loss = -(pos_weight * y * log(p) + (1 - y) * log(1 - p)),
// evaluated in log-space from the logit so confident predictions cannot
// overflow.  The probability form requires p strictly inside (0, 1).
double loss_weighted_bce(double probability, int label, double pos_weight = 1.0);
double loss_weighted_bce_logit(double logit, int label, double pos_weight = 1.0);

// Exact gradients of the weighted loss for every parameter, by running the
// cached forward pass backwards through time (dropout masks reused from the
// cache).  The cache must come from a forward pass of this model.
LstmGradients backward_sequence(const LstmModel& model, const ForwardCache& cache,
                                int label, double pos_weight = 1.0);

// Flat parameter/gradient views in one fixed order, so a single optimizer
// state can cover the whole model.
std::vector<double> flatten_parameters(const LstmModel& model);
std::vector<double> flatten_gradients(const LstmGradients& grads);
void assign_parameters(LstmModel& model, const std::vector<double>& flat);

// Bias-corrected adaptive update, in place.  Empty accumulators are sized to
// the parameters on first use; afterwards sizes must match.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state);

// Stochastic training: every epoch shuffles the instances and applies one
// forward/backward/adam update per instance.  Returns the summed training
// loss per epoch.  A non-finite loss aborts with an error naming the epoch
// and instance.
std::vector<double> train(LstmModel& model, const std::vector<std::vector<double>>& sequences,
                          const std::vector<int>& labels, const TrainConfig& config);

// Versioned JSON checkpoints; save/load round trips are lossless.
void save_model(const LstmModel& model, const std::string& path);
LstmModel load_model(const std::string& path);

}  // namespace ecgdig
