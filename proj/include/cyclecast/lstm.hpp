#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cyclecast/features.hpp"
#include "cyclecast/io_util.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast::lstm {

// One LSTM layer. Weight matrices act on the concatenation [h(t-1), x(t)],
// recurrent part first, so each has shape hidden x (hidden + input).
struct LstmLayerParams {
    Eigen::MatrixXd W_i, W_f, W_o, W_c;
    Eigen::VectorXd b_i, b_f, b_o, b_c;
    int hidden_size = 0;
    int input_size = 0;
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

enum class Architecture { Case1Arch, StackedArch };

std::string architecture_name(Architecture arch);
Architecture architecture_from_name(const std::string& name);

struct ArchSpec {
    std::vector<int> hidden_sizes;
    std::vector<double> dropout_rates;
};

// Case1Arch: one 64-unit layer, dropout 0.05.
// StackedArch: three layers of 128/64/32 units, dropout 0.2 after each.
ArchSpec arch_spec(Architecture arch);

struct LstmNetwork {
    Architecture architecture = Architecture::Case1Arch;
    std::vector<LstmLayerParams> layers;
    std::vector<double> dropout_rates;  // one per layer output
    Eigen::MatrixXd dense_W;            // 2 x last hidden
    Eigen::VectorXd dense_b;            // 2
    int input_size = 2;
};

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 1e-3;
    uint64_t seed = 42;
    Architecture architecture = Architecture::Case1Arch;
};

struct TrainResult {
    std::vector<double> loss_curve;  // full-batch MSE entering each epoch
};

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out)), drawn row-major
// from the seeded stream, matrices in declared order); forget-gate biases 1,
// every other bias 0.
LstmNetwork init_network(Architecture arch, uint64_t seed);

// One step of the cell recursion: sigmoid gates i/f/o, tanh candidate,
// c(t) = f.c(t-1) + i.cand, h(t) = o.tanh(c(t)).
LstmState cell_step(const LstmLayerParams& params, const Eigen::VectorXd& x,
                    const LstmState& prev);

// Runs the stacked layers over an L x 2 sequence from zero states and maps
// the final hidden state through the dense ReLU head. Deterministic.
Eigen::Vector2d forward_sequence(const LstmNetwork& net,
                                 const Eigen::MatrixXd& sequence);

// Training-mode forward: same as forward_sequence but applies an inverted
// dropout mask (drawn per layer, per timestep from rng) to each layer's
// output before the next layer consumes it.
Eigen::Vector2d forward_sequence_train(const LstmNetwork& net,
                                       const Eigen::MatrixXd& sequence,
                                       Rng& rng);

// Zeroes each entry with probability rate and scales survivors by
// 1/(1-rate), so the mask is identity in expectation.
Eigen::VectorXd apply_inverted_dropout(const Eigen::VectorXd& values,
                                       double rate, Rng& rng);

// Full-batch backpropagation through time with Adam (beta1 0.9, beta2 0.999,
// epsilon 1e-8). Inputs and targets must already be scaled to [0,1] with a
// shared scaler. The recorded loss is the dropout-free full-batch MSE at the
// parameters entering each epoch; a non-finite loss raises TrainingDiverged
// naming the epoch.
TrainResult train(LstmNetwork& net, const features::SupervisedWindows& windows,
                  const TrainConfig& config);

// Analytic-vs-numeric gradient agreement on one window, dropout disabled.
// Central differences with step 1e-5 on n_samples randomly chosen
// parameters; relative error |ga - gn| / max(1e-8, |ga| + |gn|).
double gradient_check(const LstmNetwork& net, const Eigen::MatrixXd& sequence,
                      const Eigen::Vector2d& target, int n_samples = 50,
                      uint64_t seed = 0);

struct GradientSample {
    int flat_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// The raw samples behind gradient_check, for finer-grained assertions.
std::vector<GradientSample> gradient_samples(const LstmNetwork& net,
                                             const Eigen::MatrixXd& sequence,
                                             const Eigen::Vector2d& target,
                                             int n_samples, uint64_t seed);

// Flat parameter addressing in serialization order: per layer W_i, W_f,
// W_o, W_c (row-major), b_i, b_f, b_o, b_c; then dense_W (row-major) and
// dense_b last.
int param_count(const LstmNetwork& net);
double get_param(const LstmNetwork& net, int flat_index);
void set_param(LstmNetwork& net, int flat_index, double value);

// Reshapes one window row (2L interleaved features, oldest first) into the
// L x 2 sequence the network consumes.
Eigen::MatrixXd window_row_to_sequence(const Eigen::RowVectorXd& row);

// Flat-text container: architecture tag, layer dims, dropout rates, then
// row-major parameter arrays in declared order. Round-trips exactly.
KvPairs network_to_kv(const LstmNetwork& net);
LstmNetwork network_from_kv(const KvPairs& kv);

}  // namespace cyclecast::lstm
