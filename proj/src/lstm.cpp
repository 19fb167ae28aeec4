#include "cyclecast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyclecast/errors.hpp"

namespace cyclecast::lstm {

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

void check_layer(const LstmLayerParams& p) {
    const Eigen::Index h = p.hidden_size;
    const Eigen::Index cols = p.hidden_size + p.input_size;
    for (const auto* w : {&p.W_i, &p.W_f, &p.W_o, &p.W_c}) {
        if (w->rows() != h || w->cols() != cols) {
            throw ShapeError("LSTM weight matrix shape mismatch");
        }
    }
    for (const auto* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) {
        if (b->size() != h) throw ShapeError("LSTM bias length mismatch");
    }
}

void check_network(const LstmNetwork& net) {
    if (net.layers.empty()) throw ShapeError("network has no layers");
    if (net.dropout_rates.size() != net.layers.size()) {
        throw ShapeError("need one dropout rate per layer");
    }
    int expected_input = net.input_size;
    for (const auto& layer : net.layers) {
        check_layer(layer);
        if (layer.input_size != expected_input) {
            throw ShapeError("layer input size does not chain");
        }
        expected_input = layer.hidden_size;
    }
    for (double rate : net.dropout_rates) {
        if (rate < 0.0 || rate >= 1.0) {
            throw std::invalid_argument("dropout rates must lie in [0,1)");
        }
    }
    if (net.dense_W.rows() != 2 || net.dense_W.cols() != expected_input ||
        net.dense_b.size() != 2) {
        throw ShapeError("dense head shape mismatch");
    }
}

void fill_xavier(Eigen::MatrixXd& w, Rng& rng) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = rng.uniform(-bound, bound);
        }
    }
}

// Per-timestep activations of one layer across the whole batch (columns are
// windows). a holds [h(t-1); x(t)].
struct StepCache {
    Eigen::MatrixXd a, i, f, o, g, c_prev, tc, h_out;
};

using LayerMasks = std::vector<Eigen::MatrixXd>;  // one H x N mask per step

struct Gradients {
    struct Layer {
        Eigen::MatrixXd W_i, W_f, W_o, W_c;
        Eigen::VectorXd b_i, b_f, b_o, b_c;
    };
    std::vector<Layer> layers;
    Eigen::MatrixXd dense_W;
    Eigen::VectorXd dense_b;
};

Gradients zero_gradients(const LstmNetwork& net) {
    Gradients g;
    g.layers.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& p = net.layers[l];
        auto& gl = g.layers[l];
        gl.W_i = Eigen::MatrixXd::Zero(p.W_i.rows(), p.W_i.cols());
        gl.W_f = gl.W_i;
        gl.W_o = gl.W_i;
        gl.W_c = gl.W_i;
        gl.b_i = Eigen::VectorXd::Zero(p.b_i.size());
        gl.b_f = gl.b_i;
        gl.b_o = gl.b_i;
        gl.b_c = gl.b_i;
    }
    g.dense_W = Eigen::MatrixXd::Zero(net.dense_W.rows(), net.dense_W.cols());
    g.dense_b = Eigen::VectorXd::Zero(net.dense_b.size());
    return g;
}

// Full-batch forward pass, optionally with dropout masks and a backward
// pass. inputs is N x 2L (window rows), targets N x 2. Returns the MSE over
// all windows and both channels.
double forward_backward(const LstmNetwork& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets,
                        const std::vector<LayerMasks>* masks,
                        Gradients* grads) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index steps = inputs.cols() / 2;
    const std::size_t n_layers = net.layers.size();

    // Layer inputs per timestep; starts as the raw feature sequence.
    std::vector<Eigen::MatrixXd> layer_input(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
        Eigen::MatrixXd x(2, n);
        x.row(0) = inputs.col(2 * t).transpose();
        x.row(1) = inputs.col(2 * t + 1).transpose();
        layer_input[static_cast<std::size_t>(t)] = std::move(x);
    }

    std::vector<std::vector<StepCache>> cache(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& p = net.layers[l];
        const Eigen::Index h = p.hidden_size;
        Eigen::MatrixXd h_state = Eigen::MatrixXd::Zero(h, n);
        Eigen::MatrixXd c_state = Eigen::MatrixXd::Zero(h, n);
        cache[l].resize(static_cast<std::size_t>(steps));

        for (Eigen::Index t = 0; t < steps; ++t) {
            auto& sc = cache[l][static_cast<std::size_t>(t)];
            const auto& x = layer_input[static_cast<std::size_t>(t)];
            sc.a.resize(h + x.rows(), n);
            sc.a.topRows(h) = h_state;
            sc.a.bottomRows(x.rows()) = x;

            sc.i = sigmoid(((p.W_i * sc.a).colwise() + p.b_i).array());
            sc.f = sigmoid(((p.W_f * sc.a).colwise() + p.b_f).array());
            sc.o = sigmoid(((p.W_o * sc.a).colwise() + p.b_o).array());
            sc.g = ((p.W_c * sc.a).colwise() + p.b_c).array().tanh();

            sc.c_prev = c_state;
            c_state = (sc.f.array() * c_state.array() +
                       sc.i.array() * sc.g.array())
                          .matrix();
            sc.tc = c_state.array().tanh().matrix();
            h_state = (sc.o.array() * sc.tc.array()).matrix();

            if (masks != nullptr && !(*masks)[l].empty()) {
                sc.h_out =
                    (h_state.array() *
                     (*masks)[l][static_cast<std::size_t>(t)].array())
                        .matrix();
            } else {
                sc.h_out = h_state;
            }
            layer_input[static_cast<std::size_t>(t)] = sc.h_out;
        }
    }

    const auto& h_last = cache[n_layers - 1][static_cast<std::size_t>(steps - 1)].h_out;
    const Eigen::MatrixXd z = (net.dense_W * h_last).colwise() + net.dense_b;
    const Eigen::MatrixXd pred = z.cwiseMax(0.0);
    const Eigen::MatrixXd err = pred - targets.transpose();
    const double loss = err.squaredNorm() / (2.0 * static_cast<double>(n));
    if (grads == nullptr) return loss;

    *grads = zero_gradients(net);
    const Eigen::MatrixXd dz =
        (err.array() * (z.array() > 0.0).cast<double>()).matrix() /
        static_cast<double>(n);
    grads->dense_W = dz * h_last.transpose();
    grads->dense_b = dz.rowwise().sum();

    // Gradient flowing into each layer's (dropped) output per timestep. For
    // the top layer only the final step receives a dense-head gradient.
    std::vector<Eigen::MatrixXd> dh_out(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
        dh_out[static_cast<std::size_t>(t)] = Eigen::MatrixXd::Zero(
            net.layers[n_layers - 1].hidden_size, n);
    }
    dh_out[static_cast<std::size_t>(steps - 1)] = net.dense_W.transpose() * dz;

    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& p = net.layers[l];
        auto& gl = grads->layers[l];
        const Eigen::Index h = p.hidden_size;
        Eigen::MatrixXd dh_rec = Eigen::MatrixXd::Zero(h, n);
        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(h, n);
        std::vector<Eigen::MatrixXd> dx(static_cast<std::size_t>(steps));

        for (Eigen::Index t = steps - 1; t >= 0; --t) {
            const auto& sc = cache[l][static_cast<std::size_t>(t)];
            // Dropout backward: h_out = h .* mask.
            Eigen::MatrixXd dh = dh_out[static_cast<std::size_t>(t)];
            if (masks != nullptr && !(*masks)[l].empty()) {
                dh = (dh.array() *
                      (*masks)[l][static_cast<std::size_t>(t)].array())
                         .matrix();
            }
            dh += dh_rec;

            const Eigen::ArrayXXd do_ = dh.array() * sc.tc.array();
            const Eigen::ArrayXXd dc = dh.array() * sc.o.array() *
                                           (1.0 - sc.tc.array().square()) +
                                       dc_next.array();
            const Eigen::ArrayXXd di = dc * sc.g.array();
            const Eigen::ArrayXXd dg = dc * sc.i.array();
            const Eigen::ArrayXXd df = dc * sc.c_prev.array();
            dc_next = (dc * sc.f.array()).matrix();

            const Eigen::MatrixXd dzi =
                (di * sc.i.array() * (1.0 - sc.i.array())).matrix();
            const Eigen::MatrixXd dzf =
                (df * sc.f.array() * (1.0 - sc.f.array())).matrix();
            const Eigen::MatrixXd dzo =
                (do_ * sc.o.array() * (1.0 - sc.o.array())).matrix();
            const Eigen::MatrixXd dzg =
                (dg * (1.0 - sc.g.array().square())).matrix();

            gl.W_i += dzi * sc.a.transpose();
            gl.W_f += dzf * sc.a.transpose();
            gl.W_o += dzo * sc.a.transpose();
            gl.W_c += dzg * sc.a.transpose();
            gl.b_i += dzi.rowwise().sum();
            gl.b_f += dzf.rowwise().sum();
            gl.b_o += dzo.rowwise().sum();
            gl.b_c += dzg.rowwise().sum();

            const Eigen::MatrixXd da =
                p.W_i.transpose() * dzi + p.W_f.transpose() * dzf +
                p.W_o.transpose() * dzo + p.W_c.transpose() * dzg;
            dh_rec = da.topRows(h);
            dx[static_cast<std::size_t>(t)] = da.bottomRows(p.input_size);
        }
        if (l > 0) dh_out = std::move(dx);
    }
    return loss;
}

void validate_windows(const LstmNetwork& net,
                      const features::SupervisedWindows& windows) {
    if (windows.rows() == 0) throw EmptyInput("no training windows");
    if (windows.inputs.cols() != 2 * windows.window_len ||
        windows.inputs.cols() < 2) {
        throw ShapeError("window inputs must hold 2 features per step");
    }
    if (windows.targets.cols() != 2) {
        throw ShapeError("LSTM training expects a one-step (2-column) target");
    }
    if (net.input_size != 2) throw ShapeError("network input size must be 2");
}

}  // namespace

std::string architecture_name(Architecture arch) {
    switch (arch) {
        case Architecture::Case1Arch: return "case1";
        case Architecture::StackedArch: return "stacked";
    }
    throw std::invalid_argument("unknown architecture");
}

Architecture architecture_from_name(const std::string& name) {
    if (name == "case1") return Architecture::Case1Arch;
    if (name == "stacked") return Architecture::StackedArch;
    throw std::invalid_argument("unknown architecture '" + name + "'");
}

ArchSpec arch_spec(Architecture arch) {
    switch (arch) {
        case Architecture::Case1Arch: return {{64}, {0.05}};
        case Architecture::StackedArch: return {{128, 64, 32}, {0.2, 0.2, 0.2}};
    }
    throw std::invalid_argument("unknown architecture");
}

LstmNetwork init_network(Architecture arch, uint64_t seed) {
    const auto spec = arch_spec(arch);
    Rng rng(seed);

    LstmNetwork net;
    net.architecture = arch;
    net.dropout_rates = spec.dropout_rates;
    net.input_size = 2;

    int input = net.input_size;
    for (int hidden : spec.hidden_sizes) {
        LstmLayerParams p;
        p.hidden_size = hidden;
        p.input_size = input;
        const Eigen::Index cols = hidden + input;
        for (auto* w : {&p.W_i, &p.W_f, &p.W_o, &p.W_c}) {
            w->resize(hidden, cols);
            fill_xavier(*w, rng);
        }
        p.b_i = Eigen::VectorXd::Zero(hidden);
        p.b_f = Eigen::VectorXd::Ones(hidden);  // open forget gates at start
        p.b_o = Eigen::VectorXd::Zero(hidden);
        p.b_c = Eigen::VectorXd::Zero(hidden);
        net.layers.push_back(std::move(p));
        input = hidden;
    }

    net.dense_W.resize(2, input);
    fill_xavier(net.dense_W, rng);
    net.dense_b = Eigen::VectorXd::Zero(2);
    return net;
}

LstmState cell_step(const LstmLayerParams& params, const Eigen::VectorXd& x,
                    const LstmState& prev) {
    check_layer(params);
    if (x.size() != params.input_size || prev.h.size() != params.hidden_size ||
        prev.c.size() != params.hidden_size) {
        throw ShapeError("cell_step dimension mismatch");
    }

    Eigen::VectorXd a(params.hidden_size + params.input_size);
    a << prev.h, x;

    const Eigen::ArrayXd i = sigmoid((params.W_i * a + params.b_i).array());
    const Eigen::ArrayXd f = sigmoid((params.W_f * a + params.b_f).array());
    const Eigen::ArrayXd o = sigmoid((params.W_o * a + params.b_o).array());
    const Eigen::ArrayXd g = (params.W_c * a + params.b_c).array().tanh();

    LstmState next;
    next.c = (f * prev.c.array() + i * g).matrix();
    next.h = (o * next.c.array().tanh()).matrix();
    return next;
}

namespace {

Eigen::Vector2d run_sequence(const LstmNetwork& net,
                             const Eigen::MatrixXd& sequence, Rng* rng) {
    check_network(net);
    if (sequence.rows() == 0) throw EmptyInput("empty input sequence");
    if (sequence.cols() != net.input_size) {
        throw ShapeError("sequence rows must have width " +
                         std::to_string(net.input_size));
    }

    const Eigen::Index steps = sequence.rows();
    Eigen::MatrixXd layer_seq = sequence;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& p = net.layers[l];
        LstmState state;
        state.h = Eigen::VectorXd::Zero(p.hidden_size);
        state.c = Eigen::VectorXd::Zero(p.hidden_size);

        Eigen::MatrixXd out(steps, p.hidden_size);
        for (Eigen::Index t = 0; t < steps; ++t) {
            state = cell_step(p, layer_seq.row(t).transpose(), state);
            Eigen::VectorXd h_out = state.h;
            if (rng != nullptr && net.dropout_rates[l] > 0.0) {
                h_out = apply_inverted_dropout(h_out, net.dropout_rates[l], *rng);
            }
            out.row(t) = h_out.transpose();
        }
        layer_seq = std::move(out);
    }

    const Eigen::Vector2d z =
        net.dense_W * layer_seq.row(steps - 1).transpose() + net.dense_b;
    return z.cwiseMax(0.0);
}

}  // namespace

Eigen::Vector2d forward_sequence(const LstmNetwork& net,
                                 const Eigen::MatrixXd& sequence) {
    return run_sequence(net, sequence, nullptr);
}

Eigen::Vector2d forward_sequence_train(const LstmNetwork& net,
                                       const Eigen::MatrixXd& sequence,
                                       Rng& rng) {
    return run_sequence(net, sequence, &rng);
}

Eigen::VectorXd apply_inverted_dropout(const Eigen::VectorXd& values,
                                       double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout rate must lie in [0,1)");
    }
    if (rate == 0.0) return values;
    Eigen::VectorXd out(values.size());
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out(i) = rng.uniform01() < rate ? 0.0 : values(i) * scale;
    }
    return out;
}

TrainResult train(LstmNetwork& net, const features::SupervisedWindows& windows,
                  const TrainConfig& config) {
    check_network(net);
    validate_windows(net, windows);
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.learning_rate < 0.0 || config.learning_rate > 1.0) {
        throw std::invalid_argument("learning rate must lie in [0,1]");
    }

    const Eigen::Index n = windows.rows();
    const Eigen::Index steps = windows.inputs.cols() / 2;
    const std::size_t n_layers = net.layers.size();
    Rng rng(config.seed);

    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    Gradients m = zero_gradients(net);
    Gradients v = zero_gradients(net);

    auto adam_update = [&](Eigen::MatrixXd& param, Eigen::MatrixXd& m_t,
                           Eigen::MatrixXd& v_t, const Eigen::MatrixXd& g,
                           double bias1, double bias2) {
        m_t = kBeta1 * m_t + (1.0 - kBeta1) * g;
        v_t = kBeta2 * v_t + (1.0 - kBeta2) * g.array().square().matrix();
        param.array() -= config.learning_rate * (m_t.array() / bias1) /
                         ((v_t.array() / bias2).sqrt() + kEps);
    };
    auto adam_update_vec = [&](Eigen::VectorXd& param, Eigen::VectorXd& m_t,
                               Eigen::VectorXd& v_t, const Eigen::VectorXd& g,
                               double bias1, double bias2) {
        m_t = kBeta1 * m_t + (1.0 - kBeta1) * g;
        v_t = kBeta2 * v_t + (1.0 - kBeta2) * g.array().square().matrix();
        param.array() -= config.learning_rate * (m_t.array() / bias1) /
                         ((v_t.array() / bias2).sqrt() + kEps);
    };

    TrainResult result;
    result.loss_curve.reserve(static_cast<std::size_t>(config.epochs));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double clean_loss =
            forward_backward(net, windows.inputs, windows.targets, nullptr,
                             nullptr);
        if (!std::isfinite(clean_loss)) {
            throw TrainingDiverged(
                "training loss became non-finite at epoch " +
                    std::to_string(epoch),
                epoch);
        }
        result.loss_curve.push_back(clean_loss);

        // Fresh dropout masks per epoch: layer-major, then timestep,
        // entries row-major.
        std::vector<LayerMasks> masks(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const double rate = net.dropout_rates[l];
            if (rate == 0.0) continue;
            const double scale = 1.0 / (1.0 - rate);
            const Eigen::Index h = net.layers[l].hidden_size;
            masks[l].resize(static_cast<std::size_t>(steps));
            for (Eigen::Index t = 0; t < steps; ++t) {
                Eigen::MatrixXd mask(h, n);
                for (Eigen::Index r = 0; r < h; ++r) {
                    for (Eigen::Index col = 0; col < n; ++col) {
                        mask(r, col) = rng.uniform01() < rate ? 0.0 : scale;
                    }
                }
                masks[l][static_cast<std::size_t>(t)] = std::move(mask);
            }
        }

        Gradients grads;
        forward_backward(net, windows.inputs, windows.targets, &masks, &grads);

        const double bias1 = 1.0 - std::pow(kBeta1, epoch);
        const double bias2 = 1.0 - std::pow(kBeta2, epoch);
        for (std::size_t l = 0; l < n_layers; ++l) {
            auto& p = net.layers[l];
            adam_update(p.W_i, m.layers[l].W_i, v.layers[l].W_i,
                        grads.layers[l].W_i, bias1, bias2);
            adam_update(p.W_f, m.layers[l].W_f, v.layers[l].W_f,
                        grads.layers[l].W_f, bias1, bias2);
            adam_update(p.W_o, m.layers[l].W_o, v.layers[l].W_o,
                        grads.layers[l].W_o, bias1, bias2);
            adam_update(p.W_c, m.layers[l].W_c, v.layers[l].W_c,
                        grads.layers[l].W_c, bias1, bias2);
            adam_update_vec(p.b_i, m.layers[l].b_i, v.layers[l].b_i,
                            grads.layers[l].b_i, bias1, bias2);
            adam_update_vec(p.b_f, m.layers[l].b_f, v.layers[l].b_f,
                            grads.layers[l].b_f, bias1, bias2);
            adam_update_vec(p.b_o, m.layers[l].b_o, v.layers[l].b_o,
                            grads.layers[l].b_o, bias1, bias2);
            adam_update_vec(p.b_c, m.layers[l].b_c, v.layers[l].b_c,
                            grads.layers[l].b_c, bias1, bias2);
        }
        adam_update(net.dense_W, m.dense_W, v.dense_W, grads.dense_W, bias1,
                    bias2);
        adam_update_vec(net.dense_b, m.dense_b, v.dense_b, grads.dense_b,
                        bias1, bias2);
    }
    return result;
}

namespace {

// Visits parameters in the declared serialization order.
template <typename Fn>
void visit_params(LstmNetwork& net, Fn&& fn) {
    for (auto& layer : net.layers) {
        for (auto* w : {&layer.W_i, &layer.W_f, &layer.W_o, &layer.W_c}) {
            for (Eigen::Index r = 0; r < w->rows(); ++r) {
                for (Eigen::Index c = 0; c < w->cols(); ++c) fn((*w)(r, c));
            }
        }
        for (auto* b : {&layer.b_i, &layer.b_f, &layer.b_o, &layer.b_c}) {
            for (Eigen::Index i = 0; i < b->size(); ++i) fn((*b)(i));
        }
    }
    for (Eigen::Index r = 0; r < net.dense_W.rows(); ++r) {
        for (Eigen::Index c = 0; c < net.dense_W.cols(); ++c) {
            fn(net.dense_W(r, c));
        }
    }
    for (Eigen::Index i = 0; i < net.dense_b.size(); ++i) fn(net.dense_b(i));
}

template <typename Fn>
void visit_gradients(const Gradients& grads, Fn&& fn) {
    for (const auto& layer : grads.layers) {
        for (const auto* w : {&layer.W_i, &layer.W_f, &layer.W_o, &layer.W_c}) {
            for (Eigen::Index r = 0; r < w->rows(); ++r) {
                for (Eigen::Index c = 0; c < w->cols(); ++c) fn((*w)(r, c));
            }
        }
        for (const auto* b : {&layer.b_i, &layer.b_f, &layer.b_o, &layer.b_c}) {
            for (Eigen::Index i = 0; i < b->size(); ++i) fn((*b)(i));
        }
    }
    for (Eigen::Index r = 0; r < grads.dense_W.rows(); ++r) {
        for (Eigen::Index c = 0; c < grads.dense_W.cols(); ++c) {
            fn(grads.dense_W(r, c));
        }
    }
    for (Eigen::Index i = 0; i < grads.dense_b.size(); ++i) {
        fn(grads.dense_b(i));
    }
}

}  // namespace

int param_count(const LstmNetwork& net) {
    int count = 0;
    visit_params(const_cast<LstmNetwork&>(net), [&](double&) { ++count; });
    return count;
}

double get_param(const LstmNetwork& net, int flat_index) {
    double out = 0.0;
    int i = 0;
    visit_params(const_cast<LstmNetwork&>(net), [&](double& v) {
        if (i++ == flat_index) out = v;
    });
    if (flat_index < 0 || flat_index >= i) {
        throw std::out_of_range("parameter index out of range");
    }
    return out;
}

void set_param(LstmNetwork& net, int flat_index, double value) {
    int i = 0;
    visit_params(net, [&](double& v) {
        if (i++ == flat_index) v = value;
    });
    if (flat_index < 0 || flat_index >= i) {
        throw std::out_of_range("parameter index out of range");
    }
}

std::vector<GradientSample> gradient_samples(const LstmNetwork& net,
                                             const Eigen::MatrixXd& sequence,
                                             const Eigen::Vector2d& target,
                                             int n_samples, uint64_t seed) {
    check_network(net);
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");

    // Single-window batch, dropout off.
    Eigen::MatrixXd inputs(1, sequence.rows() * 2);
    for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
        inputs(0, 2 * t) = sequence(t, 0);
        inputs(0, 2 * t + 1) = sequence(t, 1);
    }
    Eigen::MatrixXd targets(1, 2);
    targets << target(0), target(1);

    Gradients grads;
    forward_backward(net, inputs, targets, nullptr, &grads);
    std::vector<double> analytic;
    visit_gradients(grads, [&](double g) { analytic.push_back(g); });

    const int total = static_cast<int>(analytic.size());
    const int samples = std::min(n_samples, total);
    Rng rng(seed);
    std::vector<int> indices(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) indices[static_cast<std::size_t>(i)] = i;
    // Fisher-Yates prefix shuffle to pick distinct parameters.
    for (int i = 0; i < samples; ++i) {
        const int j =
            i + static_cast<int>(rng.next_u64() %
                                 static_cast<uint64_t>(total - i));
        std::swap(indices[static_cast<std::size_t>(i)],
                  indices[static_cast<std::size_t>(j)]);
    }

    constexpr double kStep = 1e-5;
    LstmNetwork probe = net;
    std::vector<GradientSample> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const int idx = indices[static_cast<std::size_t>(s)];
        const double original = get_param(probe, idx);

        set_param(probe, idx, original + kStep);
        const double up =
            forward_backward(probe, inputs, targets, nullptr, nullptr);
        set_param(probe, idx, original - kStep);
        const double down =
            forward_backward(probe, inputs, targets, nullptr, nullptr);
        set_param(probe, idx, original);

        out.push_back({idx, analytic[static_cast<std::size_t>(idx)],
                       (up - down) / (2.0 * kStep)});
    }
    return out;
}

double gradient_check(const LstmNetwork& net, const Eigen::MatrixXd& sequence,
                      const Eigen::Vector2d& target, int n_samples,
                      uint64_t seed) {
    double max_rel = 0.0;
    for (const auto& s : gradient_samples(net, sequence, target, n_samples, seed)) {
        const double rel = std::abs(s.analytic - s.numeric) /
                           std::max(1e-8, std::abs(s.analytic) +
                                              std::abs(s.numeric));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

Eigen::MatrixXd window_row_to_sequence(const Eigen::RowVectorXd& row) {
    if (row.size() == 0 || row.size() % 2 != 0) {
        throw ShapeError("window row must interleave two channels");
    }
    const Eigen::Index steps = row.size() / 2;
    Eigen::MatrixXd seq(steps, 2);
    for (Eigen::Index t = 0; t < steps; ++t) {
        seq(t, 0) = row(2 * t);
        seq(t, 1) = row(2 * t + 1);
    }
    return seq;
}

KvPairs network_to_kv(const LstmNetwork& net) {
    check_network(net);
    KvPairs kv;
    kv.emplace_back("format_version", "1");
    kv.emplace_back("architecture", architecture_name(net.architecture));
    kv.emplace_back("input_size", std::to_string(net.input_size));

    std::string dims;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (l > 0) dims += ',';
        dims += std::to_string(net.layers[l].hidden_size);
    }
    kv.emplace_back("layer_dims", dims);
    kv.emplace_back("dropout_rates", join_doubles(net.dropout_rates));

    auto matrix_values = [](const Eigen::MatrixXd& m) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
        }
        return values;
    };

    auto vector_values = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& p = net.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + "_";
        kv.emplace_back(prefix + "W_i", join_doubles(matrix_values(p.W_i)));
        kv.emplace_back(prefix + "W_f", join_doubles(matrix_values(p.W_f)));
        kv.emplace_back(prefix + "W_o", join_doubles(matrix_values(p.W_o)));
        kv.emplace_back(prefix + "W_c", join_doubles(matrix_values(p.W_c)));
        kv.emplace_back(prefix + "b_i", join_doubles(vector_values(p.b_i)));
        kv.emplace_back(prefix + "b_f", join_doubles(vector_values(p.b_f)));
        kv.emplace_back(prefix + "b_o", join_doubles(vector_values(p.b_o)));
        kv.emplace_back(prefix + "b_c", join_doubles(vector_values(p.b_c)));
    }
    kv.emplace_back("dense_W", join_doubles(matrix_values(net.dense_W)));
    kv.emplace_back("dense_b", join_doubles(vector_values(net.dense_b)));
    return kv;
}

LstmNetwork network_from_kv(const KvPairs& kv) {
    if (kv_get(kv, "format_version") != "1") {
        throw std::invalid_argument("unsupported network format version");
    }

    LstmNetwork net;
    net.architecture = architecture_from_name(kv_get(kv, "architecture"));
    net.input_size = static_cast<int>(parse_int(kv_get(kv, "input_size")));
    net.dropout_rates = parse_double_list(kv_get(kv, "dropout_rates"));

    std::vector<int> dims;
    for (const auto& piece : split(kv_get(kv, "layer_dims"), ',')) {
        dims.push_back(static_cast<int>(parse_int(piece)));
    }
    if (dims.empty()) throw std::invalid_argument("network needs layers");

    auto read_matrix = [&](const std::string& key, Eigen::Index rows,
                           Eigen::Index cols) {
        const auto values = parse_double_list(kv_get(kv, key));
        if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
            throw std::invalid_argument("wrong element count for " + key);
        }
        Eigen::MatrixXd m(rows, cols);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[k++];
        }
        return m;
    };
    auto read_vector = [&](const std::string& key, Eigen::Index size) {
        const auto values = parse_double_list(kv_get(kv, key));
        if (static_cast<Eigen::Index>(values.size()) != size) {
            throw std::invalid_argument("wrong element count for " + key);
        }
        return Eigen::Map<const Eigen::VectorXd>(values.data(), size).eval();
    };

    int input = net.input_size;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const int hidden = dims[l];
        const std::string prefix = "layer" + std::to_string(l) + "_";
        LstmLayerParams p;
        p.hidden_size = hidden;
        p.input_size = input;
        p.W_i = read_matrix(prefix + "W_i", hidden, hidden + input);
        p.W_f = read_matrix(prefix + "W_f", hidden, hidden + input);
        p.W_o = read_matrix(prefix + "W_o", hidden, hidden + input);
        p.W_c = read_matrix(prefix + "W_c", hidden, hidden + input);
        p.b_i = read_vector(prefix + "b_i", hidden);
        p.b_f = read_vector(prefix + "b_f", hidden);
        p.b_o = read_vector(prefix + "b_o", hidden);
        p.b_c = read_vector(prefix + "b_c", hidden);
        net.layers.push_back(std::move(p));
        input = hidden;
    }
    net.dense_W = read_matrix("dense_W", 2, input);
    net.dense_b = read_vector("dense_b", 2);
    check_network(net);
    return net;
}

}  // namespace cyclecast::lstm
