#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "watertwin/forecast.hpp"
#include "watertwin/rng.hpp"
#include "watertwin/timeseries.hpp"

namespace watertwin::models {

namespace lstm_detail {

// inputs are clamped so the activations never round to an exact 0 or 1,
// keeping the open-interval gate invariant even when saturated
inline double sigmoid(double x) {
    x = std::clamp(x, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-x));
}

inline double tanh_safe(double x) { return std::tanh(std::clamp(x, -18.0, 18.0)); }

}  // namespace lstm_detail

/// All trainable parameters of a single-layer network with a scalar output.
/// Gate matrices are row-major, hidden x (hidden + input), acting on the
/// concatenation [previous hidden state, current input].
struct LstmWeights {
    int input = 0;
    int hidden = 0;
    std::vector<double> w_f, b_f;  // forget gate
    std::vector<double> w_i, b_i;  // input gate
    std::vector<double> w_c, b_c;  // candidate cell state
    std::vector<double> w_o, b_o;  // output gate
    std::vector<double> w_y;       // dense readout, hidden -> 1
    double b_y = 0.0;

    static LstmWeights zeros(int input, int hidden) {
        if (input < 1 || hidden < 1)
            throw std::invalid_argument("network needs input >= 1 and hidden >= 1");
        LstmWeights w;
        w.input = input;
        w.hidden = hidden;
        std::size_t gate = static_cast<std::size_t>(hidden) * static_cast<std::size_t>(hidden + input);
        std::size_t h = static_cast<std::size_t>(hidden);
        w.w_f.assign(gate, 0.0);
        w.w_i.assign(gate, 0.0);
        w.w_c.assign(gate, 0.0);
        w.w_o.assign(gate, 0.0);
        w.b_f.assign(h, 0.0);
        w.b_i.assign(h, 0.0);
        w.b_c.assign(h, 0.0);
        w.b_o.assign(h, 0.0);
        w.w_y.assign(h, 0.0);
        return w;
    }

    /// Uniform in +-1/sqrt(fan-in); forget bias starts at 1 so early training
    /// remembers by default.
    static LstmWeights seeded(int input, int hidden, Rng& rng) {
        LstmWeights w = zeros(input, hidden);
        double s = 1.0 / std::sqrt(static_cast<double>(hidden + input));
        for (auto* m : {&w.w_f, &w.w_i, &w.w_c, &w.w_o})
            for (double& v : *m) v = rng.uniform(-s, s);
        for (double& v : w.b_f) v = 1.0;
        double sy = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (double& v : w.w_y) v = rng.uniform(-sy, sy);
        return w;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        for (const auto* v : {&w_f, &b_f, &w_i, &b_i, &w_c, &b_c, &w_o, &b_o, &w_y})
            out.insert(out.end(), v->begin(), v->end());
        out.push_back(b_y);
        return out;
    }

    void unflatten(const std::vector<double>& flat) {
        std::size_t pos = 0;
        for (auto* v : {&w_f, &b_f, &w_i, &b_i, &w_c, &b_c, &w_o, &b_o, &w_y}) {
            std::copy(flat.begin() + static_cast<long>(pos),
                      flat.begin() + static_cast<long>(pos + v->size()), v->begin());
            pos += v->size();
        }
        b_y = flat[pos++];
        if (pos != flat.size()) throw std::invalid_argument("flat vector has the wrong length");
    }

    std::size_t n_params() const { return flatten().size(); }
};

/// Per-timestep activations kept for backpropagation.
struct LstmStep {
    std::vector<double> f, i, c_bar, o, c, h;
};

struct LstmForward {
    std::vector<LstmStep> steps;
    double prediction = 0.0;
};

/// Run one sequence through the cell equations:
///   f = sig(Wf.[h,x]+bf)   i = sig(Wi.[h,x]+bi)   c~ = tanh(Wc.[h,x]+bc)
///   C = f*C_prev + i*c~    o = sig(Wo.[h,x]+bo)   h = o*tanh(C)
/// starting from zero states, then read out w_y.h + b_y at the last step.
inline LstmForward lstm_forward(const LstmWeights& w,
                                const std::vector<std::vector<double>>& sequence) {
    if (sequence.empty()) throw std::invalid_argument("empty input sequence");
    std::size_t h = static_cast<std::size_t>(w.hidden);
    std::size_t z_len = static_cast<std::size_t>(w.hidden + w.input);

    LstmForward out;
    std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0), z(z_len, 0.0);
    for (const auto& x : sequence) {
        if (x.size() != static_cast<std::size_t>(w.input))
            throw std::invalid_argument("input width " + std::to_string(x.size()) +
                                        " does not match the network (" +
                                        std::to_string(w.input) + ")");
        std::copy(h_prev.begin(), h_prev.end(), z.begin());
        std::copy(x.begin(), x.end(), z.begin() + static_cast<long>(h));

        LstmStep st;
        st.f.resize(h);
        st.i.resize(h);
        st.c_bar.resize(h);
        st.o.resize(h);
        st.c.resize(h);
        st.h.resize(h);
        for (std::size_t r = 0; r < h; ++r) {
            const double* wf = &w.w_f[r * z_len];
            const double* wi = &w.w_i[r * z_len];
            const double* wc = &w.w_c[r * z_len];
            const double* wo = &w.w_o[r * z_len];
            double af = w.b_f[r], ai = w.b_i[r], ac = w.b_c[r], ao = w.b_o[r];
            for (std::size_t k = 0; k < z_len; ++k) {
                af += wf[k] * z[k];
                ai += wi[k] * z[k];
                ac += wc[k] * z[k];
                ao += wo[k] * z[k];
            }
            st.f[r] = lstm_detail::sigmoid(af);
            st.i[r] = lstm_detail::sigmoid(ai);
            st.c_bar[r] = lstm_detail::tanh_safe(ac);
            st.o[r] = lstm_detail::sigmoid(ao);
            assert(st.f[r] > 0.0 && st.f[r] < 1.0);
            assert(st.i[r] > 0.0 && st.i[r] < 1.0);
            assert(st.o[r] > 0.0 && st.o[r] < 1.0);
            assert(st.c_bar[r] > -1.0 && st.c_bar[r] < 1.0);
            st.c[r] = st.f[r] * c_prev[r] + st.i[r] * st.c_bar[r];
            st.h[r] = st.o[r] * lstm_detail::tanh_safe(st.c[r]);
        }
        h_prev = st.h;
        c_prev = st.c;
        out.steps.push_back(std::move(st));
    }
    out.prediction = w.b_y;
    for (std::size_t r = 0; r < h; ++r) out.prediction += w.w_y[r] * h_prev[r];
    return out;
}

/// Squared error of one sequence.
inline double lstm_loss(const LstmWeights& w, const std::vector<std::vector<double>>& sequence,
                        double target) {
    double d = lstm_forward(w, sequence).prediction - target;
    return d * d;
}

/// Gradient of the squared error via backpropagation through time. Shapes
/// mirror the weights; accumulate into `grad` (callers zero it first).
inline void lstm_backward(const LstmWeights& w, const std::vector<std::vector<double>>& sequence,
                          const LstmForward& fwd, double target, LstmWeights& grad) {
    std::size_t h = static_cast<std::size_t>(w.hidden);
    std::size_t z_len = static_cast<std::size_t>(w.hidden + w.input);
    std::size_t T = sequence.size();

    double dpred = 2.0 * (fwd.prediction - target);
    std::vector<double> dh(h, 0.0), dc(h, 0.0), dz(z_len, 0.0);
    for (std::size_t r = 0; r < h; ++r) {
        dh[r] = dpred * w.w_y[r];
        grad.w_y[r] += dpred * fwd.steps[T - 1].h[r];
    }
    grad.b_y += dpred;

    for (std::size_t t = T; t-- > 0;) {
        const LstmStep& st = fwd.steps[t];
        const std::vector<double>* h_prev = t > 0 ? &fwd.steps[t - 1].h : nullptr;
        const std::vector<double>* c_prev = t > 0 ? &fwd.steps[t - 1].c : nullptr;
        std::fill(dz.begin(), dz.end(), 0.0);

        for (std::size_t r = 0; r < h; ++r) {
            double tc = lstm_detail::tanh_safe(st.c[r]);
            double do_r = dh[r] * tc;
            double dc_r = dc[r] + dh[r] * st.o[r] * (1.0 - tc * tc);

            double dcb = dc_r * st.i[r];
            double di = dc_r * st.c_bar[r];
            double df = dc_r * (c_prev ? (*c_prev)[r] : 0.0);

            double do_pre = do_r * st.o[r] * (1.0 - st.o[r]);
            double dcb_pre = dcb * (1.0 - st.c_bar[r] * st.c_bar[r]);
            double di_pre = di * st.i[r] * (1.0 - st.i[r]);
            double df_pre = df * st.f[r] * (1.0 - st.f[r]);

            std::size_t base = r * z_len;
            for (std::size_t k = 0; k < z_len; ++k) {
                double zk = k < h ? (h_prev ? (*h_prev)[k] : 0.0)
                                  : sequence[t][k - h];
                grad.w_f[base + k] += df_pre * zk;
                grad.w_i[base + k] += di_pre * zk;
                grad.w_c[base + k] += dcb_pre * zk;
                grad.w_o[base + k] += do_pre * zk;
                dz[k] += w.w_f[base + k] * df_pre + w.w_i[base + k] * di_pre +
                         w.w_c[base + k] * dcb_pre + w.w_o[base + k] * do_pre;
            }
            grad.b_f[r] += df_pre;
            grad.b_i[r] += di_pre;
            grad.b_c[r] += dcb_pre;
            grad.b_o[r] += do_pre;

            dc[r] = dc_r * st.f[r];
        }
        for (std::size_t r = 0; r < h; ++r) dh[r] = dz[r];
    }
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences over every parameter. Healthy implementations sit
/// around 1e-9; anything above 1e-4 means the backward pass is wrong.
inline double lstm_gradient_check(const LstmWeights& w,
                                  const std::vector<std::vector<double>>& sequence, double target,
                                  double step = 1e-5) {
    LstmWeights grad = LstmWeights::zeros(w.input, w.hidden);
    lstm_backward(w, sequence, lstm_forward(w, sequence), target, grad);
    std::vector<double> analytic = grad.flatten();
    std::vector<double> flat = w.flatten();

    double worst = 0.0;
    LstmWeights probe = w;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        std::vector<double> bumped = flat;
        bumped[k] = flat[k] + step;
        probe.unflatten(bumped);
        double up = lstm_loss(probe, sequence, target);
        bumped[k] = flat[k] - step;
        probe.unflatten(bumped);
        double down = lstm_loss(probe, sequence, target);
        double numeric = (up - down) / (2.0 * step);
        double denom = std::max({1.0, std::fabs(numeric), std::fabs(analytic[k])});
        worst = std::max(worst, std::fabs(numeric - analytic[k]) / denom);
    }
    return worst;
}

/// Sliding windows over feature rows: window t covers rows [t, t+len) and is
/// labeled with the target at row t+len, giving rows-len training pairs.
struct SequenceSet {
    std::vector<std::vector<std::vector<double>>> x;
    std::vector<double> y;
};

inline SequenceSet make_sequences(const std::vector<std::vector<double>>& rows,
                                  const std::vector<double>& target, int len) {
    if (len < 1) throw std::invalid_argument("sequence length must be >= 1");
    if (rows.size() != target.size())
        throw std::invalid_argument("feature rows and target lengths differ");
    if (rows.size() <= static_cast<std::size_t>(len))
        throw std::invalid_argument("need more than " + std::to_string(len) +
                                    " rows to build any training sequence");
    SequenceSet out;
    std::size_t n = rows.size() - static_cast<std::size_t>(len);
    for (std::size_t t = 0; t < n; ++t) {
        out.x.emplace_back(rows.begin() + static_cast<long>(t),
                           rows.begin() + static_cast<long>(t) + len);
        out.y.push_back(target[t + static_cast<std::size_t>(len)]);
    }
    return out;
}

struct LstmParams {
    int hidden = 16;
    int seq_len = 14;
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 0.01;
    double grad_clip = 5.0;  // global norm; 0 disables
    enum class Optimizer { adam, sgd };
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 42;
};

/// Recurrent forecaster over [target, regressors...] rows. Inputs and target
/// are min-max scaled internally; predictions come back in original units.
class LstmModel : public ForecastModel {
public:
    explicit LstmModel(LstmParams params = {}, std::string target = "consumption_m3",
                       std::vector<std::string> regressors = {})
        : params_(params), target_(std::move(target)), regressors_(std::move(regressors)) {
        if (params_.hidden < 1 || params_.seq_len < 1 || params_.epochs < 1 ||
            params_.batch_size < 1)
            throw std::invalid_argument("network sizes and epoch counts must be >= 1");
        if (!(params_.learning_rate > 0.0))
            throw std::invalid_argument("learning rate must be positive");
    }

    std::string name() const override { return "lstm"; }

    void train(const data::TimeSeriesFrame& frame) override {
        auto raw = gather_rows(frame, 0, frame.rows());
        const auto& y = frame.column(target_);

        fit_scalers(raw, y);
        auto rows = scale_rows(raw);
        std::vector<double> ys(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) ys[i] = scale_target(y[i]);

        auto set = make_sequences(rows, ys, params_.seq_len);
        Rng rng(params_.seed);
        weights_ = LstmWeights::seeded(static_cast<int>(input_width()), params_.hidden, rng);

        std::size_t n_params = weights_.n_params();
        std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
        long adam_t = 0;

        std::vector<std::size_t> order(set.x.size());
        std::iota(order.begin(), order.end(), 0);
        loss_trace_.clear();

        for (int epoch = 0; epoch < params_.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t at = 0; at < order.size();
                 at += static_cast<std::size_t>(params_.batch_size)) {
                std::size_t stop =
                    std::min(order.size(), at + static_cast<std::size_t>(params_.batch_size));
                LstmWeights grad = LstmWeights::zeros(weights_.input, weights_.hidden);
                for (std::size_t b = at; b < stop; ++b) {
                    auto fwd = lstm_forward(weights_, set.x[order[b]]);
                    lstm_backward(weights_, set.x[order[b]], fwd, set.y[order[b]], grad);
                }
                auto g = grad.flatten();
                double inv = 1.0 / static_cast<double>(stop - at);
                for (double& gv : g) gv *= inv;

                if (params_.grad_clip > 0.0) {
                    double norm = 0.0;
                    for (double gv : g) norm += gv * gv;
                    norm = std::sqrt(norm);
                    if (norm > params_.grad_clip) {
                        double f = params_.grad_clip / norm;
                        for (double& gv : g) gv *= f;
                    }
                }

                auto theta = weights_.flatten();
                if (params_.optimizer == LstmParams::Optimizer::adam) {
                    ++adam_t;
                    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                    double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
                    double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
                    for (std::size_t k = 0; k < n_params; ++k) {
                        m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                        v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                        theta[k] -= params_.learning_rate * (m[k] / c1) /
                                    (std::sqrt(v[k] / c2) + eps);
                    }
                } else {
                    for (std::size_t k = 0; k < n_params; ++k)
                        theta[k] -= params_.learning_rate * g[k];
                }
                weights_.unflatten(theta);
            }

            double loss = 0.0;
            for (std::size_t s = 0; s < set.x.size(); ++s)
                loss += lstm_loss(weights_, set.x[s], set.y[s]);
            loss /= static_cast<double>(set.x.size());
            loss_trace_.push_back(loss);
            if (!std::isfinite(loss) || loss > 1e12)
                throw std::runtime_error("lstm training diverged at epoch " +
                                         std::to_string(epoch + 1) +
                                         "; lower the learning rate");
        }
        trained_ = true;
    }

    std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                std::size_t end) const override {
        if (!trained_) throw std::logic_error("predict before train");
        if (begin >= end || end > frame.rows()) throw std::out_of_range("bad prediction range");
        if (begin < static_cast<std::size_t>(params_.seq_len))
            throw std::invalid_argument("need " + std::to_string(params_.seq_len) +
                                        " history rows before row " + std::to_string(begin));
        auto raw = gather_rows(frame, begin - static_cast<std::size_t>(params_.seq_len), end);
        auto rows = scale_rows(raw);

        std::vector<double> out;
        for (std::size_t r = begin; r < end; ++r) {
            std::size_t off = r - begin;  // rows[off .. off+seq_len) ends just before r
            std::vector<std::vector<double>> window(
                rows.begin() + static_cast<long>(off),
                rows.begin() + static_cast<long>(off) + params_.seq_len);
            out.push_back(unscale_target(lstm_forward(weights_, window).prediction));
        }
        return out;
    }

    const LstmWeights& weights() const { return weights_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }
    const LstmParams& params() const { return params_; }

    /// Versioned snapshot of everything predict() needs.
    void save_checkpoint(const std::string& path) const {
        if (!trained_) throw std::logic_error("nothing to save before training");
        nlohmann::json j;
        j["format"] = "watertwin_lstm_checkpoint";
        j["version"] = 1;
        j["target"] = target_;
        j["regressors"] = regressors_;
        j["hidden"] = params_.hidden;
        j["seq_len"] = params_.seq_len;
        j["feature_lo"] = feat_lo_;
        j["feature_hi"] = feat_hi_;
        j["target_lo"] = target_lo_;
        j["target_hi"] = target_hi_;
        nlohmann::json wj;
        wj["w_f"] = weights_.w_f;
        wj["b_f"] = weights_.b_f;
        wj["w_i"] = weights_.w_i;
        wj["b_i"] = weights_.b_i;
        wj["w_c"] = weights_.w_c;
        wj["b_c"] = weights_.b_c;
        wj["w_o"] = weights_.w_o;
        wj["b_o"] = weights_.b_o;
        wj["w_y"] = weights_.w_y;
        wj["b_y"] = weights_.b_y;
        j["weights"] = std::move(wj);
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write checkpoint to " + path);
        out << j.dump(2) << "\n";
    }

    static LstmModel load_checkpoint(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read checkpoint from " + path);
        nlohmann::json j = nlohmann::json::parse(in);
        if (j.value("format", "") != "watertwin_lstm_checkpoint")
            throw std::runtime_error(path + " is not a network checkpoint");
        if (j.value("version", 0) != 1)
            throw std::runtime_error("unsupported checkpoint version " +
                                     std::to_string(j.value("version", 0)));

        LstmParams p;
        p.hidden = j.at("hidden").get<int>();
        p.seq_len = j.at("seq_len").get<int>();
        LstmModel model(p, j.at("target").get<std::string>(),
                        j.at("regressors").get<std::vector<std::string>>());
        model.feat_lo_ = j.at("feature_lo").get<std::vector<double>>();
        model.feat_hi_ = j.at("feature_hi").get<std::vector<double>>();
        model.target_lo_ = j.at("target_lo").get<double>();
        model.target_hi_ = j.at("target_hi").get<double>();

        const auto& wj = j.at("weights");
        model.weights_ = LstmWeights::zeros(static_cast<int>(model.input_width()), p.hidden);
        model.weights_.w_f = wj.at("w_f").get<std::vector<double>>();
        model.weights_.b_f = wj.at("b_f").get<std::vector<double>>();
        model.weights_.w_i = wj.at("w_i").get<std::vector<double>>();
        model.weights_.b_i = wj.at("b_i").get<std::vector<double>>();
        model.weights_.w_c = wj.at("w_c").get<std::vector<double>>();
        model.weights_.b_c = wj.at("b_c").get<std::vector<double>>();
        model.weights_.w_o = wj.at("w_o").get<std::vector<double>>();
        model.weights_.b_o = wj.at("b_o").get<std::vector<double>>();
        model.weights_.w_y = wj.at("w_y").get<std::vector<double>>();
        model.weights_.b_y = wj.at("b_y").get<double>();

        std::size_t gate = static_cast<std::size_t>(p.hidden) *
                           (static_cast<std::size_t>(p.hidden) + model.input_width());
        if (model.weights_.w_f.size() != gate || model.weights_.b_f.size() !=
                                                     static_cast<std::size_t>(p.hidden))
            throw std::runtime_error("checkpoint weight shapes are inconsistent");
        model.trained_ = true;
        return model;
    }

private:
    std::size_t input_width() const { return 1 + regressors_.size(); }

    std::vector<std::vector<double>> gather_rows(const data::TimeSeriesFrame& frame,
                                                 std::size_t begin, std::size_t end) const {
        std::vector<const std::vector<double>*> cols;
        cols.push_back(&frame.column(target_));
        for (const auto& r : regressors_) cols.push_back(&frame.column(r));

        std::vector<std::vector<double>> rows;
        for (std::size_t t = begin; t < end; ++t) {
            std::vector<double> row;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                double v = (*cols[c])[t];
                if (data::is_missing(v))
                    throw std::invalid_argument(
                        "missing value at " + frame.dates[t].to_string() + " in column '" +
                        (c == 0 ? target_ : regressors_[c - 1]) + "'; fill gaps before training");
                row.push_back(v);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

    void fit_scalers(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
        std::size_t w = input_width();
        feat_lo_.assign(w, std::numeric_limits<double>::infinity());
        feat_hi_.assign(w, -std::numeric_limits<double>::infinity());
        for (const auto& row : rows)
            for (std::size_t c = 0; c < w; ++c) {
                feat_lo_[c] = std::min(feat_lo_[c], row[c]);
                feat_hi_[c] = std::max(feat_hi_[c], row[c]);
            }
        target_lo_ = *std::min_element(y.begin(), y.end());
        target_hi_ = *std::max_element(y.begin(), y.end());
        if (!(target_hi_ > target_lo_))
            throw std::invalid_argument("target column is constant; nothing to learn");
    }

    std::vector<std::vector<double>> scale_rows(const std::vector<std::vector<double>>& rows) const {
        std::vector<std::vector<double>> out = rows;
        for (auto& row : out)
            for (std::size_t c = 0; c < row.size(); ++c) {
                double span = feat_hi_[c] - feat_lo_[c];
                row[c] = span > 0.0 ? (row[c] - feat_lo_[c]) / span : 0.0;
            }
        return out;
    }

    double scale_target(double v) const { return (v - target_lo_) / (target_hi_ - target_lo_); }
    double unscale_target(double v) const { return target_lo_ + v * (target_hi_ - target_lo_); }

    LstmParams params_;
    std::string target_;
    std::vector<std::string> regressors_;
    LstmWeights weights_;
    std::vector<double> feat_lo_, feat_hi_;
    double target_lo_ = 0.0, target_hi_ = 1.0;
    std::vector<double> loss_trace_;
    bool trained_ = false;
};

}  // namespace watertwin::models
