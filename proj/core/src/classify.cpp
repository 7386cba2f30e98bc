#include "in2v/classify.hpp"

#include <algorithm>
#include <cmath>

#include "in2v/errors.hpp"
#include "in2v/rng.hpp"

namespace in2v {

namespace {

std::int32_t argmax_lowest(std::span<const float> scores) {
    std::int32_t best = 0;
    for (std::int32_t c = 1; c < static_cast<std::int32_t>(scores.size()); ++c)
        if (scores[c] > scores[best]) best = c;
    return best;
}

// Stable softmax in place; returns log-sum-exp for the loss. Loss paths stay
// in double so finite-difference checks of the float parameters are exact.
double softmax_inplace(std::span<double> z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& x : z) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (auto& x : z) x /= sum;
    return std::log(sum) + mx;
}

std::int32_t count_classes(const std::vector<std::int32_t>& y,
                           const std::vector<NodeId>& idx) {
    std::int32_t mx = -1;
    for (NodeId i : idx) mx = std::max(mx, y[i]);
    return mx + 1;
}

} // namespace

std::int32_t LinearModel::predict(std::span<const float> x) const {
    std::vector<float> scores(bias.begin(), bias.end());
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        const float* w = weights.data() + static_cast<std::size_t>(c) * in_dim;
        double s = scores[c];
        for (std::uint32_t k = 0; k < in_dim; ++k) s += static_cast<double>(w[k]) * x[k];
        scores[c] = static_cast<float>(s);
    }
    return argmax_lowest(scores);
}

double logreg_loss_and_grad(const LinearModel& model, const FeatureMatrix& X,
                            const std::vector<std::int32_t>& y,
                            const std::vector<NodeId>& idx, double l2,
                            std::vector<double>& grad_w, std::vector<double>& grad_b) {
    const std::uint32_t D = model.in_dim;
    const std::uint32_t C = model.num_classes;
    grad_w.assign(static_cast<std::size_t>(C) * D, 0.0);
    grad_b.assign(C, 0.0);
    const double inv_n = 1.0 / static_cast<double>(idx.size());
    std::vector<double> probs(C);
    double loss = 0.0;
    for (NodeId i : idx) {
        auto x = X.row(i);
        for (std::uint32_t c = 0; c < C; ++c) {
            const float* w = model.weights.data() + static_cast<std::size_t>(c) * D;
            double s = model.bias[c];
            for (std::uint32_t k = 0; k < D; ++k) s += static_cast<double>(w[k]) * x[k];
            probs[c] = s;
        }
        const double true_logit = probs[y[i]];
        const double lse = softmax_inplace(probs);
        loss += (lse - true_logit) * inv_n;
        for (std::uint32_t c = 0; c < C; ++c) {
            const double err =
                (probs[c] - (c == static_cast<std::uint32_t>(y[i]) ? 1.0 : 0.0)) * inv_n;
            grad_b[c] += err;
            double* g = grad_w.data() + static_cast<std::size_t>(c) * D;
            for (std::uint32_t k = 0; k < D; ++k) g[k] += err * x[k];
        }
    }
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        loss += 0.5 * l2 * model.weights[k] * model.weights[k];
        grad_w[k] += l2 * model.weights[k];
    }
    return loss;
}

LinearModel train_logreg(const FeatureMatrix& X, const std::vector<std::int32_t>& y,
                         const std::vector<NodeId>& train_idx, double l2) {
    if (train_idx.empty()) throw ValidationError("train_logreg: empty training set");
    const std::int32_t num_classes = count_classes(y, train_idx);
    {
        std::int32_t first = y[train_idx.front()];
        bool multi = false;
        for (NodeId i : train_idx)
            if (y[i] != first) multi = true;
        if (!multi) throw DegenerateInputError("train_logreg: single-class training set");
    }
    const std::uint32_t D = static_cast<std::uint32_t>(X.dim);
    const std::uint32_t C = static_cast<std::uint32_t>(num_classes);

    LinearModel model;
    model.in_dim = D;
    model.num_classes = C;
    model.weights.assign(static_cast<std::size_t>(C) * D, 0.0f);
    model.bias.assign(C, 0.0f);

    std::vector<double> gw, gb;
    auto eval = [&](double& loss) {
        loss = logreg_loss_and_grad(model, X, y, train_idx, l2, gw, gb);
        double sq = 0.0;
        for (double g : gw) sq += g * g;
        for (double g : gb) sq += g * g;
        return std::sqrt(sq);
    };

    // Plain gradient descent with a deterministic adaptive step.
    double lr = 1.0;
    double loss = 0.0;
    double grad_norm = eval(loss);
    for (int step = 0; step < 2000 && grad_norm >= 1e-5; ++step) {
        const std::vector<float> prev_w = model.weights;
        const std::vector<float> prev_b = model.bias;
        const double prev_loss = loss;
        for (std::size_t k = 0; k < model.weights.size(); ++k)
            model.weights[k] -= static_cast<float>(lr * gw[k]);
        for (std::uint32_t c = 0; c < C; ++c) model.bias[c] -= static_cast<float>(lr * gb[c]);
        grad_norm = eval(loss);
        if (!std::isfinite(loss) || loss > prev_loss) {
            model.weights = prev_w;
            model.bias = prev_b;
            lr *= 0.5;
            grad_norm = eval(loss);
            if (lr < 1e-12) break;
        } else {
            lr = std::min(lr * 1.1, 100.0);
        }
    }
    return model;
}

std::vector<float> MlpModel::logits(std::span<const float> x) const {
    std::vector<float> cur(x.begin(), x.end());
    std::vector<float> jk;
    const std::size_t num_hidden = weights.size() - 1;
    for (std::size_t l = 0; l < num_hidden; ++l) {
        const std::uint32_t out = hidden;
        const std::uint32_t in = static_cast<std::uint32_t>(cur.size());
        std::vector<float> nxt(out);
        for (std::uint32_t o = 0; o < out; ++o) {
            const float* w = weights[l].data() + static_cast<std::size_t>(o) * in;
            double s = biases[l][o];
            for (std::uint32_t k = 0; k < in; ++k) s += static_cast<double>(w[k]) * cur[k];
            nxt[o] = s > 0 ? static_cast<float>(s) : 0.0f; // ReLU
        }
        if (jumping_knowledge) jk.insert(jk.end(), nxt.begin(), nxt.end());
        cur = std::move(nxt);
    }
    const std::vector<float>& head_in = jumping_knowledge && num_hidden > 0 ? jk : cur;
    const std::uint32_t in = static_cast<std::uint32_t>(head_in.size());
    std::vector<float> out(num_classes);
    for (std::uint32_t c = 0; c < num_classes; ++c) {
        const float* w = weights.back().data() + static_cast<std::size_t>(c) * in;
        double s = biases.back()[c];
        for (std::uint32_t k = 0; k < in; ++k) s += static_cast<double>(w[k]) * head_in[k];
        out[c] = static_cast<float>(s);
    }
    return out;
}

std::int32_t MlpModel::predict(std::span<const float> x) const {
    auto z = logits(x);
    return argmax_lowest(z);
}

double mlp_loss_and_grad(const MlpModel& model, const FeatureMatrix& X,
                         const std::vector<std::int32_t>& y, const std::vector<NodeId>& idx,
                         double dropout, double weight_decay, Rng* drop_rng,
                         MlpGrads& grads) {
    const std::size_t B = idx.size();
    const std::uint32_t D = model.in_dim;
    const std::uint32_t C = model.num_classes;
    const std::uint32_t H = model.hidden;
    const std::size_t num_hidden = model.weights.size() - 1;
    const std::uint32_t head_in =
        num_hidden == 0 ? D
                        : (model.jumping_knowledge ? H * static_cast<std::uint32_t>(num_hidden)
                                                   : H);
    if (drop_rng == nullptr) dropout = 0.0;

    grads.w.assign(model.weights.size(), {});
    grads.b.assign(model.biases.size(), {});
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        grads.w[l].assign(model.weights[l].size(), 0.0);
        grads.b[l].assign(model.biases[l].size(), 0.0);
    }

    // forward; activations in double so the loss is FD-checkable
    std::vector<std::vector<double>> act(num_hidden + 1); // post-ReLU/post-dropout
    std::vector<std::vector<bool>> keep(num_hidden);
    act[0].assign(B * D, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        auto x = X.row(idx[i]);
        std::copy(x.begin(), x.end(), act[0].begin() + i * D);
    }
    std::vector<double> jk;
    if (model.jumping_knowledge) jk.assign(B * head_in, 0.0);
    std::uint32_t cur_in = D;
    for (std::size_t l = 0; l < num_hidden; ++l) {
        act[l + 1].assign(B * H, 0.0);
        keep[l].assign(B * H, true);
        for (std::size_t i = 0; i < B; ++i) {
            const double* xin = act[l].data() + i * cur_in;
            double* xout = act[l + 1].data() + i * H;
            for (std::uint32_t o = 0; o < H; ++o) {
                const float* w = model.weights[l].data() + static_cast<std::size_t>(o) * cur_in;
                double s = model.biases[l][o];
                for (std::uint32_t k = 0; k < cur_in; ++k) s += static_cast<double>(w[k]) * xin[k];
                double a = s > 0 ? s : 0.0;
                if (dropout > 0.0) {
                    if (drop_rng->next_double() < dropout) {
                        keep[l][i * H + o] = false;
                        a = 0.0;
                    } else {
                        a /= 1.0 - dropout;
                    }
                }
                xout[o] = a;
            }
            if (model.jumping_knowledge)
                std::copy(xout, xout + H, jk.begin() + i * head_in + l * H);
        }
        cur_in = H;
    }
    const std::vector<double>& head_src = num_hidden == 0      ? act[0]
                                          : model.jumping_knowledge ? jk
                                                                    : act[num_hidden];
    // head forward + loss gradient
    std::vector<double> head_delta(B * head_in, 0.0);
    const double inv_b = 1.0 / static_cast<double>(B);
    std::vector<double> z(C);
    double loss = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        const double* xin = head_src.data() + i * head_in;
        for (std::uint32_t c = 0; c < C; ++c) {
            const float* w = model.weights.back().data() + static_cast<std::size_t>(c) * head_in;
            double s = model.biases.back()[c];
            for (std::uint32_t k = 0; k < head_in; ++k) s += static_cast<double>(w[k]) * xin[k];
            z[c] = s;
        }
        const double true_logit = z[y[idx[i]]];
        const double lse = softmax_inplace(z); // z now holds probabilities
        loss += (lse - true_logit) * inv_b;
        for (std::uint32_t c = 0; c < C; ++c) {
            const double err =
                (z[c] - (c == static_cast<std::uint32_t>(y[idx[i]]) ? 1.0 : 0.0)) * inv_b;
            grads.b.back()[c] += err;
            double* g = grads.w.back().data() + static_cast<std::size_t>(c) * head_in;
            const float* w = model.weights.back().data() + static_cast<std::size_t>(c) * head_in;
            double* dl = head_delta.data() + i * head_in;
            for (std::uint32_t k = 0; k < head_in; ++k) {
                g[k] += err * xin[k];
                dl[k] += err * w[k];
            }
        }
    }
    if (!std::isfinite(loss)) throw NumericalError("mlp loss is non-finite");
    if (weight_decay > 0.0) {
        for (std::size_t k = 0; k < grads.w.back().size(); ++k) {
            loss += 0.5 * weight_decay * model.weights.back()[k] * model.weights.back()[k];
            grads.w.back()[k] += weight_decay * model.weights.back()[k];
        }
    }

    // backprop through hidden layers (reverse order)
    std::vector<double> cur_delta; // error w.r.t. act[l+1]
    for (std::size_t li = num_hidden; li-- > 0;) {
        const std::uint32_t lin = li == 0 ? D : H;
        std::vector<double> dl_act(B * H, 0.0);
        if (model.jumping_knowledge) {
            for (std::size_t i = 0; i < B; ++i)
                for (std::uint32_t o = 0; o < H; ++o)
                    dl_act[i * H + o] = head_delta[i * head_in + li * H + o];
            if (li + 1 < num_hidden)
                for (std::size_t k = 0; k < dl_act.size(); ++k) dl_act[k] += cur_delta[k];
        } else if (li + 1 == num_hidden) {
            dl_act.assign(head_delta.begin(), head_delta.end());
        } else {
            dl_act = cur_delta;
        }
        // through dropout + ReLU
        for (std::size_t i = 0; i < B; ++i)
            for (std::uint32_t o = 0; o < H; ++o) {
                const std::size_t k = i * H + o;
                if (!keep[li][k] || act[li + 1][k] <= 0.0)
                    dl_act[k] = 0.0;
                else if (dropout > 0.0)
                    dl_act[k] /= (1.0 - dropout);
            }
        std::vector<double> next_delta(B * lin, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
            const double* xin = act[li].data() + i * lin;
            const double* dl = dl_act.data() + i * H;
            double* nd = next_delta.data() + i * lin;
            for (std::uint32_t o = 0; o < H; ++o) {
                if (dl[o] == 0.0) continue;
                grads.b[li][o] += dl[o];
                double* g = grads.w[li].data() + static_cast<std::size_t>(o) * lin;
                const float* w = model.weights[li].data() + static_cast<std::size_t>(o) * lin;
                for (std::uint32_t k = 0; k < lin; ++k) {
                    g[k] += dl[o] * xin[k];
                    nd[k] += dl[o] * w[k];
                }
            }
        }
        if (weight_decay > 0.0)
            for (std::size_t k = 0; k < grads.w[li].size(); ++k) {
                loss += 0.5 * weight_decay * model.weights[li][k] * model.weights[li][k];
                grads.w[li][k] += weight_decay * model.weights[li][k];
            }
        cur_delta = std::move(next_delta);
    }
    return loss;
}

namespace {

struct AdamParam {
    std::vector<float>* value;
    std::vector<double> m, v;
    explicit AdamParam(std::vector<float>* p) : value(p), m(p->size(), 0.0), v(p->size(), 0.0) {}
};

void adam_step(AdamParam& p, const std::vector<double>& grad, double lr, std::uint64_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t k = 0; k < grad.size(); ++k) {
        p.m[k] = b1 * p.m[k] + (1.0 - b1) * grad[k];
        p.v[k] = b2 * p.v[k] + (1.0 - b2) * grad[k] * grad[k];
        (*p.value)[k] -= static_cast<float>(lr * (p.m[k] / c1) / (std::sqrt(p.v[k] / c2) + eps));
    }
}

} // namespace

MlpModel train_mlp(const FeatureMatrix& X, const std::vector<std::int32_t>& y,
                   const std::vector<NodeId>& train_idx, const std::vector<NodeId>& val_idx,
                   const ClassifierConfig& cfg, std::uint64_t seed) {
    if (cfg.layers < 1) throw ValidationError("train_mlp: layers must be >= 1");
    if (train_idx.empty()) throw ValidationError("train_mlp: empty training set");
    const std::uint32_t D = static_cast<std::uint32_t>(X.dim);
    const std::uint32_t C = static_cast<std::uint32_t>(
        std::max(count_classes(y, train_idx), count_classes(y, val_idx)));
    const std::size_t num_hidden = cfg.layers - 1;

    MlpModel model;
    model.in_dim = D;
    model.num_classes = C;
    model.hidden = cfg.hidden;
    model.layers = cfg.layers;
    model.jumping_knowledge = cfg.jumping_knowledge && num_hidden > 0;

    Rng rng(stream_key(seed, 0x4d4c50ULL)); // "MLP"
    auto glorot = [&](std::uint32_t out, std::uint32_t in) {
        std::vector<float> w(static_cast<std::size_t>(out) * in);
        const double bound = std::sqrt(6.0 / (out + in));
        for (auto& x : w) x = static_cast<float>(rng.next_double(-bound, bound));
        return w;
    };
    std::uint32_t in = D;
    for (std::size_t l = 0; l < num_hidden; ++l) {
        model.weights.push_back(glorot(cfg.hidden, in));
        model.biases.emplace_back(cfg.hidden, 0.0f);
        in = cfg.hidden;
    }
    const std::uint32_t head_in =
        num_hidden == 0 ? D
                        : (model.jumping_knowledge ? cfg.hidden * static_cast<std::uint32_t>(num_hidden)
                                                   : cfg.hidden);
    model.weights.push_back(glorot(C, head_in));
    model.biases.emplace_back(C, 0.0f);

    std::vector<AdamParam> adam;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        adam.emplace_back(&model.weights[l]);
        adam.emplace_back(&model.biases[l]);
    }

    MlpModel best = model;
    double best_val = -std::numeric_limits<double>::infinity();
    std::uint32_t since_best = 0;
    std::uint64_t t = 0;
    MlpGrads grads;

    for (std::uint32_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng drop_rng(stream_key(seed, 0x44524f50ULL, epoch)); // "DROP"
        const double loss = mlp_loss_and_grad(model, X, y, train_idx, cfg.dropout,
                                              cfg.weight_decay, &drop_rng, grads);
        ++t;
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            adam_step(adam[2 * l], grads.w[l], cfg.learning_rate, t);
            adam_step(adam[2 * l + 1], grads.b[l], cfg.learning_rate, t);
        }

        // early stopping on validation accuracy
        double val_acc;
        if (!val_idx.empty()) {
            std::size_t hit = 0;
            for (NodeId i : val_idx)
                if (model.predict(X.row(i)) == y[i]) ++hit;
            val_acc = static_cast<double>(hit) / static_cast<double>(val_idx.size());
        } else {
            val_acc = -loss; // no validation set: fall back to training loss
        }
        if (val_acc > best_val) {
            best_val = val_acc;
            best = model;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return best;
}

template <typename Model>
double accuracy(const Model& model, const FeatureMatrix& X,
                const std::vector<std::int32_t>& y, const std::vector<NodeId>& idx) {
    if (idx.empty()) throw ValidationError("accuracy: empty index set");
    std::size_t hit = 0;
    for (NodeId i : idx)
        if (model.predict(X.row(i)) == y[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

template double accuracy<LinearModel>(const LinearModel&, const FeatureMatrix&,
                                      const std::vector<std::int32_t>&,
                                      const std::vector<NodeId>&);
template double accuracy<MlpModel>(const MlpModel&, const FeatureMatrix&,
                                   const std::vector<std::int32_t>&,
                                   const std::vector<NodeId>&);

FeatureMatrix concat_features(const EmbeddingMatrix& emb, const FeatureMatrix& feats) {
    if (feats.rows != emb.n)
        throw ValidationError("concat_features: row count mismatch");
    FeatureMatrix out;
    out.rows = emb.n;
    out.dim = emb.d + feats.dim;
    out.values.resize(out.rows * out.dim);
    for (std::size_t i = 0; i < out.rows; ++i) {
        auto e = emb.row(static_cast<std::uint32_t>(i));
        std::copy(e.begin(), e.end(), out.values.begin() + i * out.dim);
        auto f = feats.row(i);
        std::copy(f.begin(), f.end(), out.values.begin() + i * out.dim + emb.d);
    }
    return out;
}

FeatureMatrix as_features(const EmbeddingMatrix& emb) {
    FeatureMatrix out;
    out.rows = emb.n;
    out.dim = emb.d;
    out.values = emb.values;
    return out;
}

} // namespace in2v
