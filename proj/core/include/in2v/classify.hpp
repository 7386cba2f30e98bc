#pragma once

#include <cstdint>
#include <vector>

#include "in2v/embedding.hpp"
#include "in2v/graph.hpp"

namespace in2v {

struct ClassifierConfig {
    enum class Kind { LogReg, Mlp };
    Kind kind = Kind::Mlp;
    std::uint32_t layers = 2;
    std::uint32_t hidden = 64;
    double learning_rate = 0.01;
    double weight_decay = 0.0;
    double dropout = 0.5;
    bool jumping_knowledge = false;
    std::uint32_t max_epochs = 300;
    std::uint32_t patience = 50;
};

// Multinomial softmax classifier; zero-initialized, fit by full-batch
// gradient descent with L2 penalty.
struct LinearModel {
    std::uint32_t in_dim = 0;
    std::uint32_t num_classes = 0;
    std::vector<float> weights; // num_classes x in_dim
    std::vector<float> bias;    // num_classes

    std::int32_t predict(std::span<const float> x) const;
};

LinearModel train_logreg(const FeatureMatrix& X, const std::vector<std::int32_t>& y,
                         const std::vector<NodeId>& train_idx, double l2);

// Feed-forward net with ReLU and dropout between layers; optional
// jumping-knowledge head that sees every hidden layer's output.
struct MlpModel {
    std::uint32_t in_dim = 0;
    std::uint32_t num_classes = 0;
    std::uint32_t hidden = 0;
    std::uint32_t layers = 1;
    bool jumping_knowledge = false;
    // weights[i] maps layer input i to its output, row-major (out x in); the
    // last entry is the classifier head.
    std::vector<std::vector<float>> weights;
    std::vector<std::vector<float>> biases;

    std::int32_t predict(std::span<const float> x) const;
    std::vector<float> logits(std::span<const float> x) const;
};

MlpModel train_mlp(const FeatureMatrix& X, const std::vector<std::int32_t>& y,
                   const std::vector<NodeId>& train_idx, const std::vector<NodeId>& val_idx,
                   const ClassifierConfig& cfg, std::uint64_t seed);

// Mean softmax cross-entropy plus 0.5*l2*|W|^2 — the objective train_logreg
// descends. Gradients are written to grad_w (num_classes x in_dim) and grad_b.
double logreg_loss_and_grad(const LinearModel& model, const FeatureMatrix& X,
                            const std::vector<std::int32_t>& y,
                            const std::vector<NodeId>& idx, double l2,
                            std::vector<double>& grad_w, std::vector<double>& grad_b);

struct MlpGrads {
    std::vector<std::vector<double>> w; // one entry per weight matrix
    std::vector<std::vector<double>> b;
};

class Rng;

// Full-batch loss and backprop gradients for one epoch; drop_rng == nullptr
// disables dropout and makes the objective deterministic.
double mlp_loss_and_grad(const MlpModel& model, const FeatureMatrix& X,
                         const std::vector<std::int32_t>& y, const std::vector<NodeId>& idx,
                         double dropout, double weight_decay, Rng* drop_rng,
                         MlpGrads& grads);

// Fraction of idx whose argmax prediction matches; ties break to the lowest
// class index.
template <typename Model>
double accuracy(const Model& model, const FeatureMatrix& X,
                const std::vector<std::int32_t>& y, const std::vector<NodeId>& idx);

// Row-wise [embedding | features] concatenation.
FeatureMatrix concat_features(const EmbeddingMatrix& emb, const FeatureMatrix& feats);

// Embedding rows viewed as a feature matrix.
FeatureMatrix as_features(const EmbeddingMatrix& emb);

extern template double accuracy<LinearModel>(const LinearModel&, const FeatureMatrix&,
                                             const std::vector<std::int32_t>&,
                                             const std::vector<NodeId>&);
extern template double accuracy<MlpModel>(const MlpModel&, const FeatureMatrix&,
                                          const std::vector<std::int32_t>&,
                                          const std::vector<NodeId>&);

} // namespace in2v
