#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "crossrl/embedding.hpp"
#include "crossrl/env.hpp"
#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"
#include "crossrl/rng.hpp"

namespace crossrl {

struct PolicyShape {
    int inputs = kObservationSize;
    int hidden1 = 64;
    int hidden2 = 64;
    int actions = kActions;

    std::size_t parameter_count() const;
    friend bool operator==(const PolicyShape&, const PolicyShape&) = default;
};

struct PolicyOutput {
    std::vector<double> logits;
    std::vector<double> probs;
    double value = 0.0;
};

/// Shared tanh body (two hidden layers) with a softmax policy head and a
/// scalar value head. Parameters live in one flat vector:
///   W1 (h1 x in), b1, W2 (h2 x h1), b2, Wp (A x h2), bp, wv (h2), bv
class Policy {
public:
    Policy() = default;
    /// Scaled Gaussian initialization; the policy head starts near zero so
    /// the initial action distribution is close to uniform.
    Policy(PolicyShape shape, std::uint64_t seed);

    const PolicyShape& shape() const { return shape_; }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }

    /// Throws std::invalid_argument on wrong length or non-finite input.
    PolicyOutput forward(std::span<const double> observation) const;

    bool all_finite() const;

private:
    friend struct PolicyLayout;
    PolicyShape shape_;
    std::vector<double> params_;
};

struct ActionSample {
    int action = 0;
    double log_prob = 0.0;
};

ActionSample sample_action(std::span<const double> probs, Rng& rng);

double entropy(std::span<const double> probs);

struct Transition {
    Observation observation{};
    int action = 0;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    /// True when the episode ended after this transition.
    bool episode_end = false;
};

/// Transitions from one environment in time order, plus the bootstrap value
/// of the state following the last transition.
struct Trajectory {
    std::vector<Transition> steps;
    double bootstrap_value = 0.0;
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalized advantage estimation; the recursion is cut at episode ends.
/// Advantages are returned unnormalized.
GaeResult compute_gae(const Trajectory& trajectory, double gamma, double lambda);

struct PPOConfig {
    double learning_rate = 3e-3;
    int batch_size = 1028;
    double clip_ratio = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double gamma = 0.99;
    double lambda = 0.95;
    int epochs = 10;
    double max_grad_norm = 0.5;
    bool normalize_advantages = true;

    void validate() const;
};

/// One minibatch sample as seen by the loss.
struct LossSample {
    const Observation* observation = nullptr;
    int action = 0;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double value_target = 0.0;
};

struct LossTerms {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Mean over the batch of  -min(r A, clip(r) A) - c_ent H + c_v (V - R)^2.
/// When `gradient` is non-null it receives d(total)/d(parameters).
LossTerms ppo_loss(const Policy& policy, std::span<const LossSample> batch, const PPOConfig& cfg,
                   std::vector<double>* gradient);

class AdamOptimizer {
public:
    explicit AdamOptimizer(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(std::span<double> params, std::span<const double> grad, double learning_rate);

private:
    std::vector<double> m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

struct UpdateDiagnostics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    int minibatches = 0;
    bool aborted = false;
};

/// Epochs of shuffled minibatch Adam steps on the clipped surrogate. A
/// non-finite loss aborts the update and restores the previous parameters.
UpdateDiagnostics ppo_update(Policy& policy, AdamOptimizer& optimizer, std::span<const Trajectory> rollouts,
                             const PPOConfig& cfg, Rng& rng);

/// Checkpoint: "CRRLCKPT" magic, u32 version, u64 header length, JSON
/// header (shape, objective, step, config hash), then the raw parameters.
struct Checkpoint {
    Policy policy;
    Objective objective = Objective::global;
    long step = 0;
    std::string config_hash;
};

std::string shape_hash(const PolicyShape& shape);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// A graph prepared for training or evaluation.
struct Instance {
    std::string id;
    std::string graph_class;
    Graph graph;
    Drawing initial;
    StructuralEmbedding embedding;
};

/// Builds an instance with its KK initial layout and embedding. The
/// returned object must not be moved after construction because the
/// drawing refers to the owned graph; use the unique_ptr form.
std::unique_ptr<Instance> make_instance(std::string id, std::string graph_class, Graph graph, std::uint64_t layout_seed);

struct Curriculum {
    /// Step fractions at which phase 2 (mixed) and phase 3 start.
    double mixed_from = 1.0 / 3.0;
    double ba_from = 2.0 / 3.0;
    double mixed_ba_probability = 0.5;
    double late_ba_probability = 0.9;

    double ba_probability(double progress) const;
};

/// Picks an instance index for a new episode: class by curriculum, graph
/// uniformly within the class. Falls back to the other class when empty.
int sample_instance(std::span<const int> rome, std::span<const int> ba, double ba_probability, Rng& rng);

struct TrainConfig {
    PPOConfig ppo;
    PolicyShape shape;
    EnvConfig env;
    Curriculum curriculum;
    long total_steps = 200000;
    int envs = 16;
    /// Steps per environment between updates.
    int rollout_steps = 128;
    std::uint64_t seed = 0;
};

struct TrainLogRow {
    long step = 0;
    double mean_reward = 0.0;
    double entropy = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    int episodes = 0;
    double mean_episode_return = 0.0;
};

struct TrainResult {
    Policy policy;
    std::vector<TrainLogRow> log;
    long steps = 0;
};

using TrainCallback = std::function<void(const TrainLogRow&, const Policy&)>;

/// Environments step concurrently against a frozen policy snapshot for
/// `rollout_steps`, then the learner runs one PPO update.
TrainResult train(const TrainConfig& cfg, std::span<const Instance* const> instances, const TrainCallback& on_update = {});

void write_train_log(const std::vector<TrainLogRow>& log, const std::filesystem::path& path);

/// Samples actions from the policy.
Environment::ActionChooser policy_chooser(const Policy& policy, Rng& rng);
/// Uniform over the 16 actions.
Environment::ActionChooser uniform_chooser(Rng& rng);

}  // namespace crossrl
